use std::collections::HashSet;
use std::fmt::Write;

use crate::unfolding::{EventId, EventSet};

/// One `Explore(C, D, A)` call.
#[derive(Clone, Debug)]
pub struct CallNode {
    pub c: EventSet,
    pub d: EventSet,
    pub a: EventSet,
    pub chosen: Option<EventId>,
    pub parent: Option<usize>,
    pub left: Option<usize>,
    pub right: Option<usize>,
    /// `C` was recorded as a leaf configuration.
    pub leaf: bool,
}

/// The tree of `Explore` calls; node 0 is the root.
#[derive(Clone, Debug, Default)]
pub struct CallTree {
    pub nodes: Vec<CallNode>,
}

impl CallTree {
    pub(crate) fn push(
        &mut self,
        c: &EventSet,
        d: &EventSet,
        a: &EventSet,
        parent: Option<usize>,
        right: bool,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(CallNode {
            c: c.clone(),
            d: d.clone(),
            a: a.clone(),
            chosen: None,
            parent,
            left: None,
            right: None,
            leaf: false,
        });
        if let Some(p) = parent {
            if right {
                self.nodes[p].right = Some(id);
            } else {
                self.nodes[p].left = Some(id);
            }
        }
        id
    }

    /// Leaf configurations recorded in the subtree rooted at `n`.
    pub fn leaves_under(&self, n: usize) -> Vec<&EventSet> {
        let mut out = Vec::new();
        let mut stack = vec![n];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if node.leaf {
                out.push(&node.c);
            }
            stack.extend(node.left);
            stack.extend(node.right);
        }
        out
    }

    /// No leaf of a node's left subtree reappears in its right subtree.
    pub fn check_left_right_disjoint(&self) -> Result<(), String> {
        for (i, node) in self.nodes.iter().enumerate() {
            let (Some(l), Some(r)) = (node.left, node.right) else { continue };
            let left: HashSet<&EventSet> = self.leaves_under(l).into_iter().collect();
            if let Some(dup) = self.leaves_under(r).into_iter().find(|c| left.contains(c)) {
                return Err(format!("node {i}: configuration {dup:?} recorded in both subtrees"));
            }
        }
        Ok(())
    }

    /// Graphviz rendering with node labels `C | D | A` (`⊥` omitted).
    pub fn to_dot(&self) -> String {
        fn set(s: &EventSet) -> String {
            let v: Vec<String> = s.iter().filter(|&e| e != EventId::BOTTOM).map(|e| e.to_string()).collect();
            if v.is_empty() {
                "∅".into()
            } else {
                v.join(",")
            }
        }
        let mut out = String::from("digraph calltree {\n  node [shape=box];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if n.leaf { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  n{i} [label=\"{} | {} | {}\"{shape}];", set(&n.c), set(&n.d), set(&n.a));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(l) = n.left {
                let e = n.chosen.map(|e| e.to_string()).unwrap_or_default();
                let _ = writeln!(out, "  n{i} -> n{l} [label=\"+{e}\"];");
            }
            if let Some(r) = n.right {
                let _ = writeln!(out, "  n{i} -> n{r} [style=dashed];");
            }
        }
        out.push_str("}\n");
        out
    }
}
