use std::fmt::Write;

use super::{EventSet, PrefixStore};

/// Graphviz rendering of a prefix.
///
/// Solid arrows are direct causality, dotted undirected edges immediate
/// conflict, and nodes are labelled `eid:transition`. Events outside `known`
/// (when given) are drawn dashed.
pub fn unfolding_dot(store: &PrefixStore<'_>, known: Option<&EventSet>) -> String {
    let mut out = String::from("digraph unfolding {\n  node [shape=box];\n");
    for e in store.event_ids() {
        let style = match known {
            Some(k) if !k.contains(e) => ", style=dashed",
            _ => "",
        };
        let _ = writeln!(out, "  {} [label=\"{}:{}\"{}];", e, e, escape(store.label_name(e)), style);
    }
    for e in store.event_ids() {
        for p in store.event(e).history_max() {
            let _ = writeln!(out, "  {p} -> {e};");
        }
    }
    for e in store.event_ids() {
        for &c in store.event(e).immediate_conflicts() {
            if e < c {
                let _ = writeln!(out, "  {e} -> {c} [style=dotted, dir=none, constraint=false];");
            }
        }
    }
    out.push_str("}\n");
    out
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
