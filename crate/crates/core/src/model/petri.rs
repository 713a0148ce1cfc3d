//! 1-safe Petri nets with read arcs, compiled to guarded commands.
//!
//! Each place becomes a 0/1 variable. A transition is enabled when its
//! preset and read places are marked and the places it would newly mark are
//! empty; the last condition turns would-be unsafe firings into disabledness.

use std::collections::{BTreeSet, HashMap};

use serde::Deserialize;

use super::{Assignment, Atom, CmpOp, Expr, IndependenceRelation, Operand, SystemDef, TransitionDef, VarDecl};
use crate::error::LoadError;

/// Which net dependence the compiled system carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DependenceMode {
    /// Classic unfolding dependence: read arcs behave as consume-and-produce.
    Classic,
    /// Transitions whose only common places are shared read arcs are independent.
    ReadArcs,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNet {
    places: Vec<String>,
    #[serde(default)]
    marking: Vec<String>,
    transitions: Vec<RawNetTransition>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetTransition {
    id: String,
    #[serde(default)]
    pre: Vec<String>,
    #[serde(default)]
    post: Vec<String>,
    #[serde(default)]
    read: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetTransition {
    pub id: String,
    pub pre: BTreeSet<usize>,
    pub post: BTreeSet<usize>,
    pub read: BTreeSet<usize>,
}

impl NetTransition {
    /// Places tested or consumed: the classic preset, read arcs included.
    fn preset(&self) -> BTreeSet<usize> {
        self.pre.union(&self.read).copied().collect()
    }

    /// Places produced: the classic postset, read arcs included.
    fn postset(&self) -> BTreeSet<usize> {
        self.post.union(&self.read).copied().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PetriNet {
    pub places: Vec<String>,
    pub marking: BTreeSet<usize>,
    pub transitions: Vec<NetTransition>,
}

impl PetriNet {
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let raw: RawNet = serde_json::from_str(text).map_err(LoadError::from_json)?;
        let mut index = HashMap::new();
        for (i, p) in raw.places.iter().enumerate() {
            if index.insert(p.as_str(), i).is_some() {
                return Err(LoadError::invalid(text, format!("places[{i}]"), format!("duplicate place '{p}'")));
            }
        }
        let place = |name: &str, loc: String| {
            index.get(name).copied().ok_or_else(|| LoadError::invalid(text, loc, format!("unknown place '{name}'")))
        };
        let mut marking = BTreeSet::new();
        for (i, p) in raw.marking.iter().enumerate() {
            if !marking.insert(place(p, format!("marking[{i}]"))?) {
                return Err(LoadError::invalid(
                    text,
                    format!("marking[{i}]"),
                    format!("place '{p}' marked twice; initial marking is not 1-safe"),
                ));
            }
        }
        let mut ids = BTreeSet::new();
        let mut transitions = Vec::new();
        for (ti, t) in raw.transitions.iter().enumerate() {
            let loc = format!("transitions[{ti}] (id \"{}\")", t.id);
            if !ids.insert(t.id.clone()) {
                return Err(LoadError::invalid(text, loc, format!("duplicate transition id '{}'", t.id)));
            }
            let set = |names: &[String]| -> Result<BTreeSet<usize>, LoadError> {
                names.iter().map(|n| place(n, loc.clone())).collect()
            };
            let read = set(&t.read)?;
            // a place both consumed and read is only read
            let pre = set(&t.pre)?.difference(&read).copied().collect();
            transitions.push(NetTransition { id: t.id.clone(), pre, post: set(&t.post)?, read });
        }
        Ok(PetriNet { places: raw.places, marking, transitions })
    }

    /// Net-level enabledness: every preset and read place is marked.
    pub fn is_enabled(&self, marking: &BTreeSet<usize>, t: usize) -> bool {
        self.transitions[t].preset().is_subset(marking)
    }

    /// Net-level firing; callers check enabledness first.
    pub fn fire(&self, marking: &BTreeSet<usize>, t: usize) -> BTreeSet<usize> {
        let tr = &self.transitions[t];
        let mut m: BTreeSet<usize> = marking.difference(&tr.pre).copied().collect();
        m.extend(tr.post.iter().copied());
        m
    }

    pub fn dependence(&self, mode: DependenceMode) -> IndependenceRelation {
        let ts = &self.transitions;
        let mut rel = IndependenceRelation::diagonal(ts.len());
        for a in 0..ts.len() {
            for b in a + 1..ts.len() {
                let (ta, tb) = (&ts[a], &ts[b]);
                let shared_reads: BTreeSet<usize> = match mode {
                    DependenceMode::Classic => BTreeSet::new(),
                    DependenceMode::ReadArcs => ta.read.intersection(&tb.read).copied().collect(),
                };
                let clash =
                    |x: &BTreeSet<usize>, y: &BTreeSet<usize>| x.intersection(y).any(|p| !shared_reads.contains(p));
                let (pre_a, post_a, pre_b, post_b) = (ta.preset(), ta.postset(), tb.preset(), tb.postset());
                if clash(&post_a, &pre_b) || clash(&post_b, &pre_a) || clash(&pre_a, &pre_b) {
                    rel.set_dependent(a, b);
                }
            }
        }
        rel
    }

    /// Compiles the net to a guarded-command system carrying the chosen dependence.
    pub fn compile(&self, mode: DependenceMode) -> SystemDef {
        let vars = self
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| VarDecl { name: p.clone(), lo: 0, hi: 1, init: i64::from(self.marking.contains(&i)) })
            .collect();
        let transitions = self
            .transitions
            .iter()
            .map(|t| {
                let is = |p: usize, v: i64| Atom { lhs: Operand::Var(p), op: CmpOp::Eq, rhs: Operand::Const(v) };
                let mut guard: Vec<Atom> = t.preset().into_iter().map(|p| is(p, 1)).collect();
                guard.extend(t.post.iter().filter(|p| !t.pre.contains(p) && !t.read.contains(p)).map(|&p| is(p, 0)));
                let mut effect: Vec<Assignment> = t
                    .pre
                    .iter()
                    .filter(|p| !t.post.contains(p))
                    .map(|&p| Assignment { target: p, value: Expr::Const(0) })
                    .collect();
                effect.extend(
                    t.post
                        .iter()
                        .filter(|p| !t.read.contains(p))
                        .map(|&p| Assignment { target: p, value: Expr::Const(1) }),
                );
                TransitionDef::new(t.id.clone(), t.id.clone(), guard, effect)
                    .expect("net effects assign each place once")
            })
            .collect();
        let sys = SystemDef::new(vars, transitions).expect("parsed nets have unique ids and 0/1 domains");
        // variables were re-sorted by name; transitions keep their order
        sys.with_independence(self.dependence(mode))
    }
}

/// Whether `text` is a JSON object with a top-level `places` key.
pub fn is_petri_net(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text).is_ok_and(|v| v.get("places").is_some())
}

/// Parses a Petri net and compiles it with the requested dependence.
pub fn load_petri_net(text: &str, mode: DependenceMode) -> Result<SystemDef, LoadError> {
    Ok(PetriNet::parse(text)?.compile(mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_unconditional_independence;

    #[test]
    fn net_detection() {
        assert!(is_petri_net(r#"{"places": ["p"], "marking": [], "transitions": []}"#));
        assert!(!is_petri_net(r#"{"vars": {"places": {"init": 0, "domain": [0, 1]}}, "transitions": []}"#));
        assert!(!is_petri_net("not json"));
    }

    /// Two readers of `p` and a transition consuming it.
    const TWO_READERS: &str = r#"{
        "places": ["p", "a1", "a2", "b1", "b2", "q"],
        "marking": ["p", "a1", "a2"],
        "transitions": [
            {"id": "t1", "pre": ["a1"], "read": ["p"], "post": ["b1"]},
            {"id": "t2", "pre": ["a2"], "read": ["p"], "post": ["b2"]},
            {"id": "t3", "pre": ["p"], "post": ["q"]}
        ]
    }"#;

    #[test]
    fn classic_mode_makes_readers_dependent() {
        let sys = load_petri_net(TWO_READERS, DependenceMode::Classic).unwrap();
        assert!(sys.independence.dependent(0, 1));
        assert!(sys.independence.dependent(0, 2));
    }

    #[test]
    fn read_arc_mode_makes_readers_independent() {
        let sys = load_petri_net(TWO_READERS, DependenceMode::ReadArcs).unwrap();
        assert!(sys.independence.independent(0, 1));
        assert!(sys.independence.dependent(0, 2));
        assert!(sys.independence.dependent(1, 2));
    }

    #[test]
    fn read_arc_relation_is_contained_in_classic() {
        let net = PetriNet::parse(TWO_READERS).unwrap();
        let classic = net.dependence(DependenceMode::Classic);
        let relaxed = net.dependence(DependenceMode::ReadArcs);
        assert!(relaxed.dependent_pairs().is_subset(&classic.dependent_pairs()));
    }

    #[test]
    fn both_modes_are_sound() {
        for mode in [DependenceMode::Classic, DependenceMode::ReadArcs] {
            let sys = load_petri_net(TWO_READERS, mode).unwrap();
            assert!(check_unconditional_independence(&sys, &sys.independence, 1000).unwrap().is_empty());
        }
    }

    #[test]
    fn disjoint_transitions_independent_in_both_modes() {
        let text = r#"{"places": ["a", "b", "c", "d"], "marking": ["a", "c"],
            "transitions": [{"id": "x", "pre": ["a"], "post": ["b"]}, {"id": "y", "pre": ["c"], "post": ["d"]}]}"#;
        for mode in [DependenceMode::Classic, DependenceMode::ReadArcs] {
            let sys = load_petri_net(text, mode).unwrap();
            assert!(sys.independence.independent(0, 1));
        }
    }

    #[test]
    fn compiled_enabledness_matches_net_on_reachable_markings() {
        let net = PetriNet::parse(TWO_READERS).unwrap();
        let sys = net.compile(DependenceMode::ReadArcs);
        let mut stack = vec![net.marking.clone()];
        let mut seen = BTreeSet::new();
        while let Some(m) = stack.pop() {
            if !seen.insert(m.clone()) {
                continue;
            }
            let state = crate::model::GlobalState::new(
                (0..net.places.len())
                    .map(|i| {
                        let name = &sys.vars[i].name;
                        let p = net.places.iter().position(|q| q == name).unwrap();
                        i64::from(m.contains(&p))
                    })
                    .collect(),
            );
            for t in 0..net.transitions.len() {
                assert_eq!(sys.is_enabled(&state, t), net.is_enabled(&m, t));
                if net.is_enabled(&m, t) {
                    stack.push(net.fire(&m, t));
                }
            }
        }
        assert!(seen.len() > 3);
    }

    #[test]
    fn unsafe_marking_rejected() {
        let text = r#"{"places": ["a"], "marking": ["a", "a"], "transitions": []}"#;
        let err = load_petri_net(text, DependenceMode::Classic).unwrap_err().to_string();
        assert!(err.contains("1-safe"), "{err}");
    }

    #[test]
    fn unknown_place_rejected_with_location() {
        let text = "{\"places\": [\"a\"],\n \"transitions\": [\n{\"id\": \"t\", \"pre\": [\"zz\"]}]}";
        let err = load_petri_net(text, DependenceMode::Classic).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("'zz'"), "{err}");
    }

    #[test]
    fn re_marking_a_marked_place_disables() {
        let text = r#"{"places": ["a", "b"], "marking": ["a", "b"],
            "transitions": [{"id": "t", "pre": ["a"], "post": ["b"]}]}"#;
        let sys = load_petri_net(text, DependenceMode::Classic).unwrap();
        assert!(sys.enabled(&sys.initial_state()).is_empty());
    }
}
