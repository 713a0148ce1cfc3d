use std::collections::BTreeSet;

use super::{GlobalState, SystemDef, TransitionIndex};

/// Symmetric dependence over transition indices; its complement is the independence.
///
/// Every transition is dependent with itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceRelation {
    n: usize,
    dependent: Vec<bool>,
}

impl IndependenceRelation {
    /// The empty independence: every pair is dependent.
    pub fn all_dependent(n: usize) -> Self {
        IndependenceRelation { n, dependent: vec![true; n * n] }
    }

    /// Only the diagonal is dependent.
    pub fn diagonal(n: usize) -> Self {
        let mut rel = IndependenceRelation { n, dependent: vec![false; n * n] };
        for t in 0..n {
            rel.dependent[t * n + t] = true;
        }
        rel
    }

    /// Builds a relation from explicit dependent pairs; the diagonal is added.
    pub fn from_dependent_pairs(n: usize, pairs: impl IntoIterator<Item = (TransitionIndex, TransitionIndex)>) -> Self {
        let mut rel = Self::diagonal(n);
        for (a, b) in pairs {
            rel.set_dependent(a, b);
        }
        rel
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dependent(&self, a: TransitionIndex, b: TransitionIndex) -> bool {
        self.dependent[a * self.n + b]
    }

    pub fn independent(&self, a: TransitionIndex, b: TransitionIndex) -> bool {
        !self.dependent(a, b)
    }

    pub fn set_dependent(&mut self, a: TransitionIndex, b: TransitionIndex) {
        self.dependent[a * self.n + b] = true;
        self.dependent[b * self.n + a] = true;
    }

    /// Declares `a` and `b` independent. Ignored on the diagonal.
    pub fn set_independent(&mut self, a: TransitionIndex, b: TransitionIndex) {
        if a != b {
            self.dependent[a * self.n + b] = false;
            self.dependent[b * self.n + a] = false;
        }
    }

    /// Unordered dependent pairs `(a, b)` with `a <= b`, diagonal included.
    pub fn dependent_pairs(&self) -> BTreeSet<(TransitionIndex, TransitionIndex)> {
        let mut out = BTreeSet::new();
        for a in 0..self.n {
            for b in a..self.n {
                if self.dependent(a, b) {
                    out.insert((a, b));
                }
            }
        }
        out
    }

    /// Unordered independent pairs `(a, b)` with `a < b`.
    pub fn independent_pairs(&self) -> Vec<(TransitionIndex, TransitionIndex)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.independent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Derives a sound independence from read/write footprints and process tags.
///
/// Two transitions are dependent iff they are equal, belong to the same
/// process, or one writes a variable the other reads or writes.
pub fn syntactic_independence(sys: &SystemDef) -> IndependenceRelation {
    let ts = &sys.transitions;
    let mut rel = IndependenceRelation::diagonal(ts.len());
    for a in 0..ts.len() {
        for b in a + 1..ts.len() {
            let (ta, tb) = (&ts[a], &ts[b]);
            let touches = |w: &BTreeSet<usize>, other: &super::TransitionDef| {
                w.iter().any(|v| other.reads().contains(v) || other.writes().contains(v))
            };
            if ta.process == tb.process || touches(ta.writes(), tb) || touches(tb.writes(), ta) {
                rel.set_dependent(a, b);
            }
        }
    }
    rel
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Firing the first transition changed whether the second is enabled.
    EnablednessChanged,
    /// Both orders fire but reach different states (or one order blocks).
    NoDiamond,
}

/// A reachable state at which a pair declared independent does not commute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: GlobalState,
    pub first: TransitionIndex,
    pub second: TransitionIndex,
    pub kind: ViolationKind,
}

/// Checks that every independent pair commutes at every reachable state.
///
/// Returns the violating triples (empty when `rel` is a valid unconditional
/// independence), or `Err(bound)` if more than `bound` states are reachable.
pub fn check_unconditional_independence(
    sys: &SystemDef,
    rel: &IndependenceRelation,
    bound: usize,
) -> Result<Vec<Violation>, usize> {
    let states = sys.reachable(bound)?;
    let pairs = rel.independent_pairs();
    let mut violations = Vec::new();
    for s in &states {
        for &(a, b) in &pairs {
            for (t, u) in [(a, b), (b, a)] {
                if let Some(next) = sys.fire(s, t) {
                    if sys.is_enabled(s, u) != sys.is_enabled(&next, u) {
                        violations.push(Violation {
                            state: s.clone(),
                            first: t,
                            second: u,
                            kind: ViolationKind::EnablednessChanged,
                        });
                    }
                }
            }
            if sys.is_enabled(s, a) && sys.is_enabled(s, b) {
                let ab = sys.fire(s, a).and_then(|x| sys.fire(&x, b));
                let ba = sys.fire(s, b).and_then(|x| sys.fire(&x, a));
                if ab.is_none() || ab != ba {
                    violations.push(Violation {
                        state: s.clone(),
                        first: a,
                        second: b,
                        kind: ViolationKind::NoDiamond,
                    });
                }
            }
        }
    }
    Ok(violations)
}
