//! Brute-force ground truth over the interleaving semantics.
//!
//! Everything here works on plain transition sequences and never touches the
//! unfolding machinery, so it can be used to check the explorer.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::explorer::Exploration;
use crate::model::{
    check_unconditional_independence, fire, GlobalState, IndependenceRelation, SystemDef, TransitionIndex,
};
use crate::unfolding::EventSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBounds {
    pub max_runs: usize,
    pub max_states: usize,
    pub max_length: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds { max_runs: 1_000_000, max_states: 100_000, max_length: 10_000 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle run bound of {0} exceeded")]
    RunBound(usize),
    #[error("oracle state bound of {0} exceeded")]
    StateBound(usize),
    #[error("oracle run length bound of {0} exceeded (is the system terminating?)")]
    LengthBound(usize),
}

/// The lexicographically least run of a trace and the state it reaches.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceCanon {
    pub canonical_run: Vec<String>,
    pub reached: GlobalState,
}

/// All deadlocking runs, by depth-first search.
pub fn enumerate_deadlocking_runs(
    sys: &SystemDef,
    bounds: &OracleBounds,
) -> Result<Vec<Vec<TransitionIndex>>, OracleError> {
    let mut out = Vec::new();
    visit_runs(sys, bounds, |run, _, enabled| {
        if enabled.is_empty() {
            out.push(run.to_vec());
        }
    })?;
    Ok(out)
}

/// Calls `f(run, state, enabled)` for every run, prefixes included.
fn visit_runs(
    sys: &SystemDef,
    bounds: &OracleBounds,
    mut f: impl FnMut(&[TransitionIndex], &GlobalState, &[TransitionIndex]),
) -> Result<(), OracleError> {
    struct Level {
        state: GlobalState,
        enabled: Vec<TransitionIndex>,
        next: usize,
    }
    let init = sys.initial_state();
    let enabled = sys.enabled(&init);
    f(&[], &init, &enabled);
    let mut visited = 1usize;
    let mut run = Vec::new();
    let mut stack = vec![Level { state: init, enabled, next: 0 }];
    while let Some(top) = stack.last_mut() {
        if top.next == top.enabled.len() {
            stack.pop();
            run.pop();
            continue;
        }
        let t = top.enabled[top.next];
        top.next += 1;
        let state = sys.fire(&top.state, t).expect("enabled transition fires");
        run.push(t);
        if run.len() > bounds.max_length {
            return Err(OracleError::LengthBound(bounds.max_length));
        }
        visited += 1;
        if visited > bounds.max_runs {
            return Err(OracleError::RunBound(bounds.max_runs));
        }
        let enabled = sys.enabled(&state);
        f(&run, &state, &enabled);
        stack.push(Level { state, enabled, next: 0 });
    }
    Ok(())
}

/// Lexicographic normal form of `run` under `rel`, comparing transition ids.
///
/// Repeatedly emits the least (by id) transition among the remaining ones
/// that has no dependent transition before it.
pub fn canonical_order(sys: &SystemDef, rel: &IndependenceRelation, run: &[TransitionIndex]) -> Vec<TransitionIndex> {
    let mut rest: Vec<TransitionIndex> = run.to_vec();
    let mut out = Vec::with_capacity(run.len());
    while !rest.is_empty() {
        let mut best: Option<usize> = None;
        for i in 0..rest.len() {
            let free = rest[..i].iter().all(|&u| !rel.dependent(u, rest[i]));
            if free && best.is_none_or(|b| sys.transitions[rest[i]].id < sys.transitions[rest[b]].id) {
                best = Some(i);
            }
        }
        out.push(rest.remove(best.expect("the first element is always free")));
    }
    out
}

/// Canonicalizes a run with the system's own independence relation.
pub fn canonicalize(sys: &SystemDef, run: &[TransitionIndex]) -> TraceCanon {
    let order = canonical_order(sys, &sys.independence, run);
    TraceCanon { reached: sys.replay(&order).expect("equivalent runs are runs"), canonical_run: sys.run_ids(&order) }
}

/// The set of Mazurkiewicz traces of deadlocking runs.
pub fn deadlocking_traces(sys: &SystemDef, bounds: &OracleBounds) -> Result<BTreeSet<TraceCanon>, OracleError> {
    Ok(enumerate_deadlocking_runs(sys, bounds)?.iter().map(|r| canonicalize(sys, r)).collect())
}

pub fn reachable_states(sys: &SystemDef, bound: usize) -> Result<Vec<GlobalState>, OracleError> {
    sys.reachable(bound).map_err(OracleError::StateBound)
}

/// Number of prime traces per transition: runs whose last transition is the
/// unique maximum of the dependence order, up to equivalence.
///
/// Each prime trace is one event of the full unfolding, so this counts the
/// events labelled by each transition. Only meaningful on terminating systems.
pub fn prime_trace_counts(sys: &SystemDef, bounds: &OracleBounds) -> Result<Vec<usize>, OracleError> {
    let mut primes: Vec<HashSet<Vec<TransitionIndex>>> = vec![HashSet::new(); sys.transitions.len()];
    visit_runs(sys, bounds, |run, _, _| {
        let Some((&last, _)) = run.split_last() else { return };
        let mut below = vec![false; run.len()];
        below[run.len() - 1] = true;
        for i in (0..run.len() - 1).rev() {
            below[i] = (i + 1..run.len()).any(|j| below[j] && sys.dependent(run[i], run[j]));
        }
        if below.iter().all(|&b| b) {
            primes[last].insert(canonical_order(sys, &sys.independence, run));
        }
    })?;
    Ok(primes.iter().map(HashSet::len).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub checks: Vec<CheckResult>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn result(name: &'static str, status: CheckStatus, detail: impl Into<String>) -> CheckResult {
    CheckResult { name, status, detail: detail.into() }
}

/// Compares an exploration against the oracle.
///
/// * `traces` (cutoffs off): canonical leaf traces equal the deadlocking traces;
/// * `duplicates`: no leaf configuration recorded twice;
/// * `coverage` (cutoffs on): every reachable state is the state of a
///   sub-configuration of some leaf;
/// * `independence`: the relation is unconditionally valid.
pub fn cross_check(sys: &SystemDef, run: &Exploration<'_>, bounds: &OracleBounds) -> Verdict {
    let report = &run.report;
    let mut checks = Vec::new();

    if report.cutoffs_enabled {
        checks.push(result("traces", CheckStatus::Skipped, "cutoffs are on"));
    } else {
        checks.push(match deadlocking_traces(sys, bounds) {
            Err(e) => result("traces", CheckStatus::Skipped, e.to_string()),
            Ok(oracle) => {
                let explored: BTreeSet<TraceCanon> =
                    report.leaves.iter().map(|l| canonicalize(sys, &run.store.linearization(&l.config))).collect();
                if let Some(missing) = oracle.difference(&explored).next() {
                    result("traces", CheckStatus::Fail, format!("missing trace {}", missing.canonical_run.join(".")))
                } else if let Some(extra) = explored.difference(&oracle).next() {
                    result("traces", CheckStatus::Fail, format!("unexpected trace {}", extra.canonical_run.join(".")))
                } else {
                    result("traces", CheckStatus::Pass, format!("{} traces", oracle.len()))
                }
            }
        });
    }

    let mut seen = HashSet::new();
    let dup = report.leaves.iter().find(|l| !seen.insert(&l.config));
    checks.push(match dup {
        Some(l) => result("duplicates", CheckStatus::Fail, format!("configuration {:?} recorded twice", l.config)),
        None => result("duplicates", CheckStatus::Pass, format!("{} distinct leaves", report.leaves.len())),
    });

    checks.push(if !report.cutoffs_enabled {
        result("coverage", CheckStatus::Skipped, "cutoffs are off")
    } else {
        match reachable_states(sys, bounds.max_states) {
            Err(e) => result("coverage", CheckStatus::Skipped, e.to_string()),
            Ok(reach) => match covered_states(run, bounds.max_runs) {
                None => result("coverage", CheckStatus::Skipped, "too many sub-configurations"),
                Some(covered) => match reach.iter().find(|s| !covered.contains(*s)) {
                    Some(s) => result("coverage", CheckStatus::Fail, format!("state {} not covered", s.display(sys))),
                    None => result("coverage", CheckStatus::Pass, format!("{} states covered", reach.len())),
                },
            },
        }
    });

    checks.push(match check_unconditional_independence(sys, &sys.independence, bounds.max_states) {
        Err(b) => result("independence", CheckStatus::Skipped, format!("state bound of {b} exceeded")),
        Ok(v) if v.is_empty() => result("independence", CheckStatus::Pass, "no violation"),
        Ok(v) => {
            let v = &v[0];
            result(
                "independence",
                CheckStatus::Fail,
                format!(
                    "{} ◊ {} violated at {} ({:?})",
                    sys.transitions[v.first].id,
                    sys.transitions[v.second].id,
                    v.state.display(sys),
                    v.kind
                ),
            )
        }
    });
    Verdict { checks }
}

/// States of all sub-configurations of the explored leaves, or `None` past `limit` of them.
pub fn covered_states(run: &Exploration<'_>, limit: usize) -> Option<HashSet<GlobalState>> {
    let store = &run.store;
    let sys = store.system();
    let mut states = HashSet::new();
    let mut total = 0usize;
    for leaf in &run.report.leaves {
        let mut visited: HashSet<EventSet> = HashSet::new();
        let mut stack = vec![(EventSet::with_bottom(), sys.initial_state())];
        while let Some((c, s)) = stack.pop() {
            if !visited.insert(c.clone()) {
                continue;
            }
            total += 1;
            if total > limit {
                return None;
            }
            for e in leaf.config.iter().filter(|&e| !c.contains(e)) {
                if store.event(e).causes().is_subset(&c) {
                    let t = store.label(e).expect("only ⊥ is unlabelled");
                    let next = fire(sys, &s, &sys.transitions[t]).expect("configurations replay");
                    let mut c2 = c.clone();
                    c2.insert(e);
                    stack.push((c2, next));
                }
            }
            states.insert(s);
        }
    }
    Some(states)
}

/// Groups deadlocking runs by trace, for reporting.
pub fn runs_by_trace(sys: &SystemDef, bounds: &OracleBounds) -> Result<BTreeMap<TraceCanon, usize>, OracleError> {
    let mut m = BTreeMap::new();
    for r in enumerate_deadlocking_runs(sys, bounds)? {
        *m.entry(canonicalize(sys, &r)).or_insert(0) += 1;
    }
    Ok(m)
}
