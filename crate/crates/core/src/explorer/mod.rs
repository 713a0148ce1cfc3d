//! Optimal exploration of the maximal configurations of an unfolding.
//!
//! `Explore(C, D, A)` picks an enabled extension `e`, explores `C ∪ {e}`
//! first and then, if some alternative `J` to `D ∪ {e}` exists in `U`, the
//! configurations that avoid `e` through `J`. Finally `Remove` moves events
//! no longer needed to the cache `G`. Recursion is run on an explicit stack.

mod calltree;
mod live;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

pub use calltree::{CallNode, CallTree};
pub use live::{Adopted, Eviction, LiveSets};

use crate::cutoff::{extend_with_cutoffs, AdequateOrder, CutoffIndex};
use crate::model::{GlobalState, SystemDef};
use crate::unfolding::{EventId, EventSet, PrefixStore, StoreError};

/// How `e` is picked among the candidates of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChoicePolicy {
    /// Least (transition declaration index, event id).
    #[default]
    Ordered,
    /// Uniformly at random from a seeded generator.
    Random(u64),
}

impl FromStr for Eviction {
    type Err = String;

    /// `none`, `all` or `lru:N`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Eviction::None),
            "all" => Ok(Eviction::All),
            _ => s
                .strip_prefix("lru:")
                .and_then(|n| n.parse().ok())
                .map(Eviction::Lru)
                .ok_or_else(|| format!("bad cache policy '{s}' (none, all, lru:N)")),
        }
    }
}

impl fmt::Display for Eviction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eviction::None => f.write_str("none"),
            Eviction::All => f.write_str("all"),
            Eviction::Lru(n) => write!(f, "lru:{n}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub cutoffs: bool,
    pub order: AdequateOrder,
    pub policy: ChoicePolicy,
    /// Abort once more than this many non-`⊥` events are in the arena.
    pub max_events: Option<usize>,
    /// Abort once a node has `|C| + |D|` above this.
    pub max_depth: Option<usize>,
    pub cache: Eviction,
    pub record_call_tree: bool,
    /// Test hook: check node invariants, live-set invariants and the memory retention property at every node.
    pub check_invariants: bool,
    /// Fault injection: never take right branches.
    pub disable_alternatives: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            cutoffs: true,
            order: AdequateOrder::Size,
            policy: ChoicePolicy::Ordered,
            max_events: None,
            max_depth: None,
            cache: Eviction::None,
            record_call_tree: false,
            check_invariants: false,
            disable_alternatives: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExploreError {
    #[error("event bound of {0} exceeded (the unfolding may be infinite; enable cutoffs or raise --max-events)")]
    EventBound(usize),
    #[error("depth bound of {0} exceeded")]
    DepthBound(usize),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// One maximal (or terminal, with cutoffs) configuration reached.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub config: EventSet,
    pub state: GlobalState,
    /// `|U ∖ {⊥}|` when the leaf was reached.
    pub known: usize,
}

/// A configuration whose state sets `__error`, with one witness run.
#[derive(Clone, Debug, Serialize)]
pub struct AssertionHit {
    pub run: Vec<String>,
    pub state: String,
}

/// Outcome of the test hooks.
#[derive(Clone, Debug, Default)]
pub struct HookReport {
    pub nodes_checked: usize,
    /// Returns at which the memory precondition held, so the postcondition was asserted.
    pub memory_checks: usize,
    pub memory_violations: Vec<String>,
    pub invariant_violations: Vec<String>,
}

impl HookReport {
    pub fn is_clean(&self) -> bool {
        self.memory_violations.is_empty() && self.invariant_violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ExplorationReport {
    /// `|Ω|`.
    pub max_configs: usize,
    /// `|E|`: distinct non-`⊥` events that were ever in `U`.
    pub events: usize,
    /// `|E_cut|`: distinct events declared cutoff at least once.
    pub cutoffs: usize,
    /// `⟨|U_Ω|⟩`.
    pub avg_u_at_leaves: f64,
    pub time_ms: f64,
    pub leaves: Vec<Leaf>,
    /// Number of `Explore` calls.
    pub nodes: usize,
    pub cutoffs_enabled: bool,
    pub assertion_hits: Vec<AssertionHit>,
    pub hooks: HookReport,
}

impl ExplorationReport {
    /// The statistics object with the table column names as keys.
    pub fn stats_json(&self) -> serde_json::Value {
        serde_json::json!({
            "events": self.events,
            "cutoffs": self.cutoffs,
            "max_configs": self.max_configs,
            "avg_U_at_leaves": self.avg_u_at_leaves,
            "time_ms": self.time_ms,
        })
    }

    /// Distinct final states, sorted.
    pub fn final_states(&self) -> Vec<GlobalState> {
        let mut v: Vec<GlobalState> = self.leaves.iter().map(|l| l.state.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// A finished run: the report, the arena it built and the optional call tree.
pub struct Exploration<'s> {
    pub report: ExplorationReport,
    pub store: PrefixStore<'s>,
    pub live: LiveSets,
    pub call_tree: Option<CallTree>,
}

/// Runs the exploration from `Explore({⊥}, ∅, ∅)` with `U = {⊥}`.
pub fn explore<'s>(sys: &'s SystemDef, opts: &ExploreOptions) -> Result<Exploration<'s>, ExploreError> {
    let mut ex = Explorer::new(sys, opts.clone());
    let report = ex.run()?;
    Ok(Exploration { report, store: ex.store, live: ex.live, call_tree: ex.tree })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Enter,
    Left,
    Right,
    Done,
}

struct Frame {
    c: EventSet,
    d: EventSet,
    a: EventSet,
    chosen: Option<EventId>,
    stage: Stage,
    node: Option<usize>,
    /// Whether `Q ⊆ U ⊆ Q ∪ en(C)` held on entry.
    memory_pre: bool,
}

pub struct Explorer<'s> {
    sys: &'s SystemDef,
    opts: ExploreOptions,
    store: PrefixStore<'s>,
    live: LiveSets,
    index: CutoffIndex,
    withheld: EventSet,
    tree: Option<CallTree>,
    rng: Option<StdRng>,
    leaves: Vec<Leaf>,
    hits: Vec<AssertionHit>,
    hit_configs: HashSet<EventSet>,
    hooks: HookReport,
    nodes: usize,
}

impl<'s> Explorer<'s> {
    pub fn new(sys: &'s SystemDef, opts: ExploreOptions) -> Self {
        let store = PrefixStore::new(sys);
        let mut index = CutoffIndex::new();
        index.insert(&store, EventId::BOTTOM);
        let rng = match opts.policy {
            ChoicePolicy::Ordered => None,
            ChoicePolicy::Random(seed) => Some(StdRng::seed_from_u64(seed)),
        };
        Explorer {
            sys,
            tree: opts.record_call_tree.then(CallTree::default),
            opts,
            store,
            live: LiveSets::new(),
            index,
            withheld: EventSet::new(),
            rng,
            leaves: Vec::new(),
            hits: Vec::new(),
            hit_configs: HashSet::new(),
            hooks: HookReport::default(),
            nodes: 0,
        }
    }

    pub fn store(&self) -> &PrefixStore<'s> {
        &self.store
    }

    pub fn live(&self) -> &LiveSets {
        &self.live
    }

    pub fn run(&mut self) -> Result<ExplorationReport, ExploreError> {
        let start = Instant::now();
        let mut stack = vec![self.frame(EventSet::with_bottom(), EventSet::new(), EventSet::new(), None, false)];
        while let Some(top) = stack.last_mut() {
            match top.stage {
                Stage::Enter => {
                    let child = self.enter(top)?;
                    if let Some(child) = child {
                        stack.push(child);
                    }
                }
                Stage::Left => {
                    let e = top.chosen.expect("chosen before the left branch");
                    top.stage = Stage::Right;
                    if self.opts.disable_alternatives {
                        continue;
                    }
                    let mut d2 = top.d.clone();
                    d2.insert(e);
                    if let Some(j) = alternatives(&self.store, &self.live, &top.c, &d2) {
                        let mut a2 = j;
                        a2.difference_with(&top.c);
                        let (c, node) = (top.c.clone(), top.node);
                        let child = self.frame(c, d2, a2, node, true);
                        stack.push(child);
                    }
                }
                Stage::Right => {
                    let e = top.chosen.expect("chosen before removal");
                    self.remove(e, &top.c, &top.d);
                    top.stage = Stage::Done;
                }
                Stage::Done => {
                    let frame = stack.pop().expect("non-empty stack");
                    self.leave(&frame);
                }
            }
        }
        let events = self.live.ever_u().len() - 1;
        let total_known: usize = self.leaves.iter().map(|l| l.known).sum();
        Ok(ExplorationReport {
            max_configs: self.leaves.len(),
            events,
            cutoffs: self.withheld.len(),
            avg_u_at_leaves: if self.leaves.is_empty() { 0.0 } else { total_known as f64 / self.leaves.len() as f64 },
            time_ms: start.elapsed().as_secs_f64() * 1000.0,
            leaves: std::mem::take(&mut self.leaves),
            nodes: self.nodes,
            cutoffs_enabled: self.opts.cutoffs,
            assertion_hits: std::mem::take(&mut self.hits),
            hooks: std::mem::take(&mut self.hooks),
        })
    }

    fn frame(&mut self, c: EventSet, d: EventSet, a: EventSet, parent: Option<usize>, right: bool) -> Frame {
        let node = self.tree.as_mut().map(|t| t.push(&c, &d, &a, parent, right));
        Frame { c, d, a, chosen: None, stage: Stage::Enter, node, memory_pre: false }
    }

    /// Entry of `Explore(C, D, A)`; returns the left child, if any.
    fn enter(&mut self, f: &mut Frame) -> Result<Option<Frame>, ExploreError> {
        self.nodes += 1;
        if let Some(max) = self.opts.max_depth {
            if f.c.len() - 1 + f.d.len() > max {
                return Err(ExploreError::DepthBound(max));
            }
        }
        if self.opts.check_invariants {
            self.check_node(f)?;
            f.memory_pre = self.memory_precondition(&f.c, &f.d)?;
        }
        let order = self.opts.cutoffs.then_some(self.opts.order);
        let ext = extend_with_cutoffs(&mut self.store, &mut self.live, &mut self.index, order, &f.c)?;
        self.withheld.extend(ext.withheld.iter().copied());
        if let Some(max) = self.opts.max_events {
            if self.store.len() - 1 > max {
                return Err(ExploreError::EventBound(max));
            }
        }
        if self.sys.error_var().is_some() {
            self.check_assertion(&f.c)?;
        }
        let en: Vec<EventId> = ext
            .extensions
            .into_iter()
            .filter(|&e| self.live.in_u(e) && self.store.is_enabled_extension(&f.c, e))
            .collect();
        if en.is_empty() {
            self.leaves.push(Leaf {
                config: f.c.clone(),
                state: self.store.state_of(&f.c)?,
                known: self.live.u().len() - 1,
            });
            if let (Some(t), Some(n)) = (self.tree.as_mut(), f.node) {
                t.nodes[n].leaf = true;
            }
            f.stage = Stage::Done;
            return Ok(None);
        }
        let candidates: Vec<EventId> = if f.a.is_empty() {
            en
        } else {
            let c: Vec<EventId> = en.into_iter().filter(|&e| f.a.contains(e)).collect();
            if c.is_empty() {
                return Err(ExploreError::Internal(format!(
                    "A = {:?} is not empty but shares no event with en(C) at C = {:?}",
                    f.a, f.c
                )));
            }
            c
        };
        let e = self.choose(&candidates);
        if self.opts.check_invariants && f.a.is_empty() && f.d.contains(e) {
            self.hooks.invariant_violations.push(format!("sleep-set blocked: chose {e} ∈ D at C = {:?}", f.c));
        }
        f.chosen = Some(e);
        f.stage = Stage::Left;
        if let (Some(t), Some(n)) = (self.tree.as_mut(), f.node) {
            t.nodes[n].chosen = Some(e);
        }
        let mut c = f.c.clone();
        c.insert(e);
        let mut a = f.a.clone();
        a.remove(e);
        let (d, node) = (f.d.clone(), f.node);
        Ok(Some(self.frame(c, d, a, node, false)))
    }

    fn choose(&mut self, candidates: &[EventId]) -> EventId {
        match self.rng.as_mut() {
            Some(rng) => candidates[rng.gen_range(0..candidates.len())],
            None => *candidates.iter().min_by_key(|&&e| (self.store.label(e), e)).expect("non-empty candidates"),
        }
    }

    /// `Remove(e, C, D)` followed by cache pruning.
    fn remove(&mut self, e: EventId, c: &EventSet, d: &EventSet) {
        remove(&self.store, &mut self.live, e, c, d);
        for x in self.live.prune(self.opts.cache) {
            self.index.remove(&self.store, x);
        }
    }

    fn leave(&mut self, f: &Frame) {
        if !self.opts.check_invariants {
            return;
        }
        if let Err(msg) = self.live.check(&self.store) {
            self.hooks.invariant_violations.push(msg);
        }
        for e in self.live.g().iter() {
            if !self.index.contains(e) {
                self.hooks.invariant_violations.push(format!("cached event {e} missing from the cutoff index"));
            }
        }
        if f.memory_pre {
            self.hooks.memory_checks += 1;
            let q = compute_q(&self.store, &self.live, &f.c, &f.d);
            if &q != self.live.u() {
                self.hooks.memory_violations.push(format!(
                    "after Explore(C = {:?}, D = {:?}): U = {:?} but Q = {:?}",
                    f.c,
                    f.d,
                    self.live.u(),
                    q
                ));
            }
        }
    }

    fn check_node(&mut self, f: &Frame) -> Result<(), ExploreError> {
        self.hooks.nodes_checked += 1;
        let mut problems = Vec::new();
        let mut ca = f.c.clone();
        ca.union_with(&f.a);
        if !self.store.is_configuration(&f.c) || !self.store.is_configuration(&ca) || f.c.intersects(&f.a) {
            problems.push("C and C ∪ A must be configurations with C ∩ A = ∅".to_string());
        }
        let (_, cex) = self.store.partition_extensions(&f.c)?;
        let ex: EventSet = self.store.extensions(&f.c)?.into_iter().collect();
        if !f.d.is_subset(&ex) {
            problems.push(format!("D = {:?} is not contained in ex(C)", f.d));
        }
        if f.a.is_empty() && !f.d.is_subset(&cex.into_iter().collect()) {
            problems.push(format!("A = ∅ but D = {:?} is not contained in cex(C)", f.d));
        }
        for d in f.d.iter() {
            if !self.store.event(d).immediate_conflict_set().intersects(&ca) {
                problems.push(format!("sleeping event {d} has no immediate conflict in C ∪ A"));
            }
        }
        for p in problems {
            self.hooks.invariant_violations.push(format!("node C = {:?}, D = {:?}, A = {:?}: {p}", f.c, f.d, f.a));
        }
        Ok(())
    }

    fn memory_precondition(&mut self, c: &EventSet, d: &EventSet) -> Result<bool, ExploreError> {
        let q = compute_q(&self.store, &self.live, c, d);
        if !q.is_subset(self.live.u()) {
            return Ok(false);
        }
        let (en, _) = self.store.partition_extensions(c)?;
        let mut upper = q;
        upper.extend(en);
        Ok(self.live.u().is_subset(&upper))
    }

    fn check_assertion(&mut self, c: &EventSet) -> Result<(), ExploreError> {
        let state = self.store.state_of(c)?;
        if self.sys.is_error_state(&state) && self.hit_configs.insert(c.clone()) {
            self.hits.push(AssertionHit {
                run: self.sys.run_ids(&self.store.linearization(c)),
                state: state.display(self.sys).to_string(),
            });
        }
        Ok(())
    }
}

/// `#^i_U(x)`: immediate conflicts of `x` that are in `U`.
fn conflicts_in_u<'a>(
    store: &'a PrefixStore<'_>,
    live: &'a LiveSets,
    x: EventId,
) -> impl Iterator<Item = EventId> + 'a {
    store.event(x).immediate_conflicts().iter().copied().filter(|&y| live.in_u(y))
}

/// Some alternative `J` to `D` after `C`, or `None` when `U` holds none.
///
/// Every event of `D` not already in immediate conflict with `C` needs a
/// partner `k ∈ #^i_U(d)`; picks are tried in ascending id order with
/// backtracking, and `J = C ∪ ⋃ [k]` is accepted when conflict free.
/// Partners whose local configuration touches `D` are skipped.
pub fn alternatives(store: &PrefixStore<'_>, live: &LiveSets, c: &EventSet, d: &EventSet) -> Option<EventSet> {
    let open: Vec<EventId> = d.iter().filter(|&x| !conflicts_in_u(store, live, x).any(|y| c.contains(y))).collect();
    let candidates: Vec<Vec<EventId>> = open
        .iter()
        .map(|&x| {
            conflicts_in_u(store, live, x)
                .filter(|&k| {
                    let local = store.event(k).local_config();
                    !local.intersects(d) && store.compatible(c, local)
                })
                .collect()
        })
        .collect();
    fn search(
        store: &PrefixStore<'_>,
        open: &[EventId],
        candidates: &[Vec<EventId>],
        i: usize,
        j: &mut EventSet,
    ) -> bool {
        if i == open.len() {
            return true;
        }
        // an earlier pick may already conflict with this one
        if store.event(open[i]).immediate_conflict_set().intersects(j) {
            return search(store, open, candidates, i + 1, j);
        }
        for &k in &candidates[i] {
            let local = store.event(k).local_config();
            if !store.compatible(j, local) {
                continue;
            }
            let saved = j.clone();
            j.union_with(local);
            if search(store, open, candidates, i + 1, j) {
                return true;
            }
            *j = saved;
        }
        false
    }
    let mut j = c.clone();
    search(store, &open, &candidates, 0, &mut j).then_some(j)
}

/// `Q_{C,D,U} = C ∪ D ∪ ⋃ { [e'] : e ∈ C ∪ D, e' ∈ #^i_U(e) }`.
pub fn compute_q(store: &PrefixStore<'_>, live: &LiveSets, c: &EventSet, d: &EventSet) -> EventSet {
    let mut q = c.clone();
    q.union_with(d);
    for x in c.iter().chain(d.iter()) {
        for y in conflicts_in_u(store, live, x) {
            q.union_with(store.event(y).local_config());
        }
    }
    q
}

/// `Remove(e, C, D)`: moves `{e} ∖ Q` and `[ê] ∖ Q` for `ê ∈ #^i_U(e)` to `G`.
///
/// `Q` is computed once, before anything moves. Returns the moved events.
pub fn remove(store: &PrefixStore<'_>, live: &mut LiveSets, e: EventId, c: &EventSet, d: &EventSet) -> Vec<EventId> {
    let q = compute_q(store, live, c, d);
    let mut doomed = EventSet::new();
    if !q.contains(e) {
        doomed.insert(e);
    }
    for y in conflicts_in_u(store, live, e) {
        let mut part = store.event(y).local_config().clone();
        part.difference_with(&q);
        doomed.union_with(&part);
    }
    let moved = doomed.to_vec();
    for &x in &moved {
        live.retire(x);
    }
    moved
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    fn opts(cutoffs: bool) -> ExploreOptions {
        ExploreOptions { cutoffs, check_invariants: true, record_call_tree: true, ..Default::default() }
    }

    #[test]
    fn writer_readers_four_leaves() {
        let sys = bench::writer_readers();
        let ex = explore(&sys, &opts(false)).unwrap();
        assert_eq!(ex.report.max_configs, 4);
        assert_eq!(ex.report.events, 10);
        assert_eq!(ex.report.cutoffs, 0);
        assert!(ex.report.hooks.is_clean(), "{:?}", ex.report.hooks);
        assert!(ex.report.hooks.memory_checks > 0);
    }

    #[test]
    fn single_transition_system() {
        let sys = crate::model::load_system(
            r#"{"vars": {"x": {"init": 0, "domain": [0, 1]}},
                "transitions": [{"id": "t", "guard": [["x", "=", 0]], "effect": [["x", ":=", 1]]}]}"#,
        )
        .unwrap();
        let ex = explore(&sys, &opts(false)).unwrap();
        assert_eq!((ex.report.max_configs, ex.report.events), (1, 1));
    }

    #[test]
    fn flip_terminates_with_one_cutoff() {
        let sys = bench::flip();
        let ex = explore(&sys, &opts(true)).unwrap();
        assert_eq!(ex.report.max_configs, 1);
        assert_eq!(ex.report.cutoffs, 1);
        assert_eq!(ex.report.events, 1);
        assert_eq!(ex.report.leaves[0].config.len(), 2);
    }

    #[test]
    fn flip_without_cutoffs_hits_event_bound() {
        let sys = bench::flip();
        let o = ExploreOptions { cutoffs: false, max_events: Some(100), ..Default::default() };
        assert_eq!(explore(&sys, &o).err(), Some(ExploreError::EventBound(100)));
    }

    #[test]
    fn depth_bound() {
        let sys = bench::flip();
        let o = ExploreOptions { cutoffs: false, max_depth: Some(5), ..Default::default() };
        assert_eq!(explore(&sys, &o).err(), Some(ExploreError::DepthBound(5)));
    }

    #[test]
    fn alternatives_vacuous_and_absent() {
        let sys = bench::writer_readers();
        let mut store = PrefixStore::new(&sys);
        let live = LiveSets::new();
        let c = EventSet::with_bottom();
        assert_eq!(alternatives(&store, &live, &c, &EventSet::new()), Some(c.clone()));
        let w = sys.transition_index("w").unwrap();
        let (e, _) = store.add_event(w, &c).unwrap();
        let d: EventSet = [e].into_iter().collect();
        assert_eq!(alternatives(&store, &live, &c, &d), None);
    }

    #[test]
    fn q_of_bottom_is_bottom() {
        let sys = bench::writer_readers();
        let store = PrefixStore::new(&sys);
        let live = LiveSets::new();
        assert_eq!(compute_q(&store, &live, &EventSet::with_bottom(), &EventSet::new()), EventSet::with_bottom());
    }

    #[test]
    fn eviction_policies_preserve_results_on_writer_readers() {
        let sys = bench::writer_readers();
        for cache in [Eviction::None, Eviction::All, Eviction::Lru(1)] {
            let o = ExploreOptions { cache, ..opts(false) };
            let ex = explore(&sys, &o).unwrap();
            assert_eq!(ex.report.max_configs, 4, "{cache}");
            assert!(ex.report.hooks.is_clean());
        }
    }

    #[test]
    fn eviction_parses() {
        assert_eq!("lru:7".parse::<Eviction>(), Ok(Eviction::Lru(7)));
        assert_eq!("none".parse::<Eviction>(), Ok(Eviction::None));
        assert!("lru:x".parse::<Eviction>().is_err());
    }

    #[test]
    fn assertion_hits_reported() {
        let sys = crate::model::load_system(
            r#"{"vars": {"__error": {"init": 0, "domain": [0, 1]}, "x": {"init": 0, "domain": [0, 1]}},
                "transitions": [
                    {"id": "set", "process": "a", "guard": [["x", "=", 0]], "effect": [["x", ":=", 1]]},
                    {"id": "check", "process": "b", "guard": [["x", "=", 1]], "effect": [["__error", ":=", 1]]}
                ]}"#,
        )
        .unwrap();
        let ex = explore(&sys, &ExploreOptions::default()).unwrap();
        assert_eq!(ex.report.assertion_hits.len(), 1);
        assert_eq!(ex.report.assertion_hits[0].run, ["set", "check"]);
    }
}
