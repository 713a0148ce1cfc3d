//! Incremental storage of the unfolding of a system under its independence relation.
//!
//! Events are named canonically by `⟨t, H⟩`: a transition and the
//! configuration of its causes. The store only ever grows; explorers track
//! which events they currently "know" with their own flag sets.

mod dot;
mod set;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

pub use dot::unfolding_dot;
pub use set::{EventId, EventSet};

use crate::model::{GlobalState, SystemDef, TransitionIndex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("unknown event {0}")]
    UnknownEvent(EventId),
    #[error("invalid history for transition '{transition}': {reason}")]
    InvalidHistory { transition: String, reason: String },
    #[error("store corruption: transition '{transition}' disabled while replaying configuration")]
    Corrupt { transition: String },
    #[error("configuration of {0} events is too large for exact interleaving counting")]
    TooLarge(usize),
    #[error("event bound of {0} exceeded")]
    EventBound(usize),
}

/// One event of the unfolding together with its cached local data.
#[derive(Clone, Debug)]
pub struct Event {
    label: Option<TransitionIndex>,
    history_max: Vec<EventId>,
    causes: EventSet,
    local: EventSet,
    local_state: GlobalState,
    icfl: Vec<EventId>,
    icfl_set: EventSet,
}

impl Event {
    /// The transition, or `None` for `⊥`.
    pub fn label(&self) -> Option<TransitionIndex> {
        self.label
    }

    /// The `<`-maximal events of the history (direct causal predecessors).
    pub fn history_max(&self) -> &[EventId] {
        &self.history_max
    }

    /// Strict causes `⌈e⌉`.
    pub fn causes(&self) -> &EventSet {
        &self.causes
    }

    /// Local configuration `[e]`.
    pub fn local_config(&self) -> &EventSet {
        &self.local
    }

    /// `state([e])`.
    pub fn local_state(&self) -> &GlobalState {
        &self.local_state
    }

    /// `|[e]|`, counting `⊥` and the event itself.
    pub fn local_size(&self) -> usize {
        self.causes.len() + 1
    }

    /// Immediate conflicts recorded so far, ascending.
    pub fn immediate_conflicts(&self) -> &[EventId] {
        &self.icfl
    }

    pub fn immediate_conflict_set(&self) -> &EventSet {
        &self.icfl_set
    }
}

/// The finite unfolding prefix built so far.
pub struct PrefixStore<'s> {
    sys: &'s SystemDef,
    events: Vec<Event>,
    dedup: HashMap<(TransitionIndex, EventSet), EventId>,
    by_label: Vec<Vec<EventId>>,
}

/// Result of [`PrefixStore::saturate`].
#[derive(Debug, Clone)]
pub struct Saturation {
    /// Number of distinct configurations visited.
    pub configurations: usize,
    /// The `⊆`-maximal configurations.
    pub maximal: Vec<EventSet>,
}

impl<'s> PrefixStore<'s> {
    /// A store holding only `⊥`.
    pub fn new(sys: &'s SystemDef) -> Self {
        let bottom = Event {
            label: None,
            history_max: Vec::new(),
            causes: EventSet::new(),
            local: EventSet::with_bottom(),
            local_state: sys.initial_state(),
            icfl: Vec::new(),
            icfl_set: EventSet::new(),
        };
        PrefixStore {
            sys,
            events: vec![bottom],
            dedup: HashMap::new(),
            by_label: vec![Vec::new(); sys.transitions.len()],
        }
    }

    pub fn system(&self) -> &'s SystemDef {
        self.sys
    }

    /// Number of stored events, `⊥` included.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn event_ids(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len() as u32).map(EventId)
    }

    pub fn event(&self, e: EventId) -> &Event {
        &self.events[e.index()]
    }

    pub fn get(&self, e: EventId) -> Result<&Event, StoreError> {
        self.events.get(e.index()).ok_or(StoreError::UnknownEvent(e))
    }

    pub fn label(&self, e: EventId) -> Option<TransitionIndex> {
        self.events[e.index()].label
    }

    /// Transition id of the event's label (`"⊥"` for the bottom event).
    pub fn label_name(&self, e: EventId) -> &str {
        match self.label(e) {
            Some(t) => &self.sys.transitions[t].id,
            None => "⊥",
        }
    }

    /// Events labelled by `t`, in insertion order.
    pub fn events_with_label(&self, t: TransitionIndex) -> &[EventId] {
        &self.by_label[t]
    }

    /// The event named `⟨t, H⟩`, if stored.
    pub fn lookup(&self, t: TransitionIndex, history: &EventSet) -> Option<EventId> {
        self.dedup.get(&(t, history.clone())).copied()
    }

    /// `a < b`.
    pub fn causally_before(&self, a: EventId, b: EventId) -> bool {
        self.events[b.index()].causes.contains(a)
    }

    pub fn immediate_conflict(&self, a: EventId, b: EventId) -> Result<bool, StoreError> {
        self.get(b)?;
        Ok(self.get(a)?.icfl_set.contains(b))
    }

    /// General conflict: some immediate conflict between `[a]` and `[b]`.
    pub fn in_conflict(&self, a: EventId, b: EventId) -> bool {
        let lb = &self.events[b.index()].local;
        self.events[a.index()].local.iter().any(|x| self.events[x.index()].icfl_set.intersects(lb))
    }

    /// Causally closed and conflict free.
    pub fn is_configuration(&self, set: &EventSet) -> bool {
        set.iter().all(|e| {
            e.index() < self.events.len() && {
                let ev = &self.events[e.index()];
                ev.causes.is_subset(set) && !ev.icfl_set.intersects(set)
            }
        })
    }

    /// Whether `a ∪ b` is conflict free, given both are configurations.
    pub fn compatible(&self, a: &EventSet, b: &EventSet) -> bool {
        b.iter().filter(|&x| !a.contains(x)).all(|x| !self.events[x.index()].icfl_set.intersects(a))
    }

    /// The `<`-maximal members of `set`.
    pub fn maximal_events(&self, set: &EventSet) -> Vec<EventId> {
        let mut below = EventSet::new();
        for e in set.iter() {
            below.union_with(&self.events[e.index()].causes);
        }
        set.iter().filter(|&e| !below.contains(e)).collect()
    }

    /// Downward closure of `events` plus `⊥`.
    pub fn closure(&self, events: &[EventId]) -> EventSet {
        let mut out = EventSet::with_bottom();
        for e in events {
            out.union_with(&self.events[e.index()].local);
        }
        out
    }

    /// One linearization of a configuration (ascending event id), as transitions.
    pub fn linearization(&self, config: &EventSet) -> Vec<TransitionIndex> {
        config.iter().filter_map(|e| self.label(e)).collect()
    }

    /// `state(C)`: replays a linearization from the initial state.
    pub fn state_of(&self, config: &EventSet) -> Result<GlobalState, StoreError> {
        if let Some(top) = config.iter().last() {
            let ev = &self.events[top.index()];
            if ev.local_size() == config.len() && ev.local.is_subset(config) {
                return Ok(ev.local_state.clone());
            }
        }
        let mut s = self.sys.initial_state();
        for t in self.linearization(config) {
            s = self
                .sys
                .fire(&s, t)
                .ok_or_else(|| StoreError::Corrupt { transition: self.sys.transitions[t].id.clone() })?;
        }
        Ok(s)
    }

    /// Candidate histories of `t` contained in the configuration `config`.
    ///
    /// A history is the downward closure of an antichain of events of
    /// `config` whose labels are dependent with `t`; it qualifies when `t` is
    /// enabled at its state.
    pub fn histories(&self, config: &EventSet, t: TransitionIndex) -> Vec<EventSet> {
        let dep: Vec<EventId> =
            config.iter().filter(|&e| self.label(e).is_some_and(|l| self.sys.dependent(l, t))).collect();
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        self.antichains(&dep, 0, &mut chosen, t, &mut out);
        out
    }

    fn antichains(
        &self,
        dep: &[EventId],
        i: usize,
        chosen: &mut Vec<EventId>,
        t: TransitionIndex,
        out: &mut Vec<EventSet>,
    ) {
        if i == dep.len() {
            let h = self.closure(chosen);
            if self.state_of(&h).is_ok_and(|s| self.sys.is_enabled(&s, t)) {
                out.push(h);
            }
            return;
        }
        self.antichains(dep, i + 1, chosen, t, out);
        // ids grow along causality, so only earlier picks can lie below dep[i]
        let causes = &self.events[dep[i].index()].causes;
        if chosen.iter().all(|&c| !causes.contains(c)) {
            chosen.push(dep[i]);
            self.antichains(dep, i + 1, chosen, t, out);
            chosen.pop();
        }
    }

    /// Inserts `⟨t, H⟩`, or returns the existing event with that name.
    ///
    /// The second component is true for fresh insertions.
    pub fn add_event(&mut self, t: TransitionIndex, history: &EventSet) -> Result<(EventId, bool), StoreError> {
        if let Some(e) = self.lookup(t, history) {
            return Ok((e, false));
        }
        let invalid = |reason: &str| StoreError::InvalidHistory {
            transition: self.sys.transitions[t].id.clone(),
            reason: reason.to_string(),
        };
        if !history.contains(EventId::BOTTOM) || !self.is_configuration(history) {
            return Err(invalid("not a configuration containing ⊥"));
        }
        let history_max = self.maximal_events(history);
        if history_max.iter().any(|&e| self.label(e).is_some_and(|l| !self.sys.dependent(l, t))) {
            return Err(invalid("a maximal event is independent of the transition"));
        }
        let local_state = self
            .sys
            .fire(&self.state_of(history)?, t)
            .ok_or_else(|| invalid("transition disabled at the history's state"))?;

        let id = EventId(self.events.len() as u32);
        let mut local = history.clone();
        local.insert(id);
        let mut icfl = Vec::new();
        for (l, evs) in self.by_label.iter().enumerate() {
            if !self.sys.dependent(l, t) {
                continue;
            }
            for &other in evs {
                if history.contains(other) {
                    continue;
                }
                let o = &self.events[other.index()];
                // ⌈e⌉ ∪ [e'] and [e] ∪ ⌈e'⌉ must both be configurations
                let direct_below = o
                    .causes
                    .iter()
                    .any(|b| !history.contains(b) && self.label(b).is_some_and(|lb| self.sys.dependent(lb, t)));
                if !direct_below && self.compatible(history, &o.local) {
                    icfl.push(other);
                }
            }
        }
        icfl.sort();
        for &other in &icfl {
            let o = &mut self.events[other.index()];
            o.icfl.push(id);
            o.icfl_set.insert(id);
        }
        self.events.push(Event {
            label: Some(t),
            history_max,
            causes: history.clone(),
            local,
            local_state,
            icfl_set: icfl.iter().copied().collect(),
            icfl,
        });
        self.dedup.insert((t, history.clone()), id);
        self.by_label[t].push(id);
        Ok((id, true))
    }

    /// `ex(C)`: every event whose causes lie in `config`, inserted as needed.
    ///
    /// Returned in ascending id order.
    pub fn extensions(&mut self, config: &EventSet) -> Result<Vec<EventId>, StoreError> {
        let mut out = Vec::new();
        for t in 0..self.sys.transitions.len() {
            for h in self.histories(config, t) {
                let (e, _) = self.add_event(t, &h)?;
                if !config.contains(e) {
                    out.push(e);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Whether an extension of `config` is enabled (`C ∪ {e}` is a configuration).
    pub fn is_enabled_extension(&self, config: &EventSet, e: EventId) -> bool {
        !self.events[e.index()].icfl_set.intersects(config)
    }

    /// Splits `ex(C)` into `(en(C), cex(C))`.
    pub fn partition_extensions(&mut self, config: &EventSet) -> Result<(Vec<EventId>, Vec<EventId>), StoreError> {
        let ex = self.extensions(config)?;
        Ok(ex.into_iter().partition(|&e| self.is_enabled_extension(config, e)))
    }

    /// Number of linearizations of `(C ∖ {⊥}, <)`.
    pub fn interleavings_count(&self, config: &EventSet) -> Result<u128, StoreError> {
        let members: Vec<EventId> = config.iter().filter(|&e| e != EventId::BOTTOM).collect();
        if members.len() > 63 {
            return Err(StoreError::TooLarge(members.len()));
        }
        for &e in &members {
            self.get(e)?;
        }
        let preds: Vec<u64> = members
            .iter()
            .map(|&e| {
                members
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| self.causally_before(p, e))
                    .fold(0u64, |m, (i, _)| m | (1 << i))
            })
            .collect();
        fn count(mask: u64, preds: &[u64], memo: &mut HashMap<u64, u128>) -> u128 {
            if mask == 0 {
                return 1;
            }
            if let Some(&c) = memo.get(&mask) {
                return c;
            }
            let mut total = 0;
            for i in 0..preds.len() {
                let bit = 1u64 << i;
                if mask & bit == 0 {
                    continue;
                }
                // i can be placed last iff nothing else in the set needs it
                let needed = preds.iter().enumerate().any(|(j, &q)| mask & (1 << j) != 0 && q & bit != 0);
                if !needed {
                    total += count(mask & !bit, preds, memo);
                }
            }
            memo.insert(mask, total);
            total
        }
        let full = if members.is_empty() { 0 } else { u64::MAX >> (64 - members.len()) };
        Ok(count(full, &preds, &mut HashMap::new()))
    }

    /// Builds the whole unfolding by visiting every configuration.
    ///
    /// Fails with [`StoreError::EventBound`] once more than `max_events`
    /// non-`⊥` events exist, which is the only way out for infinite unfoldings.
    pub fn saturate(&mut self, max_events: usize) -> Result<Saturation, StoreError> {
        let mut seen = HashSet::new();
        let mut stack = vec![EventSet::with_bottom()];
        let mut maximal = Vec::new();
        while let Some(c) = stack.pop() {
            if seen.contains(&c) {
                continue;
            }
            let (en, _) = self.partition_extensions(&c)?;
            if self.len() - 1 > max_events {
                return Err(StoreError::EventBound(max_events));
            }
            if en.is_empty() {
                maximal.push(c.clone());
            }
            for e in en {
                let mut next = c.clone();
                next.insert(e);
                if !seen.contains(&next) {
                    stack.push(next);
                }
            }
            seen.insert(c);
        }
        Ok(Saturation { configurations: seen.len(), maximal })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    fn ids(v: &[u32]) -> EventSet {
        v.iter().map(|&i| EventId(i)).collect()
    }

    #[test]
    fn bottom_event() {
        let sys = bench::writer_readers();
        let store = PrefixStore::new(&sys);
        let b = store.event(EventId::BOTTOM);
        assert_eq!(b.label(), None);
        assert!(b.causes().is_empty());
        assert_eq!(store.state_of(&EventSet::with_bottom()).unwrap(), sys.initial_state());
    }

    #[test]
    fn first_event_over_bottom() {
        let sys = bench::writer_readers();
        let w = sys.transition_index("w").unwrap();
        let mut store = PrefixStore::new(&sys);
        let (e, fresh) = store.add_event(w, &EventSet::with_bottom()).unwrap();
        assert!(fresh);
        assert_eq!(store.event(e).local_size(), 2);
        assert_eq!(store.event(e).causes(), &EventSet::with_bottom());
        let (again, fresh) = store.add_event(w, &EventSet::with_bottom()).unwrap();
        assert_eq!((again, fresh), (e, false));
    }

    #[test]
    fn invalid_history_rejected() {
        let sys = bench::writer_readers();
        let (w, r) = (sys.transition_index("w").unwrap(), sys.transition_index("r").unwrap());
        let rp = sys.transition_index("r'").unwrap();
        let mut store = PrefixStore::new(&sys);
        let (e1, _) = store.add_event(w, &EventSet::with_bottom()).unwrap();
        let (e2, _) = store.add_event(r, &ids(&[0, e1.0])).unwrap();
        // r' is independent of r, so {⊥, 1, 2} is not a history of r'
        let err = store.add_event(rp, &ids(&[0, e1.0, e2.0])).unwrap_err();
        assert!(matches!(err, StoreError::InvalidHistory { .. }));
        // w fired once already: disabled after itself
        assert!(store.add_event(w, &ids(&[0, e1.0])).is_err());
        // missing cause
        assert!(store.add_event(rp, &ids(&[0, e2.0])).is_err());
    }

    #[test]
    fn histories_of_single_independent_transition() {
        let sys = bench::writer_readers();
        let rp = sys.transition_index("r'").unwrap();
        let store = PrefixStore::new(&sys);
        assert_eq!(store.histories(&EventSet::with_bottom(), rp), vec![EventSet::with_bottom()]);
    }

    #[test]
    fn histories_empty_when_disabled() {
        let sys = bench::flip();
        let mut store = PrefixStore::new(&sys);
        let down = sys.transition_index("down").unwrap();
        assert!(store.histories(&EventSet::with_bottom(), down).is_empty());
        assert_eq!(store.extensions(&EventSet::with_bottom()).unwrap().len(), 1);
    }

    #[test]
    fn unknown_event_is_an_error() {
        let sys = bench::writer_readers();
        let store = PrefixStore::new(&sys);
        assert_eq!(store.immediate_conflict(EventId(0), EventId(9)), Err(StoreError::UnknownEvent(EventId(9))));
    }

    #[test]
    fn interleavings_of_chain_and_antichain() {
        let sys = bench::writer_readers();
        let mut store = PrefixStore::new(&sys);
        let (r, rp) = (sys.transition_index("r").unwrap(), sys.transition_index("r'").unwrap());
        let (a, _) = store.add_event(r, &EventSet::with_bottom()).unwrap();
        let (b, _) = store.add_event(rp, &EventSet::with_bottom()).unwrap();
        assert_eq!(store.interleavings_count(&ids(&[0, a.0, b.0])).unwrap(), 2);
        assert_eq!(store.interleavings_count(&ids(&[0, a.0])).unwrap(), 1);
        assert_eq!(store.interleavings_count(&EventSet::with_bottom()).unwrap(), 1);
    }
}
