//! Cutoff events: truncating the unfolding of systems with cyclic state spaces.
//!
//! An event `e` is a cutoff when the explorer already knows (in `U ∪ G`) an
//! event `e'` reaching the same state with `[e'] ≺ [e]`. Cutoffs are never
//! added to `U`; they stay in the arena and are re-tested whenever they show
//! up again as extensions.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::explorer::{Adopted, LiveSets};
use crate::model::GlobalState;
use crate::unfolding::{EventId, EventSet, PrefixStore, StoreError};

/// The order `≺` on local configurations used by the cutoff test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AdequateOrder {
    /// `|[e']| < |[e]|`.
    #[default]
    Size,
    /// Size first, then the sorted multiset of labels compared lexicographically.
    SizeThenParikh,
}

impl FromStr for AdequateOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "size" => Ok(AdequateOrder::Size),
            "total" => Ok(AdequateOrder::SizeThenParikh),
            _ => Err(format!("unknown order '{s}' (size, total)")),
        }
    }
}

impl fmt::Display for AdequateOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdequateOrder::Size => "size",
            AdequateOrder::SizeThenParikh => "total",
        })
    }
}

impl AdequateOrder {
    /// Compares `[a]` with `[b]`.
    pub fn compare(self, store: &PrefixStore<'_>, a: EventId, b: EventId) -> Ordering {
        let (ea, eb) = (store.event(a), store.event(b));
        let by_size = ea.local_size().cmp(&eb.local_size());
        match self {
            AdequateOrder::Size => by_size,
            AdequateOrder::SizeThenParikh => by_size.then_with(|| parikh(store, a).cmp(&parikh(store, b))),
        }
    }

    /// `[a] ≺ [b]`.
    pub fn precedes(self, store: &PrefixStore<'_>, a: EventId, b: EventId) -> bool {
        self.compare(store, a, b) == Ordering::Less
    }
}

fn parikh(store: &PrefixStore<'_>, e: EventId) -> Vec<usize> {
    let mut labels: Vec<usize> = store.event(e).local_config().iter().filter_map(|x| store.label(x)).collect();
    labels.sort_unstable();
    labels
}

/// Local states of the events in `U ∪ G`.
#[derive(Clone, Debug, Default)]
pub struct CutoffIndex {
    by_state: HashMap<GlobalState, Vec<EventId>>,
    members: EventSet,
}

impl CutoffIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: EventId) -> bool {
        self.members.contains(e)
    }

    pub fn insert(&mut self, store: &PrefixStore<'_>, e: EventId) {
        if self.members.insert(e) {
            self.by_state.entry(store.event(e).local_state().clone()).or_default().push(e);
        }
    }

    pub fn remove(&mut self, store: &PrefixStore<'_>, e: EventId) {
        if self.members.remove(e) {
            let state = store.event(e).local_state();
            if let Some(v) = self.by_state.get_mut(state) {
                v.retain(|&x| x != e);
                if v.is_empty() {
                    self.by_state.remove(state);
                }
            }
        }
    }

    /// An indexed event with the same local state whose local configuration precedes `[e]`.
    pub fn corresponding(&self, store: &PrefixStore<'_>, e: EventId, order: AdequateOrder) -> Option<EventId> {
        self.by_state
            .get(store.event(e).local_state())?
            .iter()
            .copied()
            .filter(|&c| c != e && order.precedes(store, c, e))
            .min_by(|&a, &b| order.compare(store, a, b).then(a.cmp(&b)))
    }

    pub fn is_cutoff(&self, store: &PrefixStore<'_>, e: EventId, order: AdequateOrder) -> bool {
        self.corresponding(store, e, order).is_some()
    }
}

/// Result of one extension step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Extension {
    /// `ex(C)`, ascending.
    pub extensions: Vec<EventId>,
    /// Extensions withheld from `U` as cutoffs during this step.
    pub withheld: Vec<EventId>,
}

/// Adds `ex(C)` to `U`, withholding cutoffs when `order` is given.
///
/// Events already in `U` are left alone; everything else is tested against
/// `U ∪ G` (through `index`) before being adopted.
pub fn extend_with_cutoffs(
    store: &mut PrefixStore<'_>,
    live: &mut LiveSets,
    index: &mut CutoffIndex,
    order: Option<AdequateOrder>,
    config: &EventSet,
) -> Result<Extension, StoreError> {
    let extensions = store.extensions(config)?;
    let mut withheld = Vec::new();
    for &e in &extensions {
        if live.in_u(e) {
            continue;
        }
        if let Some(order) = order {
            if index.is_cutoff(store, e, order) {
                withheld.push(e);
                continue;
            }
        }
        if live.adopt(e) == Adopted::Fresh {
            index.insert(store, e);
        }
    }
    Ok(Extension { extensions, withheld })
}
