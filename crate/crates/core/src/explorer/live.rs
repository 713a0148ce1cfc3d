use std::collections::HashMap;

use crate::unfolding::{EventId, EventSet, PrefixStore};

/// What [`LiveSets::prune`] evicts from the cache `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Eviction {
    /// Evict nothing.
    #[default]
    None,
    /// Empty `G`.
    All,
    /// Keep at most this many events, evicting the least recently removed.
    Lru(usize),
}

/// Outcome of [`LiveSets::adopt`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adopted {
    /// Already in `U`.
    Present,
    /// Moved back from the cache `G`.
    FromCache,
    /// Neither in `U` nor in `G`.
    Fresh,
}

/// Membership flags over the arena: the explorer's prefix `U` and cache `G`.
#[derive(Clone, Debug)]
pub struct LiveSets {
    u: EventSet,
    g: EventSet,
    ever_u: EventSet,
    stamps: HashMap<EventId, u64>,
    clock: u64,
}

impl Default for LiveSets {
    fn default() -> Self {
        Self::new()
    }
}

impl LiveSets {
    /// `U = {⊥}`, `G = ∅`.
    pub fn new() -> Self {
        LiveSets {
            u: EventSet::with_bottom(),
            g: EventSet::new(),
            ever_u: EventSet::with_bottom(),
            stamps: HashMap::new(),
            clock: 0,
        }
    }

    pub fn u(&self) -> &EventSet {
        &self.u
    }

    pub fn g(&self) -> &EventSet {
        &self.g
    }

    /// Every event that has been in `U`, `⊥` included.
    pub fn ever_u(&self) -> &EventSet {
        &self.ever_u
    }

    pub fn in_u(&self, e: EventId) -> bool {
        self.u.contains(e)
    }

    pub fn in_g(&self, e: EventId) -> bool {
        self.g.contains(e)
    }

    /// Adds `e` to `U`, taking it out of `G` if it was cached.
    pub fn adopt(&mut self, e: EventId) -> Adopted {
        if self.u.contains(e) {
            return Adopted::Present;
        }
        self.u.insert(e);
        self.ever_u.insert(e);
        if self.g.remove(e) {
            self.stamps.remove(&e);
            Adopted::FromCache
        } else {
            Adopted::Fresh
        }
    }

    /// Moves `e` from `U` to `G`.
    pub fn retire(&mut self, e: EventId) {
        debug_assert!(e != EventId::BOTTOM);
        if self.u.remove(e) {
            self.g.insert(e);
            self.clock += 1;
            self.stamps.insert(e, self.clock);
        }
    }

    /// Applies the cache policy to `G`, returning evicted events.
    pub fn prune(&mut self, policy: Eviction) -> Vec<EventId> {
        let keep = match policy {
            Eviction::None => return Vec::new(),
            Eviction::All => 0,
            Eviction::Lru(n) => n,
        };
        let size = self.g.len();
        if size <= keep {
            return Vec::new();
        }
        let mut by_age: Vec<(u64, EventId)> = self.g.iter().map(|e| (self.stamps[&e], e)).collect();
        by_age.sort_unstable();
        let evicted: Vec<EventId> = by_age[..size - keep].iter().map(|&(_, e)| e).collect();
        for &e in &evicted {
            self.g.remove(e);
            self.stamps.remove(&e);
        }
        evicted
    }

    /// Structural invariants: `⊥ ∈ U`, `U ∩ G = ∅`, `U` causally closed.
    pub fn check(&self, store: &PrefixStore<'_>) -> Result<(), String> {
        if !self.u.contains(EventId::BOTTOM) {
            return Err("⊥ missing from U".into());
        }
        if self.u.intersects(&self.g) {
            return Err(format!("U and G overlap on {:?}", {
                let mut both = self.u.clone();
                both.intersect_with(&self.g);
                both
            }));
        }
        for e in self.u.iter() {
            if !store.event(e).causes().is_subset(&self.u) {
                return Err(format!("U not causally closed below event {e}"));
            }
        }
        Ok(())
    }
}
