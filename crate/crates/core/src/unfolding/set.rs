use std::fmt;
use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;

/// Dense handle of an event in a [`super::PrefixStore`]. `⊥` is `EventId(0)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u32);

impl EventId {
    pub const BOTTOM: EventId = EventId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A growable set of events. Equality and hashing ignore capacity.
#[derive(Clone, Default)]
pub struct EventSet(FixedBitSet);

impl EventSet {
    pub fn new() -> Self {
        EventSet(FixedBitSet::new())
    }

    pub fn with_bottom() -> Self {
        let mut s = Self::new();
        s.insert(EventId::BOTTOM);
        s
    }

    pub fn contains(&self, e: EventId) -> bool {
        self.0.contains(e.index())
    }

    /// Returns true if `e` was not already present.
    pub fn insert(&mut self, e: EventId) -> bool {
        let i = e.index();
        if i >= self.0.len() {
            self.0.grow((i + 1).next_power_of_two());
        }
        !self.0.put(i)
    }

    /// Returns true if `e` was present.
    pub fn remove(&mut self, e: EventId) -> bool {
        let i = e.index();
        if i < self.0.len() && self.0.contains(i) {
            self.0.set(i, false);
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    /// Events in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = EventId> + '_ {
        self.0.ones().map(|i| EventId(i as u32))
    }

    pub fn union_with(&mut self, other: &EventSet) {
        if other.0.len() > self.0.len() {
            self.0.grow(other.0.len());
        }
        self.0.union_with(&other.0);
    }

    pub fn difference_with(&mut self, other: &EventSet) {
        self.0.difference_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &EventSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn is_subset(&self, other: &EventSet) -> bool {
        self.0.ones().all(|i| other.0.contains(i))
    }

    pub fn is_disjoint(&self, other: &EventSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersects(&self, other: &EventSet) -> bool {
        !self.is_disjoint(other)
    }

    pub fn to_vec(&self) -> Vec<EventId> {
        self.iter().collect()
    }
}

impl PartialEq for EventSet {
    fn eq(&self, other: &Self) -> bool {
        self.0.ones().eq(other.0.ones())
    }
}

impl Eq for EventSet {}

impl Hash for EventSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for i in self.0.ones() {
            i.hash(state);
        }
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.ones()).finish()
    }
}

impl FromIterator<EventId> for EventSet {
    fn from_iter<I: IntoIterator<Item = EventId>>(iter: I) -> Self {
        let mut s = EventSet::new();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl Extend<EventId> for EventSet {
    fn extend<I: IntoIterator<Item = EventId>>(&mut self, iter: I) {
        for e in iter {
            self.insert(e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::hash_map::DefaultHasher;

    fn hash(s: &EventSet) -> u64 {
        let mut h = DefaultHasher::new();
        s.hash(&mut h);
        h.finish()
    }

    #[test]
    fn equality_ignores_capacity() {
        let mut a: EventSet = [EventId(1), EventId(3)].into_iter().collect();
        let b: EventSet = [EventId(1), EventId(3)].into_iter().collect();
        a.insert(EventId(200));
        a.remove(EventId(200));
        assert_eq!(a, b);
        assert_eq!(hash(&a), hash(&b));
    }

    #[test]
    fn set_operations() {
        let mut a: EventSet = [0, 1, 2].map(EventId).into_iter().collect();
        let b: EventSet = [2, 70].map(EventId).into_iter().collect();
        assert!(a.intersects(&b));
        a.union_with(&b);
        assert_eq!(a.len(), 4);
        a.difference_with(&b);
        assert_eq!(a.to_vec(), vec![EventId(0), EventId(1)]);
        assert!(a.is_subset(&[0, 1, 5].map(EventId).into_iter().collect()));
    }
}
