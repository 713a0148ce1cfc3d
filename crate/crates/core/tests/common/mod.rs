#![allow(dead_code)]

use unfold_dpor::model::{SystemDef, TransitionIndex};
use unfold_dpor::unfolding::{EventId, EventSet, PrefixStore};

/// Structural name of an event: `t(name, name, ...)` over its direct causes.
pub fn name(store: &PrefixStore<'_>, e: EventId) -> String {
    if e == EventId::BOTTOM {
        return "⊥".into();
    }
    let mut below: Vec<String> = store.event(e).history_max().iter().map(|&p| name(store, p)).collect();
    below.sort();
    format!("{}({})", store.label_name(e), below.join(","))
}

pub fn names(store: &PrefixStore<'_>, set: &EventSet) -> Vec<String> {
    let mut v: Vec<String> = set.iter().filter(|&e| e != EventId::BOTTOM).map(|e| name(store, e)).collect();
    v.sort();
    v
}

/// Whether `run` is a linearization of `config`.
pub fn is_linearization(store: &PrefixStore<'_>, config: &EventSet, run: &[TransitionIndex]) -> bool {
    let mut done = EventSet::with_bottom();
    for &t in run {
        let next = config
            .iter()
            .find(|&e| !done.contains(e) && store.label(e) == Some(t) && store.event(e).causes().is_subset(&done));
        match next {
            Some(e) => {
                done.insert(e);
            }
            None => return false,
        }
    }
    done == *config
}

/// Every linearization of `config`, as transition sequences.
pub fn linearizations(store: &PrefixStore<'_>, config: &EventSet) -> Vec<Vec<TransitionIndex>> {
    fn go(
        store: &PrefixStore<'_>,
        config: &EventSet,
        done: &mut EventSet,
        run: &mut Vec<TransitionIndex>,
        out: &mut Vec<Vec<TransitionIndex>>,
    ) {
        if done == config {
            out.push(run.clone());
            return;
        }
        for e in config.to_vec() {
            if !done.contains(e) && store.event(e).causes().is_subset(done) {
                done.insert(e);
                run.push(store.label(e).unwrap());
                go(store, config, done, run, out);
                run.pop();
                done.remove(e);
            }
        }
    }
    let mut out = Vec::new();
    go(store, config, &mut EventSet::with_bottom(), &mut Vec::new(), &mut out);
    out
}

pub fn var(sys: &SystemDef, state: &unfold_dpor::model::GlobalState, name: &str) -> i64 {
    state.get(sys.var_index(name).unwrap())
}
