//! Finite concurrent systems as guarded-command transition systems.
//!
//! A [`SystemDef`] is a set of bounded integer variables, a list of guarded
//! parallel assignments and an unconditional independence relation over
//! those transitions. Transitions are partial functions on [`GlobalState`]:
//! a transition is disabled when its guard is false or when any assignment
//! would leave the target variable's declared domain.

mod independence;
mod json;
mod petri;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

pub use independence::{
    check_unconditional_independence, syntactic_independence, IndependenceRelation, Violation, ViolationKind,
};
pub use json::{load_system, system_to_json, IndependenceSpec};
pub use petri::{is_petri_net, load_petri_net, DependenceMode, PetriNet};

/// Index of a variable in [`SystemDef::vars`]. Variables are kept sorted by name.
pub type VarIndex = usize;

/// Index of a transition in [`SystemDef::transitions`].
pub type TransitionIndex = usize;

/// Name of the distinguished variable whose non-zero value marks an error state.
pub const ERROR_VAR: &str = "__error";

/// A total valuation of the system variables, ordered by variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState(Box<[i64]>);

impl GlobalState {
    pub fn new(values: Vec<i64>) -> Self {
        GlobalState(values.into_boxed_slice())
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, var: VarIndex) -> i64 {
        self.0[var]
    }

    /// Renders the state as `{name: value, ...}` using the system's names.
    pub fn display<'a>(&'a self, sys: &'a SystemDef) -> impl fmt::Display + 'a {
        StateDisplay { state: self, sys }
    }
}

impl fmt::Debug for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

struct StateDisplay<'a> {
    state: &'a GlobalState,
    sys: &'a SystemDef,
}

impl fmt::Display for StateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, decl)) in self.state.0.iter().zip(&self.sys.vars).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", decl.name, v)?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
}

impl VarDecl {
    pub fn contains(&self, value: i64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Var(VarIndex),
    Const(i64),
}

impl Operand {
    fn eval(self, s: &GlobalState) -> i64 {
        match self {
            Operand::Var(v) => s.get(v),
            Operand::Const(c) => c,
        }
    }

    fn var(self) -> Option<VarIndex> {
        match self {
            Operand::Var(v) => Some(v),
            Operand::Const(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl CmpOp {
    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

/// One atomic comparison of a guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Atom {
    pub lhs: Operand,
    pub op: CmpOp,
    pub rhs: Operand,
}

impl Atom {
    pub fn holds(&self, s: &GlobalState) -> bool {
        self.op.holds(self.lhs.eval(s), self.rhs.eval(s))
    }
}

/// Right-hand side of an assignment: a constant, a variable, or a variable plus an offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(i64),
    Var(VarIndex),
    Offset(VarIndex, i64),
}

impl Expr {
    fn eval(self, s: &GlobalState) -> i64 {
        match self {
            Expr::Const(c) => c,
            Expr::Var(v) => s.get(v),
            Expr::Offset(v, k) => s.get(v) + k,
        }
    }

    fn var(self) -> Option<VarIndex> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(v) | Expr::Offset(v, _) => Some(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub target: VarIndex,
    pub value: Expr,
}

/// A guarded parallel assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionDef {
    pub id: String,
    pub process: String,
    pub guard: Vec<Atom>,
    pub effect: Vec<Assignment>,
    reads: BTreeSet<VarIndex>,
    writes: BTreeSet<VarIndex>,
}

impl TransitionDef {
    /// Builds a transition and derives its footprints.
    ///
    /// Fails if some variable is assigned twice in the effect.
    pub fn new(
        id: impl Into<String>,
        process: impl Into<String>,
        guard: Vec<Atom>,
        effect: Vec<Assignment>,
    ) -> Result<Self, String> {
        let mut seen = HashSet::new();
        for a in &effect {
            if !seen.insert(a.target) {
                return Err(format!("variable #{} assigned twice in one effect", a.target));
            }
        }
        let (reads, writes) = footprints(&guard, &effect);
        Ok(TransitionDef { id: id.into(), process: process.into(), guard, effect, reads, writes })
    }

    /// Variables occurring in the guard or on an assignment's right-hand side.
    pub fn reads(&self) -> &BTreeSet<VarIndex> {
        &self.reads
    }

    /// Variables assigned by the effect.
    pub fn writes(&self) -> &BTreeSet<VarIndex> {
        &self.writes
    }
}

/// Recomputes the read and write footprints of a guard/effect pair.
pub fn footprints(guard: &[Atom], effect: &[Assignment]) -> (BTreeSet<VarIndex>, BTreeSet<VarIndex>) {
    let mut reads = BTreeSet::new();
    for atom in guard {
        reads.extend(atom.lhs.var());
        reads.extend(atom.rhs.var());
    }
    for a in effect {
        reads.extend(a.value.var());
    }
    let writes = effect.iter().map(|a| a.target).collect();
    (reads, writes)
}

/// A finite concurrent system `⟨Σ, T, s̃⟩` together with its independence relation.
#[derive(Clone, Debug)]
pub struct SystemDef {
    pub vars: Vec<VarDecl>,
    pub transitions: Vec<TransitionDef>,
    pub independence: IndependenceRelation,
}

impl SystemDef {
    /// Assembles a system; variables are re-sorted by name and references remapped.
    ///
    /// The independence relation is derived syntactically; use
    /// [`SystemDef::with_independence`] to override it.
    pub fn new(vars: Vec<VarDecl>, transitions: Vec<TransitionDef>) -> Result<Self, String> {
        let mut order: Vec<usize> = (0..vars.len()).collect();
        order.sort_by(|&a, &b| vars[a].name.cmp(&vars[b].name));
        let mut remap = vec![0; vars.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let sorted_vars: Vec<VarDecl> = order.iter().map(|&i| vars[i].clone()).collect();
        for w in sorted_vars.windows(2) {
            if w[0].name == w[1].name {
                return Err(format!("duplicate variable '{}'", w[0].name));
            }
        }
        for v in &sorted_vars {
            if v.lo > v.hi {
                return Err(format!("variable '{}' has empty domain [{}, {}]", v.name, v.lo, v.hi));
            }
            if !v.contains(v.init) {
                return Err(format!("initial value {} of '{}' outside domain [{}, {}]", v.init, v.name, v.lo, v.hi));
            }
        }
        let mut ids = HashSet::new();
        let mut mapped = Vec::with_capacity(transitions.len());
        for t in transitions {
            if !ids.insert(t.id.clone()) {
                return Err(format!("duplicate transition id '{}'", t.id));
            }
            let map_op = |o: Operand| match o {
                Operand::Var(v) => Operand::Var(remap[v]),
                c => c,
            };
            let guard = t.guard.iter().map(|a| Atom { lhs: map_op(a.lhs), op: a.op, rhs: map_op(a.rhs) }).collect();
            let effect = t
                .effect
                .iter()
                .map(|a| Assignment {
                    target: remap[a.target],
                    value: match a.value {
                        Expr::Var(v) => Expr::Var(remap[v]),
                        Expr::Offset(v, k) => Expr::Offset(remap[v], k),
                        c => c,
                    },
                })
                .collect();
            mapped.push(TransitionDef::new(t.id, t.process, guard, effect)?);
        }
        let mut sys =
            SystemDef { vars: sorted_vars, transitions: mapped, independence: IndependenceRelation::all_dependent(0) };
        sys.independence = syntactic_independence(&sys);
        Ok(sys)
    }

    pub fn with_independence(mut self, rel: IndependenceRelation) -> Self {
        assert_eq!(rel.len(), self.transitions.len(), "relation size mismatch");
        self.independence = rel;
        self
    }

    pub fn initial_state(&self) -> GlobalState {
        GlobalState::new(self.vars.iter().map(|v| v.init).collect())
    }

    pub fn var_index(&self, name: &str) -> Option<VarIndex> {
        self.vars.binary_search_by(|v| v.name.as_str().cmp(name)).ok()
    }

    pub fn transition_index(&self, id: &str) -> Option<TransitionIndex> {
        self.transitions.iter().position(|t| t.id == id)
    }

    /// The `__error` variable, if the system declares one.
    pub fn error_var(&self) -> Option<VarIndex> {
        self.var_index(ERROR_VAR)
    }

    pub fn is_error_state(&self, s: &GlobalState) -> bool {
        self.error_var().is_some_and(|v| s.get(v) != 0)
    }

    /// Fires `t` at `s`; `None` when the guard fails or a result leaves its domain.
    pub fn fire(&self, s: &GlobalState, t: TransitionIndex) -> Option<GlobalState> {
        fire(self, s, &self.transitions[t])
    }

    pub fn is_enabled(&self, s: &GlobalState, t: TransitionIndex) -> bool {
        self.fire(s, t).is_some()
    }

    /// Indices of the transitions enabled at `s`, in declaration order.
    pub fn enabled(&self, s: &GlobalState) -> Vec<TransitionIndex> {
        (0..self.transitions.len()).filter(|&t| self.is_enabled(s, t)).collect()
    }

    pub fn dependent(&self, a: TransitionIndex, b: TransitionIndex) -> bool {
        self.independence.dependent(a, b)
    }

    /// Replays a transition sequence from the initial state.
    pub fn replay(&self, run: &[TransitionIndex]) -> Option<GlobalState> {
        let mut s = self.initial_state();
        for &t in run {
            s = self.fire(&s, t)?;
        }
        Some(s)
    }

    pub fn run_ids(&self, run: &[TransitionIndex]) -> Vec<String> {
        run.iter().map(|&t| self.transitions[t].id.clone()).collect()
    }

    /// Breadth-first reachable states, or `Err(bound)` once more than `bound` are found.
    pub fn reachable(&self, bound: usize) -> Result<Vec<GlobalState>, usize> {
        let init = self.initial_state();
        let mut seen = HashSet::from([init.clone()]);
        let mut order = vec![init.clone()];
        let mut queue = VecDeque::from([init]);
        while let Some(s) = queue.pop_front() {
            for t in 0..self.transitions.len() {
                if let Some(next) = self.fire(&s, t) {
                    if seen.insert(next.clone()) {
                        if seen.len() > bound {
                            return Err(bound);
                        }
                        order.push(next.clone());
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(order)
    }
}

/// Applies a transition's guard and parallel assignment.
pub fn fire(sys: &SystemDef, s: &GlobalState, t: &TransitionDef) -> Option<GlobalState> {
    if !t.guard.iter().all(|a| a.holds(s)) {
        return None;
    }
    let mut next = s.0.to_vec();
    for a in &t.effect {
        let v = a.value.eval(s);
        if !sys.vars[a.target].contains(v) {
            return None;
        }
        next[a.target] = v;
    }
    Some(GlobalState::new(next))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lock_system() -> SystemDef {
        let vars = vec![VarDecl { name: "m".into(), lo: 0, hi: 1, init: 0 }];
        let lock = TransitionDef::new(
            "lock",
            "p",
            vec![Atom { lhs: Operand::Var(0), op: CmpOp::Eq, rhs: Operand::Const(0) }],
            vec![Assignment { target: 0, value: Expr::Const(1) }],
        )
        .unwrap();
        SystemDef::new(vars, vec![lock]).unwrap()
    }

    #[test]
    fn fire_lock() {
        let sys = lock_system();
        let s0 = sys.initial_state();
        assert_eq!(sys.fire(&s0, 0), Some(GlobalState::new(vec![1])));
        let s1 = GlobalState::new(vec![1]);
        assert_eq!(sys.fire(&s1, 0), None);
        assert_eq!(sys.enabled(&s0), vec![0]);
        assert!(sys.enabled(&s1).is_empty());
    }

    #[test]
    fn out_of_domain_disables() {
        let vars = vec![VarDecl { name: "c".into(), lo: 0, hi: 2, init: 2 }];
        let inc =
            TransitionDef::new("inc", "p", vec![], vec![Assignment { target: 0, value: Expr::Offset(0, 1) }]).unwrap();
        let sys = SystemDef::new(vars, vec![inc]).unwrap();
        assert_eq!(sys.fire(&sys.initial_state(), 0), None);
    }

    #[test]
    fn parallel_assignment_reads_old_values() {
        let vars = vec![
            VarDecl { name: "a".into(), lo: 0, hi: 5, init: 1 },
            VarDecl { name: "b".into(), lo: 0, hi: 5, init: 2 },
        ];
        let swap = TransitionDef::new(
            "swap",
            "p",
            vec![],
            vec![Assignment { target: 0, value: Expr::Var(1) }, Assignment { target: 1, value: Expr::Var(0) }],
        )
        .unwrap();
        let sys = SystemDef::new(vars, vec![swap]).unwrap();
        assert_eq!(sys.fire(&sys.initial_state(), 0).unwrap().values(), &[2, 1]);
    }

    #[test]
    fn double_assignment_rejected() {
        let r = TransitionDef::new(
            "t",
            "p",
            vec![],
            vec![Assignment { target: 0, value: Expr::Const(1) }, Assignment { target: 0, value: Expr::Const(0) }],
        );
        assert!(r.is_err());
    }

    #[test]
    fn vars_sorted_and_remapped() {
        let vars = vec![
            VarDecl { name: "z".into(), lo: 0, hi: 1, init: 0 },
            VarDecl { name: "a".into(), lo: 0, hi: 1, init: 1 },
        ];
        // writes z := a, declared against the unsorted indices
        let t = TransitionDef::new("t", "p", vec![], vec![Assignment { target: 0, value: Expr::Var(1) }]).unwrap();
        let sys = SystemDef::new(vars, vec![t]).unwrap();
        assert_eq!(sys.vars[0].name, "a");
        assert_eq!(sys.fire(&sys.initial_state(), 0).unwrap().values(), &[1, 1]);
        assert_eq!(sys.transitions[0].writes().iter().copied().collect::<Vec<_>>(), vec![1]);
        assert_eq!(sys.transitions[0].reads().iter().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn init_outside_domain_rejected() {
        let vars = vec![VarDecl { name: "x".into(), lo: 0, hi: 1, init: 3 }];
        assert!(SystemDef::new(vars, vec![]).is_err());
    }
}
