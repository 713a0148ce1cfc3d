//! Seeded random systems for property testing.
//!
//! Each process owns a program counter and a few transitions; guards and
//! effects may also touch a small pool of shared variables. Terminating
//! systems only move program counters forward. Looping systems add back
//! edges. Systems with fewer than `min_states` or more than `max_states`
//! reachable states are rejected and regenerated.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::model::{Assignment, Atom, CmpOp, Expr, Operand, SystemDef, TransitionDef, VarDecl};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusParams {
    pub max_processes: usize,
    pub max_transitions: usize,
    pub min_states: usize,
    pub max_states: usize,
    pub looping: bool,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams { max_processes: 5, max_transitions: 8, min_states: 4, max_states: 300, looping: false }
    }
}

/// A random system drawn deterministically from `seed`.
pub fn random_system(seed: u64, params: &CorpusParams) -> SystemDef {
    let mut rng = StdRng::seed_from_u64(seed);
    loop {
        let sys = draw(&mut rng, params);
        if sys.reachable(params.max_states).is_ok_and(|r| r.len() >= params.min_states) {
            return sys;
        }
    }
}

fn draw(rng: &mut StdRng, p: &CorpusParams) -> SystemDef {
    let nproc = rng.gen_range(1..=p.max_processes);
    let ntrans = rng.gen_range(nproc..=p.max_transitions.max(nproc));
    let mut per_proc = vec![1usize; nproc];
    for _ in nproc..ntrans {
        per_proc[rng.gen_range(0..nproc)] += 1;
    }
    let nshared = rng.gen_range(1..=3);
    let mut vars: Vec<VarDecl> =
        (0..nshared).map(|i| VarDecl { name: format!("g{i}"), lo: 0, hi: rng.gen_range(1..=2), init: 0 }).collect();
    let shared: Vec<usize> = (0..nshared).collect();
    let mut transitions = Vec::new();
    for (pi, &k) in per_proc.iter().enumerate() {
        // source location of each transition; equal neighbours are branches
        let mut src = vec![0i64; k];
        for j in 1..k {
            src[j] = src[j - 1] + i64::from(!rng.gen_bool(0.3));
        }
        let top = src[k - 1] + 1;
        let pc = vars.len();
        vars.push(VarDecl { name: format!("pc{pi}"), lo: 0, hi: top, init: 0 });
        let back = p.looping.then(|| rng.gen_range(0..k));
        for (j, &from) in src.iter().enumerate() {
            let to = match back {
                Some(b) if b == j => rng.gen_range(0..=from),
                _ => from + 1,
            };
            let mut guard = vec![Atom { lhs: Operand::Var(pc), op: CmpOp::Eq, rhs: Operand::Const(from) }];
            if rng.gen_bool(0.5) {
                let g = *shared.choose(rng).expect("at least one shared variable");
                let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le].choose(rng).unwrap();
                let rhs = if nshared > 1 && rng.gen_bool(0.25) {
                    Operand::Var(*shared.choose(rng).unwrap())
                } else {
                    Operand::Const(rng.gen_range(0..=vars[g].hi))
                };
                guard.push(Atom { lhs: Operand::Var(g), op, rhs });
            }
            let mut effect = vec![Assignment { target: pc, value: Expr::Const(to) }];
            let mut targets = shared.clone();
            targets.shuffle(rng);
            for &g in targets.iter().take(rng.gen_range(0..=2)) {
                let value = match rng.gen_range(0..4) {
                    0 => Expr::Const(rng.gen_range(0..=vars[g].hi)),
                    1 => Expr::Var(*shared.choose(rng).unwrap()),
                    2 => Expr::Offset(g, 1),
                    _ => Expr::Offset(g, -1),
                };
                effect.push(Assignment { target: g, value });
            }
            transitions.push(
                TransitionDef::new(format!("p{pi}t{j}"), format!("P{pi}"), guard, effect).expect("distinct targets"),
            );
        }
    }
    SystemDef::new(vars, transitions).expect("generated systems are well formed")
}
