//! Deterministic benchmark families.
//!
//! * `writer-readers`: one writer `w` (`x := 1`) and two readers `r` (`y := x`) and
//!   `r'` (`z := x`), each firing once; `done_*` flags are the program
//!   counters. The four deadlock states are `⟨x,y,z⟩ ∈ {111, 101, 100, 110}`.
//! * `flip`: a single process toggling `x` between 0 and 1 forever.
//! * `ccnf(n)`: `n − 1` threads (n odd); threads `2k−1` and `2k` race on
//!   writing `v{k}` and are independent of every other thread. Each thread
//!   takes a local step and then writes, so the unfolding has `3(n − 1)`
//!   events and `2^((n−1)/2)` maximal configurations.
//! * `readers(n)`: a 1-safe net: `n` transitions read a shared place `p`,
//!   each at most once, and `consume` takes the token from `p`.
//! * `prodcons(max)`: two producers and a consumer guarding `buf1`/`buf2`
//!   with mutexes `m1`/`m2`, looping forever; buffers are bounded by `max`.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::model::{
    system_to_json, Assignment, Atom, CmpOp, DependenceMode, Expr, Operand, PetriNet, SystemDef, TransitionDef, VarDecl,
};

/// A benchmark family and its parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    WriterReaders,
    Flip,
    Ccnf(usize),
    Readers(usize),
    ProdCons(i64),
}

impl FromStr for Family {
    type Err = String;

    /// Parses `FAMILY:PARAM` (`writer-readers` and `flip` take no parameter).
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let num = |p: Option<&str>| -> Result<i64, String> {
            p.ok_or_else(|| format!("family '{name}' needs a parameter, e.g. {name}:3"))?
                .parse::<i64>()
                .map_err(|e| format!("bad parameter for '{name}': {e}"))
        };
        let family = match name {
            "writer-readers" if param.is_none() => Family::WriterReaders,
            "flip" if param.is_none() => Family::Flip,
            "ccnf" => Family::Ccnf(usize::try_from(num(param)?).map_err(|_| "ccnf parameter must be positive")?),
            "readers" => {
                Family::Readers(usize::try_from(num(param)?).map_err(|_| "readers parameter must be positive")?)
            }
            "prodcons" => Family::ProdCons(num(param)?),
            "writer-readers" | "flip" => return Err(format!("family '{name}' takes no parameter")),
            _ => {
                return Err(format!("unknown family '{name}' (writer-readers, flip, ccnf:N, readers:N, prodcons:MAX)"))
            }
        };
        family.validate()?;
        Ok(family)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::WriterReaders => write!(f, "writer-readers"),
            Family::Flip => write!(f, "flip"),
            Family::Ccnf(n) => write!(f, "ccnf:{n}"),
            Family::Readers(n) => write!(f, "readers:{n}"),
            Family::ProdCons(m) => write!(f, "prodcons:{m}"),
        }
    }
}

impl Family {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Family::Ccnf(n) if n < 3 || n % 2 == 0 || n > 63 => Err(format!("ccnf(n) needs odd n in 3..=63, got {n}")),
            Family::Readers(n) if !(1..=12).contains(&n) => Err(format!("readers(n) needs n in 1..=12, got {n}")),
            Family::ProdCons(m) if !(1..=16).contains(&m) => Err(format!("prodcons(max) needs max in 1..=16, got {m}")),
            _ => Ok(()),
        }
    }
}

/// A generated benchmark: guarded commands or a Petri net.
#[derive(Clone, Debug)]
pub enum Benchmark {
    System(SystemDef),
    Net(PetriNet),
}

impl Benchmark {
    /// Serializes in the matching input format.
    pub fn to_json(&self) -> Value {
        match self {
            Benchmark::System(sys) => system_to_json(sys),
            Benchmark::Net(net) => net_to_json(net),
        }
    }

    /// The system to explore; nets are compiled with `mode`.
    pub fn into_system(self, mode: DependenceMode) -> SystemDef {
        match self {
            Benchmark::System(sys) => sys,
            Benchmark::Net(net) => net.compile(mode),
        }
    }
}

pub fn generate(family: Family) -> Result<Benchmark, String> {
    family.validate()?;
    Ok(match family {
        Family::WriterReaders => Benchmark::System(writer_readers()),
        Family::Flip => Benchmark::System(flip()),
        Family::Ccnf(n) => Benchmark::System(ccnf(n)),
        Family::Readers(n) => Benchmark::Net(readers(n)),
        Family::ProdCons(m) => Benchmark::System(prodcons(m)),
    })
}

/// Builder over named variables, used by the families below.
struct Builder {
    vars: Vec<VarDecl>,
    transitions: Vec<TransitionDef>,
}

enum Rhs<'a> {
    Const(i64),
    Var(&'a str),
    Add(&'a str, i64),
}

impl Builder {
    fn new() -> Self {
        Builder { vars: Vec::new(), transitions: Vec::new() }
    }

    fn var(&mut self, name: &str, lo: i64, hi: i64, init: i64) {
        self.vars.push(VarDecl { name: name.into(), lo, hi, init });
    }

    fn idx(&self, name: &str) -> usize {
        self.vars.iter().position(|v| v.name == name).unwrap_or_else(|| panic!("undeclared {name}"))
    }

    fn trans(&mut self, id: &str, process: &str, guard: &[(&str, CmpOp, Rhs)], effect: &[(&str, Rhs)]) {
        let operand = |b: &Self, r: &Rhs| match *r {
            Rhs::Const(c) => Operand::Const(c),
            Rhs::Var(v) => Operand::Var(b.idx(v)),
            Rhs::Add(..) => panic!("offsets are not guard operands"),
        };
        let guard = guard
            .iter()
            .map(|(v, op, rhs)| Atom { lhs: Operand::Var(self.idx(v)), op: *op, rhs: operand(self, rhs) })
            .collect();
        let effect = effect
            .iter()
            .map(|(v, rhs)| Assignment {
                target: self.idx(v),
                value: match *rhs {
                    Rhs::Const(c) => Expr::Const(c),
                    Rhs::Var(w) => Expr::Var(self.idx(w)),
                    Rhs::Add(w, k) => Expr::Offset(self.idx(w), k),
                },
            })
            .collect();
        self.transitions.push(TransitionDef::new(id, process, guard, effect).expect("distinct targets"));
    }

    fn build(self) -> SystemDef {
        SystemDef::new(self.vars, self.transitions).expect("generated systems are well formed")
    }
}

use CmpOp::{Eq, Lt, Ne};

/// The writer/readers running example.
pub fn writer_readers() -> SystemDef {
    let mut b = Builder::new();
    for v in ["x", "y", "z", "done_w", "done_r", "done_r2"] {
        b.var(v, 0, 1, 0);
    }
    b.trans("w", "w", &[("done_w", Eq, Rhs::Const(0))], &[("done_w", Rhs::Const(1)), ("x", Rhs::Const(1))]);
    b.trans("r", "r", &[("done_r", Eq, Rhs::Const(0))], &[("done_r", Rhs::Const(1)), ("y", Rhs::Var("x"))]);
    b.trans("r'", "r'", &[("done_r2", Eq, Rhs::Const(0))], &[("done_r2", Rhs::Const(1)), ("z", Rhs::Var("x"))]);
    b.build()
}

/// A single process toggling `x` forever.
pub fn flip() -> SystemDef {
    let mut b = Builder::new();
    b.var("x", 0, 1, 0);
    b.trans("up", "p", &[("x", Eq, Rhs::Const(0))], &[("x", Rhs::Const(1))]);
    b.trans("down", "p", &[("x", Eq, Rhs::Const(1))], &[("x", Rhs::Const(0))]);
    b.build()
}

pub fn ccnf(n: usize) -> SystemDef {
    assert!(n >= 3 && n % 2 == 1, "ccnf needs odd n >= 3");
    let threads = n - 1;
    let mut b = Builder::new();
    for k in 1..=threads / 2 {
        b.var(&format!("v{k:02}"), 0, threads as i64, 0);
    }
    for i in 1..=threads {
        b.var(&format!("pc{i:02}"), 0, 2, 0);
    }
    for i in 1..=threads {
        let pc = format!("pc{i:02}");
        let shared = format!("v{:02}", i.div_ceil(2));
        let proc = format!("T{i}");
        b.trans(&format!("T{i}.local"), &proc, &[(&pc, Eq, Rhs::Const(0))], &[(&pc, Rhs::Const(1))]);
        b.trans(
            &format!("T{i}.write"),
            &proc,
            &[(&pc, Eq, Rhs::Const(1))],
            &[(&pc, Rhs::Const(2)), (&shared, Rhs::Const(i as i64))],
        );
    }
    b.build()
}

/// Reader net: `r{i}` moves `a{i}` to `b{i}` reading `p`; `consume` moves `p` to `q`.
pub fn readers(n: usize) -> PetriNet {
    let mut places = vec!["p".to_string(), "q".to_string()];
    for i in 1..=n {
        places.push(format!("a{i}"));
        places.push(format!("b{i}"));
    }
    let mut text = json!({
        "places": places,
        "marking": std::iter::once("p".to_string()).chain((1..=n).map(|i| format!("a{i}"))).collect::<Vec<_>>(),
        "transitions": (1..=n)
            .map(|i| json!({"id": format!("r{i}"), "pre": [format!("a{i}")], "read": ["p"], "post": [format!("b{i}")]}))
            .collect::<Vec<_>>(),
    });
    text["transitions"].as_array_mut().unwrap().push(json!({"id": "consume", "pre": ["p"], "post": ["q"]}));
    PetriNet::parse(&text.to_string()).expect("generated net is well formed")
}

/// Producer/consumer skeleton with two mutex-protected buffers of capacity `max`.
pub fn prodcons(max: i64) -> SystemDef {
    let mut b = Builder::new();
    for v in ["m1", "m2"] {
        b.var(v, 0, 1, 0);
    }
    for v in ["buf1", "buf2"] {
        b.var(v, 0, max, 0);
    }
    b.var("pc_p1", 0, 2, 0);
    b.var("pc_p2", 0, 2, 0);
    b.var("pc_c", 0, 5, 0);
    for (p, m, buf) in [("p1", "m1", "buf1"), ("p2", "m2", "buf2")] {
        let pc = format!("pc_{p}");
        let pc = pc.as_str();
        b.trans(
            &format!("{p}.lock"),
            p,
            &[(pc, Eq, Rhs::Const(0)), (m, Eq, Rhs::Const(0))],
            &[(pc, Rhs::Const(1)), (m, Rhs::Const(1))],
        );
        b.trans(
            &format!("{p}.produce"),
            p,
            &[(pc, Eq, Rhs::Const(1)), (buf, Lt, Rhs::Const(max))],
            &[(pc, Rhs::Const(2)), (buf, Rhs::Add(buf, 1))],
        );
        b.trans(
            &format!("{p}.full"),
            p,
            &[(pc, Eq, Rhs::Const(1)), (buf, Eq, Rhs::Const(max))],
            &[(pc, Rhs::Const(2))],
        );
        b.trans(&format!("{p}.unlock"), p, &[(pc, Eq, Rhs::Const(2))], &[(pc, Rhs::Const(0)), (m, Rhs::Const(0))]);
    }
    for (k, m, buf) in [(0, "m1", "buf1"), (3, "m2", "buf2")] {
        let n = if k == 0 { 1 } else { 2 };
        let next = if k == 0 { 3 } else { 0 };
        b.trans(
            &format!("c.lock{n}"),
            "c",
            &[("pc_c", Eq, Rhs::Const(k)), (m, Eq, Rhs::Const(0))],
            &[("pc_c", Rhs::Const(k + 1)), (m, Rhs::Const(1))],
        );
        b.trans(
            &format!("c.consume{n}"),
            "c",
            &[("pc_c", Eq, Rhs::Const(k + 1)), (buf, Ne, Rhs::Const(0))],
            &[("pc_c", Rhs::Const(k + 2)), (buf, Rhs::Add(buf, -1))],
        );
        b.trans(
            &format!("c.empty{n}"),
            "c",
            &[("pc_c", Eq, Rhs::Const(k + 1)), (buf, Eq, Rhs::Const(0))],
            &[("pc_c", Rhs::Const(k + 2))],
        );
        b.trans(
            &format!("c.unlock{n}"),
            "c",
            &[("pc_c", Eq, Rhs::Const(k + 2))],
            &[("pc_c", Rhs::Const(next)), (m, Rhs::Const(0))],
        );
    }
    b.build()
}

/// Serializes a net back to its JSON format.
pub fn net_to_json(net: &PetriNet) -> Value {
    let names = |s: &std::collections::BTreeSet<usize>| s.iter().map(|&p| net.places[p].clone()).collect::<Vec<_>>();
    json!({
        "places": net.places,
        "marking": names(&net.marking),
        "transitions": net.transitions.iter().map(|t| json!({
            "id": t.id, "pre": names(&t.pre), "post": names(&t.post), "read": names(&t.read),
        })).collect::<Vec<_>>(),
    })
}
