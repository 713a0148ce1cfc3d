//! JSON system format.
//!
//! ```json
//! {"vars": {"m": {"init": 0, "domain": [0, 1]}},
//!  "transitions": [{"id": "lock", "process": "p",
//!                   "guard": [["m", "=", 0]], "effect": [["m", ":=", 1]]}],
//!  "independence": "syntactic"}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Assignment, Atom, CmpOp, Expr, IndependenceRelation, Operand, SystemDef, TransitionDef, VarDecl};
use crate::error::LoadError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    vars: BTreeMap<String, RawVar>,
    transitions: Vec<RawTransition>,
    #[serde(default)]
    independence: Option<IndependenceSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVar {
    init: i64,
    domain: [i64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    id: String,
    #[serde(default)]
    process: Option<String>,
    #[serde(default)]
    guard: Vec<[Value; 3]>,
    #[serde(default)]
    effect: Vec<[Value; 3]>,
}

/// How the file declares its independence relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndependenceSpec {
    /// The string `"syntactic"`.
    Named(String),
    /// `{"dependent": [[id, id], ...]}`; every other distinct pair is independent.
    Explicit { dependent: Vec<[String; 2]> },
}

/// Parses the JSON system format.
pub fn load_system(text: &str) -> Result<SystemDef, LoadError> {
    let raw: RawSystem = serde_json::from_str(text).map_err(LoadError::from_json)?;
    let names: Vec<&String> = raw.vars.keys().collect();
    let var = |name: &str, loc: &dyn Fn() -> String| -> Result<usize, LoadError> {
        names
            .binary_search_by(|n| n.as_str().cmp(name))
            .map_err(|_| LoadError::invalid(text, loc(), format!("unknown variable '{name}'")))
    };
    let vars: Vec<VarDecl> = raw
        .vars
        .iter()
        .map(|(name, v)| VarDecl { name: name.clone(), lo: v.domain[0], hi: v.domain[1], init: v.init })
        .collect();

    let mut transitions = Vec::with_capacity(raw.transitions.len());
    for (ti, t) in raw.transitions.iter().enumerate() {
        let here = |what: String| format!("transitions[{ti}] (id \"{}\"){what}", t.id);
        let mut guard = Vec::new();
        for (gi, [lhs, op, rhs]) in t.guard.iter().enumerate() {
            let loc = || here(format!(".guard[{gi}]"));
            let operand = |v: &Value| -> Result<Operand, LoadError> {
                match v {
                    Value::String(s) => Ok(Operand::Var(var(s, &loc)?)),
                    Value::Number(n) => n
                        .as_i64()
                        .map(Operand::Const)
                        .ok_or_else(|| LoadError::invalid(text, loc(), "expected integer constant".into())),
                    _ => Err(LoadError::invalid(text, loc(), "operand must be a variable name or integer".into())),
                }
            };
            let op = match op.as_str() {
                Some("=") | Some("==") => CmpOp::Eq,
                Some("!=") | Some("≠") => CmpOp::Ne,
                Some("<") => CmpOp::Lt,
                Some("<=") | Some("≤") => CmpOp::Le,
                _ => return Err(LoadError::invalid(text, loc(), format!("unknown comparison {op}"))),
            };
            guard.push(Atom { lhs: operand(lhs)?, op, rhs: operand(rhs)? });
        }
        let mut effect = Vec::new();
        for (ei, [target, assign, expr]) in t.effect.iter().enumerate() {
            let loc = || here(format!(".effect[{ei}]"));
            let target = match target {
                Value::String(s) => var(s, &loc)?,
                _ => return Err(LoadError::invalid(text, loc(), "assignment target must be a variable".into())),
            };
            if assign.as_str() != Some(":=") {
                return Err(LoadError::invalid(text, loc(), "expected \":=\"".into()));
            }
            let value = match expr {
                Value::Number(n) => Expr::Const(
                    n.as_i64().ok_or_else(|| LoadError::invalid(text, loc(), "expected integer constant".into()))?,
                ),
                Value::String(s) => Expr::Var(var(s, &loc)?),
                Value::Array(parts) if parts.len() == 3 => {
                    let v = parts[0]
                        .as_str()
                        .ok_or_else(|| LoadError::invalid(text, loc(), "offset base must be a variable".into()))?;
                    let k = parts[2]
                        .as_i64()
                        .ok_or_else(|| LoadError::invalid(text, loc(), "offset must be an integer".into()))?;
                    let k = match parts[1].as_str() {
                        Some("+") => k,
                        Some("-") => -k,
                        _ => {
                            return Err(LoadError::invalid(
                                text,
                                loc(),
                                "offset operator must be \"+\" or \"-\"".into(),
                            ))
                        }
                    };
                    Expr::Offset(var(v, &loc)?, k)
                }
                _ => return Err(LoadError::invalid(text, loc(), "malformed expression".into())),
            };
            effect.push(Assignment { target, value });
        }
        let process = t.process.clone().unwrap_or_else(|| t.id.clone());
        let def = TransitionDef::new(t.id.clone(), process, guard, effect)
            .map_err(|m| LoadError::invalid(text, here(String::new()), m))?;
        transitions.push(def);
    }

    let sys = SystemDef::new(vars, transitions).map_err(|m| LoadError::invalid(text, "system".into(), m))?;
    match raw.independence {
        None => Ok(sys),
        Some(IndependenceSpec::Named(name)) if name == "syntactic" => Ok(sys),
        Some(IndependenceSpec::Named(name)) => {
            Err(LoadError::invalid(text, "independence".into(), format!("unknown independence mode '{name}'")))
        }
        Some(IndependenceSpec::Explicit { dependent }) => {
            let mut pairs = Vec::new();
            for (i, [a, b]) in dependent.iter().enumerate() {
                let idx = |id: &str| {
                    sys.transition_index(id).ok_or_else(|| {
                        LoadError::invalid(
                            text,
                            format!("independence.dependent[{i}]"),
                            format!("unknown transition '{id}'"),
                        )
                    })
                };
                pairs.push((idx(a)?, idx(b)?));
            }
            let rel = IndependenceRelation::from_dependent_pairs(sys.transitions.len(), pairs);
            Ok(sys.with_independence(rel))
        }
    }
}

/// Serializes a system back to the JSON format.
///
/// The independence is written as `"syntactic"` when it coincides with the
/// syntactic derivation and as an explicit dependent list otherwise.
pub fn system_to_json(sys: &SystemDef) -> Value {
    let vars: serde_json::Map<String, Value> =
        sys.vars.iter().map(|v| (v.name.clone(), json!({"init": v.init, "domain": [v.lo, v.hi]}))).collect();
    let name = |v: usize| Value::String(sys.vars[v].name.clone());
    let operand = |o: Operand| match o {
        Operand::Var(v) => name(v),
        Operand::Const(c) => json!(c),
    };
    let transitions: Vec<Value> = sys
        .transitions
        .iter()
        .map(|t| {
            let guard: Vec<Value> =
                t.guard.iter().map(|a| json!([operand(a.lhs), a.op.symbol(), operand(a.rhs)])).collect();
            let effect: Vec<Value> = t
                .effect
                .iter()
                .map(|a| {
                    let rhs = match a.value {
                        Expr::Const(c) => json!(c),
                        Expr::Var(v) => name(v),
                        Expr::Offset(v, k) if k < 0 => json!([sys.vars[v].name, "-", -k]),
                        Expr::Offset(v, k) => json!([sys.vars[v].name, "+", k]),
                    };
                    json!([name(a.target), ":=", rhs])
                })
                .collect();
            json!({"id": t.id, "process": t.process, "guard": guard, "effect": effect})
        })
        .collect();
    let independence = if sys.independence == super::syntactic_independence(sys) {
        json!("syntactic")
    } else {
        let dependent: Vec<Value> = sys
            .independence
            .dependent_pairs()
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| json!([sys.transitions[a].id, sys.transitions[b].id]))
            .collect();
        json!({ "dependent": dependent })
    };
    json!({"vars": vars, "transitions": transitions, "independence": independence})
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOCKS: &str = r#"{
        "vars": {"m1": {"init": 0, "domain": [0, 1]}, "m2": {"init": 0, "domain": [0, 1]}},
        "transitions": [
            {"id": "lock1", "process": "a", "guard": [["m1", "=", 0]], "effect": [["m1", ":=", 1]]},
            {"id": "lock2", "process": "b", "guard": [["m2", "=", 0]], "effect": [["m2", ":=", 1]]}
        ],
        "independence": "syntactic"
    }"#;

    #[test]
    fn loads_locks_on_distinct_mutexes() {
        let sys = load_system(LOCKS).unwrap();
        assert_eq!(sys.transitions.len(), 2);
        assert!(sys.independence.independent(0, 1));
        assert!(sys.independence.dependent(0, 0));
    }

    #[test]
    fn explicit_relation_overrides() {
        let text =
            LOCKS.replace(r#""independence": "syntactic""#, r#""independence": {"dependent": [["lock1", "lock2"]]}"#);
        let sys = load_system(&text).unwrap();
        assert!(sys.independence.dependent(0, 1));
    }

    #[test]
    fn offsets_and_var_rhs() {
        let text = r#"{"vars": {"a": {"init": 1, "domain": [0, 3]}, "b": {"init": 0, "domain": [0, 3]}},
            "transitions": [{"id": "t", "guard": [["a", "<", "b"]], "effect": [["a", ":=", ["b", "-", 1]], ["b", ":=", "a"]]}]}"#;
        let sys = load_system(text).unwrap();
        assert_eq!(sys.transitions[0].process, "t");
        assert_eq!(sys.fire(&sys.initial_state(), 0), None);
        let s = super::super::GlobalState::new(vec![1, 3]);
        assert_eq!(sys.fire(&s, 0).unwrap().values(), &[2, 1]);
    }

    #[test]
    fn unknown_variable_names_location() {
        let text = r#"{"vars": {"a": {"init": 0, "domain": [0, 1]}},
"transitions": [
  {"id": "bad", "guard": [["q", "=", 0]], "effect": []}
]}"#;
        let err = load_system(text).unwrap_err().to_string();
        assert!(err.contains("transitions[0]"), "{err}");
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("'q'"), "{err}");
    }

    #[test]
    fn syntax_error_has_line() {
        let err = load_system("{\n\"vars\": ,\n}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = r#"{"vars": {}, "transitions": [{"id": "t"}, {"id": "t"}]}"#;
        assert!(load_system(text).unwrap_err().to_string().contains("duplicate transition id"));
    }

    #[test]
    fn json_round_trip_preserves_semantics() {
        let sys = load_system(LOCKS).unwrap();
        let again = load_system(&system_to_json(&sys).to_string()).unwrap();
        assert_eq!(again.transitions, sys.transitions);
        assert_eq!(again.independence, sys.independence);
    }
}
