//! Deterministic sequential specifications.
//!
//! A [`SeqSpec`] drives atomic base objects inside the simulator and is the
//! reference against which sequential histories are replayed.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{ProcessId, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("operation {op:?} is not defined for type {type_name}")]
    UnknownOp { type_name: String, op: String },
    #[error("bad arguments for {op}: {detail}")]
    BadArgs { op: String, detail: String },
    #[error("coin flips have no deterministic response")]
    Nondeterministic,
}

/// Sequential type specification.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SeqSpec {
    /// Read/write register over arbitrary values.
    Register { initial: Value },
    /// Register over the domain `{0..=bound}`.
    BoundedRegister { bound: i64, initial: i64 },
    /// Snapshot with one component per process: `update` writes the caller's
    /// component, `scan` returns the vector.
    Snapshot { initial: Vec<Value> },
    /// FIFO queue; `dequeue` on empty returns [`Value::Empty`].
    Queue,
    /// Integer counter; `fetch&inc`/`fetch&dec` return the prior value.
    StrongCounter { initial: i64 },
    /// `CAS(X,Y)` returns the prior state and installs `Y` iff the state was `X`.
    Cas { initial: Value },
    /// Register with load-linked / store-conditional.
    LlSc { initial: Value },
    /// Read-modify-write cell: read, write, fetch&inc, fetch&set.
    Rmw { initial: Value },
    /// One-shot test-and-set bit; `test&set` returns the prior bit.
    TestAndSet,
    /// Per-process coin; `flip` may return any element of `omega`.
    Coin { omega: Vec<Value> },
}

/// State of an object under its [`SeqSpec`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpecState {
    Cell(Value),
    Vector(Vec<Value>),
    Fifo(Vec<Value>),
    Linked {
        value: Value,
        links: BTreeSet<ProcessId>,
    },
    Stateless,
}

fn arg<'a>(op: &str, args: &'a [Value], n: usize) -> Result<&'a [Value], SpecError> {
    if args.len() != n {
        return Err(SpecError::BadArgs {
            op: op.to_string(),
            detail: format!("expected {n} argument(s), got {}", args.len()),
        });
    }
    Ok(args)
}

fn int_arg(op: &str, v: &Value) -> Result<i64, SpecError> {
    v.as_int().ok_or_else(|| SpecError::BadArgs {
        op: op.to_string(),
        detail: format!("expected integer, got {v}"),
    })
}

impl SeqSpec {
    pub fn type_name(&self) -> &'static str {
        match self {
            SeqSpec::Register { .. } => "register",
            SeqSpec::BoundedRegister { bound: 1, .. } => "binary-register",
            SeqSpec::BoundedRegister { .. } => "bounded-register",
            SeqSpec::Snapshot { .. } => "snapshot",
            SeqSpec::Queue => "queue",
            SeqSpec::StrongCounter { .. } => "strong-counter",
            SeqSpec::Cas { .. } => "cas",
            SeqSpec::LlSc { .. } => "llsc",
            SeqSpec::Rmw { .. } => "rmw",
            SeqSpec::TestAndSet => "test-and-set",
            SeqSpec::Coin { .. } => "coin",
        }
    }

    pub fn is_coin(&self) -> bool {
        matches!(self, SeqSpec::Coin { .. })
    }

    pub fn initial_state(&self) -> SpecState {
        match self {
            SeqSpec::Register { initial } | SeqSpec::Cas { initial } | SeqSpec::Rmw { initial } => {
                SpecState::Cell(initial.clone())
            }
            SeqSpec::BoundedRegister { initial, .. } => SpecState::Cell(Value::Int(*initial)),
            SeqSpec::Snapshot { initial } => SpecState::Vector(initial.clone()),
            SeqSpec::Queue => SpecState::Fifo(Vec::new()),
            SeqSpec::StrongCounter { initial } => SpecState::Cell(Value::Int(*initial)),
            SeqSpec::LlSc { initial } => SpecState::Linked {
                value: initial.clone(),
                links: BTreeSet::new(),
            },
            SeqSpec::TestAndSet => SpecState::Cell(Value::Int(0)),
            SeqSpec::Coin { .. } => SpecState::Stateless,
        }
    }

    /// Applies one operation. Total and deterministic on every defined
    /// operation; coins report [`SpecError::Nondeterministic`].
    pub fn apply(
        &self,
        state: &SpecState,
        process: ProcessId,
        op: &str,
        args: &[Value],
    ) -> Result<(SpecState, Value), SpecError> {
        let unknown = || SpecError::UnknownOp {
            type_name: self.type_name().to_string(),
            op: op.to_string(),
        };
        match (self, state) {
            (SeqSpec::Register { .. }, SpecState::Cell(v)) => match op {
                "read" => {
                    arg(op, args, 0)?;
                    Ok((state.clone(), v.clone()))
                }
                "write" => {
                    let a = arg(op, args, 1)?;
                    Ok((SpecState::Cell(a[0].clone()), Value::Unit))
                }
                _ => Err(unknown()),
            },
            (SeqSpec::BoundedRegister { bound, .. }, SpecState::Cell(v)) => match op {
                "read" => {
                    arg(op, args, 0)?;
                    Ok((state.clone(), v.clone()))
                }
                "write" => {
                    let a = arg(op, args, 1)?;
                    let x = int_arg(op, &a[0])?;
                    if !(0..=*bound).contains(&x) {
                        return Err(SpecError::BadArgs {
                            op: op.to_string(),
                            detail: format!("{x} outside 0..={bound}"),
                        });
                    }
                    Ok((SpecState::Cell(Value::Int(x)), Value::Unit))
                }
                _ => Err(unknown()),
            },
            (SeqSpec::Snapshot { .. }, SpecState::Vector(xs)) => match op {
                "scan" => {
                    arg(op, args, 0)?;
                    Ok((state.clone(), Value::Tuple(xs.clone())))
                }
                "update" => {
                    let a = arg(op, args, 1)?;
                    let i = process.index();
                    if i >= xs.len() {
                        return Err(SpecError::BadArgs {
                            op: op.to_string(),
                            detail: format!("{process} has no snapshot component"),
                        });
                    }
                    let mut next = xs.clone();
                    next[i] = a[0].clone();
                    Ok((SpecState::Vector(next), Value::Unit))
                }
                _ => Err(unknown()),
            },
            (SeqSpec::Queue, SpecState::Fifo(items)) => match op {
                "enqueue" => {
                    let a = arg(op, args, 1)?;
                    let mut next = items.clone();
                    next.push(a[0].clone());
                    Ok((SpecState::Fifo(next), Value::Unit))
                }
                "dequeue" => {
                    arg(op, args, 0)?;
                    if items.is_empty() {
                        Ok((state.clone(), Value::Empty))
                    } else {
                        let mut next = items.clone();
                        let front = next.remove(0);
                        Ok((SpecState::Fifo(next), front))
                    }
                }
                _ => Err(unknown()),
            },
            (SeqSpec::StrongCounter { .. }, SpecState::Cell(v)) => {
                let cur = int_arg(op, v)?;
                arg(op, args, 0)?;
                match op {
                    "fetch&inc" => Ok((SpecState::Cell(Value::Int(cur + 1)), v.clone())),
                    "fetch&dec" => Ok((SpecState::Cell(Value::Int(cur - 1)), v.clone())),
                    "read" => Ok((state.clone(), v.clone())),
                    _ => Err(unknown()),
                }
            }
            (SeqSpec::Cas { .. }, SpecState::Cell(v)) => match op {
                "CAS" => {
                    let a = arg(op, args, 2)?;
                    let next = if *v == a[0] { a[1].clone() } else { v.clone() };
                    Ok((SpecState::Cell(next), v.clone()))
                }
                "read" => {
                    arg(op, args, 0)?;
                    Ok((state.clone(), v.clone()))
                }
                _ => Err(unknown()),
            },
            (SeqSpec::LlSc { .. }, SpecState::Linked { value, links }) => match op {
                "read" => {
                    arg(op, args, 0)?;
                    Ok((state.clone(), value.clone()))
                }
                "write" => {
                    let a = arg(op, args, 1)?;
                    Ok((
                        SpecState::Linked {
                            value: a[0].clone(),
                            links: BTreeSet::new(),
                        },
                        Value::Unit,
                    ))
                }
                "LL" => {
                    arg(op, args, 0)?;
                    let mut links = links.clone();
                    links.insert(process);
                    Ok((
                        SpecState::Linked {
                            value: value.clone(),
                            links,
                        },
                        value.clone(),
                    ))
                }
                "SC" => {
                    let a = arg(op, args, 1)?;
                    if links.contains(&process) {
                        Ok((
                            SpecState::Linked {
                                value: a[0].clone(),
                                links: BTreeSet::new(),
                            },
                            Value::Bool(true),
                        ))
                    } else {
                        Ok((state.clone(), Value::Bool(false)))
                    }
                }
                _ => Err(unknown()),
            },
            (SeqSpec::Rmw { .. }, SpecState::Cell(v)) => match op {
                "read" => {
                    arg(op, args, 0)?;
                    Ok((state.clone(), v.clone()))
                }
                "write" => {
                    let a = arg(op, args, 1)?;
                    Ok((SpecState::Cell(a[0].clone()), Value::Unit))
                }
                "fetch&inc" => {
                    arg(op, args, 0)?;
                    let cur = int_arg(op, v)?;
                    Ok((SpecState::Cell(Value::Int(cur + 1)), v.clone()))
                }
                "fetch&set" => {
                    let a = arg(op, args, 1)?;
                    Ok((SpecState::Cell(a[0].clone()), v.clone()))
                }
                _ => Err(unknown()),
            },
            (SeqSpec::TestAndSet, SpecState::Cell(v)) => match op {
                "test&set" => {
                    arg(op, args, 0)?;
                    Ok((SpecState::Cell(Value::Int(1)), v.clone()))
                }
                "read" => {
                    arg(op, args, 0)?;
                    Ok((state.clone(), v.clone()))
                }
                _ => Err(unknown()),
            },
            (SeqSpec::Coin { .. }, _) => match op {
                "flip" => Err(SpecError::Nondeterministic),
                _ => Err(unknown()),
            },
            _ => Err(SpecError::BadArgs {
                op: op.to_string(),
                detail: format!("state {state:?} does not belong to {}", self.type_name()),
            }),
        }
    }

    /// Response check for coin flips, which have no deterministic transition.
    pub fn admits_flip(&self, response: &Value) -> bool {
        match self {
            SeqSpec::Coin { omega } => omega.contains(response),
            _ => false,
        }
    }
}

impl SpecState {
    /// Encodes the state as a single register payload.
    pub fn to_value(&self) -> Value {
        match self {
            SpecState::Cell(v) => v.clone(),
            SpecState::Vector(xs) | SpecState::Fifo(xs) => Value::Tuple(xs.clone()),
            SpecState::Linked { value, links } => Value::Tuple(vec![
                value.clone(),
                Value::Tuple(links.iter().map(|p| Value::Int(p.0 as i64)).collect()),
            ]),
            SpecState::Stateless => Value::Unit,
        }
    }

    /// Inverse of [`SpecState::to_value`] for states of `spec`.
    pub fn from_value(spec: &SeqSpec, v: &Value) -> Option<SpecState> {
        Some(match spec {
            SeqSpec::Register { .. }
            | SeqSpec::BoundedRegister { .. }
            | SeqSpec::StrongCounter { .. }
            | SeqSpec::Cas { .. }
            | SeqSpec::Rmw { .. }
            | SeqSpec::TestAndSet => SpecState::Cell(v.clone()),
            SeqSpec::Snapshot { .. } => SpecState::Vector(v.as_tuple()?.to_vec()),
            SeqSpec::Queue => SpecState::Fifo(v.as_tuple()?.to_vec()),
            SeqSpec::LlSc { .. } => {
                let parts = v.as_tuple()?;
                let [value, links] = parts else { return None };
                let links = links
                    .as_tuple()?
                    .iter()
                    .map(|p| p.as_int().map(|i| ProcessId(i as u32)))
                    .collect::<Option<BTreeSet<_>>>()?;
                SpecState::Linked {
                    value: value.clone(),
                    links,
                }
            }
            SeqSpec::Coin { .. } => SpecState::Stateless,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: ProcessId = ProcessId(0);
    const Q: ProcessId = ProcessId(1);

    fn run(spec: &SeqSpec, ops: &[(ProcessId, &str, Vec<Value>)]) -> Vec<Value> {
        let mut s = spec.initial_state();
        let mut out = Vec::new();
        for (p, op, args) in ops {
            let (n, r) = spec.apply(&s, *p, op, args).unwrap();
            s = n;
            out.push(r);
        }
        out
    }

    #[test]
    fn counter_returns_prior_value() {
        let spec = SeqSpec::StrongCounter { initial: 0 };
        let out = run(
            &spec,
            &[
                (P, "fetch&inc", vec![]),
                (P, "fetch&inc", vec![]),
                (P, "fetch&dec", vec![]),
                (P, "fetch&inc", vec![]),
            ],
        );
        assert_eq!(out, vec![0.into(), 1.into(), 2.into(), 1.into()]);
    }

    #[test]
    fn sc_fails_after_intervening_sc() {
        let spec = SeqSpec::LlSc { initial: 0.into() };
        let out = run(
            &spec,
            &[
                (P, "LL", vec![]),
                (Q, "LL", vec![]),
                (Q, "SC", vec![1.into()]),
                (P, "SC", vec![1.into()]),
            ],
        );
        assert_eq!(out[2], Value::Bool(true));
        assert_eq!(out[3], Value::Bool(false));
    }

    #[test]
    fn sc_without_ll_fails() {
        let spec = SeqSpec::LlSc { initial: 0.into() };
        let out = run(&spec, &[(P, "SC", vec![1.into()])]);
        assert_eq!(out[0], Value::Bool(false));
    }

    #[test]
    fn queue_empty_marker() {
        let out = run(
            &SeqSpec::Queue,
            &[
                (P, "dequeue", vec![]),
                (P, "enqueue", vec![4.into()]),
                (P, "dequeue", vec![]),
            ],
        );
        assert_eq!(out, vec![Value::Empty, Value::Unit, 4.into()]);
    }

    #[test]
    fn bounded_register_domain() {
        let spec = SeqSpec::BoundedRegister {
            bound: 2,
            initial: 1,
        };
        let err = spec.apply(&spec.initial_state(), P, "write", &[3.into()]);
        assert!(matches!(err, Err(SpecError::BadArgs { .. })));
    }

    #[test]
    fn state_value_round_trip() {
        let spec = SeqSpec::LlSc { initial: 7.into() };
        let (s, _) = spec.apply(&spec.initial_state(), Q, "LL", &[]).unwrap();
        assert_eq!(SpecState::from_value(&spec, &s.to_value()), Some(s));
    }
}
