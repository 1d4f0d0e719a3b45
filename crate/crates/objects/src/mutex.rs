//! Any sequential type behind a lock.
//!
//! The lock is an LL/SC register (0 = free). A method acquires it with
//! `LL`/`SC(pid + 1)`, reads the encoded state from a single register, applies
//! the sequential transition, writes the new state and releases the lock.

use slin_history::{ProcessId, SeqSpec, SpecError, SpecState, Value};

use crate::{BaseCall, BaseDecl, Implementation, MethodBody, MethodCall, MethodStep, ObjectError};

const LOCK: usize = 0;
const STATE: usize = 1;

#[derive(Clone, Debug)]
pub struct MutexWrapped {
    spec: SeqSpec,
}

pub fn mutex_wrapped(spec: SeqSpec) -> MutexWrapped {
    MutexWrapped { spec }
}

#[derive(Clone, Debug)]
enum Phase {
    Ll,
    Sc,
    ReadState,
    WriteState(Value),
    Release(Value),
}

#[derive(Clone, Debug)]
struct Body {
    spec: SeqSpec,
    process: ProcessId,
    op: String,
    args: Vec<Value>,
    phase: Option<Phase>,
}

impl MethodBody for Body {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        let next = match (self.phase.take(), last) {
            (None, _) => Phase::Ll,
            (Some(Phase::Ll), Some(Value::Int(0))) => Phase::Sc,
            (Some(Phase::Ll), _) => Phase::Ll,
            (Some(Phase::Sc), Some(Value::Bool(true))) => Phase::ReadState,
            (Some(Phase::Sc), _) => Phase::Ll,
            (Some(Phase::ReadState), v) => {
                let v = v.unwrap_or(Value::Unit);
                let state = SpecState::from_value(&self.spec, &v)
                    .unwrap_or_else(|| self.spec.initial_state());
                match self.spec.apply(&state, self.process, &self.op, &self.args) {
                    Ok((next, ret)) => {
                        self.phase = Some(Phase::WriteState(ret));
                        return MethodStep::Call(BaseCall::fixed(
                            STATE,
                            "write",
                            vec![next.to_value()],
                        ));
                    }
                    // arguments were checked in `begin`; leave the state untouched
                    Err(_) => Phase::Release(Value::Empty),
                }
            }
            (Some(Phase::WriteState(ret)), _) => Phase::Release(ret),
            (Some(Phase::Release(ret)), _) => return MethodStep::ret(ret),
        };
        let call = match &next {
            Phase::Ll => BaseCall::fixed(LOCK, "LL", vec![]),
            Phase::Sc => BaseCall::fixed(LOCK, "SC", vec![Value::Int(self.process.0 as i64 + 1)]),
            Phase::ReadState => BaseCall::fixed(STATE, "read", vec![]),
            Phase::Release(_) => BaseCall::fixed(LOCK, "write", vec![Value::Int(0)]),
            Phase::WriteState(_) => unreachable!(),
        };
        self.phase = Some(next);
        MethodStep::Call(call)
    }
}

impl Implementation for MutexWrapped {
    fn name(&self) -> &str {
        "mutex-wrapped"
    }

    fn spec(&self) -> SeqSpec {
        self.spec.clone()
    }

    fn base_objects(&self) -> Vec<BaseDecl> {
        vec![
            BaseDecl::new("lock", SeqSpec::LlSc { initial: 0.into() }),
            BaseDecl::new(
                "state",
                SeqSpec::Register {
                    initial: self.spec.initial_state().to_value(),
                },
            ),
        ]
    }

    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError> {
        match self
            .spec
            .apply(&self.spec.initial_state(), call.process, call.op, call.args)
        {
            Err(SpecError::UnknownOp { type_name, op }) => {
                return Err(ObjectError::UnknownOp { type_name, op })
            }
            Err(e @ SpecError::BadArgs { .. }) => return Err(ObjectError::BadArgs(e.to_string())),
            Err(SpecError::Nondeterministic) => {
                return Err(ObjectError::BadArgs("cannot wrap a coin".into()))
            }
            Ok(_) => {}
        }
        Ok(Box::new(Body {
            spec: self.spec.clone(),
            process: call.process,
            op: call.op.to_string(),
            args: call.args.to_vec(),
            phase: None,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SoloRunner;

    #[test]
    fn wrapped_counter_matches_spec() {
        let mut r = SoloRunner::new(mutex_wrapped(SeqSpec::StrongCounter { initial: 0 }));
        let p = ProcessId(0);
        assert_eq!(r.call(p, "fetch&inc", &[]).unwrap(), 0.into());
        assert_eq!(r.call(p, "fetch&inc", &[]).unwrap(), 1.into());
        assert_eq!(r.call(p, "fetch&dec", &[]).unwrap(), 2.into());
        assert_eq!(r.trace.len(), 15);
    }

    #[test]
    fn wrapped_queue_matches_spec() {
        let mut r = SoloRunner::new(mutex_wrapped(SeqSpec::Queue));
        let p = ProcessId(1);
        r.call(p, "enqueue", &[3.into()]).unwrap();
        r.call(p, "enqueue", &[4.into()]).unwrap();
        assert_eq!(r.call(p, "dequeue", &[]).unwrap(), 3.into());
    }

    #[test]
    fn unknown_op_rejected() {
        let mut r = SoloRunner::new(mutex_wrapped(SeqSpec::Queue));
        assert!(matches!(
            r.call(ProcessId(0), "push", &[]),
            Err(ObjectError::UnknownOp { .. })
        ));
    }
}
