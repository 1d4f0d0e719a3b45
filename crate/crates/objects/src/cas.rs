//! Compare-and-swap from registers, one block per installed state.
//!
//! `Cur` names the current block `b`; `Val[b]` holds its state. A CAS whose
//! expected value matches competes in block `b`'s election (an atomic
//! test-and-set). The winner installs block `b + 1`, moves `Cur`, and writes
//! `Signal[b]`; losers spin on `Signal[b]` and return what it carries.

use slin_history::{SeqSpec, Value};

use crate::{
    expect_args, unknown_op, ArrayDecl, BaseCall, BaseDecl, Implementation, MethodBody, MethodCall,
    MethodStep, ObjectError,
};

const CUR: usize = 0;
const VAL: usize = 0;
const ELECT: usize = 1;
const SIGNAL: usize = 2;

#[derive(Clone, Debug)]
pub struct CasFromRegisters {
    initial: Value,
}

pub fn cas_from_registers(initial: Value) -> CasFromRegisters {
    CasFromRegisters { initial }
}

#[derive(Clone, Debug)]
enum CasPhase {
    ReadCur,
    ReadVal,
    Elect(u64),
    WriteVal(u64),
    WriteCur(u64),
    Signal(u64),
    Done,
    Wait(u64),
}

#[derive(Clone, Debug)]
struct CasBody {
    expected: Value,
    new: Value,
    phase: Option<CasPhase>,
    block: u64,
}

impl MethodBody for CasBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        use CasPhase::*;
        let next = match (self.phase.take(), last) {
            (None, _) => ReadCur,
            (Some(ReadCur), v) => {
                self.block = v.and_then(|v| v.as_int()).unwrap_or(0) as u64;
                ReadVal
            }
            (Some(ReadVal), v) => {
                let v = v.unwrap_or(Value::Unit);
                if v != self.expected {
                    return MethodStep::ret(v);
                }
                Elect(self.block)
            }
            (Some(Elect(b)), v) => {
                if v == Some(Value::Int(0)) {
                    WriteVal(b + 1)
                } else {
                    Wait(b)
                }
            }
            (Some(WriteVal(b)), _) => WriteCur(b),
            (Some(WriteCur(b)), _) => Signal(b - 1),
            (Some(Signal(_)), _) => Done,
            (Some(Wait(b)), v) => match v {
                Some(s) if s != Value::Empty => return MethodStep::ret(s),
                _ => Wait(b),
            },
            (Some(Done), _) => Done,
        };
        let call = match &next {
            ReadCur => BaseCall::fixed(CUR, "read", vec![]),
            ReadVal => BaseCall::element(VAL, self.block, "read", vec![]),
            Elect(b) => BaseCall::element(ELECT, *b, "test&set", vec![]),
            WriteVal(b) => BaseCall::element(VAL, *b, "write", vec![self.new.clone()]),
            WriteCur(b) => BaseCall::fixed(CUR, "write", vec![Value::Int(*b as i64)]),
            Signal(b) => BaseCall::element(SIGNAL, *b, "write", vec![self.new.clone()]),
            Wait(b) => BaseCall::element(SIGNAL, *b, "read", vec![]),
            Done => return MethodStep::ret(self.expected.clone()),
        };
        self.phase = Some(next);
        MethodStep::Call(call)
    }
}

#[derive(Clone, Debug)]
struct ReadBody {
    block: Option<u64>,
    started: bool,
}

impl MethodBody for ReadBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        if !self.started {
            self.started = true;
            return MethodStep::Call(BaseCall::fixed(CUR, "read", vec![]));
        }
        match self.block {
            None => {
                let b = last.and_then(|v| v.as_int()).unwrap_or(0) as u64;
                self.block = Some(b);
                MethodStep::Call(BaseCall::element(VAL, b, "read", vec![]))
            }
            Some(_) => MethodStep::ret(last.unwrap_or(Value::Unit)),
        }
    }
}

impl Implementation for CasFromRegisters {
    fn name(&self) -> &str {
        "cas-from-registers"
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Cas {
            initial: self.initial.clone(),
        }
    }

    fn base_objects(&self) -> Vec<BaseDecl> {
        vec![BaseDecl::new(
            "Cur",
            SeqSpec::Register { initial: 0.into() },
        )]
    }

    fn arrays(&self) -> Vec<ArrayDecl> {
        vec![
            ArrayDecl {
                name: "Val".into(),
                element: SeqSpec::Register {
                    initial: Value::Unit,
                },
                head: Some(SeqSpec::Register {
                    initial: self.initial.clone(),
                }),
            },
            ArrayDecl {
                name: "Elect".into(),
                element: SeqSpec::TestAndSet,
                head: None,
            },
            ArrayDecl {
                name: "Signal".into(),
                element: SeqSpec::Register {
                    initial: Value::Empty,
                },
                head: None,
            },
        ]
    }

    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError> {
        match call.op {
            "CAS" => {
                expect_args(call.op, call.args, 2)?;
                if call.args[1] == Value::Empty {
                    return Err(ObjectError::BadArgs(
                        "the empty marker cannot be installed".into(),
                    ));
                }
                Ok(Box::new(CasBody {
                    expected: call.args[0].clone(),
                    new: call.args[1].clone(),
                    phase: None,
                    block: 0,
                }))
            }
            "read" => {
                expect_args(call.op, call.args, 0)?;
                Ok(Box::new(ReadBody {
                    block: None,
                    started: false,
                }))
            }
            op => Err(unknown_op("cas", op)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SoloRunner;
    use slin_history::ProcessId;

    #[test]
    fn solo_cas_then_read() {
        let mut r = SoloRunner::new(cas_from_registers(0.into()));
        let p = ProcessId(0);
        assert_eq!(r.call(p, "CAS", &[0.into(), 7.into()]).unwrap(), 0.into());
        assert_eq!(r.call(p, "read", &[]).unwrap(), 7.into());
        assert_eq!(r.call(p, "CAS", &[0.into(), 9.into()]).unwrap(), 7.into());
        assert_eq!(r.call(p, "CAS", &[7.into(), 9.into()]).unwrap(), 7.into());
        assert_eq!(r.call(p, "read", &[]).unwrap(), 9.into());
    }
}
