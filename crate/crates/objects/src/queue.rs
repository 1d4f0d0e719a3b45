//! Herlihy–Wing queue: `tail` counter plus an unbounded array of swap cells.

use slin_history::{SeqSpec, Value};

use crate::{
    expect_args, unknown_op, ArrayDecl, BaseCall, BaseDecl, Implementation, MethodBody, MethodCall,
    MethodStep, ObjectError,
};

const TAIL: usize = 0;
const ITEMS: usize = 0;

#[derive(Clone, Debug, Default)]
pub struct HerlihyWingQueue;

pub fn herlihy_wing_queue() -> HerlihyWingQueue {
    HerlihyWingQueue
}

#[derive(Clone, Debug)]
struct EnqBody {
    value: Value,
    pos: Option<u64>,
    done: bool,
}

impl MethodBody for EnqBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        if self.done {
            return MethodStep::ret(Value::Unit);
        }
        match (self.pos, last) {
            (None, None) => MethodStep::Call(BaseCall::fixed(TAIL, "fetch&inc", vec![])),
            (None, Some(v)) => {
                let pos = v.as_int().unwrap_or(0) as u64;
                self.pos = Some(pos);
                self.done = true;
                MethodStep::Call(BaseCall::element(
                    ITEMS,
                    pos,
                    "write",
                    vec![self.value.clone()],
                ))
            }
            (Some(_), _) => MethodStep::ret(Value::Unit),
        }
    }
}

#[derive(Clone, Debug)]
enum DeqPhase {
    ReadTail,
    Swap { i: u64, max: u64 },
}

#[derive(Clone, Debug)]
struct DeqBody {
    phase: Option<DeqPhase>,
}

impl MethodBody for DeqBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        let next = match (self.phase.take(), last) {
            (None, _) => DeqPhase::ReadTail,
            (Some(DeqPhase::ReadTail), v) => {
                let max = v.and_then(|v| v.as_int()).unwrap_or(0).max(0) as u64;
                if max == 0 {
                    DeqPhase::ReadTail
                } else {
                    DeqPhase::Swap { i: 0, max }
                }
            }
            (Some(DeqPhase::Swap { i, max }), v) => {
                let v = v.unwrap_or(Value::Empty);
                if v != Value::Empty {
                    return MethodStep::ret(v);
                }
                if i + 1 < max {
                    DeqPhase::Swap { i: i + 1, max }
                } else {
                    DeqPhase::ReadTail
                }
            }
        };
        let call = match &next {
            DeqPhase::ReadTail => BaseCall::fixed(TAIL, "read", vec![]),
            DeqPhase::Swap { i, .. } => {
                BaseCall::element(ITEMS, *i, "fetch&set", vec![Value::Empty])
            }
        };
        self.phase = Some(next);
        MethodStep::Call(call)
    }
}

impl Implementation for HerlihyWingQueue {
    fn name(&self) -> &str {
        "hw-queue"
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Queue
    }

    fn base_objects(&self) -> Vec<BaseDecl> {
        vec![BaseDecl::new("tail", SeqSpec::Rmw { initial: 0.into() })]
    }

    fn arrays(&self) -> Vec<ArrayDecl> {
        vec![ArrayDecl {
            name: "item".into(),
            element: SeqSpec::Rmw {
                initial: Value::Empty,
            },
            head: None,
        }]
    }

    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError> {
        match call.op {
            "enqueue" => {
                expect_args(call.op, call.args, 1)?;
                if call.args[0] == Value::Empty {
                    return Err(ObjectError::BadArgs(
                        "the empty marker cannot be enqueued".into(),
                    ));
                }
                Ok(Box::new(EnqBody {
                    value: call.args[0].clone(),
                    pos: None,
                    done: false,
                }))
            }
            "dequeue" => {
                expect_args(call.op, call.args, 0)?;
                Ok(Box::new(DeqBody { phase: None }))
            }
            op => Err(unknown_op("queue", op)),
        }
    }
}
