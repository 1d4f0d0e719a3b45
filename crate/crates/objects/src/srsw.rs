//! Multivalued single-reader single-writer register from binary registers.
//!
//! Value `v` is represented by `A[v] = 1` and `A[0..v] = 0`. A write sets
//! `A[v]` and then clears the cells below it from the top down; a read scans
//! up to the first set cell and then back down, keeping the lowest set cell.

use slin_history::{SeqSpec, Value};

use crate::{
    expect_args, unknown_op, BaseCall, BaseDecl, Implementation, MethodBody, MethodCall,
    MethodStep, ObjectError,
};

#[derive(Clone, Debug)]
pub struct VidyasankarRegister {
    bound: i64,
    initial: i64,
}

pub fn vidyasankar_register(bound: i64, initial: i64) -> VidyasankarRegister {
    assert!(
        (0..=bound).contains(&initial),
        "initial value {initial} outside 0..={bound}"
    );
    VidyasankarRegister { bound, initial }
}

#[derive(Clone, Debug)]
struct WriteBody {
    v: i64,
    // next cell to clear; starts at v itself meaning "set A[v] first"
    next: Option<i64>,
}

impl MethodBody for WriteBody {
    fn resume(&mut self, _last: Option<Value>) -> MethodStep {
        match self.next {
            None => {
                self.next = Some(self.v - 1);
                MethodStep::Call(BaseCall::fixed(self.v as usize, "write", vec![1.into()]))
            }
            Some(i) if i >= 0 => {
                self.next = Some(i - 1);
                MethodStep::Call(BaseCall::fixed(i as usize, "write", vec![0.into()]))
            }
            Some(_) => MethodStep::ret(Value::Unit),
        }
    }
}

#[derive(Clone, Debug)]
enum ReadPhase {
    Up(i64),
    Down { val: i64, i: i64 },
}

#[derive(Clone, Debug)]
struct ReadBody {
    bound: i64,
    phase: ReadPhase,
    started: bool,
}

impl MethodBody for ReadBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        let bit = last.as_ref().and_then(Value::as_int);
        if self.started {
            match &mut self.phase {
                ReadPhase::Up(i) => {
                    if bit == Some(1) || *i >= self.bound {
                        let val = *i;
                        self.phase = ReadPhase::Down { val, i: val - 1 };
                    } else {
                        *i += 1;
                    }
                }
                ReadPhase::Down { val, i } => {
                    if bit == Some(1) {
                        *val = *i;
                    }
                    *i -= 1;
                }
            }
        }
        self.started = true;
        match self.phase {
            ReadPhase::Up(i) => MethodStep::Call(BaseCall::fixed(i as usize, "read", vec![])),
            ReadPhase::Down { val, i } if i < 0 => MethodStep::ret(Value::Int(val)),
            ReadPhase::Down { i, .. } => {
                MethodStep::Call(BaseCall::fixed(i as usize, "read", vec![]))
            }
        }
    }
}

impl Implementation for VidyasankarRegister {
    fn name(&self) -> &str {
        "vidyasankar-register"
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::BoundedRegister {
            bound: self.bound,
            initial: self.initial,
        }
    }

    fn base_objects(&self) -> Vec<BaseDecl> {
        (0..=self.bound)
            .map(|i| {
                BaseDecl::new(
                    format!("A[{i}]"),
                    SeqSpec::BoundedRegister {
                        bound: 1,
                        initial: (i == self.initial) as i64,
                    },
                )
            })
            .collect()
    }

    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError> {
        match call.op {
            "write" => {
                expect_args(call.op, call.args, 1)?;
                let v = call.args[0]
                    .as_int()
                    .filter(|v| (0..=self.bound).contains(v))
                    .ok_or_else(|| {
                        ObjectError::BadArgs(format!(
                            "write({}) outside 0..={}",
                            call.args[0], self.bound
                        ))
                    })?;
                Ok(Box::new(WriteBody { v, next: None }))
            }
            "read" => {
                expect_args(call.op, call.args, 0)?;
                Ok(Box::new(ReadBody {
                    bound: self.bound,
                    phase: ReadPhase::Up(0),
                    started: false,
                }))
            }
            op => Err(unknown_op("register", op)),
        }
    }
}
