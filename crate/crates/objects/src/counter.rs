//! Lock-free strong counters over an LL/SC register.
//!
//! [`llsc_strong_counter`]: each op is a `LL; SC(v ± 1)` retry loop, so its
//! first shared access is a load-linked.
//! [`writefirst_strong_counter`]: each op first writes its id to an announce
//! cell picked from a pool shared by all processes, then runs the same loop.

use slin_history::{SeqSpec, Value};

use crate::{
    expect_args, unknown_op, BaseCall, BaseDecl, Implementation, MethodBody, MethodCall,
    MethodStep, ObjectError,
};

const COUNTER: usize = 0;

#[derive(Clone, Debug)]
enum Phase {
    Start,
    Announce(usize, Value),
    AwaitLl,
    AwaitSc(i64),
}

#[derive(Clone, Debug)]
struct RetryBody {
    delta: i64,
    phase: Phase,
}

impl MethodBody for RetryBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        let phase = std::mem::replace(&mut self.phase, Phase::AwaitLl);
        match phase {
            Phase::Announce(cell, id) => {
                self.phase = Phase::Start;
                MethodStep::Call(BaseCall::fixed(cell, "write", vec![id]))
            }
            Phase::AwaitLl => {
                let v = last.and_then(|v| v.as_int()).unwrap_or(0);
                self.phase = Phase::AwaitSc(v);
                MethodStep::Call(BaseCall::fixed(
                    COUNTER,
                    "SC",
                    vec![Value::Int(v + self.delta)],
                ))
            }
            Phase::AwaitSc(v) if last == Some(Value::Bool(true)) => MethodStep::ret(Value::Int(v)),
            Phase::Start | Phase::AwaitSc(_) => {
                MethodStep::Call(BaseCall::fixed(COUNTER, "LL", vec![]))
            }
        }
    }
}

#[derive(Clone, Debug)]
struct ReadBody(bool);

impl MethodBody for ReadBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        match last {
            Some(v) if self.0 => MethodStep::ret(v),
            _ => {
                self.0 = true;
                MethodStep::Call(BaseCall::fixed(COUNTER, "read", vec![]))
            }
        }
    }
}

fn delta_of(op: &str) -> Option<i64> {
    match op {
        "fetch&inc" => Some(1),
        "fetch&dec" => Some(-1),
        _ => None,
    }
}

#[derive(Clone, Debug, Default)]
pub struct LlscCounter;

pub fn llsc_strong_counter() -> LlscCounter {
    LlscCounter
}

impl Implementation for LlscCounter {
    fn name(&self) -> &str {
        "llsc-counter"
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::StrongCounter { initial: 0 }
    }

    fn base_objects(&self) -> Vec<BaseDecl> {
        vec![BaseDecl::new("R", SeqSpec::LlSc { initial: 0.into() })]
    }

    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError> {
        expect_args(call.op, call.args, 0)?;
        if call.op == "read" {
            return Ok(Box::new(ReadBody(false)));
        }
        let delta = delta_of(call.op).ok_or_else(|| unknown_op("strong-counter", call.op))?;
        Ok(Box::new(RetryBody {
            delta,
            phase: Phase::Start,
        }))
    }
}

#[derive(Clone, Debug)]
pub struct WriteFirstCounter {
    pool: usize,
}

/// The announce pool has `⌊√n⌋` cells (at least one); process `p` uses cell `p mod pool`.
pub fn writefirst_strong_counter(n: usize) -> WriteFirstCounter {
    let mut root = 0;
    while (root + 1) * (root + 1) <= n {
        root += 1;
    }
    WriteFirstCounter { pool: root.max(1) }
}

impl WriteFirstCounter {
    pub fn pool_size(&self) -> usize {
        self.pool
    }
}

impl Implementation for WriteFirstCounter {
    fn name(&self) -> &str {
        "writefirst-counter"
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::StrongCounter { initial: 0 }
    }

    fn base_objects(&self) -> Vec<BaseDecl> {
        let mut out = vec![BaseDecl::new("R", SeqSpec::LlSc { initial: 0.into() })];
        out.extend((0..self.pool).map(|i| {
            BaseDecl::new(
                format!("announce[{i}]"),
                SeqSpec::Register {
                    initial: Value::Unit,
                },
            )
        }));
        out
    }

    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError> {
        expect_args(call.op, call.args, 0)?;
        if call.op == "read" {
            return Ok(Box::new(ReadBody(false)));
        }
        let delta = delta_of(call.op).ok_or_else(|| unknown_op("strong-counter", call.op))?;
        let cell = 1 + call.process.index() % self.pool;
        Ok(Box::new(RetryBody {
            delta,
            phase: Phase::Announce(cell, Value::Int(call.process.0 as i64)),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SoloRunner;
    use slin_history::ProcessId;

    #[test]
    fn sequential_fetch_and_inc() {
        let mut r = SoloRunner::new(llsc_strong_counter());
        assert_eq!(r.call(ProcessId(0), "fetch&inc", &[]).unwrap(), 0.into());
        assert_eq!(r.call(ProcessId(1), "fetch&inc", &[]).unwrap(), 1.into());
        assert_eq!(r.trace[0].2, "LL");
    }

    #[test]
    fn writefirst_starts_with_a_write() {
        let mut r = SoloRunner::new(writefirst_strong_counter(16));
        assert_eq!(r.call(ProcessId(5), "fetch&inc", &[]).unwrap(), 0.into());
        assert_eq!(r.trace[0].2, "write");
        assert_eq!(r.trace.len(), 3);
        assert_eq!(r.call(ProcessId(5), "fetch&dec", &[]).unwrap(), 1.into());
        assert_eq!(r.call(ProcessId(5), "read", &[]).unwrap(), 0.into());
    }

    #[test]
    fn pool_size_is_integer_square_root() {
        assert_eq!(writefirst_strong_counter(1).pool_size(), 1);
        assert_eq!(writefirst_strong_counter(16).pool_size(), 4);
        assert_eq!(writefirst_strong_counter(63).pool_size(), 7);
    }
}
