//! Wait-free snapshot from single-writer registers with embedded scans.
//!
//! `A[r]` holds `(value, seq, view)`. A scan collects until two successive
//! collects agree, or until some component has changed in two different
//! comparisons, in which case that writer's embedded view is returned.
//! An update runs a scan and then writes `(v, seq + 1, scan)` to its cell.

use slin_history::{SeqSpec, Value};

use crate::{
    expect_args, unknown_op, BaseCall, BaseDecl, Implementation, MethodBody, MethodCall,
    MethodStep, ObjectError,
};

#[derive(Clone, Debug)]
pub struct AadgmsSnapshot {
    n: usize,
    initial: Vec<Value>,
}

pub fn aadgms_snapshot(n: usize) -> AadgmsSnapshot {
    assert!(n >= 1, "snapshot needs at least one component");
    AadgmsSnapshot {
        n,
        initial: vec![Value::Int(0); n],
    }
}

impl AadgmsSnapshot {
    pub fn with_initial(initial: Vec<Value>) -> Self {
        assert!(!initial.is_empty());
        AadgmsSnapshot {
            n: initial.len(),
            initial,
        }
    }

    fn cell(value: Value, seq: i64, view: Vec<Value>) -> Value {
        Value::Tuple(vec![value, Value::Int(seq), Value::Tuple(view)])
    }
}

#[derive(Clone, Debug)]
struct Entry {
    value: Value,
    seq: i64,
    view: Vec<Value>,
}

fn decode(v: &Value) -> Entry {
    let parts = v.as_tuple().unwrap_or(&[]);
    Entry {
        value: parts.first().cloned().unwrap_or(Value::Unit),
        seq: parts.get(1).and_then(Value::as_int).unwrap_or(0),
        view: parts
            .get(2)
            .and_then(Value::as_tuple)
            .map(<[Value]>::to_vec)
            .unwrap_or_default(),
    }
}

#[derive(Clone, Debug)]
struct Scanner {
    n: usize,
    prev: Option<Vec<Entry>>,
    cur: Vec<Entry>,
    moved: Vec<bool>,
}

enum ScanStep {
    Read(usize),
    Done(Vec<Value>),
}

impl Scanner {
    fn new(n: usize) -> Self {
        Scanner {
            n,
            prev: None,
            cur: Vec::with_capacity(n),
            moved: vec![false; n],
        }
    }

    fn step(&mut self, last: Option<Value>) -> ScanStep {
        if let Some(v) = last {
            self.cur.push(decode(&v));
        }
        if self.cur.len() < self.n {
            return ScanStep::Read(self.cur.len());
        }
        let cur = std::mem::replace(&mut self.cur, Vec::with_capacity(self.n));
        if let Some(prev) = self.prev.take() {
            if prev.iter().zip(&cur).all(|(a, b)| a.seq == b.seq) {
                return ScanStep::Done(cur.into_iter().map(|e| e.value).collect());
            }
            for j in 0..self.n {
                if prev[j].seq != cur[j].seq {
                    if self.moved[j] {
                        return ScanStep::Done(cur[j].view.clone());
                    }
                    self.moved[j] = true;
                }
            }
        }
        self.prev = Some(cur);
        ScanStep::Read(0)
    }
}

#[derive(Clone, Debug)]
struct ScanBody(Scanner);

impl MethodBody for ScanBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        match self.0.step(last) {
            ScanStep::Read(i) => MethodStep::Call(BaseCall::fixed(i, "read", vec![])),
            ScanStep::Done(view) => MethodStep::ret(Value::Tuple(view)),
        }
    }
}

#[derive(Clone, Debug)]
struct UpdateBody {
    me: usize,
    value: Value,
    seq: i64,
    scan: Scanner,
    written: bool,
}

impl MethodBody for UpdateBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        if self.written {
            return MethodStep::Return {
                value: Value::Unit,
                local: Some(Value::Int(self.seq)),
            };
        }
        match self.scan.step(last) {
            ScanStep::Read(i) => MethodStep::Call(BaseCall::fixed(i, "read", vec![])),
            ScanStep::Done(view) => {
                self.written = true;
                let cell = AadgmsSnapshot::cell(self.value.clone(), self.seq, view);
                MethodStep::Call(BaseCall::fixed(self.me, "write", vec![cell]))
            }
        }
    }
}

impl Implementation for AadgmsSnapshot {
    fn name(&self) -> &str {
        "aadgms-snapshot"
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Snapshot {
            initial: self.initial.clone(),
        }
    }

    fn base_objects(&self) -> Vec<BaseDecl> {
        (0..self.n)
            .map(|i| {
                let init = Self::cell(self.initial[i].clone(), 0, self.initial.clone());
                BaseDecl::new(format!("A[{i}]"), SeqSpec::Register { initial: init })
            })
            .collect()
    }

    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError> {
        match call.op {
            "scan" => {
                expect_args(call.op, call.args, 0)?;
                Ok(Box::new(ScanBody(Scanner::new(self.n))))
            }
            "update" => {
                expect_args(call.op, call.args, 1)?;
                let me = call.process.index();
                if me >= self.n {
                    return Err(ObjectError::Role(format!(
                        "{} owns no snapshot component",
                        call.process
                    )));
                }
                Ok(Box::new(UpdateBody {
                    me,
                    value: call.args[0].clone(),
                    seq: call.local.as_int().unwrap_or(0) + 1,
                    scan: Scanner::new(self.n),
                    written: false,
                }))
            }
            op => Err(unknown_op("snapshot", op)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SoloRunner;
    use slin_history::ProcessId;

    #[test]
    fn solo_scan_returns_initial_vector_after_two_collects() {
        let mut r = SoloRunner::new(aadgms_snapshot(3));
        let v = r.call(ProcessId(0), "scan", &[]).unwrap();
        assert_eq!(v, Value::ints(&[0, 0, 0]));
        assert_eq!(r.trace.len(), 6);
    }

    #[test]
    fn update_then_scan() {
        let mut r = SoloRunner::new(aadgms_snapshot(2));
        r.call(ProcessId(1), "update", &[5.into()]).unwrap();
        r.call(ProcessId(1), "update", &[6.into()]).unwrap();
        assert_eq!(
            r.call(ProcessId(0), "scan", &[]).unwrap(),
            Value::ints(&[0, 6])
        );
    }

    #[test]
    fn update_by_foreign_process_is_rejected() {
        let mut r = SoloRunner::new(aadgms_snapshot(2));
        assert!(matches!(
            r.call(ProcessId(2), "update", &[1.into()]),
            Err(ObjectError::Role(_))
        ));
    }
}
