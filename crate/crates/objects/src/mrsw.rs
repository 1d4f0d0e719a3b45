//! Multi-reader single-writer register from single-reader single-writer
//! registers with unbounded sequence numbers.
//!
//! Cells: `R[w→ri]` for each reader and `R[ri→rj]` for each reader pair, all
//! holding `(value, seq)`. A read takes the freshest of the writer's cell and
//! the other readers' reports, republishes it to every reader and returns it.

use slin_history::{ProcessId, SeqSpec, Value};

use crate::{
    expect_args, unknown_op, BaseCall, BaseDecl, Implementation, MethodBody, MethodCall,
    MethodStep, ObjectError,
};

#[derive(Clone, Debug)]
pub struct VitanyiAwerbuchRegister {
    readers: usize,
    initial: Value,
    writer: ProcessId,
    reader_ids: Vec<ProcessId>,
}

/// Writer is process 0, readers are processes `1..=readers`.
pub fn vitanyi_awerbuch_mrsw(readers: usize, initial: Value) -> VitanyiAwerbuchRegister {
    assert!(readers >= 1);
    VitanyiAwerbuchRegister {
        readers,
        initial,
        writer: ProcessId(0),
        reader_ids: (1..=readers as u32).map(ProcessId).collect(),
    }
}

impl VitanyiAwerbuchRegister {
    pub fn with_roles(mut self, writer: ProcessId, readers: Vec<ProcessId>) -> Self {
        assert_eq!(readers.len(), self.readers);
        self.writer = writer;
        self.reader_ids = readers;
        self
    }

    fn writer_cell(&self, reader: usize) -> usize {
        reader
    }

    fn report_cell(&self, from: usize, to: usize) -> usize {
        self.readers + from * self.readers + to
    }
}

fn pair(v: &Value, seq: i64) -> Value {
    Value::Tuple(vec![v.clone(), Value::Int(seq)])
}

#[derive(Clone, Debug)]
struct WriteBody {
    cells: Vec<usize>,
    next: usize,
    value: Value,
    seq: i64,
}

impl MethodBody for WriteBody {
    fn resume(&mut self, _last: Option<Value>) -> MethodStep {
        match self.cells.get(self.next) {
            Some(&c) => {
                self.next += 1;
                MethodStep::Call(BaseCall::fixed(
                    c,
                    "write",
                    vec![pair(&self.value, self.seq)],
                ))
            }
            None => MethodStep::Return {
                value: Value::Unit,
                local: Some(Value::Int(self.seq)),
            },
        }
    }
}

#[derive(Clone, Debug)]
struct ReadBody {
    reads: Vec<usize>,
    writes: Vec<usize>,
    seen: Vec<(Value, i64)>,
    written: usize,
}

impl ReadBody {
    fn best(&self) -> (Value, i64) {
        let mut best = self.seen[0].clone();
        for s in &self.seen[1..] {
            if s.1 > best.1 {
                best = s.clone();
            }
        }
        best
    }
}

impl MethodBody for ReadBody {
    fn resume(&mut self, last: Option<Value>) -> MethodStep {
        if let Some(v) = last {
            if self.seen.len() < self.reads.len() {
                let parts = v.as_tuple().unwrap_or(&[]);
                let val = parts.first().cloned().unwrap_or(Value::Unit);
                let seq = parts.get(1).and_then(Value::as_int).unwrap_or(0);
                self.seen.push((val, seq));
            } else {
                self.written += 1;
            }
        }
        if self.seen.len() < self.reads.len() {
            return MethodStep::Call(BaseCall::fixed(self.reads[self.seen.len()], "read", vec![]));
        }
        let (v, s) = self.best();
        match self.writes.get(self.written) {
            Some(&c) => MethodStep::Call(BaseCall::fixed(c, "write", vec![pair(&v, s)])),
            None => MethodStep::ret(v),
        }
    }
}

impl Implementation for VitanyiAwerbuchRegister {
    fn name(&self) -> &str {
        "vitanyi-awerbuch-register"
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Register {
            initial: self.initial.clone(),
        }
    }

    fn base_objects(&self) -> Vec<BaseDecl> {
        let init = SeqSpec::Register {
            initial: pair(&self.initial, 1),
        };
        let mut out: Vec<BaseDecl> = (0..self.readers)
            .map(|i| BaseDecl::new(format!("R[w-r{}]", i + 1), init.clone()))
            .collect();
        for from in 0..self.readers {
            for to in 0..self.readers {
                out.push(BaseDecl::new(
                    format!("R[r{}-r{}]", from + 1, to + 1),
                    init.clone(),
                ));
            }
        }
        out
    }

    fn begin(&self, call: MethodCall<'_>) -> Result<Box<dyn MethodBody>, ObjectError> {
        match call.op {
            "write" => {
                expect_args(call.op, call.args, 1)?;
                if call.process != self.writer {
                    return Err(ObjectError::Role(format!(
                        "{} is not the writer",
                        call.process
                    )));
                }
                Ok(Box::new(WriteBody {
                    cells: (0..self.readers).map(|i| self.writer_cell(i)).collect(),
                    next: 0,
                    value: call.args[0].clone(),
                    seq: call.local.as_int().unwrap_or(1) + 1,
                }))
            }
            "read" => {
                expect_args(call.op, call.args, 0)?;
                let me = self
                    .reader_ids
                    .iter()
                    .position(|p| *p == call.process)
                    .ok_or_else(|| {
                        ObjectError::Role(format!("{} is not a reader", call.process))
                    })?;
                let mut reads = vec![self.writer_cell(me)];
                reads.extend((0..self.readers).map(|j| self.report_cell(j, me)));
                Ok(Box::new(ReadBody {
                    reads,
                    writes: (0..self.readers).map(|j| self.report_cell(me, j)).collect(),
                    seen: Vec::new(),
                    written: 0,
                }))
            }
            op => Err(unknown_op("register", op)),
        }
    }
}
