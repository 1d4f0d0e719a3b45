//! Linearizability of a single history by memoized depth-first search.

use std::collections::{BTreeMap, HashSet};

use slin_history::{History, ObjectId, SeqSpec, SpecState, Value};

use crate::table::{bit, OpTable};
use crate::CheckError;

struct Dfs<'t> {
    table: &'t OpTable,
    required: u128,
    dead: HashSet<(u128, Vec<SpecState>)>,
    seq: Vec<(usize, Value)>,
}

impl Dfs<'_> {
    fn go(&mut self, done: u128, states: Vec<SpecState>) -> bool {
        if done & self.required == self.required {
            return true;
        }
        if self.dead.contains(&(done, states.clone())) {
            return false;
        }
        for &i in &self.table.order {
            if !self.table.enabled(i, done) {
                continue;
            }
            let mut next = states.clone();
            let Some(r) = self.table.step(i, &mut next, None) else {
                continue;
            };
            self.seq.push((i, r));
            if self.go(done | bit(i), next) {
                return true;
            }
            self.seq.pop();
        }
        self.dead.insert((done, states));
        false
    }
}

pub(crate) fn search(table: &OpTable) -> Option<Vec<(usize, Value)>> {
    let mut dfs = Dfs {
        table,
        required: table.required(),
        dead: HashSet::new(),
        seq: Vec::new(),
    };
    dfs.go(0, table.initial_states()).then_some(dfs.seq)
}

/// A linearization of `Γ(h)`: a valid sequential history containing every
/// completed operation, possibly some pending ones, and ordered consistently
/// with happens-before. `None` when there is none.
pub fn linearize_one(
    h: &History,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<Option<History>, CheckError> {
    let h = h.interpret();
    let table = OpTable::new(&h, specs)?;
    Ok(search(&table).map(|seq| table.to_history(&h, &seq)))
}

/// A sequential history that linearizes both `Γ(a)` and `Γ(b)`. Operations
/// are matched by process and per-process position.
pub fn common_linearization(
    a: &History,
    b: &History,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<Option<History>, CheckError> {
    let (a, b) = (a.interpret(), b.interpret());
    let ta = OpTable::new(&a, specs)?;
    let tb = OpTable::new(&b, specs)?;
    let Some(table) = OpTable::merged(&ta, &tb) else {
        return Ok(None);
    };
    Ok(search(&table).map(|seq| table.to_history(&a, &seq)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use slin_history::{ObjectInfo, ProcessId, StepKind};

    fn reg() -> History {
        History::new(
            [ProcessId(0), ProcessId(1)],
            [ObjectInfo::base(
                ObjectId(0),
                "R",
                SeqSpec::Register { initial: 0.into() },
            )],
        )
    }

    #[test]
    fn sequential_history_is_its_own_linearization() {
        let mut h = reg();
        h.push_atomic(
            ProcessId(0),
            ObjectId(0),
            "write",
            vec![1.into()],
            Value::Unit,
        );
        h.push_atomic(ProcessId(1), ObjectId(0), "read", vec![], 1.into());
        let l = linearize_one(&h, &h.specs()).unwrap().unwrap();
        assert!(l.same_events(&h));
    }

    #[test]
    fn read_of_unwritten_value_fails() {
        let mut h = reg();
        let (p, q, o) = (ProcessId(0), ProcessId(1), ObjectId(0));
        h.push(StepKind::Inv, p, o, "write", Value::ints(&[1]));
        h.push(StepKind::Inv, q, o, "read", Value::ints(&[]));
        h.push(StepKind::Rsp, q, o, "read", 2.into());
        h.push(StepKind::Rsp, p, o, "write", Value::Unit);
        assert_eq!(linearize_one(&h, &h.specs()).unwrap(), None);
    }

    #[test]
    fn pending_write_explains_a_read() {
        let mut h = reg();
        let (p, q, o) = (ProcessId(0), ProcessId(1), ObjectId(0));
        h.push(StepKind::Inv, p, o, "write", Value::ints(&[1]));
        h.push_atomic(q, o, "read", vec![], 1.into());
        let l = linearize_one(&h, &h.specs()).unwrap().unwrap();
        assert_eq!(l.operations().len(), 2);
    }
}
