//! Register marks, visibility and the "sees" relation.
//!
//! A register is marked by the last process that wrote it or performed a
//! successful `SC` on it. Process `q` sees `p != q` when it reads or `LL`s a
//! `p`-marked register, or when it performs an `SC` on a `p`-marked register
//! after having performed an `LL` on that register. Only `read`, `write`,
//! `LL` and `SC` are tracked.

use std::collections::{BTreeMap, BTreeSet};

use slin_history::{ObjectId, ProcessId, Value};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarkState {
    marks: BTreeMap<ObjectId, ProcessId>,
    linked: BTreeSet<(ProcessId, ObjectId)>,
    sees: BTreeSet<(ProcessId, ProcessId)>,
}

impl MarkState {
    pub fn new() -> Self {
        MarkState::default()
    }

    /// Records `q`'s completed base operation `op` on `object` returning `ret`.
    pub fn record(&mut self, q: ProcessId, object: ObjectId, op: &str, ret: &Value) {
        let current = self.marks.get(&object).copied();
        match op {
            "read" | "LL" => {
                if let Some(p) = current.filter(|p| *p != q) {
                    self.sees.insert((q, p));
                }
                if op == "LL" {
                    self.linked.insert((q, object));
                }
            }
            "SC" => {
                if self.linked.contains(&(q, object)) {
                    if let Some(p) = current.filter(|p| *p != q) {
                        self.sees.insert((q, p));
                    }
                }
                if ret == &Value::Bool(true) {
                    self.marks.insert(object, q);
                }
            }
            "write" => {
                self.marks.insert(object, q);
            }
            _ => {}
        }
    }

    pub fn mark(&self, object: ObjectId) -> Option<ProcessId> {
        self.marks.get(&object).copied()
    }

    pub fn marks(&self) -> &BTreeMap<ObjectId, ProcessId> {
        &self.marks
    }

    /// Some register carries `p`'s mark.
    pub fn is_visible(&self, p: ProcessId) -> bool {
        self.marks.values().any(|m| *m == p)
    }

    pub fn sees(&self, q: ProcessId, p: ProcessId) -> bool {
        self.sees.contains(&(q, p))
    }

    /// All `(q, p)` with `q` seeing `p`.
    pub fn sees_pairs(&self) -> &BTreeSet<(ProcessId, ProcessId)> {
        &self.sees
    }

    /// Processes that have seen `p`.
    pub fn seen_by(&self, p: ProcessId) -> impl Iterator<Item = ProcessId> + '_ {
        self.sees
            .iter()
            .filter(move |(_, t)| *t == p)
            .map(|(q, _)| *q)
    }
}
