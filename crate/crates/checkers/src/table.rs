//! The operations of an interpreted history, their precedence constraints and
//! replay against the sequential specifications.

use std::collections::{BTreeMap, HashMap};

use slin_history::{History, ObjectId, SeqSpec, SpecState, Value};

use crate::{CheckError, OpKey, MAX_OPS};

#[derive(Clone, Debug)]
pub(crate) struct Entry {
    pub key: OpKey,
    pub object: ObjectId,
    pub op: String,
    pub args: Vec<Value>,
    /// The response, when the operation completed.
    pub ret: Option<Value>,
    pub inv: usize,
    /// Entries that happen before this one.
    pub preds: u128,
    /// Index into the state vector; `None` for coins.
    pub slot: Option<usize>,
    pub spec: SeqSpec,
}

#[derive(Clone, Debug)]
pub(crate) struct OpTable {
    pub entries: Vec<Entry>,
    /// Entries in (process, invocation) order.
    pub order: Vec<usize>,
    initial: Vec<SpecState>,
    index: HashMap<OpKey, usize>,
}

pub(crate) fn bit(i: usize) -> u128 {
    1u128 << i
}

impl OpTable {
    /// Builds the table of `h`, which must already be interpreted.
    pub fn new(h: &History, specs: &BTreeMap<ObjectId, SeqSpec>) -> Result<Self, CheckError> {
        let ops = h.operations();
        if ops.len() > MAX_OPS {
            return Err(CheckError::TooLarge(format!(
                "{} operations (limit {MAX_OPS})",
                ops.len()
            )));
        }
        let mut ordinals: BTreeMap<_, usize> = BTreeMap::new();
        let mut entries = Vec::with_capacity(ops.len());
        for op in &ops {
            let spec = specs
                .get(&op.object)
                .ok_or(CheckError::MissingSpec(op.object))?;
            let n = ordinals.entry(op.process).or_insert(0);
            let key = OpKey {
                process: op.process,
                ordinal: *n,
            };
            *n += 1;
            let mut preds = 0;
            for (i, other) in ops.iter().enumerate() {
                if other.rsp_index.is_some_and(|r| r < op.inv_index) {
                    preds |= bit(i);
                }
            }
            entries.push(Entry {
                key,
                object: op.object,
                op: op.op.clone(),
                args: op.args.clone(),
                ret: op.ret.clone(),
                inv: op.inv_index,
                preds,
                slot: None,
                spec: spec.clone(),
            });
        }
        Ok(Self::finish(entries))
    }

    fn finish(mut entries: Vec<Entry>) -> Self {
        let mut slots: BTreeMap<ObjectId, usize> = BTreeMap::new();
        let mut initial = Vec::new();
        for e in &mut entries {
            if e.spec.is_coin() {
                continue;
            }
            let next = slots.len();
            let slot = *slots.entry(e.object).or_insert_with(|| {
                initial.push(e.spec.initial_state());
                next
            });
            e.slot = Some(slot);
        }
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by_key(|i| (entries[*i].key.process, entries[*i].inv));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.key, i))
            .collect();
        OpTable {
            entries,
            order,
            initial,
            index,
        }
    }

    /// Operations that may appear in a linearization of both histories, with
    /// the union of their constraints. `None` when some completed operation of
    /// one history cannot appear in the other.
    pub fn merged(a: &OpTable, b: &OpTable) -> Option<OpTable> {
        let mut entries = Vec::new();
        let mut keep: Vec<(usize, Option<usize>)> = Vec::new();
        for (i, e) in a.entries.iter().enumerate() {
            let other = b.index_of(e.key).map(|j| &b.entries[j]);
            match other {
                Some(o) if o.object == e.object && o.op == e.op && o.args == e.args => {
                    if let (Some(x), Some(y)) = (&e.ret, &o.ret) {
                        if x != y {
                            return None;
                        }
                    }
                    keep.push((i, b.index_of(e.key)));
                }
                _ if e.ret.is_some() => return None,
                _ => {}
            }
        }
        for e in &b.entries {
            let shared = keep.iter().any(|(i, _)| a.entries[*i].key == e.key);
            if !shared && e.ret.is_some() {
                return None;
            }
        }
        let position: HashMap<OpKey, usize> = keep
            .iter()
            .enumerate()
            .map(|(n, (i, _))| (a.entries[*i].key, n))
            .collect();
        let remap = |t: &OpTable, mask: u128| -> u128 {
            let mut out = 0;
            for (j, e) in t.entries.iter().enumerate() {
                if mask & bit(j) != 0 {
                    if let Some(n) = position.get(&e.key) {
                        out |= bit(*n);
                    }
                }
            }
            out
        };
        for (i, j) in &keep {
            let ea = &a.entries[*i];
            let mut e = ea.clone();
            e.preds = remap(a, ea.preds);
            if let Some(j) = j {
                let eb = &b.entries[*j];
                e.preds |= remap(b, eb.preds);
                e.ret = e.ret.or_else(|| eb.ret.clone());
            }
            entries.push(e);
        }
        Some(Self::finish(entries))
    }

    pub fn index_of(&self, key: OpKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn initial_states(&self) -> Vec<SpecState> {
        self.initial.clone()
    }

    /// Entries that must appear in every linearization.
    pub fn required(&self) -> u128 {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.ret.is_some())
            .fold(0, |m, (i, _)| m | bit(i))
    }

    pub fn pending(&self) -> usize {
        self.entries.iter().filter(|e| e.ret.is_none()).count()
    }

    /// Whether entry `i` may come next after the entries in `done`.
    pub fn enabled(&self, i: usize, done: u128) -> bool {
        done & bit(i) == 0 && self.entries[i].preds & !done == 0
    }

    /// Applies entry `i`, returning its response. `expected` pins the response
    /// of an operation that is pending here but was already given one.
    pub fn step(
        &self,
        i: usize,
        states: &mut [SpecState],
        expected: Option<&Value>,
    ) -> Option<Value> {
        let e = &self.entries[i];
        let want = e.ret.as_ref().or(expected);
        let Some(slot) = e.slot else {
            let r = want?;
            return e.spec.admits_flip(r).then(|| r.clone());
        };
        let (next, r) = e
            .spec
            .apply(&states[slot], e.key.process, &e.op, &e.args)
            .ok()?;
        if want.is_some_and(|w| *w != r) {
            return None;
        }
        states[slot] = next;
        Some(r)
    }

    /// Replays a sequence given by keys and responses. Returns the committed
    /// set and the resulting states, or `None` when the sequence is not a
    /// valid start of a linearization of this table's history.
    pub fn replay(&self, seq: &[(OpKey, Value)]) -> Option<(u128, Vec<SpecState>)> {
        let mut done = 0;
        let mut states = self.initial_states();
        for (k, r) in seq {
            let i = self.index_of(*k)?;
            if !self.enabled(i, done) {
                return None;
            }
            self.step(i, &mut states, Some(r))?;
            done |= bit(i);
        }
        Some((done, states))
    }

    /// The sequential history of a committed sequence.
    pub fn to_history(&self, registry: &History, seq: &[(usize, Value)]) -> History {
        let mut h = registry.empty_like();
        for (i, r) in seq {
            let e = &self.entries[*i];
            h.push_atomic(e.key.process, e.object, &e.op, e.args.clone(), r.clone());
        }
        h
    }

    pub fn keyed(&self, seq: &[(usize, Value)]) -> Vec<(OpKey, Value)> {
        seq.iter()
            .map(|(i, r)| (self.entries[*i].key, r.clone()))
            .collect()
    }
}
