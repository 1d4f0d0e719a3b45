//! Equivalence of run sets: for every coin vector the two interpreted
//! histories share a linearization.

use std::cell::RefCell;
use std::collections::BTreeMap;

use slin_engine::game::{solve, Producible};
use slin_engine::{AdversaryClass, AlgorithmSpec, RunRecord};
use slin_history::{ObjectId, SeqSpec, Value};

use crate::linearize::common_linearization;
use crate::CheckError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// The first coin vector without a common linearization.
    NotEquivalent {
        coins: Vec<Value>,
    },
}

fn specs_of(a: &RunRecord, b: &RunRecord) -> BTreeMap<ObjectId, SeqSpec> {
    let mut specs = a.history.specs();
    specs.extend(b.history.specs());
    specs
}

/// Compares two run sets indexed by the same coin vectors.
pub fn check_equivalence(
    implemented: &[(Vec<Value>, RunRecord)],
    atomic: &[(Vec<Value>, RunRecord)],
) -> Result<Equivalence, CheckError> {
    let index: BTreeMap<&Vec<Value>, &RunRecord> = atomic.iter().map(|(c, r)| (c, r)).collect();
    if index.len() != implemented.len() || index.len() != atomic.len() {
        return Err(CheckError::IndexMismatch(format!(
            "{} implemented runs, {} atomic runs",
            implemented.len(),
            atomic.len()
        )));
    }
    for (c, imp) in implemented {
        let at = index
            .get(c)
            .ok_or_else(|| CheckError::IndexMismatch(format!("no atomic run for coins {c:?}")))?;
        if common_linearization(&imp.history, &at.history, &specs_of(imp, at))?.is_none() {
            return Ok(Equivalence::NotEquivalent { coins: c.clone() });
        }
    }
    Ok(Equivalence::Equivalent)
}

/// Whether some strong adversary for `atomic` yields, on every coin vector, a
/// run sharing a linearization with the implemented run for the same coins.
/// Exhausts the adversary's decision tree, visiting at most `limit` nodes.
pub fn equivalent_to_some_strong_adversary(
    implemented: &[(Vec<Value>, RunRecord)],
    atomic: &AlgorithmSpec,
    limit: usize,
) -> Result<bool, CheckError> {
    let failure: RefCell<Option<CheckError>> = RefCell::new(None);
    let accept = |rec: &RunRecord| {
        let matching = implemented
            .iter()
            .filter(|(c, _)| c.starts_with(&rec.coins) || rec.coins.starts_with(c));
        let mut any = false;
        for (_, imp) in matching {
            any = true;
            match common_linearization(&imp.history, &rec.history, &specs_of(imp, rec)) {
                Ok(Some(_)) => {}
                Ok(None) => return false,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    return false;
                }
            }
        }
        any
    };
    let found = solve(
        atomic,
        AdversaryClass::Strong,
        &Producible { accept },
        limit,
    )?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(found),
    }
}
