//! Normal forms of strong linearization functions: every flip sits as early
//! as happens-before allows.

use std::collections::BTreeMap;

use slin_history::{happens_before, History, ObjectId, OperationInstance, SeqSpec};

use crate::strong::Witness;
use crate::tree::HistoryTree;
use crate::validate::validate_witness;
use crate::{CheckError, OpKey};

fn keyed(ops: Vec<OperationInstance>) -> Vec<(OpKey, OperationInstance)> {
    let mut n: BTreeMap<_, usize> = BTreeMap::new();
    ops.into_iter()
        .map(|op| {
            let k = n.entry(op.process).or_insert(0);
            let key = OpKey {
                process: op.process,
                ordinal: *k,
            };
            *k += 1;
            (key, op)
        })
        .collect()
}

fn normalize_image(h: &History, image: &History) -> History {
    let hist: BTreeMap<OpKey, OperationInstance> = keyed(h.operations()).into_iter().collect();
    let mut seq: Vec<(OpKey, OperationInstance)> = keyed(image.operations());
    // Flips are dropped before the pruning: a pending operation followed
    // only by flips must go too, or an earlier flip could overtake it here
    // while a later one overtakes it in an extension.
    seq.retain(|(_, op)| !op.is_flip());
    while seq.last().is_some_and(|(k, _)| !hist[k].is_complete()) {
        seq.pop();
    }
    let mut flips: Vec<(&OpKey, &OperationInstance)> = hist
        .iter()
        .filter(|(_, op)| op.is_flip() && op.is_complete())
        .collect();
    flips.sort_by_key(|(_, op)| op.inv_index);
    for (k, cf) in flips {
        let at = seq
            .iter()
            .rposition(|(j, _)| happens_before(&hist[j], cf))
            .map_or(0, |i| i + 1);
        seq.insert(at, (*k, cf.clone()));
    }
    let mut out = image.empty_like();
    for (_, op) in seq {
        out.push_atomic(
            op.process,
            op.object,
            &op.op,
            op.args,
            op.ret.expect("image ops are complete"),
        );
    }
    out
}

/// Normalizes every node's image: remove the flips, drop trailing operations
/// that are pending in the node's history, then reinsert each completed flip
/// at the earliest position happens-before permits.
pub fn normalize_witness(
    tree: &HistoryTree,
    w: &Witness,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<Witness, CheckError> {
    validate_witness(tree, w, specs)?;
    let images = (0..tree.len())
        .map(|v| {
            (
                v,
                normalize_image(&tree.history(v).interpret(), &w.images[&v]),
            )
        })
        .collect();
    Ok(Witness { images })
}

/// Extends images given for the leaves to every node: a node takes the
/// shortest prefix of a leaf image below it that contains every operation
/// completed at the node. The result is validated.
pub fn witness_from_leaf_images(
    tree: &HistoryTree,
    leaves: &BTreeMap<usize, History>,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<Witness, CheckError> {
    let mut images = BTreeMap::new();
    for v in 0..tree.len() {
        let mut leaf = v;
        while let Some(c) = tree.children(leaf).first() {
            leaf = *c;
        }
        let image = leaves
            .get(&leaf)
            .ok_or_else(|| CheckError::InvalidWitness(format!("leaf {leaf} has no image")))?;
        let done: Vec<OpKey> = keyed(tree.history(v).interpret().operations())
            .into_iter()
            .filter(|(_, op)| op.is_complete())
            .map(|(k, _)| k)
            .collect();
        let ops = keyed(image.operations());
        let mut len = 0;
        for k in &done {
            let pos = ops.iter().position(|(j, _)| j == k).ok_or_else(|| {
                CheckError::InvalidWitness(format!("leaf {leaf}'s image lacks operation {k}"))
            })?;
            len = len.max(pos + 1);
        }
        let mut prefix = image.empty_like();
        for (_, op) in ops.into_iter().take(len) {
            prefix.push_atomic(
                op.process,
                op.object,
                &op.op,
                op.args,
                op.ret.expect("image ops are complete"),
            );
        }
        images.insert(v, prefix);
    }
    let w = Witness { images };
    validate_witness(tree, &w, specs)?;
    Ok(w)
}
