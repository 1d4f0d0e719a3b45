//! Re-validation of linearizations and witnesses directly from the
//! definitions, without the search machinery.

use std::collections::BTreeMap;

use slin_history::{
    happens_before, validate_sequential, History, ObjectId, OperationInstance, SeqSpec,
};

use crate::strong::Witness;
use crate::tree::HistoryTree;
use crate::CheckError;

/// Pairs every operation of `image` with the operation of `h` it stands for:
/// the k-th operation of a process in the image is its k-th in `h`.
fn match_ops<'h>(
    h: &'h [OperationInstance],
    image: &History,
) -> Result<Vec<&'h OperationInstance>, String> {
    let mut by_process: BTreeMap<_, Vec<&OperationInstance>> = BTreeMap::new();
    for op in h {
        by_process.entry(op.process).or_default().push(op);
    }
    let mut used: BTreeMap<_, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for op in image.operations() {
        let n = used.entry(op.process).or_insert(0);
        let Some(orig) = by_process.get(&op.process).and_then(|v| v.get(*n)) else {
            return Err(format!(
                "{} has no operation #{n} in the history",
                op.process
            ));
        };
        if orig.object != op.object || orig.op != op.op || orig.args != op.args {
            return Err(format!(
                "{}'s operation #{n} differs from the history",
                op.process
            ));
        }
        if orig.ret.is_some() && orig.ret != op.ret {
            return Err(format!(
                "{}'s operation #{n} has the wrong response",
                op.process
            ));
        }
        *n += 1;
        out.push(*orig);
    }
    for (p, ops) in &by_process {
        let complete = ops.iter().filter(|o| o.is_complete()).count();
        if used.get(p).copied().unwrap_or(0) < complete {
            return Err(format!("a completed operation of {p} is missing"));
        }
    }
    Ok(out)
}

/// Checks that `image` is a linearization of `Γ(h)`.
pub fn check_linearization(
    h: &History,
    image: &History,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<(), CheckError> {
    let fail = |m: String| Err(CheckError::NotALinearization(m));
    if !image.is_sequential() {
        return fail("image is not sequential".into());
    }
    let image_ops = image.operations();
    if image_ops.iter().any(|o| !o.is_complete()) {
        return fail("image contains a pending operation".into());
    }
    if !validate_sequential(image, specs)? {
        return fail("image is not valid for the specifications".into());
    }
    let ops = h.interpret().operations();
    let placed = match match_ops(&ops, image) {
        Ok(p) => p,
        Err(m) => return fail(m),
    };
    for (i, a) in placed.iter().enumerate() {
        for b in &placed[i + 1..] {
            if happens_before(b, a) {
                return fail(format!("image reverses {} before {}", b.process, a.process));
            }
        }
    }
    Ok(())
}

/// Checks (L) at every node and (P) along every edge.
pub fn validate_witness(
    tree: &HistoryTree,
    w: &Witness,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<(), CheckError> {
    let invalid = |m: String| CheckError::InvalidWitness(m);
    for (v, node) in tree.nodes().iter().enumerate() {
        let image = w
            .image(v)
            .ok_or_else(|| invalid(format!("node {v} has no image")))?;
        check_linearization(&tree.history(v), image, specs)
            .map_err(|e| invalid(format!("node {v}: {e}")))?;
        if let Some(p) = node.parent {
            let parent = w
                .image(p)
                .ok_or_else(|| invalid(format!("node {p} has no image")))?;
            let prefix = parent.steps.len() <= image.steps.len()
                && parent
                    .steps
                    .iter()
                    .zip(&image.steps)
                    .all(|(a, b)| a.same_event(b));
            if !prefix {
                return Err(invalid(format!(
                    "image of node {p} is not a prefix of node {v}'s"
                )));
            }
        }
    }
    Ok(())
}

/// Checks (N): whenever a flip directly follows an operation in an image, that
/// operation happens before the flip in the node's history.
pub fn check_normal_form(tree: &HistoryTree, w: &Witness) -> Result<(), CheckError> {
    let invalid = |m: String| CheckError::InvalidWitness(m);
    for v in 0..tree.len() {
        let image = w
            .image(v)
            .ok_or_else(|| invalid(format!("node {v} has no image")))?;
        let ops = tree.history(v).interpret().operations();
        let placed = match_ops(&ops, image).map_err(|m| invalid(format!("node {v}: {m}")))?;
        for pair in placed.windows(2) {
            if pair[1].is_flip() && !happens_before(pair[0], pair[1]) {
                return Err(invalid(format!(
                    "node {v}: flip of {} follows a concurrent operation of {}",
                    pair[1].process, pair[0].process
                )));
            }
        }
    }
    Ok(())
}
