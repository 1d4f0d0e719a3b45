//! Concrete instances of the locality property: strong linearizability of
//! every per-object projection implies it for the combined histories.

use std::collections::BTreeMap;

use slin_history::{History, Level, ObjectId, SeqSpec};

use crate::strong::{check_strong_lin, Witness};
use crate::tree::HistoryTree;
use crate::CheckError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Locality {
    /// Every projection and the combined tree have witnesses.
    Holds(Witness),
    /// Some projection has no witness, so nothing is claimed.
    NotApplicable { failing: Vec<ObjectId> },
    /// Every projection has a witness but the combined tree has none.
    Counterexample,
}

fn project(h: &History, o: ObjectId) -> History {
    let mut out = h.empty_like();
    for s in h.interpret().steps {
        if s.object == o && s.level == Level::Interpreted {
            out.push_step(s);
        }
    }
    out
}

/// Checks that the interpreted projections of `combined`'s histories onto
/// each object are exactly the histories of that object's tree, then runs the
/// strong checker on every tree.
pub fn check_locality(
    per_object: &[(ObjectId, HistoryTree)],
    combined: &HistoryTree,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<Locality, CheckError> {
    let leaves: Vec<History> = combined
        .leaves()
        .into_iter()
        .map(|v| combined.history(v))
        .collect();
    for (o, tree) in per_object {
        let mismatch = |m: String| CheckError::ProjectionMismatch(format!("object {o}: {m}"));
        let mut reached = vec![false; tree.len()];
        for h in &leaves {
            let p = project(h, *o);
            let v = tree
                .locate(&p)
                .ok_or_else(|| mismatch("a projected history is missing from its tree".into()))?;
            reached[v] = true;
        }
        if let Some(leaf) = tree.leaves().into_iter().find(|v| !reached[*v]) {
            return Err(mismatch(format!(
                "leaf {leaf} is not the projection of any combined history"
            )));
        }
    }
    let mut failing = Vec::new();
    for (o, tree) in per_object {
        if check_strong_lin(tree, specs)?.is_none() {
            failing.push(*o);
        }
    }
    if !failing.is_empty() {
        return Ok(Locality::NotApplicable { failing });
    }
    Ok(match check_strong_lin(combined, specs)? {
        Some(w) => Locality::Holds(w),
        None => Locality::Counterexample,
    })
}
