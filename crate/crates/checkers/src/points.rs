//! Linearization points for timed executions.

use std::collections::{BTreeMap, HashMap};

use slin_history::{History, ObjectId, SeqSpec, Time, TimedExecution};

use crate::validate::check_linearization;
use crate::{CheckError, OpKey};

/// Point of every operation of `Γ(E)`; `None` stands for +∞.
pub type PointMap = BTreeMap<OpKey, Option<Time>>;

fn keys_of(h: &History) -> Vec<OpKey> {
    let mut n: HashMap<_, usize> = HashMap::new();
    h.operations()
        .iter()
        .map(|op| {
            let k = n.entry(op.process).or_insert(0);
            *k += 1;
            OpKey {
                process: op.process,
                ordinal: *k - 1,
            }
        })
        .collect()
}

/// Halfway to the next step of `e` after `t`, or `t + 1` after the last.
fn t_star(e: &TimedExecution, t: Time) -> Time {
    match e.next_time_after(t) {
        Some(u) => (t + u) / 2,
        None => t + 1,
    }
}

/// Assigns points to the operations of `image`, a linearization of
/// `Γ(H(e))`: the first gets its invocation time, each later one the larger
/// of its invocation time and `T*` of its predecessor's point.
pub fn extract_linearization_points(
    e: &TimedExecution,
    image: &History,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<PointMap, CheckError> {
    let h = e.history();
    let kept = h.interpreted_indices();
    let gamma = h.interpret();
    check_linearization(&gamma, image, specs)?;
    let ops = gamma.operations();
    let inv_time: HashMap<OpKey, Time> = keys_of(&gamma)
        .into_iter()
        .zip(&ops)
        .map(|(k, op)| (k, e.time(kept[op.inv_index])))
        .collect();
    let mut points: PointMap = inv_time.keys().map(|k| (*k, None)).collect();
    let mut prev: Option<Time> = None;
    for k in keys_of(image) {
        let t = inv_time[&k];
        let pt = match prev {
            None => t,
            Some(p) => t.max(t_star(e, p)),
        };
        points.insert(k, Some(pt));
        prev = Some(pt);
    }
    Ok(points)
}

/// `L(E, pt)`: the operations of `image` with a finite point, each as an
/// atomic step pair at that point.
pub fn linearization_from_points(
    e: &TimedExecution,
    image: &History,
    points: &PointMap,
) -> Result<TimedExecution, CheckError> {
    let mut h = e.registry.empty_like();
    let mut times = Vec::new();
    for (k, op) in keys_of(image).into_iter().zip(image.operations()) {
        let Some(Some(t)) = points.get(&k) else {
            continue;
        };
        let ret = op
            .ret
            .ok_or_else(|| CheckError::NotALinearization(format!("{k} is pending in the image")))?;
        h.push_atomic(op.process, op.object, &op.op, op.args, ret);
        times.extend([*t, *t]);
    }
    Ok(TimedExecution::new(&h, times)?)
}
