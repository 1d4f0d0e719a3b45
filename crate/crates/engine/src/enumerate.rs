//! Exhaustive enumeration of coin vectors for a fixed adversary.

use std::sync::Arc;

use num_rational::Rational64;
use slin_history::Value;

use crate::adversary::Adversary;
use crate::algorithm::AlgorithmSpec;
use crate::sim::{run_shared, CoinSource, RunRecord};
use crate::EngineError;

const MAX_VECTORS: usize = 1_000_000;

/// Every vector in `omega^horizon`, in lexicographic order of indices.
pub fn coin_vectors(omega: &[Value], horizon: usize) -> Result<Vec<Vec<Value>>, EngineError> {
    let count = (omega.len() as u128)
        .checked_pow(horizon as u32)
        .unwrap_or(u128::MAX);
    if count > MAX_VECTORS as u128 {
        return Err(EngineError::TooLarge(format!(
            "{}^{horizon} coin vectors",
            omega.len()
        )));
    }
    let mut out = vec![Vec::new()];
    for _ in 0..horizon {
        out = out
            .into_iter()
            .flat_map(|v| {
                omega.iter().map(move |c| {
                    let mut w = v.clone();
                    w.push(c.clone());
                    w
                })
            })
            .collect();
    }
    Ok(out)
}

/// Runs `alg` once per coin vector of length `horizon`, each with a fresh
/// adversary from `make_adv`.
pub fn all_runs<A: Adversary>(
    alg: &AlgorithmSpec,
    make_adv: impl Fn() -> A,
    horizon: usize,
    budget: usize,
) -> Result<Vec<(Vec<Value>, RunRecord)>, EngineError> {
    let alg = Arc::new(alg.clone());
    coin_vectors(&alg.omega, horizon)?
        .into_iter()
        .map(|c| {
            let mut adv = make_adv();
            match run_shared(alg.clone(), &mut adv, CoinSource::Vector(c.clone()), budget) {
                Ok(rec) => Ok((c, rec)),
                Err(EngineError::CoinsExhausted { .. }) => {
                    Err(EngineError::HorizonExceeded { horizon })
                }
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Exact expectation of `payoff` over uniformly random coins.
pub fn enumerate_expectation<A: Adversary>(
    alg: &AlgorithmSpec,
    make_adv: impl Fn() -> A,
    horizon: usize,
    budget: usize,
    payoff: impl Fn(&RunRecord) -> Rational64,
) -> Result<Rational64, EngineError> {
    let runs = all_runs(alg, make_adv, horizon, budget)?;
    let n = runs.len() as i64;
    Ok(runs.iter().map(|(_, r)| payoff(r)).sum::<Rational64>() / n)
}

/// Checks the defining property of a strong adversary on a set of runs: two
/// coin vectors agreeing on their first `k` entries yield the same history up
/// to the (k+1)-th flip. Returns the first offending pair.
pub fn verify_strong_class(runs: &[(Vec<Value>, RunRecord)]) -> Result<(), (usize, usize)> {
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (a, b) = (&runs[i].0, &runs[j].0);
            let k = a.iter().zip(b).take_while(|(x, y)| x == y).count();
            let ha = runs[i].1.history.prefix_to_flip(k + 1);
            let hb = runs[j].1.history.prefix_to_flip(k + 1);
            if !ha.same_events(&hb) {
                return Err((i, j));
            }
        }
    }
    Ok(())
}
