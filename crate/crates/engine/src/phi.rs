//! Monte Carlo estimates of the expected fetch&inc result of a target process.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use slin_history::Value;

use crate::adversary::{AdversaryClass, RoundRobin, SeededRandom, Waves};
use crate::algorithm::AlgorithmSpec;
use crate::loadbalance::{
    fai_value, isqrt, lb_helper_holds, loadbalance, AdversaryAp, CounterKind,
};
use crate::sim::{run_shared, CoinSource};
use crate::EngineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiAdversary {
    Ap,
    RoundRobin,
    Random,
    Waves,
}

impl PhiAdversary {
    pub fn name(self) -> &'static str {
        match self {
            PhiAdversary::Ap => "a_p",
            PhiAdversary::RoundRobin => "round-robin",
            PhiAdversary::Random => "random",
            PhiAdversary::Waves => "waves",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PhiConfig {
    pub n: usize,
    pub counter: CounterKind,
    pub adversary: PhiAdversary,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    /// Grant budget per run.
    pub budget: usize,
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl PhiConfig {
    pub fn new(n: usize, counter: CounterKind, adversary: PhiAdversary) -> Self {
        PhiConfig {
            n,
            counter,
            adversary,
            trials: 2000,
            seed: 0,
            delta: 0.5,
            budget: 200_000,
            threads: None,
        }
    }
}

/// `⌈(1+δ)√n⌉`.
pub fn k_max(n: usize, delta: f64) -> usize {
    ((1.0 + delta) * (n as f64).sqrt() - 1e-9).ceil() as usize
}

/// `(K_max − 1)/√n`.
pub fn upper_bound(n: usize, delta: f64) -> f64 {
    (k_max(n, delta) as f64 - 1.0) / (n as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiEstimate {
    pub n: usize,
    pub counter: &'static str,
    pub adversary: &'static str,
    pub trials: usize,
    pub seed: u64,
    pub k_max: usize,
    pub mean: f64,
    pub variance: f64,
    /// Half-width of the normal 95% interval.
    pub ci95: f64,
    /// Max point contention → number of runs.
    pub contention: BTreeMap<usize, usize>,
    pub budget_exhausted: usize,
    /// `A_p` runs whose contention exceeded `|P_{i*}| + 1`.
    pub contention_violations: usize,
    /// `A_p` runs whose first phase did not end as specified.
    pub phase1_violations: usize,
    /// `A_p` runs on implemented counters contradicting the helper claim.
    pub lb_helper_violations: usize,
}

#[derive(Clone, Debug, Default)]
struct Trial {
    x: f64,
    contention: usize,
    exhausted: bool,
    contention_violation: bool,
    phase1_violation: bool,
    lb_violation: bool,
}

fn trial(alg: &Arc<AlgorithmSpec>, cfg: &PhiConfig, t: usize) -> Result<Trial, EngineError> {
    let n = cfg.n;
    let m = isqrt(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(t as u64);
    let coins: Vec<Vec<Value>> = (0..n)
        .map(|_| vec![Value::Int(rng.gen_range(0..m) as i64)])
        .collect();
    let p = rng.gen_range(0..n);
    let adv_seed: u64 = rng.gen();
    let kmax = k_max(n, cfg.delta);
    let coins = CoinSource::PerProcess(coins);
    let mut out = Trial::default();
    let rec = match cfg.adversary {
        PhiAdversary::Ap => {
            let mut adv = AdversaryAp::new(p, n)?;
            let rec = run_shared(alg.clone(), &mut adv, coins, cfg.budget)?;
            let report = adv.report().cloned();
            match report {
                Some(r) => {
                    out.phase1_violation = !r.phase1_ok;
                    out.contention_violation = rec.max_point_contention > r.p_star.len() + 1;
                    if cfg.counter.is_implemented() {
                        out.lb_violation = lb_helper_holds(&rec, p, r.i_star) == Some(false);
                    }
                }
                None => out.phase1_violation = true,
            }
            rec
        }
        PhiAdversary::RoundRobin => run_shared(
            alg.clone(),
            &mut RoundRobin::new(AdversaryClass::Weak),
            coins,
            cfg.budget,
        )?,
        PhiAdversary::Random => run_shared(
            alg.clone(),
            &mut SeededRandom::new(AdversaryClass::Weak, adv_seed),
            coins,
            cfg.budget,
        )?,
        PhiAdversary::Waves => run_shared(
            alg.clone(),
            &mut Waves::new(AdversaryClass::Weak, kmax.saturating_sub(1)),
            coins,
            cfg.budget,
        )?,
    };
    out.contention = rec.max_point_contention;
    out.exhausted = rec.budget_exhausted;
    if rec.max_point_contention <= kmax {
        out.x = fai_value(&rec.procs[p]).unwrap_or(0) as f64;
    }
    Ok(out)
}

/// Estimates `Φ = E[X]`, where `X` is the target's fetch&inc result when the
/// run's point contention is at most `K_max`, and 0 otherwise. Trial `t` draws
/// its coins, its target and its adversary seed from stream `t` of a ChaCha8
/// generator keyed by the seed, so results do not depend on the thread count.
pub fn estimate_phi(cfg: &PhiConfig) -> Result<PhiEstimate, EngineError> {
    if cfg.trials == 0 {
        return Err(EngineError::NoTrials);
    }
    let alg = Arc::new(loadbalance(cfg.n, cfg.counter)?);
    let work = || -> Result<Vec<Trial>, EngineError> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial(&alg, cfg, t))
            .collect()
    };
    let trials = match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| EngineError::BadProgram(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let count = trials.len() as f64;
    let mean = trials.iter().map(|t| t.x).sum::<f64>() / count;
    let variance = if trials.len() > 1 {
        trials.iter().map(|t| (t.x - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let mut contention = BTreeMap::new();
    for t in &trials {
        *contention.entry(t.contention).or_insert(0) += 1;
    }
    let tally = |f: fn(&Trial) -> bool| trials.iter().filter(|t| f(t)).count();
    Ok(PhiEstimate {
        n: cfg.n,
        counter: cfg.counter.name(),
        adversary: cfg.adversary.name(),
        trials: cfg.trials,
        seed: cfg.seed,
        k_max: k_max(cfg.n, cfg.delta),
        mean,
        variance,
        ci95: 1.96 * (variance / count).sqrt(),
        contention,
        budget_exhausted: tally(|t| t.exhausted),
        contention_violations: tally(|t| t.contention_violation),
        phase1_violations: tally(|t| t.phase1_violation),
        lb_helper_violations: tally(|t| t.lb_violation),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_max_values() {
        assert_eq!(k_max(16, 0.5), 6);
        assert_eq!(k_max(64, 0.5), 12);
        assert_eq!(upper_bound(64, 0.5), 1.375);
        assert_eq!(k_max(4, 0.5), 3);
    }

    #[test]
    fn zero_trials_is_an_error() {
        let mut cfg = PhiConfig::new(4, CounterKind::Atomic, PhiAdversary::Ap);
        cfg.trials = 0;
        assert_eq!(estimate_phi(&cfg), Err(EngineError::NoTrials));
    }
}
