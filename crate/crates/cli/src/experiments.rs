//! Named experiments. Each one runs a fixed matrix of variants and checks
//! the measured values against the expectations table.

use std::collections::BTreeMap;

use num_rational::Rational64;
use slin_checkers::example::{jointly_producible, printed_leaf_images, tree as example_tree};
use slin_checkers::{
    check_normal_form, check_strong_lin, normalize_witness, validate_witness,
    witness_from_leaf_images, HistoryTree, Witness,
};
use slin_engine::enumerate::all_runs;
use slin_engine::game::{solve, Expectation};
use slin_engine::loadbalance::CounterKind;
use slin_engine::phi::{estimate_phi, upper_bound, PhiAdversary, PhiConfig, PhiEstimate};
use slin_engine::scenarios::*;
use slin_engine::{
    Adversary, AdversaryClass, AlgorithmSpec, EngineError, RunRecord, ScheduleScript, SeededRandom,
    DEFAULT_BUDGET,
};
use slin_history::{History, ObjectId, ProcessId, SeqSpec, Value};

use crate::expected::{self, Claim};
use crate::report::{describe, fmt_float, ConfigEcho, Report, Row, Verdict};
use crate::CliError;

/// Node limit for exhaustive adversary games.
pub const GAME_LIMIT: usize = 5_000_000;
/// Per-run grant budget for load-balancing trials unless overridden.
pub const PHI_BUDGET: usize = 200_000;
pub const DEFAULT_SIZES: [usize; 3] = [16, 64, 256];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    Snapshot,
    SrswRegister,
    MrswRegister,
    HwQueue,
    Loadbalance,
    StrongLinSuite,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Snapshot => "snapshot",
            Experiment::SrswRegister => "srsw-register",
            Experiment::MrswRegister => "mrsw-register",
            Experiment::HwQueue => "hw-queue",
            Experiment::Loadbalance => "loadbalance",
            Experiment::StrongLinSuite => "strong-lin-suite",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: usize,
    /// Restricts loadbalance to one size.
    pub n: Option<usize>,
    pub delta: f64,
    /// Grant budget per run; each experiment has its own default.
    pub budget: Option<usize>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: 42,
            trials: 2000,
            n: None,
            delta: 0.5,
            budget: None,
            threads: None,
        }
    }

    fn run_budget(&self) -> usize {
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }
}

pub fn run_named_experiment(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let rows = match cfg.experiment {
        Experiment::Snapshot => snapshot_rows(cfg)?,
        Experiment::SrswRegister => srsw_rows(cfg)?,
        Experiment::MrswRegister => mrsw_rows(cfg)?,
        Experiment::HwQueue => hw_rows(cfg)?,
        Experiment::Loadbalance => loadbalance_rows(cfg)?,
        Experiment::StrongLinSuite => strong_lin_rows(cfg)?,
    };
    Ok(Report {
        experiment: cfg.experiment.name().into(),
        config: ConfigEcho {
            seed: cfg.seed,
            trials: cfg.trials,
            n: cfg.n,
            delta: cfg.delta,
            budget: cfg.budget,
        },
        rows,
    })
}

/// A row for an exhaustive game value; a search over the node limit is
/// inconclusive.
fn game_row(
    exp: Experiment,
    variant: &str,
    result: Result<Rational64, EngineError>,
    claim: Option<&Claim>,
) -> Result<Row, CliError> {
    let name = exp.name();
    match (result, claim) {
        (Ok(v), Some(c)) => Ok(Row::exact(name, variant, "expectation", v, c)),
        (Ok(v), None) => Ok(Row::info(
            name,
            variant,
            "expectation",
            crate::report::fmt_rational(v),
        )),
        (Err(EngineError::TooLarge(msg)), claim) => {
            Ok(inconclusive(name, variant, "expectation", msg, claim))
        }
        (Err(e), _) => Err(e.into()),
    }
}

fn inconclusive(
    exp: &str,
    variant: &str,
    metric: &str,
    value: String,
    claim: Option<&Claim>,
) -> Row {
    let mut row = Row::info(exp, variant, metric, value);
    if let Some(c) = claim {
        row.expected = describe(c);
        row.citation = c.citation.into();
    }
    row.verdict = Verdict::Inconclusive;
    row
}

/// The exact expectation of `payoff` under a fixed adversary, enumerating
/// every coin vector. Runs that exhaust the budget make the row inconclusive.
fn scripted<A: Adversary>(
    exp: Experiment,
    variant: &str,
    alg: &AlgorithmSpec,
    make: impl Fn() -> A,
    payoff: fn(&RunRecord) -> Rational64,
    cfg: &ExperimentConfig,
    claim: Option<&Claim>,
) -> Result<Row, CliError> {
    let runs = all_runs(alg, make, 1, cfg.run_budget())?;
    let exhausted = runs.iter().filter(|(_, r)| r.budget_exhausted).count();
    if exhausted > 0 {
        let msg = format!("{exhausted} run(s) exhausted the budget");
        return Ok(inconclusive(exp.name(), variant, "expectation", msg, claim));
    }
    let e = runs.iter().map(|(_, r)| payoff(r)).sum::<Rational64>() / runs.len() as i64;
    game_row(exp, variant, Ok(e), claim)
}

fn snapshot_rows(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let exp = Experiment::Snapshot;
    let atomic = snapshot(Variant::Atomic);
    let objective = Expectation::min(snapshot_payoff);
    Ok(vec![
        game_row(
            exp,
            "atomic-strong",
            solve(&atomic, AdversaryClass::Strong, &objective, GAME_LIMIT),
            Some(&expected::SNAPSHOT_ATOMIC_STRONG),
        )?,
        game_row(
            exp,
            "atomic-weak",
            solve(&atomic, AdversaryClass::Weak, &objective, GAME_LIMIT),
            Some(&expected::SNAPSHOT_ATOMIC_WEAK),
        )?,
        scripted(
            exp,
            "implemented-weak",
            &snapshot(Variant::Implemented),
            snapshot_weak_script,
            snapshot_payoff,
            cfg,
            Some(&expected::SNAPSHOT_IMPLEMENTED_WEAK),
        )?,
    ])
}

fn srsw_rows(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let exp = Experiment::SrswRegister;
    Ok(vec![
        game_row(
            exp,
            "atomic-strong",
            solve(
                &srsw(Variant::Atomic),
                AdversaryClass::Strong,
                &Expectation::min(srsw_payoff),
                GAME_LIMIT,
            ),
            Some(&expected::SRSW_ATOMIC_STRONG),
        )?,
        scripted(
            exp,
            "implemented-oblivious",
            &srsw(Variant::Implemented),
            || ScheduleScript::oblivious(srsw_oblivious_schedule()),
            srsw_payoff,
            cfg,
            Some(&expected::SRSW_IMPLEMENTED_OBLIVIOUS),
        )?,
    ])
}

fn mrsw_rows(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let exp = Experiment::MrswRegister;
    Ok(vec![
        game_row(
            exp,
            "atomic-strong",
            solve(
                &mrsw(Variant::Atomic),
                AdversaryClass::Strong,
                &Expectation::min(mrsw_payoff),
                GAME_LIMIT,
            ),
            Some(&expected::MRSW_ATOMIC_STRONG),
        )?,
        scripted(
            exp,
            "implemented-weak",
            &mrsw(Variant::Implemented),
            mrsw_weak_script,
            mrsw_payoff,
            cfg,
            Some(&expected::MRSW_IMPLEMENTED_WEAK),
        )?,
    ])
}

fn hw_rows(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let exp = Experiment::HwQueue;
    let atomic = hw_queue(Variant::Atomic);
    let imp = hw_queue(Variant::Implemented);
    Ok(vec![
        scripted(
            exp,
            "implemented-weak",
            &imp,
            hw_weak_script,
            hw_payoff,
            cfg,
            Some(&expected::HW_IMPLEMENTED_WEAK),
        )?,
        game_row(
            exp,
            "atomic-strong",
            solve(
                &atomic,
                AdversaryClass::Strong,
                &Expectation::max(hw_payoff),
                GAME_LIMIT,
            ),
            Some(&expected::HW_ATOMIC_STRONG),
        )?,
        scripted(
            exp,
            "implemented-strong",
            &imp,
            hw_strong_script,
            hw_payoff,
            cfg,
            None,
        )?,
        game_row(
            exp,
            "atomic-strong-without-order",
            solve(
                &atomic,
                AdversaryClass::Strong,
                &Expectation::max(hw_payoff_without_order),
                GAME_LIMIT,
            ),
            None,
        )?,
    ])
}

const ATOMIC_ADVERSARIES: [PhiAdversary; 4] = [
    PhiAdversary::Ap,
    PhiAdversary::RoundRobin,
    PhiAdversary::Random,
    PhiAdversary::Waves,
];
const IMPLEMENTED: [CounterKind; 2] = [CounterKind::Llsc, CounterKind::WriteFirst];

pub fn phi_config(
    cfg: &ExperimentConfig,
    n: usize,
    counter: CounterKind,
    adversary: PhiAdversary,
) -> PhiConfig {
    PhiConfig {
        n,
        counter,
        adversary,
        trials: cfg.trials,
        seed: cfg.seed,
        delta: cfg.delta,
        budget: cfg.budget.unwrap_or(PHI_BUDGET),
        threads: cfg.threads,
    }
}

/// Verdict of one estimate against `claim`; exhausted runs make it
/// inconclusive, adversary postcondition violations make it fail.
pub fn phi_verdict(est: &PhiEstimate, delta: f64, claim: &Claim) -> Verdict {
    if est.budget_exhausted > 0 {
        return Verdict::Inconclusive;
    }
    let ub = upper_bound(est.n, delta);
    let ok = match claim.bound {
        expected::Bound::PhiAtMostBound => est.mean <= ub + 3.0 * est.ci95,
        expected::Bound::PhiAboveBound => est.mean - est.ci95 > ub,
        _ => false,
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn phi_rows(exp: &str, est: &PhiEstimate, delta: f64, claim: &Claim) -> Vec<Row> {
    let variant = format!("{}/{}/n={}", est.counter, est.adversary, est.n);
    let mut phi = Row::checked(
        exp,
        &variant,
        "phi",
        fmt_float(est.mean),
        claim,
        phi_verdict(est, delta, claim),
    );
    phi.ci95 = Some(est.ci95);
    phi.expected = format!(
        "{} with bound {}",
        describe(claim),
        fmt_float(upper_bound(est.n, delta))
    );
    let mut rows = vec![phi];
    let zero = |metric: &str, count: usize, c: &Claim| {
        let verdict = if count == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Row::checked(exp, &variant, metric, count.to_string(), c, verdict)
    };
    if est.adversary == PhiAdversary::Ap.name() {
        rows.push(zero(
            "phase1-violations",
            est.phase1_violations,
            &expected::AP_PHASE_ONE,
        ));
        rows.push(zero(
            "contention-violations",
            est.contention_violations,
            &expected::AP_CONTENTION,
        ));
        if est.counter != CounterKind::Atomic.name() {
            rows.push(zero(
                "helper-violations",
                est.lb_helper_violations,
                &expected::LB_HELPER,
            ));
        }
    }
    let mut exhausted = Row::info(
        exp,
        &variant,
        "budget-exhausted",
        est.budget_exhausted.to_string(),
    );
    if est.budget_exhausted > 0 {
        exhausted.verdict = Verdict::Inconclusive;
    }
    rows.push(exhausted);
    rows
}

/// Whether the means strictly increase along the given order.
pub fn increasing(means: &[f64]) -> bool {
    means.windows(2).all(|w| w[0] < w[1])
}

fn loadbalance_rows(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let exp = Experiment::Loadbalance.name();
    let sizes: Vec<usize> = match cfg.n {
        Some(n) => vec![n],
        None => DEFAULT_SIZES.to_vec(),
    };
    let mut rows = Vec::new();
    for &n in &sizes {
        for adv in ATOMIC_ADVERSARIES {
            let est = estimate_phi(&phi_config(cfg, n, CounterKind::Atomic, adv))?;
            rows.extend(phi_rows(exp, &est, cfg.delta, &expected::PHI_ATOMIC));
        }
    }
    let mut growth: BTreeMap<&'static str, Vec<PhiEstimate>> = BTreeMap::new();
    for &n in &sizes {
        for counter in IMPLEMENTED {
            let est = estimate_phi(&phi_config(cfg, n, counter, PhiAdversary::Ap))?;
            rows.extend(phi_rows(exp, &est, cfg.delta, &expected::PHI_IMPLEMENTED));
            growth.entry(counter.name()).or_default().push(est);
        }
    }
    if sizes.len() > 1 {
        for (counter, ests) in growth {
            let means: Vec<f64> = ests.iter().map(|e| e.mean).collect();
            let verdict = if ests.iter().any(|e| e.budget_exhausted > 0) {
                Verdict::Inconclusive
            } else if increasing(&means) {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            let value = means
                .iter()
                .map(|m| fmt_float(*m))
                .collect::<Vec<_>>()
                .join(" ");
            let sizes = sizes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let variant = format!("{counter}/a_p/n={sizes}");
            rows.push(Row::checked(
                exp,
                &variant,
                "growth",
                value,
                &expected::PHI_GROWTH,
                verdict,
            ));
        }
    }
    Ok(rows)
}

fn specs_of(runs: &[(Vec<Value>, RunRecord)]) -> BTreeMap<ObjectId, SeqSpec> {
    let mut specs = BTreeMap::new();
    for (_, r) in runs {
        specs.extend(r.history.specs());
    }
    specs
}

/// Whether every leaf image orders r's write immediately before a flip.
fn flip_follows_r(tree: &HistoryTree, w: &Witness) -> bool {
    tree.leaves().iter().all(|&v| {
        let ops = w.image(v).map(History::operations).unwrap_or_default();
        ops.iter()
            .position(|op| op.process == ProcessId(2) && !op.is_flip())
            .and_then(|i| ops.get(i + 1))
            .is_some_and(|op| op.is_flip())
    })
}

fn leaf_images(tree: &HistoryTree, w: &Witness) -> Vec<History> {
    tree.leaves()
        .iter()
        .filter_map(|v| w.image(*v).cloned())
        .collect()
}

fn strong_lin_rows(cfg: &ExperimentConfig) -> Result<Vec<Row>, CliError> {
    let exp = Experiment::StrongLinSuite.name();
    let budget = cfg.run_budget();
    let mut rows = Vec::new();

    let seed = cfg.seed;
    let runs = all_runs(
        &flip_counter(Variant::Implemented),
        || SeededRandom::new(AdversaryClass::Strong, seed),
        2,
        budget,
    )?;
    let tree = HistoryTree::from_runs(&runs)?;
    let specs = specs_of(&runs);
    let w = check_strong_lin(&tree, &specs)?;
    let valid = w
        .as_ref()
        .is_some_and(|w| validate_witness(&tree, w, &specs).is_ok());
    rows.push(Row::decision(
        exp,
        "mutex-counter",
        "witness",
        valid,
        &expected::MUTEX_WITNESS,
    ));
    let normal = match &w {
        Some(w) => {
            let n = normalize_witness(&tree, w, &specs)?;
            validate_witness(&tree, &n, &specs).is_ok() && check_normal_form(&tree, &n).is_ok()
        }
        None => false,
    };
    rows.push(Row::decision(
        exp,
        "mutex-counter",
        "normalized-witness",
        normal,
        &expected::NORMAL_FORM_EXISTS,
    ));

    let runs = all_runs(&hw_queue(Variant::Implemented), hw_strong_script, 1, budget)?;
    let tree = HistoryTree::from_runs(&runs)?;
    let found = check_strong_lin(
        &tree,
        &runs.iter().flat_map(|(_, r)| r.history.specs()).collect(),
    )?
    .is_some();
    rows.push(Row::decision(
        exp,
        "hw-queue-atomic-dequeue",
        "witness",
        found,
        &expected::HW_NO_WITNESS,
    ));

    let tree = example_tree();
    let specs = tree.history(0).specs();
    let found = check_strong_lin(&tree, &specs)?.is_some();
    rows.push(Row::decision(
        exp,
        "three-writers",
        "witness",
        found,
        &expected::EXAMPLE_WITNESS,
    ));
    let printed = witness_from_leaf_images(&tree, &printed_leaf_images(&tree), &specs)?;
    let alg = three_writers();
    let producible = jointly_producible(&alg, &leaf_images(&tree, &printed), GAME_LIMIT)?;
    rows.push(Row::decision(
        exp,
        "three-writers",
        "printed-images-producible",
        producible,
        &expected::EXAMPLE_NOT_PRODUCIBLE,
    ));
    let normalized = normalize_witness(&tree, &printed, &specs)?;
    let ok = flip_follows_r(&tree, &normalized)
        && check_normal_form(&tree, &normalized).is_ok()
        && jointly_producible(&alg, &leaf_images(&tree, &normalized), GAME_LIMIT)?;
    rows.push(Row::decision(
        exp,
        "three-writers",
        "normalized-images",
        ok,
        &expected::EXAMPLE_NORMALIZED,
    ));
    Ok(rows)
}
