//! Command-line definitions and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slin_checkers::{check_strong_lin, linearize_one, normalize_witness, HistoryTree};
use slin_engine::scenarios::*;
use slin_engine::{
    run, Adversary, AdversaryClass, AlgorithmSpec, CoinSource, RoundRobin, ScheduleScript,
    SeededRandom, DEFAULT_BUDGET,
};
use slin_history::jsonl::{from_jsonl, to_jsonl};
use slin_history::Value;

use crate::experiments::{run_named_experiment, Experiment, ExperimentConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "slin",
    version,
    about = "Experiments on linearizable objects under randomized scheduling"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for all sampled randomness.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo trials per estimate.
    #[arg(long, global = true, default_value_t = 2000)]
    pub trials: usize,
    /// Number of processes for loadbalance (a perfect square).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Slack in K_max = ceil((1+delta) sqrt(n)).
    #[arg(long, global = true, default_value_t = 0.5)]
    pub delta: f64,
    /// Grant budget per run.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sampled trials.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a named experiment and report each claim.
    Experiment {
        #[arg(value_enum)]
        name: Experiment,
    },
    /// Run one scenario under one adversary and coin vector; print the history.
    Simulate(SimulateArgs),
    /// Linearize a JSON Lines history.
    CheckLin { file: PathBuf },
    /// Search a history tree for a strong linearization.
    CheckStrongLin {
        file: PathBuf,
        /// Normalize the witness before printing it.
        #[arg(long)]
        normalize: bool,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    #[arg(long, value_enum, default_value_t = VariantArg::Implemented)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = AdversaryArg::WeakScript)]
    pub adversary: AdversaryArg,
    /// Class of the round-robin and random adversaries.
    #[arg(long, value_enum, default_value_t = ClassArg::Weak)]
    pub class: ClassArg,
    /// Flip outcomes in order, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub coins: Vec<i64>,
    /// Print the interpreted history (method calls only).
    #[arg(long)]
    pub interpreted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    Snapshot,
    Srsw,
    Mrsw,
    HwQueue,
    ThreeWriters,
    FlipCounter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Atomic,
    Implemented,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AdversaryArg {
    WeakScript,
    StrongScript,
    Oblivious,
    RoundRobin,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Oblivious,
    Weak,
    Strong,
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(global: &GlobalArgs, text: &str) -> Result<(), CliError> {
    match &global.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.clone(), e))
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Experiment { name } => {
            let cfg = ExperimentConfig {
                experiment: *name,
                seed: g.seed,
                trials: g.trials,
                n: g.n,
                delta: g.delta,
                budget: g.budget,
                threads: g.threads,
            };
            let report = run_named_experiment(&cfg)?;
            let text = match g.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            emit(g, &text)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Simulate(args) => {
            let alg = scenario(args.scenario, args.variant);
            let mut adv = adversary(args, g.seed)?;
            let coins: Vec<Value> = args.coins.iter().map(|c| Value::Int(*c)).collect();
            if let Some(c) = coins.iter().find(|c| !alg.omega.contains(c)) {
                return Err(CliError::Usage(format!(
                    "coin {c:?} is outside the scenario's outcomes {:?}",
                    alg.omega
                )));
            }
            let coins = CoinSource::Vector(coins);
            let rec = run(
                &alg,
                adv.as_mut(),
                coins,
                g.budget.unwrap_or(DEFAULT_BUDGET),
            )?;
            let h = if args.interpreted {
                rec.history.interpret()
            } else {
                rec.history
            };
            emit(g, &to_jsonl(&h))?;
            Ok(0)
        }
        Command::CheckLin { file } => {
            let h = from_jsonl(&read(file)?)?;
            match linearize_one(&h, &h.specs())? {
                Some(l) => {
                    emit(g, &to_jsonl(&l))?;
                    Ok(0)
                }
                None => {
                    emit(g, "NONE\n")?;
                    Ok(1)
                }
            }
        }
        Command::CheckStrongLin { file, normalize } => {
            let tree = HistoryTree::from_json(&read(file)?)?;
            let specs = tree.registry().specs();
            match check_strong_lin(&tree, &specs)? {
                Some(w) => {
                    let w = if *normalize {
                        normalize_witness(&tree, &w, &specs)?
                    } else {
                        w
                    };
                    let mut text =
                        serde_json::to_string_pretty(&w.to_json()).expect("witness serializes");
                    text.push('\n');
                    emit(g, &text)?;
                    Ok(0)
                }
                None => {
                    emit(g, "NONE\n")?;
                    Ok(1)
                }
            }
        }
    }
}

fn scenario(s: Scenario, v: VariantArg) -> AlgorithmSpec {
    let v = match v {
        VariantArg::Atomic => Variant::Atomic,
        VariantArg::Implemented => Variant::Implemented,
    };
    match s {
        Scenario::Snapshot => snapshot(v),
        Scenario::Srsw => srsw(v),
        Scenario::Mrsw => mrsw(v),
        Scenario::HwQueue => hw_queue(v),
        Scenario::ThreeWriters => three_writers(),
        Scenario::FlipCounter => flip_counter(v),
    }
}

fn adversary(args: &SimulateArgs, seed: u64) -> Result<Box<dyn Adversary>, CliError> {
    let class = match args.class {
        ClassArg::Oblivious => AdversaryClass::Oblivious,
        ClassArg::Weak => AdversaryClass::Weak,
        ClassArg::Strong => AdversaryClass::Strong,
    };
    let script: Option<ScheduleScript> = match (args.adversary, args.scenario) {
        (AdversaryArg::RoundRobin, _) => return Ok(Box::new(RoundRobin::new(class))),
        (AdversaryArg::Random, _) => return Ok(Box::new(SeededRandom::new(class, seed))),
        (AdversaryArg::WeakScript, Scenario::Snapshot) => Some(snapshot_weak_script()),
        (AdversaryArg::StrongScript, Scenario::Snapshot) => Some(snapshot_strong_script()),
        (AdversaryArg::Oblivious, Scenario::Srsw) => {
            Some(ScheduleScript::oblivious(srsw_oblivious_schedule()))
        }
        (AdversaryArg::WeakScript, Scenario::Mrsw) => Some(mrsw_weak_script()),
        (AdversaryArg::WeakScript, Scenario::HwQueue) => Some(hw_weak_script()),
        (AdversaryArg::StrongScript, Scenario::HwQueue) => Some(hw_strong_script()),
        _ => None,
    };
    script
        .map(|s| Box::new(s) as Box<dyn Adversary>)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "no {} schedule for scenario {}",
                args.adversary
                    .to_possible_value()
                    .expect("no skipped variants")
                    .get_name(),
                args.scenario
                    .to_possible_value()
                    .expect("no skipped variants")
                    .get_name(),
            ))
        })
}
