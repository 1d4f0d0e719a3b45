//! Exact game values over every adversary of a class.
//!
//! The game tree alternates adversary choices (which live process to grant)
//! with chance nodes (a uniformly random flip outcome). Leaves are complete
//! runs in which every process has halted.

use std::sync::Arc;

use num_rational::Rational64;

use crate::adversary::AdversaryClass;
use crate::algorithm::AlgorithmSpec;
use crate::sim::{CoinSource, RunRecord, Simulation};
use crate::EngineError;

pub trait Objective {
    type Value;
    fn leaf(&self, rec: &RunRecord) -> Self::Value;
    /// The adversary picks among its options.
    fn decide(&self, options: Vec<Self::Value>) -> Self::Value;
    /// Nature draws uniformly among the outcomes.
    fn chance(&self, outcomes: Vec<Self::Value>) -> Self::Value;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Optimal expected payoff.
pub struct Expectation<F> {
    pub direction: Direction,
    pub payoff: F,
}

impl<F: Fn(&RunRecord) -> Rational64> Expectation<F> {
    pub fn min(payoff: F) -> Self {
        Expectation {
            direction: Direction::Minimize,
            payoff,
        }
    }

    pub fn max(payoff: F) -> Self {
        Expectation {
            direction: Direction::Maximize,
            payoff,
        }
    }
}

impl<F: Fn(&RunRecord) -> Rational64> Objective for Expectation<F> {
    type Value = Rational64;

    fn leaf(&self, rec: &RunRecord) -> Rational64 {
        (self.payoff)(rec)
    }

    fn decide(&self, options: Vec<Rational64>) -> Rational64 {
        let it = options.into_iter();
        match self.direction {
            Direction::Minimize => it.min(),
            Direction::Maximize => it.max(),
        }
        .expect("a live configuration has an enabled process")
    }

    fn chance(&self, outcomes: Vec<Rational64>) -> Rational64 {
        let n = outcomes.len() as i64;
        outcomes.into_iter().sum::<Rational64>() / n
    }
}

/// Whether some adversary makes `accept` hold on every coin outcome.
pub struct Producible<F> {
    pub accept: F,
}

impl<F: Fn(&RunRecord) -> bool> Objective for Producible<F> {
    type Value = bool;

    fn leaf(&self, rec: &RunRecord) -> bool {
        (self.accept)(rec)
    }

    fn decide(&self, options: Vec<bool>) -> bool {
        options.into_iter().any(|b| b)
    }

    fn chance(&self, outcomes: Vec<bool>) -> bool {
        outcomes.into_iter().all(|b| b)
    }
}

struct Solver<'o, O> {
    objective: &'o O,
    omega: Vec<slin_history::Value>,
    nodes: usize,
    limit: usize,
}

impl<O: Objective> Solver<'_, O> {
    fn node(&mut self, sim: &Simulation) -> Result<O::Value, EngineError> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(EngineError::TooLarge(format!(
                "game tree exceeds {} nodes",
                self.limit
            )));
        }
        if sim.all_halted() {
            return Ok(self.objective.leaf(&sim.record()));
        }
        let mut options = Vec::new();
        for p in sim.enabled() {
            options.push(self.grant(sim, p)?);
        }
        Ok(self.objective.decide(options))
    }

    fn grant(
        &mut self,
        sim: &Simulation,
        p: slin_history::ProcessId,
    ) -> Result<O::Value, EngineError> {
        let mut child = sim.clone();
        match child.grant(p) {
            Ok(()) => self.node(&child),
            Err(EngineError::CoinsExhausted { .. }) => {
                let mut outcomes = Vec::new();
                for c in self.omega.clone() {
                    let mut s = sim.clone();
                    s.push_coin(c);
                    outcomes.push(self.grant(&s, p)?);
                }
                Ok(self.objective.chance(outcomes))
            }
            Err(e) => Err(e),
        }
    }
}

/// Solves the game for `alg` against strong or weak adversaries, visiting at
/// most `limit` nodes.
pub fn solve<O: Objective>(
    alg: &AlgorithmSpec,
    class: AdversaryClass,
    objective: &O,
    limit: usize,
) -> Result<O::Value, EngineError> {
    if !matches!(class, AdversaryClass::Strong | AdversaryClass::Weak) {
        return Err(EngineError::UnsupportedClass(class));
    }
    let sim = Simulation::from_shared(Arc::new(alg.clone()), class, CoinSource::Vector(Vec::new()));
    let mut solver = Solver {
        objective,
        omega: alg.omega.clone(),
        nodes: 0,
        limit,
    };
    solver.node(&sim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::{process, straight_line, ObjectDecl, Stmt};
    use slin_history::{SeqSpec, Value};

    /// p flips and writes the outcome; q reads.
    fn flip_then_write() -> AlgorithmSpec {
        AlgorithmSpec {
            processes: vec![
                process(
                    "p",
                    straight_line(vec![
                        Stmt::Flip,
                        Stmt::call_with(0, "write", |r| vec![r[0].clone()]),
                    ]),
                ),
                process("q", straight_line(vec![Stmt::call(0, "read", vec![])])),
            ],
            objects: vec![ObjectDecl::atomic(
                "R",
                SeqSpec::Register { initial: 0.into() },
            )],
            omega: vec![0.into(), 1.into()],
        }
    }

    fn q_reads(rec: &RunRecord) -> Rational64 {
        Rational64::from_integer(rec.returned(1).and_then(Value::as_int).unwrap())
    }

    #[test]
    fn small_game_values() {
        let alg = flip_then_write();
        let strong = solve(
            &alg,
            AdversaryClass::Strong,
            &Expectation::max(q_reads),
            10_000,
        )
        .unwrap();
        assert_eq!(strong, Rational64::new(1, 2));
        let weak = solve(
            &alg,
            AdversaryClass::Weak,
            &Expectation::max(q_reads),
            10_000,
        )
        .unwrap();
        assert_eq!(weak, Rational64::new(1, 2));
        let always_one = Producible {
            accept: |r: &RunRecord| r.returned(1) == Some(&Value::Int(1)),
        };
        assert!(!solve(&alg, AdversaryClass::Strong, &always_one, 10_000).unwrap());
        let read_zero = Producible {
            accept: |r: &RunRecord| r.returned(1) == Some(&Value::Int(0)),
        };
        assert!(solve(&alg, AdversaryClass::Strong, &read_zero, 10_000).unwrap());
    }

    #[test]
    fn oblivious_is_rejected() {
        let alg = flip_then_write();
        assert_eq!(
            solve(
                &alg,
                AdversaryClass::Oblivious,
                &Expectation::max(q_reads),
                10
            ),
            Err(EngineError::UnsupportedClass(AdversaryClass::Oblivious))
        );
    }
}
