//! Timed executions: histories whose steps carry real-valued times.

use num_rational::Rational64;

use crate::error::HistoryError;
use crate::history::{History, StepRecord};

pub type Time = Rational64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedExecution {
    pub pairs: Vec<(StepRecord, Time)>,
    pub registry: History,
}

impl TimedExecution {
    /// Builds a timed execution after checking the timing invariants.
    pub fn new(h: &History, times: Vec<Time>) -> Result<Self, HistoryError> {
        if times.len() != h.steps.len() {
            return Err(HistoryError::BadTiming(format!(
                "{} steps but {} times",
                h.steps.len(),
                times.len()
            )));
        }
        for i in 1..times.len() {
            if times[i] < times[i - 1] {
                return Err(HistoryError::BadTiming(format!(
                    "time decreases at step {i}"
                )));
            }
            if times[i] == times[i - 1] {
                let (a, b) = (&h.steps[i - 1], &h.steps[i]);
                let matched = a.is_inv()
                    && b.is_rsp()
                    && a.process == b.process
                    && a.object == b.object
                    && a.op == b.op;
                if !matched {
                    return Err(HistoryError::BadTiming(format!(
                        "steps {} and {i} share a time but are not an atomic pair",
                        i - 1
                    )));
                }
            }
        }
        Ok(TimedExecution {
            pairs: h.steps.iter().cloned().zip(times).collect(),
            registry: h.empty_like(),
        })
    }

    /// The i-th step at time i.
    pub fn from_history(h: &History) -> Self {
        TimedExecution {
            pairs: h
                .steps
                .iter()
                .enumerate()
                .map(|(i, s)| (s.clone(), Time::from_integer(i as i64)))
                .collect(),
            registry: h.empty_like(),
        }
    }

    /// H(E).
    pub fn history(&self) -> History {
        let mut h = self.registry.empty_like();
        for (s, _) in &self.pairs {
            h.push_step(s.clone());
        }
        h
    }

    pub fn time(&self, index: usize) -> Time {
        self.pairs[index].1
    }

    /// The first step time strictly after `t`, if any.
    pub fn next_time_after(&self, t: Time) -> Option<Time> {
        self.pairs.iter().map(|(_, u)| *u).find(|u| *u > t)
    }

    pub fn prefix(&self, len: usize) -> TimedExecution {
        TimedExecution {
            pairs: self.pairs[..len.min(self.pairs.len())].to_vec(),
            registry: self.registry.clone(),
        }
    }
}

/// Shorthand used throughout: `timed_from_history(h)` pairs step i with time i.
pub fn timed_from_history(h: &History) -> TimedExecution {
    TimedExecution::from_history(h)
}
