//! Adversary classes and scripted schedulers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use slin_history::{History, ProcessId, Value};

use crate::marks::MarkState;
use crate::sim::{CoinSource, ProcInfo, Simulation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryClass {
    /// Fixes the whole schedule up front.
    Oblivious,
    /// Sees everything, including flip outcomes, as they happen.
    Strong,
    /// Strong, except that a flip and the flipping process's next invocation
    /// happen in one grant.
    Weak,
    /// Sees every flip outcome in advance.
    Offline,
}

/// Execution state revealed to an observing adversary.
#[derive(Clone, Copy, Debug)]
pub struct Observed<'a> {
    pub history: &'a History,
    pub marks: &'a MarkState,
    pub procs: &'a [ProcInfo],
}

/// What an adversary knows when choosing the next grant.
#[derive(Clone, Copy, Debug)]
pub struct View<'a> {
    /// Number of grants issued so far.
    pub grant: usize,
    pub process_count: usize,
    /// `None` for oblivious adversaries.
    pub observed: Option<Observed<'a>>,
    /// The full coin source; offline adversaries only.
    pub coins: Option<&'a CoinSource>,
}

impl<'a> View<'a> {
    pub(crate) fn new(sim: &'a Simulation) -> Self {
        let class = sim.class();
        let observed = (class != AdversaryClass::Oblivious).then(|| Observed {
            history: sim.history(),
            marks: sim.marks(),
            procs: sim.procs(),
        });
        View {
            grant: sim.grants(),
            process_count: sim.process_count(),
            observed,
            coins: (class == AdversaryClass::Offline).then(|| sim.coins()),
        }
    }

    /// Panics for oblivious views.
    pub fn observed(&self) -> Observed<'a> {
        self.observed
            .expect("oblivious adversaries observe nothing")
    }

    /// Flip outcomes revealed so far, in history order.
    pub fn revealed_coins(&self) -> Vec<Value> {
        self.observed
            .map(|o| {
                o.history
                    .steps
                    .iter()
                    .filter(|s| s.is_rsp() && s.is_flip())
                    .map(|s| s.payload.clone())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn is_halted(&self, p: usize) -> bool {
        self.observed.is_some_and(|o| o.procs[p].halted)
    }
}

pub trait Adversary {
    fn class(&self) -> AdversaryClass;
    /// The next process to grant, or `None` to stop the run.
    fn next(&mut self, view: &View<'_>) -> Option<ProcessId>;
}

/// A schedule given as one grant sequence per prefix of revealed coins.
///
/// The script for the empty key runs first; once a flip outcome appears the
/// script for the extended key takes over from its start. A missing script or
/// the end of one stops the run.
#[derive(Clone, Debug)]
pub struct ScheduleScript {
    class: AdversaryClass,
    segments: BTreeMap<Vec<Value>, Vec<ProcessId>>,
    key: Vec<Value>,
    pos: usize,
}

impl ScheduleScript {
    pub fn new(class: AdversaryClass) -> Self {
        ScheduleScript {
            class,
            segments: BTreeMap::new(),
            key: Vec::new(),
            pos: 0,
        }
    }

    pub fn oblivious(schedule: Vec<u32>) -> Self {
        ScheduleScript::new(AdversaryClass::Oblivious).segment(&[], &schedule)
    }

    /// Adds the grants to issue after the coins `key` have been revealed.
    pub fn segment(mut self, key: &[Value], grants: &[u32]) -> Self {
        self.segments
            .insert(key.to_vec(), grants.iter().map(|p| ProcessId(*p)).collect());
        self
    }

    /// Like [`ScheduleScript::segment`] with `(process, repeat)` runs.
    pub fn runs(self, key: &[Value], runs: &[(u32, usize)]) -> Self {
        let grants = runs.concat_runs();
        self.segment(key, &grants)
    }
}

trait ConcatRuns {
    fn concat_runs(&self) -> Vec<u32>;
}

impl ConcatRuns for [(u32, usize)] {
    fn concat_runs(&self) -> Vec<u32> {
        self.iter()
            .flat_map(|(p, k)| std::iter::repeat_n(*p, *k))
            .collect()
    }
}

impl Adversary for ScheduleScript {
    fn class(&self) -> AdversaryClass {
        self.class
    }

    fn next(&mut self, view: &View<'_>) -> Option<ProcessId> {
        let key = view.revealed_coins();
        if key != self.key {
            self.key = key;
            self.pos = 0;
        }
        let p = *self.segments.get(&self.key)?.get(self.pos)?;
        self.pos += 1;
        Some(p)
    }
}

/// Cycles through the processes that have not halted.
#[derive(Clone, Debug)]
pub struct RoundRobin {
    class: AdversaryClass,
    last: Option<usize>,
}

impl RoundRobin {
    pub fn new(class: AdversaryClass) -> Self {
        RoundRobin { class, last: None }
    }
}

impl Adversary for RoundRobin {
    fn class(&self) -> AdversaryClass {
        self.class
    }

    fn next(&mut self, view: &View<'_>) -> Option<ProcessId> {
        let n = view.process_count;
        let start = self.last.map_or(0, |l| l + 1);
        let p = (0..n)
            .map(|k| (start + k) % n)
            .find(|p| !view.is_halted(*p))?;
        self.last = Some(p);
        Some(ProcessId(p as u32))
    }
}

/// Grants a uniformly random live process each time.
#[derive(Clone, Debug)]
pub struct SeededRandom {
    class: AdversaryClass,
    rng: ChaCha8Rng,
}

impl SeededRandom {
    pub fn new(class: AdversaryClass, seed: u64) -> Self {
        SeededRandom {
            class,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Adversary for SeededRandom {
    fn class(&self) -> AdversaryClass {
        self.class
    }

    fn next(&mut self, view: &View<'_>) -> Option<ProcessId> {
        let live: Vec<usize> = (0..view.process_count)
            .filter(|p| !view.is_halted(*p))
            .collect();
        if live.is_empty() {
            return None;
        }
        Some(ProcessId(live[self.rng.gen_range(0..live.len())] as u32))
    }
}

/// Runs processes in consecutive groups of `size`, round-robin within a group.
/// A group starts only after the previous one has halted entirely, so point
/// contention never exceeds `size`.
#[derive(Clone, Debug)]
pub struct Waves {
    class: AdversaryClass,
    size: usize,
    rr: usize,
}

impl Waves {
    pub fn new(class: AdversaryClass, size: usize) -> Self {
        Waves {
            class,
            size: size.max(1),
            rr: 0,
        }
    }
}

impl Adversary for Waves {
    fn class(&self) -> AdversaryClass {
        self.class
    }

    fn next(&mut self, view: &View<'_>) -> Option<ProcessId> {
        let n = view.process_count;
        let first_live = (0..n).find(|p| !view.is_halted(*p))?;
        let wave = first_live / self.size;
        let members: Vec<usize> = (wave * self.size..((wave + 1) * self.size).min(n))
            .filter(|p| !view.is_halted(*p))
            .collect();
        self.rr = (self.rr + 1) % members.len();
        Some(ProcessId(members[self.rr] as u32))
    }
}
