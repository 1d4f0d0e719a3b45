//! Experiment reports and their JSON and CSV renderings.

use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use crate::expected::{Bound, Claim};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The measurement could not be completed (budget exhausted).
    Inconclusive,
    /// Reported for reference; no claim is checked.
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Info => "info",
        })
    }
}

/// One measured quantity. Column order is the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub variant: String,
    pub metric: String,
    pub value: String,
    pub ci95: Option<f64>,
    pub expected: String,
    pub citation: String,
    pub verdict: Verdict,
}

/// Settings echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub trials: usize,
    pub n: Option<usize>,
    pub delta: f64,
    pub budget: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: ConfigEcho,
    pub rows: Vec<Row>,
}

pub fn fmt_rational(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.6}")
}

/// Human-readable form of a claim's expectation.
pub fn describe(claim: &Claim) -> String {
    match claim.bound {
        Bound::Exact(r) => fmt_rational(r),
        Bound::AtMost(r) => format!("<= {}", fmt_rational(r)),
        Bound::PhiAtMostBound => "<= (K_max-1)/sqrt(n) + 3*ci95".into(),
        Bound::PhiAboveBound => "mean - ci95 > (K_max-1)/sqrt(n)".into(),
        Bound::Increasing => "increasing in n".into(),
        Bound::Zero => "0".into(),
        Bound::True => "true".into(),
        Bound::False => "false".into(),
    }
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| matches!(r.verdict, Verdict::Pass | Verdict::Info))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
    }
}

impl Row {
    /// A row checked against `claim`, with its verdict supplied.
    pub fn checked(
        experiment: &str,
        variant: &str,
        metric: &str,
        value: String,
        claim: &Claim,
        verdict: Verdict,
    ) -> Row {
        Row {
            experiment: experiment.into(),
            variant: variant.into(),
            metric: metric.into(),
            value,
            ci95: None,
            expected: describe(claim),
            citation: claim.citation.into(),
            verdict,
        }
    }

    /// An exactly computed value compared with `claim`.
    pub fn exact(
        experiment: &str,
        variant: &str,
        metric: &str,
        value: Rational64,
        claim: &Claim,
    ) -> Row {
        let ok = match claim.bound {
            Bound::Exact(r) => value == r,
            Bound::AtMost(r) => value <= r,
            _ => false,
        };
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        Row::checked(
            experiment,
            variant,
            metric,
            fmt_rational(value),
            claim,
            verdict,
        )
    }

    /// A boolean decision compared with `claim`.
    pub fn decision(
        experiment: &str,
        variant: &str,
        metric: &str,
        value: bool,
        claim: &Claim,
    ) -> Row {
        let ok = match claim.bound {
            Bound::True => value,
            Bound::False => !value,
            _ => false,
        };
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        Row::checked(
            experiment,
            variant,
            metric,
            value.to_string(),
            claim,
            verdict,
        )
    }

    /// A value reported without a claim.
    pub fn info(experiment: &str, variant: &str, metric: &str, value: String) -> Row {
        Row {
            experiment: experiment.into(),
            variant: variant.into(),
            metric: metric.into(),
            value,
            ci95: None,
            expected: String::new(),
            citation: String::new(),
            verdict: Verdict::Info,
        }
    }
}
