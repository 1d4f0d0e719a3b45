//! JSON Lines interchange: a header line with the registry, then one step per line.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::HistoryError;
use crate::history::{History, ObjectInfo, StepRecord};
use crate::value::ProcessId;

#[derive(Serialize, Deserialize)]
struct Header {
    processes: Vec<ProcessId>,
    objects: Vec<ObjectInfo>,
}

pub fn to_jsonl(h: &History) -> String {
    let header = Header {
        processes: h.processes.iter().copied().collect(),
        objects: h.objects.values().cloned().collect(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for s in &h.steps {
        out.push_str(&serde_json::to_string(s).expect("step serializes"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl(text: &str) -> Result<History, HistoryError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, first)) = lines.next() else {
        return Err(HistoryError::Malformed("missing header line".into()));
    };
    let header: Header =
        serde_json::from_str(first).map_err(|source| HistoryError::Json { line: 1, source })?;
    let mut h = History {
        steps: Vec::new(),
        processes: header.processes.into_iter().collect::<BTreeSet<_>>(),
        objects: header.objects.into_iter().map(|o| (o.id, o)).collect(),
    };
    for (i, line) in lines {
        let step: StepRecord = serde_json::from_str(line).map_err(|source| HistoryError::Json {
            line: i + 1,
            source,
        })?;
        h.steps.push(step);
    }
    h.validate()?;
    Ok(h)
}
