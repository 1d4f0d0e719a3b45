//! Implementations addressable by name.

use std::sync::Arc;

use slin_history::{SeqSpec, Value};

use crate::cas::cas_from_registers;
use crate::counter::{llsc_strong_counter, writefirst_strong_counter};
use crate::mrsw::vitanyi_awerbuch_mrsw;
use crate::mutex::mutex_wrapped;
use crate::queue::herlihy_wing_queue;
use crate::snapshot::aadgms_snapshot;
use crate::srsw::vidyasankar_register;
use crate::SharedImpl;

pub const CATALOG: &[&str] = &[
    "aadgms-snapshot",
    "vidyasankar-register",
    "vitanyi-awerbuch-register",
    "hw-queue",
    "llsc-counter",
    "writefirst-counter",
    "cas-from-registers",
    "mutex-counter",
    "mutex-queue",
];

/// Builds a catalog entry with default parameters; `n` is the process count
/// where one is needed.
pub fn by_name(name: &str, n: usize) -> Option<SharedImpl> {
    Some(match name {
        "aadgms-snapshot" => Arc::new(aadgms_snapshot(n.max(1))),
        "vidyasankar-register" => Arc::new(vidyasankar_register(2, 1)),
        "vitanyi-awerbuch-register" => Arc::new(vitanyi_awerbuch_mrsw(2, Value::Int(0))),
        "hw-queue" => Arc::new(herlihy_wing_queue()),
        "llsc-counter" => Arc::new(llsc_strong_counter()),
        "writefirst-counter" => Arc::new(writefirst_strong_counter(n)),
        "cas-from-registers" => Arc::new(cas_from_registers(Value::Int(0))),
        "mutex-counter" => Arc::new(mutex_wrapped(SeqSpec::StrongCounter { initial: 0 })),
        "mutex-queue" => Arc::new(mutex_wrapped(SeqSpec::Queue)),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in CATALOG {
            let imp = by_name(name, 4).unwrap();
            assert!(!imp.base_objects().is_empty(), "{name}");
        }
        assert!(by_name("nope", 1).is_none());
    }
}
