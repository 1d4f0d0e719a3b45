//! Expected values of every checked claim, each with its citation.
//!
//! Reports take their expectations from this table only.

use num_rational::Rational64;

/// What a claim asserts about a measured quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    /// Equal to this rational.
    Exact(Rational64),
    /// At most this rational.
    AtMost(Rational64),
    /// Mean at most `(K_max − 1)/√n`, allowing three CI half-widths.
    PhiAtMostBound,
    /// Lower end of the 95% interval strictly above `(K_max − 1)/√n`.
    PhiAboveBound,
    /// Means strictly increase with n.
    Increasing,
    /// A count that must be zero.
    Zero,
    /// A decision that must come out true.
    True,
    /// A decision that must come out false.
    False,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Claim {
    pub bound: Bound,
    pub citation: &'static str,
}

const fn exact(n: i64, d: i64, citation: &'static str) -> Claim {
    Claim {
        bound: Bound::Exact(Rational64::new_raw(n, d)),
        citation,
    }
}

pub const SNAPSHOT_ATOMIC_STRONG: Claim = exact(
    -1,
    1,
    "snapshot example: atomic snapshot, best strong adversary minimizing the sum in p's scan",
);
pub const SNAPSHOT_ATOMIC_WEAK: Claim = exact(
    0,
    1,
    "snapshot example: atomic snapshot, the sum in p's scan has expectation 0 under a weak adversary",
);
pub const SNAPSHOT_IMPLEMENTED_WEAK: Claim = exact(
    -2,
    1,
    "snapshot example: double-collect snapshot under the scripted weak schedule",
);
pub const SRSW_ATOMIC_STRONG: Claim = exact(
    1,
    1,
    "multivalued register example: atomic register, the reader returns 1 in expectation",
);
pub const SRSW_IMPLEMENTED_OBLIVIOUS: Claim = exact(
    1,
    2,
    "multivalued register example: unary-array register under the oblivious schedule returns 1/2",
);
pub const MRSW_ATOMIC_STRONG: Claim = exact(
    0,
    1,
    "multi-reader register example: atomic register, r1 returns 0 in expectation",
);
pub const MRSW_IMPLEMENTED_WEAK: Claim = exact(
    -1,
    2,
    "multi-reader register example: sequence-number register under the weak schedule, r1 returns -1/2",
);
pub const HW_IMPLEMENTED_WEAK: Claim = exact(
    1,
    1,
    "queue example: the weak adversary meets (a), (b) and (c) with probability 1 on the array queue",
);
pub const HW_ATOMIC_STRONG: Claim = Claim {
    bound: Bound::AtMost(Rational64::new_raw(1, 2)),
    citation: "queue example: on an atomic queue the first dequeue returns the flip with probability at most 1/2",
};
pub const PHI_ATOMIC: Claim = Claim {
    bound: Bound::PhiAtMostBound,
    citation: "load balancing with atomic counters: Phi(A) <= (K_max-1)/sqrt(n) for every weak adversary A",
};
pub const PHI_IMPLEMENTED: Claim = Claim {
    bound: Bound::PhiAboveBound,
    citation: "load balancing with implemented counters: some weak adversary forces Phi(A) = Omega(sqrt(n))",
};
pub const PHI_GROWTH: Claim = Claim {
    bound: Bound::Increasing,
    citation: "load balancing with implemented counters: Phi grows with sqrt(n)",
};
pub const AP_PHASE_ONE: Claim = Claim {
    bound: Bound::Zero,
    citation: "adversary A_p: every process of P_i* made one shared access, all others halted",
};
pub const AP_CONTENTION: Claim = Claim {
    bound: Bound::Zero,
    citation: "adversary A_p: point contention never exceeds |P_i*| + 1",
};
pub const LB_HELPER: Claim = Claim {
    bound: Bound::Zero,
    citation: "adversary A_p: p's fetch&inc returns at least |P|",
};
pub const MUTEX_WITNESS: Claim = Claim {
    bound: Bound::True,
    citation: "a lock around a sequential object is strongly linearizable",
};
pub const HW_NO_WITNESS: Claim = Claim {
    bound: Bound::False,
    citation: "the array queue has no strong linearization even with atomic dequeues",
};
pub const EXAMPLE_WITNESS: Claim = Claim {
    bound: Bound::True,
    citation:
        "three-writer example: the fixed leaf linearizations extend to a strong linearization",
};
pub const EXAMPLE_NOT_PRODUCIBLE: Claim = Claim {
    bound: Bound::False,
    citation: "three-writer example: the fixed leaf linearizations cannot both come from one strong adversary",
};
pub const EXAMPLE_NORMALIZED: Claim = Claim {
    bound: Bound::True,
    citation:
        "three-writer example: normalization puts r's flip right after r's write in both branches",
};
pub const NORMAL_FORM_EXISTS: Claim = Claim {
    bound: Bound::True,
    citation: "every strongly linearizable set has a normalized strong linearization function",
};
