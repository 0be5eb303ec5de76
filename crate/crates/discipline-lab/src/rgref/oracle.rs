//! Brute-force enumeration over a bounded domain, used to validate the
//! symbolic tables entry by entry.
//!
//! Why a bound of 64 suffices for catalog constants capped at 32: every
//! catalog predicate and relation is defined by order or affine constraints
//! with a single constant `k <= 32`. A containment or stability claim that
//! fails over the naturals fails on a concrete witness pair `(a, b)`, and
//! for each false claim a minimal witness exists with both coordinates at
//! most `k + k' <= 64`: order relations have witnesses within one step of
//! a threshold (e.g. `(k, 0)`, `(k, k + 1)`, `(0, 1)`), and `+k` relations
//! shift a threshold witness by at most 32 (e.g. `(k' - 1, k' - 1 + k)`
//! with `k' - 1 + k <= 31 + 32 < 64`). Conversely a claim true over the
//! naturals is true on every bounded subdomain. Hence symbolic and bounded
//! verdicts coincide on `[0, 64]^2` for the capped catalog, and a full
//! sweep with zero mismatches validates the tables.

use super::{Pred, Rel};

/// Inclusive enumeration bound.
pub const DEFAULT_BOUND: u64 = 64;

/// Largest constant used when enumerating catalog entries in tests.
pub const MAX_CATALOG_CONSTANT: u64 = 32;

/// Containment by enumeration: every pair of `a` within the bound is a pair
/// of `b`.
pub fn rel_contains_bounded(a: Rel, b: Rel, bound: u64) -> bool {
    for x in 0..=bound {
        for y in 0..=bound {
            if a.holds(x, y) && !b.holds(x, y) {
                return false;
            }
        }
    }
    true
}

/// Stability by enumeration: no step of `r` leaves `p` within the bound.
pub fn pred_stable_bounded(p: Pred, r: Rel, bound: u64) -> bool {
    for a in 0..=bound {
        if !p.holds(a) {
            continue;
        }
        for b in 0..=bound {
            if r.holds(a, b) && !p.holds(b) {
                return false;
            }
        }
    }
    true
}

/// Union containment by enumeration.
pub fn union_contained_bounded(g1: Rel, g2: Rel, g: Rel, bound: u64) -> bool {
    for x in 0..=bound {
        for y in 0..=bound {
            if (g1.holds(x, y) || g2.holds(x, y)) && !g.holds(x, y) {
                return false;
            }
        }
    }
    true
}
