//! Symbolic containment, stability, well-formedness, splitting, and write
//! permission. Each case analysis here is exact over all of the naturals;
//! the bounded oracle re-derives every entry independently in tests.

use super::{Pred, RGRefType, Rel};

/// True iff the denotation of `a` is contained in the denotation of `b`.
pub fn rel_contains(a: Rel, b: Rel) -> bool {
    use Rel::*;
    if a == b || b == Any {
        return true;
    }
    match (a, b) {
        (Eq, Le) | (Eq, Ge) => true,
        (Eq, IncBy(j)) => j == 0,
        (IncBy(k), Eq) | (IncBy(k), Ge) => k == 0,
        (IncBy(_), Le) => true,
        (IncBy(k), Lt) => k >= 1,
        (Lt, Le) => true,
        (Gt, Ge) => true,
        _ => false,
    }
}

/// True iff `p` is preserved by every step of `r`: for all a, b with p(a)
/// and r(a, b), p(b) holds.
pub fn pred_stable(p: Pred, r: Rel) -> bool {
    if p.is_empty() {
        return true;
    }
    match r {
        Rel::Eq => true,
        Rel::IncBy(0) => true,
        Rel::Any => p.is_full(),
        Rel::Le | Rel::Lt => p.is_up_closed(),
        Rel::Ge | Rel::Gt => p.is_down_closed(),
        Rel::IncBy(k) => match p {
            Pred::GtK(_) | Pred::GeK(_) | Pred::TrueP => true,
            Pred::Even | Pred::Odd => k % 2 == 0,
            Pred::LtK(_) | Pred::LeK(_) | Pred::EqK(_) => false,
        },
    }
}

/// A reference type is well-formed when its refinement is stable under both
/// the rely and the guarantee.
pub fn well_formed(t: &RGRefType) -> bool {
    pred_stable(t.pred, t.rely) && pred_stable(t.pred, t.guarantee)
}

/// `union(a, b)` is contained in `c` exactly when both halves are.
fn union_contained(a: Rel, b: Rel, c: Rel) -> bool {
    rel_contains(a, c) && rel_contains(b, c)
}

/// The reference-splitting judgment: `t` may be split into `t1` and `t2`.
///
/// All three types are assumed well-formed. The premises:
///   - both new guarantees are nonempty and tolerated by the sibling's rely,
///   - the combined guarantees do not exceed the original guarantee,
///   - each half assumes at least the interference the original assumed.
pub fn split_check(t: &RGRefType, t1: &RGRefType, t2: &RGRefType) -> bool {
    split_check_explain(t, t1, t2).is_ok()
}

/// `split_check`, reporting the first failed premise.
pub fn split_check_explain(t: &RGRefType, t1: &RGRefType, t2: &RGRefType) -> Result<(), String> {
    if t1.guarantee.is_empty() || t2.guarantee.is_empty() {
        return Err("a split guarantee is empty".to_string());
    }
    if !rel_contains(t1.guarantee, t2.rely) {
        return Err(format!(
            "guarantee {} of the first half is not tolerated by the rely {} of the second",
            t1.guarantee, t2.rely
        ));
    }
    if !rel_contains(t2.guarantee, t1.rely) {
        return Err(format!(
            "guarantee {} of the second half is not tolerated by the rely {} of the first",
            t2.guarantee, t1.rely
        ));
    }
    if !union_contained(t1.guarantee, t2.guarantee, t.guarantee) {
        return Err(format!(
            "combined guarantees {} and {} exceed the original guarantee {}",
            t1.guarantee, t2.guarantee, t.guarantee
        ));
    }
    if !rel_contains(t.rely, t1.rely) {
        return Err(format!(
            "the first half assumes less interference ({}) than the original ({})",
            t1.rely, t.rely
        ));
    }
    if !rel_contains(t.rely, t2.rely) {
        return Err(format!(
            "the second half assumes less interference ({}) than the original ({})",
            t2.rely, t.rely
        ));
    }
    Ok(())
}

/// True iff the write `old -> new` is permitted by the guarantee. For a
/// well-formed type with `pred(old)`, a permitted write preserves the
/// predicate; tested as a property.
pub fn write_check(t: &RGRefType, old: u64, new: u64) -> bool {
    t.guarantee.holds(old, new)
}
