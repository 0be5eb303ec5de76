//! Qualifier ordering and viewpoint adaptation.
//!
//! The subqualifier relation is the reflexive-transitive closure of
//! `immutable <= readable`, `writable <= readable`, `isolated <= writable`.
//! `readable` is the top; `isolated` and `immutable` are unrelated.

use crate::kernel::Qualifier;

/// Generator pairs (a, b) meaning a <= b. The full relation is their
/// reflexive-transitive closure.
pub const GENERATOR_PAIRS: [(Qualifier, Qualifier); 3] = [
    (Qualifier::Immutable, Qualifier::Readable),
    (Qualifier::Writable, Qualifier::Readable),
    (Qualifier::Isolated, Qualifier::Writable),
];

/// True iff `a <= b` in the qualifier order.
pub fn sub_qualifier(a: Qualifier, b: Qualifier) -> bool {
    use Qualifier::*;
    match (a, b) {
        _ if a == b => true,
        (_, Readable) => true,
        (Isolated, Writable) => true,
        _ => false,
    }
}

/// Viewpoint adaptation: the qualifier of `base.f` given the base reference
/// qualifier and the field's declared qualifier. Reading through an
/// isolated base is not permitted; bind (consume) the isolated reference
/// first.
pub fn adapt_field(base: Qualifier, declared: Qualifier) -> Result<Qualifier, IsolatedBaseRead> {
    use Qualifier::*;
    match (base, declared) {
        (Isolated, _) => Err(IsolatedBaseRead),
        (Immutable, _) => Ok(Immutable),
        (_, Immutable) => Ok(Immutable),
        (Readable, _) => Ok(Readable),
        (Writable, d) => Ok(d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsolatedBaseRead;

#[cfg(test)]
mod tests {
    use super::*;
    use Qualifier::*;

    #[test]
    fn immutable_below_readable() {
        assert!(sub_qualifier(Immutable, Readable));
    }

    #[test]
    fn readable_grants_no_write() {
        assert!(!sub_qualifier(Readable, Writable));
    }

    #[test]
    fn isolated_not_below_immutable() {
        assert!(!sub_qualifier(Isolated, Immutable));
        assert!(!sub_qualifier(Immutable, Isolated));
    }

    /// Floyd–Warshall closure of the generator pairs over the four-element
    /// set; the hand-written relation must match it exactly.
    #[test]
    fn relation_equals_closure_oracle() {
        let elems = Qualifier::ALL;
        let idx = |q: Qualifier| elems.iter().position(|&e| e == q).unwrap();
        let mut reach = [[false; 4]; 4];
        for (i, _) in elems.iter().enumerate() {
            reach[i][i] = true;
        }
        for (a, b) in GENERATOR_PAIRS {
            reach[idx(a)][idx(b)] = true;
        }
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        for &a in &elems {
            for &b in &elems {
                assert_eq!(
                    sub_qualifier(a, b),
                    reach[idx(a)][idx(b)],
                    "mismatch at ({a}, {b})"
                );
            }
        }
        // antisymmetry
        for &a in &elems {
            for &b in &elems {
                if a != b {
                    assert!(!(sub_qualifier(a, b) && sub_qualifier(b, a)));
                }
            }
        }
    }

    #[test]
    fn adaptation_examples() {
        assert_eq!(adapt_field(Readable, Writable), Ok(Readable));
        assert_eq!(adapt_field(Immutable, Writable), Ok(Immutable));
        assert_eq!(adapt_field(Writable, Writable), Ok(Writable));
        assert_eq!(adapt_field(Readable, Immutable), Ok(Immutable));
        assert_eq!(adapt_field(Isolated, Readable), Err(IsolatedBaseRead));
    }
}
