//! Rely-guarantee reference types over the naturals.
//!
//! A reference type `ref{N | pred}[rely, guarantee]` refines its referent
//! with a predicate, constrains what aliases may do to it (the rely), and
//! constrains what this reference may be used for (the guarantee).
//! Predicates and relations come from a closed catalog so containment and
//! stability are decidable symbolically; a bounded-enumeration oracle backs
//! every entry of the symbolic tables.

pub mod algebra;
pub mod decls;
pub mod oracle;

use std::fmt;
use thiserror::Error;

/// Refinement predicates: decidable subsets of the naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pred {
    /// `> k`
    GtK(u64),
    /// `>= k`
    GeK(u64),
    /// `< k` (empty when k = 0)
    LtK(u64),
    /// `<= k`
    LeK(u64),
    /// `= k`
    EqK(u64),
    Even,
    Odd,
    /// the trivial predicate
    TrueP,
}

impl Pred {
    pub fn holds(self, n: u64) -> bool {
        match self {
            Pred::GtK(k) => n > k,
            Pred::GeK(k) => n >= k,
            Pred::LtK(k) => n < k,
            Pred::LeK(k) => n <= k,
            Pred::EqK(k) => n == k,
            Pred::Even => n % 2 == 0,
            Pred::Odd => n % 2 == 1,
            Pred::TrueP => true,
        }
    }

    /// No natural satisfies the predicate.
    pub fn is_empty(self) -> bool {
        matches!(self, Pred::LtK(0))
    }

    /// Every natural satisfies the predicate.
    pub fn is_full(self) -> bool {
        matches!(self, Pred::TrueP | Pred::GeK(0))
    }

    /// Closed upwards: n in P and m >= n imply m in P.
    pub fn is_up_closed(self) -> bool {
        matches!(self, Pred::GtK(_) | Pred::GeK(_) | Pred::TrueP) || self.is_empty()
    }

    /// Closed downwards: n in P and m <= n imply m in P.
    pub fn is_down_closed(self) -> bool {
        matches!(self, Pred::LtK(_) | Pred::LeK(_) | Pred::TrueP | Pred::GeK(0) | Pred::EqK(0))
    }

    /// Parse `>5`, `>=5`, `<5`, `<=5`, `=5`, `even`, `odd`, `true`.
    pub fn parse(text: &str) -> Result<Pred, CatalogParseError> {
        let text = text.trim();
        let num = |s: &str| -> Result<u64, CatalogParseError> {
            s.trim().parse().map_err(|_| CatalogParseError::bad_pred(text))
        };
        Ok(match text {
            "even" => Pred::Even,
            "odd" => Pred::Odd,
            "true" => Pred::TrueP,
            _ if text.starts_with(">=") => Pred::GeK(num(&text[2..])?),
            _ if text.starts_with("<=") => Pred::LeK(num(&text[2..])?),
            _ if text.starts_with('>') => Pred::GtK(num(&text[1..])?),
            _ if text.starts_with('<') => Pred::LtK(num(&text[1..])?),
            _ if text.starts_with('=') => Pred::EqK(num(&text[1..])?),
            _ => return Err(CatalogParseError::bad_pred(text)),
        })
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::GtK(k) => write!(f, ">{k}"),
            Pred::GeK(k) => write!(f, ">={k}"),
            Pred::LtK(k) => write!(f, "<{k}"),
            Pred::LeK(k) => write!(f, "<={k}"),
            Pred::EqK(k) => write!(f, "={k}"),
            Pred::Even => write!(f, "even"),
            Pred::Odd => write!(f, "odd"),
            Pred::TrueP => write!(f, "true"),
        }
    }
}

/// Binary relations on the naturals, read as (old value, new value). Every
/// catalog relation is nonempty, so guarantees are never vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    /// `=` — non-modifying writes only
    Eq,
    /// `<=` — the value may grow
    Le,
    /// `>=` — the value may shrink
    Ge,
    /// `<` — strict growth
    Lt,
    /// `>` — strict shrinkage
    Gt,
    /// unrestricted modification
    Any,
    /// increment by exactly k
    IncBy(u64),
}

impl Rel {
    pub fn holds(self, old: u64, new: u64) -> bool {
        match self {
            Rel::Eq => old == new,
            Rel::Le => old <= new,
            Rel::Ge => old >= new,
            Rel::Lt => old < new,
            Rel::Gt => old > new,
            Rel::Any => true,
            Rel::IncBy(k) => new == old.saturating_add(k) && old.checked_add(k).is_some(),
        }
    }

    /// Catalog relations are all inhabited.
    pub fn is_empty(self) -> bool {
        false
    }

    /// Parse `=`, `<=`, `>=`, `<`, `>`, `any`, `+k`.
    pub fn parse(text: &str) -> Result<Rel, CatalogParseError> {
        let text = text.trim();
        Ok(match text {
            "=" => Rel::Eq,
            "<=" => Rel::Le,
            ">=" => Rel::Ge,
            "<" => Rel::Lt,
            ">" => Rel::Gt,
            "any" => Rel::Any,
            _ if text.starts_with('+') => Rel::IncBy(
                text[1..].trim().parse().map_err(|_| CatalogParseError::bad_rel(text))?,
            ),
            _ => return Err(CatalogParseError::bad_rel(text)),
        })
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rel::Eq => write!(f, "="),
            Rel::Le => write!(f, "<="),
            Rel::Ge => write!(f, ">="),
            Rel::Lt => write!(f, "<"),
            Rel::Gt => write!(f, ">"),
            Rel::Any => write!(f, "any"),
            Rel::IncBy(k) => write!(f, "+{k}"),
        }
    }
}

/// `ref{N | pred}[rely, guarantee]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RGRefType {
    pub pred: Pred,
    pub rely: Rel,
    pub guarantee: Rel,
}

impl RGRefType {
    pub fn new(pred: Pred, rely: Rel, guarantee: Rel) -> Self {
        RGRefType { pred, rely, guarantee }
    }

    /// Parse `ref{>5}[<=,=]`.
    pub fn parse(text: &str) -> Result<RGRefType, CatalogParseError> {
        let text = text.trim();
        let rest = text.strip_prefix("ref{").ok_or_else(|| CatalogParseError::bad_type(text))?;
        let (pred_text, rest) =
            rest.split_once('}').ok_or_else(|| CatalogParseError::bad_type(text))?;
        let rest = rest.trim();
        let inner = rest
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| CatalogParseError::bad_type(text))?;
        let (rely_text, guar_text) =
            inner.split_once(',').ok_or_else(|| CatalogParseError::bad_type(text))?;
        Ok(RGRefType {
            pred: Pred::parse(pred_text)?,
            rely: Rel::parse(rely_text)?,
            guarantee: Rel::parse(guar_text)?,
        })
    }
}

impl fmt::Display for RGRefType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ref{{{}}}[{},{}]", self.pred, self.rely, self.guarantee)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("cannot parse {what} `{text}`")]
pub struct CatalogParseError {
    pub what: &'static str,
    pub text: String,
}

impl CatalogParseError {
    fn bad_pred(text: &str) -> Self {
        CatalogParseError { what: "predicate", text: text.to_string() }
    }
    fn bad_rel(text: &str) -> Self {
        CatalogParseError { what: "relation", text: text.to_string() }
    }
    fn bad_type(text: &str) -> Self {
        CatalogParseError { what: "reference type", text: text.to_string() }
    }
}

/// Every catalog relation with increment constants up to `max_k`.
pub fn all_rels(max_k: u64) -> Vec<Rel> {
    let mut rels = vec![Rel::Eq, Rel::Le, Rel::Ge, Rel::Lt, Rel::Gt, Rel::Any];
    rels.extend((0..=max_k).map(Rel::IncBy));
    rels
}

/// Every catalog predicate with threshold constants up to `max_k`.
pub fn all_preds(max_k: u64) -> Vec<Pred> {
    let mut preds = vec![Pred::Even, Pred::Odd, Pred::TrueP];
    for k in 0..=max_k {
        preds.extend([Pred::GtK(k), Pred::GeK(k), Pred::LtK(k), Pred::LeK(k), Pred::EqK(k)]);
    }
    preds
}

pub use algebra::{pred_stable, rel_contains, split_check, split_check_explain, well_formed, write_check};
pub use decls::{run_decls, RgStmtVerdict};
pub use oracle::{
    pred_stable_bounded, rel_contains_bounded, union_contained_bounded, DEFAULT_BOUND,
    MAX_CATALOG_CONSTANT,
};
