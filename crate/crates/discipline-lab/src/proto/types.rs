//! Split object types for the prototype calculus.
//!
//! The physical half of a type is a pair of rows `{r | w}`: `r` holds
//! definitely-present but possibly-inherited fields (safe to read), `w`
//! holds definitely-local fields (safe to write). Prototypal types carry a
//! second pair `{mr | mw}` bounding what any attached method may read or
//! write. A type is concrete (tagged `NC`) once the method-accessed rows
//! have been checked against the physical rows and discarded.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Finite map from field names to field types, iterated in sorted order.
pub type Row = BTreeMap<String, FieldType>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldType {
    Number,
    Method(MethodType),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodType {
    pub params: Vec<FieldType>,
    /// `None` is the unit-like "no value" return.
    pub ret: Option<Box<FieldType>>,
    /// Receiver fields the method may write; present only in the
    /// effect-variant checker.
    pub wr_eff: Option<BTreeSet<String>>,
}

impl MethodType {
    pub fn new(params: Vec<FieldType>, ret: Option<FieldType>) -> Self {
        MethodType { params, ret: ret.map(Box::new), wr_eff: None }
    }

    pub fn with_effect(params: Vec<FieldType>, ret: Option<FieldType>, writes: BTreeSet<String>) -> Self {
        MethodType { params, ret: ret.map(Box::new), wr_eff: Some(writes) }
    }
}

impl FieldType {
    pub fn method(params: Vec<FieldType>, ret: Option<FieldType>) -> Self {
        FieldType::Method(MethodType::new(params, ret))
    }

    pub fn as_method(&self) -> Option<&MethodType> {
        match self {
            FieldType::Method(m) => Some(m),
            FieldType::Number => None,
        }
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldType::Number => write!(f, "number"),
            FieldType::Method(m) => {
                write!(f, "(")?;
                for (i, p) in m.params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")?;
                if let Some(eff) = &m.wr_eff {
                    let names: Vec<&str> = eff.iter().map(String::as_str).collect();
                    write!(f, " -[{}]->", names.join(","))?;
                } else {
                    write!(f, " ->")?;
                }
                match &m.ret {
                    Some(r) => write!(f, " {r}"),
                    None => write!(f, " ()"),
                }
            }
        }
    }
}

/// Depth subtyping on field types: numbers are invariant; method types are
/// invariant in their parameters, covariant in the return, and covariant in
/// the write-effect set (a supertype may claim more writes).
pub fn field_subtype(a: &FieldType, b: &FieldType) -> bool {
    match (a, b) {
        (FieldType::Number, FieldType::Number) => true,
        (FieldType::Method(ma), FieldType::Method(mb)) => {
            ma.params == mb.params
                && match (&ma.ret, &mb.ret) {
                    (None, None) => true,
                    (Some(ra), Some(rb)) => field_subtype(ra, rb),
                    _ => false,
                }
                && match (&ma.wr_eff, &mb.wr_eff) {
                    (None, None) => true,
                    (Some(ea), Some(eb)) => ea.is_subset(eb),
                    _ => false,
                }
        }
        _ => false,
    }
}

/// Method-accessed rows of a prototypal type.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MAcc {
    /// Fields some method may read but no method writes.
    pub mr: Row,
    /// Fields some method may write.
    pub mw: Row,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjType {
    pub r: Row,
    pub w: Row,
    pub m_acc: Option<MAcc>,
    pub concrete: bool,
}

impl ObjType {
    /// A concrete (`NC`) type: the method-access check already succeeded.
    pub fn concrete(r: Row, w: Row) -> Self {
        let t = ObjType { r, w, m_acc: None, concrete: true };
        debug_assert!(t.validate().is_ok(), "{:?}", t.validate());
        t
    }

    /// A prototypal type carrying its method-accessed rows.
    pub fn prototypal(r: Row, w: Row, mr: Row, mw: Row) -> Self {
        let t = ObjType { r, w, m_acc: Some(MAcc { mr, mw }), concrete: false };
        debug_assert!(t.validate().is_ok(), "{:?}", t.validate());
        t
    }

    pub fn is_prototypal(&self) -> bool {
        self.m_acc.is_some()
    }

    /// Structural invariants: `r` and `w` are disjoint; a concrete type
    /// carries no method-accessed rows; method-accessed rows imply
    /// non-concrete.
    pub fn validate(&self) -> Result<(), String> {
        if let Some(name) = self.r.keys().find(|n| self.w.contains_key(*n)) {
            return Err(format!("field `{name}` appears in both r and w"));
        }
        if self.concrete && self.m_acc.is_some() {
            return Err("concrete types carry no method-accessed rows".to_string());
        }
        if self.m_acc.is_some() && self.concrete {
            return Err("prototypal types are not concrete".to_string());
        }
        Ok(())
    }

    /// Look a field up across both physical rows.
    pub fn physical(&self, name: &str) -> Option<&FieldType> {
        self.w.get(name).or_else(|| self.r.get(name))
    }
}

impl fmt::Display for ObjType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |row: &Row| -> String {
            if row.is_empty() {
                "-".to_string()
            } else {
                row.iter().map(|(n, t)| format!("{n}: {t}")).collect::<Vec<_>>().join(", ")
            }
        };
        write!(f, "{{{} | {}", row(&self.r), row(&self.w))?;
        if let Some(macc) = &self.m_acc {
            write!(f, " | {} | {}", row(&macc.mr), row(&macc.mw))?;
        }
        write!(f, "}}")?;
        if self.concrete {
            write!(f, "^NC")?;
        }
        Ok(())
    }
}

/// Convenience constructor for rows.
pub fn row(entries: &[(&str, FieldType)]) -> Row {
    entries.iter().map(|(n, t)| (n.to_string(), t.clone())).collect()
}
