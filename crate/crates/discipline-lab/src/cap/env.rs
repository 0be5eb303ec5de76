//! Flow-sensitive typing contexts.

use crate::kernel::{Command, QualType, Qualifier};
use indexmap::IndexMap;
use std::collections::BTreeSet;
use std::fmt;

/// Ordered finite map from variable names to qualified types, plus the set
/// of isolated variables that have been destructively read.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeEnv {
    bindings: IndexMap<String, QualType>,
    consumed: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupError {
    Unbound,
    Consumed,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, QualType)>) -> Self {
        TypeEnv { bindings: pairs.into_iter().collect(), consumed: BTreeSet::new() }
    }

    pub fn bind(&mut self, name: impl Into<String>, ty: QualType) {
        let name = name.into();
        self.consumed.remove(&name);
        self.bindings.insert(name, ty);
    }

    /// Look up a live binding; consumed variables are unusable.
    pub fn lookup(&self, name: &str) -> Result<&QualType, LookupError> {
        match self.bindings.get(name) {
            None => Err(LookupError::Unbound),
            Some(_) if self.consumed.contains(name) => Err(LookupError::Consumed),
            Some(ty) => Ok(ty),
        }
    }

    /// The binding including a consumed one (for scope restore and env
    /// recombination).
    pub fn binding(&self, name: &str) -> Option<&QualType> {
        self.bindings.get(name)
    }

    pub fn is_bound(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn is_consumed(&self, name: &str) -> bool {
        self.consumed.contains(name)
    }

    /// Mark an isolated variable as destructively read.
    pub fn consume(&mut self, name: &str) {
        debug_assert!(self.bindings.contains_key(name));
        self.consumed.insert(name.to_string());
    }

    pub fn remove(&mut self, name: &str) -> Option<QualType> {
        self.consumed.remove(name);
        self.bindings.shift_remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &QualType)> {
        self.bindings.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.bindings.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    /// Split into (kept, rest) by a name predicate, preserving order and
    /// consumed marks.
    pub fn partition(&self, keep: impl Fn(&str) -> bool) -> (TypeEnv, TypeEnv) {
        let mut kept = TypeEnv::new();
        let mut rest = TypeEnv::new();
        for (name, ty) in &self.bindings {
            let side = if keep(name) { &mut kept } else { &mut rest };
            side.bindings.insert(name.clone(), ty.clone());
            if self.consumed.contains(name) {
                side.consumed.insert(name.clone());
            }
        }
        (kept, rest)
    }

    /// Copy one binding (with its consumed mark) into `target`.
    pub fn copy_into(&self, name: &str, target: &mut TypeEnv) {
        if let Some(ty) = self.bindings.get(name) {
            target.bindings.insert(name.to_string(), ty.clone());
            if self.consumed.contains(name) {
                target.consumed.insert(name.to_string());
            }
        }
    }

    /// Restrict to the given domain, dropping everything else.
    pub fn restricted(&self, names: &BTreeSet<String>) -> TypeEnv {
        self.partition(|n| names.contains(n)).0
    }

    /// True if the two environments agree (binding, order ignored, consumed
    /// mark) on every name in `domain`.
    pub fn agrees_on(&self, other: &TypeEnv, domain: impl IntoIterator<Item = String>) -> bool {
        domain.into_iter().all(|name| {
            self.bindings.get(&name) == other.bindings.get(&name)
                && self.consumed.contains(&name) == other.consumed.contains(&name)
        })
    }

    /// Restriction of the environment to the free variables of `c`, and the
    /// framed-away remainder.
    pub fn frame_for(&self, c: &Command) -> (TypeEnv, TypeEnv) {
        let fv = crate::kernel::free_vars(c);
        self.partition(|n| fv.contains(n))
    }

    /// Bindings violating `IsolatedOrImmutable`.
    pub fn non_isolated_or_immutable(&self) -> Vec<String> {
        self.bindings
            .iter()
            .filter(|(_, ty)| !matches!(ty.qualifier, Qualifier::Isolated | Qualifier::Immutable))
            .map(|(n, _)| n.clone())
            .collect()
    }
}

impl fmt::Display for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, ty) in &self.bindings {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            if self.consumed.contains(name) {
                write!(f, "{name}: {ty} (consumed)")?;
            } else {
                write!(f, "{name}: {ty}")?;
            }
        }
        Ok(())
    }
}
