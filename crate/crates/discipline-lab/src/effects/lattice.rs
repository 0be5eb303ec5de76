//! Finite join-semilattices of effects.
//!
//! A lattice is built from its element names and covering pairs; the
//! constructor takes the reflexive-transitive closure, verifies it is a
//! partial order with least upper bounds, and tabulates `join`.

use std::fmt;
use std::sync::{Arc, LazyLock};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("order is not antisymmetric: {0} and {1}")]
    NotAntisymmetric(String, String),
    #[error("`{0}` is not below every element (not a bottom)")]
    NotBottom(String),
    #[error("elements {0} and {1} have no least upper bound")]
    NoJoin(String, String),
}

#[derive(Debug)]
pub struct EffectLattice {
    name: String,
    elements: Vec<String>,
    leq: Vec<Vec<bool>>,
    join: Vec<Vec<usize>>,
    bottom: usize,
}

impl EffectLattice {
    pub fn new(
        name: &str,
        elements: &[&str],
        covers: &[(&str, &str)],
        bottom: &str,
    ) -> Result<Arc<Self>, LatticeError> {
        let elements: Vec<String> = elements.iter().map(|s| s.to_string()).collect();
        let n = elements.len();
        let index = |e: &str| -> Result<usize, LatticeError> {
            elements
                .iter()
                .position(|x| x == e)
                .ok_or_else(|| LatticeError::UnknownElement(e.to_string()))
        };
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in covers {
            let (i, j) = (index(a)?, index(b)?);
            leq[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i][k] && leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(LatticeError::NotAntisymmetric(
                        elements[i].clone(),
                        elements[j].clone(),
                    ));
                }
            }
        }
        let bottom = index(bottom)?;
        if (0..n).any(|j| !leq[bottom][j]) {
            return Err(LatticeError::NotBottom(elements[bottom].clone()));
        }
        let mut join = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                let uppers: Vec<usize> = (0..n).filter(|&u| leq[i][u] && leq[j][u]).collect();
                let lub = uppers
                    .iter()
                    .copied()
                    .find(|&u| uppers.iter().all(|&v| leq[u][v]));
                match lub {
                    Some(u) => join[i][j] = u,
                    None => {
                        return Err(LatticeError::NoJoin(elements[i].clone(), elements[j].clone()))
                    }
                }
            }
        }
        Ok(Arc::new(EffectLattice { name: name.to_string(), elements, leq, join, bottom }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element_names(&self) -> &[String] {
        &self.elements
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn join_idx(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    pub fn bottom_idx(&self) -> usize {
        self.bottom
    }
}

/// An element of a specific lattice.
#[derive(Debug, Clone)]
pub struct Effect {
    lattice: Arc<EffectLattice>,
    value: usize,
}

impl Effect {
    pub fn bottom(lattice: &Arc<EffectLattice>) -> Self {
        Effect { lattice: Arc::clone(lattice), value: lattice.bottom_idx() }
    }

    pub fn named(lattice: &Arc<EffectLattice>, name: &str) -> Self {
        let value = lattice.index_of(name).expect("effect element must exist");
        Effect { lattice: Arc::clone(lattice), value }
    }

    pub fn name(&self) -> &str {
        &self.lattice.element_names()[self.value]
    }

    pub fn lattice(&self) -> &Arc<EffectLattice> {
        &self.lattice
    }

    pub fn is_bottom(&self) -> bool {
        self.value == self.lattice.bottom_idx()
    }

    pub fn join(&self, other: &Effect) -> Effect {
        debug_assert_eq!(self.lattice.name(), other.lattice.name());
        Effect {
            lattice: Arc::clone(&self.lattice),
            value: self.lattice.join_idx(self.value, other.value),
        }
    }

    pub fn leq(&self, other: &Effect) -> bool {
        debug_assert_eq!(self.lattice.name(), other.lattice.name());
        self.lattice.leq(self.value, other.value)
    }
}

impl PartialEq for Effect {
    fn eq(&self, other: &Self) -> bool {
        self.lattice.name() == other.lattice.name() && self.value == other.value
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const NO_HEAP_WRITE: &str = "NoHeapWrite";
pub const HEAP_WRITE: &str = "HeapWrite";
pub const SAFE_EFFECT: &str = "SafeEffect";
pub const UI_EFFECT: &str = "UIEffect";

/// The two-point heap-write lattice: `NoHeapWrite <= HeapWrite`.
pub static HEAP_WRITE_LATTICE: LazyLock<Arc<EffectLattice>> = LazyLock::new(|| {
    EffectLattice::new(
        "heapwrite",
        &[NO_HEAP_WRITE, HEAP_WRITE],
        &[(NO_HEAP_WRITE, HEAP_WRITE)],
        NO_HEAP_WRITE,
    )
    .expect("heap-write lattice is valid")
});

/// The UI-threading lattice: `SafeEffect <= UIEffect`.
pub static UI_LATTICE: LazyLock<Arc<EffectLattice>> = LazyLock::new(|| {
    EffectLattice::new("ui", &[SAFE_EFFECT, UI_EFFECT], &[(SAFE_EFFECT, UI_EFFECT)], SAFE_EFFECT)
        .expect("ui lattice is valid")
});
