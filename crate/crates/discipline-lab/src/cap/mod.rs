//! Reference-capability checking: qualifier order, viewpoint adaptation,
//! context splitting for `par`, recovery to `immutable`, and automatic
//! framing of unmentioned bindings.

pub mod checker;
pub mod env;
pub mod qualifier;

pub use checker::{frame_env, CapChecker, CapVerdict, CheckOptions};
pub use env::{LookupError, TypeEnv};
pub use qualifier::{adapt_field, sub_qualifier, IsolatedBaseRead, GENERATOR_PAIRS};
