//! A laboratory of static disciplines over a small imperative object
//! language: a reference-capability checker with recovery and framing, two
//! join-semilattice effect disciplines, a rely-guarantee reference splitting
//! checker, a fixed-object-layout structural type checker, and a
//! differential harness comparing capability-bound and effect-based
//! parallel-safety verdicts.

pub mod cap;
pub mod effects;
pub mod cli;
pub mod diag;
pub mod diff;
pub mod kernel;
pub mod proto;
pub mod rgref;
