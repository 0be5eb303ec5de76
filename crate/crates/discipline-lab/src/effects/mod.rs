//! Join-semilattice effect inference over kernel commands, instantiated for
//! the heap-write lattice and the UI-threading lattice, plus the
//! capability-bound UI alternative kept for comparison.

pub mod capbound;
pub mod heapwrite;
pub mod lattice;
pub mod ui;

pub use capbound::UiCapBoundChecker;
pub use heapwrite::{check_heap_write_program, infer_heap_write, par_race_verdict, EffVerdict};
pub use lattice::{
    Effect, EffectLattice, LatticeError, HEAP_WRITE, HEAP_WRITE_LATTICE, NO_HEAP_WRITE,
    SAFE_EFFECT, UI_EFFECT, UI_LATTICE,
};
pub use ui::{ThreadContext, UiChecker};
