//! Synchronous programs and synchronous dynamic logic: syntax, a bounded trace
//! semantics, the signal-resolving merge, linearization of parallel programs
//! and a sequent prover that discharges first-order obligations.

pub mod merge;
pub mod parser;
pub mod pretty;
pub mod prover;
pub mod rewrite;
pub mod semantics;
pub mod smt;
pub mod syntax;
