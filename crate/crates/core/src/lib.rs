//! Verification of CTL properties of infinite-state reactive systems.
//!
//! The system and property are encoded as a constraint logic program over
//! linear rational constraints. Verification runs in two phases: an
//! unfold/fold specialization of the encoding with respect to the initial
//! states and the property, followed by a bottom-up construction of the
//! perfect model of the specialized program.

pub mod constraint;
pub mod generalize;
pub mod wqo;
pub mod model;
pub mod parse;
pub mod specialize;
pub mod bottomup;
pub mod harness;
