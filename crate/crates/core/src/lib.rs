//! Synthesis of clocked JK flip-flop circuits from autonomous finite-state
//! automata, isomorphic feed-forward unfolding through nested preserved
//! partitions, and integrated information (big phi) over the resulting
//! node-level dynamics.
//!
//! The pipeline mirrors three levels of description of one computation:
//!
//! * [`automaton`]: the abstract state machine (states and a successor map);
//! * [`encoding`]: a binary labelling of those states and the per-bit update
//!   tables it induces, together with the inter-bit dependency graph;
//! * [`synthesis`] / [`circuit`]: JK excitation tables, two-level minimized
//!   logic and a gate-level netlist that can be simulated clock by clock.
//!
//! [`partitions`] finds labellings whose dependency graph is strictly
//! feed-forward, and [`iit`] evaluates big phi on the update tables.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod automaton;
pub mod circuit;
pub mod encoding;
pub mod iit;
pub mod partitions;
pub mod synthesis;

mod report;

pub use automaton::{Automaton, AutomatonError, FsaDescription, StateId};
pub use circuit::{CircuitError, CircuitState, Simulator, VerificationReport};
pub use encoding::{Code, Csa, DependencyGraph, Encoding, EncodingError};
pub use iit::{IitError, PhiConfig, PhiResult, SystemCut, Tpm};
pub use partitions::{NestedSequence, Partition, PartitionError};
pub use report::ValidationReport;
pub use synthesis::{Basis, BooleanExpr, ExcitationTable, Netlist, Trit};
