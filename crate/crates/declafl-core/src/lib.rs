//! Fault localization for bounded relational models.
//!
//! This crate implements the full analysis pipeline for a small declarative
//! modeling language: parsing into an arena-backed AST, name resolution and
//! static dependency analysis, grounding to propositional logic with a
//! built-in SAT search, unsat-core extraction at AST-node granularity,
//! mutation operators with equivalence filtering and killing-test
//! generation, five localization techniques with suspiciousness ranking,
//! and the distance/top-k metrics used to evaluate ranking quality.
//!
//! The crate is `no_std` + `alloc`: everything here is pure computation
//! over in-memory models. File formats, the command-line tool, and the
//! parallel mutant driver live in the companion `declafl` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod ast;
pub mod error;
pub mod eval;
pub mod finder;
pub mod fl;
pub mod metrics;
pub mod mutation;
pub mod rng;
pub mod suite;

pub use ast::{Model, NodeId, Span};
pub use error::{Error, Result};
pub use finder::{Scope, SolveResult, Status};
