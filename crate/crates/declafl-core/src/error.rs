//! Error types shared across the toolkit.

use alloc::string::String;
use core::fmt;

use crate::ast::Span;

/// Any failure produced by parsing, analysis, solving, mutation, or metrics.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed input text.
    Syntax { message: String, span: Span },
    /// An identifier that does not resolve to any declaration.
    Name { ident: String, span: Span },
    /// A call or operator applied to operands of the wrong arity.
    Arity { message: String, span: Span },
    /// A node id that does not belong to the model.
    UnknownNode { id: u32 },
    /// A test name that is not registered in the suite.
    UnknownTest { name: String },
    /// A run/check command referencing a missing predicate or assertion.
    UnmatchedCommand { name: String, span: Span },
    /// An inconsistent scope, e.g. scope 0 for an exact-one signature.
    Scope { message: String },
    /// Ground size or search budget exceeded.
    Capacity { message: String },
    /// Core minimization was asked to shrink a satisfiable conjunct set.
    NotUnsat,
    /// A mutant that fails resolution or arity checking.
    InvalidMutant { message: String },
    /// Equivalence filtering found no instance separating mutant from original.
    NoDistinguishingInstance,
    /// Fewer killable mutant pairs exist than were requested.
    Exhausted { requested: usize, available: usize },
    /// Localization requires at least one failing, non-errored test.
    NoFailingTests,
    /// Core-based localization requires at least one UNSAT failing test.
    NoUnsatFailures,
    /// Metrics require a non-empty fault label set.
    NoFaultLabels,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Syntax { message, span } => {
                write!(f, "syntax error at {}:{}: {}", span.line, span.col, message)
            }
            Error::Name { ident, span } => {
                write!(f, "unresolved name `{}` at {}:{}", ident, span.line, span.col)
            }
            Error::Arity { message, span } => {
                write!(f, "arity error at {}:{}: {}", span.line, span.col, message)
            }
            Error::UnknownNode { id } => write!(f, "unknown node id {}", id),
            Error::UnknownTest { name } => write!(f, "unknown test `{}`", name),
            Error::UnmatchedCommand { name, span } => write!(
                f,
                "command at {}:{} references missing predicate or assertion `{}`",
                span.line, span.col, name
            ),
            Error::Scope { message } => write!(f, "scope error: {}", message),
            Error::Capacity { message } => write!(f, "capacity exceeded: {}", message),
            Error::NotUnsat => write!(f, "initial core is not unsatisfiable"),
            Error::InvalidMutant { message } => write!(f, "invalid mutant: {}", message),
            Error::NoDistinguishingInstance => {
                write!(f, "no instance distinguishes the mutant from the original")
            }
            Error::Exhausted { requested, available } => write!(
                f,
                "requested {} second-order mutants but only {} killable pairs exist",
                requested, available
            ),
            Error::NoFailingTests => write!(f, "no failing tests"),
            Error::NoUnsatFailures => {
                write!(f, "no unsatisfiable failing tests (model may be strictly underconstrained)")
            }
            Error::NoFaultLabels => write!(f, "fault label set is empty"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
