//! Typed, stackful coroutines with snapshots as a small lambda calculus.
//!
//! The crate provides the abstract syntax ([`ast`]), a concrete syntax
//! ([`syntax`]), an algorithmic typechecker with an optional subtyping mode
//! ([`typeck`]) and a small-step evaluator with a coroutine store ([`eval`]).

pub mod ast;
pub mod eval;
pub mod syntax;
pub mod typeck;

pub use ast::{Label, Term, Type};
pub use eval::{Configuration, EvalOutcome, InstanceStore, StepOutcome};
pub use syntax::{parse_term, print_term, SourceProgram, SyntaxError};
pub use typeck::{check_user_program, infer, InstanceTyping, Judgment, Mode, TypeError, TypingContext};
