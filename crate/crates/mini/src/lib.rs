//! MiniLang, a small imperative language with `yieldval`, and its
//! compilation into trampolined entry points.
//!
//! The pipeline runs in this order:
//! [`parse_mini`], [`normalize`], [`resolve`], [`build_cfg`] and
//! [`split_segments`], then [`analyze`] and [`generate_entry_points`]. The
//! runtime executes the result through [`start_instance`] and
//! [`resume_instance`]. [`direct_run`] is an independent tree-walking
//! interpreter used as the reference.

pub mod analysis;
pub mod ast;
pub mod cfg;
pub mod codegen;
mod error;
pub mod fixtures;
pub mod gen;
pub mod interp;
pub mod normalize;
mod ops;
pub mod parse;
pub mod resolve;
pub mod runtime;
pub mod split;

pub use analysis::{analyze, LivenessReport};
pub use ast::{BinOp, Block, CoroutineDef, Expr, Field, MiniProgram, MiniType, Stmt, Value};
pub use cfg::{build_cfg, dominates, segment_cfg, Cfg, Node, NodeKind};
pub use codegen::{compile, generate_entry_points, CompileOptions, CompiledCoroutine, CompiledProgram, EntryPoint};
pub use error::MiniError;
pub use gen::{gen_mini_program, GenConfig, GeneratedMini};
pub use interp::{direct_run, Completion, RunOutcome};
pub use normalize::{is_restricted, normalize, normalize_coroutine};
pub use parse::{parse_args, parse_expr, parse_mini, parse_value, MiniSyntaxError};
pub use resolve::{resolve, Resolved};
pub use runtime::{
    completion, read_exception, read_result, read_value, resume_instance, run_compiled, snapshot_instance,
    start_instance, Instance,
};
pub use split::{split_segments, EntryKind, Ep, ExitKind, Segment};
