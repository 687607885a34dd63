//! Program generators, differential test loops and corpus access behind the
//! `lsq` command-line tool.

pub mod corpus;
pub mod difftest;
pub mod gen;
pub mod meta;

pub use difftest::{difftest_calculus, difftest_mini, snapshot_probe, DiffFailure, DiffReport};
pub use gen::gen_well_typed;
pub use meta::{check_safety, SafetyEnd, SafetyReport};
