//! Manufactured-solution cases, error norms, convergence studies and output writers.

pub mod cases;
pub mod errors;
pub mod infsup;
pub mod jet;
pub mod output;
pub mod study;

pub use cases::{builtin_case, ExactSolution, Formulation, ManufacturedCase, CASE_NAMES};
pub use errors::{compute_errors, eoc, ErrorNorms, FieldEvaluator};
pub use infsup::{infsup_probes, InfSupEstimate};
pub use study::{run_study, solve_level, LevelRow, Solved, StudyConfig, StudyReport};
