//! Generic MILP solving: LP relaxations, branch-and-bound, model files.

mod export;
mod lp;
mod mip;

pub use export::{
    export_model, format_number, import_lp, import_model, import_mps, matrix_fingerprint, ExportFormat,
};
pub use lp::{solve_lp, LpProblem, LpResult, LpStatus};
pub use mip::{
    bound_dominates, gap, solve_mip, solve_mip_with, Cut, EventKind, NoAids, SearchAids, MipResult, MipStatus, SolveConfig, SolveEvent, DEFAULT_THRESHOLDS,
};
