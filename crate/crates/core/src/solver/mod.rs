//! Transfer functions: exact verification, the bounded cutting-and-stacking
//! construction, lifting along towers and the band-by-band `L^{p−1}` solution.

mod bounded;
mod extend;
mod lp;
mod verify;

pub use bounded::{
    construct_bounded_on, construct_bounded_solution, residual_within, stage_epsilon, BoundedOptions, BoundedSolution,
    StageState, DEFAULT_MAX_BRANCHES,
};
pub use extend::{extend_coboundary, induced_function};
pub use lp::{band_split, construct_lp_solution, Band, LpReport, LpSolution};
pub use verify::{check_solvability, verify, SolutionCertificate, Solvability, Verdict, Verification};
