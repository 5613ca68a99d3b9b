//! Column-wise Gauss–Newton, the majorization-minimization step for the
//! auxiliary image, and the alternating driver tying them together.

mod alternating;
mod gauss_newton;
mod line_search;
mod mm;
mod params;

pub use alternating::{
    alternating_invert, alternating_invert_with, decoupled_invert, decoupled_invert_with, ColumnFailure, ColumnRecord,
    Inversion, IterationTrace, OuterRecord,
};
pub use gauss_newton::{gn_column_solve, ColumnSolution, Coupling, StopReason};
pub use line_search::{armijo_positive, AcceptedStep, StepCertificate};
pub use mm::{mm_u_update, mm_xi_solve, smoothed_lq, XiSolution, XiSolver};
pub use params::SolverParams;
