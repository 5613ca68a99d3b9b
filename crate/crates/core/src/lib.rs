//! Two-dimensional conductivity imaging from frequency-domain electromagnetic
//! induction (FDEM) soundings.
//!
//! The image `Sigma` (layers x soundings) is recovered by minimizing
//!
//! ```text
//! 1/2 ||M(Sigma) - B||_F^2 + gamma/q ||D vec(Sigma)||_q^q,   Sigma >= 0,
//! ```
//!
//! where `M` is the layered-earth forward model applied column by column and
//! `D` the 2-D discrete Laplacian. The functional is split with an auxiliary
//! image `Xi` and minimized by alternating a regularized Gauss–Newton step
//! per sounding with a majorization-minimization step on `Xi`.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod error;
pub mod forward;
pub mod gsvd;
pub mod harness;
pub mod jacobian;
pub mod regops;
pub mod scalar;
pub mod solvers;

pub use error::{FdemError, Result};
pub use scalar::Real;

/// Double-precision layered model.
pub type Model = forward::LayeredModel<f64>;
/// Double-precision device configuration.
pub type Device = forward::DeviceConfig<f64>;
/// Double-precision forward operator.
pub type Forward = forward::ForwardOperator<f64>;
/// Double-precision layer geometry.
pub type Geometry = forward::LayerGeometry<f64>;
/// Double-precision solver parameters.
pub type Params = solvers::SolverParams<f64>;
/// Conductivity image, layers x soundings.
pub type Image = nalgebra::DMatrix<f64>;
/// Complex data matrix, readings x soundings.
pub type Data = nalgebra::DMatrix<num_complex::Complex64>;
