//! Synthetic experiments: phantoms, noise, error metrics, a dense oracle for
//! the auxiliary-image step, and the paired comparison of both inversions.

mod experiment;
mod metrics;
mod noise;
mod oracle;
mod phantom;

pub use experiment::{
    evaluate, run_experiment, run_on, synthesize, synthesize_with, ExperimentConfig, ExperimentReport, Method, MethodResult,
    Synthetic,
};
pub use metrics::{relative_misfit, rre, splicing};
pub use noise::{add_noise, NoiseScaling, NoiseSpec};
pub use oracle::{oracle_dense_xi, ORACLE_SIZE_CAP};
pub use phantom::{phantom_interface, Phantom};
