use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gauss_newton::{gn_column_solve, ColumnSolution, Coupling, StopReason};
use super::line_search::StepCertificate;
use super::mm::{mm_xi_solve, smoothed_lq, XiSolver};
use super::SolverParams;
use crate::error::{FdemError, Result};
use crate::forward::ForwardOperator;
use crate::jacobian::{stack_complex_matrix, StackedForward};
use crate::regops::build_deriv;
use crate::scalar::{lit, to_f64, Real};

/// Per-sounding summary of one Gauss–Newton run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRecord {
    pub column: usize,
    pub iterations: usize,
    pub ell: usize,
    pub stop: StopReason,
    pub steps: Vec<StepCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnFailure {
    pub outer: usize,
    pub column: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub iteration: usize,
    /// `1/2 ||M(Sigma) - B||_F^2`.
    pub data_fit: f64,
    /// `||D vec(Xi)||_q^q`, smoothed.
    pub regularization: f64,
    /// `beta/2 ||Sigma - Xi||_F^2`.
    pub coupling: f64,
    /// Smoothed objective of the `Xi` step after every MM iteration.
    pub mm_objective: Vec<f64>,
    pub columns: Vec<ColumnRecord>,
    /// `||Sigma_k+1 - Sigma_k||_F / ||Sigma_k||_F` (coupled method only).
    pub rel_change: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub method: String,
    pub outer: Vec<OuterRecord>,
    pub failures: Vec<ColumnFailure>,
}

impl IterationTrace {
    /// Every accepted line-search step, for post-hoc verification.
    pub fn certificates(&self) -> impl Iterator<Item = &StepCertificate> {
        self.outer.iter().flat_map(|o| o.columns.iter().flat_map(|c| c.steps.iter()))
    }
}

#[derive(Debug, Clone)]
pub struct Inversion<T: Real> {
    pub sigma: DMatrix<T>,
    /// Auxiliary image (coupled method only).
    pub xi: Option<DMatrix<T>>,
    pub trace: IterationTrace,
}

fn record<T: Real>(column: usize, sol: &ColumnSolution<T>) -> ColumnRecord {
    ColumnRecord { column, iterations: sol.iterations, ell: sol.ell, stop: sol.stop, steps: sol.steps.clone() }
}

fn check_shapes<T: Real, F: StackedForward<T> + ?Sized>(forward: &F, data: &DMatrix<T>) -> Result<()> {
    if data.nrows() != forward.n_outputs() {
        return Err(FdemError::DimensionMismatch { expected: forward.n_outputs(), found: data.nrows() });
    }
    if data.ncols() == 0 {
        return Err(FdemError::SizeTooSmall(0));
    }
    Ok(())
}

fn data_fit<T: Real, F: StackedForward<T> + ?Sized>(forward: &F, data: &DMatrix<T>, sigma: &DMatrix<T>) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..data.ncols() {
        let r = forward.stacked(sigma.column(j).as_slice())? - data.column(j);
        total += to_f64(r.norm_squared());
    }
    Ok(0.5 * total)
}

/// Coupled inversion of a complex data matrix (readings x soundings).
pub fn alternating_invert<T: Real>(
    data: &DMatrix<Complex<T>>,
    operator: &ForwardOperator<T>,
    params: &SolverParams<T>,
) -> Result<Inversion<T>> {
    alternating_invert_with(operator, &stack_complex_matrix(data), params)
}

/// Alternating minimization over `(Sigma, Xi)` for any stacked forward map;
/// `data` holds one stacked observation per column.
///
/// Each outer iteration solves all column problems concurrently, coupled to
/// the current `Xi`, then updates `Xi` by the MM scheme. A column whose
/// solve errors keeps its previous value; the run aborts only if every
/// column fails in the same outer iteration.
pub fn alternating_invert_with<T: Real, F: StackedForward<T> + ?Sized>(
    forward: &F,
    data: &DMatrix<T>,
    params: &SolverParams<T>,
) -> Result<Inversion<T>> {
    params.validate()?;
    check_shapes(forward, data)?;
    let n = forward.n_params();
    let big_n = data.ncols();
    let lhat = build_deriv::<T>(params.p, n)?.matrix;
    let xi_solver = XiSolver::new(n, big_n)?;

    let initial = DMatrix::from_element(n, big_n, params.sigma0);
    let mut sigma = initial.clone();
    let mut xi = initial.clone();
    let mut trace = IterationTrace { method: "alternating".into(), ..Default::default() };

    for k in 0..params.outer_maxit {
        let results: Vec<Result<ColumnSolution<T>>> = (0..big_n)
            .into_par_iter()
            .map(|j| {
                let start = if params.warm_start { sigma.column(j).clone_owned() } else { initial.column(j).clone_owned() };
                let b = data.column(j).clone_owned();
                gn_column_solve(
                    forward,
                    &b,
                    start.as_slice(),
                    Coupling::To { xi: xi.column(j).as_slice(), beta: params.beta },
                    &lhat,
                    params.ell,
                    params.gn_maxit,
                    params.rel_tol,
                    params.alpha_min,
                )
            })
            .collect();

        let mut next = sigma.clone();
        let mut columns = Vec::with_capacity(big_n);
        let mut failed = 0;
        for (j, res) in results.into_iter().enumerate() {
            match res {
                Ok(sol) => {
                    next.set_column(j, &DVector::from_vec(sol.sigma.clone()));
                    columns.push(record(j, &sol));
                }
                Err(e) => {
                    failed += 1;
                    trace.failures.push(ColumnFailure { outer: k, column: j, error: e.to_string() });
                }
            }
        }
        if failed == big_n {
            return Err(FdemError::AllColumnsFailed(trace.failures.last().map(|f| f.error.clone()).unwrap_or_default()));
        }

        let (change, scale) = ((&next - &sigma).norm(), sigma.norm());
        let rel_change = to_f64(if scale > T::zero() { change / scale } else { change });
        sigma = next;
        let mm = mm_xi_solve(&sigma, params, &xi_solver)?;
        xi = mm.xi;

        let reg = smoothed_lq(xi_solver.lap.apply(&xi)?.as_slice(), params.q, params.epsilon);
        trace.outer.push(OuterRecord {
            iteration: k,
            data_fit: data_fit(forward, data, &sigma)?,
            regularization: to_f64(reg),
            coupling: to_f64(params.beta * (&sigma - &xi).norm_squared() * lit(0.5)),
            mm_objective: mm.objective.iter().map(|v| to_f64(*v)).collect(),
            columns,
            rel_change: Some(rel_change),
        });
        if rel_change < to_f64(params.rel_tol) {
            break;
        }
    }
    Ok(Inversion { sigma, xi: Some(xi), trace })
}

/// Independent per-sounding inversions stacked side by side.
pub fn decoupled_invert<T: Real>(
    data: &DMatrix<Complex<T>>,
    operator: &ForwardOperator<T>,
    params: &SolverParams<T>,
) -> Result<Inversion<T>> {
    decoupled_invert_with(operator, &stack_complex_matrix(data), params)
}

/// Damped Gauss–Newton with truncated GSVD of the plain `(J, L)` pair on
/// each column, without any lateral coupling.
pub fn decoupled_invert_with<T: Real, F: StackedForward<T> + ?Sized>(
    forward: &F,
    data: &DMatrix<T>,
    params: &SolverParams<T>,
) -> Result<Inversion<T>> {
    params.validate()?;
    check_shapes(forward, data)?;
    let n = forward.n_params();
    let big_n = data.ncols();
    let lhat = build_deriv::<T>(params.p, n)?.matrix;
    let start = vec![params.sigma0; n];

    let results: Vec<Result<ColumnSolution<T>>> = (0..big_n)
        .into_par_iter()
        .map(|j| {
            let b = data.column(j).clone_owned();
            gn_column_solve(
                forward,
                &b,
                &start,
                Coupling::None,
                &lhat,
                params.ell,
                params.decoupled_maxit,
                params.rel_tol,
                params.alpha_min,
            )
        })
        .collect();

    let mut sigma = DMatrix::from_element(n, big_n, params.sigma0);
    let mut trace = IterationTrace { method: "decoupled".into(), ..Default::default() };
    let mut columns = Vec::with_capacity(big_n);
    for (j, res) in results.into_iter().enumerate() {
        match res {
            Ok(sol) => {
                sigma.set_column(j, &DVector::from_vec(sol.sigma.clone()));
                columns.push(record(j, &sol));
            }
            Err(e) => trace.failures.push(ColumnFailure { outer: 0, column: j, error: e.to_string() }),
        }
    }
    if columns.is_empty() {
        return Err(FdemError::AllColumnsFailed(trace.failures.last().map(|f| f.error.clone()).unwrap_or_default()));
    }
    trace.outer.push(OuterRecord {
        iteration: 0,
        data_fit: data_fit(forward, data, &sigma)?,
        regularization: 0.0,
        coupling: 0.0,
        mm_objective: Vec::new(),
        columns,
        rel_change: None,
    });
    Ok(Inversion { sigma, xi: None, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{DevicePreset, LayerGeometry};

    fn operator(n: usize) -> ForwardOperator<f64> {
        let device = DevicePreset::Gem2.config(&[1.0]).unwrap();
        ForwardOperator::new(device, LayerGeometry::uniform(n, 5.0).unwrap(), 1e-8).unwrap()
    }

    fn quick() -> SolverParams<f64> {
        SolverParams { ell: 5, outer_maxit: 3, gn_maxit: 3, decoupled_maxit: 5, mm_maxit: 5, beta: 1e-3, ..Default::default() }
    }

    #[test]
    fn constant_truth_is_a_fixed_point() {
        let op = operator(6);
        let truth = DMatrix::from_element(6, 3, 0.1);
        let data = crate::forward::forward_image(&truth, &op).unwrap();
        let inv = alternating_invert(&data, &op, &quick()).unwrap();
        assert!((inv.sigma - &truth).amax() < 1e-9);
        assert_eq!(inv.trace.outer.len(), 1);
        assert!(inv.trace.outer[0].rel_change.unwrap() < 1e-4);
    }

    #[test]
    fn single_sounding_runs() {
        let op = operator(6);
        let truth = DMatrix::from_fn(6, 1, |i, _| if i < 3 { 0.05 } else { 0.5 });
        let data = crate::forward::forward_image(&truth, &op).unwrap();
        let inv = alternating_invert(&data, &op, &quick()).unwrap();
        assert_eq!(inv.sigma.shape(), (6, 1));
        assert!(inv.sigma.min() >= 0.0);
        let dec = decoupled_invert(&data, &op, &quick()).unwrap();
        assert!(dec.sigma.min() >= 0.0);
        assert!(inv.trace.certificates().chain(dec.trace.certificates()).all(StepCertificate::holds));
    }

    #[test]
    fn decoupled_single_column_is_plain_column_solve() {
        let op = operator(6);
        let truth = DMatrix::from_fn(6, 1, |i, _| 0.1 + 0.1 * i as f64);
        let data = crate::forward::forward_image(&truth, &op).unwrap();
        let params = quick();
        let dec = decoupled_invert(&data, &op, &params).unwrap();
        let b = crate::jacobian::stack_complex(&data.column(0).clone_owned());
        let lhat = build_deriv(2, 6).unwrap().matrix;
        let sol = gn_column_solve(&op, &b, &[0.1; 6], Coupling::None, &lhat, 5, 5, 1e-4, 1e-10).unwrap();
        assert_eq!(dec.sigma.as_slice(), sol.sigma.as_slice());
    }

    #[test]
    fn rejects_mismatched_data() {
        let op = operator(4);
        let data = DMatrix::from_element(5, 2, Complex::new(0.0, 0.0));
        assert!(matches!(alternating_invert(&data, &op, &quick()), Err(FdemError::DimensionMismatch { .. })));
        let bad = SolverParams { q: 3.0, ..quick() };
        let data = DMatrix::from_element(op.n_readings(), 2, Complex::new(0.0, 0.0));
        assert!(alternating_invert(&data, &op, &bad).is_err());
    }
}
