use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{FdemError, Result};
use crate::scalar::{to_f64, Real};

/// Relative restoration error `||Sigma - Sigma_exact||_F / ||Sigma_exact||_F`.
pub fn rre<T: Real>(sigma: &DMatrix<T>, exact: &DMatrix<T>) -> Result<f64> {
    if sigma.shape() != exact.shape() {
        return Err(FdemError::DimensionMismatch { expected: exact.len(), found: sigma.len() });
    }
    let den = to_f64(exact.norm());
    if den == 0.0 {
        return Err(FdemError::ZeroReference);
    }
    Ok(to_f64((sigma - exact).norm()) / den)
}

/// Mean jump between neighbouring soundings, `mean_j ||sigma_j+1 - sigma_j||`.
pub fn splicing<T: Real>(sigma: &DMatrix<T>) -> f64 {
    let n = sigma.ncols();
    if n < 2 {
        return 0.0;
    }
    let total: f64 = (0..n - 1).map(|j| to_f64((sigma.column(j + 1) - sigma.column(j)).norm())).sum();
    total / (n - 1) as f64
}

/// `||B_pred - B||_F / ||B||_F`.
pub fn relative_misfit<T: Real>(predicted: &DMatrix<Complex<T>>, data: &DMatrix<Complex<T>>) -> f64 {
    let sq = |m: &DMatrix<Complex<T>>| m.iter().map(|z| to_f64(z.norm_sqr())).sum::<f64>();
    (sq(&(predicted - data)) / sq(data)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rre_cases() {
        let exact = DMatrix::from_fn(4, 3, |i, j| (i + j) as f64);
        assert_eq!(rre(&exact, &exact).unwrap(), 0.0);
        assert!((rre(&DMatrix::zeros(4, 3), &exact).unwrap() - 1.0).abs() < 1e-15);
        assert!((rre(&(&exact * 2.0), &exact).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(rre(&exact, &DMatrix::zeros(4, 3)), Err(FdemError::ZeroReference)));
        assert!(rre(&exact, &DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn splicing_cases() {
        assert_eq!(splicing(&DMatrix::from_element(5, 6, 0.4)), 0.0);
        let stripes = DMatrix::from_fn(4, 3, |_, j| j as f64);
        assert!((splicing(&stripes) - 2.0).abs() < 1e-15);
        assert_eq!(splicing(&DMatrix::from_element(5, 1, 1.0)), 0.0);
    }
}
