use nalgebra::DMatrix;

use crate::error::{FdemError, Result};
use crate::scalar::Real;

/// Two-region image separated by an interface that deepens linearly from
/// 20% of the grid at the first sounding to 80% at the last.
#[derive(Debug, Clone)]
pub struct Phantom<T: Real> {
    pub sigma: DMatrix<T>,
    /// First row of the lower region, per sounding.
    pub interface: Vec<usize>,
}

pub fn phantom_interface<T: Real>(n: usize, big_n: usize, sigma_low: T, sigma_high: T) -> Result<Phantom<T>> {
    if n < 2 || big_n < 2 {
        return Err(FdemError::SizeTooSmall(n.min(big_n)));
    }
    if !(sigma_low >= T::zero() && sigma_high >= T::zero()) {
        return Err(FdemError::InvalidModel("phantom conductivities must be nonnegative".into()));
    }
    let interface: Vec<usize> = (0..big_n)
        .map(|j| {
            let frac = 0.2 + 0.6 * j as f64 / (big_n - 1) as f64;
            (frac * n as f64).round() as usize
        })
        .collect();
    let sigma = DMatrix::from_fn(n, big_n, |i, j| if i < interface[j] { sigma_low } else { sigma_high });
    Ok(Phantom { sigma, interface })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_values_give_constant_image() {
        let p = phantom_interface(10, 7, 0.3, 0.3).unwrap();
        assert!(p.sigma.iter().all(|v| *v == 0.3));
    }

    #[test]
    fn interface_deepens_from_20_to_80_percent() {
        let p = phantom_interface(20, 50, 0.0, 1.0).unwrap();
        assert_eq!(p.interface[0], 4);
        assert_eq!(p.interface[49], 16);
        assert!(p.interface.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(p.sigma[(3, 0)], 0.0);
        assert_eq!(p.sigma[(4, 0)], 1.0);
        assert_eq!(p.sigma[(15, 49)], 0.0);
        assert_eq!(p.sigma[(16, 49)], 1.0);
        assert!(p.sigma.iter().all(|v| (0.0..=1.0).contains(v)));
        let q = phantom_interface::<f64>(13, 9, 0.0, 1.0).unwrap();
        assert_eq!(q.interface[8], (0.8f64 * 13.0).round() as usize);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(phantom_interface(1, 5, 0.0, 1.0).is_err());
        assert!(phantom_interface(5, 1, 0.0, 1.0).is_err());
        assert!(phantom_interface(5, 5, -1.0, 1.0).is_err());
    }
}
