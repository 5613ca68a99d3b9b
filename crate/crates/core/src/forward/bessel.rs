//! Bessel functions of the first kind of orders zero and one, and their zeros.
//!
//! Small and moderate arguments use Miller's backward recurrence normalized
//! by the Neumann sum `J0 + 2 (J2 + J4 + ...) = 1`; large arguments use the
//! Hankel asymptotic expansion. Both branches are accurate to a few units of
//! `1e-16` in absolute terms for `f64`.

use crate::scalar::{from_usize, lit, Real};

/// Order of the Bessel kernel in a Hankel transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BesselOrder {
    J0,
    J1,
}

impl BesselOrder {
    pub fn index(self) -> usize {
        match self {
            BesselOrder::J0 => 0,
            BesselOrder::J1 => 1,
        }
    }

    pub fn from_index(nu: usize) -> Option<Self> {
        match nu {
            0 => Some(BesselOrder::J0),
            1 => Some(BesselOrder::J1),
            _ => None,
        }
    }
}

const ASYMPTOTIC_FROM: f64 = 25.0;
const SERIES_BELOW: f64 = 1e-3;

/// `J0(x)`.
pub fn bessel_j0<T: Real>(x: T) -> T {
    bessel_j0_j1(x).0
}

/// `J1(x)`.
pub fn bessel_j1<T: Real>(x: T) -> T {
    bessel_j0_j1(x).1
}

/// `J_nu(x)` for `nu` in {0, 1}.
pub fn bessel_j<T: Real>(order: BesselOrder, x: T) -> T {
    let (j0, j1) = bessel_j0_j1(x);
    match order {
        BesselOrder::J0 => j0,
        BesselOrder::J1 => j1,
    }
}

/// Both `J0(x)` and `J1(x)` from a single evaluation.
pub fn bessel_j0_j1<T: Real>(x: T) -> (T, T) {
    let ax = x.abs();
    let sign = if x < T::zero() { -T::one() } else { T::one() };
    let (j0, j1) = if ax < lit(SERIES_BELOW) {
        series(ax)
    } else if ax < lit(ASYMPTOTIC_FROM) {
        miller(ax)
    } else {
        asymptotic(ax)
    };
    (j0, sign * j1)
}

fn series<T: Real>(x: T) -> (T, T) {
    let z = x * x;
    let j0 = T::one() - z / lit(4.0) * (T::one() - z / lit(16.0) * (T::one() - z / lit(36.0)));
    let j1 = x / lit(2.0) * (T::one() - z / lit(8.0) * (T::one() - z / lit(24.0) * (T::one() - z / lit(48.0))));
    (j0, j1)
}

fn miller<T: Real>(x: T) -> (T, T) {
    let xf: f64 = crate::scalar::to_f64(x);
    let mut start = (xf + 30.0 + 6.0 * xf.sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let big: T = lit(1e15);
    let small: T = lit(1e-15);
    let two_over_x = lit::<T>(2.0) / x;

    // j_above = J_{k+1}, j_here = J_k (unnormalized)
    let mut j_above = T::zero();
    let mut j_here: T = lit(1e-30);
    let mut even_sum = T::zero();
    let mut j1 = T::zero();
    let mut k = start;
    while k > 0 {
        let j_below = from_usize::<T>(k) * two_over_x * j_here - j_above;
        j_above = j_here;
        j_here = j_below;
        k -= 1;
        if k == 1 {
            j1 = j_here;
        }
        if k % 2 == 0 && k > 0 {
            even_sum += j_here;
        }
        if j_here.abs() > big {
            j_here *= small;
            j_above *= small;
            even_sum *= small;
            j1 *= small;
        }
    }
    let norm = j_here + lit::<T>(2.0) * even_sum;
    (j_here / norm, j1 / norm)
}

fn asymptotic<T: Real>(x: T) -> (T, T) {
    let (p0, q0) = hankel_pq(0, x);
    let (p1, q1) = hankel_pq(1, x);
    let s = x.sin();
    let c = x.cos();
    let amp = (lit::<T>(2.0) / (T::pi() * x)).sqrt();
    let rt = lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
    // cos/sin of x - pi/4 and x - 3pi/4 without forming the shifted argument
    let cos0 = (c + s) * rt;
    let sin0 = (s - c) * rt;
    let cos1 = (s - c) * rt;
    let sin1 = -(s + c) * rt;
    (amp * (p0 * cos0 - q0 * sin0), amp * (p1 * cos1 - q1 * sin1))
}

fn hankel_pq<T: Real>(nu: u32, x: T) -> (T, T) {
    let mu: T = lit(4.0 * (nu * nu) as f64);
    let eight_x = lit::<T>(8.0) * x;
    let tiny: T = T::epsilon() * lit(1e-2);
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut last = T::max_value().unwrap_or(lit(1e300));
    for k in 1..60usize {
        let odd: T = from_usize(2 * k - 1);
        term = term * (mu - odd * odd) / (from_usize::<T>(k) * eight_x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // signs: P = a0 - a2 + a4 - ..., Q = a1 - a3 + a5 - ...
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < tiny {
            break;
        }
    }
    (p, q)
}

/// The `k`-th positive zero (`k >= 1`) of `J_nu`.
///
/// McMahon's expansion refined by Newton steps.
pub fn bessel_zero<T: Real>(order: BesselOrder, k: usize) -> T {
    assert!(k >= 1, "zeros are numbered from one");
    let nu = order.index() as f64;
    let mu = 4.0 * nu * nu;
    let beta = (k as f64 + nu / 2.0 - 0.25) * std::f64::consts::PI;
    let b8 = 8.0 * beta;
    let guess = beta
        - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8.powi(5));
    // The expansion is already accurate for large k; Newton cleans up the
    // first few zeros.
    let mut x: T = lit(guess);
    for _ in 0..4 {
        let (j0, j1) = bessel_j0_j1(x);
        let dx = match order {
            BesselOrder::J0 => j0 / j1,
            BesselOrder::J1 => -j1 / (j0 - j1 / x),
        };
        x += dx;
        if dx.abs() <= T::epsilon() * x {
            break;
        }
    }
    x
}
