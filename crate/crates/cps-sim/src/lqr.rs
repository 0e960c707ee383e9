//! LQR gain from the continuous-time Riccati equation.
//!
//! P is found by integrating the Riccati differential equation backward in
//! time (RK4, fixed step) from P = Q until the per-step change drops below
//! 1e-10 in Frobenius norm; then K = R⁻¹BᵀP.

use nalgebra::DMatrix;

use crate::{Error, Result};

const STEP: f64 = 2e-4;
const TOLERANCE: f64 = 1e-10;
const MAX_STEPS: usize = 1_000_000;

/// Computes the m×n state-feedback gain K for ẋ = Ax + Bu minimizing
/// ∫ xᵀQx + uᵀRu dt. (A, B) must be stabilizable, Q ⪰ 0, R ≻ 0.
pub fn lqr_gain(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let m = b.ncols();
    assert_eq!(a.ncols(), n, "A must be square");
    assert_eq!(b.nrows(), n, "B row count must match A");
    assert_eq!((q.nrows(), q.ncols()), (n, n), "Q must be n×n");
    assert_eq!((r.nrows(), r.ncols()), (m, m), "R must be m×m");
    let r_inv = r.clone().try_inverse().expect("R must be invertible");

    let deriv = |p: &DMatrix<f64>| -> DMatrix<f64> {
        a.transpose() * p + p * a - p * b * &r_inv * b.transpose() * p + q
    };

    let mut p = q.clone();
    for _ in 0..MAX_STEPS {
        let k1 = deriv(&p);
        let k2 = deriv(&(&p + &k1 * (STEP / 2.0)));
        let k3 = deriv(&(&p + &k2 * (STEP / 2.0)));
        let k4 = deriv(&(&p + &k3 * STEP));
        let dp = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (STEP / 6.0);
        p += &dp;
        if dp.norm() < TOLERANCE {
            return Ok(r_inv * b.transpose() * p);
        }
    }
    Err(Error::NoConvergence { steps: MAX_STEPS })
}
