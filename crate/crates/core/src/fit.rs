//! Small linear least-squares fits.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LinearFit {
    pub coeffs: Vec<f64>,
    /// Largest absolute residual over the samples.
    pub max_residual: f64,
}

/// Least squares of `y` on the columns `basis(x)` evaluated at each sample.
pub fn least_squares<F>(xs: &[f64], ys: &[f64], ncols: usize, basis: F) -> Result<LinearFit>
where
    F: Fn(f64, usize) -> f64,
{
    if xs.len() != ys.len() || xs.len() < ncols {
        return Err(Error::Dimension(format!(
            "{} samples for a {ncols}-parameter fit",
            xs.len()
        )));
    }
    let a = Mat::<f64>::from_fn(xs.len(), ncols, |i, k| basis(xs[i], k));
    // Column scaling keeps QR well conditioned when terms differ by orders of magnitude.
    let scale: Vec<f64> = (0..ncols)
        .map(|k| {
            let n = (0..xs.len()).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let a_s = Mat::<f64>::from_fn(xs.len(), ncols, |i, k| a[(i, k)] / scale[k]);
    let rhs = Mat::<f64>::from_fn(ys.len(), 1, |i, _| ys[i]);
    let sol = a_s.qr().solve_lstsq(&rhs);
    let coeffs: Vec<f64> = (0..ncols).map(|k| sol[(k, 0)] / scale[k]).collect();
    let max_residual = (0..xs.len())
        .map(|i| {
            let fit: f64 = (0..ncols).map(|k| a[(i, k)] * coeffs[k]).sum();
            (fit - ys[i]).abs()
        })
        .fold(0.0, f64::max);
    if !max_residual.is_finite() {
        return Err(Error::Numerical("non-finite least-squares fit".into()));
    }
    Ok(LinearFit { coeffs, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_model() {
        let xs: Vec<f64> = (1..20).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 / x + 0.5 * x.ln()).collect();
        let f = least_squares(&xs, &ys, 3, |x, k| [1.0, 1.0 / x, x.ln()][k]).unwrap();
        assert!((f.coeffs[0] - 2.0).abs() < 1e-12);
        assert!((f.coeffs[1] + 3.0).abs() < 1e-12);
        assert!((f.coeffs[2] - 0.5).abs() < 1e-12);
        assert!(f.max_residual < 1e-12);
    }
}
