//! Observed-order estimates for refinement studies.

use crate::error::Result;
use crate::field::ComplexField;

/// Order `p` such that `coarse / fine = ratio^p`.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Self-convergence order from three solutions at steps `h`, `h/2`, `h/4`:
/// `log2(||u_h - u_{h/2}||_∞ / ||u_{h/2} - u_{h/4}||_∞)`.
pub fn richardson_order(h: &ComplexField, h2: &ComplexField, h4: &ComplexField) -> Result<f64> {
    let a = h.max_abs_diff(h2)?;
    let b = h2.max_abs_diff(h4)?;
    Ok(observed_order(a, b, 2.0))
}

/// Successive orders of a sequence of errors at steps refined by `ratio`.
pub fn successive_orders(errors: &[f64], ratio: f64) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| observed_order(w[0], w[1], ratio))
        .collect()
}
