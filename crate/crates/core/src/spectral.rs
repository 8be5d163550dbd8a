//! Spectral differentiation on the periodic lattice.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `Δu` via the multiplier `-|k|²`.
pub fn laplacian(u: &ComplexField) -> Result<ComplexField> {
    u.ensure_finite()?;
    Ok(laplacian_unchecked(u))
}

pub(crate) fn laplacian_unchecked(u: &ComplexField) -> ComplexField {
    let k2 = u.grid().k_squared();
    u.apply_multiplier(|p| Complex64::new(-k2[p], 0.0))
}

/// `∂u/∂x_a` for every axis, via the multiplier `i k_a`.
pub fn gradient(u: &ComplexField) -> Result<Vec<ComplexField>> {
    u.ensure_finite()?;
    Ok(gradient_unchecked(u))
}

pub(crate) fn gradient_unchecked(u: &ComplexField) -> Vec<ComplexField> {
    let grid = u.grid();
    (0..grid.dim())
        .map(|axis| u.apply_multiplier(|p| I * grid.k_axis(p, axis)))
        .collect()
}

/// `Σ_a ∂v_a/∂x_a` of a vector field given as one component per axis.
pub fn divergence(v: &[ComplexField]) -> Result<ComplexField> {
    let first = v
        .first()
        .ok_or_else(|| Error::InvalidArgument("divergence of an empty field list".into()))?;
    let grid = first.grid();
    if v.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "expected {} components, got {}",
            grid.dim(),
            v.len()
        )));
    }
    let mut acc = ComplexField::constant(grid, Complex64::default());
    for (axis, comp) in v.iter().enumerate() {
        comp.ensure_finite()?;
        let d = comp.apply_multiplier(|p| I * grid.k_axis(p, axis));
        acc = acc.try_add(&d)?;
    }
    Ok(acc)
}

/// Zeroes every mode outside the 2/3-rule band.
pub fn dealias(u: &ComplexField) -> ComplexField {
    let grid = u.grid();
    u.apply_multiplier(|p| {
        if grid.in_dealias_band(p) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plane_wave_laplacian() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let u = ComplexField::from_fn(&g, |[x, _]| c(0.0, x).exp());
        let lap = laplacian(&u).unwrap();
        let expected = u.scale(c(-1.0, 0.0));
        assert!(lap.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let g = make_grid(2, 16, 5.0).unwrap();
        let u = ComplexField::constant(&g, c(1.0, 0.0));
        assert!(laplacian(&u).unwrap().max_abs() < 1e-14);
        for d in gradient(&u).unwrap() {
            assert!(d.max_abs() < 1e-14);
        }
    }

    #[test]
    fn sine_second_mode() {
        let g = make_grid(1, 64, 2.0 * PI).unwrap();
        let u = ComplexField::from_fn(&g, |[x, _]| c((2.0 * x).sin(), 0.0));
        let expected = ComplexField::from_fn(&g, |[x, _]| c(-4.0 * (2.0 * x).sin(), 0.0));
        assert!(laplacian(&u).unwrap().max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn plane_wave_gradients() {
        let g = make_grid(1, 16, 2.0 * PI).unwrap();
        let u = ComplexField::from_fn(&g, |[x, _]| c(0.0, x).exp());
        let grad = gradient(&u).unwrap();
        assert_eq!(grad.len(), 1);
        assert!(grad[0].max_abs_diff(&u.scale(c(0.0, 1.0))).unwrap() < 1e-12);

        let g2 = make_grid(2, 16, 2.0 * PI).unwrap();
        let u2 = ComplexField::from_fn(&g2, |[x, y]| c(0.0, x + 2.0 * y).exp());
        let grad = gradient(&u2).unwrap();
        assert!(grad[0].max_abs_diff(&u2.scale(c(0.0, 1.0))).unwrap() < 1e-12);
        assert!(grad[1].max_abs_diff(&u2.scale(c(0.0, 2.0))).unwrap() < 1e-12);
    }

    #[test]
    fn nan_is_rejected() {
        let g = make_grid(1, 8, 1.0).unwrap();
        let mut v = vec![c(1.0, 0.0); 8];
        v[2] = c(0.0, f64::NAN);
        let u = ComplexField::new(&g, v).unwrap();
        assert!(laplacian(&u).is_err());
        assert!(gradient(&u).is_err());
    }

    #[test]
    fn dealias_removes_top_third() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let low = ComplexField::from_fn(&g, |[x, _]| c(0.0, 5.0 * x).exp());
        let high = ComplexField::from_fn(&g, |[x, _]| c(0.0, 13.0 * x).exp());
        assert!(dealias(&low).max_abs_diff(&low).unwrap() < 1e-13);
        assert!(dealias(&high).max_abs() < 1e-13);
    }
}
