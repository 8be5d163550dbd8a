//! Lebesgue, Sobolev, Zhidkov and Fourier-L¹ norms of lattice fields.
//!
//! Physical-space norms use the quadrature `Σ |u_i|^p dx^D`. Sobolev norms
//! use the spectral weight `(1 + |k|²)^s` with the Parseval normalization
//! `dk^D / (2π)^D`, so `||u||_{H^0} = ||u||_{L²}` exactly.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub linf: f64,
    pub l2: f64,
    pub l4: f64,
    pub grad_l2: f64,
    pub lap_l2: f64,
    /// `||∇u||_{H^s}` keyed by `s`.
    pub grad_sobolev: BTreeMap<u32, f64>,
    /// `||u||_{X^k} = ||u||_∞ + ||∇u||_{H^{k-1}}` keyed by `k`.
    pub zhidkov: BTreeMap<u32, f64>,
    /// `||û||_{L¹}` in the lattice transform convention.
    pub fourier_l1: f64,
}

/// Computes every norm in [`NormReport`], with Zhidkov orders `1..=max_k`.
pub fn norms(u: &ComplexField, max_k: u32) -> Result<NormReport> {
    if max_k < 1 {
        return Err(Error::InvalidArgument("max_k must be at least 1".into()));
    }
    u.ensure_finite()?;
    let grid = u.grid();
    let dv = grid.cell_volume();

    let linf = u.max_abs();
    let l2 = (u.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * dv).sqrt();
    let l4 = (u.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * dv).powf(0.25);

    let spectrum = u.spectrum();
    let k2 = grid.k_squared();
    let parseval = parseval_weight(u);
    let weighted = |w: &dyn Fn(f64) -> f64| -> f64 {
        spectrum
            .iter()
            .zip(k2)
            .map(|(s, &k)| w(k) * s.norm_sqr())
            .sum::<f64>()
            * parseval
    };

    let grad_l2 = weighted(&|k| k).sqrt();
    let lap_l2 = weighted(&|k| k * k).sqrt();
    let mut grad_sobolev = BTreeMap::new();
    let mut zhidkov = BTreeMap::new();
    for k in 1..=max_k {
        let s = k - 1;
        let g = if s == 0 {
            grad_l2
        } else {
            weighted(&|q| (1.0 + q).powi(s as i32) * q).sqrt()
        };
        grad_sobolev.insert(s, g);
        zhidkov.insert(k, linf + g);
    }
    let fourier_l1 =
        spectrum.iter().map(|s| s.norm()).sum::<f64>() * grid.dk().powi(grid.dim() as i32);

    Ok(NormReport {
        linf,
        l2,
        l4,
        grad_l2,
        lap_l2,
        grad_sobolev,
        zhidkov,
        fourier_l1,
    })
}

/// `||u||_{H^s}` with the spectral weight `(1 + |k|²)^s`.
pub fn sobolev_norm(u: &ComplexField, s: f64) -> Result<f64> {
    u.ensure_finite()?;
    let spectrum = u.spectrum();
    let sum: f64 = spectrum
        .iter()
        .zip(u.grid().k_squared())
        .map(|(z, &k)| (1.0 + k).powf(s) * z.norm_sqr())
        .sum();
    Ok((sum * parseval_weight(u)).sqrt())
}

/// `||u||_{L²}` by lattice quadrature.
pub fn l2_norm(u: &ComplexField) -> f64 {
    (u.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * u.grid().cell_volume()).sqrt()
}

/// `dk^D / (2π)^D`, the factor turning `Σ |û|²` into `||u||²_{L²}`.
pub(crate) fn parseval_weight(u: &ComplexField) -> f64 {
    let g = u.grid();
    (g.dk() / (2.0 * PI)).powi(g.dim() as i32)
}
