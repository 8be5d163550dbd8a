//! Functional inequalities behind global existence in 2D, checked on
//! lattice fields and trajectories.
//!
//! Continuum constants are derived for the unitary transform
//! `(2π)^{-D/2} ∫ u e^{-ik·x} dx`; the lattice Fourier-L¹ norm of
//! [`crate::norms`] is rescaled accordingly before comparison.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsFrame;
use crate::dynamics::{u_dot, Trajectory};
use crate::energy::energy;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::norms::{l2_norm, norms, sobolev_norm};
use crate::spectral;
use crate::verdict::InequalityVerdict;

/// Multiplicative allowance for lattice sums standing in for integrals.
pub const DISCRETIZATION_SLACK: f64 = 1.05;

/// Constant in the Gagliardo-Nirenberg check `||∇u||²_{L⁴} <= c ||∇u|| ||Δu||`.
pub const GAGLIARDO_NIRENBERG_CONSTANT: f64 = 2.0;

/// Allowance for the a-priori bound on `||Δu||`, which is a triangle
/// inequality and exact up to rounding.
pub const APRIORI_TOLERANCE: f64 = 1e-10;

/// Relative allowance when comparing measured `||w||²` to its envelope.
pub const ENVELOPE_RELATIVE_TOLERANCE: f64 = 1e-9;

fn require_2d(u: &ComplexField, op: &'static str) -> Result<()> {
    match u.grid().dim() {
        2 => Ok(()),
        found => Err(Error::Dimension {
            op,
            required: 2,
            found,
        }),
    }
}

/// Right-hand side `√π (||φ||_{H¹} log(1+R²)^{1/2} + ||Δφ|| / R)` without
/// slack, for sweeps over `R`.
pub fn frequency_split_rhs(phi: &ComplexField, radius: f64) -> Result<f64> {
    let h1 = sobolev_norm(phi, 1.0)?;
    let lap = l2_norm(&spectral::laplacian(phi)?);
    Ok(PI.sqrt() * (h1 * (1.0 + radius * radius).ln().sqrt() + lap / radius))
}

/// `||φ̂||_{L¹} <= c (||φ||_{H¹} log(1+R²)^{1/2} + ||Δφ||_{L²} R^{-1})` in 2D.
///
/// Cauchy-Schwarz on `|ξ| <= R` and `|ξ| >= R` with
/// `∫_{|ξ|<=R} dξ/(1+|ξ|²) = π log(1+R²)` and `∫_{|ξ|>=R} dξ/|ξ|⁴ = π/R²`
/// gives `c = √π`, used here with the 5% lattice slack.
pub fn frequency_split_bound(phi: &ComplexField, radius: f64) -> Result<InequalityVerdict> {
    require_2d(phi, "frequency_split_bound")?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "R must be positive, got {radius}"
        )));
    }
    let lhs = norms(phi, 1)?.fourier_l1 / (2.0 * PI);
    let constant = PI.sqrt() * DISCRETIZATION_SLACK;
    let rhs = frequency_split_rhs(phi, radius)? * DISCRETIZATION_SLACK;
    Ok(InequalityVerdict::new("freq_split", lhs, rhs, constant))
}

/// `||∇u||²_{L⁴} <= 2 ||∇u||_{L²} ||Δu||_{L²}` in 2D.
pub fn gagliardo_nirenberg_check(u: &ComplexField) -> Result<InequalityVerdict> {
    require_2d(u, "gagliardo_nirenberg_check")?;
    u.ensure_finite()?;
    let grad = spectral::gradient_unchecked(u);
    let dv = u.grid().cell_volume();
    let mut l4 = 0.0;
    let mut l2 = 0.0;
    for p in 0..u.len() {
        let g2: f64 = grad.iter().map(|g| g.values()[p].norm_sqr()).sum();
        l4 += g2 * g2;
        l2 += g2;
    }
    let lhs = (l4 * dv).sqrt();
    let grad_l2 = (l2 * dv).sqrt();
    let lap_l2 = l2_norm(&spectral::laplacian_unchecked(u));
    if grad_l2 * lap_l2 <= 1e-14 * (1.0 + lhs) {
        return Err(Error::Degenerate(
            "Gagliardo-Nirenberg ratio is undefined for a constant field".into(),
        ));
    }
    Ok(InequalityVerdict::new(
        "gn",
        lhs,
        GAGLIARDO_NIRENBERG_CONSTANT * grad_l2 * lap_l2,
        GAGLIARDO_NIRENBERG_CONSTANT,
    ))
}

/// `(1 + √E)(1 + log(1 + ||Δu||²))^{1/2}`, the Brezis-Gallouët scale.
fn brezis_gallouet_scale(u: &ComplexField) -> Result<f64> {
    let e = energy(u)?.total;
    let lap = l2_norm(&spectral::laplacian_unchecked(u));
    Ok((1.0 + e.sqrt()) * (1.0 + (1.0 + lap * lap).ln()).sqrt())
}

/// `||u||_∞ / ((1 + √E)(1 + log(1 + ||Δu||²))^{1/2})`: the smallest
/// constant for which the Brezis-Gallouët bound holds on `u`.
pub fn brezis_gallouet_ratio(u: &ComplexField) -> Result<f64> {
    Ok(u.max_abs() / brezis_gallouet_scale(u)?)
}

/// `||u||_∞ <= c (1 + √E)(1 + log(1 + ||Δu||²))^{1/2}` with the supplied `c`.
pub fn brezis_gallouet_bound(u: &ComplexField, constant: f64) -> Result<InequalityVerdict> {
    require_2d(u, "brezis_gallouet_bound")?;
    let scale = brezis_gallouet_scale(u)?;
    Ok(InequalityVerdict::new(
        "bg",
        u.max_abs(),
        constant * scale,
        constant,
    ))
}

/// Empirical Brezis-Gallouët constant: the largest ratio over a corpus.
pub fn fit_brezis_gallouet(corpus: &[ComplexField]) -> Result<f64> {
    let ratios = corpus
        .par_iter()
        .map(brezis_gallouet_ratio)
        .collect::<Result<Vec<f64>>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// `||Δu|| <= ||u_t|| + 2 ||u||_∞ √E`, from `Δu = -i u_t - u(1-|u|²)` and
/// `||1-|u|²||_{L²} = 2 √(potential) <= 2 √E`.
pub fn apriori_laplacian_bound(u: &ComplexField) -> Result<InequalityVerdict> {
    let lap = l2_norm(&spectral::laplacian(u)?);
    let w = l2_norm(&u_dot(u)?);
    let e = energy(u)?.total;
    Ok(InequalityVerdict::with_tolerance(
        "apriori",
        lap,
        w + 2.0 * u.max_abs() * e.sqrt(),
        2.0,
        APRIORI_TOLERANCE,
    ))
}

#[derive(Clone, Debug)]
pub struct WIdentityReport {
    /// Max over interior samples of `|d/dt ½||w||² - flux|`.
    pub residual: f64,
    /// Per-frame `|flux| <= 2 ||u||²_∞ ||w||²`.
    pub majorization: Vec<InequalityVerdict>,
    pub half_w_sq: Vec<f64>,
    pub flux: Vec<f64>,
}

/// Checks the evolution of `w = u_t` along a trajectory:
/// `½ d/dt ||w||² = -2 ∫ Re(w ū) Im(w ū)`.
///
/// Multiplying `i w_t + Δw + w(1-|u|²) - 2 Re(wū) u = 0` by `w̄` and keeping
/// the imaginary part leaves only the last term, whose imaginary part is
/// `-2 Re(wū) Im(w̄u) = 2 Re(wū) Im(wū)`; moving it across gives the sign
/// above. The time derivative is a centered difference on saved frames.
pub fn w_energy_identity_residual(trajectory: &Trajectory) -> Result<WIdentityReport> {
    let n = trajectory.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let per_frame = trajectory
        .states
        .par_iter()
        .map(|u| {
            let w = u_dot(u)?;
            let dv = u.grid().cell_volume();
            let mut w_sq = 0.0;
            let mut flux = 0.0;
            for (wz, uz) in w.values().iter().zip(u.values()) {
                w_sq += wz.norm_sqr();
                let q = wz * uz.conj();
                flux += q.re * q.im;
            }
            Ok((0.5 * w_sq * dv, -2.0 * flux * dv, u.max_abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let h = trajectory.save_interval();
    let mut residual: f64 = 0.0;
    for i in 1..n - 1 {
        let lhs = (per_frame[i + 1].0 - per_frame[i - 1].0) / (2.0 * h);
        residual = residual.max((lhs - per_frame[i].1).abs());
    }
    let majorization = per_frame
        .iter()
        .zip(&trajectory.times)
        .map(|(&(half_w, flux, linf), &t)| {
            InequalityVerdict::new(
                "w_majorization",
                flux.abs(),
                4.0 * linf * linf * half_w,
                2.0,
            )
            .at_time(t)
        })
        .collect();
    Ok(WIdentityReport {
        residual,
        majorization,
        half_w_sq: per_frame.iter().map(|f| f.0).collect(),
        flux: per_frame.iter().map(|f| f.1).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallEnvelope {
    /// Rate constant of `y' = 2 C (1 + log(2 + y)) y`.
    pub c_tilde: f64,
    /// `||w(0)||²`.
    pub y0: f64,
    pub times: Vec<f64>,
    /// Comparison-ODE solution at each frame time (may saturate to +∞).
    pub envelope: Vec<f64>,
    /// Measured `||w(t)||²`.
    pub measured: Vec<f64>,
    /// `||w(t)||_{L²} <= exp(a exp(b t))`.
    pub double_exp_a: f64,
    pub double_exp_b: f64,
    /// Forward-difference estimate of the rate the data needs at `t = 0`.
    pub initial_slope_constant: f64,
    /// `max_t measured / envelope`.
    pub max_ratio: f64,
    pub dominated: bool,
}

/// Comparison function for `½ d/dt ||w||² <= C (1 + log(2 + ||w||²)) ||w||²`.
///
/// The envelope solves `y' = 2 C (1 + log(2 + y)) y` from `y(0) = ||w(0)||²`
/// with RK4, sub-stepping each frame interval so that the local rate times
/// the substep stays below 0.05. With `z = log(2 + y)` the ODE gives
/// `1 + z <= (1 + z0) e^{2Ct}`, hence `||w|| <= exp(a e^{bt})` with
/// `a = (1 + log(2 + y0)) / 2` and `b = 2C`.
pub fn gronwall_envelope(diag: &[DiagnosticsFrame], c_fit: f64) -> Result<GronwallEnvelope> {
    if !(c_fit.is_finite() && c_fit >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "comparison constant must be finite and >= 0, got {c_fit}"
        )));
    }
    if diag.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let times: Vec<f64> = diag.iter().map(|f| f.t).collect();
    let measured: Vec<f64> = diag.iter().map(|f| f.w_l2 * f.w_l2).collect();
    let y0 = measured[0];
    let rate = |y: f64| 2.0 * c_fit * (1.0 + (2.0 + y).ln()) * y;

    let mut envelope = Vec::with_capacity(diag.len());
    envelope.push(y0);
    let mut y = y0;
    for w in times.windows(2) {
        let span = (w[1] - w[0]).abs();
        if y.is_finite() && c_fit > 0.0 && span > 0.0 {
            let mut remaining = span;
            while remaining > 0.0 && y.is_finite() {
                let local = 2.0 * c_fit * (1.0 + (2.0 + y).ln());
                let h = remaining.min(0.05 / local);
                let k1 = rate(y);
                let k2 = rate(y + 0.5 * h * k1);
                let k3 = rate(y + 0.5 * h * k2);
                let k4 = rate(y + h * k3);
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                remaining -= h;
                if !y.is_finite() || y > f64::MAX / 4.0 {
                    y = f64::INFINITY;
                }
            }
        }
        envelope.push(y);
    }

    let initial_slope_constant = match (measured.get(1), times.get(1)) {
        (Some(&y1), Some(&t1)) if y0 > 0.0 && t1 != times[0] => {
            ((y1 - y0) / (t1 - times[0]).abs() / (2.0 * (1.0 + (2.0 + y0).ln()) * y0)).max(0.0)
        }
        _ => 0.0,
    };
    let mut max_ratio: f64 = 0.0;
    let mut dominated = true;
    for (&m, &e) in measured.iter().zip(&envelope) {
        if m > e * (1.0 + ENVELOPE_RELATIVE_TOLERANCE) + f64::MIN_POSITIVE {
            dominated = false;
        }
        let r = if e > 0.0 {
            m / e
        } else if m > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        max_ratio = max_ratio.max(r);
    }

    Ok(GronwallEnvelope {
        c_tilde: c_fit,
        y0,
        times,
        envelope,
        measured,
        double_exp_a: 0.5 * (1.0 + (2.0 + y0).ln()),
        double_exp_b: 2.0 * c_fit,
        initial_slope_constant,
        max_ratio,
        dominated,
    })
}

/// Rate constant for the envelope from a Brezis-Gallouët constant and a
/// run's diagnostics: `C = 2 c_bg² (1 + √E)² Λ`, where
/// `Λ = max_t (1 + log(1 + ||Δu||²)) / (1 + log(2 + ||w||²))` turns the
/// `||Δu||` dependence into a `||w||` dependence frame by frame.
pub fn gronwall_constant(diag: &[DiagnosticsFrame], bg_constant: f64) -> f64 {
    let energy = diag.iter().map(|f| f.energy.total).fold(0.0, f64::max);
    let lambda = diag
        .iter()
        .map(|f| {
            let lap = f.norms.lap_l2;
            let w = f.w_l2;
            (1.0 + (1.0 + lap * lap).ln()) / (1.0 + (2.0 + w * w).ln())
        })
        .fold(0.0, f64::max);
    2.0 * bg_constant * bg_constant * (1.0 + energy.sqrt()).powi(2) * lambda
}
