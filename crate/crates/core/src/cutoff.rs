//! Radial cutoffs θ_j: equal to 1 for `|x - center| <= j`, 0 for
//! `|x - center| >= j + 1`, with `|∇θ_j| <= 2`.
//!
//! Two ramp shapes are available. `Linear` is the piecewise-linear ramp
//! of slope 1. `Smooth` is the C^∞ transition `f(s)/(f(s)+f(1-s))`,
//! `f(s) = e^{-1/s}`, whose steepest slope is exactly 2. The smooth ramp is
//! the one to use when the cutoff is multiplied against spectral
//! derivatives, since the lattice product rule then holds to spectral
//! accuracy instead of first order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    #[default]
    Linear,
    Smooth,
}

#[derive(Clone, Debug)]
pub struct Cutoff {
    pub j: usize,
    pub ramp: Ramp,
    pub values: Vec<f64>,
    /// Analytic gradient at each node, one entry per axis (second unused in 1D).
    pub gradient: Vec<[f64; 2]>,
    /// Supremum of `|∇θ_j|` for the chosen ramp.
    pub gradient_bound: f64,
}

pub fn make_cutoff(grid: &Grid, j: usize) -> Result<Cutoff> {
    make_cutoff_with(grid, j, Ramp::Linear)
}

pub fn make_cutoff_with(grid: &Grid, j: usize, ramp: Ramp) -> Result<Cutoff> {
    let outer = (j + 1) as f64;
    if outer >= grid.length() / 2.0 {
        return Err(Error::InvalidArgument(format!(
            "cutoff j = {j} needs j + 1 < L/2 = {}",
            grid.length() / 2.0
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut gradient = Vec::with_capacity(grid.len());
    for p in 0..grid.len() {
        let rho = grid.radius(p);
        let s = outer - rho;
        let (theta, slope) = match ramp {
            Ramp::Linear => linear(s),
            Ramp::Smooth => smooth(s),
        };
        values.push(theta);
        // dθ/dx_a = -slope · (x_a - c_a)/ρ
        let grad = if slope == 0.0 || rho == 0.0 {
            [0.0, 0.0]
        } else {
            let [a, b] = grid.offset_from_center(p);
            [-slope * a / rho, -slope * b / rho]
        };
        gradient.push(grad);
    }
    Ok(Cutoff {
        j,
        ramp,
        values,
        gradient,
        gradient_bound: match ramp {
            Ramp::Linear => 1.0,
            Ramp::Smooth => 2.0,
        },
    })
}

/// Value and derivative in `s = j + 1 - ρ`.
fn linear(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0)
    } else {
        (s, 1.0)
    }
}

fn smooth(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let f = |t: f64| (-1.0 / t).exp();
    let (a, b) = (f(s), f(1.0 - s));
    let (da, db) = (a / (s * s), b / ((1.0 - s) * (1.0 - s)));
    let sum = a + b;
    (a / sum, (da * b + a * db) / (sum * sum))
}
