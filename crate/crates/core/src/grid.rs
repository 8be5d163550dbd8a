//! Periodic lattice standing in for R^D.
//!
//! Nodes sit at `x = i * dx` for `i = 0..N` along every axis, so the
//! domain center `L/2` is itself a node. Flat indices are row-major with
//! axis 0 slowest. Wavenumbers follow the FFT ordering: index `i` carries
//! the integer mode `m = i` for `i < N/2` and `m = i - N` otherwise.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this many values the transforms stay on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Plain-data description of a grid, as it appears in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub length_per_axis: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        make_grid(self.dim, self.points_per_axis, self.length_per_axis)
    }
}

#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    dx: f64,
    wavenumbers: Vec<f64>,
    modes: Vec<i64>,
    k2: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Builds a `dim`-dimensional periodic grid with `points_per_axis` nodes
/// and side `length_per_axis` on every axis.
pub fn make_grid(dim: usize, points_per_axis: usize, length_per_axis: f64) -> Result<Grid> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidGrid(format!(
            "dimension must be 1 or 2, got {dim}"
        )));
    }
    if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "points per axis must be a power of two >= 8, got {points_per_axis}"
        )));
    }
    if !(length_per_axis.is_finite() && length_per_axis > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "length per axis must be positive and finite, got {length_per_axis}"
        )));
    }

    let n = points_per_axis;
    let modes: Vec<i64> = (0..n as i64)
        .map(|i| if i < n as i64 / 2 { i } else { i - n as i64 })
        .collect();
    let wavenumbers: Vec<f64> = modes
        .iter()
        .map(|&m| 2.0 * PI * m as f64 / length_per_axis)
        .collect();
    let k2 = match dim {
        1 => wavenumbers.iter().map(|k| k * k).collect(),
        _ => {
            let mut k2 = Vec::with_capacity(n * n);
            for kx in &wavenumbers {
                for ky in &wavenumbers {
                    k2.push(kx * kx + ky * ky);
                }
            }
            k2
        }
    };

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    Ok(Grid {
        inner: Arc::new(GridInner {
            dim,
            n,
            length: length_per_axis,
            dx: length_per_axis / n as f64,
            wavenumbers,
            modes,
            k2,
            forward,
            inverse,
        }),
    })
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn dx(&self) -> f64 {
        self.inner.dx
    }

    /// Total number of lattice nodes, `N^D`.
    pub fn len(&self) -> usize {
        self.inner.n.pow(self.inner.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one lattice cell, `dx^D`.
    pub fn cell_volume(&self) -> f64 {
        self.inner.dx.powi(self.inner.dim as i32)
    }

    /// Spacing of the dual lattice, `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.inner.length
    }

    /// Per-axis wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Per-axis integer modes in FFT order.
    pub fn modes(&self) -> &[i64] {
        &self.inner.modes
    }

    /// `|k|^2` at every flat spectral index.
    pub fn k_squared(&self) -> &[f64] {
        &self.inner.k2
    }

    pub fn k_squared_max(&self) -> f64 {
        let kn = PI / self.inner.dx;
        self.inner.dim as f64 * kn * kn
    }

    /// Splits a flat index into per-axis indices; unused axes are zero.
    pub fn unravel(&self, p: usize) -> [usize; 2] {
        match self.inner.dim {
            1 => [p, 0],
            _ => [p / self.inner.n, p % self.inner.n],
        }
    }

    pub fn ravel(&self, idx: [usize; 2]) -> usize {
        match self.inner.dim {
            1 => idx[0],
            _ => idx[0] * self.inner.n + idx[1],
        }
    }

    /// Wavenumber along `axis` at flat spectral index `p`.
    pub fn k_axis(&self, p: usize, axis: usize) -> f64 {
        self.inner.wavenumbers[self.unravel(p)[axis]]
    }

    /// Node coordinates; the second entry is zero in 1D.
    pub fn position(&self, p: usize) -> [f64; 2] {
        let [i, j] = self.unravel(p);
        let dx = self.inner.dx;
        match self.inner.dim {
            1 => [i as f64 * dx, 0.0],
            _ => [i as f64 * dx, j as f64 * dx],
        }
    }

    /// Displacement of node `p` from the domain center, per axis.
    pub fn offset_from_center(&self, p: usize) -> [f64; 2] {
        let [i, j] = self.unravel(p);
        let half = (self.inner.n / 2) as f64;
        let dx = self.inner.dx;
        match self.inner.dim {
            1 => [(i as f64 - half) * dx, 0.0],
            _ => [(i as f64 - half) * dx, (j as f64 - half) * dx],
        }
    }

    /// Euclidean distance of node `p` from the domain center, without
    /// wrapping around the torus.
    pub fn radius(&self, p: usize) -> f64 {
        let [a, b] = self.offset_from_center(p);
        (a * a + b * b).sqrt()
    }

    /// True when both per-axis modes lie inside the 2/3-rule band.
    pub fn in_dealias_band(&self, p: usize) -> bool {
        let cut = self.inner.n as i64 / 3;
        let [i, j] = self.unravel(p);
        let m = &self.inner.modes;
        match self.inner.dim {
            1 => m[i].abs() <= cut,
            _ => m[i].abs() <= cut && m[j].abs() <= cut,
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dim: self.inner.dim,
            points_per_axis: self.inner.n,
            length_per_axis: self.inner.length,
        }
    }

    pub(crate) fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }

    /// Unnormalized in-place DFT (sign -1) over all axes.
    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.forward);
    }

    /// Unnormalized in-place inverse DFT (sign +1) over all axes.
    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.inverse);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        let n = self.inner.n;
        rows(data, n, plan);
        if self.inner.dim == 2 {
            transpose_square(data, n);
            rows(data, n, plan);
            transpose_square(data, n);
        }
    }
}

thread_local! {
    static FFT_SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

fn process(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
    FFT_SCRATCH.with(|cell| {
        let mut scratch = cell.borrow_mut();
        let need = plan.get_inplace_scratch_len();
        if scratch.len() < need {
            scratch.resize(need, Complex64::default());
        }
        plan.process_with_scratch(data, &mut scratch[..need]);
    });
}

fn rows(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    if data.len() >= PARALLEL_THRESHOLD && data.len() > n && rayon::current_num_threads() > 1 {
        let rows_per_task = (PARALLEL_THRESHOLD / n).max(1);
        data.par_chunks_mut(rows_per_task * n)
            .for_each(|chunk| process(plan, chunk));
    } else {
        process(plan, data);
    }
}

const TILE: usize = 32;

fn transpose_square(data: &mut [Complex64], n: usize) {
    for bi in (0..n).step_by(TILE) {
        for bj in (bi..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + TILE).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.dim == other.inner.dim
            && self.inner.n == other.inner.n
            && self.inner.length == other.inner.length
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("points_per_axis", &self.inner.n)
            .field("length_per_axis", &self.inner.length)
            .finish()
    }
}
