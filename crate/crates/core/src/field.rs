//! Complex lattice functions and their spectral representation.
//!
//! Transform convention: `û(k) = Σ u(x) e^{-ik·x} dx^D`, inverted by
//! `u(x) = (2π)^{-D} Σ û(k) e^{ik·x} dk^D`. This is the lattice analogue
//! of the continuum Fourier transform, so `||u||_∞ <= (2π)^{-D} ||û||_{L¹}`
//! with `||û||_{L¹} = Σ |û(k)| dk^D`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;

const PARALLEL_THRESHOLD: usize = 1 << 14;

#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn constant(grid: &Grid, value: Complex64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every node position (`[x, 0]` in 1D).
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> Complex64 + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|p| f(grid.position(p)))
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Builds a field from its spectrum in the module's convention.
    pub fn from_spectrum(grid: &Grid, spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: spectrum.len(),
            });
        }
        let mut values = spectrum;
        grid.fft_inverse(&mut values);
        let scale = 1.0 / grid.length().powi(grid.dim() as i32);
        scale_in_place(&mut values, scale);
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fails on the first NaN or infinite component.
    pub fn ensure_finite(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn ensure_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Lattice Fourier transform, `dx^D · DFT(u)`, in FFT order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        self.grid.fft_forward(&mut data);
        scale_in_place(&mut data, self.grid.cell_volume());
        data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync + Send) -> ComplexField {
        let values = if self.values.len() >= PARALLEL_THRESHOLD {
            self.values.par_iter().map(|&z| f(z)).collect()
        } else {
            self.values.iter().map(|&z| f(z)).collect()
        };
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scale(&self, alpha: Complex64) -> ComplexField {
        self.map(|z| z * alpha)
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Applies a pointwise spectral multiplier `m(p)` (indexed by flat
    /// spectral position) and returns to physical space.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> Complex64 + Sync) -> ComplexField {
        let mut data = self.values.clone();
        let grid = &self.grid;
        grid.fft_forward(&mut data);
        let norm = 1.0 / grid.len() as f64;
        if data.len() >= PARALLEL_THRESHOLD {
            data.par_iter_mut()
                .enumerate()
                .for_each(|(p, z)| *z *= m(p) * norm);
        } else {
            for (p, z) in data.iter_mut().enumerate() {
                *z *= m(p) * norm;
            }
        }
        grid.fft_inverse(&mut data);
        Self {
            grid: grid.clone(),
            values: data,
        }
    }

    fn zip_with(
        &self,
        other: &ComplexField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<ComplexField> {
        self.ensure_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a * b)
    }
}

impl Add for &ComplexField {
    type Output = ComplexField;

    /// Panics when the grids differ; use [`ComplexField::try_add`] otherwise.
    fn add(self, rhs: &ComplexField) -> ComplexField {
        self.try_add(rhs).expect("grid mismatch")
    }
}

impl Sub for &ComplexField {
    type Output = ComplexField;

    fn sub(self, rhs: &ComplexField) -> ComplexField {
        self.try_sub(rhs).expect("grid mismatch")
    }
}

impl Mul<f64> for &ComplexField {
    type Output = ComplexField;

    fn mul(self, rhs: f64) -> ComplexField {
        self.map(|z| z * rhs)
    }
}

pub(crate) fn scale_in_place(data: &mut [Complex64], s: f64) {
    if data.len() >= PARALLEL_THRESHOLD {
        data.par_iter_mut().for_each(|z| *z *= s);
    } else {
        data.iter_mut().for_each(|z| *z *= s);
    }
}
