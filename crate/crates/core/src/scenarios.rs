//! Initial data on the torus with `|u| → 1` away from localized features.
//!
//! A single dark or gray soliton connects two different far-field phases
//! and cannot live on a periodic lattice. Solitons are therefore always
//! embedded in counter-phased pairs: a right-moving `u_c` and its mirror
//! image, which moves left. The product `-u_c(x - x_r) · u_c(-(x - x_l))`
//! equals `+1` at the seam, and each factor is within `e^{-√(2-c²)·d}` of a
//! constant near the other soliton.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::{make_grid, Grid};

/// Largest perturbation amplitude accepted by [`random_zhidkov`].
pub const MAX_RANDOM_AMPLITUDE: f64 = 0.5;

/// Image vortices summed on each side along the dipole axis.
const DIPOLE_IMAGES: i32 = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    Uniform,
    ConstantValue {
        value: Complex64,
    },
    /// Stationary pair; positions default to `L/4` and `3L/4`.
    DarkPair {
        #[serde(default)]
        positions: Option<[f64; 2]>,
    },
    /// Counter-propagating gray pair of speed `|speed| < √2`.
    GraySoliton {
        speed: f64,
        /// Initial center of the right-moving soliton (default `L/4`).
        #[serde(default)]
        right_mover_at: Option<f64>,
        /// Initial center of the left-moving soliton (default `3L/4`).
        #[serde(default)]
        left_mover_at: Option<f64>,
    },
    /// Vortex (+1) and antivortex (-1) on the vertical line through the
    /// domain center, `separation` apart.
    VortexDipole {
        #[serde(default = "default_dipole_separation")]
        separation: f64,
    },
    RandomZhidkov {
        seed: u64,
        amplitude: f64,
        mode_cutoff: usize,
    },
}

fn default_dipole_separation() -> f64 {
    8.0
}

pub fn generate(spec: &ScenarioSpec, grid: &Grid) -> Result<ComplexField> {
    let l = grid.length();
    match *spec {
        ScenarioSpec::Uniform => Ok(ComplexField::constant(grid, Complex64::new(1.0, 0.0))),
        ScenarioSpec::ConstantValue { value } => {
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(Error::InvalidScenario(
                    "constant value must be finite".into(),
                ));
            }
            Ok(ComplexField::constant(grid, value))
        }
        ScenarioSpec::DarkPair { positions } => {
            let [a, b] = positions.unwrap_or([0.25 * l, 0.75 * l]);
            gray_pair(grid, 0.0, a, b, 0.0)
        }
        ScenarioSpec::GraySoliton {
            speed,
            right_mover_at,
            left_mover_at,
        } => gray_pair(
            grid,
            speed,
            right_mover_at.unwrap_or(0.25 * l),
            left_mover_at.unwrap_or(0.75 * l),
            0.0,
        ),
        ScenarioSpec::VortexDipole { separation } => vortex_dipole(grid, separation),
        ScenarioSpec::RandomZhidkov {
            seed,
            amplitude,
            mode_cutoff,
        } => random_zhidkov(seed, amplitude, mode_cutoff, grid),
    }
}

/// Exact traveling wave `u_c(ξ) = a tanh(a ξ/√2) + i c/√2`, `a = √(1 - c²/2)`.
pub fn gray_profile(speed: f64, xi: f64) -> Complex64 {
    let a = (1.0 - 0.5 * speed * speed).sqrt();
    Complex64::new(a * (a * xi / SQRT_2).tanh(), speed / SQRT_2)
}

/// Closed-form energy of one gray soliton, `(2 - c²)^{3/2} / 3`.
pub fn gray_soliton_energy(speed: f64) -> f64 {
    (2.0 - speed * speed).powf(1.5) / 3.0
}

/// The counter-phased pair at time `t`: right mover started at `x_right`,
/// left mover at `x_left`. At `t = 0` this is the gray-soliton scenario;
/// for `t > 0` it is the exact translate used as a reference solution.
pub fn gray_pair(
    grid: &Grid,
    speed: f64,
    x_right: f64,
    x_left: f64,
    t: f64,
) -> Result<ComplexField> {
    require_dim(grid, 1, "soliton pair")?;
    if speed.is_nan() || speed.abs() >= SQRT_2 {
        return Err(Error::InvalidScenario(format!(
            "no traveling wave with |c| = {} >= √2",
            speed.abs()
        )));
    }
    let l = grid.length();
    for x in [x_right, x_left] {
        if !(0.0..l).contains(&x) {
            return Err(Error::InvalidScenario(format!(
                "soliton center {x} outside [0, {l})"
            )));
        }
    }
    let (r, s) = (x_right + speed * t, x_left - speed * t);
    Ok(ComplexField::from_fn(grid, |[x, _]| {
        -gray_profile(speed, x - r) * gray_profile(speed, s - x)
    }))
}

/// Tensor-extends a 1D field along a second axis of the same resolution.
pub fn extrude(field: &ComplexField) -> Result<ComplexField> {
    let g1 = field.grid();
    require_dim(g1, 1, "extrude")?;
    let g2 = make_grid(2, g1.points_per_axis(), g1.length())?;
    let n = g1.points_per_axis();
    let values = (0..g2.len()).map(|p| field.values()[p / n]).collect();
    ComplexField::new(&g2, values)
}

fn vortex_dipole(grid: &Grid, separation: f64) -> Result<ComplexField> {
    require_dim(grid, 2, "vortex dipole")?;
    let l = grid.length();
    if !(separation > 0.0 && separation < 0.5 * l) {
        return Err(Error::InvalidScenario(format!(
            "dipole separation must lie in (0, L/2), got {separation}"
        )));
    }
    let center = 0.5 * l;
    let plus = [center, center + 0.5 * separation];
    let minus = [center, center - 0.5 * separation];
    let core = |x: f64, y: f64, v: [f64; 2]| {
        let dx = wrap(x - v[0], l);
        let dy = wrap(y - v[1], l);
        ((dx * dx + dy * dy).sqrt() / SQRT_2).tanh()
    };
    // The phase of sin(π(z - z0)/L) winds once around z0 and is periodic
    // in x; summing images along y makes the dipole phase periodic in y.
    let phase = |x: f64, y: f64| {
        let z = Complex64::new(x, y);
        let mut w = Complex64::new(1.0, 0.0);
        for n in -DIPOLE_IMAGES..=DIPOLE_IMAGES {
            let shift = Complex64::new(0.0, n as f64 * l);
            let a = ((z - Complex64::new(plus[0], plus[1]) - shift) * (PI / l)).sin();
            let b = ((z - Complex64::new(minus[0], minus[1]) - shift) * (PI / l)).sin();
            let f = a * b.conj();
            let m = f.norm();
            if m > 0.0 {
                w *= f / m;
            }
        }
        w
    };
    Ok(ComplexField::from_fn(grid, |[x, y]| {
        phase(x, y) * (core(x, y, plus) * core(x, y, minus))
    }))
}

/// `u = 1 + Σ a_m e^{i k_m·x}` over nonzero modes with `|m|_∞ <= mode_cutoff`.
///
/// Coefficients are standard complex normals drawn from `seed` in a fixed
/// mode order, so the continuum field does not depend on the lattice. They
/// are scaled so that `sup |u - 1| = amplitude`, with the supremum taken
/// over both a fine reference lattice and the target lattice.
pub fn random_zhidkov(
    seed: u64,
    amplitude: f64,
    mode_cutoff: usize,
    grid: &Grid,
) -> Result<ComplexField> {
    if !(0.0..=MAX_RANDOM_AMPLITUDE).contains(&amplitude) {
        return Err(Error::InvalidScenario(format!(
            "amplitude must lie in [0, {MAX_RANDOM_AMPLITUDE}], got {amplitude}"
        )));
    }
    let n = grid.points_per_axis();
    if mode_cutoff == 0 || mode_cutoff > n / 3 {
        return Err(Error::InvalidScenario(format!(
            "mode cutoff must lie in [1, N/3 = {}], got {mode_cutoff}",
            n / 3
        )));
    }
    let one = ComplexField::constant(grid, Complex64::new(1.0, 0.0));
    if amplitude == 0.0 {
        return Ok(one);
    }

    let coefficients = draw_coefficients(seed, mode_cutoff, grid.dim());
    let reference_n = (16 * mode_cutoff).max(64).next_power_of_two();
    let reference = make_grid(grid.dim(), reference_n, grid.length())?;
    let on_reference = synthesize(&reference, &coefficients);
    let on_grid = synthesize(grid, &coefficients);
    let sup = on_reference
        .iter()
        .chain(&on_grid)
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let scale = amplitude / sup;
    let values = on_grid.iter().map(|z| 1.0 + z * scale).collect();
    ComplexField::new(grid, values)
}

type Coefficient = ([i64; 2], Complex64);

fn draw_coefficients(seed: u64, cutoff: usize, dim: usize) -> Vec<Coefficient> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = cutoff as i64;
    let second: Vec<i64> = if dim == 1 {
        vec![0]
    } else {
        (-c..=c).collect()
    };
    let mut out = Vec::new();
    for m0 in -c..=c {
        for &m1 in &second {
            if m0 == 0 && m1 == 0 {
                continue;
            }
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            out.push(([m0, m1], Complex64::new(re, im)));
        }
    }
    out
}

fn synthesize(grid: &Grid, coefficients: &[Coefficient]) -> Vec<Complex64> {
    let n = grid.points_per_axis() as i64;
    let mut data = vec![Complex64::default(); grid.len()];
    for &([m0, m1], a) in coefficients {
        let i = m0.rem_euclid(n) as usize;
        let j = m1.rem_euclid(n) as usize;
        data[grid.ravel([i, j])] += a;
    }
    grid.fft_inverse(&mut data);
    data
}

fn wrap(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

fn require_dim(grid: &Grid, required: usize, what: &'static str) -> Result<()> {
    if grid.dim() == required {
        Ok(())
    } else {
        Err(Error::Dimension {
            op: what,
            required,
            found: grid.dim(),
        })
    }
}
