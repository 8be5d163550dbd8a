//! Time integration of `i u_t + Δu + u(1 - |u|²) = 0`.
//!
//! The production scheme is Strang splitting: half a nonlinear step, a
//! full linear step, half a nonlinear step. The nonlinear flow keeps `|u|`
//! fixed pointwise, so its substep is the exact phase rotation
//! `u e^{i(1-|u|²)τ}`; the linear substep is the exact multiplier
//! `e^{-i|k|²τ}`. Classical RK4 on the full right-hand side serves as an
//! independent cross-check.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;

const I: Complex64 = Complex64::new(0.0, 1.0);
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Largest `||u||_∞` tolerated before a run is declared blown up.
pub const BLOW_UP_LINF: f64 = 100.0;

/// Largest time step accepted by the splitting scheme.
pub const STRANG_MAX_DT: f64 = 0.1;

/// RK4 is stable on the imaginary axis for `|λ dt| <= 2√2`.
const RK4_IMAGINARY_STABILITY: f64 = 2.0 * SQRT_2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    StrangSplit,
    Rk4Oracle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "one")]
    pub save_every: usize,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default)]
    pub direction: Direction,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64, method: Method) -> Self {
        Self {
            dt,
            t_end,
            method,
            save_every: 1,
            dealias: true,
            direction: Direction::Forward,
        }
    }

    pub fn save_every(mut self, n: usize) -> Self {
        self.save_every = n;
        self
    }

    pub fn dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }

    /// Signed step: negative when integrating backward in time.
    pub fn signed_dt(&self) -> f64 {
        match self.direction {
            Direction::Forward => self.dt,
            Direction::Backward => -self.dt,
        }
    }

    /// Total number of steps; fails unless `t_end` is a whole number of
    /// saves.
    pub fn step_count(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.save_every == 0 {
            return Err(Error::InvalidConfig("save_every must be at least 1".into()));
        }
        let steps = (self.t_end / self.dt).round();
        if steps < 1.0 || (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        let steps = steps as usize;
        if !steps.is_multiple_of(self.save_every) {
            return Err(Error::InvalidConfig(format!(
                "{steps} steps is not a multiple of save_every = {}",
                self.save_every
            )));
        }
        Ok(steps)
    }

    pub fn validate(&self, grid: &Grid) -> Result<usize> {
        let steps = self.step_count()?;
        match self.method {
            Method::StrangSplit if self.dt > STRANG_MAX_DT => Err(Error::InvalidConfig(format!(
                "splitting step {} exceeds the accuracy cap {STRANG_MAX_DT}",
                self.dt
            ))),
            Method::Rk4Oracle if self.dt > rk4_stability_limit(grid) => Err(Error::Stability {
                dt: self.dt,
                limit: rk4_stability_limit(grid),
            }),
            _ => Ok(steps),
        }
    }
}

/// Saved frames of one run. `states[0]` is the initial condition.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexField>,
    pub config: IntegratorConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &ComplexField {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    /// Spacing between saved frames (signed).
    pub fn save_interval(&self) -> f64 {
        self.config.signed_dt() * self.config.save_every as f64
    }

    /// Every `stride`-th saved frame, starting from the first.
    pub fn subsample(&self, stride: usize) -> Result<Trajectory> {
        if stride == 0 {
            return Err(Error::InvalidArgument("stride must be positive".into()));
        }
        let mut config = self.config.clone();
        config.save_every *= stride;
        let keep = (0..self.len()).step_by(stride);
        Ok(Trajectory {
            times: keep.clone().map(|i| self.times[i]).collect(),
            states: keep.map(|i| self.states[i].clone()).collect(),
            config,
        })
    }

    /// Frames with `|t - t0| <= horizon` (plus rounding slack).
    pub fn truncate_to(&self, horizon: f64) -> Trajectory {
        let t0 = self.times[0];
        let slack = 1e-9 * self.save_interval().abs();
        let n = self
            .times
            .iter()
            .take_while(|&&t| (t - t0).abs() <= horizon + slack)
            .count();
        let mut config = self.config.clone();
        config.t_end = horizon.min(config.t_end);
        Trajectory {
            times: self.times[..n].to_vec(),
            states: self.states[..n].to_vec(),
            config,
        }
    }
}

/// Largest RK4 step that keeps every linear mode inside the stability
/// region: `2√2 / max|k|²`.
pub fn rk4_stability_limit(grid: &Grid) -> f64 {
    RK4_IMAGINARY_STABILITY / grid.k_squared_max()
}

/// `u_t = i(Δu + u(1 - |u|²))`, evaluated without dealiasing so that the
/// equation holds pointwise on the lattice.
pub fn u_dot(u: &ComplexField) -> Result<ComplexField> {
    u_dot_with(u, false)
}

/// `u_t`, optionally projecting the cubic term onto the 2/3-rule band.
pub fn u_dot_with(u: &ComplexField, dealias: bool) -> Result<ComplexField> {
    u.ensure_finite()?;
    let mut out = vec![Complex64::default(); u.len()];
    let mut scratch = vec![Complex64::default(); u.len()];
    rhs(u.grid(), u.values(), &mut out, &mut scratch, dealias);
    ComplexField::new(u.grid(), out)
}

/// One Strang step of size `dt` (negative to go backward), with the
/// default 2/3-rule filter on the linear substep.
pub fn step_strang(u: &ComplexField, dt: f64) -> Result<ComplexField> {
    step_with(u, dt, Method::StrangSplit, true)
}

/// One classical RK4 step of size `dt` on [`u_dot_with`] (dealiased).
pub fn step_rk4(u: &ComplexField, dt: f64) -> Result<ComplexField> {
    step_with(u, dt, Method::Rk4Oracle, true)
}

pub fn step_with(u: &ComplexField, dt: f64, method: Method, dealias: bool) -> Result<ComplexField> {
    u.ensure_finite()?;
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time step must be nonzero, got {dt}"
        )));
    }
    if method == Method::Rk4Oracle && dt.abs() > rk4_stability_limit(u.grid()) {
        return Err(Error::Stability {
            dt: dt.abs(),
            limit: rk4_stability_limit(u.grid()),
        });
    }
    let mut stepper = Stepper::new(u.grid(), dt, method, dealias);
    let mut values = u.values().to_vec();
    stepper.step(&mut values);
    ComplexField::new(u.grid(), values)
}

/// Reusable single-run integrator state: precomputed propagators and
/// scratch buffers.
pub struct Stepper {
    grid: Grid,
    dt: f64,
    method: Method,
    dealias: bool,
    propagator: Vec<Complex64>,
    buffers: [Vec<Complex64>; 5],
    scratch: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: &Grid, dt: f64, method: Method, dealias: bool) -> Self {
        let n = grid.len();
        let norm = 1.0 / n as f64;
        let propagator = match method {
            Method::StrangSplit => grid
                .k_squared()
                .iter()
                .enumerate()
                .map(|(p, &k2)| {
                    if dealias && !grid.in_dealias_band(p) {
                        Complex64::default()
                    } else {
                        Complex64::from_polar(norm, -k2 * dt)
                    }
                })
                .collect(),
            Method::Rk4Oracle => Vec::new(),
        };
        let buf = || vec![Complex64::default(); n];
        Self {
            grid: grid.clone(),
            dt,
            method,
            dealias,
            propagator,
            buffers: [buf(), buf(), buf(), buf(), buf()],
            scratch: buf(),
        }
    }

    pub fn step(&mut self, u: &mut [Complex64]) {
        match self.method {
            Method::StrangSplit => self.strang(u),
            Method::Rk4Oracle => self.rk4(u),
        }
    }

    /// Advances `count` steps, calling `monitor(i, u)` after step `i`.
    ///
    /// For the splitting scheme the trailing half rotation of each step is
    /// merged with the leading half of the next, so `u` is exact only at
    /// the end of the block. Inside the block it differs from the true
    /// state by a pointwise phase, which leaves `|u|` and hence any
    /// modulus-based monitor unchanged.
    pub fn advance<E>(
        &mut self,
        u: &mut [Complex64],
        count: usize,
        mut monitor: impl FnMut(usize, &[Complex64]) -> std::result::Result<(), E>,
    ) -> std::result::Result<(), E> {
        match self.method {
            Method::StrangSplit => {
                if count == 0 {
                    return Ok(());
                }
                let half = 0.5 * self.dt;
                nonlinear_rotation(u, half);
                for i in 1..=count {
                    self.linear(u);
                    nonlinear_rotation(u, if i == count { half } else { self.dt });
                    monitor(i, u)?;
                }
            }
            Method::Rk4Oracle => {
                for i in 1..=count {
                    self.rk4(u);
                    monitor(i, u)?;
                }
            }
        }
        Ok(())
    }

    fn linear(&mut self, u: &mut [Complex64]) {
        self.grid.fft_forward(u);
        for (z, m) in u.iter_mut().zip(&self.propagator) {
            *z *= m;
        }
        self.grid.fft_inverse(u);
    }

    fn strang(&mut self, u: &mut [Complex64]) {
        let half = 0.5 * self.dt;
        nonlinear_rotation(u, half);
        self.linear(u);
        nonlinear_rotation(u, half);
    }

    fn rk4(&mut self, u: &mut [Complex64]) {
        let dt = self.dt;
        let [k1, k2, k3, k4, stage] = &mut self.buffers;
        let scratch = &mut self.scratch;
        rhs(&self.grid, u, k1, scratch, self.dealias);
        axpy(stage, u, k1, 0.5 * dt);
        rhs(&self.grid, stage, k2, scratch, self.dealias);
        axpy(stage, u, k2, 0.5 * dt);
        rhs(&self.grid, stage, k3, scratch, self.dealias);
        axpy(stage, u, k3, dt);
        rhs(&self.grid, stage, k4, scratch, self.dealias);
        let w = dt / 6.0;
        for i in 0..u.len() {
            u[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// `u ← u e^{i(1-|u|²)τ}`: exact flow of the nonlinear part.
pub fn nonlinear_rotation(u: &mut [Complex64], tau: f64) {
    let rotate = |z: &mut Complex64| {
        let phase = (1.0 - z.norm_sqr()) * tau;
        *z *= Complex64::new(phase.cos(), phase.sin());
    };
    if u.len() >= PARALLEL_THRESHOLD {
        u.par_iter_mut().for_each(rotate);
    } else {
        u.iter_mut().for_each(rotate);
    }
}

/// `out = i(Δu + N(u))` with `N(u) = u(1-|u|²)`, optionally dealiased.
fn rhs(
    grid: &Grid,
    u: &[Complex64],
    out: &mut [Complex64],
    scratch: &mut [Complex64],
    dealias: bool,
) {
    let n = u.len();
    let norm = 1.0 / n as f64;
    let k2 = grid.k_squared();
    out.copy_from_slice(u);
    grid.fft_forward(out);
    for (z, &k) in out.iter_mut().zip(k2) {
        *z *= -k;
    }
    if dealias {
        for (s, &z) in scratch.iter_mut().zip(u) {
            *s = z * (1.0 - z.norm_sqr());
        }
        grid.fft_forward(scratch);
        for (p, (o, s)) in out.iter_mut().zip(scratch.iter()).enumerate() {
            if grid.in_dealias_band(p) {
                *o += s;
            }
        }
        grid.fft_inverse(out);
        for z in out.iter_mut() {
            *z *= I * norm;
        }
    } else {
        grid.fft_inverse(out);
        for (o, &z) in out.iter_mut().zip(u) {
            *o = I * (*o * norm + z * (1.0 - z.norm_sqr()));
        }
    }
}

fn axpy(out: &mut [Complex64], u: &[Complex64], k: &[Complex64], h: f64) {
    for ((o, &a), &b) in out.iter_mut().zip(u).zip(k) {
        *o = a + h * b;
    }
}

/// Integrates from `u0` according to `cfg`, keeping every saved frame.
pub fn evolve(u0: &ComplexField, cfg: &IntegratorConfig) -> Result<Trajectory> {
    evolve_with(u0, cfg, |_, _| Ok(()))
}

/// Like [`evolve`], calling `on_frame(t, state)` for every saved frame
/// (including the initial one) as soon as it is produced.
pub fn evolve_with<F>(
    u0: &ComplexField,
    cfg: &IntegratorConfig,
    mut on_frame: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &ComplexField) -> Result<()>,
{
    let mut times = Vec::new();
    let mut states = Vec::new();
    evolve_streaming(u0, cfg, |t, u| {
        on_frame(t, u)?;
        times.push(t);
        states.push(u.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times,
        states,
        config: cfg.clone(),
    })
}

/// Integrates without keeping frames: each saved frame is passed to
/// `on_frame` and dropped. Returns the final state.
pub fn evolve_streaming<F>(
    u0: &ComplexField,
    cfg: &IntegratorConfig,
    mut on_frame: F,
) -> Result<ComplexField>
where
    F: FnMut(f64, &ComplexField) -> Result<()>,
{
    u0.ensure_finite()?;
    let steps = cfg.validate(u0.grid())?;
    let grid = u0.grid();
    let dt = cfg.signed_dt();
    let mut stepper = Stepper::new(grid, dt, cfg.method, cfg.dealias);

    on_frame(0.0, u0)?;
    let mut last_saved = (0.0, u0.clone());
    let mut values = u0.values().to_vec();
    for block in 0..steps / cfg.save_every {
        let first = block * cfg.save_every;
        stepper.advance(&mut values, cfg.save_every, |i, v| {
            match health_problem(v) {
                Some(reason) => Err(Error::BlowUp {
                    t: (first + i) as f64 * dt,
                    reason,
                    last_healthy_time: last_saved.0,
                    last_healthy: Box::new(last_saved.1.clone()),
                }),
                None => Ok(()),
            }
        })?;
        let t = (first + cfg.save_every) as f64 * dt;
        let frame = ComplexField::new(grid, values.clone())?;
        on_frame(t, &frame)?;
        last_saved = (t, frame);
    }
    Ok(last_saved.1)
}

fn health_problem(values: &[Complex64]) -> Option<String> {
    let mut sup: f64 = 0.0;
    for z in values {
        let m = z.norm_sqr();
        if !m.is_finite() {
            return Some("non-finite value".into());
        }
        sup = sup.max(m);
    }
    let linf = sup.sqrt();
    (linf > BLOW_UP_LINF).then(|| format!("||u||_inf = {linf} exceeds {BLOW_UP_LINF}"))
}

/// Locates the minimum of `|u|` within `window` of `near` on a 1D grid,
/// refined by a parabola through the three surrounding nodes. Returns a
/// position in `[0, L)`.
pub fn track_minimum(u: &ComplexField, near: f64, window: f64) -> Result<f64> {
    let grid = u.grid();
    if grid.dim() != 1 {
        return Err(Error::Dimension {
            op: "track_minimum",
            required: 1,
            found: grid.dim(),
        });
    }
    u.ensure_finite()?;
    let n = grid.len() as i64;
    let dx = grid.dx();
    let center = (near / dx).round() as i64;
    let reach = (window / dx).ceil() as i64;
    let wrap = |i: i64| i.rem_euclid(n) as usize;
    let density = |i: i64| u.values()[wrap(i)].norm_sqr();
    let best = (center - reach..=center + reach)
        .min_by(|&a, &b| density(a).total_cmp(&density(b)))
        .expect("window is nonempty");
    let (fm, f0, fp) = (density(best - 1), density(best), density(best + 1));
    let curvature = fm - 2.0 * f0 + fp;
    let shift = if curvature > 0.0 {
        0.5 * (fm - fp) / curvature
    } else {
        0.0
    };
    Ok(((best as f64 + shift) * dx).rem_euclid(grid.length()))
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
    fn u_dot_constants() {
        let g = make_grid(2, 16, 4.0).unwrap();
        assert!(
            u_dot(&ComplexField::constant(&g, c(1.0, 0.0)))
                .unwrap()
                .max_abs()
                < 1e-15
        );
        let half = u_dot(&ComplexField::constant(&g, c(0.5, 0.0))).unwrap();
        for z in half.values() {
            assert!((z - c(0.0, 0.375)).norm() < 1e-15);
        }
        let dealiased = u_dot_with(&ComplexField::constant(&g, c(0.5, 0.0)), true).unwrap();
        assert!(dealiased.max_abs_diff(&half).unwrap() < 1e-15);
    }

    #[test]
    fn plane_wave_is_exact_under_splitting() {
        let g = make_grid(1, 32, 2.0 * PI).unwrap();
        let u0 = ComplexField::from_fn(&g, |[x, _]| c(0.0, x).exp());
        let dt = 0.05;
        let mut u = u0.clone();
        for _ in 0..40 {
            u = step_strang(&u, dt).unwrap();
        }
        let t = 40.0 * dt;
        let exact = ComplexField::from_fn(&g, |[x, _]| c(0.0, x - t).exp());
        assert!(u.max_abs_diff(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn ground_state_is_fixed() {
        let g = make_grid(1, 16, 3.0).unwrap();
        let one = ComplexField::constant(&g, c(1.0, 0.0));
        assert!(step_strang(&one, 0.1).unwrap().max_abs_diff(&one).unwrap() < 1e-15);
        let dt = 0.9 * rk4_stability_limit(&g);
        assert!(step_rk4(&one, dt).unwrap().max_abs_diff(&one).unwrap() < 1e-15);
    }

    #[test]
    fn rk4_matches_constant_field_ode() {
        // For constant data u(t) = u0 e^{i(1-|u0|²)t}.
        let g = make_grid(1, 16, 30.0).unwrap();
        let u0 = ComplexField::constant(&g, c(0.5, 0.0));
        for dt in [0.02, 0.01] {
            let u = step_rk4(&u0, dt).unwrap();
            let exact = c(0.0, 0.75 * dt).exp() * 0.5;
            let err = (u.values()[0] - exact).norm();
            // Leading local error of RK4 on the rotation is 0.5 (0.75 dt)^5 / 120;
            // the modulus also moves, so allow twice that.
            assert!(err < (0.75f64 * dt).powi(5) / 120.0, "dt = {dt}: {err}");
        }
    }

    #[test]
    fn nonlinear_substep_preserves_modulus() {
        let mut v: Vec<Complex64> = (0..64)
            .map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos() * 1.3))
            .collect();
        let before: Vec<f64> = v.iter().map(|z| z.norm()).collect();
        nonlinear_rotation(&mut v, 0.37);
        for (z, m) in v.iter().zip(before) {
            assert!((z.norm() - m).abs() < 1e-14);
        }
    }

    #[test]
    fn rk4_guard() {
        let g = make_grid(1, 64, 10.0).unwrap();
        let u = ComplexField::constant(&g, c(1.0, 0.0));
        let limit = rk4_stability_limit(&g);
        assert!(matches!(
            step_rk4(&u, 1.01 * limit),
            Err(Error::Stability { .. })
        ));
        let cfg = IntegratorConfig::new(1.01 * limit, 100.0 * 1.01 * limit, Method::Rk4Oracle);
        assert!(evolve(&u, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let g = make_grid(1, 16, 3.0).unwrap();
        let u = ComplexField::constant(&g, c(1.0, 0.0));
        assert!(evolve(&u, &IntegratorConfig::new(0.2, 1.0, Method::StrangSplit)).is_err());
        assert!(evolve(&u, &IntegratorConfig::new(0.03, 0.1, Method::StrangSplit)).is_err());
        assert!(evolve(
            &u,
            &IntegratorConfig::new(0.01, 0.1, Method::StrangSplit).save_every(3)
        )
        .is_err());
        let traj = evolve(
            &u,
            &IntegratorConfig::new(0.01, 0.1, Method::StrangSplit).save_every(5),
        )
        .unwrap();
        assert_eq!(traj.len(), 3);
        assert!((traj.times[2] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn blow_up_is_reported_with_last_frame() {
        let g = make_grid(1, 16, 3.0).unwrap();
        let mut v = vec![c(1.0, 0.0); 16];
        v[3] = c(200.0, 0.0);
        let u = ComplexField::new(&g, v).unwrap();
        match evolve(&u, &IntegratorConfig::new(0.01, 0.1, Method::StrangSplit)) {
            Err(Error::BlowUp {
                last_healthy_time, ..
            }) => assert_eq!(last_healthy_time, 0.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn minimum_tracking_is_subcell() {
        let g = make_grid(1, 256, 20.0).unwrap();
        let x0 = 7.3217;
        let u = ComplexField::from_fn(&g, |[x, _]| c(((x - x0) / SQRT_2).tanh(), 0.3));
        let found = track_minimum(&u, 7.0, 1.0).unwrap();
        assert!((found - x0).abs() < 1e-3, "{found}");
    }
}
