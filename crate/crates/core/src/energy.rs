//! Ginzburg-Landau energy and its decomposition over unit-width annuli
//! `C_j = { j <= |x - center| < j + 1 }`.
//!
//! Annuli are centered on the domain center and stop at radius `L/2`, so
//! there are `J = floor(L/2)` of them. In 2D the square's corners (and in
//! 1D the single node at distance exactly `L/2`) fall outside every
//! annulus; their share is reported separately so that annuli plus
//! exterior tile the lattice.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::spectral;
use crate::verdict::InequalityVerdict;

const EXTERIOR: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub annular_kinetic: Vec<f64>,
    pub annular_potential: Vec<f64>,
    pub annulus_count: usize,
    /// Kinetic energy of nodes beyond radius `J`.
    pub exterior_kinetic: f64,
    pub exterior_potential: f64,
}

/// Lattice partition into annuli plus an exterior remainder.
#[derive(Clone, Debug)]
pub struct Annuli {
    membership: Vec<u32>,
    counts: Vec<usize>,
    cell_volume: f64,
}

impl Annuli {
    pub fn new(grid: &Grid) -> Self {
        let count = (grid.length() / 2.0).floor() as usize;
        let mut counts = vec![0; count];
        let membership = (0..grid.len())
            .map(|p| {
                let j = grid.radius(p).floor() as usize;
                if j < count {
                    counts[j] += 1;
                    j as u32
                } else {
                    EXTERIOR
                }
            })
            .collect();
        Self {
            membership,
            counts,
            cell_volume: grid.cell_volume(),
        }
    }

    pub fn count(&self) -> usize {
        self.counts.len()
    }

    pub fn annulus_of(&self, p: usize) -> Option<usize> {
        match self.membership[p] {
            EXTERIOR => None,
            j => Some(j as usize),
        }
    }

    /// Discrete volume: lattice cells whose node lies in `C_j`.
    pub fn volume(&self, j: usize) -> f64 {
        self.counts[j] as f64 * self.cell_volume
    }

    pub fn nodes(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.membership
            .iter()
            .enumerate()
            .filter(move |(_, &m)| m == j as u32)
            .map(|(p, _)| p)
    }

    /// Integrates a nodal density over each annulus; also returns the
    /// exterior remainder.
    pub fn integrate(&self, density: &[f64]) -> (Vec<f64>, f64) {
        let mut per = vec![0.0; self.count()];
        let mut exterior = 0.0;
        for (&m, &d) in self.membership.iter().zip(density) {
            match m {
                EXTERIOR => exterior += d,
                j => per[j as usize] += d,
            }
        }
        for v in per.iter_mut() {
            *v *= self.cell_volume;
        }
        (per, exterior * self.cell_volume)
    }
}

/// Pointwise energy densities `½|∇u|²` and `¼(1-|u|²)²`.
#[derive(Clone, Debug)]
pub struct EnergyDensity {
    pub kinetic: Vec<f64>,
    pub potential: Vec<f64>,
}

impl EnergyDensity {
    pub fn of(u: &ComplexField) -> Result<Self> {
        u.ensure_finite()?;
        let grad = spectral::gradient_unchecked(u);
        let mut kinetic = vec![0.0; u.len()];
        for g in &grad {
            for (k, z) in kinetic.iter_mut().zip(g.values()) {
                *k += 0.5 * z.norm_sqr();
            }
        }
        let potential = u
            .values()
            .iter()
            .map(|z| 0.25 * (1.0 - z.norm_sqr()).powi(2))
            .collect();
        Ok(Self { kinetic, potential })
    }
}

pub fn energy(u: &ComplexField) -> Result<EnergyReport> {
    let density = EnergyDensity::of(u)?;
    let annuli = Annuli::new(u.grid());
    Ok(report_from(&density, &annuli, u.grid().cell_volume()))
}

pub(crate) fn report_from(density: &EnergyDensity, annuli: &Annuli, dv: f64) -> EnergyReport {
    let kinetic = density.kinetic.iter().sum::<f64>() * dv;
    let potential = density.potential.iter().sum::<f64>() * dv;
    let (annular_kinetic, exterior_kinetic) = annuli.integrate(&density.kinetic);
    let (annular_potential, exterior_potential) = annuli.integrate(&density.potential);
    EnergyReport {
        kinetic,
        potential,
        total: kinetic + potential,
        annulus_count: annuli.count(),
        annular_kinetic,
        annular_potential,
        exterior_kinetic,
        exterior_potential,
    }
}

/// Checks `p_j <= ¼ (1 + ||u||²_∞)² vol(C_j)` on every annulus. The bound
/// is pointwise, so it holds exactly on the lattice.
pub fn annular_volume_bound_check(u: &ComplexField) -> Result<Vec<InequalityVerdict>> {
    let report = energy(u)?;
    let annuli = Annuli::new(u.grid());
    Ok(volume_bound_verdicts(&report, &annuli, u.max_abs()))
}

pub(crate) fn volume_bound_verdicts(
    report: &EnergyReport,
    annuli: &Annuli,
    linf: f64,
) -> Vec<InequalityVerdict> {
    let constant = 0.25 * (1.0 + linf * linf).powi(2);
    report
        .annular_potential
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            InequalityVerdict::new("annular_bound", p, constant * annuli.volume(j), constant)
                .at_annulus(j)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use num_complex::Complex64;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn ground_state_has_no_energy() {
        let g = make_grid(2, 32, 12.0).unwrap();
        let r = energy(&ComplexField::constant(&g, one())).unwrap();
        assert_eq!(r.total, 0.0);
        assert!(r
            .annular_kinetic
            .iter()
            .chain(&r.annular_potential)
            .all(|&v| v == 0.0));
        assert_eq!(r.annulus_count, 6);
    }

    #[test]
    fn zero_field_potential_in_1d() {
        let g = make_grid(1, 256, 20.0).unwrap();
        let r = energy(&ComplexField::constant(&g, Complex64::default())).unwrap();
        assert_eq!(r.kinetic, 0.0);
        assert!((r.potential - 5.0).abs() < 1e-12);
        assert_eq!(r.annulus_count, 10);
        // Each 1D annulus has two pieces of length 1, each up to one lattice cell.
        let dx = g.dx();
        let annuli = Annuli::new(&g);
        for (j, &p) in r.annular_potential.iter().enumerate() {
            assert!((p - 0.25 * annuli.volume(j)).abs() < 1e-14);
            assert!((p - 0.5).abs() <= 0.5 * dx + 1e-14, "p_{j} = {p}");
        }
        let tiled: f64 = r.annular_potential.iter().sum::<f64>() + r.exterior_potential;
        assert!((tiled - r.potential).abs() < 1e-12);
    }

    #[test]
    fn volume_bound_saturates_for_zero_field() {
        let g = make_grid(1, 128, 16.0).unwrap();
        let verdicts =
            annular_volume_bound_check(&ComplexField::constant(&g, Complex64::default())).unwrap();
        assert_eq!(verdicts.len(), 8);
        for v in &verdicts {
            assert!(v.pass);
            assert!((v.lhs - v.rhs).abs() < 1e-15);
        }
        let verdicts = annular_volume_bound_check(&ComplexField::constant(&g, one())).unwrap();
        assert!(verdicts.iter().all(|v| v.pass && v.lhs == 0.0));
    }

    #[test]
    fn annuli_partition_2d() {
        let g = make_grid(2, 64, 10.0).unwrap();
        let annuli = Annuli::new(&g);
        let total: f64 = (0..annuli.count()).map(|j| annuli.volume(j)).sum();
        let exterior = (0..g.len())
            .filter(|&p| annuli.annulus_of(p).is_none())
            .count();
        assert!((total + exterior as f64 * g.cell_volume() - 100.0).abs() < 1e-10);
        // Disc of radius 5 minus a few cells of discretization error.
        assert!((total - std::f64::consts::PI * 25.0).abs() < 2.0);
        assert_eq!(
            annuli.nodes(0).count() as f64 * g.cell_volume(),
            annuli.volume(0)
        );
    }
}
