//! Per-frame snapshot of the time-dependent quantities the inequality
//! checks consume.

use serde::{Deserialize, Serialize};

use crate::budget::annular_triangle_check;
use crate::dynamics::u_dot;
use crate::energy::{energy, volume_bound_verdicts, Annuli, EnergyReport};
use crate::error::Result;
use crate::field::ComplexField;
use crate::inequalities::{
    apriori_laplacian_bound, brezis_gallouet_bound, frequency_split_bound,
    gagliardo_nirenberg_check,
};
use crate::norms::{l2_norm, norms, NormReport};
use crate::verdict::InequalityVerdict;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsFrame {
    pub t: f64,
    pub energy: EnergyReport,
    pub norms: NormReport,
    /// `||u_t||_{L²}` with `u_t` from the equation.
    pub w_l2: f64,
    pub verdicts: Vec<InequalityVerdict>,
}

/// Which single-frame checks to attach. Checks that need two dimensions
/// are skipped on 1D fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameChecks {
    pub annular_bound: bool,
    pub annular_triangle: bool,
    pub apriori: bool,
    pub gagliardo_nirenberg: bool,
    pub frequency_split: bool,
    pub brezis_gallouet: Option<f64>,
}

impl FrameChecks {
    pub fn none() -> Self {
        Self::default()
    }
}

pub fn diagnostics_frame(
    t: f64,
    u: &ComplexField,
    max_k: u32,
    checks: FrameChecks,
) -> Result<DiagnosticsFrame> {
    let energy = energy(u)?;
    let norms = norms(u, max_k)?;
    let w_l2 = l2_norm(&u_dot(u)?);
    let two_d = u.grid().dim() == 2;
    let mut verdicts = Vec::new();
    if checks.annular_bound {
        verdicts.extend(volume_bound_verdicts(
            &energy,
            &Annuli::new(u.grid()),
            norms.linf,
        ));
    }
    if checks.annular_triangle {
        verdicts.extend(annular_triangle_check(u)?);
    }
    if checks.apriori {
        verdicts.push(apriori_laplacian_bound(u)?);
    }
    if two_d && checks.gagliardo_nirenberg && norms.grad_l2 > 0.0 {
        verdicts.push(gagliardo_nirenberg_check(u)?);
    }
    if two_d && checks.frequency_split {
        // The check applies to φ = u - 1, which lies in H².
        let phi = u.map(|z| z - 1.0);
        verdicts.push(frequency_split_bound(&phi, norms.lap_l2 + 1.0)?);
    }
    if let (true, Some(c)) = (two_d, checks.brezis_gallouet) {
        verdicts.push(brezis_gallouet_bound(u, c)?);
    }
    for v in &mut verdicts {
        v.t = Some(t);
    }
    Ok(DiagnosticsFrame {
        t,
        energy,
        norms,
        w_l2,
        verdicts,
    })
}
