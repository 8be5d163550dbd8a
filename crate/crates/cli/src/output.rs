//! Frame, verdict and summary files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use gpz_core::diagnostics::DiagnosticsFrame;
use gpz_core::InequalityVerdict;
use serde::Serialize;

use crate::config::Format;

/// Version of the frames/verdicts column layout, recorded in summary.json.
pub const CSV_SCHEMA_VERSION: u32 = 1;

const FRAME_COLUMNS: [&str; 9] = [
    "t", "E_total", "E_kin", "E_pot", "linf", "grad_l2", "lap_l2", "w_l2", "E_drift",
];

const VERDICT_COLUMNS: [&str; 9] = [
    "name",
    "j",
    "t",
    "lhs",
    "rhs",
    "ratio",
    "constant_used",
    "tolerance",
    "pass",
];

#[derive(Debug, Serialize)]
pub struct FrameRow {
    pub t: f64,
    #[serde(rename = "E_total")]
    pub e_total: f64,
    #[serde(rename = "E_kin")]
    pub e_kin: f64,
    #[serde(rename = "E_pot")]
    pub e_pot: f64,
    pub linf: f64,
    pub grad_l2: f64,
    pub lap_l2: f64,
    pub w_l2: f64,
    /// `|E(t) - E(0)| / |E(0)|`, absolute when `E(0) = 0`.
    #[serde(rename = "E_drift")]
    pub e_drift: f64,
    pub k: Vec<f64>,
    pub p: Vec<f64>,
    pub k_ext: f64,
    pub p_ext: f64,
}

impl FrameRow {
    pub fn new(frame: &DiagnosticsFrame, e0: f64) -> Self {
        let e = &frame.energy;
        let change = (e.total - e0).abs();
        Self {
            t: frame.t,
            e_total: e.total,
            e_kin: e.kinetic,
            e_pot: e.potential,
            linf: frame.norms.linf,
            grad_l2: frame.norms.grad_l2,
            lap_l2: frame.norms.lap_l2,
            w_l2: frame.w_l2,
            e_drift: if e0 != 0.0 { change / e0.abs() } else { change },
            k: e.annular_kinetic.clone(),
            p: e.annular_potential.clone(),
            k_ext: e.exterior_kinetic,
            p_ext: e.exterior_potential,
        }
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_frames(dir: &Path, format: Format, rows: &[FrameRow]) -> anyhow::Result<()> {
    match format {
        Format::Json => write_json(&dir.join("frames.json"), rows),
        Format::Csv => {
            let path = dir.join("frames.csv");
            let mut w = csv::Writer::from_writer(create(&path)?);
            let annuli = rows.first().map_or(0, |r| r.k.len());
            let mut header: Vec<String> = FRAME_COLUMNS.iter().map(|s| s.to_string()).collect();
            for j in 0..annuli {
                header.push(format!("k_{j}"));
                header.push(format!("p_{j}"));
            }
            header.push("k_ext".into());
            header.push("p_ext".into());
            w.write_record(&header)?;
            for r in rows {
                let mut rec: Vec<String> = [
                    r.t, r.e_total, r.e_kin, r.e_pot, r.linf, r.grad_l2, r.lap_l2, r.w_l2,
                    r.e_drift,
                ]
                .iter()
                .map(|&x| num(x))
                .collect();
                for (k, p) in r.k.iter().zip(&r.p) {
                    rec.push(num(*k));
                    rec.push(num(*p));
                }
                rec.push(num(r.k_ext));
                rec.push(num(r.p_ext));
                w.write_record(&rec)?;
            }
            w.flush()
                .with_context(|| format!("cannot write {}", path.display()))?;
            Ok(())
        }
    }
}

pub fn write_verdicts(
    dir: &Path,
    format: Format,
    verdicts: &[InequalityVerdict],
) -> anyhow::Result<()> {
    match format {
        Format::Json => write_json(&dir.join("verdicts.json"), verdicts),
        Format::Csv => {
            let path = dir.join("verdicts.csv");
            let mut w = csv::Writer::from_writer(create(&path)?);
            w.write_record(VERDICT_COLUMNS)?;
            for v in verdicts {
                w.write_record([
                    v.name.clone(),
                    v.j.map(|j| j.to_string()).unwrap_or_default(),
                    v.t.map(num).unwrap_or_default(),
                    num(v.lhs),
                    num(v.rhs),
                    num(v.ratio),
                    num(v.constant_used),
                    num(v.tolerance),
                    v.pass.to_string(),
                ])?;
            }
            w.flush()
                .with_context(|| format!("cannot write {}", path.display()))?;
            Ok(())
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
