//! `gpz corpus`: Brezis-Gallouët ratios over a random-field corpus.

use std::collections::BTreeMap;

use anyhow::Context;
use gpz_core::norms::l2_norm;
use gpz_core::{brezis_gallouet_ratio, energy, laplacian, make_grid, random_zhidkov};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{CorpusConfig, Format};
use crate::output::{self, CSV_SCHEMA_VERSION};

#[derive(Debug, Serialize)]
pub struct CorpusRow {
    pub seed: u64,
    pub amplitude: f64,
    pub points_per_axis: usize,
    pub linf: f64,
    pub energy: f64,
    pub lap_l2: f64,
    pub ratio: f64,
}

pub fn corpus_scan(cfg: &CorpusConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;
    let mut jobs = Vec::new();
    for &n in &cfg.resolutions {
        for seed in cfg.seeds.start..cfg.seeds.end {
            for &amplitude in &cfg.amplitudes {
                jobs.push((n, seed, amplitude));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(n, seed, amplitude)| -> anyhow::Result<CorpusRow> {
            let grid = make_grid(cfg.dim, n, cfg.length_per_axis)?;
            let u = random_zhidkov(seed, amplitude, cfg.mode_cutoff, &grid)
                .with_context(|| format!("seed {seed}, amplitude {amplitude}, N = {n}"))?;
            Ok(CorpusRow {
                seed,
                amplitude,
                points_per_axis: n,
                linf: u.max_abs(),
                energy: energy(&u)?.total,
                lap_l2: l2_norm(&laplacian(&u)?),
                ratio: brezis_gallouet_ratio(&u)?,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut max_ratio: BTreeMap<usize, f64> = BTreeMap::new();
    for r in &rows {
        let e = max_ratio.entry(r.points_per_axis).or_insert(0.0);
        *e = e.max(r.ratio);
    }
    let reference = max_ratio[&cfg.resolutions[0]];
    let stability = cfg.resolutions[1..]
        .iter()
        .map(|n| (max_ratio[n] / reference - 1.0).abs())
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.max(x)))
        });

    match cfg.format {
        Format::Json => output::write_json(&cfg.output_dir.join("verdicts.json"), &rows)?,
        Format::Csv => {
            let path = cfg.output_dir.join("verdicts.csv");
            let mut w = csv::Writer::from_path(&path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            w.write_record([
                "seed",
                "amplitude",
                "points_per_axis",
                "linf",
                "energy",
                "lap_l2",
                "ratio",
            ])?;
            for r in &rows {
                w.write_record([
                    r.seed.to_string(),
                    format!("{:?}", r.amplitude),
                    r.points_per_axis.to_string(),
                    format!("{:?}", r.linf),
                    format!("{:?}", r.energy),
                    format!("{:?}", r.lap_l2),
                    format!("{:?}", r.ratio),
                ])?;
            }
            w.flush()?;
        }
    }
    let summary = json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "rows": rows.len(),
        "max_ratio": rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        "max_ratio_by_resolution": max_ratio
            .iter()
            .map(|(n, c)| (n.to_string(), json!(c)))
            .collect::<serde_json::Map<_, _>>(),
        "reference_resolution": cfg.resolutions[0],
        "refinement_stability": stability,
    });
    output::write_json(&cfg.output_dir.join("summary.json"), &summary)
}
