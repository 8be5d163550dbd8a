//! `gpz run`: one simulation plus the requested verification checks.

use std::collections::BTreeMap;

use anyhow::{bail, Context};
use gpz_core::budget::annular_budget_check;
use gpz_core::convergence::successive_orders;
use gpz_core::diagnostics::{diagnostics_frame, DiagnosticsFrame, FrameChecks};
use gpz_core::inequalities::{fit_brezis_gallouet, gronwall_constant, gronwall_envelope};
use gpz_core::{
    brezis_gallouet_ratio, evolve_streaming, evolve_with, generate, random_zhidkov,
    w_energy_identity_residual, ComplexField, Error, Grid, InequalityVerdict, IntegratorConfig,
    LocalizedIdentityTracker, Ramp, Trajectory,
};
use serde_json::{json, Value};

use crate::config::{Check, RunConfig};
use crate::output::{self, FrameRow, CSV_SCHEMA_VERSION};

/// Saved-frame strides for the w-identity cadence sweep.
const W_STRIDES: [usize; 3] = [4, 2, 1];

/// Fields in the default Brezis-Gallouët corpus.
const BG_CORPUS_SIZE: u64 = 30;

struct CheckOutcome {
    pass: bool,
    detail: Value,
}

fn outcome(pass: bool, detail: Value) -> CheckOutcome {
    CheckOutcome { pass, detail }
}

fn verdicts_pass(verdicts: &[InequalityVerdict], name: &str) -> (bool, usize, f64) {
    let mut count = 0;
    let mut all = true;
    let mut min_slack = f64::INFINITY;
    for v in verdicts.iter().filter(|v| v.name == name) {
        count += 1;
        all &= v.pass;
        min_slack = min_slack.min(v.slack());
    }
    (all, count, min_slack)
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Amplitude of field `i` in a corpus: a golden-ratio walk over [0.05, 0.5].
pub fn corpus_amplitude(i: u64) -> f64 {
    0.05 + 0.45 * ((i as f64 * 0.618_033_988_749_895) % 1.0)
}

/// Largest Brezis-Gallouët ratio over random fields on `grid`.
fn default_bg_fit(grid: &Grid) -> anyhow::Result<f64> {
    let cutoff = (grid.points_per_axis() / 3).min(8);
    let corpus = (0..BG_CORPUS_SIZE)
        .map(|s| random_zhidkov(s, corpus_amplitude(s), cutoff, grid))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fit_brezis_gallouet(&corpus)?)
}

/// Runs the configuration, writes all outputs, and reports whether every
/// requested check passed.
pub fn run(cfg: &RunConfig) -> anyhow::Result<bool> {
    let grid = cfg.grid.build()?;
    let u0 = generate(&cfg.scenario, &grid).context("field `scenario`")?;
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;
    let two_d = grid.dim() == 2;

    let needs_bg = cfg.wants(Check::Bg) || cfg.wants(Check::Gronwall);
    let (bg_fit, bg_used) = match (needs_bg, cfg.bg_constant) {
        (_, Some(c)) => (None, Some(c)),
        (true, None) => {
            let fit = default_bg_fit(&grid)?;
            (Some(fit), Some(cfg.tolerances.bg_safety * fit))
        }
        (false, None) => (None, None),
    };

    let frame_checks = FrameChecks {
        annular_bound: cfg.wants(Check::AnnularBound),
        annular_triangle: cfg.wants(Check::AnnularBudget),
        apriori: cfg.wants(Check::Apriori),
        gagliardo_nirenberg: cfg.wants(Check::Gn),
        frequency_split: cfg.wants(Check::FreqSplit),
        brezis_gallouet: if cfg.wants(Check::Bg) { bg_used } else { None },
    };

    let mut frames: Vec<DiagnosticsFrame> = Vec::new();
    let evolved = evolve_with(&u0, &cfg.integrator, |t, u| {
        frames.push(diagnostics_frame(t, u, 2, frame_checks)?);
        Ok(())
    });
    let (trajectory, blow_up) = match evolved {
        Ok(traj) => (Some(traj), None),
        Err(Error::BlowUp {
            t,
            reason,
            last_healthy_time,
            ..
        }) => (
            None,
            Some(json!({"t": t, "reason": reason, "last_healthy_time": last_healthy_time})),
        ),
        Err(e) => return Err(e.into()),
    };

    let e0 = frames[0].energy.total;
    let rows: Vec<FrameRow> = frames.iter().map(|f| FrameRow::new(f, e0)).collect();
    let mut verdicts: Vec<InequalityVerdict> = frames
        .iter()
        .flat_map(|f| f.verdicts.iter().cloned())
        .collect();

    let mut checks: BTreeMap<&'static str, CheckOutcome> = BTreeMap::new();
    let mut orders: BTreeMap<&'static str, Value> = BTreeMap::new();
    let mut gronwall_c = None;

    for &check in &cfg.checks {
        if checks.contains_key(check.name()) {
            continue;
        }
        let result = match check {
            Check::EnergyConservation => {
                let drift = rows.iter().map(|r| r.e_drift).fold(0.0, f64::max);
                outcome(
                    drift <= cfg.tolerances.energy_drift,
                    json!({"max_drift": drift, "tolerance": cfg.tolerances.energy_drift, "initial_energy": e0}),
                )
            }
            Check::AnnularBound => per_frame(&verdicts, "annular_bound", true),
            Check::Apriori => per_frame(&verdicts, "apriori", true),
            Check::Gn => per_frame(&verdicts, "gn", two_d),
            Check::FreqSplit => per_frame(&verdicts, "freq_split", two_d),
            Check::Bg => {
                let max_ratio = frames_max_bg_ratio(trajectory.as_ref())?;
                let mut o = per_frame(&verdicts, "bg", two_d);
                o.detail["fitted_constant"] = bg_fit.map_or(Value::Null, |c| json!(c));
                o.detail["constant_used"] = json!(bg_used);
                o.detail["max_ratio_on_run"] = finite_or_null(max_ratio);
                o
            }
            Check::AnnularBudget => match &trajectory {
                Some(traj) => {
                    let horizon = cfg.budget_horizon.min(cfg.integrator.t_end);
                    let head = traj.truncate_to(horizon);
                    let report = annular_budget_check(&head, e0)?;
                    verdicts.extend(report.verdicts.iter().cloned());
                    let (tri, tri_n, tri_slack) = verdicts_pass(&verdicts, "annular_triangle");
                    let (b, b_n, b_slack) = verdicts_pass(&report.verdicts, "annular_budget");
                    let (bi, bi_n, bi_slack) =
                        verdicts_pass(&report.verdicts, "annular_budget_integrated");
                    outcome(
                        tri && b && bi,
                        json!({
                            "horizon": horizon,
                            "verdicts": tri_n + b_n + bi_n,
                            "min_slack": finite_or_null(tri_slack.min(b_slack).min(bi_slack)),
                        }),
                    )
                }
                None => outcome(false, json!({"reason": "run blew up"})),
            },
            Check::LocalizedIdentity => localized_identity(cfg, &u0, &mut orders)?,
            Check::WIdentity => match &trajectory {
                Some(traj) => w_identity(cfg, traj, &mut verdicts, &mut orders)?,
                None => outcome(false, json!({"reason": "run blew up"})),
            },
            Check::Gronwall => {
                let c_fit = gronwall_constant(&frames, bg_used.expect("fitted above"));
                gronwall_c = Some(c_fit);
                let env = gronwall_envelope(&frames, c_fit)?;
                // t = 0 is tight by construction; report the later frames.
                let later = env.envelope.iter().zip(&env.measured).skip(1);
                let max_ratio = later
                    .clone()
                    .map(|(e, m)| if *e > 0.0 { m / e } else { 0.0 })
                    .fold(0.0, f64::max);
                let margin = later
                    .map(|(e, m)| {
                        if e.is_finite() && *e > 0.0 {
                            (e - m) / e
                        } else {
                            1.0
                        }
                    })
                    .fold(f64::INFINITY, f64::min);
                outcome(
                    env.dominated && blow_up.is_none(),
                    json!({
                        "c_tilde": c_fit,
                        "double_exp_a": env.double_exp_a,
                        "double_exp_b": env.double_exp_b,
                        "max_measured_over_envelope": max_ratio,
                        "relative_envelope_margin": finite_or_null(margin),
                        "initial_slope_constant": env.initial_slope_constant,
                        "blow_up": blow_up.is_some(),
                    }),
                )
            }
        };
        checks.insert(check.name(), result);
    }

    let pass = blow_up.is_none() && checks.values().all(|c| c.pass);
    output::write_frames(&cfg.output_dir, cfg.format, &rows)?;
    output::write_verdicts(&cfg.output_dir, cfg.format, &verdicts)?;
    let summary = json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "pass": pass,
        "frames": rows.len(),
        "blow_up": blow_up,
        "checks": checks
            .iter()
            .map(|(k, v)| (k.to_string(), json!({"pass": v.pass, "detail": v.detail})))
            .collect::<serde_json::Map<_, _>>(),
        "fitted_constants": {
            "brezis_gallouet": bg_fit,
            "brezis_gallouet_used": bg_used,
            "gronwall_c": gronwall_c,
        },
        "convergence_orders": orders,
    });
    output::write_json(&cfg.output_dir.join("summary.json"), &summary)?;
    Ok(pass)
}

fn per_frame(verdicts: &[InequalityVerdict], name: &str, applicable: bool) -> CheckOutcome {
    if !applicable {
        return outcome(
            true,
            json!({"applicable": false, "reason": "requires a 2D grid"}),
        );
    }
    let (pass, count, min_slack) = verdicts_pass(verdicts, name);
    outcome(
        pass,
        json!({"applicable": true, "verdicts": count, "min_slack": finite_or_null(min_slack)}),
    )
}

fn frames_max_bg_ratio(trajectory: Option<&Trajectory>) -> anyhow::Result<f64> {
    let mut worst: f64 = 0.0;
    if let Some(traj) = trajectory {
        for u in &traj.states {
            worst = worst.max(brezis_gallouet_ratio(u)?);
        }
    }
    Ok(worst)
}

/// Cutoff indices for the localized identity: the configured list, or
/// three spread over `1..=j_max` where `j + 1 < L/2`.
fn identity_annuli(cfg: &RunConfig, grid: &Grid) -> anyhow::Result<Vec<usize>> {
    if !cfg.localized_identity.annuli.is_empty() {
        return Ok(cfg.localized_identity.annuli.clone());
    }
    let j_max = ((0.5 * grid.length()).ceil() as usize).saturating_sub(2);
    if j_max == 0 {
        bail!("domain too small for a localized energy cutoff");
    }
    let mut js = vec![
        (j_max / 4).max(1),
        (j_max / 2).max(1),
        (3 * j_max / 4).max(1),
    ];
    js.dedup();
    Ok(js)
}

fn order_pass(residuals: &[f64], orders: &[f64], scale: f64, cfg: &RunConfig) -> bool {
    let finest = residuals.last().copied().unwrap_or(0.0);
    finest <= cfg.tolerances.relative_residual_floor * scale
        || orders.iter().all(|&p| p >= cfg.tolerances.min_order)
}

fn localized_identity(
    cfg: &RunConfig,
    u0: &ComplexField,
    orders: &mut BTreeMap<&'static str, Value>,
) -> anyhow::Result<CheckOutcome> {
    let grid = u0.grid();
    let annuli = identity_annuli(cfg, grid)?;
    let scale = gpz_core::energy(u0)?.total;
    let base = &cfg.integrator;
    let horizon = cfg.localized_identity.horizon.min(base.t_end);
    let steps = (horizon / base.dt).round().max(2.0) as usize;
    let dts = [base.dt, base.dt / 2.0, base.dt / 4.0];

    let mut residuals = vec![Vec::new(); annuli.len()];
    for &dt in &dts {
        let mut run =
            IntegratorConfig::new(dt, steps as f64 * base.dt, base.method).dealias(base.dealias);
        run.direction = base.direction;
        let mut trackers = annuli
            .iter()
            .map(|&j| LocalizedIdentityTracker::new(grid, j, Ramp::Smooth))
            .collect::<Result<Vec<_>, _>>()
            .context("field `localized_identity.annuli`")?;
        evolve_streaming(u0, &run, |t, u| {
            for tr in &mut trackers {
                tr.push_at(t, u)?;
            }
            Ok(())
        })
        .with_context(|| format!("localized identity sweep at dt = {dt}"))?;
        for (i, tr) in trackers.iter().enumerate() {
            residuals[i].push(tr.residual()?);
        }
    }

    let mut pass = true;
    let mut per_j = serde_json::Map::new();
    for (i, &j) in annuli.iter().enumerate() {
        let ord = successive_orders(&residuals[i], 2.0);
        pass &= order_pass(&residuals[i], &ord, scale, cfg);
        per_j.insert(
            j.to_string(),
            json!({
                "dt": dts,
                "residuals": residuals[i],
                "orders": ord.iter().map(|&p| finite_or_null(p)).collect::<Vec<_>>(),
            }),
        );
    }
    orders.insert("localized_identity", Value::Object(per_j.clone()));
    Ok(outcome(
        pass,
        // The smooth ramp has unit width; residuals stall at a spatial floor
        // unless dx is small (about 1/64 for 1e-7 accuracy).
        json!({"horizon": steps as f64 * base.dt, "scale": scale, "dx": grid.dx(), "annuli": per_j}),
    ))
}

fn w_identity(
    cfg: &RunConfig,
    traj: &Trajectory,
    verdicts: &mut Vec<InequalityVerdict>,
    orders: &mut BTreeMap<&'static str, Value>,
) -> anyhow::Result<CheckOutcome> {
    let needed = 2 * W_STRIDES[0] + 1;
    if traj.len() < needed {
        bail!(
            "w_identity needs at least {needed} saved frames, the run has {}; lower `save_every` or raise `t_end`",
            traj.len()
        );
    }
    let mut residuals = Vec::new();
    let mut cadence = Vec::new();
    for &s in &W_STRIDES {
        let sub = traj.subsample(s)?;
        cadence.push(sub.save_interval().abs());
        residuals.push(w_energy_identity_residual(&sub)?.residual);
    }
    let full = w_energy_identity_residual(traj)?;
    let scale = full.half_w_sq.iter().copied().fold(0.0, f64::max);
    let violations = full.majorization.iter().filter(|v| !v.pass).count();
    verdicts.extend(full.majorization);
    let ord = successive_orders(&residuals, 2.0);
    let ord_json: Vec<Value> = ord.iter().map(|&p| finite_or_null(p)).collect();
    orders.insert(
        "w_identity",
        json!({"cadence": cadence, "residuals": residuals, "orders": ord_json}),
    );
    Ok(outcome(
        violations == 0 && order_pass(&residuals, &ord, scale, cfg),
        json!({
            "cadence": cadence,
            "residuals": residuals,
            "orders": ord_json,
            "majorization_violations": violations,
            "scale": scale,
        }),
    ))
}
