//! Configuration files for `gpz run` and `gpz corpus` (JSON,
//! `"schema_version": 1`).

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gpz_core::{GridSpec, IntegratorConfig, ScenarioSpec};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    EnergyConservation,
    AnnularBound,
    LocalizedIdentity,
    AnnularBudget,
    Bg,
    Gn,
    FreqSplit,
    Apriori,
    WIdentity,
    Gronwall,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::EnergyConservation => "energy_conservation",
            Check::AnnularBound => "annular_bound",
            Check::LocalizedIdentity => "localized_identity",
            Check::AnnularBudget => "annular_budget",
            Check::Bg => "bg",
            Check::Gn => "gn",
            Check::FreqSplit => "freq_split",
            Check::Apriori => "apriori",
            Check::WIdentity => "w_identity",
            Check::Gronwall => "gronwall",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Thresholds for the checks; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest allowed `|E(t) - E(0)| / |E(0)|` (absolute when `E(0) = 0`).
    pub energy_drift: f64,
    /// Smallest accepted observed convergence order.
    pub min_order: f64,
    /// A residual sweep whose finest entry is below this fraction of the
    /// identity's scale (total energy, or max ½||u_t||²) counts as
    /// converged without an order test: translating states have almost
    /// no cadence error, leaving only the integrator's.
    pub relative_residual_floor: f64,
    /// Factor applied to the fitted Brezis-Gallouët constant.
    pub bg_safety: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            energy_drift: 1e-5,
            min_order: 1.8,
            relative_residual_floor: 1e-5,
            bg_safety: 1.1,
        }
    }
}

/// Settings of the localized energy identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizedIdentitySettings {
    /// Cutoff indices; empty means three spread over the admissible range.
    pub annuli: Vec<usize>,
    /// Length of the dt sweep runs (capped at `t_end`).
    pub horizon: f64,
}

impl Default for LocalizedIdentitySettings {
    fn default() -> Self {
        Self {
            annuli: Vec::new(),
            horizon: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub grid: GridSpec,
    pub scenario: ScenarioSpec,
    pub integrator: IntegratorConfig,
    pub checks: Vec<Check>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: Format,
    /// Brezis-Gallouët constant; fitted on the default corpus when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bg_constant: Option<f64>,
    /// Horizon `T` of the annular budget (capped at `t_end`).
    #[serde(default = "default_budget_horizon")]
    pub budget_horizon: f64,
    #[serde(default)]
    pub localized_identity: LocalizedIdentitySettings,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_budget_horizon() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub start: u64,
    /// Exclusive.
    pub end: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub schema_version: u32,
    pub dim: usize,
    pub length_per_axis: f64,
    /// Points per axis; the first entry is the reference for the
    /// refinement-stability metric.
    pub resolutions: Vec<usize>,
    pub seeds: SeedRange,
    /// Every seed is combined with every amplitude.
    pub amplitudes: Vec<f64>,
    #[serde(default = "default_mode_cutoff")]
    pub mode_cutoff: usize,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn default_mode_cutoff() -> usize {
    8
}

fn load<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// Parses JSON, reporting the offending line, column and field.
pub fn parse<T: DeserializeOwned>(text: &str) -> anyhow::Result<T> {
    let version: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| anyhow::anyhow!("line {}, column {}: {e}", e.line(), e.column()))?;
    match version.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => bail!("unsupported schema_version {v} (expected {SCHEMA_VERSION})"),
        None => bail!("missing field `schema_version`"),
    }
    serde_json::from_str(text)
        .map_err(|e| anyhow::anyhow!("line {}, column {}: {e}", e.line(), e.column()))
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let cfg: Self = load(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let grid = self.grid.build().context("field `grid`")?;
        self.integrator
            .validate(&grid)
            .context("field `integrator`")?;
        if self.checks.is_empty() {
            bail!("field `checks`: at least one check is required");
        }
        if self.budget_horizon.is_nan() || self.budget_horizon <= 0.0 {
            bail!("field `budget_horizon`: must be positive");
        }
        let h = self.localized_identity.horizon;
        if h.is_nan() || h <= 0.0 {
            bail!("field `localized_identity.horizon`: must be positive");
        }
        if let Some(c) = self.bg_constant {
            if !(c.is_finite() && c > 0.0) {
                bail!("field `bg_constant`: must be positive and finite");
            }
        }
        Ok(())
    }

    pub fn wants(&self, check: Check) -> bool {
        self.checks.contains(&check)
    }
}

impl CorpusConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let cfg: Self = load(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.seeds.end <= self.seeds.start {
            bail!(
                "field `seeds`: empty seed range {}..{}",
                self.seeds.start,
                self.seeds.end
            );
        }
        if self.amplitudes.is_empty() {
            bail!("field `amplitudes`: at least one amplitude is required");
        }
        if self.resolutions.is_empty() {
            bail!("field `resolutions`: at least one resolution is required");
        }
        for &n in &self.resolutions {
            gpz_core::make_grid(self.dim, n, self.length_per_axis)
                .context("field `resolutions`")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "schema_version": 1,
        "grid": {"dim": 1, "points_per_axis": 256, "length_per_axis": 40.0},
        "scenario": {"kind": "gray_soliton", "speed": 0.5},
        "integrator": {"dt": 0.01, "t_end": 1.0, "save_every": 10},
        "checks": ["energy_conservation", "annular_bound", "gronwall"],
        "output_dir": "out",
        "format": "json"
    }"#;

    #[test]
    fn check_names_match_serialized_form() {
        let all = [
            Check::EnergyConservation,
            Check::AnnularBound,
            Check::LocalizedIdentity,
            Check::AnnularBudget,
            Check::Bg,
            Check::Gn,
            Check::FreqSplit,
            Check::Apriori,
            Check::WIdentity,
            Check::Gronwall,
        ];
        for c in all {
            assert_eq!(
                serde_json::to_string(&c).unwrap(),
                format!("\"{}\"", c.name())
            );
        }
    }

    #[test]
    fn round_trip() {
        let a: RunConfig = parse(FULL).unwrap();
        let text = serde_json::to_string_pretty(&a).unwrap();
        let b: RunConfig = parse(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, serde_json::to_string_pretty(&b).unwrap());
        a.validate().unwrap();
    }

    #[test]
    fn unknown_check_is_named() {
        let text = FULL.replace("\"gronwall\"", "\"nonexistent_check\"");
        let err = format!("{:#}", parse::<RunConfig>(&text).unwrap_err());
        assert!(err.contains("nonexistent_check"), "{err}");
        assert!(err.contains("line 6"), "{err}");
    }

    #[test]
    fn unknown_field_is_named() {
        let text = FULL.replace("\"format\"", "\"fromat\"");
        let err = format!("{:#}", parse::<RunConfig>(&text).unwrap_err());
        assert!(err.contains("fromat"), "{err}");
    }

    #[test]
    fn schema_version_is_required() {
        let text = FULL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(parse::<RunConfig>(&text).is_err());
        let text = FULL.replace("\"schema_version\": 1,", "");
        assert!(parse::<RunConfig>(&text).is_err());
    }

    #[test]
    fn empty_seed_range_is_rejected() {
        let cfg = CorpusConfig {
            schema_version: 1,
            dim: 2,
            length_per_axis: 32.0,
            resolutions: vec![64],
            seeds: SeedRange { start: 3, end: 3 },
            amplitudes: vec![0.1],
            mode_cutoff: 4,
            output_dir: "out".into(),
            format: Format::Csv,
        };
        assert!(cfg.validate().is_err());
    }
}
