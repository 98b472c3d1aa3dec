//! Experiment configuration.
//!
//! The file is TOML restricted to tables, numbers, strings, booleans and arrays.
//! Every key has a default, so an empty file is a valid configuration. Unknown
//! keys are rejected.

use anyhow::{bail, Context, Result};
use lrcone_core::onebody::min_safe_length;
use lrcone_core::transport::{log_spaced, DEFAULT_EPSILON, DEFAULT_MARGIN};
use lrcone_core::{ConeQuantity, FieldKind, FieldSpec, Probe};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub times: TimeGrid,
    pub front: FrontConfig,
    pub transport: TransportConfig,
    pub cone: ConeConfig,
    pub spectrum: SpectrumConfig,
    pub dimer: DimerConfig,
    pub oracle: OracleConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            field: FieldSpec::fibonacci(12.0, 0.0, 4000),
            times: TimeGrid::default(),
            front: FrontConfig::default(),
            transport: TransportConfig::default(),
            cone: ConeConfig::default(),
            spectrum: SpectrumConfig::default(),
            dimer: DimerConfig::default(),
            oracle: OracleConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Log-spaced times, or an explicit strictly increasing list when `values` is non-empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_min: 10.0,
            t_max: 500.0,
            points: 12,
            values: Vec::new(),
        }
    }
}

impl TimeGrid {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        if self.values.is_empty() {
            return Ok(log_spaced(self.t_min, self.t_max, self.points)?);
        }
        if self.values.iter().any(|t| !(t.is_finite() && *t >= 0.0))
            || self.values.windows(2).any(|w| !(w[0] < w[1]))
        {
            bail!("time values must be finite, non-negative and strictly increasing");
        }
        Ok(self.values.clone())
    }

    fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.t_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontConfig {
    pub epsilon: f64,
    pub probe: Probe,
    pub margin: usize,
}

impl Default for FrontConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            probe: Probe::OutsideProbability,
            margin: DEFAULT_MARGIN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportConfig {
    /// Also estimate alpha_u from R+(beta) in `fit-alpha` and `sweep`.
    pub alpha_u: bool,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_step: f64,
    pub r_max: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            alpha_u: true,
            beta_min: 0.0,
            beta_max: 1.5,
            beta_step: 0.05,
            r_max: 5.0,
        }
    }
}

impl TransportConfig {
    pub fn betas(&self) -> Result<Vec<f64>> {
        if !(self.beta_step > 0.0) || !(self.beta_max >= self.beta_min) || self.beta_min < 0.0 {
            bail!("beta grid needs 0 <= beta_min <= beta_max and beta_step > 0");
        }
        let steps = ((self.beta_max - self.beta_min) / self.beta_step + 1e-9).floor() as usize;
        Ok((0..=steps)
            .map(|i| self.beta_min + i as f64 * self.beta_step)
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConeConfig {
    pub quantity: ConeQuantity,
    pub delta_min: usize,
    pub delta_max: usize,
    pub times: TimeGrid,
    /// Every `holdout_every`-th tail cell is held out of the fit.
    pub holdout_every: usize,
    /// Multiplier on the fitted C when measuring held-out coverage.
    pub coverage_factor: f64,
    pub min_coverage: f64,
    /// When set, also fit the power-law form with this exponent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_p: Option<f64>,
}

impl Default for ConeConfig {
    fn default() -> Self {
        Self {
            quantity: ConeQuantity::FermionTail,
            delta_min: 1,
            delta_max: 300,
            times: TimeGrid {
                t_min: 1.0,
                t_max: 200.0,
                points: 24,
                values: Vec::new(),
            },
            holdout_every: 4,
            coverage_factor: 2.0,
            min_coverage: 0.99,
            power_p: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Energy range of the trace-map scan; defaults to the spectral hull padded by 0.5.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    pub e_points: usize,
    pub max_steps: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            e_min: None,
            e_max: None,
            e_points: 1000,
            max_steps: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DimerConfig {
    pub lambda: f64,
    pub seeds: u64,
    pub base_seed: u64,
    pub fibonacci_lambda: f64,
    pub period2: Vec<f64>,
    pub min_gap: f64,
    pub dimer_range: (f64, f64),
    pub ballistic_range: (f64, f64),
}

impl Default for DimerConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            seeds: 8,
            base_seed: 1,
            fibonacci_lambda: 12.0,
            period2: vec![0.5, -0.5],
            min_gap: 0.1,
            dimer_range: (0.75, 1.05),
            ballistic_range: (0.85, 1.05),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub sites: usize,
    pub lambdas: Vec<f64>,
    pub times: Vec<f64>,
    pub slack: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            sites: 8,
            lambdas: vec![0.0, 1.0, 4.0],
            times: vec![0.5, 1.0, 2.0],
            slack: 1e-8,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![2.0, 4.0, 8.0, 12.0, 24.0, 50.0, 100.0],
        }
    }
}

/// Where and how to run. Not part of the embedded config: it never changes results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub workers: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate().context("[field]")?;
        self.times.resolve().context("[times]")?;
        self.cone.times.resolve().context("[cone.times]")?;
        self.transport.betas().context("[transport]")?;
        if !(self.front.epsilon > 0.0 && self.front.epsilon < 1.0) {
            bail!("[front] epsilon must lie in (0, 1)");
        }
        if !(self.transport.r_max > 0.0) {
            bail!("[transport] r_max must be > 0");
        }
        let c = &self.cone;
        if c.delta_min == 0 || c.delta_max < c.delta_min {
            bail!("[cone] needs 1 <= delta_min <= delta_max");
        }
        if c.holdout_every < 2 {
            bail!("[cone] holdout_every must be >= 2");
        }
        if let Some(p) = c.power_p {
            if !(p > 0.0) {
                bail!("[cone] power_p must be > 0");
            }
        }
        if self.spectrum.max_steps == 0 || self.spectrum.max_steps > 200 {
            bail!("[spectrum] max_steps must lie in 1..=200");
        }
        if self.spectrum.e_points < 2 {
            bail!("[spectrum] e_points must be >= 2");
        }
        if self.dimer.seeds == 0 {
            bail!("[dimer] seeds must be >= 1");
        }
        if self.oracle.sites < 2 || self.oracle.sites > lrcone_core::manybody::ORACLE_MAX_SITES {
            bail!(
                "[oracle] sites must lie in 2..={}",
                lrcone_core::manybody::ORACLE_MAX_SITES
            );
        }
        if self.output.workers == 0 {
            bail!("[output] workers must be >= 1");
        }
        Ok(())
    }

    /// TOML of everything that determines results, i.e. without `[output]`.
    pub fn experiment_toml(&self) -> Result<String> {
        let mut table = toml::Table::try_from(self)?;
        table.remove("output");
        Ok(toml::to_string(&table)?)
    }

    pub fn experiment_hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.experiment_toml()?.as_bytes())))
    }

    /// Rejects a transport run whose chain is too short for the latest time.
    pub fn check_transport_length(&self, n: usize) -> Result<()> {
        let need = min_safe_length(self.times.max(), self.front.epsilon, self.front.margin);
        if n < need {
            bail!(
                "reflection-unsafe: N = {n} is too short for t_max = {} (epsilon = {:e}, margin = {}); minimum N = {need}",
                self.times.max(),
                self.front.epsilon,
                self.front.margin
            );
        }
        Ok(())
    }

    /// Same for the cone grid, which runs at fermion time 2t.
    pub fn check_cone_length(&self, n: usize) -> Result<()> {
        let need = min_safe_length(2.0 * self.cone.times.max(), DEFAULT_EPSILON, self.front.margin)
            .max(self.cone.delta_max + 1);
        if n < need {
            bail!(
                "reflection-unsafe: N = {n} is too short for the cone grid (t_max = {}, delta_max = {}); minimum N = {need}",
                self.cone.times.max(),
                self.cone.delta_max
            );
        }
        Ok(())
    }

    pub fn is_fibonacci(&self) -> bool {
        self.field.kind == FieldKind::Sturmian && self.field.rotation.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.field = FieldSpec::periodic(vec![0.25, -0.25, 1.0], 77);
        cfg.cone.power_p = Some(2.0);
        cfg.times.values = vec![1.0, 2.5, 7.0];
        cfg.spectrum.e_min = Some(-3.125);
        cfg.front.epsilon = 1e-9;
        cfg.output.workers = 3;
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
        let def = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&def.to_toml().unwrap()).unwrap(), def);
    }

    #[test]
    fn unknown_key_names_the_key() {
        let err = ExperimentConfig::parse("[front]\nepsilom = 1e-9\n").unwrap_err();
        assert!(format!("{err:#}").contains("epsilom"));
        let err = ExperimentConfig::parse("[field]\nkind = \"dimer\"\nlength = 8\nlamda = 1\n")
            .unwrap_err();
        assert!(format!("{err:#}").contains("lamda"));
    }

    #[test]
    fn output_settings_do_not_change_hash() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.workers = 4;
        b.output.dir = "elsewhere".into();
        assert_eq!(a.experiment_hash().unwrap(), b.experiment_hash().unwrap());
        b.front.margin += 1;
        assert_ne!(a.experiment_hash().unwrap(), b.experiment_hash().unwrap());
    }

    #[test]
    fn beta_grid() {
        let b = TransportConfig::default().betas().unwrap();
        assert_eq!(b.len(), 31);
        assert!((b[30] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn short_chain_is_rejected_with_minimum() {
        let cfg = ExperimentConfig::default();
        let err = cfg.check_transport_length(500).unwrap_err().to_string();
        assert!(err.contains("minimum N"));
        cfg.check_transport_length(4000).unwrap();
        cfg.check_cone_length(1500).unwrap();
    }
}
