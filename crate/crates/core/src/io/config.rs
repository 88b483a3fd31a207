// SPDX-License-Identifier: Apache-2.0

//! Strict TOML run configuration with `key=value` overrides.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{DEFAULT_FRONT_EPS, MIN_FIT_TIME};
use crate::error::{Error, Result};
use crate::lindblad::{H0Spec, NoiseKind, Pauli, MAX_LR_QUBITS, MAX_QUBITS, MAX_SPECTRAL_QUBITS};
use crate::model::{Boundary, ChainSpec, NoiseMode};
use crate::single_particle::MAX_TRAJECTORIES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Ensemble,
    Exact,
    Lindblad,
    Bounds,
    Analyze,
    Mixing,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Ensemble,
        Experiment::Exact,
        Experiment::Lindblad,
        Experiment::Bounds,
        Experiment::Analyze,
        Experiment::Mixing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Ensemble => "ensemble",
            Experiment::Exact => "exact",
            Experiment::Lindblad => "lindblad",
            Experiment::Bounds => "bounds",
            Experiment::Analyze => "analyze",
            Experiment::Mixing => "mixing",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub n: usize,
    pub boundary: Boundary,
    pub gamma: f64,
    pub noise: NoiseMode,
    pub disorder_width: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n: 50,
            boundary: Boundary::Open,
            gamma: 0.1,
            noise: NoiseMode::Dynamic,
            disorder_width: crate::model::DEFAULT_DISORDER_WIDTH,
        }
    }
}

impl ChainConfig {
    pub fn spec(&self) -> Result<ChainSpec> {
        self.spec_with_gamma(self.gamma)
    }

    pub fn spec_with_gamma(&self, gamma: f64) -> Result<ChainSpec> {
        ChainSpec::new(self.n, self.boundary, gamma, self.noise)?
            .with_disorder_width(self.disorder_width)
    }
}

/// Output grid `t_k = k·t_max/(t_samples − 1)` and the integration step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_max: f64,
    pub t_samples: usize,
    pub dt: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_max: 25.0,
            t_samples: 101,
            dt: 0.01,
        }
    }
}

impl TimeConfig {
    pub fn grid(&self) -> Vec<f64> {
        let last = (self.t_samples - 1) as f64;
        (0..self.t_samples)
            .map(|k| {
                if k + 1 == self.t_samples {
                    self.t_max
                } else {
                    self.t_max * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub trajectories: usize,
    /// Source sites `k` of the tracked amplitudes `c_{j,k}`.
    pub sources: Vec<usize>,
    /// Rates to sweep; empty runs `chain.gamma` only.
    pub gammas: Vec<f64>,
    pub chunk: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            trajectories: 2000,
            sources: vec![0],
            gammas: Vec::new(),
            chunk: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum H0Preset {
    Xx,
    Heisenberg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LindbladNoise {
    Isotropic,
    Z,
}

impl LindbladNoise {
    pub fn kind(self) -> NoiseKind {
        match self {
            LindbladNoise::Isotropic => NoiseKind::Isotropic,
            LindbladNoise::Z => NoiseKind::z_only(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LindbladConfig {
    pub h0: H0Preset,
    /// Uniform `σ^x` field added to the preset.
    pub field_x: f64,
    pub noise: LindbladNoise,
    /// Initial computational basis state, one character per site (`0` = up).
    pub initial: String,
    /// Site of the observable `B = σ^z` in commutator runs; defaults to the last site.
    pub probe_site: Option<usize>,
    /// Record commutator norms against the bound envelope.
    pub commutators: bool,
}

impl Default for LindbladConfig {
    fn default() -> Self {
        LindbladConfig {
            h0: H0Preset::Xx,
            field_x: 0.0,
            noise: LindbladNoise::Z,
            initial: String::new(),
            probe_site: None,
            commutators: false,
        }
    }
}

impl LindbladConfig {
    pub fn h0(&self, n: usize) -> Result<H0Spec> {
        let base = match self.h0 {
            H0Preset::Xx => H0Spec::xx(n)?,
            H0Preset::Heisenberg => H0Spec::heisenberg(n)?,
        };
        if self.field_x == 0.0 {
            return Ok(base);
        }
        base.with_uniform_field(Pauli::X, self.field_x)
    }

    /// The initial bit string, `01` repeated when none is given.
    pub fn initial_bits(&self, n: usize) -> Vec<bool> {
        if self.initial.is_empty() {
            return (0..n).map(|j| j % 2 == 1).collect();
        }
        self.initial.chars().map(|c| c == '1').collect()
    }

    pub fn probe(&self, n: usize) -> usize {
        self.probe_site.unwrap_or(n - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    /// Site separations `|j − k|` for the variance bound.
    pub separations: Vec<u64>,
    pub delta: f64,
    /// Negligibility threshold of the regime classification.
    pub eps: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            separations: vec![1, 2, 5, 10],
            delta: 0.5,
            eps: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisSource {
    /// Averaged density equation (dynamic noise only).
    Density,
    /// Monte Carlo ensemble.
    Ensemble,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub source: AnalysisSource,
    /// Front threshold relative to the initial peak.
    pub front_eps: f64,
    /// Fit window; defaults to `[3, t_max]`.
    pub fit_window: Option<[f64; 2]>,
    /// Release site; defaults to the centre.
    pub origin: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            source: AnalysisSource::Density,
            front_eps: DEFAULT_FRONT_EPS,
            fit_window: None,
            origin: None,
        }
    }
}

impl AnalysisConfig {
    pub fn window(&self, t_max: f64) -> (f64, f64) {
        self.fit_window
            .map_or((MIN_FIT_TIME, t_max), |[a, b]| (a, b))
    }

    pub fn origin(&self, n: usize) -> usize {
        self.origin.unwrap_or(n / 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub lindblad: LindbladConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    /// Defaults for `experiment`; many-body experiments start on two sites.
    pub fn new(experiment: Experiment) -> Self {
        let mut chain = ChainConfig::default();
        if matches!(experiment, Experiment::Lindblad | Experiment::Mixing) {
            chain.n = 2;
            chain.gamma = 0.3;
        }
        RunConfig {
            experiment,
            seed: 0,
            out_dir: None,
            chain,
            time: TimeConfig::default(),
            ensemble: EnsembleConfig::default(),
            lindblad: LindbladConfig::default(),
            bounds: BoundsConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Every range check, each naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let c = &self.chain;
        let lindblad_like = matches!(self.experiment, Experiment::Lindblad | Experiment::Mixing);
        if c.n < 2 && !lindblad_like || c.n < 1 {
            return Err(Error::config(
                "chain.n",
                format!("{} is below the minimum chain length", c.n),
            ));
        }
        if c.boundary == Boundary::Ring && c.n < 3 {
            return Err(Error::config("chain.boundary", "a ring needs chain.n >= 3"));
        }
        finite_nonneg("chain.gamma", c.gamma)?;
        finite_nonneg("chain.disorder_width", c.disorder_width)?;
        if self.seed > i64::MAX as u64 {
            return Err(Error::config(
                "seed",
                format!("{} exceeds {}", self.seed, i64::MAX),
            ));
        }

        let t = &self.time;
        if !(t.t_max.is_finite() && t.t_max > 0.0) {
            return Err(Error::config(
                "time.t_max",
                format!("{} must be finite and > 0", t.t_max),
            ));
        }
        if t.t_samples < 2 {
            return Err(Error::config(
                "time.t_samples",
                format!("{} must be >= 2", t.t_samples),
            ));
        }
        if !(t.dt.is_finite() && t.dt > 0.0 && t.dt <= t.t_max) {
            return Err(Error::config(
                "time.dt",
                format!("{} must lie in (0, time.t_max]", t.dt),
            ));
        }

        let stochastic = self.experiment == Experiment::Ensemble
            || self.experiment == Experiment::Analyze
                && self.analysis.source == AnalysisSource::Ensemble;
        let spacing = t.t_max / (t.t_samples - 1) as f64;
        if stochastic && ((spacing / t.dt) - (spacing / t.dt).round()).abs() > 1e-6 {
            return Err(Error::config(
                "time.dt",
                format!(
                    "the grid spacing {spacing} is not a multiple of dt = {}",
                    t.dt
                ),
            ));
        }

        let e = &self.ensemble;
        if e.trajectories == 0 || e.trajectories > MAX_TRAJECTORIES {
            return Err(Error::config(
                "ensemble.trajectories",
                format!("{} outside 1..={MAX_TRAJECTORIES}", e.trajectories),
            ));
        }
        if e.sources.is_empty() {
            return Err(Error::config(
                "ensemble.sources",
                "at least one source site is required",
            ));
        }
        if let Some(k) = e.sources.iter().find(|&&k| k >= c.n) {
            return Err(Error::config(
                "ensemble.sources",
                format!("site {k} outside chain.n = {}", c.n),
            ));
        }
        for &g in &e.gammas {
            finite_nonneg("ensemble.gammas", g)?;
        }
        if e.chunk == 0 {
            return Err(Error::config("ensemble.chunk", "must be >= 1"));
        }

        let l = &self.lindblad;
        if !l.field_x.is_finite() {
            return Err(Error::config("lindblad.field_x", "must be finite"));
        }
        if lindblad_like {
            let cap = match self.experiment {
                Experiment::Mixing => MAX_SPECTRAL_QUBITS,
                _ if l.commutators => MAX_LR_QUBITS,
                _ => MAX_QUBITS,
            };
            if c.n > cap {
                return Err(Error::config(
                    "chain.n",
                    format!(
                        "{} exceeds {cap}, the qubit limit of {}",
                        c.n, self.experiment
                    ),
                ));
            }
            if !l.initial.is_empty() {
                if l.initial.chars().count() != c.n
                    || l.initial.chars().any(|ch| ch != '0' && ch != '1')
                {
                    return Err(Error::config(
                        "lindblad.initial",
                        format!("{:?} must be {} characters of 0 or 1", l.initial, c.n),
                    ));
                }
            }
            if l.probe_site.is_some_and(|p| p >= c.n) {
                return Err(Error::config(
                    "lindblad.probe_site",
                    format!("outside chain.n = {}", c.n),
                ));
            }
        }

        let b = &self.bounds;
        if !(b.delta > 0.0 && b.delta <= 1.0) {
            return Err(Error::config(
                "bounds.delta",
                format!("{} must lie in (0, 1]", b.delta),
            ));
        }
        if !(b.eps > 0.0 && b.eps < 1.0) {
            return Err(Error::config(
                "bounds.eps",
                format!("{} must lie in (0, 1)", b.eps),
            ));
        }
        if b.separations.iter().any(|&s| s > i64::MAX as u64) {
            return Err(Error::config("bounds.separations", "separation too large"));
        }

        let a = &self.analysis;
        if !(a.front_eps > 0.0 && a.front_eps < 1.0) {
            return Err(Error::config(
                "analysis.front_eps",
                format!("{} must lie in (0, 1)", a.front_eps),
            ));
        }
        if let Some([lo, hi]) = a.fit_window {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return Err(Error::config(
                    "analysis.fit_window",
                    format!("[{lo}, {hi}] must satisfy 0 <= lo < hi"),
                ));
            }
        }
        if a.origin.is_some_and(|o| o >= c.n) {
            return Err(Error::config(
                "analysis.origin",
                format!("outside chain.n = {}", c.n),
            ));
        }
        if self.experiment == Experiment::Analyze
            && a.source == AnalysisSource::Density
            && c.noise == NoiseMode::Static
        {
            return Err(Error::config(
                "analysis.source",
                "static disorder needs analysis.source = \"ensemble\"",
            ));
        }
        if self.experiment == Experiment::Exact && c.noise == NoiseMode::Static {
            return Err(Error::config(
                "chain.noise",
                "the exact experiment has no static-disorder form",
            ));
        }
        Ok(())
    }
}

fn finite_nonneg(key: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::config(key, format!("{v} must be finite and >= 0")));
    }
    Ok(())
}

/// Parses and validates a TOML configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_with_overrides(text, &[])
}

/// Parses `text`, applies `key=value` overrides (dotted keys address
/// sections), then validates.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("config", e.to_string()))?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    let config: RunConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Builds the configuration of a `experiment` run from an optional TOML file
/// (defaults otherwise) and `key=value` overrides.
pub fn resolve_config(
    text: Option<&str>,
    experiment: Experiment,
    overrides: &[String],
) -> Result<RunConfig> {
    let text = match text {
        Some(t) => t.to_string(),
        None => RunConfig::new(experiment).to_toml()?,
    };
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config("config", e.to_string()))?;
    match table.get("experiment") {
        None => {
            table.insert(
                "experiment".into(),
                toml::Value::String(experiment.name().into()),
            );
        }
        Some(toml::Value::String(s)) if s == experiment.name() => {}
        Some(other) => {
            return Err(Error::config(
                "experiment",
                format!("file names {other} but the {experiment} subcommand was used"),
            ))
        }
    }
    let text = toml::to_string(&table).map_err(|e| Error::config("config", e.to_string()))?;
    parse_with_overrides(&text, overrides)
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::config(item, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = parse_value(raw);
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::config(key, "empty key"))?;
    let mut cursor = table;
    for part in parts {
        cursor = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("{part} is not a section")))?;
    }
    cursor.insert(leaf.to_string(), value);
    Ok(())
}

/// A TOML literal when `raw` parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
