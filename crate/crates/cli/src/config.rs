//! Flat `key = value` configuration files with `[section]` headers.
//!
//! Keys before the first header live in the unnamed section. `#` starts a
//! comment. A file may name a preset with a top-level `preset = <name>`; the
//! preset is parsed first and the file's keys override it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use dbconv::diagnostic::CMode;
use dbconv::samplers::{HastingsCorrection, ProposalSpec, SamplerConfig};
use dbconv::targets::START_QUANTILES;

use crate::presets;

/// A configuration problem, anchored to its source line when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError { origin: String::new(), line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.origin.is_empty(), self.line) {
            (false, Some(l)) => write!(f, "{}:{l}: {}", self.origin, self.message),
            (true, Some(l)) => write!(f, "line {l}: {}", self.message),
            (false, None) => write!(f, "{}: {}", self.origin, self.message),
            (true, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
    origin: String,
}

/// Parsed but not yet interpreted key-value pairs, keyed by `(section, key)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), Entry>,
}

impl RawConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let err = |line: usize, message: String| ConfigError { origin: origin.to_string(), line: Some(line), message };
        let mut section = String::new();
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix('[') {
                let name =
                    rest.strip_suffix(']').ok_or_else(|| err(line, format!("unterminated section header `{t}`")))?;
                let name = name.trim();
                if name.is_empty() || name.contains(['[', ']', '=']) {
                    return Err(err(line, format!("bad section name `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, found `{t}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(err(line, format!("bad key `{k}`")));
            }
            let key = (section.clone(), k.to_string());
            if let Some(prev) = entries.get(&key) {
                let prev: &Entry = prev;
                return Err(err(line, format!("duplicate key `{k}` (first set on line {})", prev.line)));
            }
            entries.insert(key, Entry { value: v.to_string(), line, origin: origin.to_string() });
        }
        Ok(RawConfig { entries })
    }

    /// Keys from `other` replace keys here.
    pub fn overlay(&mut self, other: RawConfig) {
        self.entries.extend(other.entries);
    }

    pub fn set(&mut self, section: &str, key: &str, value: String, origin: &str) {
        self.entries.insert((section.into(), key.into()), Entry { value, line: 0, origin: origin.into() });
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == section)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn fail(&self, e: &Entry, message: String) -> ConfigError {
        ConfigError { origin: e.origin.clone(), line: (e.line > 0).then_some(e.line), message }
    }

    pub fn str(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        e.value.parse().map(Some).map_err(|_| self.fail(e, format!("cannot parse `{}` for [{section}] {key}", e.value)))
    }

    pub fn get_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T, ConfigError> {
        self.get(section, key)?.ok_or_else(|| ConfigError::new(format!("missing required key [{section}] {key}")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(e) = self.entry(section, key) else { return Ok(None) };
        e.value
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| self.fail(e, format!("cannot parse list item `{}` in [{section}] {key}", p.trim())))
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    /// Error anchored at `[section] key`, or unanchored when the key is absent.
    pub fn error_at(&self, section: &str, key: &str, message: String) -> ConfigError {
        match self.entry(section, key) {
            Some(e) => self.fail(e, message),
            None => ConfigError::new(message),
        }
    }

    /// Rejects keys outside `known` so typos do not pass silently.
    pub fn check_known(&self, known: &[(&str, &[&str])]) -> Result<(), ConfigError> {
        for ((s, k), e) in &self.entries {
            let ok = known.iter().any(|(ks, keys)| ks == s && keys.contains(&k.as_str()));
            if !ok {
                let name = if s.is_empty() { k.clone() } else { format!("[{s}] {k}") };
                return Err(self.fail(e, format!("unknown key {name}")));
            }
        }
        Ok(())
    }
}

/// Reads a preset (if any) and the config text, with the text overriding the preset.
/// `preset_flag` wins over a `preset =` line in the text.
pub fn load(text: Option<(&str, &str)>, preset_flag: Option<&str>) -> Result<RawConfig, ConfigError> {
    let file = match text {
        Some((t, origin)) => RawConfig::parse(t, origin)?,
        None => RawConfig::default(),
    };
    let name = match preset_flag {
        Some(p) => Some(p.to_string()),
        None => file.str("", "preset").map(str::to_string),
    };
    let mut raw = match name {
        Some(n) => {
            let body = presets::preset(&n).ok_or_else(|| match file.entry("", "preset") {
                Some(e) if preset_flag.is_none() => file.fail(e, format!("unknown preset `{n}`")),
                _ => ConfigError::new(format!("unknown preset `{n}` (known: {})", presets::NAMES.join(", "))),
            })?;
            RawConfig::parse(body, &format!("preset {n}"))?
        }
        None => RawConfig::default(),
    };
    raw.overlay(file);
    Ok(raw)
}

const KNOWN: &[(&str, &[&str])] = &[
    ("", &["preset"]),
    (
        "target",
        &[
            "kind",
            "x_sd",
            "dims",
            "bound",
            "width",
            "data",
            "data_seed",
            "patients",
            "observations",
            "name",
            "states",
            "barrier",
        ],
    ),
    ("sampler", SAMPLER_KEYS),
    ("sampler.b", SAMPLER_KEYS),
    ("diagnostic", &["epsilon", "checkpoint", "alpha", "sigma", "c_mode", "lag_cap", "burn_in"]),
    (
        "run",
        &[
            "seed",
            "mode",
            "iterations",
            "max_iterations",
            "start",
            "quantiles",
            "workers",
            "histogram_bins",
            "histogram_coordinate",
            "histogram_reference",
            "write_trace",
        ],
    ),
    ("test", &["initial_n"]),
    ("schedule", &["t0", "ratio", "levels", "epsilon", "max_iter_per_level"]),
    ("compare", &["repeats"]),
];

const SAMPLER_KEYS: &[&str] = &["kind", "width", "sd", "correction", "interval", "max_steps", "updates"];

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Funnel { x_sd: f64, dims: usize, bound: f64, width: f64 },
    Changepoint { data: DataSource, width: f64 },
    Toy { name: ToyName },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(std::path::PathBuf),
    Simulated { seed: u64, patients: usize, observations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToyName {
    Uniform(usize),
    TwoWell(usize, f64),
    ThreeState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    /// One proposal, or one per annealing level.
    pub proposals: Vec<ProposalSpec<f64>>,
    pub updates: usize,
}

impl SamplerSpec {
    pub fn config(&self, level: usize) -> SamplerConfig<f64> {
        let p = self.proposals[level.min(self.proposals.len() - 1)];
        SamplerConfig { proposal: p, updates_per_iteration: self.updates }
    }

    pub fn label(&self) -> &'static str {
        self.proposals[0].label()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMode {
    Plugin,
    Mb,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSpec {
    pub epsilon: f64,
    pub checkpoint: u64,
    pub alpha: f64,
    pub sigma: SigmaMode,
    pub c_mode: CMode,
    pub lag_cap: usize,
    pub burn_in: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Single,
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartRule {
    /// Every coordinate at the grid point nearest 0.
    Origin,
    /// Funnel only: `X = x` and every `Y_i = 1`.
    X(f64),
    /// Funnel only: `X` at a quantile of its marginal, `Y_i = 1`.
    Quantile(f64),
    Coords(Vec<f64>),
    /// Uniform grid point, drawn from its own random stream.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    None,
    Normal { mean: f64, sd: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub mode: RunMode,
    /// Fixed length; when absent the chain stops at the first relative difference below epsilon.
    pub iterations: Option<u64>,
    pub max_iterations: u64,
    pub start: StartRule,
    pub quantiles: Vec<f64>,
    pub workers: usize,
    pub histogram_bins: Option<usize>,
    pub histogram_coordinate: usize,
    pub histogram_reference: Option<Reference>,
    pub write_trace: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    pub t0: f64,
    pub ratio: f64,
    pub levels: usize,
    pub epsilon: Vec<f64>,
    pub max_iter_per_level: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target: TargetSpec,
    pub sampler: SamplerSpec,
    pub sampler_b: Option<SamplerSpec>,
    pub diagnostic: DiagnosticSpec,
    pub run: RunSpec,
    pub test_initial_n: u64,
    pub schedule: Option<ScheduleSpec>,
    pub repeats: u64,
    pub seed: u64,
}

/// Total single updates a chain may spend before it counts as not converged.
pub const UPDATE_CAP: u64 = 10_000_000;

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        raw.check_known(KNOWN)?;
        let target = target_spec(raw)?;
        let sampler = sampler_spec(raw, "sampler")?.ok_or_else(|| ConfigError::new("missing [sampler] section"))?;
        let sampler_b = sampler_spec(raw, "sampler.b")?;
        let diagnostic = diagnostic_spec(raw)?;
        let run = run_spec(raw, &sampler)?;
        let test_initial_n = raw.get_or("test", "initial_n", diagnostic.checkpoint)?;
        if test_initial_n == 0 {
            return Err(raw.error_at("test", "initial_n", "initial_n must be >= 1".into()));
        }
        let schedule = schedule_spec(raw, diagnostic.epsilon)?;
        if let Some(s) = &schedule {
            let n = sampler.proposals.len();
            if n != 1 && n != s.levels {
                return Err(raw.error_at(
                    "sampler",
                    "width",
                    format!("{n} widths for {} temperature levels", s.levels),
                ));
            }
        }
        let repeats = raw.get_or("compare", "repeats", 1u64)?;
        if repeats == 0 {
            return Err(raw.error_at("compare", "repeats", "repeats must be >= 1".into()));
        }
        let seed = raw
            .get("run", "seed")?
            .ok_or_else(|| ConfigError::new("a seed is required: set [run] seed or pass --seed"))?;
        Ok(RunConfig { target, sampler, sampler_b, diagnostic, run, test_initial_n, schedule, repeats, seed })
    }
}

fn positive(raw: &RawConfig, section: &str, key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(raw.error_at(section, key, format!("[{section}] {key} = {v} must be positive")))
    }
}

fn target_spec(raw: &RawConfig) -> Result<TargetSpec, ConfigError> {
    let s = "target";
    let kind = raw.str(s, "kind").ok_or_else(|| ConfigError::new("missing [target] kind"))?;
    match kind {
        "funnel" => Ok(TargetSpec::Funnel {
            x_sd: positive(raw, s, "x_sd", raw.get_or(s, "x_sd", 3.0)?)?,
            dims: raw.get_or(s, "dims", 10)?,
            bound: positive(raw, s, "bound", raw.get_or(s, "bound", 30.0)?)?,
            width: positive(raw, s, "width", raw.get_or(s, "width", 0.01)?)?,
        }),
        "changepoint" => {
            let data = match raw.str(s, "data") {
                Some(path) => DataSource::File(path.into()),
                None => DataSource::Simulated {
                    seed: raw.get_or(s, "data_seed", 1)?,
                    patients: raw.get_or(s, "patients", dbconv::targets::N_PATIENTS)?,
                    observations: raw.get_or(s, "observations", dbconv::targets::N_OBS)?,
                },
            };
            Ok(TargetSpec::Changepoint { data, width: positive(raw, s, "width", raw.get_or(s, "width", 0.01)?)? })
        }
        "toy" => {
            let name = match raw.str(s, "name").unwrap_or("three-state") {
                "uniform" => ToyName::Uniform(raw.get_or(s, "states", 5)?),
                "two-well" => ToyName::TwoWell(raw.get_or(s, "states", 9)?, raw.get_or(s, "barrier", 3.0)?),
                "three-state" => ToyName::ThreeState,
                other => return Err(raw.error_at(s, "name", format!("unknown toy target `{other}`"))),
            };
            Ok(TargetSpec::Toy { name })
        }
        other => Err(raw.error_at(s, "kind", format!("unknown target kind `{other}` (funnel, changepoint, toy)"))),
    }
}

fn sampler_spec(raw: &RawConfig, s: &str) -> Result<Option<SamplerSpec>, ConfigError> {
    if !raw.has_section(s) {
        return Ok(None);
    }
    let kind = raw.str(s, "kind").ok_or_else(|| ConfigError::new(format!("missing [{s}] kind")))?;
    let proposals = match kind {
        "uniform-cube" => {
            let widths: Vec<f64> =
                raw.list(s, "width")?.ok_or_else(|| ConfigError::new(format!("missing [{s}] width")))?;
            widths.into_iter().map(|w| ProposalSpec::UniformCube { width: w }).collect()
        }
        "truncated-normal" => {
            let correction = match raw.str(s, "correction").unwrap_or("corrected") {
                "corrected" => HastingsCorrection::Corrected,
                "uncorrected" => HastingsCorrection::Uncorrected,
                other => return Err(raw.error_at(s, "correction", format!("unknown correction `{other}`"))),
            };
            vec![ProposalSpec::TruncatedNormal { sd: raw.get_or(s, "sd", 1.0)?, correction }]
        }
        "slice" => {
            vec![ProposalSpec::Slice { interval: raw.get_or(s, "interval", 1.0)?, max_steps: raw.get(s, "max_steps")? }]
        }
        other => {
            return Err(raw.error_at(
                s,
                "kind",
                format!("unknown sampler kind `{other}` (uniform-cube, truncated-normal, slice)"),
            ))
        }
    };
    for p in &proposals {
        p.validate().map_err(|e| raw.error_at(s, "kind", e.to_string()))?;
    }
    let updates = raw.get_or(s, "updates", 1usize)?;
    if updates == 0 {
        return Err(raw.error_at(s, "updates", "updates must be >= 1".into()));
    }
    Ok(Some(SamplerSpec { proposals, updates }))
}

fn diagnostic_spec(raw: &RawConfig) -> Result<DiagnosticSpec, ConfigError> {
    let s = "diagnostic";
    let epsilon = positive(raw, s, "epsilon", raw.get_or(s, "epsilon", 0.05)?)?;
    let checkpoint = raw.get_or(s, "checkpoint", 100u64)?;
    if checkpoint == 0 {
        return Err(raw.error_at(s, "checkpoint", "checkpoint must be >= 1".into()));
    }
    let alpha: f64 = raw.get_or(s, "alpha", 0.05)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(raw.error_at(s, "alpha", format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let sigma = match raw.str(s, "sigma").unwrap_or("plugin") {
        "plugin" => SigmaMode::Plugin,
        "mb" => SigmaMode::Mb,
        "analytic" => SigmaMode::Analytic,
        other => return Err(raw.error_at(s, "sigma", format!("unknown sigma mode `{other}` (plugin, mb, analytic)"))),
    };
    let c_mode = match raw.str(s, "c_mode").unwrap_or("full") {
        "full" => CMode::Full,
        "diagonal" => CMode::Diagonal,
        other => return Err(raw.error_at(s, "c_mode", format!("unknown c_mode `{other}` (full, diagonal)"))),
    };
    Ok(DiagnosticSpec {
        epsilon,
        checkpoint,
        alpha,
        sigma,
        c_mode,
        lag_cap: raw.get_or(s, "lag_cap", dbconv::diagnostic::DEFAULT_LAG_CAP)?,
        burn_in: raw.get_or(s, "burn_in", 0)?,
    })
}

fn run_spec(raw: &RawConfig, sampler: &SamplerSpec) -> Result<RunSpec, ConfigError> {
    let s = "run";
    let mode = match raw.str(s, "mode").unwrap_or("single") {
        "single" => RunMode::Single,
        "parallel" => RunMode::Parallel,
        other => return Err(raw.error_at(s, "mode", format!("unknown run mode `{other}` (single, parallel)"))),
    };
    let iterations: Option<u64> = raw.get(s, "iterations")?;
    if iterations == Some(0) {
        return Err(raw.error_at(s, "iterations", "iterations must be >= 1".into()));
    }
    let max_iterations = raw.get_or(s, "max_iterations", (UPDATE_CAP / sampler.updates as u64).max(1))?;
    let start = match raw.str(s, "start").unwrap_or("origin") {
        "origin" => StartRule::Origin,
        "random" => StartRule::Random,
        other => {
            let bad = |m: &str| raw.error_at(s, "start", format!("bad start `{other}`: {m}"));
            let (tag, val) = other
                .split_once(':')
                .ok_or_else(|| bad("expected origin, random, x:<v>, quantile:<q> or coords:<list>"))?;
            match tag {
                "x" => StartRule::X(val.trim().parse().map_err(|_| bad("not a number"))?),
                "quantile" => {
                    let q: f64 = val.trim().parse().map_err(|_| bad("not a number"))?;
                    if !(q > 0.0 && q < 1.0) {
                        return Err(bad("quantile must lie in (0, 1)"));
                    }
                    StartRule::Quantile(q)
                }
                "coords" => StartRule::Coords(
                    val.split(',')
                        .map(|p| p.trim().parse().map_err(|_| bad("not a number list")))
                        .collect::<Result<_, _>>()?,
                ),
                _ => return Err(bad("unknown rule")),
            }
        }
    };
    let quantiles = raw.list(s, "quantiles")?.unwrap_or_else(|| START_QUANTILES.to_vec());
    if quantiles.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
        return Err(raw.error_at(s, "quantiles", "quantiles must lie in (0, 1)".into()));
    }
    let workers = raw.get_or(s, "workers", 4usize)?.max(1);
    let histogram_reference = match raw.str(s, "histogram_reference") {
        None | Some("auto") => None,
        Some("none") => Some(Reference::None),
        Some(other) => {
            let bad = || {
                raw.error_at(
                    s,
                    "histogram_reference",
                    format!("expected auto, none or normal:<mean>,<sd>, found `{other}`"),
                )
            };
            let body = other.strip_prefix("normal:").ok_or_else(bad)?;
            let (m, sd) = body.split_once(',').ok_or_else(bad)?;
            let mean: f64 = m.trim().parse().map_err(|_| bad())?;
            let sd: f64 = sd.trim().parse().map_err(|_| bad())?;
            if !(sd > 0.0) {
                return Err(bad());
            }
            Some(Reference::Normal { mean, sd })
        }
    };
    let histogram_bins: Option<usize> = raw.get(s, "histogram_bins")?;
    if histogram_bins == Some(0) {
        return Err(raw.error_at(s, "histogram_bins", "histogram_bins must be >= 1".into()));
    }
    Ok(RunSpec {
        mode,
        iterations,
        max_iterations,
        start,
        quantiles,
        workers,
        histogram_bins,
        histogram_coordinate: raw.get_or(s, "histogram_coordinate", 0)?,
        histogram_reference,
        write_trace: raw.get_or(s, "write_trace", false)?,
    })
}

fn schedule_spec(raw: &RawConfig, default_eps: f64) -> Result<Option<ScheduleSpec>, ConfigError> {
    let s = "schedule";
    if !raw.has_section(s) {
        return Ok(None);
    }
    let levels: usize = raw.get_or(s, "levels", 6)?;
    let epsilon = raw.list(s, "epsilon")?.unwrap_or_else(|| vec![default_eps]);
    if epsilon.len() != 1 && epsilon.len() != levels {
        return Err(raw.error_at(s, "epsilon", format!("{} epsilons for {levels} levels", epsilon.len())));
    }
    Ok(Some(ScheduleSpec {
        t0: raw.get_or(s, "t0", 50.0)?,
        ratio: raw.get_or(s, "ratio", 0.5)?,
        levels,
        epsilon,
        max_iter_per_level: raw.get_or(s, "max_iter_per_level", 100_000)?,
    }))
}
