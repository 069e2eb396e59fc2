//! Run configuration: defaults, a flat `key = value` file, and flag overrides.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qcollide::engine::{named_initial, CollisionPolicy, StateVector};
use qcollide::{Sampler, Seed};

use crate::CliError;

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: Seed,
    pub steps: usize,
    pub trajectories: usize,
    /// A state label or an amplitude literal.
    pub initial: String,
    pub policy: CollisionPolicy,
    pub sampler: Sampler,
    pub fit_window: (usize, usize),
    pub bins: usize,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub oracle_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: Seed(2024),
            steps: 40,
            trajectories: 10_000,
            initial: "product".into(),
            policy: CollisionPolicy::Random,
            sampler: Sampler::Hurwitz,
            fit_window: (1, 15),
            bins: 40,
            output_dir: PathBuf::from("."),
            workers: 1,
            oracle_samples: 100_000,
        }
    }
}

impl RunConfig {
    pub fn initial_state(&self) -> Result<StateVector, CliError> {
        named_initial(&self.initial).map_err(CliError::from)
    }

    /// Text that [`Overrides::parse`] turns back into this configuration.
    pub fn to_echo(&self) -> String {
        let mut s = String::new();
        let (a, b) = self.fit_window;
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "trajectories = {}", self.trajectories);
        let _ = writeln!(s, "initial = {}", self.initial);
        let _ = writeln!(s, "policy = {}", self.policy);
        let _ = writeln!(s, "sampler = {}", self.sampler);
        let _ = writeln!(s, "fit_window = {a}:{b}");
        let _ = writeln!(s, "bins = {}", self.bins);
        let _ = writeln!(s, "out = {}", self.output_dir.display());
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "oracle_samples = {}", self.oracle_samples);
        s
    }
}

/// Partially specified settings from one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<String>,
    pub steps: Option<String>,
    pub trajectories: Option<String>,
    pub initial: Option<String>,
    pub policy: Option<String>,
    pub sampler: Option<String>,
    pub fit_window: Option<String>,
    pub bins: Option<String>,
    pub out: Option<String>,
    pub workers: Option<String>,
    pub oracle_samples: Option<String>,
}

impl Overrides {
    /// Parses `key = value` lines; `#` starts a comment. Keys use the flag
    /// names with `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut o = Overrides::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            let value = Some(value.trim().to_string());
            match key.trim().replace('-', "_").as_str() {
                "seed" => o.seed = value,
                "steps" => o.steps = value,
                "trajectories" => o.trajectories = value,
                "initial" => o.initial = value,
                "policy" => o.policy = value,
                "sampler" => o.sampler = value,
                "fit_window" => o.fit_window = value,
                "bins" => o.bins = value,
                "out" | "output_dir" => o.out = value,
                "workers" => o.workers = value,
                "oracle_samples" => o.oracle_samples = value,
                other => {
                    return Err(CliError::Usage(format!(
                        "config line {}: unknown key {other:?}",
                        n + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Fields set in `top` win.
    pub fn layered_under(self, top: Overrides) -> Overrides {
        Overrides {
            seed: top.seed.or(self.seed),
            steps: top.steps.or(self.steps),
            trajectories: top.trajectories.or(self.trajectories),
            initial: top.initial.or(self.initial),
            policy: top.policy.or(self.policy),
            sampler: top.sampler.or(self.sampler),
            fit_window: top.fit_window.or(self.fit_window),
            bins: top.bins.or(self.bins),
            out: top.out.or(self.out),
            workers: top.workers.or(self.workers),
            oracle_samples: top.oracle_samples.or(self.oracle_samples),
        }
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(v) = self.seed {
            cfg.seed = v.parse()?;
        }
        if let Some(v) = self.steps {
            cfg.steps = count("steps", &v)?;
        }
        if let Some(v) = self.trajectories {
            cfg.trajectories = count("trajectories", &v)?;
        }
        if let Some(v) = self.initial {
            cfg.initial = match v.strip_prefix('@') {
                Some(path) => read_arg_file(path)?,
                None => v,
            };
        }
        if let Some(v) = self.policy {
            cfg.policy = match v.strip_prefix('@') {
                Some(path) => CollisionPolicy::parse_sequence(&read_arg_file(path)?)?,
                None => v.parse()?,
            };
        }
        if let Some(v) = self.sampler {
            cfg.sampler = v.parse()?;
        }
        if let Some(v) = self.fit_window {
            cfg.fit_window = parse_window(&v)?;
        }
        if let Some(v) = self.bins {
            cfg.bins = count("bins", &v)?;
        }
        if let Some(v) = self.out {
            cfg.output_dir = PathBuf::from(v);
        }
        if let Some(v) = self.workers {
            cfg.workers = count("workers", &v)?;
        }
        if let Some(v) = self.oracle_samples {
            cfg.oracle_samples = count("oracle_samples", &v)?;
        }
        if cfg.trajectories == 0 {
            return Err(CliError::Usage("trajectories must be at least 1".into()));
        }
        if cfg.bins == 0 {
            return Err(CliError::Usage("bins must be at least 1".into()));
        }
        if cfg.workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        // Validate the state now so that a bad literal is a usage error.
        cfg.initial_state()?;
        Ok(cfg)
    }
}

fn count(name: &str, v: &str) -> Result<usize, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{name} must be a non-negative integer, got {v:?}")))
}

fn read_arg_file(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map(|s| s.trim().to_string())
        .map_err(|e| CliError::io(Path::new(path), e))
}

/// Parses `a:b`.
pub fn parse_window(v: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("fit window must look like 1:15, got {v:?}"));
    let (a, b) = v.trim().split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a >= b {
        return Err(bad());
    }
    Ok((a, b))
}
