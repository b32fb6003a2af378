//! Experiment configuration: a flat `key = value` file, overridden by CLI flags.
//!
//! ```text
//! # comments start with '#'
//! n_sensors = 500
//! omega = 0.5, 1, 2, 3
//! sizes = 50, 100, 150
//! scheme = uniform
//! ```
//!
//! List values are comma-separated. Keys that are absent fall back to the
//! defaults of the subcommand being run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use foldgft_core::interp::ReconstructionMethod;

use crate::error::AppError;

/// How sampling sets are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// `|S|` vertices drawn uniformly without replacement.
    Random,
    /// The sensor nearest each cell center of a `g × g` grid.
    Uniform,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Random => "random",
            Scheme::Uniform => "uniform",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self, AppError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(Scheme::Random),
            "uniform" | "grid" => Ok(Scheme::Uniform),
            other => Err(AppError::Config(format!(
                "unknown sampling scheme `{other}` (expected random or uniform)"
            ))),
        }
    }
}

/// Whether a random object is drawn once per condition or once per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Redraw {
    /// Use the subcommand's default for the scheme.
    Auto,
    /// One draw shared by every trial.
    Shared,
    /// A fresh draw for every trial.
    PerTrial,
}

impl FromStr for Redraw {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self, AppError> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "auto" | "default" => Ok(Redraw::Auto),
            "shared" | "fixed" => Ok(Redraw::Shared),
            "per_trial" | "trial" => Ok(Redraw::PerTrial),
            other => Err(AppError::Config(format!(
                "unknown redraw policy `{other}` (expected auto, shared or per_trial)"
            ))),
        }
    }
}

/// Which experiment a configuration is resolved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Table1,
    Sweep,
    Verify,
    Generate,
}

/// Partially specified configuration, as read from a file or from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub n_sensors: Option<usize>,
    pub knn_k: Option<usize>,
    pub sigma_d: Option<f64>,
    pub omega: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub sizes: Option<Vec<usize>>,
    pub schemes: Option<Vec<Scheme>>,
    pub methods: Option<Vec<ReconstructionMethod>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub field_policy: Option<Redraw>,
    pub sampling_policy: Option<Redraw>,
}

impl ConfigOverrides {
    /// Parses the flat `key = value` format.
    pub fn parse(text: &str) -> Result<Self, AppError> {
        let mut c = ConfigOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AppError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            let value = value.trim();
            let at = |e: AppError| AppError::Config(format!("line {}: {e}", lineno + 1));
            match key.as_str() {
                "n_sensors" => c.n_sensors = Some(parse_one(value).map_err(at)?),
                "knn_k" => c.knn_k = Some(parse_one(value).map_err(at)?),
                "sigma_d" => c.sigma_d = Some(parse_one(value).map_err(at)?),
                "omega" | "omega_list" => c.omega = Some(parse_list(value).map_err(at)?),
                "sigma" | "sigma_list" => c.sigma = Some(parse_list(value).map_err(at)?),
                "sizes" | "sample_sizes" => c.sizes = Some(parse_list(value).map_err(at)?),
                "scheme" | "schemes" | "sampling_scheme" => {
                    c.schemes = Some(parse_list(value).map_err(at)?)
                }
                "methods" => c.methods = Some(parse_methods(value).map_err(at)?),
                "trials" | "n_trials" => c.trials = Some(parse_one(value).map_err(at)?),
                "seed" | "master_seed" => c.seed = Some(parse_one(value).map_err(at)?),
                "out" | "output_path" => c.out = Some(PathBuf::from(value)),
                "field_policy" => c.field_policy = Some(value.parse().map_err(at)?),
                "sampling_policy" => c.sampling_policy = Some(value.parse().map_err(at)?),
                other => {
                    return Err(AppError::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(mut self, other: ConfigOverrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            n_sensors,
            knn_k,
            sigma_d,
            omega,
            sigma,
            sizes,
            schemes,
            methods,
            trials,
            seed,
            out,
            field_policy,
            sampling_policy
        );
        self
    }

    /// Fills in the defaults of `command` and validates the result.
    pub fn resolve(self, command: Command) -> Result<ExperimentConfig, AppError> {
        let d = ExperimentConfig::defaults(command);
        let cfg = ExperimentConfig {
            n_sensors: self.n_sensors.unwrap_or(d.n_sensors),
            knn_k: self.knn_k.unwrap_or(d.knn_k),
            sigma_d: self.sigma_d.unwrap_or(d.sigma_d),
            omega_list: self.omega.unwrap_or(d.omega_list),
            sigma_list: self.sigma.unwrap_or(d.sigma_list),
            sample_sizes: self.sizes.unwrap_or(d.sample_sizes),
            schemes: self.schemes.unwrap_or(d.schemes),
            methods: self.methods.unwrap_or(d.methods),
            n_trials: self.trials.unwrap_or(d.n_trials),
            master_seed: self.seed.unwrap_or(d.master_seed),
            output_path: self.out.unwrap_or(d.output_path),
            field_policy: self.field_policy.unwrap_or(d.field_policy),
            sampling_policy: self.sampling_policy.unwrap_or(d.sampling_policy),
            command,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_one<T: FromStr>(s: &str) -> Result<T, AppError> {
    s.trim()
        .parse()
        .map_err(|_| AppError::Config(format!("cannot parse `{}`", s.trim())))
}

/// Parses a comma-separated list; empty items are rejected.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, AppError> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|i| i.is_empty()) {
        return Err(AppError::Config(format!("malformed list `{s}`")));
    }
    items.into_iter().map(parse_one).collect()
}

pub fn parse_methods(s: &str) -> Result<Vec<ReconstructionMethod>, AppError> {
    let mut out: Vec<ReconstructionMethod> = Vec::new();
    for item in s.split(',') {
        let m: ReconstructionMethod = item.parse().map_err(|e| AppError::Config(format!("{e}")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out.sort();
    Ok(out)
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_sensors: usize,
    pub knn_k: usize,
    pub sigma_d: f64,
    pub omega_list: Vec<f64>,
    pub sigma_list: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub schemes: Vec<Scheme>,
    pub methods: Vec<ReconstructionMethod>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub output_path: PathBuf,
    pub field_policy: Redraw,
    pub sampling_policy: Redraw,
    pub command: Command,
}

pub const DEFAULT_SEED: u64 = 20_190_512;

impl ExperimentConfig {
    /// Defaults per subcommand. `table1` is noiseless with `ω = 1` and
    /// `|S| = 100` under both schemes; `sweep` crosses four frequencies,
    /// three noise levels and five sample sizes under uniform sampling.
    pub fn defaults(command: Command) -> Self {
        let base = ExperimentConfig {
            n_sensors: 500,
            knn_k: 8,
            sigma_d: 0.3,
            omega_list: vec![1.0],
            sigma_list: vec![0.0],
            sample_sizes: vec![100],
            schemes: vec![Scheme::Random, Scheme::Uniform],
            methods: ReconstructionMethod::ALL.to_vec(),
            n_trials: 100,
            master_seed: DEFAULT_SEED,
            output_path: PathBuf::from("results/table1"),
            field_policy: Redraw::Auto,
            sampling_policy: Redraw::Auto,
            command,
        };
        match command {
            Command::Table1 => base,
            Command::Sweep => ExperimentConfig {
                omega_list: vec![0.5, 1.0, 2.0, 3.0],
                sigma_list: vec![0.1, 0.2, 0.4],
                sample_sizes: vec![50, 75, 100, 125, 150],
                schemes: vec![Scheme::Uniform],
                output_path: PathBuf::from("results/sweep"),
                ..base
            },
            Command::Verify => ExperimentConfig {
                n_trials: 50,
                output_path: PathBuf::from("results/verify"),
                ..base
            },
            Command::Generate => ExperimentConfig {
                output_path: PathBuf::from("field.csv"),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let bad = |m: String| Err(AppError::Config(m));
        if self.n_sensors < 2 {
            return bad(format!("n_sensors = {} (need at least 2)", self.n_sensors));
        }
        if self.knn_k == 0 || self.knn_k >= self.n_sensors {
            return bad(format!(
                "knn_k = {} must be in 1..{}",
                self.knn_k, self.n_sensors
            ));
        }
        if !(self.sigma_d.is_finite() && self.sigma_d > 0.0) {
            return bad(format!("sigma_d = {} must be positive", self.sigma_d));
        }
        if self.n_trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.command == Command::Verify || self.command == Command::Generate {
            return Ok(());
        }
        if self.omega_list.is_empty() || self.omega_list.iter().any(|w| !w.is_finite() || *w < 0.0)
        {
            return bad(format!(
                "omega list {:?} must be nonempty, finite, ≥ 0",
                self.omega_list
            ));
        }
        if self.sigma_list.is_empty() || self.sigma_list.iter().any(|s| !s.is_finite() || *s < 0.0)
        {
            return bad(format!(
                "sigma list {:?} must be nonempty, finite, ≥ 0",
                self.sigma_list
            ));
        }
        if self.sample_sizes.is_empty()
            || self
                .sample_sizes
                .iter()
                .any(|&m| m == 0 || m >= self.n_sensors)
        {
            return bad(format!(
                "sample sizes {:?} must be nonempty and within 1..{}",
                self.sample_sizes, self.n_sensors
            ));
        }
        if self.schemes.is_empty() {
            return bad("no sampling scheme selected".into());
        }
        if self.methods.is_empty() {
            return bad("no method selected".into());
        }
        Ok(())
    }

    /// Whether every trial of `scheme` deploys its own sensor field.
    pub fn field_per_trial(&self, scheme: Scheme) -> bool {
        match self.field_policy {
            Redraw::Shared => false,
            Redraw::PerTrial => true,
            Redraw::Auto => self.command == Command::Table1 && scheme == Scheme::Uniform,
        }
    }

    /// Whether every trial of `scheme` draws its own sampling set. Uniform
    /// sets are a function of the field, so this only affects `random`.
    pub fn sampling_per_trial(&self, scheme: Scheme) -> bool {
        if scheme == Scheme::Uniform {
            return false;
        }
        match self.sampling_policy {
            Redraw::Shared => false,
            Redraw::PerTrial => true,
            Redraw::Auto => self.command == Command::Table1,
        }
    }
}
