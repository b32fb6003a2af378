//! Monte Carlo reconstruction experiments on simulated sensor fields.
//!
//! A run is a factorial design over scheme × ω × σ × |S| × trial × method.
//! The expensive objects (field, graph, transforms, reconstruction operators)
//! are built once per *setup* and shared by every trial that uses the same
//! field and sampling set. Which draws are shared is controlled by
//! [`ExperimentConfig::field_per_trial`] and
//! [`ExperimentConfig::sampling_per_trial`].
//!
//! Seeds are pure functions of the master seed and the condition indices:
//!
//! | draw | path |
//! |------|------|
//! | field | `FIELD, scheme[, trial]` |
//! | random sampling set | `SAMPLING, scheme, size index[, trial]` |
//! | noise | `NOISE, scheme, ω index, σ index, size index, trial` |
//!
//! The bracketed `trial` is present only when that draw is redone per trial.
//! Work may run in parallel; rows are always returned in (scheme, ω, σ, |S|,
//! trial, method) order, so output never depends on scheduling.

use rayon::prelude::*;

use foldgft_core::gft::SpectralFoldingGft;
use foldgft_core::graph::{
    build_knn_graph, check_partition_admissible, degree_table, laplacian, Graph, VertexPartition,
};
use foldgft_core::interp::{LinearReconstructor, ReconstructionMethod, SampleWeight};
use foldgft_core::linalg::Matrix;
use foldgft_core::seed::{derive_seed, stream};
use foldgft_core::sensor::{
    add_noise, cap_snr, eval_signal, place_sensors, sample_random, sample_uniform_grid, snr_db,
    NoiseSpec, SensorField, SignalSpec,
};
use foldgft_core::spectral::{generalized_sym_eig, sym_eig, EigenDecomposition};
use foldgft_core::Error as CoreError;

use crate::config::{ExperimentConfig, Scheme};

/// One reconstruction of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: ReconstructionMethod,
    pub scheme: Scheme,
    pub omega: f64,
    pub sigma: f64,
    pub sample_size_requested: usize,
    /// Size of the sampling set actually used (grid deduplication can shrink it).
    pub sample_size_actual: usize,
    pub trial: usize,
    pub field_seed: u64,
    /// 0 for the uniform scheme, whose sets are a function of the field.
    pub sampling_seed: u64,
    pub noise_seed: u64,
    /// Number of basis vectors the reconstruction spans (`r` or `|S|`).
    pub cutoff: usize,
    /// Capped to ±300 dB; `None` when the trial failed.
    pub snr_db: Option<f64>,
    /// `ok`, or a diagnostic explaining the failure.
    pub status: String,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.snr_db.is_some()
    }
}

/// Rows of a run in deterministic order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<TrialRecord>,
}

/// Per-condition aggregate over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub method: ReconstructionMethod,
    pub omega: f64,
    pub sigma: f64,
    pub sample_size: usize,
    pub mean_sample_size_actual: f64,
    pub trials: usize,
    pub failures: usize,
    /// NaN when every trial failed.
    pub mean_snr: f64,
    /// Sample standard deviation (`n − 1`); 0 for a single trial.
    pub std_snr: f64,
}

/// Groups consecutive rows by condition and method. Rows from
/// [`run_experiment`] are already grouped; the grouping key is otherwise
/// order-preserving by first appearance.
pub fn summarize(result: &ExperimentResult) -> Vec<SummaryRow> {
    let mut groups: Vec<(SummaryKey, Vec<&TrialRecord>)> = Vec::new();
    for row in &result.rows {
        let key = SummaryKey::of(row);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    groups
        .into_iter()
        .map(|(k, rows)| {
            let ok: Vec<f64> = rows.iter().filter_map(|r| r.snr_db).collect();
            let (mean, std) = mean_std(&ok);
            let size_sum: f64 = rows.iter().map(|r| r.sample_size_actual as f64).sum();
            SummaryRow {
                scheme: k.scheme,
                method: k.method,
                omega: k.omega,
                sigma: k.sigma,
                sample_size: k.size,
                mean_sample_size_actual: size_sum / rows.len() as f64,
                trials: ok.len(),
                failures: rows.len() - ok.len(),
                mean_snr: mean,
                std_snr: std,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SummaryKey {
    scheme: Scheme,
    method: ReconstructionMethod,
    omega: f64,
    sigma: f64,
    size: usize,
}

impl SummaryKey {
    fn of(r: &TrialRecord) -> Self {
        SummaryKey {
            scheme: r.scheme,
            method: r.method,
            omega: r.omega,
            sigma: r.sigma,
            size: r.sample_size_requested,
        }
    }
}

/// Arithmetic mean and sample standard deviation, summed in order.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn scheme_code(s: Scheme) -> u64 {
    match s {
        Scheme::Random => 0,
        Scheme::Uniform => 1,
    }
}

pub fn field_seed(cfg: &ExperimentConfig, scheme: Scheme, trial: usize) -> u64 {
    if cfg.field_per_trial(scheme) {
        derive_seed(
            cfg.master_seed,
            &[stream::FIELD, scheme_code(scheme), trial as u64],
        )
    } else {
        derive_seed(cfg.master_seed, &[stream::FIELD, scheme_code(scheme)])
    }
}

pub fn sampling_seed(cfg: &ExperimentConfig, scheme: Scheme, size_idx: usize, trial: usize) -> u64 {
    match scheme {
        Scheme::Uniform => 0,
        Scheme::Random if cfg.sampling_per_trial(scheme) => derive_seed(
            cfg.master_seed,
            &[stream::SAMPLING, 0, size_idx as u64, trial as u64],
        ),
        Scheme::Random => derive_seed(cfg.master_seed, &[stream::SAMPLING, 0, size_idx as u64]),
    }
}

pub fn noise_seed(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    omega_idx: usize,
    sigma_idx: usize,
    size_idx: usize,
    trial: usize,
) -> u64 {
    derive_seed(
        cfg.master_seed,
        &[
            stream::NOISE,
            scheme_code(scheme),
            omega_idx as u64,
            sigma_idx as u64,
            size_idx as u64,
            trial as u64,
        ],
    )
}

/// Everything derived from one sensor field.
pub struct FieldContext {
    pub field: SensorField,
    pub graph: Graph,
    pub laplacian: Matrix,
    pub degrees: Vec<f64>,
    /// `(L, I)` basis, if a method needs it.
    pub basis_i: Option<Result<EigenDecomposition, CoreError>>,
    /// `(L, D)` basis, if a method needs it.
    pub basis_d: Option<Result<EigenDecomposition, CoreError>>,
}

impl FieldContext {
    pub fn build(
        cfg: &ExperimentConfig,
        seed: u64,
        methods: &[ReconstructionMethod],
    ) -> Result<Self, CoreError> {
        let field = place_sensors(cfg.n_sensors, seed)?;
        Self::from_field(cfg, field, methods)
    }

    pub fn from_field(
        cfg: &ExperimentConfig,
        field: SensorField,
        methods: &[ReconstructionMethod],
    ) -> Result<Self, CoreError> {
        let graph = build_knn_graph(field.positions(), cfg.knn_k, cfg.sigma_d)?;
        let lap = laplacian(&graph);
        let degrees = degree_table(&graph);
        let basis_i = methods
            .contains(&ReconstructionMethod::BlI)
            .then(|| sym_eig(&lap));
        let basis_d = methods
            .contains(&ReconstructionMethod::BlD)
            .then(|| generalized_sym_eig(&lap, &Matrix::from_diagonal(&degrees)));
        Ok(FieldContext {
            field,
            graph,
            laplacian: lap,
            degrees,
            basis_i,
            basis_d,
        })
    }

    /// Sampling set for `scheme` with `m` requested samples.
    pub fn partition(
        &self,
        scheme: Scheme,
        m: usize,
        seed: u64,
    ) -> Result<VertexPartition, CoreError> {
        match scheme {
            Scheme::Random => sample_random(self.field.len(), m, seed),
            Scheme::Uniform => sample_uniform_grid(&self.field, m),
        }
    }

    /// The linear map from samples on `p` to a full signal, or the reason
    /// the method cannot run on this partition.
    pub fn reconstructor(&self, method: ReconstructionMethod, p: &VertexPartition) -> Built {
        let k = p.sample_size();
        match method {
            ReconstructionMethod::SfQ => {
                let gft = SpectralFoldingGft::from_laplacian(&self.laplacian, p)?;
                let r = gft.bandwidth();
                Ok((LinearReconstructor::spectral_folding(&gft)?, r))
            }
            ReconstructionMethod::BlI => {
                let b = computed(&self.basis_i)?;
                Ok((
                    LinearReconstructor::least_squares(b, &SampleWeight::Identity, p, k)?,
                    k,
                ))
            }
            ReconstructionMethod::BlD => {
                let b = computed(&self.basis_d)?;
                let w = SampleWeight::Diagonal(self.degrees.clone());
                Ok((LinearReconstructor::least_squares(b, &w, p, k)?, k))
            }
        }
    }
}

fn computed(
    b: &Option<Result<EigenDecomposition, CoreError>>,
) -> Result<&EigenDecomposition, CoreError> {
    match b {
        Some(Ok(d)) => Ok(d),
        Some(Err(e)) => Err(e.clone()),
        None => Err(CoreError::InvalidParameter(
            "basis was not computed for this method".into(),
        )),
    }
}

/// A reconstruction operator with its cutoff, or why it could not be built.
type Built = Result<(LinearReconstructor, usize), CoreError>;

/// Sort key: (scheme position, ω, σ, size, trial, method).
type RowKey = (usize, usize, usize, usize, usize, ReconstructionMethod);

struct Setup {
    scheme: Scheme,
    size_idx: usize,
    trials: Vec<usize>,
    sampling_seed: u64,
}

struct FieldUnit {
    scheme_pos: usize,
    seed: u64,
    setups: Vec<Setup>,
}

fn plan(cfg: &ExperimentConfig) -> Vec<FieldUnit> {
    let all: Vec<usize> = (0..cfg.n_trials).collect();
    let mut units = Vec::new();
    for (scheme_pos, &scheme) in cfg.schemes.iter().enumerate() {
        let field_groups: Vec<Vec<usize>> = if cfg.field_per_trial(scheme) {
            all.iter().map(|&t| vec![t]).collect()
        } else {
            vec![all.clone()]
        };
        for trials in field_groups {
            let seed = field_seed(cfg, scheme, trials[0]);
            let mut setups = Vec::new();
            for size_idx in 0..cfg.sample_sizes.len() {
                let groups: Vec<Vec<usize>> = if cfg.sampling_per_trial(scheme) {
                    trials.iter().map(|&t| vec![t]).collect()
                } else {
                    vec![trials.clone()]
                };
                for g in groups {
                    setups.push(Setup {
                        scheme,
                        size_idx,
                        sampling_seed: sampling_seed(cfg, scheme, size_idx, g[0]),
                        trials: g,
                    });
                }
            }
            units.push(FieldUnit {
                scheme_pos,
                seed,
                setups,
            });
        }
    }
    units
}

/// Runs the full design described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> ExperimentResult {
    let units = plan(cfg);
    let mut keyed: Vec<(RowKey, TrialRecord)> = units
        .par_iter()
        .flat_map_iter(|unit| run_unit(cfg, unit))
        .collect();
    keyed.sort_by_key(|(k, _)| *k);
    ExperimentResult {
        rows: keyed.into_iter().map(|(_, r)| r).collect(),
    }
}

/// Table 1: noiseless `ω = 1`, `|S| = 100` under both sampling schemes (by
/// default). Random-scheme trials share one field and redraw `S`;
/// uniform-scheme trials deploy a new field each time.
pub fn run_table1(cfg: &ExperimentConfig) -> ExperimentResult {
    run_experiment(cfg)
}

/// Noise sweep: field, graph and `S` are fixed per condition, and only the
/// noise is redrawn across trials (by default).
pub fn run_sweep(cfg: &ExperimentConfig) -> ExperimentResult {
    run_experiment(cfg)
}

fn run_unit(cfg: &ExperimentConfig, unit: &FieldUnit) -> Vec<(RowKey, TrialRecord)> {
    let ctx = FieldContext::build(cfg, unit.seed, &cfg.methods);
    unit.setups
        .par_iter()
        .flat_map_iter(|setup| run_setup(cfg, unit, setup, ctx.as_ref()))
        .collect()
}

fn run_setup(
    cfg: &ExperimentConfig,
    unit: &FieldUnit,
    setup: &Setup,
    ctx: Result<&FieldContext, &CoreError>,
) -> Vec<(RowKey, TrialRecord)> {
    let m = cfg.sample_sizes[setup.size_idx];
    // A failure here sinks every method of the affected trials.
    let shared: Result<(&FieldContext, VertexPartition), String> =
        ctx.map_err(|e| format!("field: {e}")).and_then(|ctx| {
            let p = ctx
                .partition(setup.scheme, m, setup.sampling_seed)
                .map_err(|e| format!("sampling: {e}"))?;
            let adm = check_partition_admissible(&ctx.laplacian, &p)
                .map_err(|e| format!("admissibility: {e}"))?;
            if !adm.admissible {
                return Err(format!(
                    "inadmissible partition: {}",
                    adm.diagnostic.unwrap_or_default()
                ));
            }
            Ok((ctx, p))
        });

    let mut out = Vec::new();
    let base = |trial: usize, omega_idx: usize, sigma_idx: usize, method| TrialRecord {
        method,
        scheme: setup.scheme,
        omega: cfg.omega_list[omega_idx],
        sigma: cfg.sigma_list[sigma_idx],
        sample_size_requested: m,
        sample_size_actual: 0,
        trial,
        field_seed: unit.seed,
        sampling_seed: setup.sampling_seed,
        noise_seed: noise_seed(
            cfg,
            setup.scheme,
            omega_idx,
            sigma_idx,
            setup.size_idx,
            trial,
        ),
        cutoff: 0,
        snr_db: None,
        status: String::new(),
    };
    let key = |trial, omega_idx, sigma_idx, method| {
        (
            unit.scheme_pos,
            omega_idx,
            sigma_idx,
            setup.size_idx,
            trial,
            method,
        )
    };

    let (ctx, p) = match shared {
        Ok(v) => v,
        Err(msg) => {
            for &t in &setup.trials {
                for oi in 0..cfg.omega_list.len() {
                    for si in 0..cfg.sigma_list.len() {
                        for &method in &cfg.methods {
                            let mut r = base(t, oi, si, method);
                            r.status = format!("failed: {msg}");
                            out.push((key(t, oi, si, method), r));
                        }
                    }
                }
            }
            return out;
        }
    };

    let eval = p.complement();
    let ops: Vec<(ReconstructionMethod, Built)> = cfg
        .methods
        .iter()
        .map(|&method| (method, ctx.reconstructor(method, &p)))
        .collect();

    for (oi, &omega) in cfg.omega_list.iter().enumerate() {
        let clean = match SignalSpec::new(omega) {
            Ok(spec) => eval_signal(&ctx.field, spec),
            Err(_) => unreachable!("omega validated by config"),
        };
        for (si, &sigma) in cfg.sigma_list.iter().enumerate() {
            for &t in &setup.trials {
                let nseed = noise_seed(cfg, setup.scheme, oi, si, setup.size_idx, t);
                let observed = match NoiseSpec::new(sigma, nseed) {
                    Ok(noise) => add_noise(&clean, noise),
                    Err(_) => unreachable!("sigma validated by config"),
                };
                for (method, op) in &ops {
                    let mut r = base(t, oi, si, *method);
                    r.sample_size_actual = p.sample_size();
                    match op {
                        Ok((op, cutoff)) => {
                            r.cutoff = *cutoff;
                            match op
                                .apply_full(&observed)
                                .and_then(|y| snr_db(&clean, &y, &eval))
                            {
                                Ok(snr) => {
                                    r.snr_db = Some(cap_snr(snr));
                                    r.status = "ok".into();
                                }
                                Err(e) => r.status = format!("failed: {e}"),
                            }
                        }
                        Err(e) => r.status = format!("failed: {e}"),
                    }
                    out.push((key(t, oi, si, *method), r));
                }
            }
        }
    }
    out
}

/// Recomputes one row from its logged seeds alone.
pub fn replay(cfg: &ExperimentConfig, row: &TrialRecord) -> Result<f64, CoreError> {
    let ctx = FieldContext::build(cfg, row.field_seed, &[row.method])?;
    let p = ctx.partition(row.scheme, row.sample_size_requested, row.sampling_seed)?;
    let (op, _) = ctx.reconstructor(row.method, &p)?;
    let clean = eval_signal(&ctx.field, SignalSpec::new(row.omega)?);
    let observed = add_noise(&clean, NoiseSpec::new(row.sigma, row.noise_seed)?);
    let y = op.apply_full(&observed)?;
    Ok(cap_snr(snr_db(&clean, &y, &p.complement())?))
}
