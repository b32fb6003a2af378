//! Sensor-network simulation: random deployments in the unit square, the
//! `cos(2π ω x)` test field, additive Gaussian noise, sampling-set
//! construction and SNR scoring.
//!
//! All randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded
//! with `seed_from_u64`, so identical seeds give identical draws on every
//! platform. Gaussian draws use the Box–Muller transform on pairs of
//! uniforms.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::graph::{squared_distance, VertexPartition};
use crate::math;

/// Reports cap infinite SNR (exact reconstruction) at this value.
pub const SNR_CAP_DB: f64 = 300.0;

/// Sensor positions in `[0, 1]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorField {
    positions: Vec<[f64; 2]>,
    seed: Option<u64>,
}

impl SensorField {
    /// Wraps explicit positions, e.g. read from a file.
    pub fn from_positions(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InsufficientPoints {
                needed: 2,
                got: positions.len(),
            });
        }
        for (i, p) in positions.iter().enumerate() {
            if !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1]) {
                return Err(Error::InvalidParameter(format!(
                    "sensor {i} at ({}, {}) lies outside the unit square",
                    p[0], p[1]
                )));
            }
        }
        Ok(Self {
            positions,
            seed: None,
        })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Seed the field was generated from, if it was generated.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// `n` sensors i.i.d. uniform on the unit square.
pub fn place_sensors(n: usize, seed: u64) -> Result<SensorField> {
    if n < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: n });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let positions = (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            [x, y]
        })
        .collect();
    Ok(SensorField {
        positions,
        seed: Some(seed),
    })
}

/// Oscillation count of the test field `s(x, y) = cos(2π ω x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub omega: f64,
}

impl SignalSpec {
    pub fn new(omega: f64) -> Result<Self> {
        if !omega.is_finite() || omega < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega must be finite and nonnegative, got {omega}"
            )));
        }
        Ok(Self { omega })
    }

    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        math::cos(2.0 * PI * self.omega * p[0])
    }
}

/// The test field evaluated at every sensor.
pub fn eval_signal(field: &SensorField, spec: SignalSpec) -> Vec<f64> {
    field.positions.iter().map(|&p| spec.value_at(p)).collect()
}

/// Additive white Gaussian noise with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be finite and nonnegative, got {sigma}"
            )));
        }
        Ok(Self { sigma, seed })
    }
}

/// `n` standard normal draws via Box–Muller.
pub fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        // 1 − U keeps the radius argument in (0, 1].
        let u1 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let radius = math::sqrt(-2.0 * math::ln(u1));
        let angle = 2.0 * PI * u2;
        out.push(radius * math::cos(angle));
        out.push(radius * math::sin(angle));
    }
    out.truncate(n);
    out
}

/// Returns `signal + η` with `η_i ~ N(0, σ²)` i.i.d. A zero `sigma` returns
/// the signal unchanged.
pub fn add_noise(signal: &[f64], noise: NoiseSpec) -> Vec<f64> {
    if noise.sigma == 0.0 {
        return signal.to_vec();
    }
    signal
        .iter()
        .zip(standard_normals(signal.len(), noise.seed))
        .map(|(s, z)| s + noise.sigma * z)
        .collect()
}

/// `m` distinct vertices drawn uniformly without replacement.
pub fn sample_random(n: usize, m: usize, seed: u64) -> Result<VertexPartition> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "sample size {m} must satisfy 1 ≤ m < n = {n}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    // Partial Fisher–Yates: the first m slots end up a uniform m-subset.
    for i in 0..m {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(m);
    VertexPartition::new(n, pool)
}

/// Indices of the sensors nearest to the centers of a `g × g` grid of equal
/// cells, `g = round(√m)`, deduplicated and sorted. Equal distances go to the
/// lower index, so the result does not depend on how the sensors are listed
/// beyond their indices.
pub fn grid_sample_indices(positions: &[[f64; 2]], m: usize) -> Vec<usize> {
    if positions.is_empty() || m == 0 {
        return Vec::new();
    }
    let g = (math::round(math::sqrt(m as f64)) as usize).max(1);
    let mut chosen = Vec::with_capacity(g * g);
    for a in 0..g {
        for b in 0..g {
            let center = [(a as f64 + 0.5) / g as f64, (b as f64 + 0.5) / g as f64];
            let nearest = positions
                .iter()
                .enumerate()
                .map(|(i, &p)| (squared_distance(p, center), i))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
                .map(|(_, i)| i)
                .expect("positions is nonempty");
            chosen.push(nearest);
        }
    }
    chosen.sort_unstable();
    chosen.dedup();
    chosen
}

/// Approximately spatially uniform sampling set from the grid-center rule.
/// The actual size can fall below `round(√m)²` when cells share a sensor.
pub fn sample_uniform_grid(field: &SensorField, m: usize) -> Result<VertexPartition> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "sample size must be at least 1".into(),
        ));
    }
    VertexPartition::new(field.len(), grid_sample_indices(field.positions(), m))
}

/// `10 log10(Σ truth² / Σ (truth − estimate)²)` over `eval_set`.
///
/// Exact agreement yields `+∞`; use [`cap_snr`] before reporting.
pub fn snr_db(truth: &[f64], estimate: &[f64], eval_set: &[usize]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: estimate.len(),
        });
    }
    if eval_set.is_empty() {
        return Err(Error::InvalidParameter("empty SNR evaluation set".into()));
    }
    let mut signal = 0.0;
    let mut error = 0.0;
    for &i in eval_set {
        if i >= truth.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: truth.len(),
            });
        }
        signal += truth[i] * truth[i];
        let e = truth[i] - estimate[i];
        error += e * e;
    }
    if signal == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * math::log10(signal / error))
}

/// Clamps an SNR into `[-SNR_CAP_DB, SNR_CAP_DB]`.
pub fn cap_snr(snr: f64) -> f64 {
    snr.clamp(-SNR_CAP_DB, SNR_CAP_DB)
}
