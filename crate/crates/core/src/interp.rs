//! Bandlimited interpolation from samples on `S`.
//!
//! * [`interpolate_sf`] is the closed-form spectral-folding interpolator
//!   `y = 2 U_VR U_SRᵀ Q_S x_S`. It needs no inverse and no bandwidth
//!   estimate: `r` is fixed by the spectrum of the `(L, Q)` transform.
//! * [`interpolate_bl_ls`] is the classic least-squares reconstruction in the
//!   span of the first `k` vectors of some other basis, used for the `(L, I)`
//!   and `(L, D)` baselines.
//! * [`brute_force_oracle`] solves the constrained problem directly and exists
//!   to cross-check the closed form.
//!
//! The prepared forms ([`SfInterpolator`], [`LeastSquaresInterpolator`]) fold
//! each method into a single `n × |S|` matrix so repeated reconstructions on
//! the same partition cost one matrix-vector product.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::gft::SpectralFoldingGft;
use crate::graph::VertexPartition;
use crate::linalg::{dot, norm_inf, Matrix, Svd};
use crate::math;
use crate::spectral::{cholesky_lower, EigenDecomposition};

/// Relative singular-value cutoff for the least-squares baselines.
pub const PINV_RCOND: f64 = 1e-10;

/// Relative singular-value cutoff used by the oracle.
pub const ORACLE_RCOND: f64 = 1e-12;

/// Samples `x_S` of a graph signal on the sampled set of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    partition: VertexPartition,
    values: Vec<f64>,
}

impl SampledSignal {
    /// `values[i]` is the sample at vertex `partition.sampled()[i]`.
    pub fn new(partition: VertexPartition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.sample_size() {
            return Err(Error::DimensionMismatch {
                expected: partition.sample_size(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { partition, values })
    }

    /// Restricts a full vertex-domain signal to `S`.
    pub fn from_full(partition: VertexPartition, full: &[f64]) -> Result<Self> {
        if full.len() != partition.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: partition.vertex_count(),
                actual: full.len(),
            });
        }
        let values = partition.sampled().iter().map(|&v| full[v]).collect();
        Self::new(partition, values)
    }

    pub fn partition(&self) -> &VertexPartition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Which reconstruction is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReconstructionMethod {
    /// Baseline: `(L, I)` transform, Euclidean least squares, cutoff `|S|`.
    BlI,
    /// Baseline: `(L, D)` transform, degree-weighted least squares, cutoff `|S|`.
    BlD,
    /// Closed-form spectral-folding `(L, Q)` interpolation, cutoff `r`.
    SfQ,
}

impl ReconstructionMethod {
    pub const ALL: [ReconstructionMethod; 3] = [Self::BlI, Self::BlD, Self::SfQ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::BlI => "BL_I",
            Self::BlD => "BL_D",
            Self::SfQ => "SF_Q",
        }
    }

    /// Number of basis vectors spanned by the reconstruction.
    pub fn cutoff(self, sample_size: usize, bandwidth: usize) -> usize {
        match self {
            Self::BlI | Self::BlD => sample_size,
            Self::SfQ => bandwidth,
        }
    }
}

impl fmt::Display for ReconstructionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReconstructionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "SF_Q" | "SFQ" | "LQ" => Ok(Self::SfQ),
            "BL_I" | "BLI" | "LI" => Ok(Self::BlI),
            "BL_D" | "BLD" | "LD" => Ok(Self::BlD),
            _ => Err(Error::InvalidParameter(format!("unknown method `{s}`"))),
        }
    }
}

fn check_same_partition(gft: &SpectralFoldingGft, xs: &SampledSignal) -> Result<()> {
    if gft.partition() != xs.partition() {
        return Err(Error::InvalidPartition(
            "samples and transform use different partitions".into(),
        ));
    }
    Ok(())
}

/// Closed-form interpolation `y = 2 U_VR U_SRᵀ Q_S x_S`.
///
/// When `|S| < |Sᶜ|` the result agrees with the samples on `S` and lies in
/// the span of the first `r` basis vectors.
pub fn interpolate_sf(gft: &SpectralFoldingGft, xs: &SampledSignal) -> Result<Vec<f64>> {
    check_same_partition(gft, xs)?;
    let r = gft.bandwidth();
    if r == 0 {
        return Err(Error::EmptyBandlimitedSubspace);
    }
    let u = gft.basis_permuted();
    let qx = gft.q_sampled().mul_vec(xs.values())?;
    let coeffs: Vec<f64> = (0..r)
        .map(|k| 2.0 * (0..qx.len()).map(|i| u[(i, k)] * qx[i]).sum::<f64>())
        .collect();
    let yp: Vec<f64> = (0..u.nrows())
        .map(|i| dot(&u.row(i)[..r], &coeffs))
        .collect();
    Ok(gft.unpermute(&yp))
}

/// A reconstruction folded into one linear map from `x_S` to the full signal.
#[derive(Debug, Clone)]
pub struct LinearReconstructor {
    partition: VertexPartition,
    /// `n × |S|`, rows in original vertex order.
    operator: Matrix,
}

impl LinearReconstructor {
    pub fn partition(&self) -> &VertexPartition {
        &self.partition
    }

    pub fn operator(&self) -> &Matrix {
        &self.operator
    }

    /// Reconstructs from samples ordered like `partition().sampled()`.
    pub fn apply(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.operator.mul_vec(samples)
    }

    /// Samples a full signal on `S` and reconstructs it.
    pub fn apply_full(&self, full: &[f64]) -> Result<Vec<f64>> {
        if full.len() != self.partition.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: self.partition.vertex_count(),
                actual: full.len(),
            });
        }
        let xs: Vec<f64> = self.partition.sampled().iter().map(|&v| full[v]).collect();
        self.apply(&xs)
    }
}

/// Prepared closed-form interpolator for a fixed transform.
pub type SfInterpolator = LinearReconstructor;

/// Prepared least-squares baseline for a fixed basis and partition.
pub type LeastSquaresInterpolator = LinearReconstructor;

impl LinearReconstructor {
    /// The operator `2 U_VR U_SRᵀ Q_S`.
    pub fn spectral_folding(gft: &SpectralFoldingGft) -> Result<Self> {
        let r = gft.bandwidth();
        if r == 0 {
            return Err(Error::EmptyBandlimitedSubspace);
        }
        let s = gft.partition().sample_size();
        let n = gft.vertex_count();
        let u = gft.basis_permuted();
        let u_sr = Matrix::from_fn(s, r, |i, k| u[(i, k)]);
        // (r × s) = 2 U_SRᵀ Q_S
        let mut coeff = u_sr.tr_matmul(gft.q_sampled())?;
        for i in 0..r {
            for v in coeff.row_mut(i) {
                *v *= 2.0;
            }
        }
        let u_vr = u.leading_columns(r);
        let permuted = u_vr.matmul(&coeff)?;
        let order = gft.vertex_order();
        let mut operator = Matrix::zeros(n, s);
        for (pos, &v) in order.iter().enumerate() {
            operator.row_mut(v).copy_from_slice(permuted.row(pos));
        }
        Ok(Self {
            partition: gft.partition().clone(),
            operator,
        })
    }

    /// The operator `U_VK · pinv(W_S^{1/2} U_SK) · W_S^{1/2}`.
    pub fn least_squares(
        basis: &EigenDecomposition,
        weight: &SampleWeight,
        partition: &VertexPartition,
        k: usize,
    ) -> Result<Self> {
        let n = partition.vertex_count();
        if basis.vectors.nrows() != n || basis.vectors.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: basis.vectors.nrows(),
            });
        }
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "cutoff k = {k} outside 1..={n}"
            )));
        }
        let sampled = partition.sampled();
        let sqrt_w = weight.sqrt_on(sampled, n)?;
        let a = Matrix::from_fn(sampled.len(), k, |i, j| {
            sqrt_w[i] * basis.vectors[(sampled[i], j)]
        });
        let mut pinv = Svd::compute(&a)?.pseudo_inverse(PINV_RCOND);
        for row in 0..k {
            for (v, w) in pinv.row_mut(row).iter_mut().zip(&sqrt_w) {
                *v *= w;
            }
        }
        let operator = basis.vectors.leading_columns(k).matmul(&pinv)?;
        Ok(Self {
            partition: partition.clone(),
            operator,
        })
    }
}

/// Norm used on the sampled residual by the least-squares baselines.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleWeight {
    /// Euclidean norm, for the `(L, I)` transform.
    Identity,
    /// Per-vertex weights over all `n` vertices (the degrees, for the
    /// `(L, D)` transform); only the entries on `S` are used.
    Diagonal(Vec<f64>),
}

impl SampleWeight {
    fn sqrt_on(&self, sampled: &[usize], n: usize) -> Result<Vec<f64>> {
        match self {
            SampleWeight::Identity => Ok(sampled.iter().map(|_| 1.0).collect()),
            SampleWeight::Diagonal(w) => {
                if w.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: w.len(),
                    });
                }
                sampled
                    .iter()
                    .map(|&v| {
                        let wv = w[v];
                        if wv.is_finite() && wv > 0.0 {
                            Ok(math::sqrt(wv))
                        } else {
                            Err(Error::InvalidParameter(format!(
                                "sample weight at vertex {v} is {wv}"
                            )))
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Least-squares bandlimited reconstruction in the span of the first `k`
/// columns of `basis`: `y = U_VK c*` with
/// `c* = argmin ‖U_SK c − x_S‖_W` solved by a pseudo-inverse with relative
/// cutoff [`PINV_RCOND`].
pub fn interpolate_bl_ls(
    basis: &EigenDecomposition,
    weight: &SampleWeight,
    partition: &VertexPartition,
    xs: &SampledSignal,
    k: usize,
) -> Result<Vec<f64>> {
    if xs.partition() != partition {
        return Err(Error::InvalidPartition(
            "samples and reconstruction use different partitions".into(),
        ));
    }
    LinearReconstructor::least_squares(basis, weight, partition, k)?.apply(xs.values())
}

/// `‖y_S − x_S‖²_{Q_S} + ‖y_Sc‖²_{Q_Sc}`, i.e. `‖y − [x_S; 0]‖²_Q`.
pub fn objective_value(gft: &SpectralFoldingGft, y: &[f64], xs: &SampledSignal) -> Result<f64> {
    check_same_partition(gft, xs)?;
    let mut e = y.to_vec();
    if e.len() != gft.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: gft.vertex_count(),
            actual: e.len(),
        });
    }
    for (&v, &x) in xs.partition().sampled().iter().zip(xs.values()) {
        e[v] -= x;
    }
    gft.q_inner(&e, &e)
}

/// Result of [`brute_force_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub signal: Vec<f64>,
    /// `‖U_SR c − x_S‖_∞`; zero (to rounding) when the constraint is feasible.
    pub constraint_residual: f64,
}

/// Solves the constrained problem directly: parameterize `y = U_VR c` and
/// fit `U_SR c = x_S`, in the `Q_S`-weighted least-squares sense when the
/// constraint cannot be met exactly.
pub fn brute_force_oracle(gft: &SpectralFoldingGft, xs: &SampledSignal) -> Result<OracleSolution> {
    check_same_partition(gft, xs)?;
    let r = gft.bandwidth();
    if r == 0 {
        return Err(Error::EmptyBandlimitedSubspace);
    }
    let s = gft.partition().sample_size();
    let u = gft.basis_permuted();
    let u_sr = Matrix::from_fn(s, r, |i, k| u[(i, k)]);
    // Q_S = G Gᵀ, so ‖Gᵀ (U_SR c − x_S)‖₂ is the Q_S-norm of the misfit.
    let g = cholesky_lower(gft.q_sampled())?;
    let gt = g.transpose();
    let a = gt.matmul(&u_sr)?;
    let b = gt.mul_vec(xs.values())?;
    let c = Svd::compute(&a)?.pseudo_inverse(ORACLE_RCOND).mul_vec(&b)?;

    let fitted = u_sr.mul_vec(&c)?;
    let misfit: Vec<f64> = fitted.iter().zip(xs.values()).map(|(f, x)| f - x).collect();
    let yp: Vec<f64> = (0..u.nrows()).map(|i| dot(&u.row(i)[..r], &c)).collect();
    Ok(OracleSolution {
        signal: gft.unpermute(&yp),
        constraint_residual: norm_inf(&misfit),
    })
}
