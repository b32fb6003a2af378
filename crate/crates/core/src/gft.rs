//! The spectral-folding `(L, Q)` graph Fourier transform.
//!
//! For a partition `S ∪ Sᶜ` the inner product is `Q = blockdiag(L_SS, L_ScSc)`
//! and the basis solves `L u = λ Q u`. Internally the vertices are permuted so
//! that `S` comes first; every public method takes and returns signals in the
//! caller's original vertex order.
//!
//! `Q` is kept as its two diagonal blocks and is never assembled as a full
//! `n × n` table.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Block, Error, Result};
use crate::graph::{check_partition_admissible, laplacian, Graph, VertexPartition};
use crate::linalg::{dot, Matrix};
use crate::spectral::{self, AccuracyReport, EigenDecomposition};

/// Eigenvalues within this distance of 1 are excluded from the bandlimited
/// set: the bandwidth `r` counts `λ < 1 − EIG_TOL`.
pub const EIG_TOL: f64 = 1e-8;

/// Tolerance for the spectrum being symmetric about 1 after a build.
pub const SPECTRUM_SYMMETRY_TOL: f64 = 1e-7;

/// Slack allowed outside `[0, 2]` for computed eigenvalues.
pub const SPECTRUM_RANGE_TOL: f64 = 1e-8;

/// The diagonal blocks `(L_SS, L_ScSc)` of the spectral-folding inner product.
///
/// `L_SS` splits into the boundary degrees (weight from each sampled vertex
/// into `Sᶜ`) on the diagonal plus the Laplacian of the subgraph induced on
/// `S`; `L_ScSc` splits the same way.
pub fn build_q(l: &Matrix, p: &VertexPartition) -> Result<(Matrix, Matrix)> {
    let adm = check_partition_admissible(l, p)?;
    if !adm.admissible {
        return Err(Error::InadmissiblePartition {
            block: adm.failed_block.unwrap_or(Block::Sampled),
            diagnostic: adm.diagnostic.unwrap_or_default(),
        });
    }
    let sampled = p.sampled();
    let complement = p.complement();
    Ok((
        l.select(sampled, sampled)?,
        l.select(&complement, &complement)?,
    ))
}

#[derive(Debug, Clone)]
pub struct SpectralFoldingGft {
    partition: VertexPartition,
    /// Permuted position → vertex (`S` first, then `Sᶜ`).
    order: Vec<usize>,
    /// Vertex → permuted position.
    position: Vec<usize>,
    /// Laplacian in permuted order.
    laplacian: Matrix,
    q_s: Matrix,
    q_sc: Matrix,
    /// Basis vectors as columns, rows in permuted order.
    basis: Matrix,
    eigenvalues: Vec<f64>,
    bandwidth: usize,
    accuracy: AccuracyReport,
}

impl SpectralFoldingGft {
    /// Builds the transform for graph `g` and partition `p`.
    pub fn build(g: &Graph, p: &VertexPartition) -> Result<Self> {
        Self::from_laplacian(&laplacian(g), p)
    }

    /// Builds the transform from a combinatorial Laplacian.
    pub fn from_laplacian(l: &Matrix, p: &VertexPartition) -> Result<Self> {
        let n = p.vertex_count();
        if l.nrows() != n || !l.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: l.nrows(),
            });
        }
        let (q_s, q_sc) = build_q(l, p)?;
        let s = p.sample_size();

        let mut order = p.sampled().to_vec();
        order.extend(p.complement());
        let mut position = vec![0; n];
        for (pos, &v) in order.iter().enumerate() {
            position[v] = pos;
        }
        let lp = l.select(&order, &order)?;

        let g_s = spectral::cholesky_lower(&q_s)?;
        let g_sc = spectral::cholesky_lower(&q_sc)?;
        let mut factor = Matrix::zeros(n, n);
        for i in 0..s {
            factor.row_mut(i)[..s].copy_from_slice(g_s.row(i));
        }
        for i in 0..(n - s) {
            factor.row_mut(s + i)[s..].copy_from_slice(g_sc.row(i));
        }

        let (dec, accuracy) =
            spectral::generalized_sym_eig_factored(&lp, &factor, |u| block_apply(&q_s, &q_sc, u))?;

        let EigenDecomposition { values, vectors } = dec;
        let deviation = folding_deviation(&values);
        let out_of_range = values
            .iter()
            .map(|&v| (-v).max(v - 2.0).max(0.0))
            .fold(0.0f64, f64::max);
        if deviation > SPECTRUM_SYMMETRY_TOL || out_of_range > SPECTRUM_RANGE_TOL {
            return Err(Error::FoldingViolated {
                max_deviation: deviation.max(out_of_range),
            });
        }
        let bandwidth = values.iter().filter(|&&v| v < 1.0 - EIG_TOL).count();

        Ok(Self {
            partition: p.clone(),
            order,
            position,
            laplacian: lp,
            q_s,
            q_sc,
            basis: vectors,
            eigenvalues: values,
            bandwidth,
            accuracy,
        })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn partition(&self) -> &VertexPartition {
        &self.partition
    }

    /// Ascending eigenvalues, all in `[0, 2]`.
    #[inline]
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of eigenvalues strictly below `1 − EIG_TOL`.
    #[inline]
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Largest eigenvalue inside the bandlimited set, if any.
    pub fn cutoff_eigenvalue(&self) -> Option<f64> {
        self.bandwidth.checked_sub(1).map(|r| self.eigenvalues[r])
    }

    /// `L_SS`.
    pub fn q_sampled(&self) -> &Matrix {
        &self.q_s
    }

    /// `L_ScSc`.
    pub fn q_complement(&self) -> &Matrix {
        &self.q_sc
    }

    /// Residual and orthonormality measured when the basis was computed.
    pub fn accuracy(&self) -> AccuracyReport {
        self.accuracy
    }

    /// Permuted position → original vertex. Positions `0..|S|` are `S`.
    pub fn vertex_order(&self) -> &[usize] {
        &self.order
    }

    /// Basis with rows in permuted order (`S` first).
    pub fn basis_permuted(&self) -> &Matrix {
        &self.basis
    }

    /// Basis with rows in original vertex order; column `i` pairs with
    /// `eigenvalues()[i]`.
    pub fn basis(&self) -> Matrix {
        let n = self.vertex_count();
        Matrix::from_fn(n, n, |v, k| self.basis[(self.position[v], k)])
    }

    /// Basis vector `i` in original vertex order.
    pub fn basis_vector(&self, i: usize) -> Vec<f64> {
        (0..self.vertex_count())
            .map(|v| self.basis[(self.position[v], i)])
            .collect()
    }

    pub(crate) fn to_permuted(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_signal(x)?;
        Ok(self.order.iter().map(|&v| x[v]).collect())
    }

    pub(crate) fn unpermute(&self, xp: &[f64]) -> Vec<f64> {
        self.position.iter().map(|&p| xp[p]).collect()
    }

    fn check_signal(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count(),
                actual: x.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }

    /// `Q · x` for a signal in permuted order.
    pub(crate) fn apply_q_permuted(&self, xp: &[f64]) -> Vec<f64> {
        let s = self.partition.sample_size();
        let mut out = Vec::with_capacity(xp.len());
        for i in 0..s {
            out.push(dot(self.q_s.row(i), &xp[..s]));
        }
        for i in 0..(xp.len() - s) {
            out.push(dot(self.q_sc.row(i), &xp[s..]));
        }
        out
    }

    /// Forward transform `x̂ = Uᵀ Q x`; entry `i` is `⟨x, u_i⟩_Q`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let xp = self.to_permuted(x)?;
        let qx = self.apply_q_permuted(&xp);
        self.basis.tr_mul_vec(&qx)
    }

    /// Inverse transform `x = U x̂`.
    pub fn inverse(&self, xhat: &[f64]) -> Result<Vec<f64>> {
        self.check_signal(xhat)?;
        let xp = self.basis.mul_vec(xhat)?;
        Ok(self.unpermute(&xp))
    }

    /// `⟨x, y⟩_Q = x_Sᵀ Q_S y_S + x_Scᵀ Q_Sc y_Sc`.
    pub fn q_inner(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let xp = self.to_permuted(x)?;
        let yp = self.to_permuted(y)?;
        let qy = self.apply_q_permuted(&yp);
        Ok(dot(&xp, &qy))
    }

    /// The two halves of `‖x‖²_Q`: `(‖x_S‖²_{Q_S}, ‖x_Sc‖²_{Q_Sc})`.
    pub fn q_energy_split(&self, x: &[f64]) -> Result<(f64, f64)> {
        let xp = self.to_permuted(x)?;
        let qx = self.apply_q_permuted(&xp);
        let s = self.partition.sample_size();
        Ok((dot(&xp[..s], &qx[..s]), dot(&xp[s..], &qx[s..])))
    }

    /// Synthesizes `U_VR c` for coefficients on the first `r` basis vectors.
    pub fn synthesize_bandlimited(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.bandwidth {
            return Err(Error::DimensionMismatch {
                expected: self.bandwidth,
                actual: coeffs.len(),
            });
        }
        let mut xhat = vec![0.0; self.vertex_count()];
        xhat[..self.bandwidth].copy_from_slice(coeffs);
        self.inverse(&xhat)
    }

    /// Checks that every pair `(u, λ)` folds onto `(J u, 2 − λ)`:
    /// `‖L J u − (2 − λ) Q J u‖_∞ ≤ tol · ‖L‖_∞`.
    pub fn verify_spectral_folding(&self, tol: f64) -> FoldingReport {
        let n = self.vertex_count();
        let s = self.partition.sample_size();
        let mut folded = self.basis.clone();
        for i in s..n {
            for v in folded.row_mut(i) {
                *v = -*v;
            }
        }
        let threshold = tol * self.laplacian.norm_inf();
        let lju = self
            .laplacian
            .matmul(&folded)
            .expect("square operands of equal size");
        let qju = block_apply(&self.q_s, &self.q_sc, &folded);
        let pairs: Vec<FoldingPair> = (0..n)
            .map(|k| {
                let partner = 2.0 - self.eigenvalues[k];
                let residual = (0..n)
                    .map(|i| (lju[(i, k)] - partner * qju[(i, k)]).abs())
                    .fold(0.0f64, f64::max);
                FoldingPair {
                    index: k,
                    eigenvalue: self.eigenvalues[k],
                    residual,
                    passed: residual <= threshold,
                }
            })
            .collect();
        let max_residual = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
        FoldingReport {
            pairs,
            max_residual,
            threshold,
        }
    }

    /// `max |U_SRᵀ Q_S U_SR − ½ I|`, or `None` when the bandlimited set is
    /// empty.
    pub fn sampled_gram_deviation(&self) -> Option<f64> {
        let r = self.bandwidth;
        if r == 0 {
            return None;
        }
        let s = self.partition.sample_size();
        let u_sr = Matrix::from_fn(s, r, |i, j| self.basis[(i, j)]);
        let gram = u_sr
            .tr_matmul(&self.q_s.matmul(&u_sr).expect("q_s is s×s"))
            .expect("same row count");
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                let target = if i == j { 0.5 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        Some(worst)
    }

    /// Largest gap between the sorted spectrum and its reflection `2 − λ`.
    pub fn spectrum_symmetry_error(&self) -> f64 {
        folding_deviation(&self.eigenvalues)
    }

    /// Shifts one stored eigenvalue. Exists so that verification tooling can
    /// demonstrate that the folding check catches a corrupted pair.
    #[doc(hidden)]
    pub fn perturb_eigenvalue(&mut self, index: usize, delta: f64) {
        self.eigenvalues[index] += delta;
    }
}

/// `blockdiag(q_s, q_sc) · u` for a matrix `u` with rows in permuted order.
fn block_apply(q_s: &Matrix, q_sc: &Matrix, u: &Matrix) -> Matrix {
    let s = q_s.nrows();
    let n = u.nrows();
    let cols = u.ncols();
    let mut out = Matrix::zeros(n, cols);
    for i in 0..s {
        for (k, &q) in q_s.row(i).iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            for (o, v) in out.row_mut(i).iter_mut().zip(u.row(k)) {
                *o += q * v;
            }
        }
    }
    for i in 0..(n - s) {
        for (k, &q) in q_sc.row(i).iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            for (o, v) in out.row_mut(s + i).iter_mut().zip(u.row(s + k)) {
                *o += q * v;
            }
        }
    }
    out
}

/// `max_i |λ_i − (2 − λ_{n−1−i})|` over the ascending spectrum.
fn folding_deviation(values: &[f64]) -> f64 {
    let n = values.len();
    (0..n)
        .map(|i| (values[i] - (2.0 - values[n - 1 - i])).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldingPair {
    pub index: usize,
    pub eigenvalue: f64,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldingReport {
    pub pairs: Vec<FoldingPair>,
    pub max_residual: f64,
    /// Absolute residual limit, `tol · ‖L‖_∞`.
    pub threshold: f64,
}

impl FoldingReport {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FoldingPair> {
        self.pairs.iter().filter(|p| !p.passed)
    }
}
