//! Dense symmetric and generalized-symmetric eigensolvers.
//!
//! The symmetric solver is Householder tridiagonalization followed by the
//! implicit-shift QL iteration (the EISPACK `tred2`/`tql2` pair). The
//! generalized problem `M u = λ Q u` is reduced to a standard one through
//! the Cholesky factor `Q = G Gᵀ`:
//!
//! ```text
//! C = G⁻¹ M G⁻ᵀ,   C v = λ v,   u = G⁻ᵀ v
//! ```
//!
//! which yields `Q`-orthonormal eigenvectors. Every generalized solve checks
//! its own accuracy contract before returning.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{backward_substitute_transposed, dot, forward_substitute, Matrix};
use crate::math;

/// Pivot threshold of [`cholesky_lower`], relative to the largest diagonal.
pub const CHOLESKY_PIVOT_REL: f64 = 1e-12;

/// Residual bound `‖M u − λ Q u‖_∞ ≤ RESIDUAL_REL · ‖M‖_∞`.
pub const RESIDUAL_REL: f64 = 1e-8;

/// Bound on `max |UᵀQU − I|`.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// QL iterations allowed per eigenvalue, summed over the whole spectrum.
const QL_ITERATIONS_PER_EIGENVALUE: usize = 30;

/// Relative asymmetry accepted on input before a matrix is rejected.
const SYMMETRY_REL: f64 = 1e-12;

/// Eigenvalues in ascending order; column `i` of `vectors` belongs to
/// `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }
}

/// Accuracy of a generalized decomposition against its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyReport {
    /// `max_i ‖M u_i − λ_i Q u_i‖_∞`.
    pub max_residual: f64,
    /// `‖M‖_∞`.
    pub operator_norm: f64,
    /// `max |UᵀQU − I|`.
    pub orthonormality_error: f64,
}

impl AccuracyReport {
    pub fn residual_limit(&self) -> f64 {
        RESIDUAL_REL * self.operator_norm
    }

    pub fn passes(&self) -> bool {
        self.max_residual <= self.residual_limit()
            && self.orthonormality_error <= ORTHONORMALITY_TOL
    }
}

fn ensure_symmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: a.ncols(),
        });
    }
    let asym = a.max_asymmetry();
    if asym > SYMMETRY_REL * a.max_abs().max(1.0) {
        return Err(Error::NotSymmetric {
            max_asymmetry: asym,
        });
    }
    if !a.is_finite() {
        let idx = a
            .as_slice()
            .iter()
            .position(|v| !v.is_finite())
            .unwrap_or(0);
        return Err(Error::NonFinite { index: idx });
    }
    Ok(())
}

/// Lower-triangular `G` with `G Gᵀ = a`.
pub fn cholesky_lower(a: &Matrix) -> Result<Matrix> {
    ensure_symmetric(a)?;
    cholesky_with_threshold(a, CHOLESKY_PIVOT_REL)
}

/// Cholesky with a caller-chosen pivot threshold, relative to the largest
/// diagonal entry. Only the lower triangle of `a` is read.
pub fn cholesky_with_threshold(a: &Matrix, pivot_rel: f64) -> Result<Matrix> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    let max_diag = a.diagonal().iter().fold(0.0f64, |m, v| m.max(*v));
    let floor = pivot_rel * max_diag;
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = a[(i, j)] - dot(&g.row(i)[..j], &g.row(j)[..j]);
            if i == j {
                if s.is_nan() || s <= floor || max_diag <= 0.0 {
                    return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                }
                g[(i, i)] = math::sqrt(s);
            } else {
                g[(i, j)] = s / g[(j, j)];
            }
        }
    }
    Ok(g)
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending and
/// eigenvectors orthonormal.
pub fn sym_eig(a: &Matrix) -> Result<EigenDecomposition> {
    ensure_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    // QL rotates pairs of eigenvector columns; keep them as contiguous rows.
    let mut vt = v.transpose();
    ql_implicit(&mut d, &mut e, &mut vt)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| vt[(order[c], r)]);
    Ok(EigenDecomposition { values, vectors })
}

/// Householder reduction to tridiagonal form. On return `v` holds the
/// accumulated orthogonal transform, `d` the diagonal and `e[1..]` the
/// subdiagonal.
fn tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    let mut col = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                col[k] = v[(k, i + 1)];
                d[k] = col[k] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += col[k] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal `(d, e)`. Row `i` of `vt` is the
/// eigenvector paired with `d[i]` on return.
fn ql_implicit(d: &mut [f64], e: &mut [f64], vt: &mut Matrix) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let budget = QL_ITERATIONS_PER_EIGENVALUE * n.max(1);
    let mut spent = 0usize;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            loop {
                spent += 1;
                if spent > budget {
                    return Err(Error::NoConvergence {
                        index: l,
                        iterations: spent - 1,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[(l + 2)..] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_rows(vt, i, s, c);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[inline]
fn rotate_rows(vt: &mut Matrix, i: usize, s: f64, c: f64) {
    let (lo, hi) = vt.two_rows_mut(i, i + 1);
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

/// Solves `M u = λ Q u` for symmetric `M` and symmetric positive definite
/// `Q`, returning `Q`-orthonormal eigenvectors in ascending eigenvalue order.
///
/// Fails when `Q` is not positive definite or when the computed pairs violate
/// the residual/orthonormality contract. A negative smallest eigenvalue
/// (indefinite `M`) is not an error; callers that need `M ⪰ 0` check
/// `values[0]`.
pub fn generalized_sym_eig(m: &Matrix, q: &Matrix) -> Result<EigenDecomposition> {
    ensure_symmetric(m)?;
    ensure_symmetric(q)?;
    if m.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: q.nrows(),
        });
    }
    let g = cholesky_lower(q)?;
    let dec = reduce_and_solve(m, &g)?;
    let qu = q.matmul(&dec.vectors)?;
    check_contract(m, &dec, &qu)?;
    Ok(dec)
}

/// Generalized solve from a precomputed Cholesky factor. `q_times` must
/// return `Q · U` for the eigenvector matrix `U`; it is used only for the
/// accuracy check.
pub(crate) fn generalized_sym_eig_factored(
    m: &Matrix,
    g: &Matrix,
    q_times: impl Fn(&Matrix) -> Matrix,
) -> Result<(EigenDecomposition, AccuracyReport)> {
    let dec = reduce_and_solve(m, g)?;
    let qu = q_times(&dec.vectors);
    let report = check_contract(m, &dec, &qu)?;
    Ok((dec, report))
}

fn reduce_and_solve(m: &Matrix, g: &Matrix) -> Result<EigenDecomposition> {
    let n = m.nrows();
    // Row j of `mg` = (G⁻¹ M e_j)ᵀ; together they form M G⁻ᵀ.
    let mut mg = Matrix::zeros(n, n);
    for j in 0..n {
        let row = mg.row_mut(j);
        row.copy_from_slice(m.row(j));
        forward_substitute(g, row);
    }
    // C = G⁻¹ (M G⁻ᵀ); rows of C are G⁻¹ applied to columns of M G⁻ᵀ.
    let mut c = mg.transpose();
    for j in 0..n {
        forward_substitute(g, c.row_mut(j));
    }
    // C = G⁻¹ (M G⁻ᵀ) is stored transposed; symmetrize away rounding noise.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    let std_dec = sym_eig(&c)?;
    let mut ut = std_dec.vectors.transpose();
    for i in 0..n {
        backward_substitute_transposed(g, ut.row_mut(i));
    }
    Ok(EigenDecomposition {
        values: std_dec.values,
        vectors: ut.transpose(),
    })
}

/// Measures a generalized decomposition against `M` and `Q U`.
pub fn accuracy(m: &Matrix, dec: &EigenDecomposition, qu: &Matrix) -> Result<AccuracyReport> {
    let n = m.nrows();
    let mu = m.matmul(&dec.vectors)?;
    let mut max_residual = 0.0f64;
    for k in 0..n {
        let lambda = dec.values[k];
        let mut col_max = 0.0f64;
        for i in 0..n {
            col_max = col_max.max((mu[(i, k)] - lambda * qu[(i, k)]).abs());
        }
        max_residual = max_residual.max(col_max);
    }
    let gram = dec.vectors.tr_matmul(qu)?;
    let mut orthonormality_error = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            orthonormality_error = orthonormality_error.max((gram[(i, j)] - target).abs());
        }
    }
    Ok(AccuracyReport {
        max_residual,
        operator_norm: m.norm_inf(),
        orthonormality_error,
    })
}

fn check_contract(m: &Matrix, dec: &EigenDecomposition, qu: &Matrix) -> Result<AccuracyReport> {
    let report = accuracy(m, dec, qu)?;
    let finite = dec.values.iter().all(|v| v.is_finite()) && dec.vectors.is_finite();
    if !finite || !report.passes() {
        return Err(Error::AccuracyContract {
            residual: report.max_residual,
            residual_limit: report.residual_limit(),
            orthonormality: report.orthonormality_error,
        });
    }
    Ok(report)
}
