//! Weighted undirected graphs with dense storage, Gaussian-kernel KNN
//! construction, Laplacian/degree assembly and vertex partitions.
//!
//! Storage is a dense `n × n` weight table. That is the fastest layout for the
//! eigensolvers downstream and stays reasonable up to roughly 2000 vertices.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Block, Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::spectral;

/// Recommended upper bound on vertex count for dense storage.
pub const SOFT_VERTEX_LIMIT: usize = 2000;

/// Pivot threshold for the admissibility Cholesky, relative to the largest
/// diagonal entry of the block being factored.
pub const ADMISSIBILITY_PIVOT_REL: f64 = 1e-10;

/// Weighted undirected graph. Weights are symmetric, nonnegative and zero on
/// the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: Matrix,
}

impl Graph {
    /// Validates and wraps a weight table.
    pub fn from_weights(weights: Matrix) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::InvalidGraph(format!(
                "weight table is {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        let n = weights.nrows();
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "weight ({i}, {j}) = {w} is not a nonnegative finite number"
                    )));
                }
                if w != weights[(j, i)] {
                    return Err(Error::InvalidGraph(format!(
                        "weights ({i}, {j}) and ({j}, {i}) differ"
                    )));
                }
            }
        }
        Ok(Self { weights })
    }

    /// Builds a graph from undirected edges `(i, j, w)`. Repeated edges are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = Matrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    dim: n,
                });
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) has weight {w}"
                )));
            }
            if weights[(i, j)] != 0.0 {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
        Ok(Self { weights })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.weights.nrows()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Edges with `i < j` and positive weight, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.vertex_count();
        (0..n).flat_map(move |i| {
            ((i + 1)..n).filter_map(move |j| {
                let w = self.weights[(i, j)];
                (w > 0.0).then_some((i, j, w))
            })
        })
    }

    /// Neighbors of `i` (positive weight).
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .row(i)
            .iter()
            .enumerate()
            .filter_map(|(j, &w)| (w > 0.0).then_some(j))
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.vertex_count()).collect();
        induced_components(&all, |i, j| self.weights[(i, j)])
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }
}

/// Gaussian-kernel K-nearest-neighbor graph over 2-D points.
///
/// Vertex `i` selects its `k` nearest other points (ties broken by lower
/// index). The edge set is the union of all selections, and each edge gets
/// weight `exp(−d² / (2 σ_d²))`.
pub fn build_knn_graph(points: &[[f64; 2]], k: usize, sigma_d: f64) -> Result<Graph> {
    let n = points.len();
    if k == 0 {
        return Err(Error::InvalidParameter(String::from(
            "k must be at least 1",
        )));
    }
    if !(sigma_d > 0.0 && sigma_d.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kernel width must be positive, got {sigma_d}"
        )));
    }
    if n < 2 || n < k + 1 {
        return Err(Error::InsufficientPoints {
            needed: (k + 1).max(2),
            got: n,
        });
    }
    if let Some(i) = points
        .iter()
        .position(|p| !(p[0].is_finite() && p[1].is_finite()))
    {
        return Err(Error::NonFinite { index: i });
    }

    let two_sigma_sq = 2.0 * sigma_d * sigma_d;
    let mut weights = Matrix::zeros(n, n);
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        candidates.clear();
        candidates.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(points[i], points[j]), j)),
        );
        let by_distance =
            |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        candidates.select_nth_unstable_by(k - 1, by_distance);
        for &(d2, j) in &candidates[..k] {
            let w = math::exp(-d2 / two_sigma_sq);
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    Ok(Graph { weights })
}

#[inline]
pub(crate) fn squared_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Degree of every vertex, `d_i = Σ_j w_ij`.
pub fn degree_table(g: &Graph) -> Vec<f64> {
    (0..g.vertex_count())
        .map(|i| g.weights.row(i).iter().sum())
        .collect()
}

/// Combinatorial Laplacian `L = D − W`.
pub fn laplacian(g: &Graph) -> Matrix {
    let n = g.vertex_count();
    let degrees = degree_table(g);
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = -g.weights[(i, j)];
        }
        l[(i, i)] = degrees[i];
    }
    l
}

/// Entry `(p, q)` of the result is `a[rows[p]][cols[q]]`.
pub fn principal_submatrix(a: &Matrix, rows: &[usize], cols: &[usize]) -> Result<Matrix> {
    a.select(rows, cols)
}

/// The sampled vertex set `S` over `n` vertices. The complement `Sᶜ` is
/// implied.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexPartition {
    n: usize,
    sampled: Vec<usize>,
}

impl VertexPartition {
    /// Sorts the indices; rejects duplicates, out-of-range indices, and sets
    /// that are empty or cover every vertex.
    pub fn new(n: usize, mut sampled: Vec<usize>) -> Result<Self> {
        sampled.sort_unstable();
        if let Some(&last) = sampled.last() {
            if last >= n {
                return Err(Error::IndexOutOfRange {
                    index: last,
                    dim: n,
                });
            }
        }
        if let Some(w) = sampled.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition(format!(
                "vertex {} listed twice",
                w[0]
            )));
        }
        if sampled.is_empty() || sampled.len() >= n {
            return Err(Error::InvalidPartition(format!(
                "sample set must be a nonempty strict subset, got {} of {} vertices",
                sampled.len(),
                n
            )));
        }
        Ok(Self { n, sampled })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// `S`, strictly increasing.
    #[inline]
    pub fn sampled(&self) -> &[usize] {
        &self.sampled
    }

    /// `Sᶜ`, strictly increasing.
    pub fn complement(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n - self.sampled.len());
        let mut next = self.sampled.iter().peekable();
        for v in 0..self.n {
            if next.peek() == Some(&&v) {
                next.next();
            } else {
                out.push(v);
            }
        }
        out
    }

    #[inline]
    pub fn sample_size(&self) -> usize {
        self.sampled.len()
    }

    #[inline]
    pub fn complement_size(&self) -> usize {
        self.n - self.sampled.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.sampled.binary_search(&v).is_ok()
    }

    /// Membership mask, `true` on `S`.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &v in &self.sampled {
            m[v] = true;
        }
        m
    }

    /// True when `|S| ≥ |Sᶜ|`. The interpolation guarantees assume the
    /// opposite, so callers should surface this as a warning.
    pub fn exceeds_half(&self) -> bool {
        self.sample_size() >= self.complement_size()
    }
}

/// Outcome of [`check_partition_admissible`].
#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// Which block failed, if any.
    pub failed_block: Option<Block>,
    pub diagnostic: Option<String>,
}

/// Tests whether both `L_SS` and `L_ScSc` are positive definite by attempting
/// a Cholesky factorization of each. When one fails, the diagnostic names the
/// connected components of that side with no edge across the cut.
pub fn check_partition_admissible(l: &Matrix, p: &VertexPartition) -> Result<Admissibility> {
    if l.nrows() != p.vertex_count() || !l.is_square() {
        return Err(Error::DimensionMismatch {
            expected: p.vertex_count(),
            actual: l.nrows(),
        });
    }
    let sampled = p.sampled().to_vec();
    let complement = p.complement();
    for (block, idx) in [(Block::Sampled, &sampled), (Block::Complement, &complement)] {
        let sub = l.select(idx, idx)?;
        if let Err(err) = spectral::cholesky_with_threshold(&sub, ADMISSIBILITY_PIVOT_REL) {
            return Ok(Admissibility {
                admissible: false,
                failed_block: Some(block),
                diagnostic: Some(describe_singular_block(l, idx, block, &err)),
            });
        }
    }
    Ok(Admissibility {
        admissible: true,
        failed_block: None,
        diagnostic: None,
    })
}

fn describe_singular_block(l: &Matrix, idx: &[usize], block: Block, err: &Error) -> String {
    let components = induced_components(idx, |i, j| -l[(i, j)]);
    let isolated: Vec<&Vec<usize>> = components
        .iter()
        .filter(|comp| {
            // Weight leaving the component = sum of all L entries inside it.
            let mut boundary = 0.0;
            for &i in comp.iter() {
                for &j in comp.iter() {
                    boundary += l[(i, j)];
                }
            }
            let scale: f64 = comp.iter().map(|&i| l[(i, i)].abs()).sum();
            boundary <= ADMISSIBILITY_PIVOT_REL * scale.max(f64::MIN_POSITIVE)
        })
        .collect();
    match isolated.first() {
        Some(comp) => format!(
            "{block}: component {:?} has no edge to the other side ({} such component(s))",
            preview(comp),
            isolated.len()
        ),
        None => format!("{block}: numerically singular ({err})"),
    }
}

fn preview(comp: &[usize]) -> Vec<usize> {
    comp.iter().copied().take(16).collect()
}

/// Connected components of the subgraph induced on `idx`, where `weight(i, j)`
/// gives the edge weight between original vertices.
fn induced_components(idx: &[usize], weight: impl Fn(usize, usize) -> f64) -> Vec<Vec<usize>> {
    let m = idx.len();
    let mut label = vec![usize::MAX; m];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..m {
        if label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        label[start] = id;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(a) = stack.pop() {
            members.push(idx[a]);
            for b in 0..m {
                if label[b] == usize::MAX && weight(idx[a], idx[b]) > 0.0 {
                    label[b] = id;
                    stack.push(b);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}
