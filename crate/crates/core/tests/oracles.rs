//! Checks against independent reference computations that share no code
//! path with the solvers under test.

#![allow(clippy::needless_range_loop)]

use foldgft_core::gft::SpectralFoldingGft;
use foldgft_core::graph::{
    build_knn_graph, check_partition_admissible, laplacian, principal_submatrix, Graph,
    VertexPartition,
};
use foldgft_core::interp::{
    brute_force_oracle, interpolate_bl_ls, interpolate_sf, SampleWeight, SampledSignal,
};
use foldgft_core::linalg::Matrix;
use foldgft_core::sensor::{
    grid_sample_indices, place_sensors, sample_random, sample_uniform_grid,
};
use foldgft_core::spectral::{cholesky_lower, generalized_sym_eig, sym_eig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_symmetric(n: usize, rng: &mut ChaCha20Rng) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.random::<f64>() * 2.0 - 1.0;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

fn random_spd(n: usize, rng: &mut ChaCha20Rng) -> Matrix {
    let b = random_symmetric(n, rng);
    let mut q = b.tr_matmul(&b).unwrap();
    for i in 0..n {
        q[(i, i)] += 0.5;
    }
    q
}

/// Number of eigenvalues of the pencil `(a, b)` below `x`: by Sylvester's
/// law of inertia, the count of negative pivots in an LDLᵀ of `a − x b`.
fn count_below(a: &Matrix, b: Option<&Matrix>, x: f64) -> usize {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a[(i, j)] - x * b.map_or(if i == j { 1.0 } else { 0.0 }, |b| b[(i, j)]))
                .collect()
        })
        .collect();
    let mut negatives = 0;
    for k in 0..n {
        let mut p = m[k][k];
        if p == 0.0 {
            p = -1e-300;
        }
        if p < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / p;
            for j in k + 1..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negatives
}

fn bisection_eigenvalues(a: &Matrix, b: Option<&Matrix>, lo: f64, hi: f64) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if count_below(a, b, mid) > i {
                    h = mid;
                } else {
                    l = mid;
                }
            }
            0.5 * (l + h)
        })
        .collect()
}

#[test]
fn sym_eig_matches_inertia_bisection() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for n in [1, 2, 6, 6, 6, 13] {
        let a = random_symmetric(n, &mut rng);
        let bound = a.norm_inf() + 1.0;
        let want = bisection_eigenvalues(&a, None, -bound, bound);
        let got = sym_eig(&a).unwrap();
        for (g, w) in got.values.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-10 * bound, "n={n}: {g} vs {w}");
        }
    }
}

#[test]
fn generalized_eig_matches_pencil_inertia() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    for n in [2, 4, 4, 4, 9] {
        let m = random_symmetric(n, &mut rng);
        let q = random_spd(n, &mut rng);
        // |λ| ≤ ‖m‖ / λ_min(q) and λ_min(q) ≥ 0.5 by construction.
        let bound = 2.0 * m.norm_inf() + 1.0;
        let want = bisection_eigenvalues(&m, Some(&q), -bound, bound);
        let got = generalized_sym_eig(&m, &q).unwrap();
        for (g, w) in got.values.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-10 * bound, "n={n}: {g} vs {w}");
        }
    }
}

#[test]
fn generalized_decomposition_reassembles_operator() {
    // M = Q U Λ Uᵀ Q for a Q-orthonormal U.
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    for n in [3, 8, 20] {
        let m = random_symmetric(n, &mut rng);
        let q = random_spd(n, &mut rng);
        let dec = generalized_sym_eig(&m, &q).unwrap();
        let qu = q.matmul(&dec.vectors).unwrap();
        let scaled = Matrix::from_fn(n, n, |i, j| qu[(i, j)] * dec.values[j]);
        let rebuilt = scaled.matmul(&qu.transpose()).unwrap();
        let err = rebuilt.sub(&m).unwrap().norm_inf();
        assert!(err <= 1e-7 * m.norm_inf(), "n={n}: {err}");
    }
}

fn brute_force_knn(points: &[[f64; 2]], k: usize, sigma_d: f64) -> Vec<Vec<f64>> {
    let n = points.len();
    let d2 = |i: usize, j: usize| {
        let dx = points[i][0] - points[j][0];
        let dy = points[i][1] - points[j][1];
        dx * dx + dy * dy
    };
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| d2(i, a).partial_cmp(&d2(i, b)).unwrap().then(a.cmp(&b)));
        for &j in &others[..k] {
            let v = (-d2(i, j) / (2.0 * sigma_d * sigma_d)).exp();
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    w
}

#[test]
fn knn_graph_matches_all_pairs_reference() {
    for (n, k, seed) in [(30, 3, 1), (120, 8, 2), (200, 8, 3), (200, 1, 4)] {
        let field = place_sensors(n, seed).unwrap();
        let g = build_knn_graph(field.positions(), k, 0.3).unwrap();
        let want = brute_force_knn(field.positions(), k, 0.3);
        for i in 0..n {
            for j in 0..n {
                let got = g.weight(i, j);
                assert!(
                    (got - want[i][j]).abs() <= 1e-15,
                    "n={n} edge ({i},{j}): {got} vs {}",
                    want[i][j]
                );
            }
        }
    }
}

#[test]
fn knn_graph_on_500_sensors_has_expected_degrees() {
    let field = place_sensors(500, 5).unwrap();
    let g = build_knn_graph(field.positions(), 8, 0.3).unwrap();
    let want = brute_force_knn(field.positions(), 8, 0.3);
    for i in 0..500 {
        let deg = g.neighbors(i).count();
        let ref_deg = want[i].iter().filter(|&&v| v > 0.0).count();
        assert_eq!(deg, ref_deg);
        assert!((8..500).contains(&deg));
        for j in 0..500 {
            assert_eq!(g.weight(i, j), g.weight(j, i));
        }
    }
}

#[test]
fn large_random_partition_is_admissible_and_blocks_factor() {
    let field = place_sensors(500, 6).unwrap();
    let g = build_knn_graph(field.positions(), 8, 0.3).unwrap();
    let l = laplacian(&g);
    let p = sample_random(500, 100, 7).unwrap();
    assert!(check_partition_admissible(&l, &p).unwrap().admissible);
    let sc = p.complement();
    assert!(cholesky_lower(&principal_submatrix(&l, p.sampled(), p.sampled()).unwrap()).is_ok());
    assert!(cholesky_lower(&principal_submatrix(&l, &sc, &sc).unwrap()).is_ok());
}

fn nearest_center_reference(points: &[[f64; 2]], m: usize) -> Vec<usize> {
    let g = (m as f64).sqrt().round() as usize;
    let mut out = Vec::new();
    for cx in 0..g {
        for cy in 0..g {
            let c = [(cx as f64 + 0.5) / g as f64, (cy as f64 + 0.5) / g as f64];
            let best = (0..points.len())
                .min_by(|&a, &b| {
                    let da = (points[a][0] - c[0]).powi(2) + (points[a][1] - c[1]).powi(2);
                    let db = (points[b][0] - c[0]).powi(2) + (points[b][1] - c[1]).powi(2);
                    da.partial_cmp(&db).unwrap().then(a.cmp(&b))
                })
                .unwrap();
            out.push(best);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[test]
fn uniform_grid_matches_nearest_center_reference() {
    let mut sizes = Vec::new();
    for seed in 0..20 {
        let field = place_sensors(500, 100 + seed).unwrap();
        let p = sample_uniform_grid(&field, 100).unwrap();
        assert_eq!(
            p.sampled(),
            nearest_center_reference(field.positions(), 100)
        );
        sizes.push(p.sample_size());
    }
    assert!(sizes.iter().all(|&s| (95..=100).contains(&s)), "{sizes:?}");
    let field = place_sensors(50, 1).unwrap();
    assert_eq!(
        grid_sample_indices(field.positions(), 10),
        nearest_center_reference(field.positions(), 10)
    );
}

#[test]
fn unit_triangle_with_one_sample_extends_constant() {
    // Spectrum {0, 1, 2}; the only bandlimited direction is the constant
    // (1,1,1)/2, so the sample value is copied to both other vertices.
    let g = Graph::from_edges(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
    let p = VertexPartition::new(3, vec![0]).unwrap();
    let gft = SpectralFoldingGft::build(&g, &p).unwrap();
    let want = [0.0, 1.0, 2.0];
    for (a, b) in gft.eigenvalues().iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(gft.bandwidth(), 1);
    let u0 = gft.basis_vector(0);
    for v in &u0 {
        assert!((v.abs() - 0.5).abs() < 1e-12);
    }
    let xs = SampledSignal::new(p, vec![-0.7]).unwrap();
    for y in [
        interpolate_sf(&gft, &xs).unwrap(),
        brute_force_oracle(&gft, &xs).unwrap().signal,
    ] {
        for v in y {
            assert!((v + 0.7).abs() < 1e-12);
        }
    }
}

/// Symmetric square root of an SPD matrix through its eigendecomposition.
fn spd_sqrt_and_inverse(q: &Matrix) -> (Matrix, Matrix) {
    let dec = sym_eig(q).unwrap();
    let n = q.nrows();
    let build = |f: &dyn Fn(f64) -> f64| {
        let scaled = Matrix::from_fn(n, n, |i, j| dec.vectors[(i, j)] * f(dec.values[j]));
        scaled.matmul(&dec.vectors.transpose()).unwrap()
    };
    (build(&|v| v.sqrt()), build(&|v| 1.0 / v.sqrt()))
}

#[test]
fn closed_form_matches_independent_normal_equations() {
    // The bandlimited subspace is rebuilt from Q^{-1/2} L Q^{-1/2} (symmetric
    // square root, not Cholesky), then the sample misfit in the Q_S norm is
    // minimized through the normal equations.
    let mut checked = 0;
    for seed in 0..40u64 {
        let n = 6 + (seed % 7) as usize;
        let field = place_sensors(n, 500 + seed).unwrap();
        let g = build_knn_graph(field.positions(), 3, 0.3).unwrap();
        let l = laplacian(&g);
        let p = sample_random(n, 1 + (seed as usize % (n / 2)), 900 + seed).unwrap();
        if !check_partition_admissible(&l, &p).unwrap().admissible {
            continue;
        }
        let s = p.sampled().to_vec();
        let sc = p.complement();
        let mut q = Matrix::zeros(n, n);
        for block in [&s, &sc] {
            for &i in block.iter() {
                for &j in block.iter() {
                    q[(i, j)] = l[(i, j)];
                }
            }
        }
        let (_, q_inv_half) = spd_sqrt_and_inverse(&q);
        let c = q_inv_half.matmul(&l).unwrap().matmul(&q_inv_half).unwrap();
        let dec = sym_eig(&c).unwrap();
        let r = dec.values.iter().filter(|&&v| v < 1.0 - 1e-8).count();
        let basis = q_inv_half.matmul(&dec.vectors.leading_columns(r)).unwrap();

        let q_s = principal_submatrix(&q, &s, &s).unwrap();
        let b_s = principal_submatrix(&basis, &s, &(0..r).collect::<Vec<_>>()).unwrap();
        let normal = b_s.tr_matmul(&q_s.matmul(&b_s).unwrap()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x_s: Vec<f64> = (0..s.len())
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let rhs = b_s.tr_mul_vec(&q_s.mul_vec(&x_s).unwrap()).unwrap();
        let coeffs = foldgft_core::linalg::lstsq(&normal, &rhs, 1e-12).unwrap();
        let want = basis.mul_vec(&coeffs).unwrap();

        let gft = SpectralFoldingGft::build(&g, &p).unwrap();
        assert_eq!(gft.bandwidth(), r);
        let got = interpolate_sf(&gft, &SampledSignal::new(p.clone(), x_s).unwrap()).unwrap();
        let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-6 * scale, "seed {seed}: {a} vs {b}");
        }
        checked += 1;
    }
    assert!(checked >= 25, "only {checked} admissible instances");
}

#[test]
fn baselines_recover_signals_in_their_own_band() {
    let field = place_sensors(60, 8).unwrap();
    let g = build_knn_graph(field.positions(), 6, 0.3).unwrap();
    let l = laplacian(&g);
    let d = foldgft_core::graph::degree_table(&g);
    let p = sample_random(60, 20, 9).unwrap();
    let bases = [
        (sym_eig(&l).unwrap(), SampleWeight::Identity),
        (
            generalized_sym_eig(&l, &Matrix::from_diagonal(&d)).unwrap(),
            SampleWeight::Diagonal(d.clone()),
        ),
    ];
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    for (basis, weight) in &bases {
        let k = 8;
        let coeffs: Vec<f64> = (0..k).map(|_| rng.random::<f64>() - 0.5).collect();
        let x = basis.vectors.leading_columns(k).mul_vec(&coeffs).unwrap();
        let xs = SampledSignal::from_full(p.clone(), &x).unwrap();
        let y = interpolate_bl_ls(basis, weight, &p, &xs, k).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}
