//! Shared fixtures and independent dense oracles for the integration tests.
//!
//! Oracles here deliberately avoid the library's sparse kernels: dense
//! matrices are built straight from edge lists and multiplied with plain
//! loops, so they can certify the CSR paths.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use nrp_core::bksvd::{dense_svd_small, SvdFactors};
use nrp_core::graph::{EdgeList, Graph};
use nrp_core::ppr::EmbeddingPair;
use nrp_core::rng::seeded_rng;
use rand::Rng;

pub const NINE_NODE_EDGES: [(usize, usize); 10] = [
    (0, 1),
    (0, 3),
    (1, 2),
    (1, 4),
    (2, 3),
    (3, 4),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 8),
];

pub fn nine_node_fixture() -> Graph {
    Graph::from_edges(&EdgeList::new(false, NINE_NODE_EDGES.to_vec(), None)).unwrap()
}

/// Hand-pinned rank-2 embedding fixture over nine nodes, paired with the
/// weight vector [3,3,4,3,4,2,2,2,1] in the coordinate-terms tests.
pub fn pinned_rank2_embeddings() -> EmbeddingPair<f64> {
    let x = ndarray::arr2(&[
        [-0.182, -0.014],
        [-0.180, 0.004],
        [-0.140, -0.002],
        [-0.180, 0.004],
        [-0.130, -0.008],
        [-0.182, 0.075],
        [-0.126, 0.072],
        [-0.092, 0.141],
        [-0.157, 0.236],
    ]);
    let y = ndarray::arr2(&[
        [-0.652, 0.243],
        [-0.668, -0.359],
        [-0.823, -0.142],
        [-0.668, -0.359],
        [-0.737, 0.547],
        [-0.314, -0.420],
        [-0.105, 0.633],
        [-0.094, -0.225],
        [-0.071, 0.818],
    ]);
    EmbeddingPair::new(x, y).unwrap()
}

/// Dense transition matrix built directly from neighbor lists.
pub fn dense_transition(g: &Graph) -> Array2<f64> {
    let n = g.n();
    let mut p = Array2::zeros((n, n));
    for u in 0..n {
        let d = g.d_out(u);
        if d == 0 {
            continue;
        }
        for &v in g.out_neighbors(u) {
            p[[u, v]] = 1.0 / d as f64;
        }
    }
    p
}

pub fn dense_adjacency(g: &Graph) -> Array2<f64> {
    let n = g.n();
    let mut a = Array2::zeros((n, n));
    for u in 0..n {
        for &v in g.out_neighbors(u) {
            a[[u, v]] = 1.0;
        }
    }
    a
}

/// Plain triple-loop matrix product, independent of ndarray's kernels.
pub fn naive_matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (r, inner) = a.dim();
    let c = b.ncols();
    assert_eq!(inner, b.nrows());
    let mut out = Array2::zeros((r, c));
    for i in 0..r {
        for k in 0..inner {
            let aik = a[[i, k]];
            if aik == 0.0 {
                continue;
            }
            for j in 0..c {
                out[[i, j]] += aik * b[[k, j]];
            }
        }
    }
    out
}

/// Exact rank-`k` SVD factors of the materialized adjacency matrix.
pub fn exact_rank_k_factors(g: &Graph, k: usize) -> SvdFactors<f64> {
    let a = dense_adjacency(g);
    dense_svd_small(a.view()).unwrap().truncate(k)
}

/// Spectral-norm estimate of `m` via power iterations on `mᵀm`.
pub fn spectral_norm_estimate(m: &Array2<f64>, iters: usize, seed: u64) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut rng = seeded_rng(seed);
    let mut v = Array1::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0)));
    let mut norm = 0.0;
    for _ in 0..iters {
        let w = m.t().dot(&m.dot(&v));
        norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
    }
    // v approximates the top right-singular vector; ||Mv|| estimates sigma_1.
    let mv = m.dot(&v);
    mv.dot(&mv).sqrt()
}

/// Largest `count` eigenvalues of a symmetric PSD matrix by power iteration
/// with deflation; independent oracle for singular-value checks.
pub fn psd_top_eigenvalues(m: &Array2<f64>, count: usize, seed: u64) -> Vec<f64> {
    let n = m.nrows();
    let mut work = m.clone();
    let mut rng = seeded_rng(seed);
    let mut eigs = Vec::with_capacity(count);
    for _ in 0..count.min(n) {
        let mut v = Array1::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0)));
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let w = work.dot(&v);
            let norm = w.dot(&w).sqrt();
            if norm < 1e-300 {
                lambda = 0.0;
                break;
            }
            v = w / norm;
            lambda = v.dot(&work.dot(&v));
        }
        eigs.push(lambda.max(0.0));
        // Deflate: work -= lambda v vᵀ
        for i in 0..n {
            for j in 0..n {
                work[[i, j]] -= lambda * v[i] * v[j];
            }
        }
    }
    eigs
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(1e-30)
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Random undirected connected-ish test graph.
pub fn random_undirected(n: usize, extra_edges: usize, seed: u64) -> Graph {
    let mut rng = seeded_rng(seed);
    let mut edges: Vec<(usize, usize)> = (1..n)
        .map(|v| (rng.random_range(0..v), v))
        .collect();
    for _ in 0..extra_edges {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    Graph::from_edges(&EdgeList::new(false, edges, Some(n))).unwrap()
}
