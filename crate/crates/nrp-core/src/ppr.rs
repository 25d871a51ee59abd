//! Personalized-PageRank factorization.
//!
//! `approx_ppr` propagates rank-`k'` SVD factors of the adjacency matrix
//! through the decayed-walk recurrence so that `X · Yᵀ` approximates the
//! truncated PPR matrix between distinct nodes. `exact_ppr` materializes the
//! truncated series directly and serves as the dense test oracle.

use ndarray::{s, Array2, ArrayView2, Axis};

use crate::bksvd::{bksvd, dense_svd_small, SvdFactors};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

/// Default truncation length of the exact oracle; for `alpha = 0.15` the
/// discarded tail mass is about 1.2e-12.
pub const DEFAULT_TRUNC_LEN: usize = 168;

/// Node cap for the dense `exact_ppr` oracle.
pub const EXACT_PPR_MAX_N: usize = 5000;

/// Forward/backward embedding matrices, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPair<F: Scalar> {
    /// Forward embeddings (`n x k'`).
    pub x: Array2<F>,
    /// Backward embeddings (`n x k'`).
    pub y: Array2<F>,
}

impl<F: Scalar> EmbeddingPair<F> {
    pub fn new(x: Array2<F>, y: Array2<F>) -> Result<Self> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch(format!(
                "forward is {:?}, backward is {:?}",
                x.dim(),
                y.dim()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k_prime(&self) -> usize {
        self.x.ncols()
    }

    /// Dense `X · Yᵀ`; test-scale helper.
    pub fn product(&self) -> Array2<F> {
        self.x.dot(&self.y.t())
    }
}

/// Dense truncated-PPR matrix together with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct PprMatrix<F: Scalar> {
    values: Array2<F>,
    pub alpha: F,
    pub trunc_len: usize,
    pub includes_self_term: bool,
}

impl<F: Scalar> PprMatrix<F> {
    pub fn get(&self, u: usize, v: usize) -> F {
        self.values[[u, v]]
    }

    pub fn row(&self, u: usize) -> ndarray::ArrayView1<'_, F> {
        self.values.row(u)
    }

    pub fn values(&self) -> ArrayView2<'_, F> {
        self.values.view()
    }
}

/// Truncated PPR sum `Σ_{i} alpha(1-alpha)^i P^i` computed by iterating the
/// transition product over identity column blocks.
///
/// With `include_self_term` the series starts at hop 0 (the `alpha·I` term);
/// without it, at hop 1. Dense test oracle, capped at [`EXACT_PPR_MAX_N`]
/// nodes.
pub fn exact_ppr<F: Scalar>(
    g: &Graph,
    alpha: F,
    trunc_len: usize,
    include_self_term: bool,
) -> Result<PprMatrix<F>> {
    check_alpha(alpha)?;
    let n = g.n();
    if n > EXACT_PPR_MAX_N {
        return Err(Error::OracleCapExceeded {
            what: format!("exact PPR on {n} nodes"),
            details: format!("{n} > {EXACT_PPR_MAX_N}"),
        });
    }
    let one_minus = F::one() - alpha;
    let mut values = Array2::<F>::zeros((n, n));
    let block = 1024usize;
    let mut start = 0;
    while start < n {
        let end = (start + block).min(n);
        let width = end - start;
        // Identity columns start..end.
        let mut power = Array2::<F>::zeros((n, width));
        for (j, col) in (start..end).enumerate() {
            power[[col, j]] = F::one();
        }
        let mut acc = Array2::<F>::zeros((n, width));
        if include_self_term {
            acc.scaled_add(alpha, &power);
        }
        let mut coef = alpha;
        for _ in 1..=trunc_len {
            coef *= one_minus;
            power = g.transition_multiply(power.view())?;
            acc.scaled_add(coef, &power);
        }
        values.slice_mut(s![.., start..end]).assign(&acc);
        start = end;
    }
    Ok(PprMatrix {
        values,
        alpha,
        trunc_len,
        includes_self_term: include_self_term,
    })
}

/// Rank-`k'` PPR factorization: randomized SVD of `A`, then `ell1` rounds of
/// the decayed propagation. Deterministic per seed.
pub fn approx_ppr<F: Scalar>(
    g: &Graph,
    k_prime: usize,
    alpha: F,
    ell1: usize,
    epsilon: F,
    seed: u64,
) -> Result<EmbeddingPair<F>> {
    let factors = bksvd(g, k_prime, epsilon, seed)?;
    approx_ppr_from_svd(g, &factors, alpha, ell1)
}

/// The propagation stage of [`approx_ppr`], reusable with externally computed
/// factors (e.g. an exact SVD in tests).
///
/// `X₁ = D⁻¹U√Σ` (dangling rows zero), `Y = V√Σ`, then
/// `X_i = (1-alpha)·P·X_{i-1} + X₁` for `i = 2..=ell1` and a final scale by
/// `alpha(1-alpha)`.
pub fn approx_ppr_from_svd<F: Scalar>(
    g: &Graph,
    factors: &SvdFactors<F>,
    alpha: F,
    ell1: usize,
) -> Result<EmbeddingPair<F>> {
    check_alpha(alpha)?;
    if ell1 == 0 {
        return Err(Error::InvalidParameter("ell1 must be at least 1".into()));
    }
    let n = g.n();
    if factors.u.nrows() != n || factors.v.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "SVD factors are for {} nodes, graph has {n}",
            factors.u.nrows()
        )));
    }
    let sqrt_sigma = factors.sigma.mapv(F::sqrt);
    let mut x1 = &factors.u * &sqrt_sigma.view().insert_axis(Axis(0));
    for (u, mut row) in x1.axis_iter_mut(Axis(0)).enumerate() {
        let d = g.d_out(u);
        if d == 0 {
            row.fill(F::zero());
        } else {
            let inv = F::one() / F::from_usize_lossy(d);
            row.map_inplace(|v| *v *= inv);
        }
    }
    let y = &factors.v * &sqrt_sigma.view().insert_axis(Axis(0));

    let one_minus = F::one() - alpha;
    let mut x = x1.clone();
    for _ in 2..=ell1 {
        let mut next = g.transition_multiply(x.view())?;
        next *= one_minus;
        next += &x1;
        x = next;
    }
    x *= alpha * one_minus;
    EmbeddingPair::new(x, y)
}

/// Materializes the 0/1 adjacency matrix; dense test helper.
pub fn dense_adjacency<F: Scalar>(g: &Graph) -> Array2<F> {
    let n = g.n();
    let mut a = Array2::<F>::zeros((n, n));
    for (u, v) in g.edges() {
        a[[u, v]] = F::one();
    }
    a
}

/// Approximation-error bounds of the factorization against full PPR, for
/// off-diagonal entries:
/// `(entrywise, row_sum) = ((1+eps)·σ_{k'+1}·(1-α)(1-(1-α)^{ℓ₁}) + (1-α)^{ℓ₁+1}, √n·… + (1-α)^{ℓ₁+1})`
/// with `σ_{k'+1}` taken from the dense SVD oracle.
pub fn theorem1_bound<F: Scalar>(
    g: &Graph,
    k_prime: usize,
    alpha: F,
    ell1: usize,
    epsilon: F,
) -> Result<(F, F)> {
    check_alpha(alpha)?;
    let n = g.n();
    let a = dense_adjacency::<F>(g);
    let factors = dense_svd_small(a.view())?;
    let sigma_next = if k_prime < factors.sigma.len() {
        factors.sigma[k_prime]
    } else {
        F::zero()
    };
    let one_minus = F::one() - alpha;
    let decay = one_minus * (F::one() - one_minus.powi(ell1 as i32));
    let tail = one_minus.powi(ell1 as i32 + 1);
    let lead = (F::one() + epsilon) * sigma_next * decay;
    let entry = lead + tail;
    let row_sum = F::from_usize_lossy(n).sqrt() * lead + tail;
    Ok((entry, row_sum))
}

fn check_alpha<F: Scalar>(alpha: F) -> Result<()> {
    if alpha <= F::zero() || alpha >= F::one() {
        return Err(Error::InvalidParameter(format!(
            "alpha={alpha} must lie in (0, 1)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeList;

    fn single_node() -> Graph {
        Graph::from_edges(&EdgeList::new(true, vec![], Some(1))).unwrap()
    }

    fn nine_node_fixture() -> Graph {
        let edges = vec![
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
        Graph::from_edges(&EdgeList::new(false, edges, None)).unwrap()
    }

    #[test]
    fn isolated_node_keeps_only_self_mass() {
        let g = single_node();
        let ppr = exact_ppr(&g, 0.15f64, 50, true).unwrap();
        assert!((ppr.get(0, 0) - 0.15).abs() < 1e-15);
        let no_self = exact_ppr(&g, 0.15f64, 50, false).unwrap();
        assert_eq!(no_self.get(0, 0), 0.0);
    }

    #[test]
    fn rows_sum_to_truncated_geometric_mass() {
        let g = nine_node_fixture();
        let trunc = 40;
        let ppr = exact_ppr(&g, 0.15f64, trunc, true).unwrap();
        let expected = 1.0 - 0.85f64.powi(trunc as i32 + 1);
        for u in 0..g.n() {
            let sum: f64 = ppr.row(u).sum();
            assert!((sum - expected).abs() < 1e-12, "row {u}: {sum}");
        }
    }

    #[test]
    fn alpha_out_of_range_rejected() {
        let g = single_node();
        assert!(exact_ppr(&g, 0.0f64, 10, true).is_err());
        assert!(exact_ppr(&g, 1.0f64, 10, true).is_err());
    }

    #[test]
    fn edgeless_graph_embeds_to_zero() {
        let g = Graph::from_edges(&EdgeList::new(true, vec![], Some(4))).unwrap();
        let emb = approx_ppr(&g, 2, 0.15f64, 20, 0.2, 9).unwrap();
        assert!(emb.x.iter().all(|&v| v == 0.0));
        assert!(emb.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_propagation_round_scales_x1() {
        let g = nine_node_fixture();
        let a = dense_adjacency::<f64>(&g);
        let factors = dense_svd_small(a.view()).unwrap().truncate(3);
        let one = approx_ppr_from_svd(&g, &factors, 0.15, 1).unwrap();
        // ell1 = 1 skips the loop entirely: X = alpha(1-alpha) X1.
        let sqrt_sigma = factors.sigma.mapv(f64::sqrt);
        let mut x1 = &factors.u * &sqrt_sigma.view().insert_axis(Axis(0));
        for (u, mut row) in x1.axis_iter_mut(Axis(0)).enumerate() {
            let inv = 1.0 / g.d_out(u) as f64;
            row.map_inplace(|v| *v *= inv);
        }
        let expect = x1.mapv(|v| v * 0.15 * 0.85);
        let diff = (&one.x - &expect).iter().map(|d| d.abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn bound_reduces_to_tail_when_rank_captured() {
        // 2-node single undirected edge: adjacency has rank 2, so sigma_3 = 0.
        let g = Graph::from_edges(&EdgeList::new(false, vec![(0, 1)], None)).unwrap();
        let (entry, row) = theorem1_bound(&g, 2, 0.15f64, 20, 0.2).unwrap();
        let tail = 0.85f64.powi(21);
        assert!((entry - tail).abs() < 1e-12);
        assert!((row - tail).abs() < 1e-12);
    }

    #[test]
    fn bound_vanishes_as_alpha_approaches_one() {
        let g = nine_node_fixture();
        let (entry, row) = theorem1_bound(&g, 2, 1.0 - 1e-6f64, 5, 0.2).unwrap();
        assert!(entry < 1e-4 && row < 1e-4, "entry={entry} row={row}");
    }

    #[test]
    fn oracle_cap_enforced() {
        let g = Graph::from_edges(&EdgeList::new(true, vec![], Some(EXACT_PPR_MAX_N + 1)))
            .unwrap();
        assert!(exact_ppr(&g, 0.15f64, 1, true).is_err());
    }
}
