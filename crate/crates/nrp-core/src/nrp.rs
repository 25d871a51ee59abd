//! End-to-end embedding pipeline: PPR factorization, weight learning, and the
//! final row scaling.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ppr::{approx_ppr, EmbeddingPair};
use crate::reweight::{update_bwd_weights, update_fwd_weights, WeightState};
use crate::rng::stream_seed;
use crate::scalar::Scalar;

/// Pipeline parameters. `k` is the total per-node budget, split evenly
/// between the forward and backward vectors (`k' = k/2`).
#[derive(Debug, Clone)]
pub struct NrpConfig<F: Scalar> {
    /// Total embedding dimensionality; even, at least 2.
    pub k: usize,
    /// Random-walk decay factor in (0, 1).
    pub alpha: F,
    /// Propagation rounds of the PPR factorization.
    pub ell1: usize,
    /// Weight-learning epochs (one backward + one forward pass each).
    pub ell2: usize,
    /// SVD relative-error threshold in (0, 1).
    pub epsilon: F,
    /// Weight regularization strength, nonnegative.
    pub lambda: F,
    /// Root seed; all stages draw from named sub-streams of it.
    pub seed: u64,
}

impl<F: Scalar> Default for NrpConfig<F> {
    fn default() -> Self {
        Self {
            k: 128,
            alpha: F::from_f64_lossy(0.15),
            ell1: 20,
            ell2: 10,
            epsilon: F::from_f64_lossy(0.2),
            lambda: F::from_f64_lossy(10.0),
            seed: 0,
        }
    }
}

impl<F: Scalar> NrpConfig<F> {
    pub fn k_prime(&self) -> usize {
        self.k / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.k % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "k must be even and at least 2, got {}",
                self.k
            )));
        }
        for (name, v) in [("alpha", self.alpha), ("epsilon", self.epsilon)] {
            if v <= F::zero() || v >= F::one() {
                return Err(Error::InvalidParameter(format!(
                    "{name}={v} must lie in (0, 1)"
                )));
            }
        }
        if self.lambda < F::zero() {
            return Err(Error::InvalidParameter(format!(
                "lambda={} must be nonnegative",
                self.lambda
            )));
        }
        if self.ell1 == 0 {
            return Err(Error::InvalidParameter("ell1 must be at least 1".into()));
        }
        Ok(())
    }
}

/// Output of the pipeline: the scaled embeddings plus the pieces they came
/// from (the unscaled factorization and the learned weights).
#[derive(Debug, Clone)]
pub struct NrpEmbedding<F: Scalar> {
    /// Row-scaled embeddings: `X_v = w⃗_v·base.x_v`, `Y_v = w⃖_v·base.y_v`.
    pub embedding: EmbeddingPair<F>,
    /// The factorization before reweighting.
    pub base: EmbeddingPair<F>,
    /// The learned weights.
    pub weights: WeightState<F>,
}

/// Runs the full pipeline. Deterministic for a fixed `(graph, config)`.
pub fn nrp_embed<F: Scalar>(g: &Graph, cfg: &NrpConfig<F>) -> Result<NrpEmbedding<F>> {
    cfg.validate()?;
    if g.n() == 0 {
        return Err(Error::InvalidParameter(
            "cannot embed an empty graph".into(),
        ));
    }
    let base = approx_ppr(
        g,
        cfg.k_prime(),
        cfg.alpha,
        cfg.ell1,
        cfg.epsilon,
        stream_seed(cfg.seed, "svd"),
    )?;
    let weights = WeightState::initial(g, cfg.lambda);
    finish_with_weights(g, cfg, base, weights)
}

/// Same pipeline but starting from caller-provided weights; test hook for
/// isolating the scaling step (e.g. `ell2 = 0` with unit weights).
pub fn nrp_embed_with_initial_weights<F: Scalar>(
    g: &Graph,
    cfg: &NrpConfig<F>,
    weights: WeightState<F>,
) -> Result<NrpEmbedding<F>> {
    cfg.validate()?;
    if weights.n() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "weights are for {} nodes, graph has {}",
            weights.n(),
            g.n()
        )));
    }
    let base = approx_ppr(
        g,
        cfg.k_prime(),
        cfg.alpha,
        cfg.ell1,
        cfg.epsilon,
        stream_seed(cfg.seed, "svd"),
    )?;
    finish_with_weights(g, cfg, base, weights)
}

fn finish_with_weights<F: Scalar>(
    g: &Graph,
    cfg: &NrpConfig<F>,
    base: EmbeddingPair<F>,
    mut weights: WeightState<F>,
) -> Result<NrpEmbedding<F>> {
    for epoch in 1..=cfg.ell2 {
        update_bwd_weights(
            g,
            &base,
            &mut weights,
            stream_seed(cfg.seed, &format!("bwd-pass-{epoch}")),
        )?;
        update_fwd_weights(
            g,
            &base,
            &mut weights,
            stream_seed(cfg.seed, &format!("fwd-pass-{epoch}")),
        )?;
    }
    let mut x = base.x.clone();
    let mut y = base.y.clone();
    for (u, mut row) in x.rows_mut().into_iter().enumerate() {
        let w = weights.fwd[u];
        row.map_inplace(|v| *v *= w);
    }
    for (u, mut row) in y.rows_mut().into_iter().enumerate() {
        let w = weights.bwd[u];
        row.map_inplace(|v| *v *= w);
    }
    Ok(NrpEmbedding {
        embedding: EmbeddingPair::new(x, y)?,
        base,
        weights,
    })
}

/// Connection-strength score `X_u · Y_v`.
pub fn score<F: Scalar>(emb: &EmbeddingPair<F>, u: usize, v: usize) -> Result<F> {
    let n = emb.n();
    if u >= n || v >= n {
        let id = if u >= n { u } else { v };
        return Err(Error::NodeIdOutOfRange { id, n, line: None });
    }
    Ok(emb.x.row(u).dot(&emb.y.row(v)))
}
