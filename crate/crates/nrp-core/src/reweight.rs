//! Coordinate-descent learning of forward/backward node weights.
//!
//! The objective drives the weighted total connection strength of every node
//! toward its degrees:
//!
//! ```text
//! O = Σ_v (Σ_{u≠v} w⃗_u X_u·Y_v w⃖_v − d_in(v))²
//!   + Σ_u (Σ_{v≠u} w⃗_u X_u·Y_v w⃖_v − d_out(u))²
//!   + λ Σ_u (w⃗_u² + w⃖_u²),     subject to all weights ≥ 1/n.
//! ```
//!
//! A pass visits every node once in a seeded random order and solves each
//! weight's clamped quadratic in O(k'²) using cached aggregates (ξ, χ, ρ₁,
//! ρ₂, Λ, φ). ρ₁/ρ₂ are updated incrementally after every single weight
//! change, so updates within a pass see the freshest values of all other
//! weights. [`naive_terms_bwd`]/[`naive_terms_fwd`] are the direct-summation
//! oracles the fast path is checked against.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ppr::EmbeddingPair;
use crate::rng::seeded_rng;
use crate::scalar::Scalar;

/// Node cap for the O(n²k') naive oracles and [`objective`].
pub const NAIVE_MAX_N: usize = 2000;

/// Forward and backward weight vectors plus the regularization strength.
///
/// Every weight stays at or above `1/n` after any update pass.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightState<F: Scalar> {
    pub fwd: Array1<F>,
    pub bwd: Array1<F>,
    pub lambda: F,
}

impl<F: Scalar> WeightState<F> {
    pub fn new(fwd: Array1<F>, bwd: Array1<F>, lambda: F) -> Result<Self> {
        if fwd.len() != bwd.len() {
            return Err(Error::DimensionMismatch(format!(
                "forward weights have length {}, backward {}",
                fwd.len(),
                bwd.len()
            )));
        }
        Ok(Self { fwd, bwd, lambda })
    }

    /// Pipeline initialization: `w⃗_v = d_out(v)` floored at `1/n`, `w⃖_v = 1`.
    pub fn initial(g: &Graph, lambda: F) -> Self {
        let n = g.n();
        let floor = F::one() / F::from_usize_lossy(n.max(1));
        let fwd = Array1::from_iter(
            g.out_degrees()
                .iter()
                .map(|&d| F::from_usize_lossy(d).max(floor)),
        );
        let bwd = Array1::from_elem(n, F::one());
        Self { fwd, bwd, lambda }
    }

    pub fn n(&self) -> usize {
        self.fwd.len()
    }
}

/// Which weight vector a pass updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Updates `w⃖` from in-degree targets.
    Backward,
    /// Updates `w⃗` from out-degree targets.
    Forward,
}

/// How the diagonal-squares term b1 is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B1Mode {
    /// O(k') estimate `(k'/2)·Σ_r probe[r]²(φ[r] − own[r]²)`.
    Approximate,
    /// O(n·k') direct summation; used by descent diagnostics.
    Exact,
}

/// Which linear terms feed the per-node update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// Reuses whole-graph aggregates as-is: a1 sums over all nodes and a3's
    /// outer sum includes the visited node. O(k'²) per update.
    SharedAggregates,
    /// Additionally subtracts the visited node's own contribution from a1 and
    /// a3, making each update the exact minimizer of the objective restricted
    /// to that weight. Guarantees descent when paired with [`B1Mode::Exact`].
    ExactGradient,
}

/// Cached aggregates shared by every update in one pass.
///
/// For a backward pass: `ξ = Σ_u d_out(u)·w⃗_u·X_u`, `χ = Σ_u w⃗_u·X_u`,
/// `ρ₁ = Σ_v w⃖_v·Y_v`, `ρ₂ = Σ_v w⃗_v²·w⃖_v·(X_v·Y_v)·X_v`,
/// `Λ = Σ_u w⃗_u²·X_uᵀX_u`, `φ[r] = Σ_u w⃗_u²·X_u[r]²`. A forward pass swaps
/// the roles of X/Y, w⃗/w⃖ and d_out/d_in.
#[derive(Debug, Clone)]
pub struct Accelerators<F: Scalar> {
    pub xi: Array1<F>,
    pub chi: Array1<F>,
    pub rho1: Array1<F>,
    pub rho2: Array1<F>,
    pub lambda_mat: Array2<F>,
    pub phi: Array1<F>,
}

impl<F: Scalar> Accelerators<F> {
    /// From-scratch computation for a pass in the given direction.
    pub fn compute(
        direction: Direction,
        g: &Graph,
        emb: &EmbeddingPair<F>,
        w: &WeightState<F>,
    ) -> Self {
        let k = emb.k_prime();
        let n = emb.n();
        let mut xi = Array1::<F>::zeros(k);
        let mut chi = Array1::<F>::zeros(k);
        let mut rho1 = Array1::<F>::zeros(k);
        let mut rho2 = Array1::<F>::zeros(k);
        let mut lambda_mat = Array2::<F>::zeros((k, k));
        let mut phi = Array1::<F>::zeros(k);
        for node in 0..n {
            let x = emb.x.row(node);
            let y = emb.y.row(node);
            let pi = x.dot(&y);
            let (own, other, own_row, other_row, deg_own) = match direction {
                Direction::Backward => (
                    w.fwd[node],
                    w.bwd[node],
                    x,
                    y,
                    F::from_usize_lossy(g.d_out(node)),
                ),
                Direction::Forward => (
                    w.bwd[node],
                    w.fwd[node],
                    y,
                    x,
                    F::from_usize_lossy(g.d_in(node)),
                ),
            };
            let own_sq = own * own;
            for r in 0..k {
                let xr = own_row[r];
                xi[r] += deg_own * own * xr;
                chi[r] += own * xr;
                rho1[r] += other * other_row[r];
                rho2[r] += own_sq * other * pi * xr;
                phi[r] += own_sq * xr * xr;
                for c in 0..k {
                    lambda_mat[[r, c]] += own_sq * xr * own_row[c];
                }
            }
        }
        Self {
            xi,
            chi,
            rho1,
            rho2,
            lambda_mat,
            phi,
        }
    }
}

/// The five scalars of one coordinate update. `b1, b2 ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateTerms<F: Scalar> {
    pub a1: F,
    pub a2: F,
    pub a3: F,
    pub b1: F,
    pub b2: F,
}

impl<F: Scalar> CoordinateTerms<F> {
    /// The clamped single-coordinate minimizer `max{1/n, (a1+a2−a3)/(b1+b2+λ)}`.
    /// A zero denominator falls back to the floor.
    pub fn updated_weight(&self, lambda: F, n: usize) -> F {
        let floor = F::one() / F::from_usize_lossy(n.max(1));
        let denom = self.b1 + self.b2 + lambda;
        if denom == F::zero() {
            floor
        } else {
            ((self.a1 + self.a2 - self.a3) / denom).max(floor)
        }
    }
}

/// One in-progress sweep over the nodes, with incrementally maintained ρ₁/ρ₂.
///
/// [`CoordinatePass::run`] visits all nodes in a seeded random permutation;
/// tests drive [`CoordinatePass::update_node`] directly to interleave updates
/// with checks.
pub struct CoordinatePass<'a, F: Scalar> {
    graph: &'a Graph,
    emb: &'a EmbeddingPair<F>,
    weights: &'a mut WeightState<F>,
    accel: Accelerators<F>,
    direction: Direction,
    b1_mode: B1Mode,
    rule: UpdateRule,
}

impl<'a, F: Scalar> CoordinatePass<'a, F> {
    pub fn new(
        direction: Direction,
        g: &'a Graph,
        emb: &'a EmbeddingPair<F>,
        weights: &'a mut WeightState<F>,
    ) -> Result<Self> {
        if emb.n() != g.n() || weights.n() != g.n() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes, embeddings {}, weights {}",
                g.n(),
                emb.n(),
                weights.n()
            )));
        }
        let accel = Accelerators::compute(direction, g, emb, weights);
        Ok(Self {
            graph: g,
            emb,
            weights,
            accel,
            direction,
            b1_mode: B1Mode::Approximate,
            rule: UpdateRule::SharedAggregates,
        })
    }

    pub fn with_b1_mode(mut self, mode: B1Mode) -> Self {
        self.b1_mode = mode;
        self
    }

    pub fn with_rule(mut self, rule: UpdateRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn accelerators(&self) -> &Accelerators<F> {
        &self.accel
    }

    /// Current weights, including updates already applied by this pass.
    pub fn weights(&self) -> &WeightState<F> {
        self.weights
    }

    /// From-scratch aggregates over the current weights, for coherence checks
    /// against the incrementally maintained ones.
    pub fn recomputed_accelerators(&self) -> Accelerators<F> {
        Accelerators::compute(self.direction, self.graph, self.emb, self.weights)
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Fast per-node terms from the cached aggregates.
    pub fn terms(&self, node: usize) -> CoordinateTerms<F> {
        self.terms_with(node, self.b1_mode, self.rule)
    }

    /// Per-node terms under explicit modes, without changing the pass state.
    pub fn terms_with(&self, node: usize, b1_mode: B1Mode, rule: UpdateRule) -> CoordinateTerms<F> {
        let k = self.emb.k_prime();
        let x = self.emb.x.row(node);
        let y = self.emb.y.row(node);
        let pi = x.dot(&y);
        // "own" is the weight vector held fixed this pass; "probe" the row the
        // terms contract against (Y for backward updates, X for forward).
        let (own_w, upd_w, own_row, probe_row, deg_target, deg_own) = match self.direction {
            Direction::Backward => (
                self.weights.fwd[node],
                self.weights.bwd[node],
                x,
                y,
                F::from_usize_lossy(self.graph.d_in(node)),
                F::from_usize_lossy(self.graph.d_out(node)),
            ),
            Direction::Forward => (
                self.weights.bwd[node],
                self.weights.fwd[node],
                y,
                x,
                F::from_usize_lossy(self.graph.d_out(node)),
                F::from_usize_lossy(self.graph.d_in(node)),
            ),
        };

        let mut a1 = F::zero();
        let mut cm_dot_probe = F::zero();
        for r in 0..k {
            a1 += self.accel.xi[r] * probe_row[r];
            cm_dot_probe += (self.accel.chi[r] - own_w * own_row[r]) * probe_row[r];
        }
        let a2 = deg_target * cm_dot_probe;
        let b2 = cm_dot_probe * cm_dot_probe;

        // a3 = ρ₁Λp − upd_w·pΛp − ρ₂p + upd_w·π²·own_w²  (p = probe row)
        let mut rho1_lam_p = F::zero();
        let mut p_lam_p = F::zero();
        let mut rho2_p = F::zero();
        for r in 0..k {
            let mut lam_row_p = F::zero();
            for c in 0..k {
                lam_row_p += self.accel.lambda_mat[[r, c]] * probe_row[c];
            }
            rho1_lam_p += self.accel.rho1[r] * lam_row_p;
            p_lam_p += probe_row[r] * lam_row_p;
            rho2_p += self.accel.rho2[r] * probe_row[r];
        }
        let mut a3 = rho1_lam_p - upd_w * p_lam_p - rho2_p + upd_w * pi * pi * own_w * own_w;

        if rule == UpdateRule::ExactGradient {
            // Remove the visited node's own contribution from the shared
            // aggregates so the update minimizes O along this coordinate.
            a1 -= deg_own * own_w * pi;
            let own_dot_rho1 = (0..k).map(|r| own_row[r] * self.accel.rho1[r]).sum::<F>();
            let strength = own_w * own_dot_rho1 - own_w * pi * upd_w;
            a3 -= own_w * pi * strength;
        }

        let b1 = match b1_mode {
            B1Mode::Approximate => {
                let mut t = F::zero();
                for r in 0..k {
                    let pr = probe_row[r];
                    t += pr * pr * (self.accel.phi[r] - own_w * own_w * own_row[r] * own_row[r]);
                }
                F::from_usize_lossy(k) / (F::one() + F::one()) * t
            }
            B1Mode::Exact => {
                let mut t = F::zero();
                for u in 0..self.emb.n() {
                    if u == node {
                        continue;
                    }
                    let (w_u, row_u) = match self.direction {
                        Direction::Backward => (self.weights.fwd[u], self.emb.x.row(u)),
                        Direction::Forward => (self.weights.bwd[u], self.emb.y.row(u)),
                    };
                    let s = w_u * row_u.dot(&probe_row);
                    t += s * s;
                }
                t
            }
        };

        CoordinateTerms { a1, a2, a3, b1, b2 }
    }

    /// Updates one weight in place and refreshes ρ₁/ρ₂ incrementally.
    /// Returns the new weight.
    pub fn update_node(&mut self, node: usize) -> F {
        let terms = self.terms(node);
        let new_w = terms.updated_weight(self.weights.lambda, self.emb.n());
        let k = self.emb.k_prime();
        let x = self.emb.x.row(node);
        let y = self.emb.y.row(node);
        let pi = x.dot(&y);
        match self.direction {
            Direction::Backward => {
                let delta = new_w - self.weights.bwd[node];
                let wf = self.weights.fwd[node];
                for r in 0..k {
                    self.accel.rho1[r] += delta * y[r];
                    self.accel.rho2[r] += delta * wf * wf * pi * x[r];
                }
                self.weights.bwd[node] = new_w;
            }
            Direction::Forward => {
                let delta = new_w - self.weights.fwd[node];
                let wb = self.weights.bwd[node];
                for r in 0..k {
                    self.accel.rho1[r] += delta * x[r];
                    self.accel.rho2[r] += delta * wb * wb * pi * y[r];
                }
                self.weights.fwd[node] = new_w;
            }
        }
        new_w
    }

    /// Visits every node once in a seeded uniformly random order.
    pub fn run(mut self, seed: u64) {
        let mut order: Vec<usize> = (0..self.emb.n()).collect();
        order.shuffle(&mut seeded_rng(seed));
        for node in order {
            self.update_node(node);
        }
    }
}

/// One full backward pass: update every `w⃖` once, random order per seed.
pub fn update_bwd_weights<F: Scalar>(
    g: &Graph,
    emb: &EmbeddingPair<F>,
    weights: &mut WeightState<F>,
    seed: u64,
) -> Result<()> {
    CoordinatePass::new(Direction::Backward, g, emb, weights)?.run(seed);
    Ok(())
}

/// One full forward pass: update every `w⃗` once, random order per seed.
pub fn update_fwd_weights<F: Scalar>(
    g: &Graph,
    emb: &EmbeddingPair<F>,
    weights: &mut WeightState<F>,
    seed: u64,
) -> Result<()> {
    CoordinatePass::new(Direction::Forward, g, emb, weights)?.run(seed);
    Ok(())
}

/// The reweighting objective, by the naive O(n²k') double loop. Test scale
/// only (capped at [`NAIVE_MAX_N`] nodes).
pub fn objective<F: Scalar>(
    g: &Graph,
    emb: &EmbeddingPair<F>,
    w: &WeightState<F>,
) -> Result<F> {
    let n = check_naive_scale(g, emb, w)?;
    let mut row_strength = vec![F::zero(); n];
    let mut col_strength = vec![F::zero(); n];
    for u in 0..n {
        let x = emb.x.row(u);
        for v in 0..n {
            if u == v {
                continue;
            }
            let s = w.fwd[u] * x.dot(&emb.y.row(v)) * w.bwd[v];
            row_strength[u] += s;
            col_strength[v] += s;
        }
    }
    let mut obj = F::zero();
    for v in 0..n {
        let din = col_strength[v] - F::from_usize_lossy(g.d_in(v));
        let dout = row_strength[v] - F::from_usize_lossy(g.d_out(v));
        obj += din * din + dout * dout;
        obj += w.lambda * (w.fwd[v] * w.fwd[v] + w.bwd[v] * w.bwd[v]);
    }
    Ok(obj)
}

/// Backward-update terms by direct summation (the oracle for the fast path):
/// a1 sums over all nodes, a2/b1/b2 exclude `v*`, and a3's inner sum excludes
/// both the outer node and `v*`.
pub fn naive_terms_bwd<F: Scalar>(
    g: &Graph,
    emb: &EmbeddingPair<F>,
    w: &WeightState<F>,
    target: usize,
) -> Result<CoordinateTerms<F>> {
    let n = check_naive_scale(g, emb, w)?;
    let y_t = emb.y.row(target);
    let mut a1 = F::zero();
    let mut a2_sum = F::zero();
    let mut b1 = F::zero();
    let mut a3 = F::zero();
    for u in 0..n {
        let x_u = emb.x.row(u);
        let wf = w.fwd[u];
        let xu_yt = x_u.dot(&y_t);
        a1 += F::from_usize_lossy(g.d_out(u)) * wf * xu_yt;
        if u != target {
            a2_sum += wf * xu_yt;
            b1 += (wf * xu_yt) * (wf * xu_yt);
        }
        let mut inner = F::zero();
        for v in 0..n {
            if v == u || v == target {
                continue;
            }
            inner += x_u.dot(&emb.y.row(v)) * w.bwd[v];
        }
        a3 += wf * wf * xu_yt * inner;
    }
    let a2 = F::from_usize_lossy(g.d_in(target)) * a2_sum;
    let b2 = a2_sum * a2_sum;
    Ok(CoordinateTerms { a1, a2, a3, b1, b2 })
}

/// Forward-update terms by direct summation, mirroring [`naive_terms_bwd`]
/// with X↔Y, in/out degrees and the weight roles swapped.
pub fn naive_terms_fwd<F: Scalar>(
    g: &Graph,
    emb: &EmbeddingPair<F>,
    w: &WeightState<F>,
    target: usize,
) -> Result<CoordinateTerms<F>> {
    let n = check_naive_scale(g, emb, w)?;
    let x_t = emb.x.row(target);
    let mut a1 = F::zero();
    let mut a2_sum = F::zero();
    let mut b1 = F::zero();
    let mut a3 = F::zero();
    for v in 0..n {
        let y_v = emb.y.row(v);
        let wb = w.bwd[v];
        let xt_yv = x_t.dot(&y_v);
        a1 += F::from_usize_lossy(g.d_in(v)) * wb * xt_yv;
        if v != target {
            a2_sum += wb * xt_yv;
            b1 += (xt_yv * wb) * (xt_yv * wb);
        }
        let mut inner = F::zero();
        for u in 0..n {
            if u == v || u == target {
                continue;
            }
            inner += w.fwd[u] * emb.x.row(u).dot(&y_v);
        }
        a3 += wb * wb * xt_yv * inner;
    }
    let a2 = F::from_usize_lossy(g.d_out(target)) * a2_sum;
    let b2 = a2_sum * a2_sum;
    Ok(CoordinateTerms { a1, a2, a3, b1, b2 })
}

fn check_naive_scale<F: Scalar>(
    g: &Graph,
    emb: &EmbeddingPair<F>,
    w: &WeightState<F>,
) -> Result<usize> {
    let n = g.n();
    if emb.n() != n || w.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "graph has {n} nodes, embeddings {}, weights {}",
            emb.n(),
            w.n()
        )));
    }
    if n > NAIVE_MAX_N {
        return Err(Error::OracleCapExceeded {
            what: format!("naive reweighting sums on {n} nodes"),
            details: format!("{n} > {NAIVE_MAX_N}"),
        });
    }
    Ok(n)
}
