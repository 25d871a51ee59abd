//! Randomized block-Krylov SVD of a linear operator.
//!
//! [`bksvd`] builds a Krylov basis from a Gaussian start block, projects the
//! operator onto it, and extracts a rank-`k'` factorization with a
//! `(1+epsilon)` spectral-norm guarantee at Krylov depth `O(log n / sqrt(eps))`.
//! [`dense_svd_small`] is the exact dense kernel (one-sided Jacobi) used for
//! the projected matrix and as the test oracle at small scale.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::seeded_rng;
use crate::scalar::Scalar;

/// Matrix-free access to `A·M` and `Aᵀ·M`.
///
/// Shapes are the caller's contract: `apply` takes `cols()` rows, and
/// `apply_transpose` takes `rows()` rows.
pub trait LinearOperator<F: Scalar> {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, m: ArrayView2<'_, F>) -> Array2<F>;
    fn apply_transpose(&self, m: ArrayView2<'_, F>) -> Array2<F>;
}

/// The adjacency matrix of a graph as an operator.
impl<F: Scalar> LinearOperator<F> for Graph {
    fn rows(&self) -> usize {
        self.n()
    }

    fn cols(&self) -> usize {
        self.n()
    }

    fn apply(&self, m: ArrayView2<'_, F>) -> Array2<F> {
        self.adjacency_multiply(m, false).expect("operand rows")
    }

    fn apply_transpose(&self, m: ArrayView2<'_, F>) -> Array2<F> {
        self.adjacency_multiply(m, true).expect("operand rows")
    }
}

/// A dense matrix as an operator; handy for tests and small problems.
pub struct DenseOperator<'a, F: Scalar>(pub ArrayView2<'a, F>);

impl<F: Scalar> LinearOperator<F> for DenseOperator<'_, F> {
    fn rows(&self) -> usize {
        self.0.nrows()
    }

    fn cols(&self) -> usize {
        self.0.ncols()
    }

    fn apply(&self, m: ArrayView2<'_, F>) -> Array2<F> {
        self.0.dot(&m)
    }

    fn apply_transpose(&self, m: ArrayView2<'_, F>) -> Array2<F> {
        self.0.t().dot(&m)
    }
}

/// Rank-`k'` SVD factors: `A ≈ U · diag(sigma) · Vᵀ`.
///
/// Columns of `u` and `v` are orthonormal; `sigma` is non-increasing and
/// nonnegative. The largest-magnitude entry of each `u` column is nonnegative
/// so fixed-seed runs are reproducible.
#[derive(Debug, Clone)]
pub struct SvdFactors<F: Scalar> {
    pub u: Array2<F>,
    pub sigma: Array1<F>,
    pub v: Array2<F>,
}

impl<F: Scalar> SvdFactors<F> {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Truncates to the leading `k` singular triplets.
    pub fn truncate(&self, k: usize) -> SvdFactors<F> {
        SvdFactors {
            u: self.u.slice(s![.., ..k]).to_owned(),
            sigma: self.sigma.slice(s![..k]).to_owned(),
            v: self.v.slice(s![.., ..k]).to_owned(),
        }
    }
}

/// Tunables of the Krylov iteration. The depth default follows
/// `q = max(4, ceil(depth_constant * ln(n) / sqrt(epsilon)))`.
#[derive(Debug, Clone)]
pub struct BksvdConfig {
    /// Extra columns beyond `k'` in the start block.
    pub oversampling: usize,
    /// Fixed Krylov depth; `None` selects the formula above.
    pub depth: Option<usize>,
    /// Constant `c` in the depth formula.
    pub depth_constant: f64,
}

impl Default for BksvdConfig {
    fn default() -> Self {
        Self {
            oversampling: 8,
            depth: None,
            depth_constant: 1.0,
        }
    }
}

impl BksvdConfig {
    fn resolve_depth(&self, n: usize, epsilon: f64) -> usize {
        match self.depth {
            Some(q) => q.max(1),
            None => {
                let n = n.max(2) as f64;
                let q = (self.depth_constant * n.ln() / epsilon.sqrt()).ceil() as usize;
                q.max(4)
            }
        }
    }
}

/// Randomized block-Krylov rank-`k'` SVD with default configuration.
pub fn bksvd<F: Scalar, Op: LinearOperator<F>>(
    op: &Op,
    k_prime: usize,
    epsilon: F,
    seed: u64,
) -> Result<SvdFactors<F>> {
    bksvd_with(op, k_prime, epsilon, seed, &BksvdConfig::default())
}

/// Randomized block-Krylov rank-`k'` SVD.
///
/// Deterministic for a fixed seed. With high probability over the seed the
/// residual satisfies `‖A − UΣVᵀ‖₂ ≤ (1+epsilon)·σ_{k'+1}(A)`.
pub fn bksvd_with<F: Scalar, Op: LinearOperator<F>>(
    op: &Op,
    k_prime: usize,
    epsilon: F,
    seed: u64,
    config: &BksvdConfig,
) -> Result<SvdFactors<F>> {
    let (rows, cols) = (op.rows(), op.cols());
    let min_dim = rows.min(cols);
    if k_prime == 0 || k_prime > min_dim {
        return Err(Error::InvalidParameter(format!(
            "k'={k_prime} must be in 1..={min_dim} for a {rows}x{cols} operator"
        )));
    }
    let eps = epsilon.to_f64().unwrap_or(f64::NAN);
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon={epsilon} must lie in (0, 1)"
        )));
    }

    let block = (k_prime + config.oversampling).min(rows);
    let depth = config.resolve_depth(rows.max(cols), eps);

    // Krylov basis vectors are stored as rows so each one is contiguous.
    let cap = block * (depth + 1);
    let mut basis_t = Array2::<F>::zeros((cap, rows));
    let mut width = 0usize;

    let mut rng = seeded_rng(seed);
    let mut omega = Array2::<F>::zeros((cols, block));
    for x in omega.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *x = F::from_f64_lossy(g);
    }

    let mut z = op.apply(omega.view());
    width = orthonormalize_append(&mut basis_t, width, &mut z);
    let mut last = 0..width;
    for _ in 0..depth {
        if last.is_empty() {
            break;
        }
        let prev = basis_t.slice(s![last.clone(), ..]);
        let mut z = op.apply(op.apply_transpose(prev.t()).view());
        let new_width = orthonormalize_append(&mut basis_t, width, &mut z);
        last = width..new_width;
        width = new_width;
    }

    // Project: Q2 spans range(AᵀK); S = Q2ᵀ·(AᵀK); then svd(Sᵀ) assembles the
    // factors with exactly orthonormal U and V.
    let k_view = basis_t.slice(s![..width, ..]);
    let mut h = op.apply_transpose(k_view.t());
    let mut q2_t = Array2::<F>::zeros((width, cols));
    let w2 = orthonormalize_append(&mut q2_t, 0, &mut h);
    drop(h);

    let mut s_small = Array2::<F>::zeros((w2, width));
    let chunk = 64usize.max(1);
    let mut start = 0;
    while start < width {
        let end = (start + chunk).min(width);
        let kc = basis_t.slice(s![start..end, ..]);
        let hc = op.apply_transpose(kc.t());
        let sc = q2_t.slice(s![..w2, ..]).dot(&hc);
        s_small.slice_mut(s![.., start..end]).assign(&sc);
        start = end;
    }

    // svd of Sᵀ (width x w2), width >= w2.
    let (us_t, sigma_all, vs_t) = jacobi_svd_t(s_small.t())?;

    let have = sigma_all.len().min(k_prime);
    let mut u_t = Array2::<F>::zeros((k_prime, rows));
    let mut v_t = Array2::<F>::zeros((k_prime, cols));
    let mut sigma = Array1::<F>::zeros(k_prime);
    if have > 0 {
        u_t.slice_mut(s![..have, ..])
            .assign(&us_t.slice(s![..have, ..]).dot(&basis_t.slice(s![..width, ..])));
        v_t.slice_mut(s![..have, ..])
            .assign(&vs_t.slice(s![..have, ..]).dot(&q2_t.slice(s![..w2, ..])));
        sigma.slice_mut(s![..have]).assign(&sigma_all.slice(s![..have]));
    }
    // Zero singular values get orthonormal filler columns so the factor
    // columns stay an orthonormal set.
    complete_rows(&mut u_t, have);
    complete_rows(&mut v_t, have);

    let mut u = u_t.t().to_owned();
    let mut v = v_t.t().to_owned();
    fix_signs(&mut u, &mut v);
    Ok(SvdFactors { u, sigma, v })
}

/// Exact full SVD of a small dense matrix by one-sided Jacobi rotations.
///
/// Reconstruction `U·diag(s)·Vᵀ` is accurate to ~1e-10 relative Frobenius
/// error; `s` is non-increasing. Inputs are capped at
/// [`DENSE_SVD_MAX_ELEMS`] elements; entries must be finite.
pub fn dense_svd_small<F: Scalar>(m: ArrayView2<'_, F>) -> Result<SvdFactors<F>> {
    if m.len() > DENSE_SVD_MAX_ELEMS {
        return Err(Error::OracleCapExceeded {
            what: format!("dense SVD of a {}x{} matrix", m.nrows(), m.ncols()),
            details: format!("{} > {DENSE_SVD_MAX_ELEMS} elements", m.len()),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput("dense_svd_small".into()));
    }
    let transposed = m.nrows() < m.ncols();
    let (u_t, sigma, v_t) = if transposed {
        let (v_t, sigma, u_t) = jacobi_svd_t(m.t())?;
        (u_t, sigma, v_t)
    } else {
        jacobi_svd_t(m)?
    };
    let mut u = u_t.t().to_owned();
    let mut v = v_t.t().to_owned();
    fix_signs(&mut u, &mut v);
    Ok(SvdFactors { u, sigma, v })
}

/// Element cap for [`dense_svd_small`]; testing-scale only.
pub const DENSE_SVD_MAX_ELEMS: usize = 4_000_000;

/// One-sided Jacobi SVD of `m` (r×c, r ≥ c), factors returned transposed:
/// `(Uᵀ: c×r, sigma: c, Vᵀ: c×c)` with sigma sorted non-increasing. Columns
/// for zero singular values are completed to an orthonormal set.
fn jacobi_svd_t<F: Scalar>(
    m: ArrayView2<'_, F>,
) -> Result<(Array2<F>, Array1<F>, Array2<F>)> {
    let (r, c) = (m.nrows(), m.ncols());
    debug_assert!(r >= c);
    if c == 0 {
        return Ok((
            Array2::zeros((0, r)),
            Array1::zeros(0),
            Array2::zeros((0, 0)),
        ));
    }
    // Work on columns stored contiguously: row j of `w_t` is column j of m.
    let mut w_t = m.t().as_standard_layout().to_owned();
    let mut v_t = Array2::<F>::eye(c);
    let tol = F::epsilon() * F::from_f64_lossy(4.0);
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..c.saturating_sub(1) {
            for q in p + 1..c {
                let (alpha, beta, gamma) = {
                    let rp = w_t.row(p);
                    let rq = w_t.row(q);
                    (rp.dot(&rp), rq.dot(&rq), rp.dot(&rq))
                };
                if gamma == F::zero() || alpha == F::zero() || beta == F::zero() {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (F::one() + zeta * zeta).sqrt());
                let cs = F::one() / (F::one() + t * t).sqrt();
                let sn = cs * t;
                rotate_rows(&mut w_t, p, q, cs, sn);
                rotate_rows(&mut v_t, p, q, cs, sn);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<F> = (0..c)
        .map(|j| {
            let row = w_t.row(j);
            row.dot(&row).sqrt()
        })
        .collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));

    let max_norm = norms[order[0]];
    let cutoff = max_norm * F::epsilon() * F::from_usize_lossy(r.max(c) * 16);
    let mut u_t = Array2::<F>::zeros((c, r));
    let mut v_sorted = Array2::<F>::zeros((c, c));
    let mut sigma = Array1::<F>::zeros(c);
    let mut kept = 0usize;
    for (dst, &src) in order.iter().enumerate() {
        if norms[src] <= cutoff {
            norms[src] = F::zero();
        }
        sigma[dst] = norms[src];
        v_sorted.row_mut(dst).assign(&v_t.row(src));
        if norms[src] > F::zero() {
            let inv = F::one() / norms[src];
            let row = w_t.row(src);
            for (d, &x) in u_t.row_mut(dst).iter_mut().zip(row.iter()) {
                *d = x * inv;
            }
            kept = dst + 1;
        }
    }
    complete_rows(&mut u_t, kept);
    Ok((u_t, sigma, v_sorted))
}

fn rotate_rows<F: Scalar>(m: &mut Array2<F>, p: usize, q: usize, cs: F, sn: F) {
    let cols = m.ncols();
    let flat = m.as_slice_mut().expect("standard layout");
    let (lo, hi) = flat.split_at_mut(q * cols);
    let rp = &mut lo[p * cols..(p + 1) * cols];
    let rq = &mut hi[..cols];
    for (xp, xq) in rp.iter_mut().zip(rq.iter_mut()) {
        let a = *xp;
        let b = *xq;
        *xp = cs * a - sn * b;
        *xq = sn * a + cs * b;
    }
}

/// Appends the columns of `block` to the row-stored orthonormal basis,
/// dropping columns that become numerically dependent. Returns the new width.
///
/// Two classical Gram-Schmidt passes against the existing prefix, then
/// modified Gram-Schmidt within the block.
fn orthonormalize_append<F: Scalar>(
    basis_t: &mut Array2<F>,
    width: usize,
    block: &mut Array2<F>,
) -> usize {
    let b = block.ncols();
    if b == 0 {
        return width;
    }
    let n = block.nrows();
    debug_assert_eq!(basis_t.ncols(), n);
    let orig_norms: Vec<F> = (0..b)
        .map(|j| {
            let col = block.column(j);
            col.dot(&col).sqrt()
        })
        .collect();

    if width > 0 {
        for _ in 0..2 {
            let prefix = basis_t.slice(s![..width, ..]);
            let coef = prefix.dot(block); // width x b
            let proj = prefix.t().dot(&coef); // n x b
            *block -= &proj;
        }
    }

    let drop_tol = F::epsilon().sqrt();
    let mut cur = width;
    let mut v = vec![F::zero(); n];
    for j in 0..b {
        if cur == basis_t.nrows() {
            break;
        }
        for (dst, &x) in v.iter_mut().zip(block.column(j).iter()) {
            *dst = x;
        }
        for _ in 0..2 {
            for a in width..cur {
                let row = basis_t.row(a);
                let coef = row.dot(&ArrayView1::from(&v[..]));
                for (x, &ra) in v.iter_mut().zip(row.iter()) {
                    *x = *x - coef * ra;
                }
            }
        }
        let norm = v.iter().map(|&x| x * x).sum::<F>().sqrt();
        if norm > drop_tol * orig_norms[j] && norm > F::min_positive_value().sqrt() {
            let inv = F::one() / norm;
            for (dst, &x) in basis_t.row_mut(cur).iter_mut().zip(&v) {
                *dst = x * inv;
            }
            cur += 1;
        }
    }
    cur
}

/// Fills rows `filled..` with unit vectors orthonormal to the rows above.
fn complete_rows<F: Scalar>(m_t: &mut Array2<F>, filled: usize) {
    let target = m_t.nrows();
    let dim = m_t.ncols();
    let mut cur = filled;
    let mut v = vec![F::zero(); dim];
    for i in 0..dim {
        if cur == target {
            break;
        }
        for x in v.iter_mut() {
            *x = F::zero();
        }
        v[i] = F::one();
        for _ in 0..2 {
            for a in 0..cur {
                let row = m_t.row(a);
                let coef = row.dot(&ArrayView1::from(&v[..]));
                for (x, &ra) in v.iter_mut().zip(row.iter()) {
                    *x = *x - coef * ra;
                }
            }
        }
        let norm = v.iter().map(|&x| x * x).sum::<F>().sqrt();
        if norm > F::from_f64_lossy(1e-3) {
            let inv = F::one() / norm;
            for (dst, &x) in m_t.row_mut(cur).iter_mut().zip(&v) {
                *dst = x * inv;
            }
            cur += 1;
        }
    }
    debug_assert_eq!(cur, target, "orthonormal completion ran out of directions");
}

/// Flips factor-column pairs so the largest-magnitude entry of each `u`
/// column is nonnegative.
fn fix_signs<F: Scalar>(u: &mut Array2<F>, v: &mut Array2<F>) {
    for j in 0..u.ncols().min(v.ncols()) {
        let col = u.column(j);
        let mut best = F::zero();
        let mut best_val = F::zero();
        for &x in col.iter() {
            if x.abs() > best {
                best = x.abs();
                best_val = x;
            }
        }
        if best_val < F::zero() {
            u.column_mut(j).map_inplace(|x| *x = -*x);
            v.column_mut(j).map_inplace(|x| *x = -*x);
        }
    }
}
