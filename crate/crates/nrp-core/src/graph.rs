//! Sparse directed-graph representation.
//!
//! [`Graph`] keeps the adjacency structure twice, as an out-CSR (rows of the
//! adjacency matrix `A`) and an in-CSR (columns of `A`), so that products with
//! `A`, `Aᵀ` and the transition matrix `P = D⁻¹A` all stream through memory.
//! Graphs are immutable after construction and safe to share across threads.
//!
//! Conventions: node ids are dense 0-based integers, duplicate edges are
//! removed at ingestion (`A` is 0/1), self-loops are kept as given, and a
//! dangling node (out-degree 0) has an all-zero transition row, i.e. the
//! random walk dies there.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::scalar::Scalar;

/// Directed edge list plus ingestion metadata.
///
/// `lines` carries the 1-based source line of each pair when the list came
/// from a text file, so range errors can name the offending line.
#[derive(Debug, Clone)]
pub struct EdgeList {
    /// When false, each pair (u, v) also stands for (v, u).
    pub directed: bool,
    /// Explicit node count; when absent, `max id + 1` is used.
    pub n: Option<usize>,
    edges: Vec<(usize, usize)>,
    lines: Vec<usize>,
}

impl EdgeList {
    /// Edge list from in-memory pairs; provenance lines default to 1, 2, ...
    pub fn new(directed: bool, edges: Vec<(usize, usize)>, n: Option<usize>) -> Self {
        let lines = (1..=edges.len()).collect();
        Self {
            directed,
            n,
            edges,
            lines,
        }
    }

    /// Parses the text format: one `u<whitespace>v` pair per line, blank
    /// lines and lines starting with `#` or `%` ignored.
    pub fn parse(text: &str, directed: bool, n: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let u = parse_id(it.next(), line, trimmed)?;
            let v = parse_id(it.next(), line, trimmed)?;
            if it.next().is_some() {
                return Err(Error::EdgeList {
                    line,
                    message: format!("expected `u v`, got extra fields in {trimmed:?}"),
                });
            }
            edges.push((u, v));
            lines.push(line);
        }
        Ok(Self {
            directed,
            n,
            edges,
            lines,
        })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn parse_id(tok: Option<&str>, line: usize, ctx: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::EdgeList {
        line,
        message: format!("expected `u v`, got {ctx:?}"),
    })?;
    tok.parse::<usize>().map_err(|_| Error::EdgeList {
        line,
        message: format!("invalid node id {tok:?}"),
    })
}

/// Immutable sparse directed graph in dual-CSR form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
    d_out: Vec<usize>,
    d_in: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an edge list.
    ///
    /// Undirected input contributes both directions per pair; duplicates are
    /// removed; self-loops are kept. Node count is `edges.n` when given
    /// (every id must be smaller) or `max id + 1` otherwise.
    pub fn from_edges(edges: &EdgeList) -> Result<Self> {
        if let Some(n) = edges.n {
            for (&(u, v), &line) in edges.edges.iter().zip(&edges.lines) {
                let id = if u >= n {
                    Some(u)
                } else if v >= n {
                    Some(v)
                } else {
                    None
                };
                if let Some(id) = id {
                    return Err(Error::NodeIdOutOfRange {
                        id,
                        n,
                        line: Some(line),
                    });
                }
            }
        }
        let n = edges.n.unwrap_or_else(|| {
            edges
                .edges
                .iter()
                .map(|&(u, v)| u.max(v) + 1)
                .max()
                .unwrap_or(0)
        });

        let mut arcs: Vec<(usize, usize)> = Vec::with_capacity(
            edges.edges.len() * if edges.directed { 1 } else { 2 },
        );
        for &(u, v) in &edges.edges {
            arcs.push((u, v));
            if !edges.directed && u != v {
                arcs.push((v, u));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        Ok(Self::from_sorted_arcs(n, &arcs))
    }

    fn from_sorted_arcs(n: usize, arcs: &[(usize, usize)]) -> Self {
        let m = arcs.len();
        let mut d_out = vec![0usize; n];
        let mut d_in = vec![0usize; n];
        for &(u, v) in arcs {
            d_out[u] += 1;
            d_in[v] += 1;
        }
        let out_offsets = prefix_sum(&d_out);
        let in_offsets = prefix_sum(&d_in);
        let mut out_targets = vec![0usize; m];
        let mut in_sources = vec![0usize; m];
        let mut out_fill = out_offsets.clone();
        let mut in_fill = in_offsets.clone();
        // arcs are sorted by (u, v), so per-row target lists come out sorted;
        // filling the in-CSR in the same order keeps source lists sorted too.
        for &(u, v) in arcs {
            out_targets[out_fill[u]] = v;
            out_fill[u] += 1;
            in_sources[in_fill[v]] = u;
            in_fill[v] += 1;
        }
        Self {
            n,
            m,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            d_out,
            d_in,
        }
    }

    /// Directed simple graph with exactly `m_target` distinct edges sampled
    /// uniformly without replacement; no self-loops. Deterministic per seed.
    pub fn generate_erdos_renyi(n: usize, m_target: usize, seed: u64) -> Result<Self> {
        let slots = (n as u64)
            .checked_mul(n as u64 - u64::from(n > 0))
            .ok_or_else(|| Error::InvalidParameter("node count too large".into()))?;
        if (m_target as u64) > slots {
            return Err(Error::InvalidParameter(format!(
                "m_target={m_target} exceeds n(n-1)={slots} available edge slots"
            )));
        }
        let mut rng = seeded_rng(seed);
        // Floyd's sampling: uniform m-subset of the edge-slot index space.
        let mut picked: HashSet<u64> = HashSet::with_capacity(m_target * 2);
        for j in (slots - m_target as u64)..slots {
            let t = rng.random_range(0..=j);
            if !picked.insert(t) {
                picked.insert(j);
            }
        }
        let mut arcs: Vec<(usize, usize)> = picked
            .into_iter()
            .map(|idx| {
                let u = (idx / (n as u64 - 1)) as usize;
                let r = (idx % (n as u64 - 1)) as usize;
                let v = r + usize::from(r >= u);
                (u, v)
            })
            .collect();
        arcs.sort_unstable();
        Ok(Self::from_sorted_arcs(n, &arcs))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Directed-edge count.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d_out(&self, u: usize) -> usize {
        self.d_out[u]
    }

    pub fn d_in(&self, v: usize) -> usize {
        self.d_in[v]
    }

    pub fn out_degrees(&self) -> &[usize] {
        &self.d_out
    }

    pub fn in_degrees(&self) -> &[usize] {
        &self.d_in
    }

    /// Out-neighbors of `u`, ascending.
    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_targets[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    /// In-neighbors of `v`, ascending.
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// All directed edges in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// Exports the directed edge list; re-ingesting it reproduces the graph.
    pub fn to_edge_list(&self) -> EdgeList {
        EdgeList::new(true, self.edges().collect(), Some(self.n))
    }

    /// `A·M` (or `Aᵀ·M` when `transposed`), exact over 0/1 entries.
    pub fn adjacency_multiply<F: Scalar>(
        &self,
        m: ArrayView2<'_, F>,
        transposed: bool,
    ) -> Result<Array2<F>> {
        self.check_rows(&m)?;
        let (offsets, targets) = if transposed {
            (&self.in_offsets, &self.in_sources)
        } else {
            (&self.out_offsets, &self.out_targets)
        };
        Ok(self.spread(m, offsets, targets, None))
    }

    /// `P·M` where row `i` of `P` spreads `1/d_out(i)` over out-neighbors;
    /// rows of dangling nodes are zero.
    pub fn transition_multiply<F: Scalar>(&self, m: ArrayView2<'_, F>) -> Result<Array2<F>> {
        self.check_rows(&m)?;
        let inv_deg: Vec<F> = self
            .d_out
            .iter()
            .map(|&d| {
                if d == 0 {
                    F::zero()
                } else {
                    F::one() / F::from_usize_lossy(d)
                }
            })
            .collect();
        Ok(self.spread(m, &self.out_offsets, &self.out_targets, Some(&inv_deg)))
    }

    fn check_rows<F: Scalar>(&self, m: &ArrayView2<'_, F>) -> Result<()> {
        if m.nrows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows, graph has {} nodes",
                m.nrows(),
                self.n
            )));
        }
        Ok(())
    }

    /// out[u] = scale[u] * sum of m[v] over the CSR row of u.
    fn spread<F: Scalar>(
        &self,
        m: ArrayView2<'_, F>,
        offsets: &[usize],
        targets: &[usize],
        scale: Option<&[F]>,
    ) -> Array2<F> {
        let c = m.ncols();
        let mcow = m.as_standard_layout();
        let ms = mcow.as_slice().expect("standard layout");
        let mut out = vec![F::zero(); self.n * c];
        for u in 0..self.n {
            let row = &mut out[u * c..(u + 1) * c];
            for &v in &targets[offsets[u]..offsets[u + 1]] {
                let src = &ms[v * c..(v + 1) * c];
                for (o, &s) in row.iter_mut().zip(src) {
                    *o += s;
                }
            }
            if let Some(scale) = scale {
                let f = scale[u];
                for o in row.iter_mut() {
                    *o *= f;
                }
            }
        }
        Array2::from_shape_vec((self.n, c), out).expect("shape")
    }
}

fn prefix_sum(counts: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(counts.len() + 1);
    let mut acc = 0usize;
    offsets.push(0);
    for &cnt in counts {
        acc += cnt;
        offsets.push(acc);
    }
    offsets
}
