//! Link-prediction and graph-reconstruction harnesses.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeList, Graph};
use crate::nrp::score;
use crate::ppr::EmbeddingPair;
use crate::rng::stream_rng;
use crate::scalar::Scalar;

/// Train/test split for link prediction.
///
/// `test_pos` holds the removed edges as ordered pairs (canonical `u ≤ v` for
/// undirected input), `test_neg` an equal number of distinct non-edges of the
/// original graph.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    pub train: Graph,
    pub test_pos: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
}

/// Removes `remove_ratio` of the edges (an undirected edge is removed as a
/// unit) and samples matching negatives by rejection. Deterministic per seed.
pub fn split_edges(
    g: &Graph,
    directed: bool,
    remove_ratio: f64,
    seed: u64,
) -> Result<LinkSplit> {
    if !(0.0..=1.0).contains(&remove_ratio) {
        return Err(Error::InvalidParameter(format!(
            "remove_ratio={remove_ratio} must lie in [0, 1]"
        )));
    }
    if g.m() < 10 {
        return Err(Error::Eval(format!(
            "graph has {} edges; need at least 10 to split",
            g.m()
        )));
    }

    // Removal units: directed arcs, or canonical undirected pairs.
    let mut units: Vec<(usize, usize)> = if directed {
        g.edges().collect()
    } else {
        g.edges().filter(|&(u, v)| u <= v).collect()
    };
    let n_remove = (remove_ratio * units.len() as f64).round() as usize;
    units.shuffle(&mut stream_rng(seed, "split"));
    let (removed, kept) = units.split_at(n_remove);

    let mut test_pos = removed.to_vec();
    test_pos.sort_unstable();

    let train_list = EdgeList::new(directed, kept.to_vec(), Some(g.n()));
    let train = Graph::from_edges(&train_list)?;

    let test_neg = sample_negatives(g, directed, test_pos.len(), seed)?;
    Ok(LinkSplit {
        train,
        test_pos,
        test_neg,
    })
}

fn sample_negatives(
    g: &Graph,
    directed: bool,
    count: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let n = g.n();
    if count == 0 {
        return Ok(Vec::new());
    }
    if n < 2 {
        return Err(Error::Sampling("need at least 2 nodes for negatives".into()));
    }
    let mut rng = stream_rng(seed, "negatives");
    let mut seen = HashSet::with_capacity(count * 2);
    let mut neg = Vec::with_capacity(count);
    let max_attempts = 10_000usize.max(200 * count);
    let mut attempts = 0usize;
    while neg.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Sampling(format!(
                "could not find {count} non-edges after {max_attempts} draws \
                 (graph too close to complete?)"
            )));
        }
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let pair = if directed || u < v { (u, v) } else { (v, u) };
        if g.has_edge(pair.0, pair.1) {
            continue;
        }
        if seen.insert(pair) {
            neg.push(pair);
        }
    }
    Ok(neg)
}

/// Mann-Whitney AUC: `(#(pos>neg) + 0.5·#(pos=neg)) / (|pos|·|neg|)`.
pub fn auc<F: Scalar>(pos_scores: &[F], neg_scores: &[F]) -> Result<f64> {
    if pos_scores.is_empty() || neg_scores.is_empty() {
        return Err(Error::Eval("auc needs nonempty score sets".into()));
    }
    if pos_scores
        .iter()
        .chain(neg_scores.iter())
        .any(|s| !s.is_finite())
    {
        return Err(Error::Eval("auc scores must be finite".into()));
    }
    let mut neg: Vec<F> = neg_scores.to_vec();
    neg.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut favorable = 0.0f64;
    for &p in pos_scores {
        let below = neg.partition_point(|&x| x < p);
        let not_above = neg.partition_point(|&x| x <= p);
        favorable += below as f64 + 0.5 * (not_above - below) as f64;
    }
    Ok(favorable / (pos_scores.len() as f64 * neg_scores.len() as f64))
}

/// One metric line: name, parameter, value.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricEntry {
    pub metric: String,
    pub param: String,
    pub value: f64,
}

/// Evaluation results, serializable as `metric<TAB>param<TAB>value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub entries: Vec<MetricEntry>,
}

impl MetricReport {
    pub fn push(&mut self, metric: &str, param: impl ToString, value: f64) {
        self.entries.push(MetricEntry {
            metric: metric.to_string(),
            param: param.to_string(),
            value,
        });
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{:.9}\n", e.metric, e.param, e.value));
        }
        out
    }

    pub fn summary(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{} ({}) = {:.6}", e.metric, e.param, e.value))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Fraction of true edges among the `K` highest-scored candidate pairs, for
/// each requested `K`. Ties break by ascending pair id for determinism.
pub fn precision_at_k<F: Scalar>(
    emb: &EmbeddingPair<F>,
    g: &Graph,
    candidates: &[(usize, usize)],
    ks: &[usize],
) -> Result<MetricReport> {
    if candidates.is_empty() {
        return Err(Error::Eval("no candidate pairs".into()));
    }
    for &k in ks {
        if k == 0 || k > candidates.len() {
            return Err(Error::Eval(format!(
                "K={k} out of range for {} candidates",
                candidates.len()
            )));
        }
    }
    let mut scored: Vec<(F, usize, usize)> = Vec::with_capacity(candidates.len());
    for &(u, v) in candidates {
        scored.push((score(emb, u, v)?, u, v));
    }
    if scored.iter().any(|(s, _, _)| !s.is_finite()) {
        return Err(Error::Eval("candidate scores must be finite".into()));
    }
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut report = MetricReport::default();
    let mut ks_sorted = ks.to_vec();
    ks_sorted.sort_unstable();
    let mut hits = 0usize;
    let mut scanned = 0usize;
    for &k in &ks_sorted {
        while scanned < k {
            let (_, u, v) = scored[scanned];
            if g.has_edge(u, v) {
                hits += 1;
            }
            scanned += 1;
        }
        report.push("precision_at_k", k, hits as f64 / k as f64);
    }
    Ok(report)
}

/// Node count above which reconstruction candidates switch from all ordered
/// pairs to a seeded 1% sample.
pub const ALL_PAIRS_MAX_N: usize = 1500;

/// Candidate pairs for graph reconstruction: all ordered pairs `u != v` up to
/// [`ALL_PAIRS_MAX_N`] nodes, then a seeded 1% sample without replacement.
pub fn reconstruction_candidates(g: &Graph, seed: u64) -> Vec<(usize, usize)> {
    let n = g.n();
    if n <= ALL_PAIRS_MAX_N {
        let mut pairs = Vec::with_capacity(n.saturating_mul(n.saturating_sub(1)));
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    pairs.push((u, v));
                }
            }
        }
        return pairs;
    }
    let total = n as u64 * (n as u64 - 1);
    let want = (total as f64 * 0.01).ceil() as usize;
    let mut rng = stream_rng(seed, "candidates");
    let mut seen = HashSet::with_capacity(want * 2);
    let mut pairs = Vec::with_capacity(want);
    while pairs.len() < want {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && seen.insert((u, v)) {
            pairs.push((u, v));
        }
    }
    pairs
}
