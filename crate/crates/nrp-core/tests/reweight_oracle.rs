mod common;

use common::{nine_node_fixture, pinned_rank2_embeddings, random_undirected, rel_err};
use ndarray::{Array1, Array2};
use nrp_core::graph::Graph;
use nrp_core::ppr::{approx_ppr, EmbeddingPair};
use nrp_core::reweight::{
    naive_terms_bwd, naive_terms_fwd, objective, update_bwd_weights, Accelerators, B1Mode,
    CoordinatePass, CoordinateTerms, Direction, UpdateRule, WeightState,
};
use nrp_core::rng::seeded_rng;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random instance: undirected graph, its rank-k' factorization, and weights
/// drawn uniformly from [1/n, 2].
fn random_instance(
    n: usize,
    k_prime: usize,
    seed: u64,
) -> (Graph, EmbeddingPair<f64>, WeightState<f64>) {
    let g = random_undirected(n, 2 * n, seed);
    let emb = approx_ppr(&g, k_prime, 0.15f64, 20, 0.2, seed ^ 0xabcd).unwrap();
    let mut rng = seeded_rng(seed ^ 0x5555);
    let floor = 1.0 / n as f64;
    let fwd = Array1::from_iter((0..n).map(|_| rng.random_range(floor..2.0)));
    let bwd = Array1::from_iter((0..n).map(|_| rng.random_range(floor..2.0)));
    let w = WeightState::new(fwd, bwd, 0.0).unwrap();
    (g, emb, w)
}

fn assert_terms_close(fast: &CoordinateTerms<f64>, naive: &CoordinateTerms<f64>, ctx: &str) {
    for (name, f, n) in [
        ("a1", fast.a1, naive.a1),
        ("a2", fast.a2, naive.a2),
        ("a3", fast.a3, naive.a3),
        ("b2", fast.b2, naive.b2),
    ] {
        assert!(rel_err(f, n) < 1e-10, "{ctx} {name}: fast {f} vs naive {n}");
    }
}

#[test]
fn fast_terms_match_naive_sums() {
    for seed in 0..8u64 {
        let n = 20 + 7 * seed as usize;
        let k_prime = [2, 4, 8][seed as usize % 3];
        let (g, emb, mut w) = random_instance(n, k_prime, seed);
        let targets: Vec<usize> = vec![0, n / 2, n - 1];

        let bwd_pass =
            CoordinatePass::new(Direction::Backward, &g, &emb, &mut w).unwrap();
        for &t in &targets {
            let fast = bwd_pass.terms(t);
            let naive = naive_terms_bwd(&g, &emb, bwd_pass_weights(&bwd_pass), t).unwrap();
            assert_terms_close(&fast, &naive, &format!("bwd seed {seed} node {t}"));
        }
        drop(bwd_pass);

        let fwd_pass = CoordinatePass::new(Direction::Forward, &g, &emb, &mut w).unwrap();
        for &t in &targets {
            let fast = fwd_pass.terms(t);
            let naive = naive_terms_fwd(&g, &emb, bwd_pass_weights(&fwd_pass), t).unwrap();
            assert_terms_close(&fast, &naive, &format!("fwd seed {seed} node {t}"));
        }
    }
}

// Rebuilding the weight state for the naive oracle is awkward because the
// pass holds the mutable borrow; expose it read-only through the pass.
fn bwd_pass_weights<'a>(_pass: &'a CoordinatePass<'_, f64>) -> &'a WeightState<f64> {
    unimplemented!()
}

#[test]
fn objective_matches_independent_reimplementation() {
    let (g, emb, w) = random_instance(20, 4, 3);
    let got = objective(&g, &emb, &w).unwrap();
    // Scalar-by-scalar reimplementation over the dense score matrix.
    let n = g.n();
    let mut scores = Array2::<f64>::zeros((n, n));
    for u in 0..n {
        for v in 0..n {
            let mut dot = 0.0;
            for r in 0..emb.k_prime() {
                dot += emb.x[[u, r]] * emb.y[[v, r]];
            }
            scores[[u, v]] = w.fwd[u] * dot * w.bwd[v];
        }
    }
    let mut want = 0.0;
    for v in 0..n {
        let mut col = 0.0;
        let mut row = 0.0;
        for u in 0..n {
            if u != v {
                col += scores[[u, v]];
                row += scores[[v, u]];
            }
        }
        want += (col - g.d_in(v) as f64).powi(2) + (row - g.d_out(v) as f64).powi(2);
        want += w.lambda * (w.fwd[v].powi(2) + w.bwd[v].powi(2));
    }
    assert!(rel_err(got, want) < 1e-12, "{got} vs {want}");
}

#[test]
fn pass_equals_naive_gauss_seidel_replay() {
    let (g, emb, w0) = random_instance(30, 4, 11);
    let seed = 271828;

    let mut fast_w = w0.clone();
    update_bwd_weights(&g, &emb, &mut fast_w, seed).unwrap();

    // Replay: same permutation, naive terms recomputed from the freshest
    // weights before every single update.
    let mut replay = w0.clone();
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    for &v in &order {
        let naive = naive_terms_bwd(&g, &emb, &replay, v).unwrap();
        // The production pass approximates b1; recompute that estimate naively.
        let k = emb.k_prime();
        let mut phi = vec![0.0f64; k];
        for u in 0..n {
            for r in 0..k {
                phi[r] += replay.fwd[u].powi(2) * emb.x[[u, r]].powi(2);
            }
        }
        let mut b1_approx = 0.0;
        for r in 0..k {
            b1_approx += emb.y[[v, r]].powi(2)
                * (phi[r] - replay.fwd[v].powi(2) * emb.x[[v, r]].powi(2));
        }
        b1_approx *= k as f64 / 2.0;
        let terms = CoordinateTerms {
            b1: b1_approx,
            ..naive
        };
        replay.bwd[v] = terms.updated_weight(replay.lambda, n);
    }

    for v in 0..n {
        assert!(
            rel_err(fast_w.bwd[v], replay.bwd[v]) < 1e-10,
            "node {v}: {} vs {}",
            fast_w.bwd[v],
            replay.bwd[v]
        );
    }
}

#[test]
fn incremental_rho_matches_recomputation_after_every_update() {
    let (g, emb, mut w) = random_instance(40, 4, 21);
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(&mut seeded_rng(5));
    let mut pass = CoordinatePass::new(Direction::Backward, &g, &emb, &mut w).unwrap();
    for &v in &order {
        pass.update_node(v);
        let incremental = pass.accelerators().clone();
        let fresh = pass.recomputed_accelerators();
        for r in 0..emb.k_prime() {
            assert!(
                rel_err(incremental.rho1[r], fresh.rho1[r]) < 1e-9,
                "rho1[{r}] after node {v}"
            );
            assert!(
                rel_err(incremental.rho2[r], fresh.rho2[r]) < 1e-9,
                "rho2[{r}] after node {v}"
            );
        }
    }
}

#[test]
fn exact_descent_mode_never_increases_objective() {
    // Smoke version of the acceptance criterion: exact b1 plus the exact
    // per-coordinate gradient must descend at every single update.
    for (seed, lambda) in [(1u64, 0.0f64), (2, 10.0), (3, 0.0)] {
        let (g, emb, mut w) = random_instance(25, 4, 100 + seed);
        w.lambda = lambda;
        let mut obj = objective(&g, &emb, &w).unwrap();
        for pass_seed in 0..2u64 {
            for dir in [Direction::Backward, Direction::Forward] {
                let mut order: Vec<usize> = (0..g.n()).collect();
                order.shuffle(&mut seeded_rng(pass_seed ^ seed));
                let mut pass = CoordinatePass::new(dir, &g, &emb, &mut w)
                    .unwrap()
                    .with_b1_mode(B1Mode::Exact)
                    .with_rule(UpdateRule::ExactGradient);
                for &v in &order {
                    pass.update_node(v);
                    drop(&pass);
                    let next = objective_of(&g, &emb, &pass);
                    assert!(
                        next <= obj * (1.0 + 1e-12) + 1e-12,
                        "objective rose {obj} -> {next} (seed {seed}, lambda {lambda})"
                    );
                    obj = next;
                }
            }
        }
    }
}

fn objective_of(_g: &Graph, _emb: &EmbeddingPair<f64>, _pass: &CoordinatePass<'_, f64>) -> f64 {
    unimplemented!()
}

#[test]
fn b1_estimate_never_falls_below_half_exact() {
    // Lower side of the estimate bracket (Cauchy-Schwarz); holds universally.
    for seed in 0..10u64 {
        let n = 15 + 6 * seed as usize;
        let k_prime = [2, 4, 8][seed as usize % 3];
        let (g, emb, mut w) = random_instance(n, k_prime, 40 + seed);
        let pass = CoordinatePass::new(Direction::Backward, &g, &emb, &mut w).unwrap();
        for v in 0..n {
            let approx = pass.terms(v).b1;
            let exact = pass_exact_b1(&pass, v);
            assert!(
                approx >= exact / 2.0 - 1e-9 * exact.abs().max(1.0),
                "node {v}: approx {approx} below half of exact {exact}"
            );
        }
    }
}

fn pass_exact_b1(_pass: &CoordinatePass<'_, f64>, _v: usize) -> f64 {
    unimplemented!()
}

#[test]
fn pinned_embedding_fixture_agrees_between_fast_and_naive() {
    // Nine-node fixture with a hand-pinned rank-2 embedding pair and fixed
    // weights, exercising the exact numbers path end to end.
    let g = nine_node_fixture();
    let emb = pinned_rank2_embeddings();
    let fwd = Array1::from(vec![3.0, 3.0, 4.0, 3.0, 4.0, 2.0, 2.0, 2.0, 1.0]);
    let bwd = Array1::from_elem(9, 1.0);
    let mut w = WeightState::new(fwd, bwd, 0.0).unwrap();

    let naive = naive_terms_bwd(&g, &emb, &w, 0).unwrap();
    let pass = CoordinatePass::new(Direction::Backward, &g, &emb, &mut w).unwrap();
    let fast = pass.terms(0);
    assert_terms_close(&fast, &naive, "pinned fixture");
    assert!(rel_err(fast.b1, naive.b1) < 2.0, "b1 estimate within bracket scale");
    let updated = fast.updated_weight(0.0, 9);
    assert!(updated >= 1.0 / 9.0);
}

#[test]
fn symmetric_setup_gives_equal_forward_and_backward_terms() {
    // Undirected graph with X = Y and equal weights: the forward terms for a
    // node coincide with the backward terms.
    let g = random_undirected(12, 20, 7);
    let factors = common::exact_rank_k_factors(&g, 3);
    let emb = EmbeddingPair::new(factors.u.clone(), factors.u.clone()).unwrap();
    let w = WeightState::new(
        Array1::from_elem(12, 0.8),
        Array1::from_elem(12, 0.8),
        0.5,
    )
    .unwrap();
    for v in 0..12 {
        let b = naive_terms_bwd(&g, &emb, &w, v).unwrap();
        let f = naive_terms_fwd(&g, &emb, &w, v).unwrap();
        assert!(rel_err(b.a1, f.a1) < 1e-12);
        assert!(rel_err(b.a2, f.a2) < 1e-12);
        assert!(rel_err(b.a3, f.a3) < 1e-12);
        assert!(rel_err(b.b1, f.b1) < 1e-12);
        assert!(rel_err(b.b2, f.b2) < 1e-12);
    }
}

#[test]
fn weight_floor_is_exact_after_passes() {
    let (g, emb, mut w) = random_instance(35, 4, 77);
    w.lambda = 10.0;
    for pass in 0..3 {
        update_bwd_weights(&g, &emb, &mut w, pass).unwrap();
        nrp_core::reweight::update_fwd_weights(&g, &emb, &mut w, pass).unwrap();
    }
    let floor = 1.0 / 35.0;
    assert!(w.fwd.iter().chain(w.bwd.iter()).all(|&x| x >= floor));
}
