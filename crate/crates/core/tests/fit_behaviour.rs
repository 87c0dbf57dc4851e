use magfit_core::fit::{
    e_step, fit, forward_select, lower_bound, m_step, m_step_mu, phi_gradient, ptilde_log, theta_gradient, FitConfig,
    Mode,
};
use magfit_core::model::{sample_attributes, sample_graph};
use magfit_core::{AffinityMatrix, BinaryAttributeMatrix, DirectedGraph, MagParams, VariationalPosterior};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn planted(n: usize, seed: u64) -> (MagParams, BinaryAttributeMatrix, DirectedGraph) {
    let theta = AffinityMatrix::new([[0.6, 0.1], [0.1, 0.3]]).unwrap();
    let params = MagParams::new(vec![0.4, 0.5, 0.6], vec![theta; 3]).unwrap();
    let f = sample_attributes(&params, n, seed);
    let g = sample_graph(&f, params.thetas(), seed + 1).unwrap();
    (params, f, g)
}

fn random_posterior(seed: u64, n: usize, l: usize, lo: f64, hi: f64) -> VariationalPosterior {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VariationalPosterior::from_phi(n, l, (0..n * l).map(|_| rng.gen_range(lo..hi)).collect(), 1e-6).unwrap()
}

fn matched_params(post: &VariationalPosterior, thetas: &[AffinityMatrix]) -> MagParams {
    MagParams::new(m_step_mu(post), thetas.to_vec()).unwrap()
}

#[test]
fn same_seed_same_result() {
    let (_, _, g) = planted(60, 3);
    let config = FitConfig { em_rounds: 5, ..FitConfig::new(3) };
    assert_eq!(fit(&g, &config, None).unwrap(), fit(&g, &config, None).unwrap());
}

#[test]
fn infinite_tolerance_runs_one_round() {
    let (_, _, g) = planted(40, 5);
    let config = FitConfig { tol: f64::INFINITY, ..FitConfig::new(2) };
    let r = fit(&g, &config, None).unwrap();
    assert_eq!(r.rounds_used, 1);
    assert_eq!(r.lq_trace.len(), 1);
}

#[test]
fn pinned_columns_never_move() {
    let (_, f, g) = planted(50, 7);
    let fixed = f.select_columns(&[0, 2]).unwrap();
    let config = FitConfig { em_rounds: 5, tol: 0.0, ..FitConfig::new(3) };
    let r = fit(&g, &config, Some(&fixed)).unwrap();
    for i in 0..50 {
        for c in 0..2 {
            let expect = if fixed.get(i, c) == 1 { 1.0 - 1e-6 } else { 1e-6 };
            assert_eq!(r.posterior.phi(i, c).to_bits(), f64::to_bits(expect));
        }
    }
    assert!(r.posterior.is_fixed(0) && r.posterior.is_fixed(1) && !r.posterior.is_fixed(2));
}

#[test]
fn all_fixed_fit_reports_column_means() {
    let (_, f, g) = planted(50, 9);
    let r = fit(&g, &FitConfig { em_rounds: 3, ..FitConfig::new(3) }, Some(&f)).unwrap();
    for l in 0..3 {
        let ones = f.column(l).filter(|&b| b == 1).count() as f64;
        let mean = (ones * (1.0 - 1e-6) + (50.0 - ones) * 1e-6) / 50.0;
        assert!((r.params.mu()[l] - mean).abs() < 1e-15);
    }
}

#[test]
fn fit_rejects_bad_shapes() {
    let (_, f, g) = planted(20, 1);
    assert!(fit(&g, &FitConfig::new(2), Some(&f)).is_err());
    let other = BinaryAttributeMatrix::zeros(5, 1);
    assert!(fit(&g, &FitConfig::new(2), Some(&other)).is_err());
    let exact_big = FitConfig { mode: Mode::Exact, dense_cap: 10, ..FitConfig::new(2) };
    assert!(fit(&g, &exact_big, None).is_err());
}

#[test]
fn e_step_identities() {
    let (params, _, g) = planted(12, 11);
    let post = random_posterior(1, 12, 3, 0.2, 0.8);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let frozen = FitConfig { estep_rate: 0.0, ..FitConfig::new(3) };
    assert_eq!(e_step(&g, &post, &params, &frozen, &mut rng).unwrap(), post);
    let f = BinaryAttributeMatrix::zeros(12, 3);
    let pinned = VariationalPosterior::from_bits(&f, 1e-6).unwrap();
    assert_eq!(e_step(&g, &pinned, &params, &FitConfig::new(3), &mut rng).unwrap(), pinned);
}

#[test]
fn e_step_ascends_in_exact_mode() {
    let (params, _, g) = planted(4, 13);
    let post = random_posterior(2, 4, 3, 0.2, 0.8);
    let config = FitConfig {
        lambda: 0.0,
        batch_size: Some(12),
        estep_iters: 1,
        estep_rate: 1e-3,
        mode: Mode::Exact,
        ..FitConfig::new(3)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let next = e_step(&g, &post, &params, &config, &mut rng).unwrap();
    for i in 0..4 {
        for l in 0..3 {
            let g0 = phi_gradient(&g, &post, &params, i, l, Mode::Exact).unwrap();
            let moved = next.phi(i, l) - post.phi(i, l);
            assert!(moved * g0 > 0.0);
        }
    }
    let before = lower_bound(&g, &post, &params, Mode::Exact).unwrap();
    let after = lower_bound(&g, &next, &params, Mode::Exact).unwrap();
    assert!(after > before);
}

#[test]
fn m_step_identities() {
    let (params, _, g) = planted(8, 15);
    let post = random_posterior(3, 8, 3, 0.2, 0.8);
    let frozen = FitConfig { mstep_rate: 0.0, mode: Mode::Taylor, ..FitConfig::new(3) };
    let out = m_step(&g, &post, &params, &frozen).unwrap();
    assert_eq!(out.thetas(), params.thetas());
    assert_eq!(out.mu(), m_step_mu(&post).as_slice());

    let small = FitConfig { mstep_rate: 1e-3, mstep_iters: 1, mode: Mode::Taylor, ..FitConfig::new(3) };
    let start = matched_params(&post, params.thetas());
    let stepped = m_step(&g, &post, &start, &small).unwrap();
    let before = lower_bound(&g, &post, &start, Mode::Taylor).unwrap();
    let after = lower_bound(&g, &post, &stepped, Mode::Taylor).unwrap();
    assert!(after >= before);

    let huge = FitConfig { mstep_rate: 1e6, mstep_iters: 1, mode: Mode::Taylor, ..FitConfig::new(3) };
    let clamped = m_step(&g, &post, &start, &huge).unwrap();
    for th in clamped.thetas() {
        for v in th.entries().iter().flatten() {
            assert!(*v == 1e-6 || *v == 1.0 - 1e-6, "{v}");
        }
    }
}

fn sparse_fixture(n: usize, seed: u64) -> (DirectedGraph, VariationalPosterior, MagParams) {
    let theta = AffinityMatrix::new([[0.35, 0.1], [0.12, 0.25]]).unwrap();
    let truth = MagParams::new(vec![0.3, 0.5, 0.6], vec![theta; 3]).unwrap();
    let f = sample_attributes(&truth, n, seed);
    let g = sample_graph(&f, truth.thetas(), seed + 1).unwrap();
    let post = random_posterior(seed + 2, n, 3, 0.3, 0.7);
    let params = matched_params(&post, truth.thetas());
    (g, post, params)
}

#[test]
fn fast_bound_tracks_exact_bound() {
    for seed in 0..3 {
        let (g, post, params) = sparse_fixture(64, 20 + seed);
        let exact = lower_bound(&g, &post, &params, Mode::Exact).unwrap();
        let fast = lower_bound(&g, &post, &params, Mode::Fast).unwrap();
        assert!((fast - exact).abs() <= 0.01 * exact.abs(), "{fast} vs {exact}");
    }
}

#[test]
fn fast_theta_gradient_tracks_exact() {
    let (g, post, params) = sparse_fixture(64, 40);
    for l in 0..3 {
        let exact = theta_gradient(&g, &post, &params, l, Mode::Exact).unwrap();
        let fast = theta_gradient(&g, &post, &params, l, Mode::Fast).unwrap();
        // Edge and non-edge terms can nearly cancel in one entry, so the gap is
        // measured against the largest entry.
        let scale = exact.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in exact.iter().flatten().zip(fast.iter().flatten()) {
            assert!((a - b).abs() <= 1e-2 * scale, "{l}: {exact:?} vs {fast:?}");
        }
    }
}

#[test]
fn fast_ptilde_tracks_exact() {
    let (g, post, params) = sparse_fixture(32, 60);
    for (i, l) in [(0, 0), (5, 1), (17, 2), (31, 0)] {
        let gap = |mode| {
            ptilde_log(&g, &post, &params, i, l, 1, mode).unwrap() - ptilde_log(&g, &post, &params, i, l, 0, mode).unwrap()
        };
        let (exact, fast) = (gap(Mode::Exact), gap(Mode::Fast));
        assert!((exact - fast).abs() <= 0.05 * exact.abs().max(1.0), "({i},{l}): {exact} vs {fast}");
    }
}

#[test]
fn forward_selection_prefers_informative_column() {
    // Two dense blocks split by column 1; column 0 is noise.
    let n = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<u8>> = (0..n).map(|i| vec![rng.gen_range(0..2), u8::from(i < n / 2)]).collect();
    let cand = BinaryAttributeMatrix::from_rows(&rows).unwrap();
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && (i < n / 2) == (j < n / 2))
        .filter(|_| rng.gen::<f64>() < 0.5)
        .collect();
    let g = DirectedGraph::from_edges(n, edges).unwrap().0;
    let config = FitConfig { em_rounds: 20, ..FitConfig::new(1) };
    let single = |c: usize| {
        let fixed = cand.select_columns(&[c]).unwrap();
        fit(&g, &config, Some(&fixed)).unwrap().final_lq()
    };
    assert!(single(1) > single(0));
    let (chosen, _) = forward_select(&g, &cand, 1, &config).unwrap();
    assert_eq!(chosen, vec![1]);
    let (all, result) = forward_select(&g, &cand, 2, &config).unwrap();
    assert_eq!(all, vec![1, 0]);
    assert_eq!(result.params.n_attrs(), 2);

    let dup = cand.select_columns(&[1, 1]).unwrap();
    assert_eq!(forward_select(&g, &dup, 1, &config).unwrap().0, vec![0]);
    assert!(forward_select(&g, &cand, 0, &config).is_err());
    assert!(forward_select(&g, &cand, 3, &config).is_err());
}
