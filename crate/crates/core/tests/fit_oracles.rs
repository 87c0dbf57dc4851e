use magfit_core::fit::{
    lower_bound, m_step_mu, mi_gradient, mi_pair, phi_gradient, ptilde_log, theta_gradient, Mode,
};
use magfit_core::model::joint_log_likelihood;
use magfit_core::{AffinityMatrix, BinaryAttributeMatrix, DirectedGraph, MagParams, VariationalPosterior};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    graph: DirectedGraph,
    post: VariationalPosterior,
    params: MagParams,
}

fn random_instance(seed: u64, n: usize, l: usize, density: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .filter(|_| rng.gen::<f64>() < density)
        .collect();
    let graph = DirectedGraph::from_edges(n, edges).unwrap().0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    let phi = (0..n * l).map(|_| rng.gen_range(0.05..0.95)).collect();
    let post = VariationalPosterior::from_phi(n, l, phi, 1e-6).unwrap();
    let mu = (0..l).map(|_| rng.gen_range(0.2..0.8)).collect();
    let thetas = (0..l)
        .map(|_| {
            AffinityMatrix::new([
                [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)],
                [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)],
            ])
            .unwrap()
        })
        .collect();
    Instance {
        graph,
        post,
        params: MagParams::new(mu, thetas).unwrap(),
    }
}

fn rows_of(state: usize, n: usize, l: usize) -> BinaryAttributeMatrix {
    let rows: Vec<Vec<u8>> = (0..n)
        .map(|i| (0..l).map(|k| ((state >> (i * l + k)) & 1) as u8).collect())
        .collect();
    BinaryAttributeMatrix::from_rows(&rows).unwrap()
}

// Returns (sum_F Q(F)[log P(A,F) - log Q(F)], log sum_F P(A,F)).
fn enumerate(inst: &Instance) -> (f64, f64) {
    let (n, l) = (inst.post.n_nodes(), inst.post.n_attrs());
    let mut bound = 0.0;
    let mut logs = Vec::new();
    for state in 0..1usize << (n * l) {
        let f = rows_of(state, n, l);
        let lp = joint_log_likelihood(&inst.graph, &f, &inst.params).unwrap();
        let lq: f64 = (0..n)
            .flat_map(|i| (0..l).map(move |k| (i, k)))
            .map(|(i, k)| {
                let p = inst.post.phi(i, k);
                if f.get(i, k) == 1 { p.ln() } else { (1.0 - p).ln() }
            })
            .sum();
        bound += lq.exp() * (lp - lq);
        logs.push(lp);
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let marginal = top + logs.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
    (bound, marginal)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

#[test]
fn exact_bound_matches_enumeration() {
    for (seed, n, l) in [(1, 3, 2), (2, 4, 2), (3, 2, 3), (4, 4, 4), (5, 8, 2)] {
        let inst = random_instance(seed, n, l, 0.4);
        let (oracle, marginal) = enumerate(&inst);
        let lq = lower_bound(&inst.graph, &inst.post, &inst.params, Mode::Exact).unwrap();
        assert!((lq - oracle).abs() <= 1e-9, "seed {seed}: {lq} vs {oracle}");
        assert!(lq <= marginal + 1e-12);
    }
}

#[test]
fn degenerate_posterior_reduces_to_joint_likelihood() {
    let inst = random_instance(7, 5, 3, 0.3);
    let f = rows_of(0b101_110_011_000_111, 5, 3);
    let post = VariationalPosterior::from_bits(&f, 1e-12).unwrap();
    let lq = lower_bound(&inst.graph, &post, &inst.params, Mode::Exact).unwrap();
    let joint = joint_log_likelihood(&inst.graph, &f, &inst.params).unwrap();
    assert!((lq - joint).abs() < 1e-8, "{lq} vs {joint}");
}

// Enumerates F_{-il} with F_il pinned to v; returns E[log P(A | F)] + log P(F_il = v).
fn ptilde_oracle(inst: &Instance, i: usize, l: usize, v: u8) -> f64 {
    let (n, k) = (inst.post.n_nodes(), inst.post.n_attrs());
    let mut total = 0.0;
    for state in 0..1usize << (n * k) {
        if ((state >> (i * k + l)) & 1) as u8 != v {
            continue;
        }
        let f = rows_of(state, n, k);
        let mut w = 1.0;
        for a in 0..n {
            for b in 0..k {
                if (a, b) != (i, l) {
                    let p = inst.post.phi(a, b);
                    w *= if f.get(a, b) == 1 { p } else { 1.0 - p };
                }
            }
        }
        let graph_ll = magfit_core::model::graph_log_likelihood_given_attrs(&inst.graph, &f, inst.params.thetas()).unwrap();
        total += w * graph_ll;
    }
    let mu = inst.params.mu()[l];
    total + if v == 1 { mu.ln() } else { (1.0 - mu).ln() }
}

#[test]
fn exact_ptilde_matches_enumeration_up_to_constant() {
    let inst = random_instance(11, 3, 2, 0.5);
    for (i, l) in [(0, 0), (1, 1), (2, 0)] {
        let ours: Vec<f64> = (0..2)
            .map(|v| ptilde_log(&inst.graph, &inst.post, &inst.params, i, l, v, Mode::Exact).unwrap())
            .collect();
        let oracle: Vec<f64> = (0..2).map(|v| ptilde_oracle(&inst, i, l, v)).collect();
        // Pairs not touching node i contribute the same constant to both values.
        let gap = (ours[1] - ours[0]) - (oracle[1] - oracle[0]);
        assert!(gap.abs() < 1e-10, "({i},{l}): {gap}");
    }
}

#[test]
fn constant_theta_ptilde_differs_by_prior_only() {
    let graph = DirectedGraph::from_edges(2, [(0, 1)]).unwrap().0;
    let post = VariationalPosterior::uniform(2, 1, 0.5, 1e-6).unwrap();
    let params = MagParams::new(vec![0.3], vec![AffinityMatrix::constant(0.4).unwrap()]).unwrap();
    for mode in [Mode::Exact, Mode::Taylor, Mode::Fast] {
        let p0 = ptilde_log(&graph, &post, &params, 0, 0, 0, mode).unwrap();
        let p1 = ptilde_log(&graph, &post, &params, 0, 0, 1, mode).unwrap();
        assert!(((p1 - p0) - (0.3f64.ln() - 0.7f64.ln())).abs() < 1e-12);
    }
}

fn bound_with_phi(inst: &Instance, i: usize, l: usize, value: f64, mode: Mode) -> f64 {
    let mut post = inst.post.clone();
    post.set_phi(i, l, value).unwrap();
    lower_bound(&inst.graph, &post, &inst.params, mode).unwrap()
}

#[test]
fn phi_gradient_matches_finite_differences() {
    let h = 1e-5;
    for seed in 0..20u64 {
        let n = 3 + (seed as usize % 6);
        let l = 1 + (seed as usize % 3);
        let inst = random_instance(100 + seed, n, l, 0.3);
        for mode in [Mode::Exact, Mode::Taylor] {
            let (i, k) = (seed as usize % n, seed as usize % l);
            let phi = inst.post.phi(i, k);
            let fd = (bound_with_phi(&inst, i, k, phi + h, mode) - bound_with_phi(&inst, i, k, phi - h, mode)) / (2.0 * h);
            let g = phi_gradient(&inst.graph, &inst.post, &inst.params, i, k, mode).unwrap();
            assert!(rel_err(g, fd) <= 1e-4, "seed {seed} {mode:?}: {g} vs {fd}");
        }
    }
}

#[test]
fn phi_gradient_vanishes_at_stationary_point() {
    let inst = random_instance(42, 5, 2, 0.3);
    let (i, l) = (2, 1);
    let p0 = ptilde_log(&inst.graph, &inst.post, &inst.params, i, l, 0, Mode::Taylor).unwrap();
    let p1 = ptilde_log(&inst.graph, &inst.post, &inst.params, i, l, 1, Mode::Taylor).unwrap();
    let star = 1.0 / (1.0 + (p0 - p1).exp());
    let mut post = inst.post.clone();
    post.set_phi(i, l, star).unwrap();
    let g = phi_gradient(&inst.graph, &post, &inst.params, i, l, Mode::Taylor).unwrap();
    assert!(g.abs() < 1e-9, "{g}");
}

#[test]
fn fixed_attribute_gradient_is_a_contract_error() {
    let f = BinaryAttributeMatrix::from_rows(&[vec![1], vec![0]]).unwrap();
    let post = VariationalPosterior::from_bits(&f, 1e-6).unwrap();
    let graph = DirectedGraph::empty(2);
    let params = MagParams::new(vec![0.5], vec![AffinityMatrix::constant(0.5).unwrap()]).unwrap();
    assert!(phi_gradient(&graph, &post, &params, 0, 0, Mode::Fast).is_err());
    assert!(mi_gradient(&post, 0, 0).is_err());
}

fn with_theta(params: &MagParams, l: usize, z: (usize, usize), delta: f64) -> MagParams {
    let mut thetas = params.thetas().to_vec();
    let mut e = thetas[l].entries();
    e[z.0][z.1] += delta;
    thetas[l] = AffinityMatrix::new(e).unwrap();
    MagParams::new(params.mu().to_vec(), thetas).unwrap()
}

#[test]
fn theta_gradient_matches_finite_differences() {
    let h = 1e-5;
    for seed in 0..20u64 {
        let n = 3 + (seed as usize % 6);
        let l = 1 + (seed as usize % 3);
        let inst = random_instance(200 + seed, n, l, 0.3);
        for mode in [Mode::Exact, Mode::Taylor, Mode::Fast] {
            let k = seed as usize % l;
            let g = theta_gradient(&inst.graph, &inst.post, &inst.params, k, mode).unwrap();
            for z in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let up = lower_bound(&inst.graph, &inst.post, &with_theta(&inst.params, k, z, h), mode).unwrap();
                let down = lower_bound(&inst.graph, &inst.post, &with_theta(&inst.params, k, z, -h), mode).unwrap();
                let fd = (up - down) / (2.0 * h);
                assert!(rel_err(g[z.0][z.1], fd) <= 1e-4, "seed {seed} {mode:?} {z:?}: {} vs {fd}", g[z.0][z.1]);
            }
        }
    }
}

#[test]
fn complete_graph_theta_gradient_is_positive() {
    let n = 4;
    let edges: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let graph = DirectedGraph::from_edges(n, edges).unwrap().0;
    let inst = random_instance(5, n, 2, 0.0);
    for mode in [Mode::Exact, Mode::Taylor] {
        let g = theta_gradient(&graph, &inst.post, &inst.params, 1, mode).unwrap();
        assert!(g.iter().flatten().all(|&x| x > 0.0));
    }
}

#[test]
fn mi_identities() {
    let n = 4;
    let eps = 1e-6;
    let paired = [1.0 - eps, 1.0 - eps, eps, eps];
    let phi: Vec<f64> = (0..n).flat_map(|i| [paired[i], paired[i]]).collect();
    let post = VariationalPosterior::from_phi(n, 2, phi, eps).unwrap();
    let mi = mi_pair(&post, 0, 1).unwrap();
    // Direct evaluation at the clamp: joint mass sits on (0,0) and (1,1).
    let (a, b) = (1.0 - eps, eps);
    let diag = (a * a + b * b) / 2.0;
    let off = a * b;
    let direct = 2.0 * diag * (diag / 0.25).ln() + 2.0 * off * (off / 0.25).ln();
    assert!((mi - direct).abs() < 1e-12, "{mi} vs {direct}");
    assert!((mi - std::f64::consts::LN_2).abs() < 1e-4);
    let tight: Vec<f64> = (0..n).flat_map(|i| [paired[i], paired[i]]).map(|p| if p > 0.5 { 1.0 } else { 0.0 }).collect();
    let tight = VariationalPosterior::from_phi(n, 2, tight, 1e-10).unwrap();
    assert!((mi_pair(&tight, 0, 1).unwrap() - std::f64::consts::LN_2).abs() < 1e-6);

    let constant = VariationalPosterior::from_phi(3, 3, vec![0.2, 0.7, 0.9, 0.2, 0.7, 0.9, 0.2, 0.7, 0.9], eps).unwrap();
    assert!(mi_pair(&constant, 0, 2).unwrap().abs() < 1e-15);
    assert!(mi_gradient(&constant, 1, 1).unwrap().abs() < 1e-15);
    assert!(mi_pair(&constant, 1, 1).is_err());

    let single = VariationalPosterior::uniform(3, 1, 0.3, eps).unwrap();
    assert_eq!(mi_gradient(&single, 0, 0).unwrap(), 0.0);

    for seed in 0..20 {
        let inst = random_instance(300 + seed, 6, 3, 0.0);
        let a = mi_pair(&inst.post, 0, 2).unwrap();
        let b = mi_pair(&inst.post, 2, 0).unwrap();
        assert!(a >= 0.0 && (a - b).abs() < 1e-15);
    }
}

#[test]
fn mi_gradient_matches_finite_differences() {
    let h = 1e-5;
    for seed in 0..20u64 {
        let inst = random_instance(400 + seed, 4, 3, 0.0);
        let (i, l) = (seed as usize % 4, seed as usize % 3);
        let total = |post: &VariationalPosterior| -> f64 {
            (0..3).filter(|&b| b != l).map(|b| mi_pair(post, l, b).unwrap()).sum()
        };
        let mut up = inst.post.clone();
        up.set_phi(i, l, inst.post.phi(i, l) + h).unwrap();
        let mut down = inst.post.clone();
        down.set_phi(i, l, inst.post.phi(i, l) - h).unwrap();
        let fd = (total(&up) - total(&down)) / (2.0 * h);
        let g = mi_gradient(&inst.post, i, l).unwrap();
        assert!(rel_err(g, fd) <= 1e-5, "seed {seed}: {g} vs {fd}");
    }
}

#[test]
fn mu_update_is_column_mean() {
    let eps = 1e-6;
    let post = VariationalPosterior::from_phi(4, 3, vec![
        0.5, 1.0 - eps, eps,
        0.5, eps, eps,
        0.5, 1.0 - eps, eps,
        0.5, eps, eps,
    ], eps)
    .unwrap();
    let mu = m_step_mu(&post);
    assert_eq!(mu[0], 0.5);
    let ulp = 0.5f64.next_down();
    assert!(mu[1] == 0.5 || mu[1] == ulp || mu[1] == 0.5f64.next_up());
    assert_eq!(mu[2], eps);
}
