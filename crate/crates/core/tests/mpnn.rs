use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ricci_gnn::generate::{generate, Family};
use ricci_gnn::graph::Graph;
use ricci_gnn::mpnn::{
    alpha_beta_structural, forward, influence_distribution, linear_jacobians, Aggregator, FeatureMatrix, Mat, MpnnSpec,
    UpdateMenu,
};
use ricci_gnn::ratio::rat;

fn g(f: Family) -> Graph {
    generate(f).unwrap()
}

fn random_features(rng: &mut ChaCha8Rng, rows: usize, channels: usize) -> FeatureMatrix {
    FeatureMatrix::new(DMatrix::from_fn(rows, channels, |_, _| rng.random_range(-1.0..1.0))).unwrap()
}

/// `A + I` as a dense matrix.
fn extended_adjacency(graph: &Graph) -> DMatrix<f64> {
    let n = graph.vertex_count();
    let mut a = DMatrix::identity(n, n);
    for &(u, v) in graph.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

#[test]
fn identity_layers_are_matrix_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for graph in [
        g(Family::Barbell(4)),
        g(Family::Star(5)),
        g(Family::ErdosRenyi { n: 12, p: 0.3, seed: 1 }),
    ] {
        let n = graph.vertex_count();
        let x = random_features(&mut rng, n, 2);
        let a = extended_adjacency(&graph);
        let sum = forward(&graph, &x, &MpnnSpec::identity(1, 2, Aggregator::Sum)).unwrap();
        assert!((sum[1].matrix() - &a * x.matrix()).amax() < 1e-12);
        let inv_deg = DMatrix::from_diagonal(&a.row_sum_tr().map(|d| 1.0 / d));
        let mean = forward(&graph, &x, &MpnnSpec::identity(1, 2, Aggregator::Mean)).unwrap();
        assert!((mean[1].matrix() - inv_deg * &a * x.matrix()).amax() < 1e-12);
    }
}

#[test]
fn zero_layers_echo_input() {
    let x = FeatureMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    let out = forward(&g(Family::Path(3)), &x, &MpnnSpec::new(vec![])).unwrap();
    assert_eq!(out, vec![x]);
}

#[test]
fn dimension_errors() {
    let x = FeatureMatrix::zeros(4, 2);
    assert!(forward(&g(Family::Path(3)), &x, &MpnnSpec::identity(1, 2, Aggregator::Sum)).is_err());
    let x = FeatureMatrix::zeros(3, 2);
    assert!(forward(&g(Family::Path(3)), &x, &MpnnSpec::identity(1, 3, Aggregator::Sum)).is_err());
}

#[test]
fn jacobians_match_finite_differences() {
    const STEP: f64 = 1e-6;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = g(Family::ErdosRenyi { n: 8, p: 0.4, seed });
        let depth = rng.random_range(1..=3);
        let dim = rng.random_range(1..=3);
        let spec = MpnnSpec::random(&mut rng, depth, dim, Aggregator::Sum, UpdateMenu::Linear);
        let stack = linear_jacobians(&graph, &spec, depth).unwrap();
        let x = random_features(&mut rng, graph.vertex_count(), dim);
        for w in 0..graph.vertex_count() {
            for j in 0..dim {
                let mut plus = x.matrix().clone();
                let mut minus = x.matrix().clone();
                plus[(w, j)] += STEP;
                minus[(w, j)] -= STEP;
                let fp = forward(&graph, &FeatureMatrix::new(plus).unwrap(), &spec).unwrap();
                let fm = forward(&graph, &FeatureMatrix::new(minus).unwrap(), &spec).unwrap();
                for u in 0..graph.vertex_count() {
                    let block = stack.block(u, w);
                    for i in 0..dim {
                        let fd = (fp[depth].matrix()[(u, i)] - fm[depth].matrix()[(u, i)]) / (2.0 * STEP);
                        let exact = block[(i, j)];
                        assert!(
                            (fd - exact).abs() <= 1e-5 * exact.abs().max(1.0),
                            "seed {seed}: block ({u}, {w})[{i}, {j}] = {exact}, finite difference {fd}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn influence_rows() {
    let spec = MpnnSpec::identity(4, 1, Aggregator::Sum);
    let p3 = g(Family::Path(3));
    let row = influence_distribution(&p3, &spec, 2, 0).unwrap();
    assert_eq!(row.exact, vec![rat(2, 5), rat(2, 5), rat(1, 5)]);
    let scaled = MpnnSpec::new(vec![
        ricci_gnn::mpnn::LayerSpec {
            aggregator: Aggregator::Sum,
            message: Mat::from_rows(&[vec![2.0, 0.0], vec![1.0, -1.0]]).unwrap(),
            update: ricci_gnn::mpnn::Update::Identity,
        };
        2
    ]);
    let two_channel = influence_distribution(&p3, &scaled, 2, 0).unwrap();
    assert_eq!(two_channel.exact, row.exact);
    for (f, e) in two_channel.float.iter().zip([0.4, 0.4, 0.2]) {
        assert!((f - e).abs() < 1e-12);
    }
    let degenerate = MpnnSpec::new(vec![ricci_gnn::mpnn::LayerSpec {
        aggregator: Aggregator::Sum,
        message: Mat::from_rows(&[vec![1.0, -1.0], vec![1.0, -1.0]]).unwrap(),
        update: ricci_gnn::mpnn::Update::Identity,
    }]);
    assert_eq!(
        influence_distribution(&p3, &degenerate, 1, 0),
        Err(ricci_gnn::Error::DegenerateNormalizer)
    );
}

#[test]
fn jacobian_ratio_bounds_on_random_graphs() {
    for seed in 0..30 {
        let graph = g(Family::ErdosRenyi { n: 14, p: 0.35, seed });
        for &(u, v) in graph.edges() {
            let ab = alpha_beta_structural(&graph, u, v);
            assert!(ab.bound_ok, "seed {seed} edge ({u}, {v})");
        }
    }
}
