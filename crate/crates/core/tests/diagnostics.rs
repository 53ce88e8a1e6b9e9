use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ricci_gnn::diagnostics::{run_suite, smoothing_metrics, verify_multilayer, CheckName, CheckSelection, SuiteConfig};
use ricci_gnn::generate::{demo_features, demo_graph, generate, Family, NamedGraph};
use ricci_gnn::mpnn::{smoothing_demo, Aggregator, FeatureMatrix, MpnnSpec, UpdateMenu};

#[test]
fn octahedron_multilayer_sweep() {
    let octahedron = generate(Family::CocktailParty(3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let x = FeatureMatrix::from_rows(
            &(0..6)
                .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let spec = MpnnSpec::random(&mut rng, 6, 2, Aggregator::Mean, UpdateMenu::Linear);
        let checks = verify_multilayer(&octahedron, &spec, &x, 6).unwrap();
        assert_eq!(checks.len(), 6 * octahedron.edge_count());
        assert!(checks.iter().all(|c| c.holds));
    }
}

#[test]
fn demo_graph_smooths() {
    let x = FeatureMatrix::from_rows(&demo_features().iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
    let run = smoothing_demo(&demo_graph(), &x, 25).unwrap();
    assert!(run.energies[25] < 1e-3 * run.energies[0]);
    let report = smoothing_metrics(&demo_graph(), &run.features);
    assert_eq!(report.dirichlet.len(), 26);
    for (a, b) in report.dirichlet.iter().zip(&run.energies) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn one_layer_suite_on_small_corpus() {
    let corpus: Vec<NamedGraph> = [Family::Complete(5), Family::CocktailParty(4), Family::Barbell(4)]
        .into_iter()
        .map(|f| NamedGraph::new(f.to_string(), generate(f).unwrap()))
        .collect();
    let config = SuiteConfig {
        trials: 20,
        seed: 9,
        checks: CheckSelection::parse("one_layer").unwrap(),
        keep_records: true,
        ..Default::default()
    };
    let report = run_suite(&corpus, &config);
    assert!(report.passed());
    let records = report.records.as_ref().unwrap();
    let evaluated: usize = report.summary.iter().map(|s| s.evaluated).sum();
    assert_eq!(records.len(), evaluated);
    assert!(records.iter().any(|r| r.name == CheckName::OneLayerMean));
    assert!(records.iter().all(|r| r.context.trial_seed.is_some()));
    let again = run_suite(&corpus, &config);
    assert_eq!(again, report);
}
