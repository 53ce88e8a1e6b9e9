use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    diameter_check, jacobian_checks, multilayer_checks, multilayer_hypothesis, one_layer_check, BoundCheck,
    CheckContext, CheckName, Quantity, FLOAT_TOLERANCE,
};
use crate::curvature::{self, bottleneck_bound, shared_neighbor_bound, CurvatureProfile};
use crate::error::{Error, Result};
use crate::generate::NamedGraph;
use crate::graph::Graph;
use crate::mpnn::{self, Aggregator, FeatureMatrix, MpnnSpec, UpdateMenu};

/// Channels of the random features drawn per trial.
const TRIAL_CHANNELS: usize = 3;
/// Depth of the random networks used for the multilayer bound.
const MULTILAYER_DEPTH: usize = 6;

/// Which checks a suite evaluates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckSelection(BTreeSet<CheckName>);

impl CheckSelection {
    pub fn all() -> Self {
        CheckSelection(CheckName::ALL.into_iter().collect())
    }

    pub fn only(names: impl IntoIterator<Item = CheckName>) -> Self {
        CheckSelection(names.into_iter().collect())
    }

    /// `all`, a check name, or one of the group names `one_layer` and `bottleneck`.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "all" => Ok(Self::all()),
            "one_layer" => Ok(Self::only([CheckName::OneLayerSum, CheckName::OneLayerMean])),
            "bottleneck" => Ok(Self::only([
                CheckName::BottleneckStatement,
                CheckName::BottleneckStrong,
            ])),
            name => Ok(Self::only([name.parse()?])),
        }
    }

    pub fn contains(&self, name: CheckName) -> bool {
        self.0.contains(&name)
    }

    pub fn names(&self) -> impl Iterator<Item = CheckName> + '_ {
        self.0.iter().copied()
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Random feature/spec draws per graph and aggregator.
    pub trials: usize,
    pub seed: u64,
    pub checks: CheckSelection,
    /// Stop at the first violation; evaluation becomes sequential.
    pub fail_fast: bool,
    /// Keep every evaluated check in the report, not just violations.
    pub keep_records: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 200,
            seed: 0,
            checks: CheckSelection::all(),
            fail_fast: false,
            keep_records: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSettings {
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckName>,
    pub graphs: usize,
    pub norm: &'static str,
    pub float_tolerance: f64,
    pub fail_fast: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: CheckName,
    pub evaluated: usize,
    pub violations: usize,
    pub skipped: usize,
    /// Smallest `rhs − lhs` seen, with where it occurred.
    pub min_slack: Option<Quantity>,
    pub tightest: Option<CheckContext>,
}

impl CheckSummary {
    fn new(name: CheckName) -> Self {
        CheckSummary {
            name,
            evaluated: 0,
            violations: 0,
            skipped: 0,
            min_slack: None,
            tightest: None,
        }
    }

    fn record(&mut self, check: &BoundCheck) {
        self.evaluated += 1;
        if !check.holds {
            self.violations += 1;
        }
        let tighter = match &self.min_slack {
            None => true,
            Some(best) => check.slack.to_f64() < best.to_f64(),
        };
        if tighter {
            self.min_slack = Some(check.slack.clone());
            self.tightest = Some(check.context.clone());
        }
    }

    fn merge(&mut self, other: CheckSummary) {
        self.evaluated += other.evaluated;
        self.violations += other.violations;
        self.skipped += other.skipped;
        if let Some(slack) = other.min_slack {
            if self
                .min_slack
                .as_ref()
                .is_none_or(|best| slack.to_f64() < best.to_f64())
            {
                self.min_slack = Some(slack);
                self.tightest = other.tightest;
            }
        }
    }
}

/// A check that was not evaluated because its hypothesis fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skip {
    pub name: CheckName,
    pub context: CheckContext,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub settings: SuiteSettings,
    pub total_violations: usize,
    /// Set when `fail_fast` stopped the run early.
    pub halted: bool,
    pub summary: Vec<CheckSummary>,
    pub violations: Vec<BoundCheck>,
    /// Graph- and edge-level skips. Per-trial skips are only counted.
    pub skipped: Vec<Skip>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<BoundCheck>>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.total_violations == 0
    }

    pub fn summary_for(&self, name: CheckName) -> Option<&CheckSummary> {
        self.summary.iter().find(|s| s.name == name)
    }
}

/// Accumulates checks for one graph (or the whole run) in evaluation order.
struct Collector {
    summary: Vec<CheckSummary>,
    violations: Vec<BoundCheck>,
    skipped: Vec<Skip>,
    records: Option<Vec<BoundCheck>>,
    fail_fast: bool,
    halted: bool,
}

impl Collector {
    fn new(config: &SuiteConfig) -> Self {
        Collector {
            summary: CheckName::ALL.into_iter().map(CheckSummary::new).collect(),
            violations: Vec::new(),
            skipped: Vec::new(),
            records: config.keep_records.then(Vec::new),
            fail_fast: config.fail_fast,
            halted: false,
        }
    }

    fn slot(&mut self, name: CheckName) -> &mut CheckSummary {
        &mut self.summary[name as usize]
    }

    fn push(&mut self, check: BoundCheck) {
        if self.halted {
            return;
        }
        self.slot(check.name).record(&check);
        if !check.holds {
            self.halted = self.fail_fast;
            self.violations.push(check.clone());
        }
        if let Some(records) = &mut self.records {
            records.push(check);
        }
    }

    fn skip(&mut self, name: CheckName, context: CheckContext, reason: String) {
        if !self.halted {
            self.slot(name).skipped += 1;
            self.skipped.push(Skip { name, context, reason });
        }
    }

    fn merge(&mut self, other: Collector) {
        if self.halted {
            return;
        }
        for (mine, theirs) in self.summary.iter_mut().zip(other.summary) {
            mine.merge(theirs);
        }
        self.violations.extend(other.violations);
        self.skipped.extend(other.skipped);
        if let (Some(mine), Some(theirs)) = (&mut self.records, other.records) {
            mine.extend(theirs);
        }
        self.halted = other.halted;
    }
}

/// Seed for one (graph, trial, stream) triple, independent of evaluation order.
fn trial_seed(seed: u64, graph: usize, trial: usize, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(mix(seed) ^ graph as u64) ^ trial as u64) ^ stream)
}

fn random_features(rng: &mut ChaCha8Rng, rows: usize) -> FeatureMatrix {
    let values: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..TRIAL_CHANNELS).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    FeatureMatrix::from_rows(&values).expect("finite features")
}

struct GraphJob<'a> {
    index: usize,
    named: &'a NamedGraph,
    profile: CurvatureProfile,
}

impl GraphJob<'_> {
    fn graph(&self) -> &Graph {
        &self.named.graph
    }

    fn name(&self) -> &str {
        &self.named.name
    }

    fn structural(&self, config: &SuiteConfig, out: &mut Collector) {
        let checks = &config.checks;
        for report in &self.profile.edges {
            let edge = || CheckContext::edge(self.name(), report.u, report.v);
            if checks.contains(CheckName::SharedNeighbor) {
                out.push(BoundCheck::exact(
                    CheckName::SharedNeighbor,
                    shared_neighbor_bound(report),
                    edge(),
                ));
            }
            let bound = bottleneck_bound(&report.bottleneck, &report.kappa);
            if checks.contains(CheckName::BottleneckStatement) {
                match bound.statement {
                    Some(ineq) => out.push(BoundCheck::exact(CheckName::BottleneckStatement, ineq, edge())),
                    None => out.skip(
                        CheckName::BottleneckStatement,
                        edge(),
                        format!(
                            "a vertex lies on {} pairs, more than n/m = {}/{}",
                            report.bottleneck.max_participation, report.bottleneck.n, report.bottleneck.m
                        ),
                    ),
                }
            }
            if checks.contains(CheckName::BottleneckStrong) {
                out.push(BoundCheck::exact(CheckName::BottleneckStrong, bound.strong, edge()));
            }
            if checks.contains(CheckName::JacobianRatio) {
                let ab = mpnn::alpha_beta_structural(self.graph(), report.u, report.v);
                for check in jacobian_checks(&ab, self.name()) {
                    out.push(check);
                }
            }
        }
        if checks.contains(CheckName::Diameter) {
            match diameter_check(self.graph(), &self.profile, self.name()) {
                Ok(check) => out.push(check),
                Err(e) => out.skip(
                    CheckName::Diameter,
                    CheckContext::graph(self.name()),
                    hypothesis_reason(e),
                ),
            }
        }
    }

    /// Random one-layer networks for each selected aggregator.
    fn one_layer_trial(&self, config: &SuiteConfig, trial: usize, out: &mut Collector) {
        let g = self.graph();
        for (stream, aggregator) in [(0, Aggregator::Sum), (1, Aggregator::Mean)] {
            let name = match aggregator {
                Aggregator::Sum => CheckName::OneLayerSum,
                Aggregator::Mean => CheckName::OneLayerMean,
            };
            if !config.checks.contains(name) {
                continue;
            }
            let seed = trial_seed(config.seed, self.index, trial, stream);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_features(&mut rng, g.vertex_count());
            let spec = MpnnSpec::random(&mut rng, 1, TRIAL_CHANNELS, aggregator, UpdateMenu::Lipschitz);
            let next = mpnn::forward(g, &x, &spec).expect("dimensions agree").remove(1);
            for report in &self.profile.edges {
                if !num_traits::Signed::is_positive(&report.kappa) {
                    out.slot(name).skipped += 1;
                    continue;
                }
                let context = CheckContext {
                    trial: Some(trial),
                    trial_seed: Some(seed),
                    ..CheckContext::edge(self.name(), report.u, report.v)
                };
                out.push(one_layer_check(g, &spec.layers[0], &x, &next, report, context));
            }
        }
    }

    fn multilayer_trial(
        &self,
        config: &SuiteConfig,
        trial: usize,
        n: usize,
        delta: &crate::Rational,
        out: &mut Collector,
    ) {
        let g = self.graph();
        let seed = trial_seed(config.seed, self.index, trial, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_features(&mut rng, g.vertex_count());
        let spec = MpnnSpec::random(
            &mut rng,
            MULTILAYER_DEPTH,
            TRIAL_CHANNELS,
            Aggregator::Mean,
            UpdateMenu::Linear,
        );
        let trajectory = mpnn::forward(g, &x, &spec).expect("dimensions agree");
        let base = CheckContext {
            trial: Some(trial),
            trial_seed: Some(seed),
            ..CheckContext::graph(self.name())
        };
        for check in multilayer_checks(g, &spec, &trajectory, n, delta, MULTILAYER_DEPTH, base) {
            out.push(check);
        }
    }

    fn trial(&self, config: &SuiteConfig, trial: usize, multilayer: Option<&(usize, crate::Rational)>) -> Collector {
        let mut out = Collector::new(config);
        self.one_layer_trial(config, trial, &mut out);
        if let Some((n, delta)) = multilayer {
            self.multilayer_trial(config, trial, *n, delta, &mut out);
        }
        out
    }

    fn run(&self, config: &SuiteConfig) -> Collector {
        let mut out = Collector::new(config);
        self.structural(config, &mut out);

        let multilayer = if config.checks.contains(CheckName::Multilayer) {
            match multilayer_hypothesis(self.graph(), &self.profile) {
                Ok(found) => Some(found),
                Err(e) => {
                    out.skip(
                        CheckName::Multilayer,
                        CheckContext::graph(self.name()),
                        hypothesis_reason(e),
                    );
                    None
                }
            }
        } else {
            None
        };
        let wants_trials = config.checks.contains(CheckName::OneLayerSum)
            || config.checks.contains(CheckName::OneLayerMean)
            || multilayer.is_some();
        if !wants_trials {
            return out;
        }
        if config.fail_fast {
            for trial in 0..config.trials {
                if out.halted {
                    break;
                }
                out.merge(self.trial(config, trial, multilayer.as_ref()));
            }
        } else {
            let parts: Vec<Collector> = (0..config.trials)
                .into_par_iter()
                .map(|trial| self.trial(config, trial, multilayer.as_ref()))
                .collect();
            for part in parts {
                out.merge(part);
            }
        }
        out
    }
}

fn hypothesis_reason(e: Error) -> String {
    match e {
        Error::HypothesisNotMet(reason) => reason,
        other => other.to_string(),
    }
}

fn evaluate(index: usize, named: &NamedGraph, config: &SuiteConfig) -> Collector {
    let job = GraphJob {
        index,
        named,
        profile: curvature::curvature_profile(&named.graph),
    };
    job.run(config)
}

/// Evaluates every selected check over `corpus`, with `config.trials` random
/// feature/spec draws per graph for the feature-dependent bounds.
///
/// Graphs and trials are evaluated in parallel unless `fail_fast` is set; the
/// report is identical for any thread count.
pub fn run_suite(corpus: &[NamedGraph], config: &SuiteConfig) -> SuiteReport {
    let mut total = Collector::new(config);
    if config.fail_fast {
        for (i, named) in corpus.iter().enumerate() {
            if total.halted {
                break;
            }
            total.merge(evaluate(i, named, config));
        }
    } else {
        let parts: Vec<Collector> = corpus
            .par_iter()
            .enumerate()
            .map(|(i, named)| evaluate(i, named, config))
            .collect();
        for part in parts {
            total.merge(part);
        }
    }

    let summary: Vec<CheckSummary> = total
        .summary
        .into_iter()
        .filter(|s| config.checks.contains(s.name))
        .collect();
    SuiteReport {
        settings: SuiteSettings {
            trials: config.trials,
            seed: config.seed,
            checks: config.checks.names().collect(),
            graphs: corpus.len(),
            norm: "euclidean",
            float_tolerance: FLOAT_TOLERANCE,
            fail_fast: config.fail_fast,
        },
        total_violations: summary.iter().map(|s| s.violations).sum(),
        halted: total.halted,
        summary,
        violations: total.violations,
        skipped: total.skipped,
        records: total.records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Family};

    fn named(f: Family) -> NamedGraph {
        NamedGraph::new(f.to_string(), generate(f).unwrap())
    }

    fn config(trials: usize) -> SuiteConfig {
        SuiteConfig {
            trials,
            seed: 1,
            ..Default::default()
        }
    }

    #[test]
    fn empty_corpus() {
        let report = run_suite(&[], &config(5));
        assert!(report.passed());
        assert!(report.violations.is_empty() && report.skipped.is_empty());
        assert!(report.summary.iter().all(|s| s.evaluated == 0));
    }

    #[test]
    fn triangle_coverage() {
        let report = run_suite(&[named(Family::Complete(3))], &config(3));
        for name in [
            CheckName::SharedNeighbor,
            CheckName::OneLayerSum,
            CheckName::OneLayerMean,
            CheckName::BottleneckStrong,
            CheckName::Diameter,
        ] {
            assert!(report.summary_for(name).unwrap().evaluated > 0, "{name}");
        }
        assert_eq!(report.summary_for(CheckName::Multilayer).unwrap().evaluated, 3 * 3 * 6);
        assert!(report.passed(), "{:?}", report.violations);
        let shared = report.summary_for(CheckName::SharedNeighbor).unwrap();
        assert_eq!(shared.min_slack, Some(Quantity::Exact(crate::ratio::int(0))));
    }

    #[test]
    fn diameter_skip_on_path() {
        let mut cfg = config(1);
        cfg.checks = CheckSelection::parse("diameter").unwrap();
        let report = run_suite(&[named(Family::Path(4))], &cfg);
        assert!(report.passed());
        assert_eq!(report.summary.len(), 1);
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].name, CheckName::Diameter);
    }

    #[test]
    fn selection_parsing() {
        assert_eq!(CheckSelection::parse("one_layer").unwrap().names().count(), 2);
        assert_eq!(CheckSelection::parse("all").unwrap().names().count(), 8);
        assert!(CheckSelection::parse("nonexistent").is_err());
    }

    #[test]
    fn fail_fast_stops_at_first_violation() {
        let corpus: Vec<NamedGraph> = (0..10)
            .map(|seed| named(Family::ErdosRenyi { n: 20, p: 0.3, seed }))
            .collect();
        let mut cfg = config(1);
        cfg.checks = CheckSelection::parse("bottleneck_strong").unwrap();
        let full = run_suite(&corpus, &cfg);
        if full.passed() {
            return;
        }
        cfg.fail_fast = true;
        let fast = run_suite(&corpus, &cfg);
        assert!(fast.halted);
        assert_eq!(fast.total_violations, 1);
        assert_eq!(fast.violations[0], full.violations[0]);
    }

    #[test]
    fn deterministic_across_pools() {
        let corpus = vec![
            named(Family::Complete(4)),
            named(Family::Cycle(5)),
            named(Family::Barbell(3)),
        ];
        let cfg = config(4);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| serde_json::to_string(&run_suite(&corpus, &cfg)).unwrap());
        let b = four.install(|| serde_json::to_string(&run_suite(&corpus, &cfg)).unwrap());
        assert_eq!(a, b);
    }
}
