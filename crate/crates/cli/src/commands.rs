use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use ricci_gnn::curvature::curvature_profile;
use ricci_gnn::diagnostics::{run_suite, smoothing_metrics, CheckSelection, SmoothingReport, SuiteConfig};
use ricci_gnn::generate::{default_corpus, demo_features, demo_graph, generate as build, Family, NamedGraph};
use ricci_gnn::graph::{parse_graph, render_graph, Graph, GraphFormat, LabeledGraph};
use ricci_gnn::mpnn::{forward, FeatureMatrix, MpnnSpec};
use ricci_gnn::rewiring::{rewire_loop, RewireConfig};

use crate::{CurvatureArgs, FamilyName, FormatName, GenerateArgs, RewireArgs, SimulateArgs, VerifyArgs};

impl From<FormatName> for GraphFormat {
    fn from(f: FormatName) -> Self {
        match f {
            FormatName::Edgelist => GraphFormat::EdgeList,
            FormatName::Json => GraphFormat::Json,
        }
    }
}

fn pick_format(explicit: Option<FormatName>, path: Option<&Path>) -> GraphFormat {
    match (explicit, path) {
        (Some(f), _) => f.into(),
        (None, Some(p)) => GraphFormat::from_path(p),
        (None, None) => GraphFormat::EdgeList,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_graph(path: &Path, format: Option<FormatName>) -> Result<LabeledGraph> {
    let text = read(path)?;
    parse_graph(&text, pick_format(format, Some(path))).with_context(|| format!("{}", path.display()))
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Edge list under original ids; JSON graphs are always dense.
fn render_labeled(g: &Graph, labels: &[u64], format: GraphFormat) -> String {
    match format {
        GraphFormat::Json => render_graph(g, format),
        GraphFormat::EdgeList => g
            .edges()
            .iter()
            .map(|&(u, v)| format!("{}\t{}\n", labels[u], labels[v]))
            .collect(),
    }
}

pub fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let want = |v: Option<usize>, flag: &str| v.with_context(|| format!("--family {:?} needs --{flag}", args.family));
    let family = match args.family {
        FamilyName::Complete => Family::Complete(want(args.n, "n")?),
        FamilyName::Path => Family::Path(want(args.n, "n")?),
        FamilyName::Cycle => Family::Cycle(want(args.n, "n")?),
        FamilyName::Star => Family::Star(want(args.n, "n")?),
        FamilyName::DoubleStar => Family::DoubleStar(want(args.a, "a")?, want(args.b, "b")?),
        FamilyName::Barbell => Family::Barbell(want(args.k.or(args.n), "k")?),
        FamilyName::CocktailParty => Family::CocktailParty(want(args.n, "n")?),
        FamilyName::ErdosRenyi => Family::ErdosRenyi {
            n: want(args.n, "n")?,
            p: args.p.context("--family erdos-renyi needs --p")?,
            seed: args.seed,
        },
        FamilyName::RandomTree => Family::RandomTree {
            n: want(args.n, "n")?,
            seed: args.seed,
        },
    };
    let graph = build(family)?;
    let format = pick_format(args.format, args.out.as_deref());
    emit(args.out.as_deref(), &render_graph(&graph, format))?;
    Ok(ExitCode::SUCCESS)
}

pub fn curvature(args: CurvatureArgs) -> Result<ExitCode> {
    let input = read_graph(&args.graph, args.format)?;
    let mut profile = curvature_profile(&input.graph);
    for report in &mut profile.edges {
        report.u = input.label(report.u) as usize;
        report.v = input.label(report.v) as usize;
    }
    emit(args.out.as_deref(), &to_json(&profile))?;
    Ok(ExitCode::SUCCESS)
}

pub fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let checks = CheckSelection::parse(&args.suite)?;
    let corpus: Vec<NamedGraph> = if args.graph.is_empty() {
        default_corpus()
    } else {
        args.graph
            .iter()
            .map(|p| Ok(NamedGraph::new(p.display().to_string(), read_graph(p, None)?.graph)))
            .collect::<Result<_>>()?
    };
    let config = SuiteConfig {
        trials: args.trials,
        seed: args.seed,
        checks,
        fail_fast: args.fail_fast,
        keep_records: args.records,
    };
    let report = run_suite(&corpus, &config);
    emit(args.out.as_deref(), &to_json(&report))?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("ricci-gnn: {} violation(s)", report.total_violations);
        Ok(ExitCode::from(1))
    }
}

#[derive(Serialize)]
struct SeriesPoint {
    layer: usize,
    dirichlet: f64,
}

#[derive(Serialize)]
struct SimulationReport {
    layers: usize,
    series: Vec<SeriesPoint>,
    /// The Dirichlet series never increases.
    monotone: bool,
    /// Last energy over the first, when the first is nonzero.
    final_ratio: Option<f64>,
    smoothing: SmoothingReport,
}

pub fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let (input, trajectory) = if args.demo_smoothing {
        let graph = demo_graph();
        let rows: Vec<Vec<f64>> = demo_features().iter().map(|r| r.to_vec()).collect();
        let x = FeatureMatrix::from_rows(&rows)?;
        let labels = (0..graph.vertex_count() as u64).collect();
        let trajectory = ricci_gnn::mpnn::smoothing_demo(&graph, &x, args.iterations)?.features;
        (LabeledGraph { graph, labels }, trajectory)
    } else {
        let (graph, features, spec) = match (&args.graph, &args.features, &args.spec) {
            (Some(g), Some(f), Some(s)) => (g, f, s),
            _ => bail!("simulate needs a graph, a features CSV and a spec JSON"),
        };
        let input = read_graph(graph, None)?;
        let x = FeatureMatrix::from_csv_labeled(&read(features)?, &input.labels)
            .with_context(|| format!("{}", features.display()))?;
        let spec = MpnnSpec::from_json(&read(spec)?).with_context(|| format!("{}", spec.display()))?;
        let trajectory = forward(&input.graph, &x, &spec)?;
        (input, trajectory)
    };

    if let Some(dir) = &args.layers_out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (k, x) in trajectory.iter().enumerate() {
            let path: PathBuf = dir.join(format!("layer_{k}.csv"));
            let text = x.to_csv_labeled(|u| input.label(u));
            fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        }
    }

    let mut smoothing = smoothing_metrics(&input.graph, &trajectory);
    for edge in &mut smoothing.edges {
        *edge = (input.label(edge.0) as usize, input.label(edge.1) as usize);
    }
    let energies = &smoothing.dirichlet;
    let report = SimulationReport {
        layers: trajectory.len() - 1,
        series: energies
            .iter()
            .enumerate()
            .map(|(layer, &dirichlet)| SeriesPoint { layer, dirichlet })
            .collect(),
        monotone: energies.windows(2).all(|w| w[1] <= w[0]),
        final_ratio: (energies[0] > 0.0).then(|| energies[energies.len() - 1] / energies[0]),
        smoothing,
    };
    emit(args.out.as_deref(), &to_json(&report))?;
    Ok(ExitCode::SUCCESS)
}

pub fn rewire(args: RewireArgs) -> Result<ExitCode> {
    let config = RewireConfig {
        tau_neg: args.tau_neg,
        tau_pos: args.tau_pos,
        max_iterations: args.iterations,
        additions_per_step: args.additions,
        removals_per_step: args.removals,
        seed: args.seed,
        preserve_connectivity: !args.allow_disconnect,
    };
    config.validate()?;
    let input = read_graph(&args.graph, args.format)?;
    let (graph, mut trace) = rewire_loop(&input.graph, &config)?;

    let label = |v: usize| input.label(v) as usize;
    for step in &mut trace.steps {
        for e in &mut step.removed {
            *e = (label(e.0), label(e.1));
        }
        for (e, s) in &mut step.added {
            *e = (label(e.0), label(e.1));
            *s = (label(s.0), label(s.1));
        }
    }
    let format = pick_format(args.format, args.out_graph.as_deref().or(Some(&args.graph)));
    emit(
        args.out_graph.as_deref(),
        &render_labeled(&graph, &input.labels, format),
    )?;
    if let Some(path) = &args.out_trace {
        emit(Some(path), &to_json(&trace))?;
    }
    Ok(ExitCode::SUCCESS)
}
