//! Over-smoothing metrics and machine checks of the curvature inequalities.
//!
//! Structural inequalities are compared in exact rational arithmetic. Checks
//! that mix curvature with floating-point feature norms allow an additive
//! slack of [`FLOAT_TOLERANCE`] on the bound side. Feature gaps always use the
//! Euclidean norm.

mod suite;

pub use suite::{run_suite, CheckSelection, CheckSummary, Skip, SuiteConfig, SuiteReport, SuiteSettings};

use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use serde::{Serialize, Serializer};

use crate::curvature::{self, CurvatureProfile, EdgeCurvatureReport, Inequality};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mpnn::{self, Aggregator, FeatureMatrix, LayerSpec, MpnnSpec};
use crate::ratio::{self, Rational};

pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    SharedNeighbor,
    OneLayerSum,
    OneLayerMean,
    Multilayer,
    BottleneckStatement,
    BottleneckStrong,
    JacobianRatio,
    Diameter,
}

impl CheckName {
    pub const ALL: [CheckName; 8] = [
        CheckName::SharedNeighbor,
        CheckName::OneLayerSum,
        CheckName::OneLayerMean,
        CheckName::Multilayer,
        CheckName::BottleneckStatement,
        CheckName::BottleneckStrong,
        CheckName::JacobianRatio,
        CheckName::Diameter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::SharedNeighbor => "shared_neighbor",
            CheckName::OneLayerSum => "one_layer_sum",
            CheckName::OneLayerMean => "one_layer_mean",
            CheckName::Multilayer => "multilayer",
            CheckName::BottleneckStatement => "bottleneck_statement",
            CheckName::BottleneckStrong => "bottleneck_strong",
            CheckName::JacobianRatio => "jacobian_ratio",
            CheckName::Diameter => "diameter",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown check {s:?}")))
    }
}

/// Either side of a checked inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Exact(Rational),
    Float(f64),
}

impl Quantity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Quantity::Exact(r) => ratio::to_f64(r),
            Quantity::Float(x) => *x,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(r) => f.write_str(&ratio::format(r)),
            Quantity::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Quantity::Exact(r) => s.serialize_str(&ratio::format(r)),
            Quantity::Float(x) => s.serialize_f64(*x),
        }
    }
}

/// Where a check was evaluated.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckContext {
    pub graph: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    /// Seed of the RNG that drew the features and spec for this trial.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckContext {
    pub fn graph(name: impl Into<String>) -> Self {
        CheckContext {
            graph: name.into(),
            ..Default::default()
        }
    }

    pub fn edge(name: impl Into<String>, u: usize, v: usize) -> Self {
        CheckContext {
            edge: Some((u, v)),
            ..Self::graph(name)
        }
    }
}

/// An evaluated `lhs ≤ rhs`. Exact checks compare rationals; float checks
/// compare `lhs ≤ rhs + tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: CheckName,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub holds: bool,
    /// `rhs − lhs` (before tolerance).
    pub slack: Quantity,
    pub tolerance: f64,
    pub context: CheckContext,
}

impl BoundCheck {
    pub fn exact(name: CheckName, inequality: Inequality, context: CheckContext) -> Self {
        BoundCheck {
            name,
            holds: inequality.holds(),
            slack: Quantity::Exact(inequality.slack()),
            lhs: Quantity::Exact(inequality.lhs),
            rhs: Quantity::Exact(inequality.rhs),
            tolerance: 0.0,
            context,
        }
    }

    pub fn float(name: CheckName, lhs: f64, rhs: f64, context: CheckContext) -> Self {
        BoundCheck {
            name,
            holds: lhs <= rhs + FLOAT_TOLERANCE,
            slack: Quantity::Float(rhs - lhs),
            lhs: Quantity::Float(lhs),
            rhs: Quantity::Float(rhs),
            tolerance: FLOAT_TOLERANCE,
            context,
        }
    }
}

/// Per-layer edge gaps `|X^k_u − X^k_v|` and their sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingReport {
    pub norm: &'static str,
    pub edges: Vec<(usize, usize)>,
    /// `gaps[k][e]` for layer `k` and edge index `e`.
    pub gaps: Vec<Vec<f64>>,
    pub dirichlet: Vec<f64>,
}

pub fn smoothing_metrics(g: &Graph, trajectory: &[FeatureMatrix]) -> SmoothingReport {
    let gaps: Vec<Vec<f64>> = trajectory
        .iter()
        .map(|x| g.edges().iter().map(|&(u, v)| x.gap(u, v)).collect())
        .collect();
    let dirichlet = gaps.iter().map(|row| row.iter().sum()).collect();
    SmoothingReport {
        norm: "euclidean",
        edges: g.edges().to_vec(),
        gaps,
        dirichlet,
    }
}

/// `(1 − κ)·h(κ)` for the one-layer gap bound: `h ≡ 2LCMn` for sum aggregation,
/// `h(κ) = LCM((n+1)/(κn) + 2n/(κn+1))` for mean aggregation.
pub fn one_layer_rhs(aggregator: Aggregator, kappa: f64, lipschitz: f64, c: f64, m: f64, n: usize) -> f64 {
    let n = n as f64;
    let h = match aggregator {
        Aggregator::Sum => 2.0 * lipschitz * c * m * n,
        Aggregator::Mean => lipschitz * c * m * ((n + 1.0) / (kappa * n) + 2.0 * n / (n * kappa + 1.0)),
    };
    (1.0 - kappa) * h
}

fn one_layer_name(aggregator: Aggregator) -> CheckName {
    match aggregator {
        Aggregator::Sum => CheckName::OneLayerSum,
        Aggregator::Mean => CheckName::OneLayerMean,
    }
}

/// One-layer gap bound on an edge with known curvature, given layer input `x`
/// and output `next`.
pub(crate) fn one_layer_check(
    g: &Graph,
    layer: &LayerSpec,
    x: &FeatureMatrix,
    next: &FeatureMatrix,
    report: &EdgeCurvatureReport,
    context: CheckContext,
) -> BoundCheck {
    let (u, v) = (report.u, report.v);
    let c = g
        .neighbors(u)
        .iter()
        .chain(g.neighbors(v))
        .map(|&p| x.norm(p))
        .fold(0.0, f64::max);
    let rhs = one_layer_rhs(
        layer.aggregator,
        report.kappa_float,
        layer.lipschitz(),
        c,
        layer.message_bound(),
        report.max_degree(),
    );
    BoundCheck::float(one_layer_name(layer.aggregator), next.gap(u, v), rhs, context)
}

/// Applies the first layer of `spec` to `x` and checks the one-layer gap bound
/// on `edge`. Requires `κ > 0` on the edge.
pub fn verify_one_layer(g: &Graph, spec: &MpnnSpec, x: &FeatureMatrix, edge: (usize, usize)) -> Result<BoundCheck> {
    let report = curvature::edge_report(g, edge.0, edge.1)?;
    if !report.kappa.is_positive() {
        return Err(Error::HypothesisNotMet(format!(
            "edge ({}, {}) has curvature {} <= 0",
            report.u,
            report.v,
            ratio::format(&report.kappa)
        )));
    }
    let layer = spec
        .layers
        .first()
        .ok_or_else(|| Error::DimensionMismatch("spec has no layers".into()))?;
    let single = MpnnSpec::new(vec![layer.clone()]);
    let out = mpnn::forward(g, x, &single)?;
    let context = CheckContext::edge("input", report.u, report.v);
    Ok(one_layer_check(g, layer, x, &out[1], &report, context))
}

/// Regular degree and minimum curvature when the multilayer bound applies.
pub(crate) fn multilayer_hypothesis(g: &Graph, profile: &CurvatureProfile) -> Result<(usize, Rational)> {
    let n = g
        .regular_degree()
        .ok_or_else(|| Error::HypothesisNotMet("graph is not regular".into()))?;
    let delta = profile.min_kappa().clone();
    if !delta.is_positive() {
        return Err(Error::HypothesisNotMet(format!(
            "minimum edge curvature {} <= 0",
            ratio::format(&delta)
        )));
    }
    Ok((n, delta))
}

/// `(2/3)·C·(3LM⌊(1−δ)n⌋/(n+1))^k` for every edge and `k = 1..=k_max`.
pub(crate) fn multilayer_checks(
    g: &Graph,
    spec: &MpnnSpec,
    trajectory: &[FeatureMatrix],
    n: usize,
    delta: &Rational,
    k_max: usize,
    base: CheckContext,
) -> Vec<BoundCheck> {
    let lipschitz = spec.layers.iter().map(LayerSpec::lipschitz).fold(0.0, f64::max);
    let m = spec.layers.iter().map(LayerSpec::message_bound).fold(0.0, f64::max);
    let c = (0..g.vertex_count()).map(|p| trajectory[0].norm(p)).fold(0.0, f64::max);
    let outside = ratio::floor_i64(&((ratio::int(1) - delta) * ratio::int(n as i64)));
    let rate = 3.0 * lipschitz * m * outside as f64 / (n as f64 + 1.0);
    let mut checks = Vec::new();
    for (k, x) in trajectory.iter().enumerate().skip(1).take(k_max) {
        let rhs = 2.0 / 3.0 * c * rate.powi(k as i32);
        for &(u, v) in g.edges() {
            let context = CheckContext {
                edge: Some((u, v)),
                layer: Some(k),
                ..base.clone()
            };
            checks.push(BoundCheck::float(CheckName::Multilayer, x.gap(u, v), rhs, context));
        }
    }
    checks
}

/// Multilayer bound on a regular graph whose edges all have `κ ≥ δ > 0`, with
/// mean aggregation in every layer.
pub fn verify_multilayer(g: &Graph, spec: &MpnnSpec, x: &FeatureMatrix, k_max: usize) -> Result<Vec<BoundCheck>> {
    if let Some(k) = spec.layers.iter().position(|l| l.aggregator != Aggregator::Mean) {
        return Err(Error::HypothesisNotMet(format!("layer {k} does not aggregate by mean")));
    }
    let profile = curvature::curvature_profile(g);
    let (n, delta) = multilayer_hypothesis(g, &profile)?;
    let trajectory = mpnn::forward(g, x, spec)?;
    Ok(multilayer_checks(
        g,
        spec,
        &trajectory,
        n,
        &delta,
        k_max,
        CheckContext::graph("input"),
    ))
}

pub(crate) fn jacobian_checks(ab: &mpnn::AlphaBeta, graph: &str) -> [BoundCheck; 2] {
    let ctx = |side: &str| CheckContext {
        detail: Some(side.to_string()),
        ..CheckContext::edge(graph, ab.u, ab.v)
    };
    [
        BoundCheck::exact(
            CheckName::JacobianRatio,
            Inequality::new(ab.alpha.clone(), ab.alpha_kappa_bound.clone()),
            ctx("alpha"),
        ),
        BoundCheck::exact(
            CheckName::JacobianRatio,
            Inequality::new(ab.beta.clone(), ab.beta_kappa_bound.clone()),
            ctx("beta"),
        ),
    ]
}

/// `α, β ≤ (n(κ+2)+4) / (2·Σ(deg+1))` with the proof-side denominators.
pub fn verify_jacobian_ratio(g: &Graph, spec: &MpnnSpec, edge: (usize, usize), k: usize) -> Result<[BoundCheck; 2]> {
    let ab = mpnn::alpha_beta(g, spec, edge.0, edge.1, k)?;
    Ok(jacobian_checks(&ab, "input"))
}

pub(crate) fn diameter_check(g: &Graph, profile: &CurvatureProfile, graph: &str) -> Result<BoundCheck> {
    let delta = profile.min_kappa();
    if !delta.is_positive() {
        return Err(Error::HypothesisNotMet(format!(
            "minimum edge curvature {} <= 0",
            ratio::format(delta)
        )));
    }
    let bound = ratio::floor_i64(&(ratio::int(2) / delta));
    Ok(BoundCheck::exact(
        CheckName::Diameter,
        Inequality::new(ratio::int(g.diameter() as i64), ratio::int(bound)),
        CheckContext::graph(graph),
    ))
}

/// `diam(G) ≤ ⌊2/δ⌋` where `δ > 0` is the minimum edge curvature.
pub fn verify_diameter(g: &Graph) -> Result<BoundCheck> {
    diameter_check(g, &curvature::curvature_profile(g), "input")
}
