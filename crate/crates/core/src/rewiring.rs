//! Greedy curvature-guided rewiring.
//!
//! Each step trims the most positively curved edges and bridges the most
//! negatively curved ones with a support edge between their neighborhoods.
//! A step that increases the number of out-of-band edges is rolled back and
//! ends the loop.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::curvature::{self, bottleneck_sets, CurvatureProfile};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ratio::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewireConfig {
    pub tau_neg: f64,
    pub tau_pos: f64,
    pub max_iterations: usize,
    pub additions_per_step: usize,
    pub removals_per_step: usize,
    /// Recorded in the trace. The procedure itself is deterministic.
    pub seed: u64,
    pub preserve_connectivity: bool,
}

impl Default for RewireConfig {
    fn default() -> Self {
        RewireConfig {
            tau_neg: -0.5,
            tau_pos: 0.75,
            max_iterations: 10,
            additions_per_step: 1,
            removals_per_step: 1,
            seed: 0,
            preserve_connectivity: true,
        }
    }
}

impl RewireConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tau_neg.is_finite() || !self.tau_pos.is_finite() {
            return Err(Error::InvalidConfig("thresholds must be finite".into()));
        }
        if self.tau_neg >= self.tau_pos {
            return Err(Error::InvalidConfig(format!(
                "tau_neg ({}) must be below tau_pos ({})",
                self.tau_neg, self.tau_pos
            )));
        }
        if self.additions_per_step == 0 || self.removals_per_step == 0 {
            return Err(Error::InvalidConfig("per-step budgets must be positive".into()));
        }
        Ok(())
    }

    fn band(&self) -> (Rational, Rational) {
        let exact = |x: f64| BigRational::from_float(x).expect("finite threshold");
        (exact(self.tau_neg), exact(self.tau_pos))
    }
}

/// Counts of edge curvatures in bins of width 1/4 over `[-2, 1]`; `κ = 1`
/// falls in the last bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KappaHistogram {
    pub lower: i32,
    pub bin_width: &'static str,
    pub counts: Vec<usize>,
}

const HISTOGRAM_BINS: usize = 12;

impl KappaHistogram {
    pub fn of(profile: &CurvatureProfile) -> Self {
        let mut counts = vec![0; HISTOGRAM_BINS];
        for report in &profile.edges {
            let bin = ratio::floor_i64(&((&report.kappa + ratio::int(2)) * ratio::int(4)));
            counts[(bin.max(0) as usize).min(HISTOGRAM_BINS - 1)] += 1;
        }
        KappaHistogram {
            lower: -2,
            bin_width: "1/4",
            counts,
        }
    }
}

fn out_of_band(profile: &CurvatureProfile, band: &(Rational, Rational)) -> usize {
    profile
        .edges
        .iter()
        .filter(|r| r.kappa < band.0 || r.kappa > band.1)
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub iteration: usize,
    pub removed: Vec<(usize, usize)>,
    /// Support edge added for each negatively curved edge, `(edge, support)`.
    pub added: Vec<((usize, usize), (usize, usize))>,
    pub histogram_before: KappaHistogram,
    pub histogram_after: KappaHistogram,
    pub out_of_band_before: usize,
    pub out_of_band_after: usize,
    /// False when the step made the out-of-band count worse and was reverted.
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    InBand,
    NoActionPossible,
    MaxIterations,
    RolledBack,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewireTrace {
    pub config: RewireConfig,
    pub initial_out_of_band: usize,
    pub final_out_of_band: usize,
    pub stop: StopReason,
    pub steps: Vec<StepRecord>,
}

/// Support edge `(p, q)` across `(u, v)` with `p ∈ N_u∖Ñ_v`, `q ∈ N_v∖Ñ_u`,
/// minimizing the largest S-set participation afterwards, then lexicographic.
fn best_support(g: &Graph, u: usize, v: usize) -> Option<(usize, usize)> {
    let exclusive = |a: usize, b: usize| -> Vec<usize> {
        let closed_b = g.closed_neighborhood(b);
        g.neighbors(a)
            .iter()
            .copied()
            .filter(|p| closed_b.binary_search(p).is_err())
            .collect()
    };
    let (side_u, side_v) = (exclusive(u, v), exclusive(v, u));
    let mut best: Option<(usize, (usize, usize))> = None;
    for &p in &side_u {
        for &q in &side_v {
            if p == q || g.has_edge(p, q) {
                continue;
            }
            let candidate = g.with_edge(p, q).expect("absent edge between distinct vertices");
            let load = bottleneck_sets(&candidate, u, v)
                .expect("edge survives")
                .max_participation;
            let key = (load, (p.min(q), p.max(q)));
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    best.map(|(_, edge)| edge)
}

struct Proposal {
    graph: Graph,
    removed: Vec<(usize, usize)>,
    added: Vec<((usize, usize), (usize, usize))>,
}

fn propose(g: &Graph, profile: &CurvatureProfile, cfg: &RewireConfig) -> Result<Proposal> {
    let band = cfg.band();
    let mut positive: Vec<_> = profile.edges.iter().filter(|r| r.kappa > band.1).collect();
    let mut negative: Vec<_> = profile.edges.iter().filter(|r| r.kappa < band.0).collect();
    if positive.is_empty() && negative.is_empty() {
        return Err(Error::NoActionPossible);
    }
    // stable sorts keep canonical edge order among ties
    positive.sort_by(|a, b| b.kappa.cmp(&a.kappa));
    negative.sort_by(|a, b| a.kappa.cmp(&b.kappa));

    let mut graph = g.clone();
    let mut removed = Vec::new();
    for report in positive {
        if removed.len() == cfg.removals_per_step {
            break;
        }
        if graph.edge_count() == 1 {
            break;
        }
        let next = graph.without_edge(report.u, report.v)?;
        if cfg.preserve_connectivity && !next.is_connected() {
            continue;
        }
        graph = next;
        removed.push((report.u, report.v));
    }

    let mut added = Vec::new();
    for report in negative {
        if added.len() == cfg.additions_per_step {
            break;
        }
        // an earlier removal in this step may have taken the edge itself
        if !graph.has_edge(report.u, report.v) {
            continue;
        }
        if let Some((p, q)) = best_support(&graph, report.u, report.v) {
            graph = graph.with_edge(p, q)?;
            added.push(((report.u, report.v), (p, q)));
        }
    }
    if removed.is_empty() && added.is_empty() {
        return Err(Error::NoActionPossible);
    }
    Ok(Proposal { graph, removed, added })
}

fn step_with_profile(
    g: &Graph,
    profile: &CurvatureProfile,
    cfg: &RewireConfig,
    iteration: usize,
) -> Result<(Graph, CurvatureProfile, StepRecord)> {
    let band = cfg.band();
    let proposal = propose(g, profile, cfg)?;
    let after = curvature::curvature_profile(&proposal.graph);
    let record = StepRecord {
        iteration,
        removed: proposal.removed,
        added: proposal.added,
        histogram_before: KappaHistogram::of(profile),
        histogram_after: KappaHistogram::of(&after),
        out_of_band_before: out_of_band(profile, &band),
        out_of_band_after: out_of_band(&after, &band),
        accepted: true,
    };
    Ok((proposal.graph, after, record))
}

/// One rewiring step against a curvature profile of `g`. Fails with
/// [`Error::NoActionPossible`] when every edge is in band or no out-of-band
/// edge admits an action.
pub fn rewire_step(g: &Graph, profile: &CurvatureProfile, cfg: &RewireConfig) -> Result<(Graph, StepRecord)> {
    cfg.validate()?;
    step_with_profile(g, profile, cfg, 0).map(|(graph, _, record)| (graph, record))
}

/// Repeats [`rewire_step`] with fresh curvature until the graph is in band, no
/// action applies, a step is rolled back, or `max_iterations` is reached.
pub fn rewire_loop(g: &Graph, cfg: &RewireConfig) -> Result<(Graph, RewireTrace)> {
    cfg.validate()?;
    let band = cfg.band();
    let mut graph = g.clone();
    let mut profile = curvature::curvature_profile(&graph);
    let initial = out_of_band(&profile, &band);
    let mut steps = Vec::new();
    let mut stop = if initial == 0 {
        StopReason::InBand
    } else {
        StopReason::MaxIterations
    };
    if initial > 0 {
        for iteration in 0..cfg.max_iterations {
            match step_with_profile(&graph, &profile, cfg, iteration) {
                Err(Error::NoActionPossible) => {
                    stop = StopReason::NoActionPossible;
                    break;
                }
                Err(e) => return Err(e),
                Ok((next, next_profile, mut record)) => {
                    if record.out_of_band_after > record.out_of_band_before {
                        record.accepted = false;
                        steps.push(record);
                        stop = StopReason::RolledBack;
                        break;
                    }
                    let done = record.out_of_band_after == 0;
                    steps.push(record);
                    graph = next;
                    profile = next_profile;
                    if done {
                        stop = StopReason::InBand;
                        break;
                    }
                }
            }
        }
    }
    let trace = RewireTrace {
        config: cfg.clone(),
        initial_out_of_band: initial,
        final_out_of_band: out_of_band(&profile, &band),
        stop,
        steps,
    };
    Ok((graph, trace))
}
