//! Ollivier-Ricci curvature `κ(u,v) = 1 − W₁(m_u, m_v) / d(u,v)` and the
//! neighborhood statistics used by the shared-neighbor and bottleneck bounds.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{sorted_intersection, Graph};
use crate::ratio::{self, Rational};
use crate::transport::{self, local_measure};

/// For adjacent `u, v`, every `p ∈ N(u)` and `q ∈ N(v)` satisfy `d(p, q) ≤ 3`.
pub const EDGE_DEPTH_LIMIT: u32 = 3;

/// Exact curvature between two distinct vertices. Edges use BFS truncated at
/// depth 3; other pairs use full distances and divide by `d(u, v)`.
pub fn ricci_curvature(g: &Graph, u: usize, v: usize) -> Result<Rational> {
    Ok(curvature_and_w1(g, u, v)?.0)
}

fn curvature_and_w1(g: &Graph, u: usize, v: usize) -> Result<(Rational, Rational)> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v {
        return Err(Error::SameVertex(u));
    }
    let (mu, mv) = (local_measure(g, u), local_measure(g, v));
    if g.has_edge(u, v) {
        let plan = transport::wasserstein1_within(g, &mu, &mv, Some(EDGE_DEPTH_LIMIT))?;
        let kappa = ratio::int(1) - &plan.cost;
        return Ok((kappa, plan.cost));
    }
    let d = g
        .bfs_distances(u, None)
        .get(v)
        .ok_or_else(|| Error::GraphInvalid("vertices are disconnected".into()))?;
    let w1 = transport::wasserstein1(g, &mu, &mv)?.cost;
    Ok((ratio::int(1) - &w1 / ratio::int(d as i64), w1))
}

/// An exact inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inequality {
    #[serde(with = "crate::ratio")]
    pub lhs: Rational,
    #[serde(with = "crate::ratio")]
    pub rhs: Rational,
}

impl Inequality {
    pub fn new(lhs: Rational, rhs: Rational) -> Self {
        Inequality { lhs, rhs }
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }

    pub fn slack(&self) -> Rational {
        &self.rhs - &self.lhs
    }
}

/// Neighborhood sets around an edge, oriented so that `deg(u) = n ≥ m = deg(v)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BottleneckSets {
    pub u: usize,
    pub v: usize,
    pub n: usize,
    pub m: usize,
    /// Pairs `(p, q)` with `p ∈ Ñ_u∖{v}`, `q ∈ Ñ_v∖{u}` and `p = q` or `p ~ q`,
    /// stored as `(min, max)`; self-pairs are the mutual neighbors.
    pub s_statement: Vec<(usize, usize)>,
    /// `|N_u ∩ N_v|`.
    pub n0: usize,
    /// Edges between `N_u∖({v} ∪ N_v)` and `N_v∖({u} ∪ N_u)`.
    pub n1: usize,
    /// Maximum matching size among the `n1` edges.
    pub n1_matching: usize,
    /// Largest number of `s_statement` pairs sharing one vertex.
    pub max_participation: usize,
    /// Every vertex lies on at most `n/m` pairs of `s_statement`.
    pub hypothesis_holds: bool,
}

/// Orients `(u, v)` so the first endpoint has the larger degree (ties keep the order).
pub fn orient(g: &Graph, u: usize, v: usize) -> (usize, usize) {
    if g.degree(u) >= g.degree(v) {
        (u, v)
    } else {
        (v, u)
    }
}

pub fn bottleneck_sets(g: &Graph, u: usize, v: usize) -> Result<BottleneckSets> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if !g.has_edge(u, v) {
        return Err(Error::NotAnEdge(u, v));
    }
    let (u, v) = orient(g, u, v);
    let (n, m) = (g.degree(u), g.degree(v));
    let side_u: Vec<usize> = g.closed_neighborhood(u).into_iter().filter(|&p| p != v).collect();
    let side_v: Vec<usize> = g.closed_neighborhood(v).into_iter().filter(|&q| q != u).collect();

    let mut s = Vec::new();
    for &p in &side_u {
        for &q in &side_v {
            if p == q || g.has_edge(p, q) {
                s.push((p.min(q), p.max(q)));
            }
        }
    }
    s.sort_unstable();
    s.dedup();

    let mut participation = vec![0usize; g.vertex_count()];
    for &(p, q) in &s {
        participation[p] += 1;
        if p != q {
            participation[q] += 1;
        }
    }
    let max_participation = participation.iter().copied().max().unwrap_or(0);
    let hypothesis_holds = participation.iter().all(|&c| c * m <= n);

    let common = sorted_intersection(g.neighbors(u), g.neighbors(v));
    let exclusive = |x: usize, other: usize| -> Vec<usize> {
        g.neighbors(x)
            .iter()
            .copied()
            .filter(|&p| p != other && !g.has_edge(p, other))
            .collect()
    };
    let (only_u, only_v) = (exclusive(u, v), exclusive(v, u));
    let links: Vec<Vec<usize>> = only_u
        .iter()
        .map(|&p| (0..only_v.len()).filter(|&j| g.has_edge(p, only_v[j])).collect())
        .collect();
    let n1 = links.iter().map(Vec::len).sum();

    Ok(BottleneckSets {
        u,
        v,
        n,
        m,
        s_statement: s,
        n0: common.len(),
        n1,
        n1_matching: max_bipartite_matching(&links, only_v.len()),
        max_participation,
        hypothesis_holds,
    })
}

/// Kuhn's augmenting-path matching; `links[i]` lists right vertices of left `i`.
fn max_bipartite_matching(links: &[Vec<usize>], right: usize) -> usize {
    fn augment(i: usize, links: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &links[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, links, seen, owner)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..links.len())
        .filter(|&i| augment(i, links, &mut vec![false; right], &mut owner))
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeCurvatureReport {
    pub u: usize,
    pub v: usize,
    #[serde(with = "crate::ratio")]
    pub kappa: Rational,
    pub kappa_float: f64,
    #[serde(with = "crate::ratio")]
    pub w1: Rational,
    pub deg_u: usize,
    pub deg_v: usize,
    pub common_neighbors: usize,
    pub s_size: usize,
    pub n0: usize,
    pub n1: usize,
    pub n1_matching: usize,
    pub hypothesis_holds: bool,
    #[serde(skip)]
    pub bottleneck: BottleneckSets,
}

impl EdgeCurvatureReport {
    pub fn max_degree(&self) -> usize {
        self.deg_u.max(self.deg_v)
    }
}

pub fn edge_report(g: &Graph, u: usize, v: usize) -> Result<EdgeCurvatureReport> {
    let (u, v) = (u.min(v), u.max(v));
    let sets = bottleneck_sets(g, u, v)?;
    let (kappa, w1) = curvature_and_w1(g, u, v)?;
    Ok(EdgeCurvatureReport {
        u,
        v,
        kappa_float: ratio::to_f64(&kappa),
        kappa,
        w1,
        deg_u: g.degree(u),
        deg_v: g.degree(v),
        common_neighbors: sets.n0,
        s_size: sets.s_statement.len(),
        n0: sets.n0,
        n1: sets.n1,
        n1_matching: sets.n1_matching,
        hypothesis_holds: sets.hypothesis_holds,
        bottleneck: sets,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub edge_count: usize,
    #[serde(with = "crate::ratio")]
    pub min_kappa: Rational,
    #[serde(with = "crate::ratio")]
    pub max_kappa: Rational,
    #[serde(with = "crate::ratio")]
    pub mean_kappa: Rational,
    pub min_kappa_float: f64,
    pub max_kappa_float: f64,
    pub mean_kappa_float: f64,
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureProfile {
    pub edges: Vec<EdgeCurvatureReport>,
    pub summary: ProfileSummary,
}

impl CurvatureProfile {
    pub fn get(&self, u: usize, v: usize) -> Option<&EdgeCurvatureReport> {
        let key = (u.min(v), u.max(v));
        self.edges
            .binary_search_by(|r| (r.u, r.v).cmp(&key))
            .ok()
            .map(|i| &self.edges[i])
    }

    /// Smallest edge curvature.
    pub fn min_kappa(&self) -> &Rational {
        &self.summary.min_kappa
    }
}

/// One report per edge in canonical order. Edges are evaluated in parallel.
pub fn curvature_profile(g: &Graph) -> CurvatureProfile {
    let edges: Vec<EdgeCurvatureReport> = g
        .edges()
        .par_iter()
        .map(|&(u, v)| edge_report(g, u, v).expect("canonical edge"))
        .collect();
    let kappas = edges.iter().map(|r| &r.kappa);
    let min = kappas.clone().min().cloned().expect("graph has an edge");
    let max = kappas.clone().max().cloned().expect("graph has an edge");
    let mean = kappas.clone().sum::<Rational>() / ratio::int(edges.len() as i64);
    let summary = ProfileSummary {
        edge_count: edges.len(),
        min_kappa_float: ratio::to_f64(&min),
        max_kappa_float: ratio::to_f64(&max),
        mean_kappa_float: ratio::to_f64(&mean),
        min_kappa: min,
        max_kappa: max,
        mean_kappa: mean,
        negative: kappas.clone().filter(|k| k.is_negative()).count(),
        zero: kappas.clone().filter(|k| k.is_zero()).count(),
        positive: kappas.filter(|k| k.is_positive()).count(),
    };
    CurvatureProfile { edges, summary }
}

/// `|N_u ∩ N_v| / max(deg u, deg v) ≥ κ(u, v)`, as `lhs = κ`, `rhs = shared fraction`.
pub fn shared_neighbor_bound(report: &EdgeCurvatureReport) -> Inequality {
    let shared = ratio::rat(report.common_neighbors as i64, report.max_degree() as i64);
    Inequality::new(report.kappa.clone(), shared)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BottleneckBound {
    /// `|S| ≤ n(κ+2)/2`, only evaluated when the participation hypothesis holds.
    pub statement: Option<Inequality>,
    /// `3·n0 + 2·n1 ≤ n(κ+2)`, always evaluated.
    pub strong: Inequality,
}

pub fn bottleneck_bound(sets: &BottleneckSets, kappa: &Rational) -> BottleneckBound {
    let n = ratio::int(sets.n as i64);
    let scaled = &n * (kappa + ratio::int(2));
    let statement = sets
        .hypothesis_holds
        .then(|| Inequality::new(ratio::int(sets.s_statement.len() as i64), &scaled / ratio::int(2)));
    let strong = Inequality::new(ratio::int(3 * sets.n0 as i64 + 2 * sets.n1 as i64), scaled);
    BottleneckBound { statement, strong }
}
