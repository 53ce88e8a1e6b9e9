//! Exact Wasserstein-1 distance between local random walks.
//!
//! Masses are scaled to integers by the lcm of their denominators, the
//! transportation problem is solved as an integer min-cost flow, and the
//! optimal cost is divided back exactly. No floating point touches the
//! optimizer.

mod flow;
mod simplex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ratio::{self, Rational};
use flow::MinCostFlow;

/// Default support-product cap for [`wasserstein1_oracle`].
pub const ORACLE_MAX_CELLS: usize = 64;

/// Probability measure on a sorted set of vertices, every mass strictly positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalMeasure {
    support: Vec<usize>,
    mass: Vec<Rational>,
}

impl LocalMeasure {
    pub fn new(entries: impl IntoIterator<Item = (usize, Rational)>) -> Result<Self> {
        let mut entries: Vec<(usize, Rational)> = entries.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidConfig("measure support has repeated vertices".into()));
        }
        if entries.iter().any(|(_, m)| !m.is_positive()) {
            return Err(Error::InvalidConfig("measure masses must be positive".into()));
        }
        let total: Rational = entries.iter().map(|(_, m)| m.clone()).sum();
        if !total.is_one() {
            return Err(Error::InvalidConfig(format!(
                "measure masses sum to {}",
                ratio::format(&total)
            )));
        }
        let (support, mass) = entries.into_iter().unzip();
        Ok(LocalMeasure { support, mass })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn mass(&self) -> &[Rational] {
        &self.mass
    }

    pub fn mass_at(&self, v: usize) -> Rational {
        match self.support.binary_search(&v) {
            Ok(i) => self.mass[i].clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Least common denominator of the masses.
    fn common_denominator(&self) -> BigInt {
        self.mass.iter().fold(BigInt::one(), |acc, m| acc.lcm(m.denom()))
    }
}

/// Uniform mass `1/deg(u)` on each neighbor of `u`.
pub fn local_measure(g: &Graph, u: usize) -> LocalMeasure {
    let deg = g.degree(u) as i64;
    assert!(deg > 0, "vertex {u} is isolated");
    LocalMeasure {
        support: g.neighbors(u).to_vec(),
        mass: vec![ratio::rat(1, deg); deg as usize],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanEntry {
    pub p: usize,
    pub q: usize,
    #[serde(with = "crate::ratio")]
    pub mass: Rational,
}

/// One optimal coupling. Only `cost` is canonical; other optimal plans may exist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransportPlan {
    pub entries: Vec<PlanEntry>,
    #[serde(with = "crate::ratio")]
    pub cost: Rational,
}

impl TransportPlan {
    /// Exact marginal and cost consistency against both measures.
    pub fn check(&self, g: &Graph, mu: &LocalMeasure, mv: &LocalMeasure) -> Result<()> {
        let mut rows = vec![Rational::zero(); mu.support.len()];
        let mut cols = vec![Rational::zero(); mv.support.len()];
        let mut cost = Rational::zero();
        for e in &self.entries {
            let i = mu.support.binary_search(&e.p).map_err(|_| bad("row outside support"))?;
            let j = mv
                .support
                .binary_search(&e.q)
                .map_err(|_| bad("column outside support"))?;
            if !e.mass.is_positive() {
                return Err(bad("non-positive plan entry"));
            }
            rows[i] += &e.mass;
            cols[j] += &e.mass;
            let d = g
                .bfs_distances(e.p, None)
                .get(e.q)
                .ok_or_else(|| bad("unreachable pair"))?;
            cost += &e.mass * ratio::int(d as i64);
        }
        if rows != mu.mass {
            return Err(bad("row marginals differ"));
        }
        if cols != mv.mass {
            return Err(bad("column marginals differ"));
        }
        if cost != self.cost {
            return Err(bad("cost differs from plan"));
        }
        Ok(())
    }
}

fn bad(what: &str) -> Error {
    Error::InvalidConfig(format!("transport plan: {what}"))
}

/// Hop distances from every support vertex of `from` to every support vertex of
/// `to`, with BFS truncated at `depth_limit`.
pub fn distance_matrix(g: &Graph, from: &[usize], to: &[usize], depth_limit: Option<u32>) -> Result<Vec<Vec<i64>>> {
    from.iter()
        .map(|&p| {
            let oracle = g.bfs_distances(p, depth_limit);
            to.iter()
                .map(|&q| {
                    oracle
                        .get(q)
                        .map(i64::from)
                        .ok_or_else(|| Error::InvalidConfig(format!("vertex {q} not within reach of {p}")))
                })
                .collect()
        })
        .collect()
}

fn scaled(measure: &LocalMeasure, scale: &BigInt) -> Result<Vec<i64>> {
    measure
        .mass
        .iter()
        .map(|m| {
            (m * BigRational::from_integer(scale.clone()))
                .to_integer()
                .to_i64()
                .ok_or(Error::Overflow("mass scaling"))
        })
        .collect()
}

/// W₁ over full hop distances.
pub fn wasserstein1(g: &Graph, mu: &LocalMeasure, mv: &LocalMeasure) -> Result<TransportPlan> {
    wasserstein1_within(g, mu, mv, None)
}

/// W₁ with the ground distance computed by BFS truncated at `depth_limit`.
/// Every support pair must be within the limit.
pub fn wasserstein1_within(
    g: &Graph,
    mu: &LocalMeasure,
    mv: &LocalMeasure,
    depth_limit: Option<u32>,
) -> Result<TransportPlan> {
    let cost = distance_matrix(g, &mu.support, &mv.support, depth_limit)?;
    wasserstein1_with_costs(mu, mv, &cost)
}

/// Exact W₁ for an explicit integer ground-cost matrix
/// (`cost[i][j]` between `mu.support()[i]` and `mv.support()[j]`).
pub fn wasserstein1_with_costs(mu: &LocalMeasure, mv: &LocalMeasure, cost: &[Vec<i64>]) -> Result<TransportPlan> {
    if cost.len() != mu.support.len() || cost.iter().any(|row| row.len() != mv.support.len()) {
        return Err(Error::DimensionMismatch(format!(
            "cost matrix must be {} x {}",
            mu.support.len(),
            mv.support.len()
        )));
    }
    let scale = mu.common_denominator().lcm(&mv.common_denominator());
    let supply = scaled(mu, &scale)?;
    let demand = scaled(mv, &scale)?;
    let total: i64 = supply.iter().sum();
    let (a, b) = (supply.len(), demand.len());
    let (source, sink) = (a + b, a + b + 1);

    let mut mcf = MinCostFlow::new(a + b + 2);
    for (i, &s) in supply.iter().enumerate() {
        mcf.add_arc(source, i, s, 0);
    }
    for (j, &t) in demand.iter().enumerate() {
        mcf.add_arc(a + j, sink, t, 0);
    }
    let mut cells = Vec::with_capacity(a * b);
    for (i, row) in cost.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            cells.push((i, j, mcf.add_arc(i, a + j, total, c)));
        }
    }
    let (flow, scaled_cost) = mcf.run(source, sink, total);
    assert_eq!(flow, total, "bipartite transport is always feasible");

    let denom = BigRational::from_integer(scale);
    let entries = cells
        .into_iter()
        .filter_map(|(i, j, arc)| {
            let f = mcf.flow(arc);
            (f > 0).then(|| PlanEntry {
                p: mu.support[i],
                q: mv.support[j],
                mass: ratio::int(f) / &denom,
            })
        })
        .collect();
    Ok(TransportPlan {
        entries,
        cost: ratio::int(scaled_cost) / &denom,
    })
}

/// Reference W₁ by a dense tableau simplex over full BFS distances. Rejects
/// problems with more than [`ORACLE_MAX_CELLS`] support pairs.
pub fn wasserstein1_oracle(g: &Graph, mu: &LocalMeasure, mv: &LocalMeasure) -> Result<Rational> {
    wasserstein1_oracle_capped(g, mu, mv, ORACLE_MAX_CELLS)
}

pub fn wasserstein1_oracle_capped(
    g: &Graph,
    mu: &LocalMeasure,
    mv: &LocalMeasure,
    max_cells: usize,
) -> Result<Rational> {
    let cells = mu.support.len() * mv.support.len();
    if cells > max_cells {
        return Err(Error::TooLarge { cells, cap: max_cells });
    }
    let cost = distance_matrix(g, &mu.support, &mv.support, None)?;
    let scale = mu.common_denominator().lcm(&mv.common_denominator());
    let optimum = simplex::solve_transportation(&scaled(mu, &scale)?, &scaled(mv, &scale)?, &cost)?;
    Ok(ratio::int(optimum) / BigRational::from_integer(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Family};
    use crate::ratio::rat;

    #[test]
    fn local_measure_examples() {
        let k3 = generate(Family::Complete(3)).unwrap();
        let m = local_measure(&k3, 0);
        assert_eq!(m.support(), &[1, 2]);
        assert_eq!(m.mass(), &[rat(1, 2), rat(1, 2)]);
        let p3 = generate(Family::Path(3)).unwrap();
        assert_eq!(local_measure(&p3, 0).mass(), &[rat(1, 1)]);
        let s4 = generate(Family::Star(4)).unwrap();
        assert_eq!(local_measure(&s4, 0).mass(), &vec![rat(1, 4); 4][..]);
    }

    #[test]
    fn measure_validation() {
        assert!(LocalMeasure::new([(0, rat(1, 2)), (1, rat(1, 2))]).is_ok());
        assert!(LocalMeasure::new([(0, rat(1, 2)), (1, rat(1, 3))]).is_err());
        assert!(LocalMeasure::new([(0, rat(1, 2)), (0, rat(1, 2))]).is_err());
        assert!(LocalMeasure::new([(0, rat(3, 2)), (1, rat(-1, 2))]).is_err());
    }

    #[test]
    fn known_distances() {
        let k3 = generate(Family::Complete(3)).unwrap();
        let plan = wasserstein1(&k3, &local_measure(&k3, 0), &local_measure(&k3, 1)).unwrap();
        assert_eq!(plan.cost, rat(1, 2));
        plan.check(&k3, &local_measure(&k3, 0), &local_measure(&k3, 1)).unwrap();

        let m = local_measure(&k3, 2);
        let plan = wasserstein1(&k3, &m, &m).unwrap();
        assert_eq!(plan.cost, rat(0, 1));
        assert!(plan.entries.iter().all(|e| e.p == e.q));

        let ds = generate(Family::DoubleStar(3, 3)).unwrap();
        let (mu, mv) = (local_measure(&ds, 0), local_measure(&ds, 1));
        let plan = wasserstein1(&ds, &mu, &mv).unwrap();
        assert_eq!(plan.cost, rat(5, 3));
        plan.check(&ds, &mu, &mv).unwrap();
    }

    #[test]
    fn oracle_examples() {
        let p3 = generate(Family::Path(3)).unwrap();
        let w = wasserstein1_oracle(&p3, &local_measure(&p3, 0), &local_measure(&p3, 1)).unwrap();
        assert_eq!(w, rat(1, 1));
        let c4 = generate(Family::Cycle(4)).unwrap();
        let w = wasserstein1_oracle(&c4, &local_measure(&c4, 0), &local_measure(&c4, 1)).unwrap();
        assert_eq!(w, rat(1, 1));
        let ds = generate(Family::DoubleStar(3, 3)).unwrap();
        let w = wasserstein1_oracle(&ds, &local_measure(&ds, 0), &local_measure(&ds, 1)).unwrap();
        assert_eq!(w, rat(5, 3));
    }

    #[test]
    fn oracle_cap() {
        let k10 = generate(Family::Complete(10)).unwrap();
        let err = wasserstein1_oracle(&k10, &local_measure(&k10, 0), &local_measure(&k10, 1));
        assert_eq!(err, Err(Error::TooLarge { cells: 81, cap: 64 }));
        let w = wasserstein1_oracle_capped(&k10, &local_measure(&k10, 0), &local_measure(&k10, 1), 100);
        assert_eq!(w.unwrap(), rat(1, 9));
    }

    #[test]
    fn truncated_distance_must_cover_supports() {
        let p5 = generate(Family::Path(5)).unwrap();
        let (mu, mv) = (local_measure(&p5, 0), local_measure(&p5, 4));
        assert!(wasserstein1_within(&p5, &mu, &mv, Some(1)).is_err());
        assert_eq!(wasserstein1(&p5, &mu, &mv).unwrap().cost, rat(2, 1));
    }
}
