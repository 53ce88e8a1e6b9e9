//! Deterministic graph families and the standard test corpus.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Erdős–Rényi draws are retried on fresh RNG streams until connected.
pub const ER_RETRY_BUDGET: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Complete(usize),
    Path(usize),
    Cycle(usize),
    /// Center 0 plus `n` leaves.
    Star(usize),
    /// Two adjacent centers of degree `a` and `b` (each counts the other center).
    DoubleStar(usize, usize),
    /// Two `K_k` joined by one bridge between vertex `k-1` and `k`.
    Barbell(usize),
    /// `K_{2m}` minus a perfect matching (`i` is not adjacent to `i+m`).
    CocktailParty(usize),
    ErdosRenyi {
        n: usize,
        p: f64,
        seed: u64,
    },
    RandomTree {
        n: usize,
        seed: u64,
    },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Complete(n) => write!(f, "complete({n})"),
            Family::Path(n) => write!(f, "path({n})"),
            Family::Cycle(n) => write!(f, "cycle({n})"),
            Family::Star(n) => write!(f, "star({n})"),
            Family::DoubleStar(a, b) => write!(f, "double_star({a},{b})"),
            Family::Barbell(k) => write!(f, "barbell({k},{k})"),
            Family::CocktailParty(m) => write!(f, "cocktail_party({m})"),
            Family::ErdosRenyi { n, p, seed } => write!(f, "erdos_renyi({n},{p},{seed})"),
            Family::RandomTree { n, seed } => write!(f, "random_tree({n},{seed})"),
        }
    }
}

fn need(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Unsatisfiable(what.to_string()))
    }
}

pub fn generate(family: Family) -> Result<Graph> {
    match family {
        Family::Complete(n) => {
            need(n >= 2, "complete(n) needs n >= 2")?;
            Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
        }
        Family::Path(n) => {
            need(n >= 2, "path(n) needs n >= 2")?;
            Graph::new(n, (1..n).map(|v| (v - 1, v)))
        }
        Family::Cycle(n) => {
            need(n >= 3, "cycle(n) needs n >= 3")?;
            Graph::new(n, (0..n).map(|v| (v, (v + 1) % n)))
        }
        Family::Star(n) => {
            need(n >= 1, "star(n) needs n >= 1")?;
            Graph::new(n + 1, (1..=n).map(|v| (0, v)))
        }
        Family::DoubleStar(a, b) => {
            need(a >= 1 && b >= 1, "double_star(a,b) needs a, b >= 1")?;
            let mut edges = vec![(0, 1)];
            let mut next = 2;
            for _ in 1..a {
                edges.push((0, next));
                next += 1;
            }
            for _ in 1..b {
                edges.push((1, next));
                next += 1;
            }
            Graph::new(next, edges)
        }
        Family::Barbell(k) => {
            need(k >= 2, "barbell(k,k) needs k >= 2")?;
            let mut edges = Vec::new();
            for offset in [0, k] {
                for u in 0..k {
                    for v in u + 1..k {
                        edges.push((offset + u, offset + v));
                    }
                }
            }
            edges.push((k - 1, k));
            Graph::new(2 * k, edges)
        }
        Family::CocktailParty(m) => {
            need(m >= 2, "cocktail_party(m) needs m >= 2")?;
            let n = 2 * m;
            Graph::new(
                n,
                (0..n).flat_map(|u| (u + 1..n).filter(move |&v| v != u + m).map(move |v| (u, v))),
            )
        }
        Family::ErdosRenyi { n, p, seed } => erdos_renyi(n, p, seed),
        Family::RandomTree { n, seed } => random_tree(n, seed),
    }
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    need(n >= 2, "erdos_renyi needs n >= 2")?;
    need((0.0..=1.0).contains(&p), "erdos_renyi needs 0 <= p <= 1")?;
    for salt in 0..ER_RETRY_BUDGET {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(salt);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        if let Ok(g) = Graph::new(n, edges) {
            return Ok(g);
        }
    }
    Err(Error::Unsatisfiable(format!(
        "erdos_renyi({n},{p},{seed}) stayed disconnected for {ER_RETRY_BUDGET} draws"
    )))
}

/// Uniform labeled tree from a random Prüfer sequence.
fn random_tree(n: usize, seed: u64) -> Result<Graph> {
    need(n >= 2, "random_tree needs n >= 2")?;
    if n == 2 {
        return Graph::new(2, [(0, 1)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = leaves.pop_first().expect("prufer decoding always has a leaf");
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let last: Vec<usize> = leaves.into_iter().collect();
    edges.push((last[0], last[1]));
    Graph::new(n, edges)
}

/// One representative of every isomorphism class of connected graphs on `n`
/// vertices (`n <= 6`). Representatives use the lexicographically smallest
/// edge mask of their class.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!((2..=6).contains(&n), "exhaustive enumeration only for 2..=6 vertices");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let index = |u: usize, v: usize| pairs.iter().position(|&p| p == (u.min(v), u.max(v))).unwrap();
    let perms = permutations(n);
    // pair index under each permutation
    let images: Vec<Vec<usize>> = perms
        .iter()
        .map(|perm| pairs.iter().map(|&(u, v)| index(perm[u], perm[v])).collect())
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 1u32..(1 << pairs.len()) {
        let canonical = images
            .iter()
            .map(|img| {
                (0..pairs.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .fold(0u32, |acc, i| acc | 1 << img[i])
            })
            .min()
            .unwrap();
        if canonical != mask || !seen.insert(canonical) {
            continue;
        }
        let edges = (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]);
        if let Ok(g) = Graph::new(n, edges) {
            out.push(g);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct NamedGraph {
    pub name: String,
    pub graph: Graph,
}

impl NamedGraph {
    pub fn new(name: impl Into<String>, graph: Graph) -> Self {
        NamedGraph {
            name: name.into(),
            graph,
        }
    }

    fn family(family: Family) -> Self {
        NamedGraph::new(family.to_string(), generate(family).expect("corpus family is valid"))
    }
}

/// Six vertices in four loose color groups, used by the smoothing demo.
pub fn demo_graph() -> Graph {
    Graph::new(
        6,
        [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5), (4, 5)],
    )
    .expect("demo graph is valid")
}

/// Red, red, blue, green, gray, blue.
pub fn demo_features() -> Vec<[f64; 3]> {
    vec![
        [0.95, 0.10, 0.10],
        [0.85, 0.15, 0.05],
        [0.10, 0.20, 0.90],
        [0.10, 0.85, 0.15],
        [0.50, 0.50, 0.50],
        [0.05, 0.10, 0.80],
    ]
}

/// The standard corpus: every connected 5-vertex graph, the deterministic
/// families up to 20 vertices, random trees, and 50 Erdős–Rényi(20, 0.3) draws.
pub fn default_corpus() -> Vec<NamedGraph> {
    let mut corpus: Vec<NamedGraph> = connected_graphs(5)
        .into_iter()
        .enumerate()
        .map(|(i, g)| NamedGraph::new(format!("connected5[{i}]"), g))
        .collect();
    let mut families = Vec::new();
    families.extend((3..=8).map(Family::Complete));
    families.extend((2..=20).map(Family::Path));
    families.extend((3..=20).map(Family::Cycle));
    families.extend((2..=19).map(Family::Star));
    for a in 2..=6 {
        families.extend((a..=6).map(|b| Family::DoubleStar(a, b)));
    }
    families.extend((3..=10).map(Family::Barbell));
    families.extend((2..=10).map(Family::CocktailParty));
    for n in [5, 10, 15, 20] {
        families.extend((0..5).map(|seed| Family::RandomTree { n, seed }));
    }
    families.extend((0..50).map(|seed| Family::ErdosRenyi { n: 20, p: 0.3, seed }));
    corpus.extend(families.into_iter().map(NamedGraph::family));
    corpus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_shapes() {
        assert_eq!(generate(Family::Complete(4)).unwrap().edge_count(), 6);
        let ds = generate(Family::DoubleStar(3, 3)).unwrap();
        assert_eq!((ds.vertex_count(), ds.edge_count()), (6, 5));
        assert_eq!((ds.degree(0), ds.degree(1)), (3, 3));
        let bb = generate(Family::Barbell(3)).unwrap();
        assert_eq!(bb.edge_count(), 7);
        assert!(bb.has_edge(2, 3));
        let cp = generate(Family::CocktailParty(3)).unwrap();
        assert_eq!(cp.regular_degree(), Some(4));
        assert_eq!(generate(Family::Star(4)).unwrap().neighbors(0), &[1, 2, 3, 4]);
        assert_eq!(generate(Family::Cycle(5)).unwrap().regular_degree(), Some(2));
    }

    #[test]
    fn random_families_are_deterministic() {
        let er = Family::ErdosRenyi {
            n: 20,
            p: 0.3,
            seed: 42,
        };
        assert_eq!(generate(er).unwrap(), generate(er).unwrap());
        let t = Family::RandomTree { n: 15, seed: 3 };
        let tree = generate(t).unwrap();
        assert_eq!(tree, generate(t).unwrap());
        assert_eq!(tree.edge_count(), 14);
    }

    #[test]
    fn impossible_requests() {
        let er = Family::ErdosRenyi { n: 20, p: 0.0, seed: 1 };
        assert!(matches!(generate(er), Err(Error::Unsatisfiable(_))));
        assert!(matches!(generate(Family::Cycle(2)), Err(Error::Unsatisfiable(_))));
    }

    #[test]
    fn connected_graph_counts() {
        // OEIS A001349
        assert_eq!(connected_graphs(3).len(), 2);
        assert_eq!(connected_graphs(4).len(), 6);
        assert_eq!(connected_graphs(5).len(), 21);
    }
}
