//! Message-passing forward simulation
//! `X^{k+1}_u = φ_k(⊕_{p ∈ Ñ_u} ψ_k(X^k_p))`, linear-case Jacobians, and
//! influence distributions.

mod features;
mod spec;

pub use features::FeatureMatrix;
pub use spec::{spectral_norm, Aggregator, LayerSpec, Mat, MpnnSpec, Update, UpdateMenu, NORM_SAFETY};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{self, bottleneck_sets};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ratio::{self, Rational};

/// Runs every layer and returns `X^0, X^1, …, X^K`.
pub fn forward(g: &Graph, x: &FeatureMatrix, spec: &MpnnSpec) -> Result<Vec<FeatureMatrix>> {
    if x.rows() != g.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows for {} vertices",
            x.rows(),
            g.vertex_count()
        )));
    }
    spec.validate(x.channels())?;
    let mut out = vec![x.clone()];
    for layer in &spec.layers {
        let next = apply_layer(g, out.last().unwrap(), layer)?;
        out.push(next);
    }
    Ok(out)
}

fn apply_layer(g: &Graph, x: &FeatureMatrix, layer: &LayerSpec) -> Result<FeatureMatrix> {
    let messages = x.matrix() * layer.message.0.transpose();
    let out_dim = layer.output_dim()?;
    let mut next = DMatrix::zeros(g.vertex_count(), out_dim);
    for u in 0..g.vertex_count() {
        let mut acc = messages.row(u).transpose();
        for &p in g.neighbors(u) {
            acc += messages.row(p).transpose();
        }
        if layer.aggregator == Aggregator::Mean {
            acc /= (g.degree(u) + 1) as f64;
        }
        next.set_row(u, &layer.update.apply(acc).transpose());
    }
    FeatureMatrix::new(next)
}

/// `Σ_{(u,v) ∈ E} |X_u − X_v|` with the Euclidean norm.
pub fn dirichlet_energy(g: &Graph, x: &FeatureMatrix) -> f64 {
    g.edges().iter().map(|&(u, v)| x.gap(u, v)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingTrajectory {
    pub features: Vec<FeatureMatrix>,
    pub energies: Vec<f64>,
}

/// Repeated pure averaging over extended neighborhoods.
pub fn smoothing_demo(g: &Graph, x: &FeatureMatrix, iterations: usize) -> Result<SmoothingTrajectory> {
    let spec = MpnnSpec::identity(iterations, x.channels(), Aggregator::Mean);
    let features = forward(g, x, &spec)?;
    let energies = features.iter().map(|f| dirichlet_energy(g, f)).collect();
    Ok(SmoothingTrajectory { features, energies })
}

/// Exact entries of `(A + I)^depth`: walks of length `depth` that may pause at
/// a vertex.
pub fn walk_counts(g: &Graph, depth: usize) -> Result<Vec<Vec<u128>>> {
    let n = g.vertex_count();
    let mut counts: Vec<Vec<u128>> = (0..n).map(|u| (0..n).map(|w| u128::from(u == w)).collect()).collect();
    for _ in 0..depth {
        counts = counts
            .par_iter()
            .map(|row| {
                (0..n)
                    .map(|w| {
                        g.closed_neighborhood(w)
                            .iter()
                            .try_fold(0u128, |acc, &x| acc.checked_add(row[x]))
                            .ok_or(Error::Overflow("walk counts"))
                    })
                    .collect::<Result<Vec<u128>>>()
            })
            .collect::<Result<_>>()?;
    }
    Ok(counts)
}

/// Jacobians `∂X^depth_u / ∂X^0_w` of a linear, sum-aggregating network.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianStack {
    pub depth: usize,
    pub walk_counts: Vec<Vec<u128>>,
    /// `J_{depth-1} ⋯ J_0` with `J_k = J_φk · J_ψk`.
    pub layer_product: DMatrix<f64>,
}

impl JacobianStack {
    pub fn block(&self, u: usize, w: usize) -> DMatrix<f64> {
        &self.layer_product * self.walk_counts[u][w] as f64
    }
}

pub fn linear_jacobians(g: &Graph, spec: &MpnnSpec, depth: usize) -> Result<JacobianStack> {
    spec.require_linear_sum(0..depth)?;
    let input = spec
        .layers
        .first()
        .map(LayerSpec::input_dim)
        .ok_or_else(|| Error::DimensionMismatch("spec has no layers".into()))?;
    spec.validate(input)?;
    let mut product = DMatrix::identity(input, input);
    for layer in &spec.layers[..depth] {
        product = layer.jacobian().expect("checked linear") * product;
    }
    Ok(JacobianStack {
        depth,
        walk_counts: walk_counts(g, depth)?,
        layer_product: product,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Influence {
    #[serde(serialize_with = "serialize_rationals")]
    pub exact: Vec<Rational>,
    /// Computed from the assembled Jacobian blocks.
    pub float: Vec<f64>,
}

fn serialize_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ratio::format))
}

/// `I_u(w) = sum(J_uw) / Σ_p sum(J_up)` for a linear sum-aggregating network.
/// `exact` uses walk counts; `float` sums the actual Jacobian entries.
pub fn influence_distribution(g: &Graph, spec: &MpnnSpec, depth: usize, u: usize) -> Result<Influence> {
    g.check_vertex(u)?;
    let stack = linear_jacobians(g, spec, depth)?;
    let entry_sum = stack.layer_product.sum();
    if entry_sum == 0.0 {
        return Err(Error::DegenerateNormalizer);
    }
    let row = &stack.walk_counts[u];
    let total: u128 = row.iter().sum();
    let exact = row.iter().map(|&c| Rational::new(c.into(), total.into())).collect();
    let sums: Vec<f64> = (0..g.vertex_count()).map(|w| stack.block(u, w).sum()).collect();
    let normalizer: f64 = sums.iter().sum();
    let float = sums.iter().map(|s| s / normalizer).collect();
    Ok(Influence { exact, float })
}

/// Two-layer Jacobian ratios across an edge and their curvature bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaBeta {
    pub u: usize,
    pub v: usize,
    /// Largest `[∂X_u^{k+2}/∂X_q^k]` share over `q ∈ Ñ_v∖{u}`.
    #[serde(with = "crate::ratio")]
    pub alpha: Rational,
    pub alpha_argmax: usize,
    /// Largest `[∂X_v^{k+2}/∂X_p^k]` share over `p ∈ Ñ_u∖{v}`.
    #[serde(with = "crate::ratio")]
    pub beta: Rational,
    pub beta_argmax: usize,
    /// `Σ_{w ∈ Ñ_u} (deg w + 1)`, the total two-step walk count into `u`.
    pub denominator_u: u64,
    pub denominator_v: u64,
    pub s_size: usize,
    /// `max(deg u, deg v)`.
    pub n: usize,
    #[serde(with = "crate::ratio")]
    pub kappa: Rational,
    /// `(|S| + 2) / denominator_u`.
    #[serde(with = "crate::ratio")]
    pub alpha_path_bound: Rational,
    /// `(n(κ+2) + 4) / (2·denominator_u)`.
    #[serde(with = "crate::ratio")]
    pub alpha_kappa_bound: Rational,
    #[serde(with = "crate::ratio")]
    pub beta_path_bound: Rational,
    #[serde(with = "crate::ratio")]
    pub beta_kappa_bound: Rational,
    /// The κ-form with the denominators swapped (`Ñ_v` for α, `Ñ_u` for β).
    #[serde(with = "crate::ratio")]
    pub alpha_kappa_bound_swapped: Rational,
    #[serde(with = "crate::ratio")]
    pub beta_kappa_bound_swapped: Rational,
    /// All four path/κ bounds on α and β with the `Ñ_u`/`Ñ_v` pairing hold.
    pub bound_ok: bool,
}

/// Share of all two-step Jacobian mass into `a` that comes from `q`:
/// `|Ñ_a ∩ Ñ_q| / Σ_{w ∈ Ñ_a} (deg w + 1)`.
pub fn two_step_share(g: &Graph, a: usize, q: usize) -> Rational {
    let walks = crate::graph::sorted_intersection(&g.closed_neighborhood(a), &g.closed_neighborhood(q)).len();
    let total: usize = g.closed_neighborhood(a).iter().map(|&w| g.degree(w) + 1).sum();
    ratio::rat(walks as i64, total as i64)
}

/// Needs layers `k` and `k+1` linear with sum aggregation. The ratios depend
/// only on two-step walk counts, since every block shares the same matrix factor.
pub fn alpha_beta(g: &Graph, spec: &MpnnSpec, u: usize, v: usize, k: usize) -> Result<AlphaBeta> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if !g.has_edge(u, v) {
        return Err(Error::NotAnEdge(u, v));
    }
    spec.require_linear_sum(k..k + 2)?;
    Ok(alpha_beta_structural(g, u, v))
}

/// Ratios and bounds from walk counts alone.
pub fn alpha_beta_structural(g: &Graph, u: usize, v: usize) -> AlphaBeta {
    let kappa = curvature::ricci_curvature(g, u, v).expect("edge");
    let sets = bottleneck_sets(g, u, v).expect("edge");
    let two_step = |a: usize, b: usize| -> u64 {
        crate::graph::sorted_intersection(&g.closed_neighborhood(a), &g.closed_neighborhood(b)).len() as u64
    };
    let denominator = |a: usize| -> u64 { g.closed_neighborhood(a).iter().map(|&w| g.degree(w) as u64 + 1).sum() };
    // largest share into `a` from Ñ_b∖{a}; ties go to the smallest vertex
    let best = |a: usize, b: usize| -> (u64, usize) {
        g.closed_neighborhood(b)
            .into_iter()
            .filter(|&q| q != a)
            .map(|q| (two_step(a, q), q))
            .fold((0, usize::MAX), |best, (c, q)| if c > best.0 { (c, q) } else { best })
    };
    let (den_u, den_v) = (denominator(u), denominator(v));
    let (alpha_count, alpha_argmax) = best(u, v);
    let (beta_count, beta_argmax) = best(v, u);
    let r = |num: u64, den: u64| Rational::new(num.into(), den.into());

    let n = g.degree(u).max(g.degree(v));
    let s_size = sets.s_statement.len();
    let kappa_numer = ratio::int(n as i64) * (&kappa + ratio::int(2)) + ratio::int(4);
    let kappa_bound = |den: u64| &kappa_numer / ratio::int(2 * den as i64);

    let alpha = r(alpha_count, den_u);
    let beta = r(beta_count, den_v);
    let alpha_path_bound = r(s_size as u64 + 2, den_u);
    let beta_path_bound = r(s_size as u64 + 2, den_v);
    let alpha_kappa_bound = kappa_bound(den_u);
    let beta_kappa_bound = kappa_bound(den_v);
    let bound_ok =
        alpha <= alpha_path_bound && alpha <= alpha_kappa_bound && beta <= beta_path_bound && beta <= beta_kappa_bound;
    AlphaBeta {
        u,
        v,
        alpha,
        alpha_argmax,
        beta,
        beta_argmax,
        denominator_u: den_u,
        denominator_v: den_v,
        s_size,
        n,
        alpha_kappa_bound_swapped: kappa_bound(den_v),
        beta_kappa_bound_swapped: kappa_bound(den_u),
        kappa,
        alpha_path_bound,
        alpha_kappa_bound,
        beta_path_bound,
        beta_kappa_bound,
        bound_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Family};
    use crate::ratio::rat;

    fn p3() -> Graph {
        generate(Family::Path(3)).unwrap()
    }

    fn scalar(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&values.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn forward_examples() {
        let x = scalar(&[0.0, 0.0, 3.0]);
        let mean = forward(&p3(), &x, &MpnnSpec::identity(1, 1, Aggregator::Mean)).unwrap();
        assert_eq!(mean[1].matrix().as_slice(), &[0.0, 1.0, 1.5]);
        let sum = forward(&p3(), &x, &MpnnSpec::identity(1, 1, Aggregator::Sum)).unwrap();
        assert_eq!(sum[1].matrix().as_slice(), &[0.0, 3.0, 3.0]);

        let constant = FeatureMatrix::from_rows(&vec![vec![2.0, -1.0]; 5]).unwrap();
        let c5 = generate(Family::Cycle(5)).unwrap();
        let out = forward(&c5, &constant, &MpnnSpec::identity(4, 2, Aggregator::Mean)).unwrap();
        assert!(out.iter().all(|f| f == &constant));
    }

    #[test]
    fn forward_rejects_mismatches() {
        let x = scalar(&[0.0, 1.0]);
        let err = forward(&p3(), &x, &MpnnSpec::identity(1, 1, Aggregator::Sum));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        let x = scalar(&[0.0, 1.0, 2.0]);
        let err = forward(&p3(), &x, &MpnnSpec::identity(1, 2, Aggregator::Sum));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn smoothing_examples() {
        let x = scalar(&[0.0, 0.0, 3.0]);
        let t = smoothing_demo(&p3(), &x, 1).unwrap();
        assert_eq!(t.energies, vec![3.0, 1.5]);
        let t = smoothing_demo(&p3(), &x, 0).unwrap();
        assert_eq!(t.features, vec![x]);
    }

    #[test]
    fn walk_count_examples() {
        let w = walk_counts(&p3(), 2).unwrap();
        assert_eq!(w[0], vec![2, 2, 1]);
        assert_eq!(
            walk_counts(&p3(), 0).unwrap(),
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );
        let k3 = generate(Family::Complete(3)).unwrap();
        assert_eq!(walk_counts(&k3, 1).unwrap(), vec![vec![1; 3]; 3]);
    }

    #[test]
    fn influence_examples() {
        let spec = MpnnSpec::identity(4, 1, Aggregator::Sum);
        let inf = influence_distribution(&p3(), &spec, 2, 0).unwrap();
        assert_eq!(inf.exact, vec![rat(2, 5), rat(2, 5), rat(1, 5)]);
        assert!((inf.float[0] - 0.4).abs() < 1e-15);
        let inf = influence_distribution(&p3(), &spec, 0, 1).unwrap();
        assert_eq!(inf.exact, vec![rat(0, 1), rat(1, 1), rat(0, 1)]);
        let k3 = generate(Family::Complete(3)).unwrap();
        let inf = influence_distribution(&k3, &spec, 1, 2).unwrap();
        assert_eq!(inf.exact, vec![rat(1, 3); 3]);
    }

    #[test]
    fn influence_errors() {
        let mean = MpnnSpec::identity(2, 1, Aggregator::Mean);
        assert!(matches!(
            influence_distribution(&p3(), &mean, 2, 0),
            Err(Error::NotLinear(_))
        ));
        let mut clamp = MpnnSpec::identity(2, 1, Aggregator::Sum);
        clamp.layers[1].update = Update::Clamp { bound: 1.0 };
        assert!(matches!(
            influence_distribution(&p3(), &clamp, 2, 0),
            Err(Error::NotLinear(_))
        ));
        let zero = MpnnSpec::new(vec![LayerSpec {
            aggregator: Aggregator::Sum,
            message: Mat::from_rows(&[vec![1.0, -1.0], vec![0.0, 0.0]]).unwrap(),
            update: Update::Identity,
        }]);
        assert_eq!(
            influence_distribution(&p3(), &zero, 1, 0),
            Err(Error::DegenerateNormalizer)
        );
    }

    #[test]
    fn jacobian_factorization_matches_walks() {
        let w = Mat::from_rows(&[vec![0.5, 1.0], vec![-1.0, 0.25]]).unwrap();
        let spec = MpnnSpec::new(vec![
            LayerSpec {
                aggregator: Aggregator::Sum,
                message: w.clone(),
                update: Update::Identity,
            },
            LayerSpec {
                aggregator: Aggregator::Sum,
                message: Mat::identity(2),
                update: Update::Linear { matrix: w.clone() },
            },
        ]);
        let stack = linear_jacobians(&p3(), &spec, 2).unwrap();
        assert_eq!(stack.walk_counts[0], vec![2, 2, 1]);
        let expected = &w.0 * &w.0 * 2.0;
        assert_eq!(stack.block(0, 1), expected);
    }

    #[test]
    fn alpha_beta_examples() {
        let spec = MpnnSpec::identity(2, 1, Aggregator::Sum);
        let ab = alpha_beta(&p3(), &spec, 0, 1, 0).unwrap();
        // into 0 from q in {1, 2}: walks 2 and 1 out of 5
        assert_eq!(ab.denominator_u, 5);
        assert_eq!((ab.alpha.clone(), ab.alpha_argmax), (rat(2, 5), 1));
        assert!(ab.bound_ok);
        assert_eq!(two_step_share(&p3(), 0, 2), rat(1, 5));

        let ds = generate(Family::DoubleStar(3, 3)).unwrap();
        let ab = alpha_beta(&ds, &spec, 0, 1, 0).unwrap();
        assert_eq!(ab.denominator_u, 12);
        assert_eq!(ab.alpha_path_bound, rat(1, 4));
        assert_eq!(ab.alpha_kappa_bound, rat(1, 3));
        assert!(ab.alpha <= rat(1, 4));

        let k3 = generate(Family::Complete(3)).unwrap();
        let ab = alpha_beta(&k3, &spec, 0, 1, 0).unwrap();
        assert_eq!(ab.alpha, ab.beta);

        assert_eq!(alpha_beta(&p3(), &spec, 0, 2, 0).unwrap_err(), Error::NotAnEdge(0, 2));
        let mean = MpnnSpec::identity(2, 1, Aggregator::Mean);
        assert!(matches!(alpha_beta(&p3(), &mean, 0, 1, 0), Err(Error::NotLinear(_))));
        assert!(matches!(
            alpha_beta(&p3(), &spec, 0, 1, 1),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
