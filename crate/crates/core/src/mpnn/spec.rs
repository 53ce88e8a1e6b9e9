//! Layer configuration: message matrix, aggregator, update map.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Certified norm bounds are inflated by this factor so that the bound side of
/// an inequality never undershoots the true value through SVD round-off.
pub const NORM_SAFETY: f64 = 1.0 + 1e-9;

/// Dense matrix that (de)serializes as a list of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat(pub DMatrix<f64>);

impl Mat {
    pub fn identity(d: usize) -> Self {
        Mat(DMatrix::identity(d, d))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(
                "matrix rows must be non-empty and equal length".into(),
            ));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("matrix entries must be finite".into()));
        }
        Ok(Mat(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])))
    }

    /// Certified upper bound on the spectral norm.
    pub fn operator_norm(&self) -> f64 {
        spectral_norm(&self.0) * NORM_SAFETY
    }
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..self.0.nrows())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Mat::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Sum,
    Mean,
}

/// Update map. Every variant carries a certified Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Update {
    Identity,
    Linear {
        matrix: Mat,
    },
    /// Componentwise clamp to `[-bound, bound]`.
    Clamp {
        bound: f64,
    },
    Abs,
    /// `x` for `x ≥ 0`, `slope·x` otherwise, with `0 ≤ slope ≤ 1`.
    LeakyRelu {
        slope: f64,
    },
    /// Applied first to last.
    Compose {
        steps: Vec<Update>,
    },
}

impl Update {
    pub fn apply(&self, x: DVector<f64>) -> DVector<f64> {
        match self {
            Update::Identity => x,
            Update::Linear { matrix } => &matrix.0 * x,
            Update::Clamp { bound } => x.map(|t| t.clamp(-bound, *bound)),
            Update::Abs => x.map(f64::abs),
            Update::LeakyRelu { slope } => x.map(|t| if t >= 0.0 { t } else { slope * t }),
            Update::Compose { steps } => steps.iter().fold(x, |acc, s| s.apply(acc)),
        }
    }

    pub fn output_dim(&self, input: usize) -> Result<usize> {
        match self {
            Update::Linear { matrix } => {
                if matrix.0.ncols() != input {
                    return Err(Error::DimensionMismatch(format!(
                        "linear update expects {} inputs, got {input}",
                        matrix.0.ncols()
                    )));
                }
                Ok(matrix.0.nrows())
            }
            Update::Compose { steps } => steps.iter().try_fold(input, |d, s| s.output_dim(d)),
            _ => Ok(input),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Update::Clamp { bound } if !(bound.is_finite() && *bound >= 0.0) => Err(Error::InvalidConfig(
                "clamp bound must be finite and non-negative".into(),
            )),
            Update::LeakyRelu { slope } if !(0.0..=1.0).contains(slope) => {
                Err(Error::InvalidConfig("leaky slope must lie in [0, 1]".into()))
            }
            Update::Compose { steps } => steps.iter().try_for_each(Update::validate),
            _ => Ok(()),
        }
    }

    /// Certified Lipschitz constant in the Euclidean norm.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Update::Linear { matrix } => matrix.operator_norm(),
            Update::Compose { steps } => steps.iter().map(Update::lipschitz).product(),
            _ => 1.0,
        }
    }

    pub fn is_linear(&self) -> bool {
        match self {
            Update::Identity | Update::Linear { .. } => true,
            Update::Compose { steps } => steps.iter().all(Update::is_linear),
            _ => false,
        }
    }

    /// Constant Jacobian of a linear update acting on `input` dimensions.
    pub fn jacobian(&self, input: usize) -> Option<DMatrix<f64>> {
        match self {
            Update::Identity => Some(DMatrix::identity(input, input)),
            Update::Linear { matrix } => Some(matrix.0.clone()),
            Update::Compose { steps } => {
                let mut acc = DMatrix::identity(input, input);
                let mut dim = input;
                for s in steps {
                    let j = s.jacobian(dim)?;
                    dim = j.nrows();
                    acc = j * acc;
                }
                Some(acc)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub aggregator: Aggregator,
    /// Message map `ψ`, a `d_mid × d_in` matrix.
    pub message: Mat,
    pub update: Update,
}

impl LayerSpec {
    pub fn input_dim(&self) -> usize {
        self.message.0.ncols()
    }

    pub fn output_dim(&self) -> Result<usize> {
        self.update.output_dim(self.message.0.nrows())
    }

    /// Certified `M` with `|ψ(x)| ≤ M|x|`.
    pub fn message_bound(&self) -> f64 {
        self.message.operator_norm()
    }

    pub fn lipschitz(&self) -> f64 {
        self.update.lipschitz()
    }

    pub fn is_linear(&self) -> bool {
        self.update.is_linear()
    }

    /// `J_φ · J_ψ` for a linear layer.
    pub fn jacobian(&self) -> Option<DMatrix<f64>> {
        let j_update = self.update.jacobian(self.message.0.nrows())?;
        Some(j_update * &self.message.0)
    }

    /// GCN with the degree-normalized (mean) propagation.
    pub fn gcn_mean(weight: Mat, activation: Update) -> Self {
        LayerSpec {
            aggregator: Aggregator::Mean,
            message: weight,
            update: activation,
        }
    }

    /// GraphSAGE, mean-aggregator variant.
    pub fn graphsage_mean(weight: Mat, activation: Update) -> Self {
        Self::gcn_mean(weight, activation)
    }

    /// GIN-0: identity message, sum aggregation, and an MLP update of linear
    /// layers separated by clamps.
    pub fn gin0(dim: usize, mlp: Vec<Mat>, clamp: f64) -> Self {
        let mut steps = Vec::new();
        for (i, w) in mlp.into_iter().enumerate() {
            if i > 0 {
                steps.push(Update::Clamp { bound: clamp });
            }
            steps.push(Update::Linear { matrix: w });
        }
        LayerSpec {
            aggregator: Aggregator::Sum,
            message: Mat::identity(dim),
            update: Update::Compose { steps },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpnnSpec {
    pub layers: Vec<LayerSpec>,
}

impl MpnnSpec {
    pub fn new(layers: Vec<LayerSpec>) -> Self {
        MpnnSpec { layers }
    }

    /// `count` layers of pure averaging (or summing) with identity maps.
    pub fn identity(count: usize, dim: usize, aggregator: Aggregator) -> Self {
        MpnnSpec {
            layers: (0..count)
                .map(|_| LayerSpec {
                    aggregator,
                    message: Mat::identity(dim),
                    update: Update::Identity,
                })
                .collect(),
        }
    }

    /// Checks the dimension chain starting from `input` channels and returns
    /// the output channel count.
    pub fn validate(&self, input: usize) -> Result<usize> {
        self.layers.iter().enumerate().try_fold(input, |d, (k, layer)| {
            layer.update.validate()?;
            if layer.input_dim() != d {
                return Err(Error::DimensionMismatch(format!(
                    "layer {k} expects {} channels, got {d}",
                    layer.input_dim()
                )));
            }
            layer.output_dim()
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("spec JSON: {e}")))
    }

    /// Errors unless `range` layers are all linear with sum aggregation.
    pub fn require_linear_sum(&self, range: std::ops::Range<usize>) -> Result<()> {
        if range.end > self.layers.len() {
            return Err(Error::DimensionMismatch(format!(
                "need {} layers, spec has {}",
                range.end,
                self.layers.len()
            )));
        }
        for k in range {
            let layer = &self.layers[k];
            if !layer.is_linear() {
                return Err(Error::NotLinear(format!("layer {k} has a nonlinear update")));
            }
            if layer.aggregator != Aggregator::Sum {
                return Err(Error::NotLinear(format!("layer {k} does not aggregate by sum")));
            }
        }
        Ok(())
    }
}

/// Which update maps random specs may draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMenu {
    /// Identity or a random square matrix.
    Linear,
    /// Anything with a certified constant: linear, clamp, abs, leaky, compositions.
    Lipschitz,
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat(DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0)))
}

fn random_update<R: Rng>(rng: &mut R, dim: usize, menu: UpdateMenu) -> Update {
    let choices = match menu {
        UpdateMenu::Linear => 2,
        UpdateMenu::Lipschitz => 6,
    };
    match rng.random_range(0..choices) {
        0 => Update::Identity,
        1 => Update::Linear {
            matrix: random_matrix(rng, dim, dim),
        },
        2 => Update::Clamp {
            bound: rng.random_range(0.25..2.0),
        },
        3 => Update::Abs,
        4 => Update::LeakyRelu {
            slope: rng.random_range(0.0..=1.0),
        },
        _ => Update::Compose {
            steps: vec![
                Update::Linear {
                    matrix: random_matrix(rng, dim, dim),
                },
                Update::Clamp {
                    bound: rng.random_range(0.25..2.0),
                },
            ],
        },
    }
}

impl MpnnSpec {
    /// `count` layers on `dim` channels with message entries uniform in [-1, 1].
    pub fn random<R: Rng>(rng: &mut R, count: usize, dim: usize, aggregator: Aggregator, menu: UpdateMenu) -> Self {
        MpnnSpec {
            layers: (0..count)
                .map(|_| LayerSpec {
                    aggregator,
                    message: random_matrix(rng, dim, dim),
                    update: random_update(rng, dim, menu),
                })
                .collect(),
        }
    }
}
