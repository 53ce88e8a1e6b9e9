use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Node features, one row per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(DMatrix<f64>);

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("feature values must be finite".into()));
        }
        Ok(FeatureMatrix(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let channels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != channels) {
            return Err(Error::DimensionMismatch("ragged feature rows".into()));
        }
        Self::new(DMatrix::from_fn(rows.len(), channels, |i, j| rows[i][j]))
    }

    pub fn zeros(rows: usize, channels: usize) -> Self {
        FeatureMatrix(DMatrix::zeros(rows, channels))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn channels(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn row(&self, u: usize) -> DVector<f64> {
        self.0.row(u).transpose()
    }

    pub fn row_vec(&self, u: usize) -> Vec<f64> {
        self.0.row(u).iter().copied().collect()
    }

    /// Euclidean norm of one vertex's features.
    pub fn norm(&self, u: usize) -> f64 {
        self.0.row(u).norm()
    }

    /// Euclidean distance between two vertices' features.
    pub fn gap(&self, u: usize, v: usize) -> f64 {
        (self.0.row(u) - self.0.row(v)).norm()
    }

    /// `vertex,c0,c1,...` header, then one row per vertex.
    pub fn to_csv(&self) -> String {
        self.to_csv_labeled(|u| u as u64)
    }

    /// Like [`FeatureMatrix::to_csv`] with row `u` written under `label(u)`.
    pub fn to_csv_labeled(&self, label: impl Fn(usize) -> u64) -> String {
        let mut out = String::from("vertex");
        for c in 0..self.channels() {
            out.push_str(&format!(",c{c}"));
        }
        out.push('\n');
        for u in 0..self.rows() {
            out.push_str(&label(u).to_string());
            for x in self.0.row(u).iter() {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }

    /// Rows may appear in any order but must cover vertices `0..n` exactly once.
    pub fn from_csv(text: &str) -> Result<Self> {
        parse_csv(text, None, |id| usize::try_from(id).ok())
    }

    /// Rows keyed by original vertex ids; row order follows `labels`, which
    /// must be sorted.
    pub fn from_csv_labeled(text: &str, labels: &[u64]) -> Result<Self> {
        parse_csv(text, Some(labels.len()), |id| labels.binary_search(&id).ok())
    }
}

fn parse_csv(text: &str, expected: Option<usize>, resolve: impl Fn(u64) -> Option<usize>) -> Result<FeatureMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Format("empty features CSV".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"vertex") {
        return Err(Error::Format("features CSV header must start with \"vertex\"".into()));
    }
    let channels = columns.len() - 1;
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; expected.unwrap_or(0)];
    for (idx, line) in lines {
        let line_no = idx + 1;
        let bad = |message: String| Error::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != channels + 1 {
            return Err(bad(format!("expected {} fields, found {}", channels + 1, fields.len())));
        }
        let vertex = fields[0]
            .parse::<u64>()
            .ok()
            .and_then(&resolve)
            .ok_or_else(|| bad(format!("unknown vertex id {:?}", fields[0])))?;
        let values = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("bad feature value {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if rows.len() <= vertex {
            rows.resize(vertex + 1, None);
        }
        if rows[vertex].replace(values).is_some() {
            return Err(bad(format!("vertex {} listed twice", fields[0])));
        }
    }
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(v, r)| r.ok_or_else(|| Error::Format(format!("features missing for vertex {v}"))))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Ok(FeatureMatrix::zeros(0, channels));
    }
    FeatureMatrix::from_rows(&rows)
}
