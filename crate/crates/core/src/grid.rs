//! Real samples on a two-axis rectilinear grid.

use crate::error::{Error, Result};

/// Where a sampled function has been cut off.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Truncation {
    /// Largest neglected magnitude beyond the grid edge, when estimated.
    pub edge_magnitude: Option<f64>,
    pub note: String,
}

/// `values[i * cols.len() + j]` samples `f(rows[i], cols[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation: Truncation,
}

impl GridFunction {
    pub fn new(rows: Vec<f64>, cols: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows.len() * cols.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                rows.len(),
                cols.len()
            )));
        }
        for (name, axis) in [("row", &rows), ("column", &cols)] {
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::GridMismatch(format!("{name} axis is not strictly increasing")));
            }
        }
        Ok(Self { rows, cols, values, truncation: Truncation::default() })
    }

    pub fn from_fn(rows: Vec<f64>, cols: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).map(|(r, c)| f(r, c)).collect();
        Self::new(rows, cols, values)
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.cols.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows.len()).map(|i| self.at(i, j)).collect()
    }

    pub fn sup_difference(&self, other: &GridFunction) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::GridMismatch("grids differ".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// Trapezoid weights for a (possibly nonuniform) axis.
pub fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = xs[i + 1] - xs[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Simpson weights when the axis is uniform with an even interval count, trapezoid otherwise.
pub fn integration_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n < 3 || (n - 1) % 2 != 0 {
        return trapezoid_weights(xs);
    }
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return trapezoid_weights(xs);
    }
    (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            c * h / 3.0
        })
        .collect()
}

/// `n` points evenly spaced on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}
