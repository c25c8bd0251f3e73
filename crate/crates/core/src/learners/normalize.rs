//! Z-score normalization with population standard deviation.

use super::{DesignMatrix, EPS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Normalization {
    /// Columns with sd below the guard map to all-zero.
    pub fn apply_row(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(&x, (&m, &s))| if s < EPS { 0.0 } else { (x - m) / s })
            .collect()
    }

    pub fn identity(p: usize) -> Self {
        Normalization {
            mean: vec![0.0; p],
            sd: vec![1.0; p],
        }
    }
}

/// Fit per-column mean and population sd (÷n), return the normalized matrix
/// and the transform parameters for reuse at inference time.
pub fn zscore_fit_apply(x: &DesignMatrix) -> (DesignMatrix, Normalization) {
    let (n, p) = (x.n, x.p);
    let mut mean = vec![0.0; p];
    for i in 0..n {
        for (j, m) in mean.iter_mut().enumerate() {
            *m += x.x[i * p + j];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = vec![0.0; p];
    for i in 0..n {
        for j in 0..p {
            let d = x.x[i * p + j] - mean[j];
            var[j] += d * d;
        }
    }
    let sd: Vec<f64> = var.iter().map(|v| (v / n as f64).sqrt()).collect();

    let norm = Normalization { mean, sd };
    let mut out = Vec::with_capacity(n * p);
    for i in 0..n {
        out.extend(norm.apply_row(x.row(i)));
    }
    (
        DesignMatrix {
            n,
            p,
            x: out,
            y: x.y.clone(),
            names: x.names.clone(),
        },
        norm,
    )
}
