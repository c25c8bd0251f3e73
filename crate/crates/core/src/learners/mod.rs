//! Classical-ML stack: z-score normalization, LASSO-logistic, linear SVM,
//! random forest, gradient-boosted trees, ranking metrics, and the
//! stratified 10%-holdout + 5-fold cross-validation protocol.

mod linear;
mod metrics;
mod normalize;
mod split;
mod trees;

pub use linear::{soft_threshold, train_lasso_logistic, train_linear_svm};
pub use metrics::{accuracy, auc, confusion, roc_points, MetricError};
pub use normalize::{zscore_fit_apply, Normalization};
pub use split::{stratified_holdout_then_kfold, SplitError};
pub use trees::{gini, train_gbt, train_random_forest, BoostModel, ForestModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Division guard threshold shared across the trainers.
pub const EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("non-finite loss (diverging step size?) at iteration {0}")]
    NonFiniteLoss(usize),
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("design matrix contains non-finite entries")]
    NonFiniteData,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// Row-major feature matrix with paired binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub n: usize,
    pub p: usize,
    /// n × p, row-major.
    pub x: Vec<f64>,
    pub y: Vec<u8>,
    pub names: Vec<String>,
}

impl DesignMatrix {
    pub fn new(n: usize, p: usize, x: Vec<f64>, y: Vec<u8>, names: Vec<String>) -> Result<Self, LearnError> {
        assert_eq!(x.len(), n * p);
        assert_eq!(y.len(), n);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFiniteData);
        }
        Ok(DesignMatrix { n, p, x, y, names })
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn subset(&self, idx: &[usize]) -> DesignMatrix {
        let mut x = Vec::with_capacity(idx.len() * self.p);
        let mut y = Vec::with_capacity(idx.len());
        for &i in idx {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        DesignMatrix {
            n: idx.len(),
            p: self.p,
            x,
            y,
            names: self.names.clone(),
        }
    }

    pub fn has_both_classes(&self) -> bool {
        self.y.iter().any(|&l| l == 1) && self.y.iter().any(|&l| l == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    LassoLogistic,
    LinearSvm,
}

/// Linear classifier with its training-time normalization baked in, so
/// inference on raw feature rows applies the same transform.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub norm: Normalization,
}

impl LinearModel {
    /// Decision score on a raw (unnormalized) feature row.
    pub fn score(&self, raw_row: &[f64]) -> f64 {
        let z = self.norm.apply_row(raw_row);
        self.intercept + self.weights.iter().zip(&z).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn prob(&self, raw_row: &[f64]) -> f64 {
        sigmoid(self.score(raw_row))
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-fold and aggregate evaluation results.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalReport {
    pub model: String,
    /// (accuracy, auc) per CV fold.
    pub folds: Vec<(f64, f64)>,
    pub cv_accuracy: f64,
    pub cv_auc: f64,
    pub holdout_accuracy: f64,
    pub holdout_auc: f64,
    /// Confusion matrix on the holdout set: [[tn, fp], [fn, tp]].
    pub confusion: [[usize; 2]; 2],
    pub roc: Vec<(f64, f64)>,
    pub seed: u64,
}
