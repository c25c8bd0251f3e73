//! Experiment report types and their Markdown renderings. Reports are
//! fully deterministic; wall-clock timings go to a separate timings file.

use super::RunConfig;
use crate::learners::EvalReport;
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Output of `train-radiomics`: the four classical models on one feature
/// table, with cross-validated and held-out metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiomicsReport {
    pub version: String,
    pub seed: u64,
    pub features_path: String,
    pub model_paths: Vec<String>,
    pub models: Vec<EvalReport>,
    pub config: RunConfig,
}

/// One CNN preset evaluated at patient level on held-out patients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnEvalRow {
    pub model: String,
    pub patient_accuracy: f64,
    pub patient_auc: f64,
    pub test_patients: usize,
    /// Per-epoch (loss, training accuracy).
    pub curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnReport {
    pub version: String,
    pub seed: u64,
    pub manifest_path: String,
    pub checkpoint_paths: Vec<String>,
    pub rows: Vec<CnnEvalRow>,
    pub config: RunConfig,
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Markdown table shaped like the classical-model results table
/// (model rows, accuracy and AUC columns, best values bolded).
pub fn markdown_radiomics(r: &RadiomicsReport) -> String {
    let best_acc = r
        .models
        .iter()
        .map(|m| m.holdout_accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_auc = r
        .models
        .iter()
        .map(|m| m.holdout_auc)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = String::from("# Radiomics model performance\n\n");
    out.push_str(&format!("Seed {}, features `{}`.\n\n", r.seed, r.features_path));
    out.push_str("| Model | CV Accuracy (%) | CV AUC (%) | Holdout Accuracy (%) | Holdout AUC (%) |\n");
    out.push_str("|---|---|---|---|---|\n");
    for m in &r.models {
        let bold = |v: f64, best: f64| {
            if (v - best).abs() < 1e-12 {
                format!("**{}**", pct(v))
            } else {
                pct(v)
            }
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            m.model,
            pct(m.cv_accuracy),
            pct(m.cv_auc),
            bold(m.holdout_accuracy, best_acc),
            bold(m.holdout_auc, best_auc),
        ));
    }
    out.push_str("\nCV metrics average the per-fold values; holdout metrics use the held-out test split.\n");
    out
}

/// Markdown table shaped like the deep-learning results table.
pub fn markdown_cnn(r: &CnnReport) -> String {
    let best_acc = r
        .rows
        .iter()
        .map(|m| m.patient_accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_auc = r
        .rows
        .iter()
        .map(|m| m.patient_auc)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = String::from("# Deep learning model performance\n\n");
    out.push_str(&format!(
        "Seed {}, {} held-out patients, slice majority voting.\n\n",
        r.seed,
        r.rows.first().map_or(0, |m| m.test_patients)
    ));
    out.push_str("| Model | Accuracy (%) | AUC (%) |\n|---|---|---|\n");
    for m in &r.rows {
        let bold = |v: f64, best: f64| {
            if (v - best).abs() < 1e-12 {
                format!("**{}**", pct(v))
            } else {
                pct(v)
            }
        };
        out.push_str(&format!(
            "| {} | {} | {} |\n",
            m.model,
            bold(m.patient_accuracy, best_acc),
            bold(m.patient_auc, best_auc),
        ));
    }
    out.push_str(&format!("\nBest results are bolded. {best_acc:.4} accuracy / {best_auc:.4} AUC.\n"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markdown_bolds_the_best_model() {
        let mk = |name: &str, acc: f64, auc: f64| EvalReport {
            model: name.into(),
            folds: vec![],
            cv_accuracy: acc,
            cv_auc: auc,
            holdout_accuracy: acc,
            holdout_auc: auc,
            confusion: [[0, 0], [0, 0]],
            roc: vec![],
            seed: 1,
        };
        let r = RadiomicsReport {
            version: TOOL_VERSION.into(),
            seed: 1,
            features_path: "features.csv".into(),
            model_paths: vec![],
            models: vec![mk("lasso", 0.9, 0.95), mk("svm", 0.8, 0.85)],
            config: RunConfig::default(),
        };
        let md = markdown_radiomics(&r);
        assert!(md.contains("| lasso | 90.00 | 95.00 | **90.00** | **95.00** |"));
        assert!(md.contains("| svm | 80.00 | 85.00 | 80.00 | 85.00 |"));
        assert!(md.contains("| Model |"));
    }
}
