//! `fibra train-radiomics`: stratified holdout + k-fold CV over the four
//! classical models, with model files and a Table-shaped Markdown report.

use super::extract_cmd::read_feature_csv;
use super::report::{markdown_radiomics, RadiomicsReport, TOOL_VERSION};
use super::{write_json_atomic, CliError, RunConfig};
use crate::learners::{
    accuracy, auc, confusion, roc_points, stratified_holdout_then_kfold, train_gbt,
    train_lasso_logistic, train_linear_svm, train_random_forest, zscore_fit_apply, DesignMatrix,
    EvalReport,
};
use crate::rng::derive_seed;
use crate::volume_io::write_file_atomic;
use std::path::Path;
use std::time::Instant;

pub const MODEL_NAMES: [&str; 4] = ["lasso", "svm", "forest", "gbt"];

/// Train one model kind on `tr` and return its JSON serialization plus a
/// raw-row probability function.
#[allow(clippy::type_complexity)]
fn fit(
    kind: &str,
    cfg: &RunConfig,
    tr: &DesignMatrix,
    seed: u64,
) -> Result<(String, Box<dyn Fn(&[f64]) -> f64>), CliError> {
    Ok(match kind {
        "lasso" => {
            let (z, norm) = zscore_fit_apply(tr);
            let m = train_lasso_logistic(&z, cfg.lasso.lambda, cfg.lasso.iters, cfg.lasso.step, norm)?;
            let json = serde_json::to_string_pretty(&m).unwrap();
            (json, Box::new(move |row| m.prob(row)))
        }
        "svm" => {
            let (z, norm) = zscore_fit_apply(tr);
            let m = train_linear_svm(&z, cfg.svm.c, cfg.svm.epochs, cfg.svm.step0, norm)?;
            let json = serde_json::to_string_pretty(&m).unwrap();
            (json, Box::new(move |row| m.prob(row)))
        }
        "forest" => {
            let mtry = ((tr.p as f64).sqrt().floor() as usize).clamp(1, tr.p);
            let m = train_random_forest(tr, cfg.forest.trees, cfg.forest.max_depth, mtry, seed)?;
            let json = serde_json::to_string_pretty(&m).unwrap();
            (json, Box::new(move |row| m.prob(row)))
        }
        "gbt" => {
            let m = train_gbt(tr, cfg.gbt.trees, cfg.gbt.depth, cfg.gbt.nu, seed)?;
            let json = serde_json::to_string_pretty(&m).unwrap();
            (json, Box::new(move |row| m.prob(row)))
        }
        other => return Err(CliError::Usage(format!("unknown model {other}"))),
    })
}

fn eval_on(
    probe: &dyn Fn(&[f64]) -> f64,
    data: &DesignMatrix,
    idx: &[usize],
) -> Result<(f64, f64, Vec<u8>, Vec<f64>), CliError> {
    let probs: Vec<f64> = idx.iter().map(|&i| probe(data.row(i))).collect();
    let labels: Vec<u8> = idx.iter().map(|&i| data.y[i]).collect();
    let preds: Vec<u8> = probs.iter().map(|&p| u8::from(p > 0.5)).collect();
    let acc = accuracy(&preds, &labels);
    let a = auc(&probs, &labels)?;
    Ok((acc, a, preds, probs))
}

/// Run the full protocol for one model kind.
pub fn evaluate_model(
    kind: &str,
    cfg: &RunConfig,
    data: &DesignMatrix,
    test: &[usize],
    folds: &[Vec<usize>],
    seed: u64,
) -> Result<(EvalReport, String), CliError> {
    let mut fold_metrics = Vec::with_capacity(folds.len());
    for (fi, fold) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != fi)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        let (_, probe) = fit(kind, cfg, &data.subset(&train_idx), derive_seed(seed, fi as u64))?;
        // subset() reindexes, so evaluate through the original matrix.
        let (acc, a, _, _) = eval_on(probe.as_ref(), data, fold)?;
        fold_metrics.push((acc, a));
    }

    let train_idx: Vec<usize> = folds.iter().flat_map(|f| f.iter().copied()).collect();
    let (model_json, probe) = fit(
        kind,
        cfg,
        &data.subset(&train_idx),
        derive_seed(seed, folds.len() as u64),
    )?;
    let (h_acc, h_auc, preds, probs) = eval_on(probe.as_ref(), data, test)?;
    let labels: Vec<u8> = test.iter().map(|&i| data.y[i]).collect();

    let k = fold_metrics.len() as f64;
    Ok((
        EvalReport {
            model: kind.to_string(),
            cv_accuracy: fold_metrics.iter().map(|m| m.0).sum::<f64>() / k,
            cv_auc: fold_metrics.iter().map(|m| m.1).sum::<f64>() / k,
            folds: fold_metrics,
            holdout_accuracy: h_acc,
            holdout_auc: h_auc,
            confusion: confusion(&preds, &labels),
            roc: roc_points(&probs, &labels)?,
            seed,
        },
        model_json,
    ))
}

pub fn cmd_train_radiomics(cfg: &RunConfig, features: Option<&Path>) -> Result<(), CliError> {
    let default_features = cfg.out.join("features.csv");
    let features_path = features.unwrap_or(&default_features);
    let data = read_feature_csv(features_path)?;
    let (test, folds) =
        stratified_holdout_then_kfold(&data.y, cfg.split.test_frac, cfg.split.k, cfg.seed)?;
    std::fs::create_dir_all(&cfg.out)?;

    let mut models = Vec::new();
    let mut model_paths = Vec::new();
    let mut timings = String::new();
    for (mi, kind) in MODEL_NAMES.iter().enumerate() {
        let t0 = Instant::now();
        let (report, model_json) = evaluate_model(
            kind,
            cfg,
            &data,
            &test,
            &folds,
            derive_seed(cfg.seed, 1000 + mi as u64),
        )?;
        let path = cfg.out.join(format!("{kind}.json"));
        write_file_atomic(&path, model_json.as_bytes())?;
        timings.push_str(&format!("{kind}: {:.3}s\n", t0.elapsed().as_secs_f64()));
        model_paths.push(path.display().to_string());
        models.push(report);
    }

    let report = RadiomicsReport {
        version: TOOL_VERSION.to_string(),
        seed: cfg.seed,
        features_path: features_path.display().to_string(),
        model_paths,
        models,
        config: cfg.clone(),
    };
    write_json_atomic(&cfg.out.join("radiomics_report.json"), &report)?;
    write_file_atomic(
        &cfg.out.join("radiomics_report.md"),
        markdown_radiomics(&report).as_bytes(),
    )?;
    write_file_atomic(&cfg.out.join("timings_radiomics.txt"), timings.as_bytes())?;

    for m in &report.models {
        println!(
            "{:<8} cv_acc={:.4} cv_auc={:.4} holdout_acc={:.4} holdout_auc={:.4}",
            m.model, m.cv_accuracy, m.cv_auc, m.holdout_accuracy, m.holdout_auc
        );
    }
    Ok(())
}
