//! `fibra train-cnn`: slice extraction, per-preset training, and
//! patient-level evaluation with majority voting on held-out patients.

use super::report::{markdown_cnn, CnnEvalRow, CnnReport, TOOL_VERSION};
use super::{write_json_atomic, CliError, RunConfig};
use crate::learners::{accuracy, auc, stratified_holdout_then_kfold};
use crate::nnet::{
    extract_slices, majority_vote, train, NetSpec, SliceImage, Tensor, NUM_CLASSES,
};
use crate::phantom::CohortManifest;
use crate::rng::derive_seed;
use crate::volume_io::{read_mask, read_volume, write_file_atomic};
use std::path::Path;
use std::time::Instant;

pub struct PatientSlices {
    pub case_id: String,
    pub label: u8,
    pub slices: Vec<SliceImage>,
}

/// Load every patient's representative slices.
pub fn load_patients(
    manifest: &CohortManifest,
    k: usize,
    side: usize,
) -> Result<Vec<PatientSlices>, CliError> {
    manifest
        .rows
        .iter()
        .map(|row| {
            let v = read_volume(&row.volume)?;
            let m = read_mask(&row.roi)?;
            let slices = extract_slices(&v, &m, k, side)?;
            Ok(PatientSlices {
                case_id: row.case_id.clone(),
                label: row.label,
                slices,
            })
        })
        .collect()
}

fn softmax1(logits: &[f64]) -> f64 {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    e1 / (e0 + e1)
}

/// Patient-level (accuracy, AUC) of a trained network on `patients`:
/// hard majority vote over slice predictions for accuracy, mean slice
/// probability as the patient score for AUC.
pub fn evaluate_patients(
    net: &crate::nnet::Network,
    patients: &[&PatientSlices],
) -> Result<(f64, f64), CliError> {
    let mut preds = Vec::with_capacity(patients.len());
    let mut scores = Vec::with_capacity(patients.len());
    let labels: Vec<u8> = patients.iter().map(|p| p.label).collect();
    let side = net.spec.input_side;
    for p in patients {
        let mut slice_preds = Vec::with_capacity(p.slices.len());
        let mut prob_sum = 0.0;
        for s in &p.slices {
            let x = Tensor::from_vec(&[1, 1, side, side], s.pixels.data.clone());
            let logits = net.forward(&x)?;
            slice_preds
                .push(u8::from(logits.data[1] >= logits.data[0]));
            prob_sum += softmax1(&logits.data[..NUM_CLASSES]);
        }
        preds.push(majority_vote(&slice_preds)?);
        scores.push(prob_sum / p.slices.len() as f64);
    }
    Ok((accuracy(&preds, &labels), auc(&scores, &labels)?))
}

pub fn cmd_train_cnn(cfg: &RunConfig, manifest_path: Option<&Path>) -> Result<(), CliError> {
    let default_manifest = cfg.out.join("cohort").join("manifest.csv");
    let manifest_path = manifest_path.unwrap_or(&default_manifest);
    let manifest = CohortManifest::read_csv(manifest_path)?;
    let patients = load_patients(&manifest, cfg.cnn.slices_k, cfg.cnn.input_side)?;
    let labels: Vec<u8> = patients.iter().map(|p| p.label).collect();

    // Patients are split before any slice leaves a patient, so no patient
    // can contribute slices to both sides.
    let (test, folds) =
        stratified_holdout_then_kfold(&labels, cfg.split.test_frac, cfg.split.k, cfg.seed)?;
    let train_idx: Vec<usize> = folds.iter().flat_map(|f| f.iter().copied()).collect();
    debug_assert!(test.iter().all(|i| !train_idx.contains(i)));

    let mut dataset: Vec<(Tensor, u8)> = Vec::new();
    for &i in &train_idx {
        for s in &patients[i].slices {
            dataset.push((s.pixels.clone(), patients[i].label));
        }
    }
    let test_patients: Vec<&PatientSlices> = test.iter().map(|&i| &patients[i]).collect();
    std::fs::create_dir_all(&cfg.out)?;

    let mut rows = Vec::new();
    let mut checkpoint_paths = Vec::new();
    let mut timings = String::new();
    for (pi, preset) in cfg.cnn.presets.iter().enumerate() {
        let t0 = Instant::now();
        let mut spec = NetSpec::preset(preset)
            .ok_or_else(|| CliError::Usage(format!("unknown cnn preset {preset}")))?;
        spec.input_side = cfg.cnn.input_side;
        let mut train_cfg = cfg.cnn.train.clone();
        train_cfg.seed = derive_seed(cfg.seed, 2000 + pi as u64);
        let ckpt = train(&dataset, spec, &train_cfg)?;

        let (acc, patient_auc) = evaluate_patients(&ckpt.net, &test_patients)?;
        let path = cfg.out.join(format!("cnn_{preset}.json"));
        write_json_atomic(&path, &ckpt)?;
        timings.push_str(&format!("{preset}: {:.3}s\n", t0.elapsed().as_secs_f64()));
        checkpoint_paths.push(path.display().to_string());
        rows.push(CnnEvalRow {
            model: preset.clone(),
            patient_accuracy: acc,
            patient_auc,
            test_patients: test_patients.len(),
            curve: ckpt.curve.clone(),
        });
    }

    let report = CnnReport {
        version: TOOL_VERSION.to_string(),
        seed: cfg.seed,
        manifest_path: manifest_path.display().to_string(),
        checkpoint_paths,
        rows,
        config: cfg.clone(),
    };
    write_json_atomic(&cfg.out.join("cnn_report.json"), &report)?;
    write_file_atomic(&cfg.out.join("cnn_report.md"), markdown_cnn(&report).as_bytes())?;
    write_file_atomic(&cfg.out.join("timings_cnn.txt"), timings.as_bytes())?;

    for r in &report.rows {
        println!(
            "{:<12} patient_acc={:.4} patient_auc={:.4} ({} test patients)",
            r.model, r.patient_accuracy, r.patient_auc, r.test_patients
        );
    }
    Ok(())
}
