//! `fibra gradcam`: heatmap PGMs plus lesion-localization scores for
//! cohort cases.

use super::{read_json, CliError, RunConfig};
use crate::nnet::{extract_slices, gradcam, localization_score, Checkpoint};
use crate::phantom::CohortManifest;
use crate::volume_io::{read_mask, read_volume, write_file_atomic, write_pgm, Heatmap};
use std::path::Path;

pub fn cmd_gradcam(
    cfg: &RunConfig,
    checkpoint: Option<&Path>,
    case: Option<&str>,
    manifest_path: Option<&Path>,
) -> Result<(), CliError> {
    let default_ckpt = cfg.out.join("cnn_tiny_dense.json");
    let ckpt_path = checkpoint.unwrap_or(&default_ckpt);
    let ckpt: Checkpoint = read_json(ckpt_path)?;
    let side = ckpt.net.spec.input_side;

    let default_manifest = cfg.out.join("cohort").join("manifest.csv");
    let manifest = CohortManifest::read_csv(manifest_path.unwrap_or(&default_manifest))?;
    let rows: Vec<_> = match case {
        Some(id) => {
            let row = manifest
                .rows
                .iter()
                .find(|r| r.case_id == id)
                .ok_or_else(|| CliError::Data(format!("case {id} not in manifest")))?;
            vec![row]
        }
        None => manifest.rows.iter().filter(|r| r.label == 1).collect(),
    };

    let dir = cfg.out.join("gradcam");
    std::fs::create_dir_all(&dir)?;
    for row in rows {
        let v = read_volume(&row.volume)?;
        let roi = read_mask(&row.roi)?;
        let lesion = read_mask(&row.lesion)?;
        let dilated = lesion.dilate(2);
        for s in extract_slices(&v, &roi, cfg.cnn.slices_k, side)? {
            let hm = gradcam(&ckpt.net, &s.pixels, 1)?;
            let base = dir.join(format!("{}_z{:03}", row.case_id, s.z));
            write_file_atomic(&base.with_extension("pgm"), &write_pgm(&hm))?;
            // Companion grayscale of the network input for side-by-side
            // viewing.
            let input = Heatmap::new((side, side), s.pixels.data.clone());
            write_file_atomic(&base.with_extension("input.pgm"), &write_pgm(&input))?;
            match localization_score(&hm, s.bbox, s.z, &dilated) {
                Some(score) if !lesion.is_empty() => {
                    println!("{} z={} localization={:.4}", row.case_id, s.z, score);
                }
                _ => println!("{} z={} localization=n/a", row.case_id, s.z),
            }
        }
    }
    Ok(())
}
