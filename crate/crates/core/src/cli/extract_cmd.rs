//! `fibra extract`: compute the feature table for every case in a cohort
//! manifest, in parallel, resumably, with per-case failure isolation.

use super::{CliError, RunConfig};
use crate::phantom::{CohortManifest, ManifestRow};
use crate::radiomics::{extract_all, registry_names, ExtractConfig};
use crate::volume_io::{read_mask, read_volume, write_file_atomic};
use rayon::prelude::*;
use std::collections::HashMap;
use std::path::Path;

fn header_line() -> String {
    let mut cols = vec!["case_id".to_string(), "label".to_string()];
    cols.extend(registry_names().iter().map(|s| s.to_string()));
    cols.join(",")
}

fn feature_row(row: &ManifestRow, ng: usize) -> Result<String, CliError> {
    let v = read_volume(&row.volume)?;
    let m = read_mask(&row.roi)?;
    let features = extract_all(&v, &m, &ExtractConfig { ng })?;
    let mut line = format!("{},{}", row.case_id, row.label);
    for value in features.values() {
        // 17 significant digits round-trips f64 exactly.
        line.push_str(&format!(",{:.16e}", value));
    }
    Ok(line)
}

pub fn cmd_extract(
    cfg: &RunConfig,
    manifest_path: Option<&Path>,
    resume: bool,
    force: bool,
) -> Result<(), CliError> {
    let default_manifest = cfg.out.join("cohort").join("manifest.csv");
    let manifest_path = manifest_path.unwrap_or(&default_manifest);
    let manifest = CohortManifest::read_csv(manifest_path)?;
    let out_path = cfg.out.join("features.csv");

    let mut cached: HashMap<String, String> = HashMap::new();
    if out_path.exists() {
        if resume {
            let text = std::fs::read_to_string(&out_path)?;
            let mut lines = text.lines();
            match lines.next() {
                Some(h) if h == header_line() => {
                    for line in lines {
                        if let Some(case_id) = line.split(',').next() {
                            cached.insert(case_id.to_string(), line.to_string());
                        }
                    }
                }
                _ => {
                    return Err(CliError::Data(format!(
                        "{} has an unexpected header; rerun with --force",
                        out_path.display()
                    )))
                }
            }
        } else if !force {
            return Err(CliError::Data(format!(
                "{} exists; pass --resume to extend it or --force to overwrite",
                out_path.display()
            )));
        }
    }
    std::fs::create_dir_all(&cfg.out)?;

    let work = || -> Vec<(String, Result<String, CliError>)> {
        manifest
            .rows
            .par_iter()
            .map(|row| {
                let line = match cached.get(&row.case_id) {
                    Some(hit) => Ok(hit.clone()),
                    None => feature_row(row, cfg.ng),
                };
                (row.case_id.clone(), line)
            })
            .collect()
    };
    // Results are merged in manifest order regardless of worker count.
    let results = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| CliError::Data(e.to_string()))?
            .install(work)
    } else {
        work()
    };

    let mut out = header_line();
    out.push('\n');
    let mut failures = Vec::new();
    let mut fresh = 0usize;
    for (case_id, line) in results {
        match line {
            Ok(l) => {
                if !cached.contains_key(&case_id) {
                    fresh += 1;
                }
                out.push_str(&l);
                out.push('\n');
            }
            Err(e) => failures.push((case_id, e)),
        }
    }
    write_file_atomic(&out_path, out.as_bytes())?;

    let ok = manifest.rows.len() - failures.len();
    println!(
        "extracted {ok}/{} cases ({fresh} computed, {} reused) -> {}",
        manifest.rows.len(),
        ok - fresh,
        out_path.display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        for (case_id, e) in &failures {
            eprintln!("case {case_id} failed: {e}");
        }
        Err(CliError::Data(format!(
            "{} of {} cases failed extraction",
            failures.len(),
            manifest.rows.len()
        )))
    }
}

/// Parse a feature CSV produced by [`cmd_extract`] into a design matrix.
pub fn read_feature_csv(path: &Path) -> Result<crate::learners::DesignMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Data(format!("{} is empty", path.display())))?;
    if header != header_line() {
        return Err(CliError::Data(format!(
            "{} does not match the feature registry schema",
            path.display()
        )));
    }
    let names: Vec<String> = registry_names().iter().map(|s| s.to_string()).collect();
    let p = names.len();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != p + 2 {
            return Err(CliError::Data(format!(
                "{} row {}: expected {} columns, got {}",
                path.display(),
                i + 2,
                p + 2,
                fields.len()
            )));
        }
        let label: u8 = fields[1]
            .parse()
            .map_err(|_| CliError::Data(format!("bad label {:?} in row {}", fields[1], i + 2)))?;
        y.push(label);
        for f in &fields[2..] {
            let v: f64 = f
                .parse()
                .map_err(|_| CliError::Data(format!("bad value {f:?} in row {}", i + 2)))?;
            x.push(v);
        }
    }
    let n = y.len();
    crate::learners::DesignMatrix::new(n, p, x, y, names).map_err(CliError::from)
}
