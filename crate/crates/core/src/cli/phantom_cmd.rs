//! `fibra phantom`: generate the synthetic cohort.

use super::{CliError, RunConfig};
use crate::phantom::generate_cohort;

pub fn cmd_phantom(
    cfg: &RunConfig,
    force: bool,
    n: Option<usize>,
    prevalence: Option<f64>,
) -> Result<(), CliError> {
    let n = n.unwrap_or(cfg.cohort.n_cases);
    let prevalence = prevalence.unwrap_or(cfg.cohort.prevalence);
    let dir = cfg.out.join("cohort");

    if dir.exists() && dir.read_dir()?.next().is_some() {
        if !force {
            return Err(CliError::Data(format!(
                "{} already contains a cohort; pass --force to overwrite",
                dir.display()
            )));
        }
        std::fs::remove_dir_all(&dir)?;
    }
    std::fs::create_dir_all(&dir)?;

    let manifest = generate_cohort(n, prevalence, &cfg.cohort.phantom, cfg.seed, &dir)?;
    let positives = manifest.rows.iter().filter(|r| r.label == 1).count();
    println!(
        "wrote {} cases ({} positive) to {}",
        manifest.rows.len(),
        positives,
        dir.display()
    );
    Ok(())
}
