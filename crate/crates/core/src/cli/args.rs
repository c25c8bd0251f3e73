//! clap argument definitions shared by the binary and the integration
//! tests.

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "fibra",
    version,
    about = "Phantom-cohort fibrosis classification workbench"
)]
pub struct Cli {
    /// TOML run configuration; flags override file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker bound for parallel stages; 0 uses all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Reuse existing per-case outputs where possible.
    #[arg(long, global = true)]
    pub resume: bool,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic phantom cohort.
    Phantom {
        /// Number of cases (defaults to the config value).
        #[arg(long)]
        n: Option<usize>,
        /// Positive-class prevalence (defaults to the config value).
        #[arg(long)]
        prevalence: Option<f64>,
    },
    /// Compute the radiomics feature table for a cohort.
    Extract {
        /// Cohort manifest CSV; defaults to <out>/cohort/manifest.csv.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Train and evaluate the four classical models.
    TrainRadiomics {
        /// Feature CSV; defaults to <out>/features.csv.
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Train and evaluate the CNN presets with slice majority voting.
    TrainCnn {
        /// Cohort manifest CSV; defaults to <out>/cohort/manifest.csv.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Emit Grad-CAM heatmaps (and localization scores) for cohort cases.
    Gradcam {
        /// Checkpoint JSON; defaults to <out>/cnn_tiny_dense.json.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Single case id; all positive cases when omitted.
        #[arg(long)]
        case: Option<String>,
        /// Cohort manifest CSV; defaults to <out>/cohort/manifest.csv.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Combine existing reports into one summary.
    Evaluate,
}
