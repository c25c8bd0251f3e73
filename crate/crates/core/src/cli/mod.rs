//! Command-line surface: configuration, subcommand implementations, and
//! experiment reports.

pub mod args;
pub mod config;
pub mod report;

pub mod evaluate_cmd;
pub mod extract_cmd;
pub mod gradcam_cmd;
pub mod phantom_cmd;
pub mod train_cnn_cmd;
pub mod train_radiomics_cmd;

pub use config::RunConfig;
pub use evaluate_cmd::cmd_evaluate;
pub use extract_cmd::cmd_extract;
pub use gradcam_cmd::cmd_gradcam;
pub use phantom_cmd::cmd_phantom;
pub use train_cnn_cmd::cmd_train_cnn;
pub use train_radiomics_cmd::cmd_train_radiomics;

use thiserror::Error;

/// Top-level error with a stable process exit code per category.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<crate::volume_io::NiftiError> for CliError {
    fn from(e: crate::volume_io::NiftiError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<crate::phantom::PhantomError> for CliError {
    fn from(e: crate::phantom::PhantomError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<crate::radiomics::RadiomicsError> for CliError {
    fn from(e: crate::radiomics::RadiomicsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<crate::learners::LearnError> for CliError {
    fn from(e: crate::learners::LearnError) -> Self {
        match e {
            crate::learners::LearnError::NonFiniteLoss(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<crate::learners::SplitError> for CliError {
    fn from(e: crate::learners::SplitError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<crate::learners::MetricError> for CliError {
    fn from(e: crate::learners::MetricError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<crate::nnet::NnetError> for CliError {
    fn from(e: crate::nnet::NnetError) -> Self {
        match e {
            crate::nnet::NnetError::NonFiniteLoss { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

/// Parse the command line (already split off by clap) and run it.
pub fn run(cli: args::Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }

    match cli.command {
        args::Command::Phantom { n, prevalence } => {
            cmd_phantom(&cfg, cli.force, n, prevalence)
        }
        args::Command::Extract { manifest } => {
            cmd_extract(&cfg, manifest.as_deref(), cli.resume, cli.force)
        }
        args::Command::TrainRadiomics { features } => {
            cmd_train_radiomics(&cfg, features.as_deref())
        }
        args::Command::TrainCnn { manifest } => cmd_train_cnn(&cfg, manifest.as_deref()),
        args::Command::Gradcam {
            checkpoint,
            case,
            manifest,
        } => cmd_gradcam(&cfg, checkpoint.as_deref(), case.as_deref(), manifest.as_deref()),
        args::Command::Evaluate => cmd_evaluate(&cfg),
    }
}

/// Serialize a value as pretty JSON and write it atomically.
pub(crate) fn write_json_atomic<T: serde::Serialize>(
    path: &std::path::Path,
    value: &T,
) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("serialize {}: {e}", path.display())))?;
    text.push('\n');
    crate::volume_io::write_file_atomic(path, text.as_bytes())?;
    Ok(())
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(
    path: &std::path::Path,
) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("bad {}: {e}", path.display())))
}
