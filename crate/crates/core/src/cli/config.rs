//! Run configuration: defaults, TOML file loading, and flag overrides.
//! Flags win over the file; the file wins over defaults.

use super::CliError;
use crate::nnet::TrainConfig;
use crate::phantom::PhantomSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    pub n_cases: usize,
    pub prevalence: f64,
    pub phantom: PhantomSpec,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            n_cases: 347,
            prevalence: 0.449,
            phantom: PhantomSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub test_frac: f64,
    pub k: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_frac: 0.10,
            k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoConfig {
    pub lambda: f64,
    pub iters: usize,
    pub step: f64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            lambda: 0.01,
            iters: 2000,
            step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
    pub step0: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 300,
            step0: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 100,
            max_depth: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub trees: usize,
    pub depth: usize,
    pub nu: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            trees: 200,
            depth: 2,
            nu: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CnnConfig {
    pub presets: Vec<String>,
    /// Representative axial slices per patient.
    pub slices_k: usize,
    pub input_side: usize,
    pub train: TrainConfig,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            presets: vec![
                "tiny_plain".into(),
                "tiny_res".into(),
                "tiny_dense".into(),
            ],
            slices_k: 5,
            input_side: 64,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker bound for parallel extraction; 0 uses all cores.
    pub jobs: usize,
    /// Gray levels for texture discretization.
    pub ng: usize,
    pub cohort: CohortConfig,
    pub split: SplitConfig,
    pub lasso: LassoConfig,
    pub svm: SvmConfig,
    pub forest: ForestConfig,
    pub gbt: GbtConfig,
    pub cnn: CnnConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            out: PathBuf::from("out"),
            jobs: 0,
            ng: 32,
            cohort: CohortConfig::default(),
            split: SplitConfig::default(),
            lasso: LassoConfig::default(),
            svm: SvmConfig::default(),
            forest: ForestConfig::default(),
            gbt: GbtConfig::default(),
            cnn: CnnConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let mut cfg = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("bad config {}: {e}", p.display())))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&mut self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Usage(msg.into()));
        if self.ng < 2 || self.ng > 256 {
            return bad("ng must be in 2..=256");
        }
        if !(0.0..1.0).contains(&self.split.test_frac) || self.split.k < 2 {
            return bad("split.test_frac must be in [0,1) and split.k >= 2");
        }
        if !(0.0 < self.cohort.prevalence && self.cohort.prevalence < 1.0) {
            return bad("cohort.prevalence must lie strictly between 0 and 1");
        }
        if self.cohort.n_cases < 2 {
            return bad("cohort.n_cases must be at least 2");
        }
        if self.lasso.lambda < 0.0 || self.gbt.nu < 0.0 || self.svm.c <= 0.0 {
            return bad("model hyperparameters out of range");
        }
        if self.cnn.slices_k == 0 || self.cnn.input_side < 4 {
            return bad("cnn.slices_k must be >= 1 and cnn.input_side >= 4");
        }
        for p in &self.cnn.presets {
            if crate::nnet::NetSpec::preset(p).is_none() {
                return Err(CliError::Usage(format!("unknown cnn preset {p}")));
            }
        }
        self.cohort
            .phantom
            .validate()
            .map_err(|e| CliError::Usage(format!("phantom spec: {e}")))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_keeps_defaults_elsewhere() {
        let cfg: RunConfig = toml::from_str("seed = 7\n[cohort]\nn_cases = 20\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.cohort.n_cases, 20);
        assert_eq!(cfg.ng, 32);
        assert_eq!(cfg.split.k, 5);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let mut cfg = RunConfig::default();
        cfg.ng = 1;
        assert!(matches!(cfg.validate(), Err(CliError::Usage(_))));
        let mut cfg = RunConfig::default();
        cfg.cnn.presets = vec!["resnet152".into()];
        assert!(matches!(cfg.validate(), Err(CliError::Usage(_))));
    }
}
