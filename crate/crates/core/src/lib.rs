//! Radiomics feature extraction and desk-scale CNN classification for
//! fibrosis-like texture in chest CT volumes, exercised on seeded synthetic
//! phantoms.
//!
//! The crate is organized around five subsystems:
//!
//! - [`volume_io`]: NIfTI-1 parsing/writing, the in-memory volume/mask types,
//!   and PGM heatmap output.
//! - [`phantom`]: seeded synthetic cohort generation with ground-truth lesion
//!   masks.
//! - [`radiomics`]: intensity discretization and the canonical 111-feature
//!   registry (first-order, 3D/2D shape, GLCM/GLRLM/GLSZM/NGTDM/GLDM).
//! - [`learners`]: LASSO-logistic, linear SVM, random forest and gradient
//!   boosting, plus normalization, metrics and the split/CV protocol.
//! - [`nnet`]: a double-precision CNN engine with MixUp, SGD momentum,
//!   cosine annealing, slice extraction, majority voting and Grad-CAM.
//!
//! The `cli` module ties everything into the `fibra` command-line tool.

pub mod cli;
pub mod learners;
pub mod nnet;
pub mod phantom;
pub mod radiomics;
pub mod rng;
pub mod volume_io;
