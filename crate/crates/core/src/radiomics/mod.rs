//! Canonical radiomics feature registry: first-order statistics, 3D/2D shape
//! descriptors, and the five texture-matrix families (GLCM, GLRLM, GLSZM,
//! NGTDM, GLDM).
//!
//! Conventions fixed for the whole module:
//! - fixed-bin-count discretization, default Ng = 32;
//! - texture matrices over the 13 unique 3D lattice directions at distance 1,
//!   features averaged over directions where the family is directional;
//! - all logarithms base 2 and 0·log 0 = 0;
//! - every division guarded by a 1e-12 threshold with a documented fallback;
//! - surface area / perimeter by exposed-face / exposed-edge counting;
//! - kurtosis is non-excess (no −3).

mod discretize;
mod firstorder;
mod gldm;
mod glcm;
mod glrlm;
mod glszm;
mod ngtdm;
mod shape;

pub use discretize::discretize;
pub use firstorder::first_order_features;
pub use gldm::{build_gldm, gldm_counts};
pub use glcm::{build_glcm, glcm_counts};
pub use glrlm::{build_glrlm, glrlm_counts};
pub use glszm::{build_glszm, zones};
pub use ngtdm::{build_ngtdm, ngtdm_tables};
pub use shape::{shape_features_2d, shape_features_3d};

use crate::volume_io::{Mask, Volume};
use thiserror::Error;

/// Division guard threshold used throughout the registry.
pub const EPS: f64 = 1e-12;

/// The 13 unique 3D lattice directions (first nonzero component positive).
/// Offsets are (dx, dy, dz) in voxel index space.
pub const DIRECTIONS_13: [(i64, i64, i64); 13] = [
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 0),
    (1, -1, 0),
    (1, 0, 1),
    (1, 0, -1),
    (0, 1, 1),
    (0, 1, -1),
    (1, 1, 1),
    (1, 1, -1),
    (1, -1, 1),
    (1, -1, -1),
];

/// `x * log2(x)` with the 0·log0 = 0 convention.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RadiomicsError {
    #[error("mask is empty")]
    EmptyMask,
    #[error("mask/volume dims mismatch: {0:?} vs {1:?}")]
    DimsMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("need at least 2 gray levels, got {0}")]
    BadBinCount(usize),
}

/// Discretized ROI. Levels are 1..=ng inside the ROI, 0 outside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayLevelVolume {
    pub dims: (usize, usize, usize),
    pub ng: usize,
    pub levels: Vec<u16>,
}

impl GrayLevelVolume {
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        let (nx, ny, _) = self.dims;
        x + nx * (y + ny * z)
    }

    /// Level at (x,y,z); 0 marks outside-ROI.
    #[inline]
    pub fn level(&self, x: usize, y: usize, z: usize) -> u16 {
        self.levels[self.index(x, y, z)]
    }

    /// Level at a signed coordinate; out-of-bounds reads as outside-ROI.
    #[inline]
    pub fn level_signed(&self, x: i64, y: i64, z: i64) -> u16 {
        let (nx, ny, nz) = self.dims;
        if x < 0 || y < 0 || z < 0 || x >= nx as i64 || y >= ny as i64 || z >= nz as i64 {
            0
        } else {
            self.levels[x as usize + nx * (y as usize + ny * z as usize)]
        }
    }

    pub fn roi_voxel_count(&self) -> usize {
        self.levels.iter().filter(|&&l| l > 0).count()
    }
}

/// Ordered (name, value) pairs following the canonical registry.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub pairs: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn names(&self) -> Vec<&str> {
        self.pairs.iter().map(|(n, _)| n.as_str()).collect()
    }
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|(_, v)| *v).collect()
    }
    pub fn get(&self, name: &str) -> Option<f64> {
        self.pairs.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

pub const FIRSTORDER_NAMES: [&str; 19] = [
    "Energy",
    "TotalEnergy",
    "Entropy",
    "Minimum",
    "Percentile10",
    "Percentile90",
    "Maximum",
    "Mean",
    "Median",
    "InterquartileRange",
    "Range",
    "MeanAbsoluteDeviation",
    "RobustMeanAbsoluteDeviation",
    "RootMeanSquared",
    "StandardDeviation",
    "Skewness",
    "Kurtosis",
    "Variance",
    "Uniformity",
];

pub const SHAPE3D_NAMES: [&str; 16] = [
    "VoxelVolume",
    "SurfaceArea",
    "SurfaceVolumeRatio",
    "Sphericity",
    "Compactness1",
    "Compactness2",
    "SphericalDisproportion",
    "Maximum3DDiameter",
    "Maximum2DDiameterSlice",
    "Maximum2DDiameterColumn",
    "Maximum2DDiameterRow",
    "MajorAxisLength",
    "MinorAxisLength",
    "LeastAxisLength",
    "Elongation",
    "Flatness",
];

pub const SHAPE2D_NAMES: [&str; 10] = [
    "PixelSurface",
    "Perimeter",
    "PerimeterSurfaceRatio",
    "Sphericity2D",
    "SphericalDisproportion2D",
    "MaximumDiameter",
    "MajorAxisLength",
    "MinorAxisLength",
    "Elongation",
    "Eccentricity",
];

pub const GLCM_NAMES: [&str; 24] = [
    "Autocorrelation",
    "JointAverage",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "JointEnergy",
    "JointEntropy",
    "Imc1",
    "Imc2",
    "Idm",
    "Idmn",
    "Id",
    "Idn",
    "InverseVariance",
    "MaximumProbability",
    "SumAverage",
    "SumEntropy",
    "SumSquares",
    "MCC",
];

pub const GLRLM_NAMES: [&str; 16] = [
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "GrayLevelVariance",
    "RunVariance",
    "RunEntropy",
    "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
];

pub const GLSZM_NAMES: [&str; 16] = [
    "SmallAreaEmphasis",
    "LargeAreaEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "ZonePercentage",
    "GrayLevelVariance",
    "ZoneVariance",
    "ZoneEntropy",
    "LowGrayLevelZoneEmphasis",
    "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
];

pub const NGTDM_NAMES: [&str; 5] = ["Coarseness", "Contrast", "Busyness", "Complexity", "Strength"];

pub const GLDM_NAMES: [&str; 5] = [
    "SmallDependenceEmphasis",
    "LargeDependenceEmphasis",
    "DependenceNonUniformity",
    "DependenceVariance",
    "DependenceEntropy",
];

/// The canonical 111-name registry, in order.
pub fn registry_names() -> Vec<String> {
    let mut names = Vec::with_capacity(111);
    for n in FIRSTORDER_NAMES {
        names.push(format!("firstorder_{n}"));
    }
    for n in SHAPE3D_NAMES {
        names.push(format!("shape3d_{n}"));
    }
    for n in SHAPE2D_NAMES {
        names.push(format!("shape2d_{n}"));
    }
    for n in GLCM_NAMES {
        names.push(format!("glcm_{n}"));
    }
    for n in GLRLM_NAMES {
        names.push(format!("glrlm_{n}"));
    }
    for n in GLSZM_NAMES {
        names.push(format!("glszm_{n}"));
    }
    for n in NGTDM_NAMES {
        names.push(format!("ngtdm_{n}"));
    }
    for n in GLDM_NAMES {
        names.push(format!("gldm_{n}"));
    }
    names
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractConfig {
    pub ng: usize,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { ng: 32 }
    }
}

fn check_pair(v: &Volume, m: &Mask) -> Result<(), RadiomicsError> {
    if v.dims != m.dims {
        return Err(RadiomicsError::DimsMismatch(v.dims, m.dims));
    }
    if m.is_empty() {
        return Err(RadiomicsError::EmptyMask);
    }
    Ok(())
}

/// Compute all 111 registry features for one case, in registry order.
pub fn extract_all(v: &Volume, m: &Mask, cfg: &ExtractConfig) -> Result<FeatureVector, RadiomicsError> {
    check_pair(v, m)?;
    let g = discretize(v, m, cfg.ng)?;

    let mut values = Vec::with_capacity(111);
    values.extend(first_order_features(v, m, cfg.ng)?);
    values.extend(shape_features_3d(m, v.spacing)?.values);
    values.extend(shape_features_2d(m, v.spacing)?);
    values.extend(build_glcm(&g, 1).features);
    values.extend(build_glrlm(&g).features);
    values.extend(build_glszm(&g).features);
    values.extend(build_ngtdm(&g).features);
    values.extend(build_gldm(&g, 0).features);

    let names = registry_names();
    assert_eq!(names.len(), values.len());
    debug_assert!(values.iter().all(|v| v.is_finite()));
    Ok(FeatureVector {
        pairs: names.into_iter().zip(values).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{generate_phantom, PhantomSpec};

    #[test]
    fn registry_has_111_unique_names() {
        let names = registry_names();
        assert_eq!(names.len(), 111);
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 111);
    }

    #[test]
    fn extract_all_is_finite_and_deterministic() {
        let spec = PhantomSpec {
            dims: (24, 24, 24),
            lesion_radius: (2.0, 4.0),
            ..Default::default()
        };
        let (v, roi, _) = generate_phantom(&spec, 1, 5).unwrap();
        let a = extract_all(&v, &roi, &ExtractConfig::default()).unwrap();
        let b = extract_all(&v, &roi, &ExtractConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pairs.len(), 111);
        assert!(a.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn positive_case_has_higher_intensity_spread() {
        // Lesions add a bright offset plus banding inside the ROI, so the
        // first-order spread statistics separate the classes. Range does not:
        // the shared vessel columns pin the per-case maximum for both labels.
        let spec = PhantomSpec::default();
        let (vp, roip, _) = generate_phantom(&spec, 1, 7).unwrap();
        let (vn, roin, _) = generate_phantom(&spec, 0, 7).unwrap();
        let fp = extract_all(&vp, &roip, &ExtractConfig::default()).unwrap();
        let fn_ = extract_all(&vn, &roin, &ExtractConfig::default()).unwrap();
        assert!(fp.get("firstorder_Variance").unwrap() > fn_.get("firstorder_Variance").unwrap());
    }

    #[test]
    fn degenerate_inputs_stay_finite() {
        // Single voxel.
        let v = Volume::new((1, 1, 1), (1.0, 1.0, 1.0), vec![5.0]);
        let m = Mask::new((1, 1, 1), vec![true]);
        let f = extract_all(&v, &m, &ExtractConfig::default()).unwrap();
        assert!(f.values().iter().all(|v| v.is_finite()));

        // Constant ROI, 1-voxel-thick.
        let v = Volume::new((4, 4, 1), (1.0, 1.0, 1.0), vec![2.0; 16]);
        let m = Mask::new((4, 4, 1), vec![true; 16]);
        let f = extract_all(&v, &m, &ExtractConfig::default()).unwrap();
        assert!(f.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn mismatched_dims_rejected() {
        let v = Volume::new((2, 2, 2), (1.0, 1.0, 1.0), vec![0.0; 8]);
        let m = Mask::new((2, 2, 1), vec![true; 4]);
        assert!(matches!(
            extract_all(&v, &m, &ExtractConfig::default()),
            Err(RadiomicsError::DimsMismatch(..))
        ));
    }
}
