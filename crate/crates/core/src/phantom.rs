//! Seeded synthetic cohort generator.
//!
//! Each case is a lung-like ellipsoid filled with Gaussian background noise.
//! Positive cases carry 1..3 spherical lesions with a ground-glass intensity
//! offset plus an oriented sinusoidal reticulation term, and a ground-truth
//! lesion mask marking exactly those voxels. Everything is deterministic in
//! (spec, label, seed).

use crate::rng::{derive_seed, rng_from_seed};
use crate::volume_io::{self, Mask, Volume};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// HU value used outside the lung ellipsoid (air padding).
const OUTSIDE_HU: f64 = -1000.0;

/// The 13 unique 3D lattice directions (first nonzero component positive).
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

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PhantomSpec {
    pub dims: (usize, usize, usize),
    pub spacing: (f64, f64, f64),
    pub background_hu: f64,
    pub noise_sd: f64,
    /// Lung ellipsoid semi-axes as fractions of the volume dims.
    pub lung_axes_frac: (f64, f64, f64),
    pub lesion_count: (usize, usize),
    /// Lesion radius range in voxels.
    pub lesion_radius: (f64, f64),
    pub ground_glass_hu: f64,
    pub reticulation_amplitude: f64,
    /// Sinusoidal band period in voxels.
    pub band_period: f64,
    /// Lesion centers are drawn within this many voxels of the ellipsoid
    /// center along z, keeping lesions visible in the largest-area axial
    /// slices (the phantom analogue of radiologist-selected slices).
    pub lesion_z_band: f64,
    /// Intensity of the paired vessel-like columns present in every case.
    /// They give each axial slice a label-independent brightest structure,
    /// so per-slice min-max normalization cannot encode the class.
    pub vessel_hu: f64,
    /// Column radius in voxels; 0 disables the vessels.
    pub vessel_radius: f64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            dims: (64, 64, 64),
            spacing: (1.0, 1.0, 1.0),
            background_hu: -850.0,
            noise_sd: 30.0,
            lung_axes_frac: (0.38, 0.42, 0.45),
            lesion_count: (1, 3),
            lesion_radius: (4.0, 10.0),
            ground_glass_hu: -600.0,
            reticulation_amplitude: 120.0,
            band_period: 3.0,
            lesion_z_band: 2.0,
            vessel_hu: -350.0,
            vessel_radius: 2.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum PhantomError {
    #[error("invalid phantom spec: {0}")]
    InvalidSpec(String),
    #[error("i/o failure: {0}")]
    IoFailure(String),
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<(), PhantomError> {
        let (nx, ny, nz) = self.dims;
        if nx < 16 || ny < 16 || nz < 16 {
            return Err(PhantomError::InvalidSpec("dims must be >= 16 per axis".into()));
        }
        if self.lesion_count.0 > self.lesion_count.1 || self.lesion_count.0 == 0 {
            return Err(PhantomError::InvalidSpec("lesion_count range empty".into()));
        }
        if self.lesion_radius.0 > self.lesion_radius.1 || self.lesion_radius.0 <= 0.0 {
            return Err(PhantomError::InvalidSpec("lesion_radius range empty".into()));
        }
        let semi = (
            self.lung_axes_frac.0 * nx as f64,
            self.lung_axes_frac.1 * ny as f64,
            self.lung_axes_frac.2 * nz as f64,
        );
        let min_semi = semi.0.min(semi.1).min(semi.2);
        if self.lesion_radius.1 >= min_semi {
            return Err(PhantomError::InvalidSpec(
                "max lesion radius does not fit inside the lung ellipsoid".into(),
            ));
        }
        if !(self.noise_sd > 0.0) || !(self.band_period > 0.0) {
            return Err(PhantomError::InvalidSpec("noise_sd and band_period must be positive".into()));
        }
        Ok(())
    }
}

/// Generate one case. `label` 1 adds lesions; `label` 0 leaves the lesion
/// mask empty. Bit-deterministic in (spec, label, seed).
pub fn generate_phantom(
    spec: &PhantomSpec,
    label: u8,
    seed: u64,
) -> Result<(Volume, Mask, Mask), PhantomError> {
    spec.validate()?;
    let (nx, ny, nz) = spec.dims;
    let center = (
        (nx as f64 - 1.0) / 2.0,
        (ny as f64 - 1.0) / 2.0,
        (nz as f64 - 1.0) / 2.0,
    );
    let semi = (
        spec.lung_axes_frac.0 * nx as f64,
        spec.lung_axes_frac.1 * ny as f64,
        spec.lung_axes_frac.2 * nz as f64,
    );

    let mut roi = Mask::empty(spec.dims);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let dx = (x as f64 - center.0) / semi.0;
                let dy = (y as f64 - center.1) / semi.1;
                let dz = (z as f64 - center.2) / semi.2;
                if dx * dx + dy * dy + dz * dz <= 1.0 {
                    let i = roi.index(x, y, z);
                    roi.bits[i] = true;
                }
            }
        }
    }

    let mut rng = rng_from_seed(seed);
    let normal = rand_distr::Normal::new(spec.background_hu, spec.noise_sd)
        .map_err(|e| PhantomError::InvalidSpec(e.to_string()))?;

    let mut voxels = vec![OUTSIDE_HU; nx * ny * nz];
    for (i, &inside) in roi.bits.iter().enumerate() {
        if inside {
            voxels[i] = rng.sample(normal);
        }
    }

    // Two vessel-like columns at fixed positions, shared by every case and
    // label. Each axial slice gets the same brightest structure, which keeps
    // per-slice normalization from carrying class information.
    if spec.vessel_radius > 0.0 {
        let r2 = spec.vessel_radius * spec.vessel_radius;
        for sx in [center.0 - 0.5 * semi.0, center.0 + 0.5 * semi.0] {
            let x0 = ((sx - spec.vessel_radius).floor().max(0.0)) as usize;
            let x1 = ((sx + spec.vessel_radius).ceil().min(nx as f64 - 1.0)) as usize;
            let y0 = ((center.1 - spec.vessel_radius).floor().max(0.0)) as usize;
            let y1 = ((center.1 + spec.vessel_radius).ceil().min(ny as f64 - 1.0)) as usize;
            for z in 0..nz {
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        let dx = x as f64 - sx;
                        let dy = y as f64 - center.1;
                        let i = roi.index(x, y, z);
                        if dx * dx + dy * dy <= r2 && roi.bits[i] {
                            voxels[i] = spec.vessel_hu;
                        }
                    }
                }
            }
        }
    }

    let mut lesion = Mask::empty(spec.dims);
    if label == 1 {
        let count = rng.gen_range(spec.lesion_count.0..=spec.lesion_count.1);
        for _ in 0..count {
            let r = rng.gen_range(spec.lesion_radius.0..=spec.lesion_radius.1);
            // Rejection-sample a center such that the sphere fits strictly
            // inside the ellipsoid and sits within the central z band.
            let (cx, cy, cz) = loop {
                let cx = rng.gen_range(center.0 - semi.0..center.0 + semi.0);
                let cy = rng.gen_range(center.1 - semi.1..center.1 + semi.1);
                let cz = rng.gen_range(
                    (center.2 - spec.lesion_z_band).max(0.0)
                        ..(center.2 + spec.lesion_z_band).min(nz as f64 - 1.0),
                );
                let dx = (cx - center.0) / (semi.0 - r);
                let dy = (cy - center.1) / (semi.1 - r);
                let dz = (cz - center.2) / (semi.2 - r);
                if dx * dx + dy * dy + dz * dz <= 1.0 {
                    break (cx, cy, cz);
                }
            };
            let dir = DIRECTIONS_13[rng.gen_range(0..DIRECTIONS_13.len())];
            let norm = ((dir.0 * dir.0 + dir.1 * dir.1 + dir.2 * dir.2) as f64).sqrt();
            let u = (dir.0 as f64 / norm, dir.1 as f64 / norm, dir.2 as f64 / norm);
            let offset = spec.ground_glass_hu - spec.background_hu;

            let x0 = ((cx - r).floor().max(0.0)) as usize;
            let x1 = ((cx + r).ceil().min(nx as f64 - 1.0)) as usize;
            let y0 = ((cy - r).floor().max(0.0)) as usize;
            let y1 = ((cy + r).ceil().min(ny as f64 - 1.0)) as usize;
            let z0 = ((cz - r).floor().max(0.0)) as usize;
            let z1 = ((cz + r).ceil().min(nz as f64 - 1.0)) as usize;
            for z in z0..=z1 {
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        let dx = x as f64 - cx;
                        let dy = y as f64 - cy;
                        let dz = z as f64 - cz;
                        if dx * dx + dy * dy + dz * dz <= r * r {
                            let i = lesion.index(x, y, z);
                            if !lesion.bits[i] {
                                lesion.bits[i] = true;
                                let phase = (x as f64 * u.0 + y as f64 * u.1 + z as f64 * u.2)
                                    / spec.band_period;
                                voxels[i] += offset
                                    + spec.reticulation_amplitude
                                        * (2.0 * std::f64::consts::PI * phase).sin();
                            }
                        }
                    }
                }
            }
        }
    }

    let volume = Volume::new(spec.dims, spec.spacing, voxels);
    debug_assert!(lesion
        .bits
        .iter()
        .zip(&roi.bits)
        .all(|(&l, &r)| !l || r));
    Ok((volume, roi, lesion))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestRow {
    pub case_id: String,
    pub label: u8,
    pub volume: PathBuf,
    pub roi: PathBuf,
    pub lesion: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CohortManifest {
    pub rows: Vec<ManifestRow>,
}

impl CohortManifest {
    pub fn write_csv(&self, path: &Path) -> Result<(), PhantomError> {
        let mut out = String::from("case_id,label,volume,roi,lesion,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.case_id,
                r.label,
                r.volume.display(),
                r.roi.display(),
                r.lesion.display(),
                r.seed
            ));
        }
        volume_io::write_file_atomic(path, out.as_bytes())
            .map_err(|e| PhantomError::IoFailure(e.to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Self, PhantomError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| PhantomError::IoFailure(e.to_string()))?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(PhantomError::IoFailure(format!(
                    "manifest line {} has {} fields",
                    i + 1,
                    f.len()
                )));
            }
            rows.push(ManifestRow {
                case_id: f[0].to_string(),
                label: f[1]
                    .parse()
                    .map_err(|_| PhantomError::IoFailure(format!("bad label on line {}", i + 1)))?,
                volume: PathBuf::from(f[2]),
                roi: PathBuf::from(f[3]),
                lesion: PathBuf::from(f[4]),
                seed: f[5]
                    .parse()
                    .map_err(|_| PhantomError::IoFailure(format!("bad seed on line {}", i + 1)))?,
            });
        }
        Ok(CohortManifest { rows })
    }
}

/// Number of positive labels for a cohort: round(n·prevalence), half away
/// from zero.
pub fn positive_count(n: usize, prevalence: f64) -> usize {
    (n as f64 * prevalence).round() as usize
}

/// Generate `n` cases into `out_dir`, writing volumes and masks as NIfTI and
/// the manifest as CSV. Per-case seeds derive from the master seed; label
/// assignment is a seeded shuffle of the exact class counts.
pub fn generate_cohort(
    n: usize,
    prevalence: f64,
    spec: &PhantomSpec,
    master_seed: u64,
    out_dir: &Path,
) -> Result<CohortManifest, PhantomError> {
    if n < 2 || !(0.0 < prevalence && prevalence < 1.0) {
        return Err(PhantomError::InvalidSpec(
            "need n >= 2 and 0 < prevalence < 1".into(),
        ));
    }
    spec.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| PhantomError::IoFailure(e.to_string()))?;

    let n_pos = positive_count(n, prevalence);
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < n_pos)).collect();
    use rand::seq::SliceRandom;
    labels.shuffle(&mut rng_from_seed(derive_seed(master_seed, 0)));

    let mut rows = Vec::with_capacity(n);
    for (i, &label) in labels.iter().enumerate() {
        let case_id = format!("case_{:04}", i + 1);
        let seed = derive_seed(master_seed, (i + 1) as u64);
        let (vol, roi, lesion) = generate_phantom(spec, label, seed)?;
        let vol_path = out_dir.join(format!("{case_id}.nii"));
        let roi_path = out_dir.join(format!("{case_id}_roi.nii"));
        let lesion_path = out_dir.join(format!("{case_id}_lesion.nii"));
        volume_io::write_volume(&vol_path, &vol)
            .map_err(|e| PhantomError::IoFailure(e.to_string()))?;
        volume_io::write_volume(&roi_path, &roi.to_volume(spec.spacing))
            .map_err(|e| PhantomError::IoFailure(e.to_string()))?;
        volume_io::write_volume(&lesion_path, &lesion.to_volume(spec.spacing))
            .map_err(|e| PhantomError::IoFailure(e.to_string()))?;
        rows.push(ManifestRow {
            case_id,
            label,
            volume: vol_path,
            roi: roi_path,
            lesion: lesion_path,
            seed,
        });
    }
    let manifest = CohortManifest { rows };
    manifest.write_csv(&out_dir.join("manifest.csv"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_inputs_give_bit_identical_volumes() {
        let spec = PhantomSpec {
            dims: (24, 24, 24),
            lesion_radius: (2.0, 4.0),
            ..Default::default()
        };
        let (a, _, _) = generate_phantom(&spec, 1, 9).unwrap();
        let (b, _, _) = generate_phantom(&spec, 1, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_case_has_empty_lesion_mask() {
        let spec = PhantomSpec {
            dims: (24, 24, 24),
            lesion_radius: (2.0, 4.0),
            ..Default::default()
        };
        let (_, _, lesion) = generate_phantom(&spec, 0, 3).unwrap();
        assert!(lesion.is_empty());
    }

    #[test]
    fn lesion_mean_exceeds_background_mean_by_100() {
        let spec = PhantomSpec::default();
        let (vol, roi, lesion) = generate_phantom(&spec, 1, 7).unwrap();
        assert!(!lesion.is_empty());
        let mut lesion_sum = 0.0;
        let mut lesion_n = 0usize;
        let mut bg_sum = 0.0;
        let mut bg_n = 0usize;
        for i in 0..vol.voxels.len() {
            if lesion.bits[i] {
                lesion_sum += vol.voxels[i];
                lesion_n += 1;
            } else if roi.bits[i] {
                bg_sum += vol.voxels[i];
                bg_n += 1;
            }
        }
        let diff = lesion_sum / lesion_n as f64 - bg_sum / bg_n as f64;
        assert!(diff >= 100.0, "mean HU difference {diff}");
    }

    #[test]
    fn lesion_is_subset_of_roi() {
        let spec = PhantomSpec::default();
        for seed in 0..5 {
            let (_, roi, lesion) = generate_phantom(&spec, 1, seed).unwrap();
            assert!(lesion.bits.iter().zip(&roi.bits).all(|(&l, &r)| !l || r));
        }
    }

    #[test]
    fn cohort_counts_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let spec = PhantomSpec {
            dims: (16, 16, 16),
            lesion_radius: (2.0, 4.0),
            ..Default::default()
        };
        let m1 = generate_cohort(10, 0.5, &spec, 5, dir.path()).unwrap();
        assert_eq!(m1.rows.iter().filter(|r| r.label == 1).count(), 5);
        let bytes1 = std::fs::read(dir.path().join("manifest.csv")).unwrap();
        let vol1 = std::fs::read(&m1.rows[0].volume).unwrap();

        let m2 = generate_cohort(10, 0.5, &spec, 5, dir.path()).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(bytes1, std::fs::read(dir.path().join("manifest.csv")).unwrap());
        assert_eq!(vol1, std::fs::read(&m2.rows[0].volume).unwrap());
    }

    #[test]
    fn paper_scale_prevalence_rounding() {
        assert_eq!(positive_count(347, 0.449), 156);
        assert_eq!(positive_count(10, 0.5), 5);
    }

    #[test]
    fn label_iff_lesion_nonempty() {
        let spec = PhantomSpec {
            dims: (20, 20, 20),
            lesion_radius: (2.0, 4.0),
            ..Default::default()
        };
        for seed in 0..4 {
            let (_, _, l1) = generate_phantom(&spec, 1, seed).unwrap();
            let (_, _, l0) = generate_phantom(&spec, 0, seed).unwrap();
            assert!(!l1.is_empty());
            assert!(l0.is_empty());
        }
    }
}
