//! In-memory volume/mask/heatmap types plus the binary formats the tool
//! speaks: a constrained NIfTI-1 reader/writer and binary PGM output.

mod nifti;
mod pgm;

pub use nifti::{parse_nifti, write_nifti, NiftiError};
pub use pgm::write_pgm;

use std::path::Path;

/// 3D scalar grid with physical spacing, intensities in HU, x-fastest order.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub dims: (usize, usize, usize),
    /// Per-axis spacing in mm, strictly positive.
    pub spacing: (f64, f64, f64),
    /// `nx * ny * nz` values, x varying fastest.
    pub voxels: Vec<f64>,
    /// The `(scl_slope, scl_inter)` rescale that was applied at load time.
    pub intensity_rescale: (f64, f64),
}

impl Volume {
    pub fn new(dims: (usize, usize, usize), spacing: (f64, f64, f64), voxels: Vec<f64>) -> Self {
        let v = Volume {
            dims,
            spacing,
            voxels,
            intensity_rescale: (1.0, 0.0),
        };
        v.check_invariants();
        v
    }

    fn check_invariants(&self) {
        let (nx, ny, nz) = self.dims;
        assert!(nx > 0 && ny > 0 && nz > 0, "volume dims must be positive");
        assert_eq!(self.voxels.len(), nx * ny * nz, "voxel count mismatch");
        let (sx, sy, sz) = self.spacing;
        assert!(
            sx > 0.0 && sy > 0.0 && sz > 0.0 && sx.is_finite() && sy.is_finite() && sz.is_finite(),
            "spacing must be strictly positive and finite"
        );
        debug_assert!(self.voxels.iter().all(|v| v.is_finite()));
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        let (nx, ny, _) = self.dims;
        x + nx * (y + ny * z)
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.voxels[self.index(x, y, z)]
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing.0 * self.spacing.1 * self.spacing.2
    }
}

/// Binary ROI aligned to a [`Volume`], same x-fastest layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub dims: (usize, usize, usize),
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn new(dims: (usize, usize, usize), bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), dims.0 * dims.1 * dims.2, "mask bit count mismatch");
        Mask { dims, bits }
    }

    pub fn empty(dims: (usize, usize, usize)) -> Self {
        Mask {
            dims,
            bits: vec![false; dims.0 * dims.1 * dims.2],
        }
    }

    /// Threshold a volume at 0.5 (masks round-trip through NIfTI as 0/1 data).
    pub fn from_volume(v: &Volume) -> Self {
        Mask {
            dims: v.dims,
            bits: v.voxels.iter().map(|&x| x > 0.5).collect(),
        }
    }

    pub fn to_volume(&self, spacing: (f64, f64, f64)) -> Volume {
        Volume::new(
            self.dims,
            spacing,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        let (nx, ny, _) = self.dims;
        x + nx * (y + ny * z)
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> bool {
        self.bits[self.index(x, y, z)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Chebyshev dilation by `radius` voxels (26-neighborhood, iterated).
    pub fn dilate(&self, radius: usize) -> Mask {
        let (nx, ny, nz) = self.dims;
        let mut cur = self.bits.clone();
        for _ in 0..radius {
            let prev = cur.clone();
            for z in 0..nz {
                for y in 0..ny {
                    for x in 0..nx {
                        if prev[x + nx * (y + ny * z)] {
                            continue;
                        }
                        'scan: for dz in -1i64..=1 {
                            for dy in -1i64..=1 {
                                for dx in -1i64..=1 {
                                    let (qx, qy, qz) =
                                        (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                                    if qx < 0 || qy < 0 || qz < 0 {
                                        continue;
                                    }
                                    let (qx, qy, qz) = (qx as usize, qy as usize, qz as usize);
                                    if qx < nx
                                        && qy < ny
                                        && qz < nz
                                        && prev[qx + nx * (qy + ny * qz)]
                                    {
                                        cur[x + nx * (y + ny * z)] = true;
                                        break 'scan;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Mask {
            dims: self.dims,
            bits: cur,
        }
    }
}

/// 2D nonnegative relevance grid, values in [0,1], max 1 unless identically 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    /// (rows, cols)
    pub dims: (usize, usize),
    /// Row-major.
    pub values: Vec<f64>,
}

impl Heatmap {
    pub fn new(dims: (usize, usize), values: Vec<f64>) -> Self {
        assert_eq!(values.len(), dims.0 * dims.1);
        assert!(
            values.iter().all(|&v| (0.0..=1.0).contains(&v)),
            "heatmap values must lie in [0,1]"
        );
        Heatmap { dims, values }
    }

    /// Normalize a nonnegative map by its maximum; an all-zero map stays zero.
    pub fn from_raw(dims: (usize, usize), raw: Vec<f64>) -> Self {
        assert!(raw.iter().all(|&v| v >= 0.0 && v.is_finite()));
        let max = raw.iter().cloned().fold(0.0f64, f64::max);
        let values = if max > 0.0 {
            raw.iter().map(|&v| v / max).collect()
        } else {
            raw
        };
        Heatmap::new(dims, values)
    }
}

/// Round half away from zero; the rounding rule used everywhere in this module.
#[inline]
pub fn round_half_away(x: f64) -> f64 {
    x.round()
}

pub fn read_volume(path: &Path) -> Result<Volume, NiftiError> {
    let bytes = std::fs::read(path).map_err(|e| NiftiError::Io(e.to_string()))?;
    parse_nifti(&bytes)
}

pub fn read_mask(path: &Path) -> Result<Mask, NiftiError> {
    Ok(Mask::from_volume(&read_volume(path)?))
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_file_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

pub fn write_volume(path: &Path, v: &Volume) -> Result<(), NiftiError> {
    write_file_atomic(path, &write_nifti(v)).map_err(|e| NiftiError::Io(e.to_string()))
}
