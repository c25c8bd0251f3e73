//! Fixed-bin-count intensity discretization.

use super::{GrayLevelVolume, RadiomicsError};
use crate::volume_io::{Mask, Volume};

/// Map ROI intensities to levels 1..=ng:
/// `level = min(ng, floor(ng·(x − min)/(max − min)) + 1)`.
/// A constant ROI maps every voxel to level 1.
pub fn discretize(v: &Volume, m: &Mask, ng: usize) -> Result<GrayLevelVolume, RadiomicsError> {
    if v.dims != m.dims {
        return Err(RadiomicsError::DimsMismatch(v.dims, m.dims));
    }
    if m.is_empty() {
        return Err(RadiomicsError::EmptyMask);
    }
    if ng < 2 {
        return Err(RadiomicsError::BadBinCount(ng));
    }

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (i, &inside) in m.bits.iter().enumerate() {
        if inside {
            min = min.min(v.voxels[i]);
            max = max.max(v.voxels[i]);
        }
    }

    let mut levels = vec![0u16; v.voxels.len()];
    if max - min <= 0.0 {
        for (i, &inside) in m.bits.iter().enumerate() {
            if inside {
                levels[i] = 1;
            }
        }
    } else {
        let scale = ng as f64 / (max - min);
        for (i, &inside) in m.bits.iter().enumerate() {
            if inside {
                let l = ((v.voxels[i] - min) * scale).floor() as usize + 1;
                levels[i] = l.min(ng) as u16;
            }
        }
    }

    Ok(GrayLevelVolume {
        dims: v.dims,
        ng,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(values: &[f64]) -> (Volume, Mask) {
        let n = values.len();
        (
            Volume::new((n, 1, 1), (1.0, 1.0, 1.0), values.to_vec()),
            Mask::new((n, 1, 1), vec![true; n]),
        )
    }

    #[test]
    fn endpoints_map_to_extreme_levels() {
        let (v, m) = row(&[0.0, 10.0]);
        let g = discretize(&v, &m, 2).unwrap();
        assert_eq!(g.levels, vec![1, 2]);
    }

    #[test]
    fn constant_roi_is_all_level_one() {
        let (v, m) = row(&[3.0, 3.0, 3.0]);
        let g = discretize(&v, &m, 8).unwrap();
        assert_eq!(g.levels, vec![1, 1, 1]);
    }

    #[test]
    fn hand_evaluated_bins() {
        let (v, m) = row(&[0.0, 2.5, 5.0, 7.5, 10.0]);
        let g = discretize(&v, &m, 4).unwrap();
        assert_eq!(g.levels, vec![1, 2, 3, 4, 4]);
    }

    #[test]
    fn outside_roi_is_zero() {
        let v = Volume::new((2, 1, 1), (1.0, 1.0, 1.0), vec![1.0, 2.0]);
        let m = Mask::new((2, 1, 1), vec![true, false]);
        let g = discretize(&v, &m, 4).unwrap();
        assert_eq!(g.levels[1], 0);
    }

    #[test]
    fn empty_mask_and_bad_ng_rejected() {
        let v = Volume::new((1, 1, 1), (1.0, 1.0, 1.0), vec![0.0]);
        let m = Mask::new((1, 1, 1), vec![false]);
        assert_eq!(discretize(&v, &m, 4).unwrap_err(), RadiomicsError::EmptyMask);
        let m = Mask::new((1, 1, 1), vec![true]);
        assert_eq!(discretize(&v, &m, 1).unwrap_err(), RadiomicsError::BadBinCount(1));
    }
}
