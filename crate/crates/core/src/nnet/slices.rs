//! Axial slice extraction for the CNN input pipeline, plus the patient-level
//! majority vote.

use super::{NnetError, Tensor};
use crate::volume_io::{Mask, Volume};

/// One extracted axial slice, already normalized and resized.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceImage {
    /// z index the slice came from.
    pub z: usize,
    /// In-slice mask bounding box the crop was taken from: (x0, y0, w, h).
    pub bbox: (usize, usize, usize, usize),
    /// [1, side, side] image with values in [0, 1].
    pub pixels: Tensor,
}

/// Align-corners bilinear resampling of a row-major 2D image.
pub fn bilinear_resize(
    src: &[f64],
    (rows, cols): (usize, usize),
    (out_rows, out_cols): (usize, usize),
) -> Vec<f64> {
    assert_eq!(src.len(), rows * cols);
    let scale = |out_n: usize, in_n: usize, i: usize| -> f64 {
        if out_n <= 1 || in_n <= 1 {
            0.0
        } else {
            i as f64 * (in_n - 1) as f64 / (out_n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(out_rows * out_cols);
    for r in 0..out_rows {
        let fy = scale(out_rows, rows, r);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(rows - 1);
        let ty = fy - y0 as f64;
        for c in 0..out_cols {
            let fx = scale(out_cols, cols, c);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(cols - 1);
            let tx = fx - x0 as f64;
            let top = src[y0 * cols + x0] * (1.0 - tx) + src[y0 * cols + x1] * tx;
            let bot = src[y1 * cols + x0] * (1.0 - tx) + src[y1 * cols + x1] * tx;
            out.push(top * (1.0 - ty) + bot * ty);
        }
    }
    out
}

/// The K axial slices with the largest in-mask area (ties toward the lower
/// z index), each cropped to the in-slice mask bounding box, min-max
/// normalized to [0, 1] (constant crop maps to zeros), and resized to
/// side x side. Fewer than K nonempty slices returns all of them.
pub fn extract_slices(
    v: &Volume,
    m: &Mask,
    k: usize,
    side: usize,
) -> Result<Vec<SliceImage>, NnetError> {
    assert_eq!(v.dims, m.dims);
    let (nx, ny, nz) = v.dims;
    let mut ranked: Vec<(usize, usize)> = (0..nz)
        .map(|z| {
            let area = (0..ny)
                .flat_map(|y| (0..nx).map(move |x| (x, y)))
                .filter(|&(x, y)| m.at(x, y, z))
                .count();
            (z, area)
        })
        .filter(|&(_, area)| area > 0)
        .collect();
    if ranked.is_empty() {
        return Err(NnetError::EmptyMask);
    }
    ranked.sort_by_key(|&(z, area)| (std::cmp::Reverse(area), z));
    ranked.truncate(k);

    let mut out = Vec::with_capacity(ranked.len());
    for (z, _) in ranked {
        let (mut x0, mut x1, mut y0, mut y1) = (nx, 0usize, ny, 0usize);
        for y in 0..ny {
            for x in 0..nx {
                if m.at(x, y, z) {
                    x0 = x0.min(x);
                    x1 = x1.max(x);
                    y0 = y0.min(y);
                    y1 = y1.max(y);
                }
            }
        }
        let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut crop = Vec::with_capacity(w * h);
        for y in y0..=y1 {
            for x in x0..=x1 {
                crop.push(v.at(x, y, z));
            }
        }
        let lo = crop.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = crop.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > 0.0 {
            for p in &mut crop {
                *p = (*p - lo) / (hi - lo);
            }
        } else {
            crop.iter_mut().for_each(|p| *p = 0.0);
        }
        let resized = bilinear_resize(&crop, (h, w), (side, side));
        out.push(SliceImage {
            z,
            bbox: (x0, y0, w, h),
            pixels: Tensor::from_vec(&[1, side, side], resized),
        });
    }
    Ok(out)
}

/// Most frequent slice label; an exact tie resolves to 1 (positive).
pub fn majority_vote(labels: &[u8]) -> Result<u8, NnetError> {
    if labels.is_empty() {
        return Err(NnetError::EmptyList);
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    Ok(u8::from(2 * ones >= labels.len()))
}
