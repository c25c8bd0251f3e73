//! Grad-CAM: class-gradient-weighted activation maps from the last conv
//! layer, upsampled to the input size.

use super::net::Network;
use super::slices::bilinear_resize;
use super::{NnetError, Tensor};
use crate::volume_io::Heatmap;

/// Heatmap for `target_class` on a single [1, side, side] image.
///
/// α_k is the global average of ∂logit/∂A_k over the last conv output A;
/// the map is ReLU(Σ_k α_k A_k), bilinearly upsampled to the input side and
/// normalized by its maximum (an identically-zero map stays zero).
pub fn gradcam(net: &Network, image: &Tensor, target_class: usize) -> Result<Heatmap, NnetError> {
    let side = net.spec.input_side;
    if image.shape != [1, side, side] {
        return Err(NnetError::ShapeMismatch(format!(
            "image shape {:?}, expected [1, {side}, {side}]",
            image.shape
        )));
    }
    let Some(conv_idx) = net.spec.last_conv_index() else {
        return Err(NnetError::ShapeMismatch("network has no conv layer".into()));
    };

    let x = Tensor::from_vec(&[1, 1, side, side], image.data.clone());
    let acts = net.forward_cached(&x)?;
    let logits = acts.last().unwrap();
    if target_class >= logits.shape[1] {
        return Err(NnetError::ShapeMismatch(format!(
            "target class {target_class} out of range"
        )));
    }

    // Gradient of the raw class logit (not the softmax probability).
    let mut dout = Tensor::zeros(&logits.shape);
    dout.data[target_class] = 1.0;
    let (_, act_grads) = net.backward(&acts, dout);

    let a = &acts[conv_idx + 1];
    let g = &act_grads[conv_idx + 1];
    let (c, h, w) = (a.shape[1], a.shape[2], a.shape[3]);
    let plane = h * w;
    let mut map = vec![0.0f64; plane];
    for k in 0..c {
        let alpha = g.data[k * plane..(k + 1) * plane].iter().sum::<f64>() / plane as f64;
        for (m, v) in map.iter_mut().zip(&a.data[k * plane..(k + 1) * plane]) {
            *m += alpha * v;
        }
    }
    for m in &mut map {
        *m = m.max(0.0);
    }

    let up = bilinear_resize(&map, (h, w), (side, side));
    Ok(Heatmap::from_raw((side, side), up))
}

/// Fraction of top-decile heatmap mass that lands inside `lesion` when the
/// heatmap (computed on the crop at `bbox` of slice `z`) is projected back
/// onto voxels. Returns None when the heatmap carries no mass.
pub fn localization_score(
    hm: &Heatmap,
    bbox: (usize, usize, usize, usize),
    z: usize,
    lesion: &crate::volume_io::Mask,
) -> Option<f64> {
    let (rows, cols) = hm.dims;
    let (x0, y0, w, h) = bbox;
    let n = rows * cols;
    let mut sorted: Vec<f64> = hm.values.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let k = n.div_ceil(10);
    let threshold = sorted[k - 1];
    if sorted[0] <= 0.0 {
        return None;
    }

    let back = |i: usize, out_n: usize, in_n: usize| -> usize {
        if out_n <= 1 || in_n <= 1 {
            0
        } else {
            (i as f64 * (in_n - 1) as f64 / (out_n - 1) as f64).round() as usize
        }
    };
    let mut mass = 0.0;
    let mut inside = 0.0;
    for r in 0..rows {
        let y = y0 + back(r, rows, h);
        for c in 0..cols {
            let v = hm.values[r * cols + c];
            if v < threshold || v <= 0.0 {
                continue;
            }
            mass += v;
            let x = x0 + back(c, cols, w);
            if lesion.at(x, y, z) {
                inside += v;
            }
        }
    }
    if mass > 0.0 {
        Some(inside / mass)
    } else {
        None
    }
}
