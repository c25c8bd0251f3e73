//! Binary PGM ("P5") output for heatmaps.

use super::Heatmap;

/// Maxval 255, row-major, byte = round(255·v) with round-half-away-from-zero.
pub fn write_pgm(h: &Heatmap) -> Vec<u8> {
    let (rows, cols) = h.dims;
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(h.values.iter().map(|&v| (255.0 * v).round() as u8));
    out
}
