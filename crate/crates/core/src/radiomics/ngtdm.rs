//! Neighboring Gray Tone Difference Matrix and its 5 features.

use super::{GrayLevelVolume, EPS};

/// Cap applied to Coarseness when the p·s sum vanishes.
pub const COARSENESS_CAP: f64 = 1e6;

pub struct NgtdmResult {
    /// Per-level voxel counts n_i (only voxels with >= 1 in-ROI 26-neighbor).
    pub n: Vec<u64>,
    /// Per-level absolute-difference sums s_i.
    pub s: Vec<f64>,
    pub features: Vec<f64>,
}

/// Per-level (n_i, s_i): n_i counts ROI voxels of level i with at least one
/// in-ROI 26-neighbor, s_i sums |i − mean neighbor level| over those voxels.
pub fn ngtdm_tables(g: &GrayLevelVolume) -> (Vec<u64>, Vec<f64>) {
    let ng = g.ng;
    let (nx, ny, nz) = g.dims;
    let mut n = vec![0u64; ng];
    let mut s = vec![0.0f64; ng];
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let level = g.level_signed(x, y, z);
                if level == 0 {
                    continue;
                }
                let mut sum = 0u64;
                let mut cnt = 0u64;
                for dz in -1i64..=1 {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            if dx == 0 && dy == 0 && dz == 0 {
                                continue;
                            }
                            let l = g.level_signed(x + dx, y + dy, z + dz);
                            if l > 0 {
                                sum += l as u64;
                                cnt += 1;
                            }
                        }
                    }
                }
                if cnt > 0 {
                    let mean = sum as f64 / cnt as f64;
                    n[level as usize - 1] += 1;
                    s[level as usize - 1] += (level as f64 - mean).abs();
                }
            }
        }
    }
    (n, s)
}

pub fn build_ngtdm(g: &GrayLevelVolume) -> NgtdmResult {
    let (n, s) = ngtdm_tables(g);
    let nvp: u64 = n.iter().sum();
    if nvp == 0 {
        return NgtdmResult {
            n,
            s,
            features: vec![COARSENESS_CAP, 0.0, 0.0, 0.0, 0.0],
        };
    }
    let nvp_f = nvp as f64;
    let ng = g.ng;
    let p: Vec<f64> = n.iter().map(|&c| c as f64 / nvp_f).collect();
    let active: Vec<usize> = (0..ng).filter(|&i| p[i] > 0.0).collect();
    let ngp = active.len() as f64;

    let ps_sum: f64 = (0..ng).map(|i| p[i] * s[i]).sum();
    let coarseness = if ps_sum < 1e-6 { COARSENESS_CAP } else { 1.0 / ps_sum };

    let s_sum: f64 = s.iter().sum();
    let contrast = if ngp <= 1.0 {
        0.0
    } else {
        let mut pair = 0.0;
        for &i in &active {
            for &j in &active {
                pair += p[i] * p[j] * ((i as f64) - (j as f64)).powi(2);
            }
        }
        pair / (ngp * (ngp - 1.0)) * (s_sum / nvp_f)
    };

    let mut busy_den = 0.0;
    let mut complexity = 0.0;
    let mut strength_num = 0.0;
    for &i in &active {
        for &j in &active {
            let (fi, fj) = ((i + 1) as f64, (j + 1) as f64);
            busy_den += (fi * p[i] - fj * p[j]).abs();
            complexity += (fi - fj).abs() * (p[i] * s[i] + p[j] * s[j]) / (p[i] + p[j]);
            strength_num += (p[i] + p[j]) * (fi - fj).powi(2);
        }
    }
    let busyness = if busy_den < EPS { 0.0 } else { ps_sum / busy_den };
    let complexity = complexity / nvp_f;
    let strength = if s_sum < EPS { 0.0 } else { strength_num / s_sum };

    NgtdmResult {
        n,
        s,
        features: vec![coarseness, contrast, busyness, complexity, strength],
    }
}
