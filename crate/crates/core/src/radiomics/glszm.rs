//! Gray Level Size Zone Matrix and its 16 features.
//!
//! Zones are 26-connected components of equal level within the ROI; a single
//! matrix, no direction handling.

use super::{xlog2x, GrayLevelVolume, GLSZM_NAMES};

pub struct GlszmResult {
    /// (ng × smax) zone counts, row-major.
    pub matrix: Vec<u64>,
    pub smax: usize,
    pub features: Vec<f64>,
}

/// Flood-fill the zones; returns (level, size) per zone.
pub fn zones(g: &GrayLevelVolume) -> Vec<(u16, usize)> {
    let (nx, ny, nz) = g.dims;
    let mut visited = vec![false; g.levels.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let i = g.index(x, y, z);
                let level = g.levels[i];
                if level == 0 || visited[i] {
                    continue;
                }
                visited[i] = true;
                stack.push((x as i64, y as i64, z as i64));
                let mut size = 0usize;
                while let Some((cx, cy, cz)) = stack.pop() {
                    size += 1;
                    for dz in -1i64..=1 {
                        for dy in -1i64..=1 {
                            for dx in -1i64..=1 {
                                if dx == 0 && dy == 0 && dz == 0 {
                                    continue;
                                }
                                let (qx, qy, qz) = (cx + dx, cy + dy, cz + dz);
                                if g.level_signed(qx, qy, qz) != level {
                                    continue;
                                }
                                let qi = g.index(qx as usize, qy as usize, qz as usize);
                                if !visited[qi] {
                                    visited[qi] = true;
                                    stack.push((qx, qy, qz));
                                }
                            }
                        }
                    }
                }
                out.push((level, size));
            }
        }
    }
    out
}

pub fn build_glszm(g: &GrayLevelVolume) -> GlszmResult {
    let ng = g.ng;
    let np = g.roi_voxel_count();
    let zone_list = zones(g);
    let smax = zone_list.iter().map(|&(_, s)| s).max().unwrap_or(1);
    let mut matrix = vec![0u64; ng * smax];
    for &(level, size) in &zone_list {
        matrix[(level as usize - 1) * smax + (size - 1)] += 1;
    }

    let nz_total: u64 = matrix.iter().sum();
    if nz_total == 0 {
        return GlszmResult {
            matrix,
            smax,
            features: vec![0.0; GLSZM_NAMES.len()],
        };
    }
    let nz_f = nz_total as f64;

    let mut by_level = vec![0.0f64; ng];
    let mut by_size = vec![0.0f64; smax];
    let mut sae = 0.0;
    let mut lae = 0.0;
    let mut lgl = 0.0;
    let mut hgl = 0.0;
    let mut salgl = 0.0;
    let mut sahgl = 0.0;
    let mut lalgl = 0.0;
    let mut lahgl = 0.0;
    let mut mu_l = 0.0;
    let mut mu_s = 0.0;
    let mut entropy = 0.0;
    for i in 0..ng {
        for s in 0..smax {
            let c = matrix[i * smax + s] as f64;
            if c == 0.0 {
                continue;
            }
            let li = (i + 1) as f64;
            let sz = (s + 1) as f64;
            by_level[i] += c;
            by_size[s] += c;
            let p = c / nz_f;
            sae += c / (sz * sz);
            lae += c * sz * sz;
            lgl += c / (li * li);
            hgl += c * li * li;
            salgl += c / (li * li * sz * sz);
            sahgl += c * li * li / (sz * sz);
            lalgl += c * sz * sz / (li * li);
            lahgl += c * li * li * sz * sz;
            mu_l += p * li;
            mu_s += p * sz;
            entropy -= xlog2x(p);
        }
    }
    let mut glv = 0.0;
    let mut zv = 0.0;
    for i in 0..ng {
        for s in 0..smax {
            let c = matrix[i * smax + s] as f64;
            if c == 0.0 {
                continue;
            }
            let p = c / nz_f;
            glv += p * ((i + 1) as f64 - mu_l).powi(2);
            zv += p * ((s + 1) as f64 - mu_s).powi(2);
        }
    }
    let gln: f64 = by_level.iter().map(|&s| s * s).sum::<f64>() / nz_f;
    let szn: f64 = by_size.iter().map(|&s| s * s).sum::<f64>() / nz_f;

    GlszmResult {
        features: vec![
            sae / nz_f,
            lae / nz_f,
            gln,
            gln / nz_f,
            szn,
            szn / nz_f,
            nz_f / np as f64,
            glv,
            zv,
            entropy,
            lgl / nz_f,
            hgl / nz_f,
            salgl / nz_f,
            sahgl / nz_f,
            lalgl / nz_f,
            lahgl / nz_f,
        ],
        matrix,
        smax,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiomics::{discretize, GLSZM_NAMES};
    use crate::volume_io::{Mask, Volume};
    use rand::Rng;

    fn get(features: &[f64], name: &str) -> f64 {
        features[GLSZM_NAMES.iter().position(|&n| n == name).unwrap()]
    }

    #[test]
    fn hand_enumerated_components() {
        // 2x2x1 image [[1,1],[1,2]] -> zones {level 1 size 3, level 2 size 1}.
        let g = GrayLevelVolume {
            dims: (2, 2, 1),
            ng: 2,
            levels: vec![1, 1, 1, 2],
        };
        let r = build_glszm(&g);
        let mut zs = zones(&g);
        zs.sort();
        assert_eq!(zs, vec![(1, 3), (2, 1)]);
        assert!((get(&r.features, "SmallAreaEmphasis") - (1.0 / 9.0 + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_volume_is_a_single_zone() {
        let g = GrayLevelVolume {
            dims: (3, 3, 1),
            ng: 1,
            levels: vec![1; 9],
        };
        let r = build_glszm(&g);
        assert_eq!(zones(&g), vec![(1, 9)]);
        assert_eq!(get(&r.features, "ZoneEntropy"), 0.0);
    }

    /// Independent flood-fill oracle using BFS over an explicit queue and a
    /// different traversal order.
    fn oracle_zone_sizes(g: &GrayLevelVolume) -> Vec<(u16, usize)> {
        use std::collections::VecDeque;
        let (nx, ny, nz) = g.dims;
        let mut seen = vec![false; g.levels.len()];
        let mut result = Vec::new();
        for i in (0..g.levels.len()).rev() {
            if g.levels[i] == 0 || seen[i] {
                continue;
            }
            let level = g.levels[i];
            let mut q = VecDeque::new();
            seen[i] = true;
            q.push_back(i);
            let mut size = 0;
            while let Some(j) = q.pop_front() {
                size += 1;
                let x = (j % nx) as i64;
                let y = ((j / nx) % ny) as i64;
                let z = (j / (nx * ny)) as i64;
                for dz in -1i64..=1 {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (qx, qy, qz) = (x + dx, y + dy, z + dz);
                            if qx < 0 || qy < 0 || qz < 0 {
                                continue;
                            }
                            let (qx, qy, qz) = (qx as usize, qy as usize, qz as usize);
                            if qx >= nx || qy >= ny || qz >= nz {
                                continue;
                            }
                            let qi = qx + nx * (qy + ny * qz);
                            if !seen[qi] && g.levels[qi] == level {
                                seen[qi] = true;
                                q.push_back(qi);
                            }
                        }
                    }
                }
            }
            result.push((level, size));
        }
        result
    }

    #[test]
    fn matches_flood_fill_oracle_on_seeded_volumes() {
        let mut rng = crate::rng::rng_from_seed(303);
        for trial in 0..50 {
            let dims = (
                rng.gen_range(2..=8usize),
                rng.gen_range(2..=8usize),
                rng.gen_range(2..=8usize),
            );
            let ng = [2, 4, 8][trial % 3];
            let n = dims.0 * dims.1 * dims.2;
            let voxels: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..30.0)).collect();
            let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.75)).collect();
            if !bits.iter().any(|&b| b) {
                continue;
            }
            let v = Volume::new(dims, (1.0, 1.0, 1.0), voxels);
            let m = Mask::new(dims, bits);
            let g = discretize(&v, &m, ng).unwrap();
            let mut a = zones(&g);
            let mut b = oracle_zone_sizes(&g);
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }
}
