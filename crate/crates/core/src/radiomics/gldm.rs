//! Gray Level Dependence Matrix and its 5 features.

use super::{xlog2x, GrayLevelVolume, GLDM_NAMES};

pub struct GldmResult {
    /// (ng × dmax) counts, row-major; d = 1 + dependent 26-neighbors.
    pub matrix: Vec<u64>,
    pub dmax: usize,
    pub features: Vec<f64>,
}

/// Dependence counts: for each ROI voxel, d = 1 + number of in-ROI
/// 26-neighbors whose |level difference| <= alpha (the center counts itself).
pub fn gldm_counts(g: &GrayLevelVolume, alpha: u16) -> (Vec<u64>, usize) {
    let ng = g.ng;
    let (nx, ny, nz) = g.dims;
    let dmax = 27;
    let mut counts = vec![0u64; ng * dmax];
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let level = g.level_signed(x, y, z);
                if level == 0 {
                    continue;
                }
                let mut d = 1usize;
                for dz in -1i64..=1 {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            if dx == 0 && dy == 0 && dz == 0 {
                                continue;
                            }
                            let l = g.level_signed(x + dx, y + dy, z + dz);
                            if l > 0 && l.abs_diff(level) <= alpha {
                                d += 1;
                            }
                        }
                    }
                }
                counts[(level as usize - 1) * dmax + (d - 1)] += 1;
            }
        }
    }
    (counts, dmax)
}

pub fn build_gldm(g: &GrayLevelVolume, alpha: u16) -> GldmResult {
    let ng = g.ng;
    let (matrix, dmax) = gldm_counts(g, alpha);
    let total: u64 = matrix.iter().sum();
    if total == 0 {
        return GldmResult {
            matrix,
            dmax,
            features: vec![0.0; GLDM_NAMES.len()],
        };
    }
    let n = total as f64;

    let mut by_dep = vec![0.0f64; dmax];
    let mut sde = 0.0;
    let mut lde = 0.0;
    let mut mu_d = 0.0;
    let mut entropy = 0.0;
    for i in 0..ng {
        for d in 0..dmax {
            let c = matrix[i * dmax + d] as f64;
            if c == 0.0 {
                continue;
            }
            let dd = (d + 1) as f64;
            by_dep[d] += c;
            let p = c / n;
            sde += c / (dd * dd);
            lde += c * dd * dd;
            mu_d += p * dd;
            entropy -= xlog2x(p);
        }
    }
    let mut dv = 0.0;
    for i in 0..ng {
        for d in 0..dmax {
            let c = matrix[i * dmax + d] as f64;
            if c > 0.0 {
                dv += c / n * ((d + 1) as f64 - mu_d).powi(2);
            }
        }
    }
    let dn: f64 = by_dep.iter().map(|&s| s * s).sum::<f64>() / n;

    GldmResult {
        matrix,
        dmax,
        features: vec![sde / n, lde / n, dn, dv, entropy],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiomics::GLDM_NAMES as NAMES;
    use rand::Rng;

    fn get(features: &[f64], name: &str) -> f64 {
        features[NAMES.iter().position(|&n| n == name).unwrap()]
    }

    #[test]
    fn lone_voxel_has_dependence_one() {
        let g = GrayLevelVolume {
            dims: (1, 1, 1),
            ng: 1,
            levels: vec![1],
        };
        let r = build_gldm(&g, 0);
        assert_eq!(r.matrix[0], 1);
        assert_eq!(get(&r.features, "DependenceEntropy"), 0.0);
    }

    #[test]
    fn constant_3x3_slab_dependence_histogram() {
        let g = GrayLevelVolume {
            dims: (3, 3, 1),
            ng: 1,
            levels: vec![1; 9],
        };
        let (counts, dmax) = gldm_counts(&g, 0);
        // Corners have 3 neighbors (d=4), edges 5 (d=6), center 8 (d=9).
        assert_eq!(counts[3], 4);
        assert_eq!(counts[5], 4);
        assert_eq!(counts[8], 1);
        assert_eq!(counts.iter().sum::<u64>(), 9);
        let _ = dmax;
    }

    /// Naive per-voxel oracle.
    fn oracle_counts(g: &GrayLevelVolume, alpha: u16) -> Vec<u64> {
        let (nx, ny, nz) = g.dims;
        let mut counts = vec![0u64; g.ng * 27];
        for i in 0..g.levels.len() {
            let level = g.levels[i];
            if level == 0 {
                continue;
            }
            let x = (i % nx) as i64;
            let y = ((i / nx) % ny) as i64;
            let z = (i / (nx * ny)) as i64;
            let mut d = 1usize;
            for dz in [-1i64, 0, 1] {
                for dy in [-1i64, 0, 1] {
                    for dx in [-1i64, 0, 1] {
                        if (dx, dy, dz) == (0, 0, 0) {
                            continue;
                        }
                        let (a, b, c) = (x + dx, y + dy, z + dz);
                        if a >= 0
                            && b >= 0
                            && c >= 0
                            && (a as usize) < nx
                            && (b as usize) < ny
                            && (c as usize) < nz
                        {
                            let l = g.levels[a as usize + nx * (b as usize + ny * c as usize)];
                            if l > 0 && (l as i32 - level as i32).unsigned_abs() <= alpha as u32 {
                                d += 1;
                            }
                        }
                    }
                }
            }
            counts[(level as usize - 1) * 27 + (d - 1)] += 1;
        }
        counts
    }

    #[test]
    fn matches_per_voxel_oracle_on_seeded_volumes() {
        use crate::radiomics::discretize;
        use crate::volume_io::{Mask, Volume};
        let mut rng = crate::rng::rng_from_seed(305);
        for trial in 0..50 {
            let dims = (
                rng.gen_range(2..=8usize),
                rng.gen_range(2..=8usize),
                rng.gen_range(2..=8usize),
            );
            let ng = [2, 4, 8][trial % 3];
            let n = dims.0 * dims.1 * dims.2;
            let voxels: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..40.0)).collect();
            let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
            if !bits.iter().any(|&b| b) {
                continue;
            }
            let v = Volume::new(dims, (1.0, 1.0, 1.0), voxels);
            let m = Mask::new(dims, bits);
            let g = discretize(&v, &m, ng).unwrap();
            let (counts, _) = gldm_counts(&g, 0);
            assert_eq!(counts, oracle_counts(&g, 0));
        }
    }
}
