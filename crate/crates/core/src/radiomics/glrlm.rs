//! Gray Level Run Length Matrix and its 16 features.

use super::{xlog2x, GrayLevelVolume, DIRECTIONS_13, GLRLM_NAMES};

pub struct GlrlmResult {
    /// Counts summed over the 13 directions, (ng × rmax, row-major).
    pub matrix: Vec<u64>,
    pub rmax: usize,
    /// Values in `GLRLM_NAMES` order, averaged over directions.
    pub features: Vec<f64>,
}

/// Run counts along one direction: maximal runs of equal level, broken by the
/// ROI boundary. Returns (ng × rmax) counts.
pub fn glrlm_counts(g: &GrayLevelVolume, dir: (i64, i64, i64)) -> (Vec<u64>, usize) {
    let ng = g.ng;
    let (nx, ny, nz) = g.dims;
    let rmax = nx.max(ny).max(nz);
    let mut counts = vec![0u64; ng * rmax];
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let level = g.level_signed(x, y, z);
                if level == 0 {
                    continue;
                }
                // Only start a run where the predecessor breaks it.
                if g.level_signed(x - dir.0, y - dir.1, z - dir.2) == level {
                    continue;
                }
                let mut len = 1usize;
                let (mut cx, mut cy, mut cz) = (x + dir.0, y + dir.1, z + dir.2);
                while g.level_signed(cx, cy, cz) == level {
                    len += 1;
                    cx += dir.0;
                    cy += dir.1;
                    cz += dir.2;
                }
                counts[(level as usize - 1) * rmax + (len - 1)] += 1;
            }
        }
    }
    (counts, rmax)
}

/// The 16 features from one direction's count matrix.
pub fn glrlm_features(counts: &[u64], ng: usize, rmax: usize, roi_voxels: usize) -> Vec<f64> {
    let nr: u64 = counts.iter().sum();
    if nr == 0 {
        return vec![0.0; GLRLM_NAMES.len()];
    }
    let nr_f = nr as f64;

    let mut by_level = vec![0.0f64; ng];
    let mut by_len = vec![0.0f64; rmax];
    let mut sre = 0.0;
    let mut lre = 0.0;
    let mut lgl = 0.0;
    let mut hgl = 0.0;
    let mut srlgl = 0.0;
    let mut srhgl = 0.0;
    let mut lrlgl = 0.0;
    let mut lrhgl = 0.0;
    let mut mu_l = 0.0;
    let mut mu_r = 0.0;
    let mut entropy = 0.0;
    for i in 0..ng {
        for r in 0..rmax {
            let c = counts[i * rmax + r] as f64;
            if c == 0.0 {
                continue;
            }
            let li = (i + 1) as f64;
            let rl = (r + 1) as f64;
            by_level[i] += c;
            by_len[r] += c;
            let p = c / nr_f;
            sre += c / (rl * rl);
            lre += c * rl * rl;
            lgl += c / (li * li);
            hgl += c * li * li;
            srlgl += c / (li * li * rl * rl);
            srhgl += c * li * li / (rl * rl);
            lrlgl += c * rl * rl / (li * li);
            lrhgl += c * li * li * rl * rl;
            mu_l += p * li;
            mu_r += p * rl;
            entropy -= xlog2x(p);
        }
    }
    let mut glv = 0.0;
    let mut rv = 0.0;
    for i in 0..ng {
        for r in 0..rmax {
            let c = counts[i * rmax + r] as f64;
            if c == 0.0 {
                continue;
            }
            let p = c / nr_f;
            glv += p * ((i + 1) as f64 - mu_l).powi(2);
            rv += p * ((r + 1) as f64 - mu_r).powi(2);
        }
    }
    let gln: f64 = by_level.iter().map(|&s| s * s).sum::<f64>() / nr_f;
    let rln: f64 = by_len.iter().map(|&s| s * s).sum::<f64>() / nr_f;

    vec![
        sre / nr_f,
        lre / nr_f,
        gln,
        gln / nr_f,
        rln,
        rln / nr_f,
        nr_f / roi_voxels as f64,
        glv,
        rv,
        entropy,
        lgl / nr_f,
        hgl / nr_f,
        srlgl / nr_f,
        srhgl / nr_f,
        lrlgl / nr_f,
        lrhgl / nr_f,
    ]
}

pub fn build_glrlm(g: &GrayLevelVolume) -> GlrlmResult {
    let ng = g.ng;
    let np = g.roi_voxel_count();
    let mut sum_counts: Option<Vec<u64>> = None;
    let mut rmax = 0;
    let mut avg = vec![0.0; GLRLM_NAMES.len()];
    for dir in DIRECTIONS_13 {
        let (counts, r) = glrlm_counts(g, dir);
        rmax = r;
        let f = glrlm_features(&counts, ng, r, np);
        for (a, v) in avg.iter_mut().zip(f) {
            *a += v / 13.0;
        }
        match &mut sum_counts {
            None => sum_counts = Some(counts),
            Some(s) => {
                for (a, c) in s.iter_mut().zip(counts) {
                    *a += c;
                }
            }
        }
    }
    GlrlmResult {
        matrix: sum_counts.unwrap(),
        rmax,
        features: avg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiomics::{discretize, GLRLM_NAMES};
    use crate::volume_io::{Mask, Volume};
    use rand::Rng;

    fn get(features: &[f64], name: &str) -> f64 {
        features[GLRLM_NAMES.iter().position(|&n| n == name).unwrap()]
    }

    fn gl_row(levels: &[u16], ng: usize) -> GrayLevelVolume {
        GrayLevelVolume {
            dims: (levels.len(), 1, 1),
            ng,
            levels: levels.to_vec(),
        }
    }

    #[test]
    fn hand_enumerated_row_runs() {
        let g = gl_row(&[1, 1, 2], 2);
        let (counts, rmax) = glrlm_counts(&g, (1, 0, 0));
        // Runs: level 1 length 2, level 2 length 1.
        assert_eq!(counts[0 * rmax + 1], 1);
        assert_eq!(counts[1 * rmax + 0], 1);
        let f = glrlm_features(&counts, 2, rmax, 3);
        assert!((get(&f, "ShortRunEmphasis") - 0.625).abs() < 1e-12);
    }

    #[test]
    fn constant_row_is_one_long_run() {
        let g = gl_row(&[1, 1, 1, 1], 1);
        let (counts, rmax) = glrlm_counts(&g, (1, 0, 0));
        let f = glrlm_features(&counts, 1, rmax, 4);
        assert_eq!(get(&f, "LongRunEmphasis"), 16.0);
        assert_eq!(get(&f, "RunPercentage"), 0.25);
    }

    /// Naive oracle: walk every lattice line in the direction and scan runs.
    fn oracle_counts(g: &GrayLevelVolume, dir: (i64, i64, i64)) -> Vec<u64> {
        let ng = g.ng;
        let (nx, ny, nz) = g.dims;
        let rmax = nx.max(ny).max(nz);
        let mut counts = vec![0u64; ng * rmax];
        // Enumerate line start points: positions whose predecessor is outside
        // the volume bounds.
        for z in 0..nz as i64 {
            for y in 0..ny as i64 {
                for x in 0..nx as i64 {
                    let (px, py, pz) = (x - dir.0, y - dir.1, z - dir.2);
                    let inb = |a: i64, b: i64, c: i64| {
                        a >= 0 && b >= 0 && c >= 0 && a < nx as i64 && b < ny as i64 && c < nz as i64
                    };
                    if inb(px, py, pz) {
                        continue;
                    }
                    // Walk the line collecting levels.
                    let mut line = Vec::new();
                    let (mut cx, mut cy, mut cz) = (x, y, z);
                    while inb(cx, cy, cz) {
                        line.push(g.level_signed(cx, cy, cz));
                        cx += dir.0;
                        cy += dir.1;
                        cz += dir.2;
                    }
                    let mut i = 0;
                    while i < line.len() {
                        if line[i] == 0 {
                            i += 1;
                            continue;
                        }
                        let mut j = i;
                        while j < line.len() && line[j] == line[i] {
                            j += 1;
                        }
                        counts[(line[i] as usize - 1) * rmax + (j - i - 1)] += 1;
                        i = j;
                    }
                }
            }
        }
        counts
    }

    #[test]
    fn matches_line_scan_oracle_on_seeded_volumes() {
        let mut rng = crate::rng::rng_from_seed(302);
        for trial in 0..50 {
            let dims = (
                rng.gen_range(2..=8usize),
                rng.gen_range(2..=8usize),
                rng.gen_range(2..=8usize),
            );
            let ng = [2, 4, 8][trial % 3];
            let n = dims.0 * dims.1 * dims.2;
            let voxels: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..20.0)).collect();
            let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.8)).collect();
            if !bits.iter().any(|&b| b) {
                continue;
            }
            let v = Volume::new(dims, (1.0, 1.0, 1.0), voxels);
            let m = Mask::new(dims, bits);
            let g = discretize(&v, &m, ng).unwrap();
            for dir in DIRECTIONS_13 {
                let (counts, _) = glrlm_counts(&g, dir);
                assert_eq!(counts, oracle_counts(&g, dir));
            }
        }
    }
}
