//! Gray Level Co-occurrence Matrix and its 24 features.

use super::{xlog2x, GrayLevelVolume, DIRECTIONS_13, EPS, GLCM_NAMES};
use nalgebra::DMatrix;

pub struct GlcmResult {
    /// Direction-averaged symmetric normalized matrix (ng × ng, row-major).
    pub matrix: Vec<f64>,
    /// Values in `GLCM_NAMES` order, averaged over the 13 directions.
    pub features: Vec<f64>,
}

/// Raw symmetric pair counts for one direction (before normalization).
pub fn glcm_counts(g: &GrayLevelVolume, dir: (i64, i64, i64), distance: i64) -> Vec<u64> {
    let ng = g.ng;
    let (nx, ny, nz) = g.dims;
    let mut counts = vec![0u64; ng * ng];
    let (dx, dy, dz) = (dir.0 * distance, dir.1 * distance, dir.2 * distance);
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let a = g.level_signed(x, y, z);
                if a == 0 {
                    continue;
                }
                let b = g.level_signed(x + dx, y + dy, z + dz);
                if b == 0 {
                    continue;
                }
                let (ai, bi) = (a as usize - 1, b as usize - 1);
                counts[ai * ng + bi] += 1;
                counts[bi * ng + ai] += 1; // symmetrize (add transpose)
            }
        }
    }
    counts
}

fn features_of_normalized(p: &[f64], ng: usize) -> Vec<f64> {
    // Marginals and derived distributions.
    let mut px = vec![0.0; ng];
    for i in 0..ng {
        for j in 0..ng {
            px[i] += p[i * ng + j];
        }
    }
    let mut p_sum = vec![0.0; 2 * ng - 1]; // k = i + j, offset by 2 levels
    let mut p_diff = vec![0.0; ng]; // k = |i - j|
    for i in 0..ng {
        for j in 0..ng {
            let v = p[i * ng + j];
            p_sum[i + j] += v;
            p_diff[i.abs_diff(j)] += v;
        }
    }

    let mu: f64 = px.iter().enumerate().map(|(i, &v)| (i + 1) as f64 * v).sum();
    let sigma2: f64 = px
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 - mu).powi(2) * v)
        .sum();

    let mut autocorr = 0.0;
    let mut cluster_p = 0.0;
    let mut cluster_s = 0.0;
    let mut cluster_t = 0.0;
    let mut contrast = 0.0;
    let mut corr_num = 0.0;
    let mut joint_energy = 0.0;
    let mut joint_entropy = 0.0;
    let mut idm = 0.0;
    let mut idmn = 0.0;
    let mut id = 0.0;
    let mut idn = 0.0;
    let mut inv_var = 0.0;
    let mut max_prob = 0.0f64;
    let mut sum_squares = 0.0;
    let mut hxy1 = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            let v = p[i * ng + j];
            if v == 0.0 {
                continue;
            }
            let (fi, fj) = ((i + 1) as f64, (j + 1) as f64);
            let d = fi - fj;
            autocorr += fi * fj * v;
            let c = fi + fj - 2.0 * mu;
            cluster_p += c.powi(4) * v;
            cluster_s += c.powi(3) * v;
            cluster_t += c.powi(2) * v;
            contrast += d * d * v;
            corr_num += fi * fj * v;
            joint_energy += v * v;
            joint_entropy -= xlog2x(v);
            idm += v / (1.0 + d * d);
            idmn += v / (1.0 + (d / ng as f64).powi(2));
            id += v / (1.0 + d.abs());
            idn += v / (1.0 + d.abs() / ng as f64);
            if i != j {
                inv_var += v / (d * d);
            }
            max_prob = max_prob.max(v);
            sum_squares += (fi - mu).powi(2) * v;
            let marg = px[i] * px[j];
            if marg > 0.0 {
                hxy1 -= v * marg.log2();
            }
        }
    }

    let joint_average = mu;
    let correlation = if sigma2 < EPS {
        0.0
    } else {
        (corr_num - mu * mu) / sigma2
    };

    let mut diff_avg = 0.0;
    let mut diff_entropy = 0.0;
    for (k, &v) in p_diff.iter().enumerate() {
        diff_avg += k as f64 * v;
        diff_entropy -= xlog2x(v);
    }
    let diff_var: f64 = p_diff
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 - diff_avg).powi(2) * v)
        .sum();

    let mut sum_avg = 0.0;
    let mut sum_entropy = 0.0;
    for (k, &v) in p_sum.iter().enumerate() {
        sum_avg += (k + 2) as f64 * v;
        sum_entropy -= xlog2x(v);
    }

    let hx: f64 = -px.iter().map(|&v| xlog2x(v)).sum::<f64>();
    let hxy = joint_entropy;
    let hxy2: f64 = -(0..ng)
        .flat_map(|i| (0..ng).map(move |j| (i, j)))
        .map(|(i, j)| xlog2x(px[i] * px[j]))
        .sum::<f64>();
    let imc1 = if hx < EPS { 0.0 } else { (hxy - hxy1) / hx };
    let imc2 = {
        let arg = 1.0 - (-2.0 * (hxy2 - hxy)).exp();
        if arg <= 0.0 {
            0.0
        } else {
            arg.sqrt()
        }
    };

    // MCC: second-largest eigenvalue magnitude of the transition matrix
    // Q(i,j) = sum_k p(i,k) p(j,k) / (px(i) px(k)). Q is similar to the
    // symmetric PSD matrix M = S Sᵀ with S(i,j) = p(i,j)/sqrt(px(i) px(j)),
    // so the spectrum is computed from M.
    let active: Vec<usize> = (0..ng).filter(|&i| px[i] > 0.0).collect();
    let mcc = if active.len() <= 1 {
        0.0
    } else {
        let na = active.len();
        let mut s = DMatrix::<f64>::zeros(na, na);
        for (a, &i) in active.iter().enumerate() {
            for (b, &j) in active.iter().enumerate() {
                s[(a, b)] = p[i * ng + j] / (px[i] * px[j]).sqrt();
            }
        }
        let m = &s * s.transpose();
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev[1].abs().clamp(0.0, 1.0)
    };

    vec![
        autocorr,
        joint_average,
        cluster_p,
        cluster_s,
        cluster_t,
        contrast,
        correlation,
        diff_avg,
        diff_entropy,
        diff_var,
        joint_energy,
        joint_entropy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        inv_var,
        max_prob,
        sum_avg,
        sum_entropy,
        sum_squares,
        mcc,
    ]
}

/// Build the GLCM over the 13 directions at the given distance; features are
/// computed per direction and averaged. Directions with no valid pair
/// contribute zero-feature vectors (all-guard fallbacks) and a zero matrix.
pub fn build_glcm(g: &GrayLevelVolume, distance: i64) -> GlcmResult {
    let ng = g.ng;
    let mut avg_matrix = vec![0.0; ng * ng];
    let mut avg_features = vec![0.0; GLCM_NAMES.len()];
    for dir in DIRECTIONS_13 {
        let counts = glcm_counts(g, dir, distance);
        let total: u64 = counts.iter().sum();
        let p: Vec<f64> = if total == 0 {
            vec![0.0; ng * ng]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        for (a, &v) in avg_matrix.iter_mut().zip(&p) {
            *a += v / 13.0;
        }
        let f = if total == 0 {
            vec![0.0; GLCM_NAMES.len()]
        } else {
            features_of_normalized(&p, ng)
        };
        for (a, v) in avg_features.iter_mut().zip(f) {
            *a += v / 13.0;
        }
    }
    GlcmResult {
        matrix: avg_matrix,
        features: avg_features,
    }
}
