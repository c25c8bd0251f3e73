//! First-order intensity statistics (19 features).

use super::{discretize, xlog2x, RadiomicsError, EPS};
use crate::volume_io::{Mask, Volume};

/// Linear-interpolated percentile on a sorted slice: rank = q/100·(n−1).
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = q / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Returns the 19 registry values in order (see `FIRSTORDER_NAMES`).
///
/// Entropy and Uniformity are computed over the Ng-bin fixed-bin-count
/// histogram; standard deviation, variance, skewness and kurtosis are
/// population (÷N) moments; kurtosis is non-excess. Skewness and kurtosis
/// fall back to 0 when the variance is below 1e-12.
pub fn first_order_features(v: &Volume, m: &Mask, ng: usize) -> Result<Vec<f64>, RadiomicsError> {
    if v.dims != m.dims {
        return Err(RadiomicsError::DimsMismatch(v.dims, m.dims));
    }
    if m.is_empty() {
        return Err(RadiomicsError::EmptyMask);
    }

    let values: Vec<f64> = m
        .bits
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| v.voxels[i])
        .collect();
    let n = values.len() as f64;

    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let minimum = sorted[0];
    let maximum = sorted[sorted.len() - 1];
    let p10 = percentile(&sorted, 10.0);
    let p25 = percentile(&sorted, 25.0);
    let p50 = percentile(&sorted, 50.0);
    let p75 = percentile(&sorted, 75.0);
    let p90 = percentile(&sorted, 90.0);

    let mean = values.iter().sum::<f64>() / n;
    let energy = values.iter().map(|x| x * x).sum::<f64>();
    let total_energy = energy * v.voxel_volume();
    let rms = (energy / n).sqrt();

    let m2 = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let variance = m2;
    let sd = variance.sqrt();
    let (skewness, kurtosis) = if variance < EPS {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    };

    let mad = values.iter().map(|x| (x - mean).abs()).sum::<f64>() / n;
    let robust: Vec<f64> = values
        .iter()
        .cloned()
        .filter(|&x| x >= p10 && x <= p90)
        .collect();
    let rmad = if robust.is_empty() {
        0.0
    } else {
        let rmean = robust.iter().sum::<f64>() / robust.len() as f64;
        robust.iter().map(|x| (x - rmean).abs()).sum::<f64>() / robust.len() as f64
    };

    // Ng-bin histogram entropy/uniformity via the shared discretization.
    let g = discretize(v, m, ng)?;
    let mut hist = vec![0usize; ng + 1];
    for &l in &g.levels {
        if l > 0 {
            hist[l as usize] += 1;
        }
    }
    let mut entropy = 0.0;
    let mut uniformity = 0.0;
    for &c in &hist[1..] {
        let p = c as f64 / n;
        entropy -= xlog2x(p);
        uniformity += p * p;
    }

    Ok(vec![
        energy,
        total_energy,
        entropy,
        minimum,
        p10,
        p90,
        maximum,
        mean,
        p50,
        p75 - p25,
        maximum - minimum,
        mad,
        rmad,
        rms,
        sd,
        skewness,
        kurtosis,
        variance,
        uniformity,
    ])
}
