//! 3D and 2D shape descriptors.
//!
//! Surface area uses exposed-face counting and perimeter exposed-edge
//! counting, so both are exactly testable. Maximum-diameter features are
//! computed over surface-voxel centers; the search is made exact-but-fast by
//! reducing each planar group to its 2D convex hull (every farthest-pair
//! endpoint is a hull vertex of its own plane).
//!
//! Plane conventions for the 2D maximum diameters: Slice = axial (x,y),
//! Column = coronal (x,z), Row = sagittal (y,z).

use super::{RadiomicsError, EPS};
use crate::volume_io::Mask;
use nalgebra::{Matrix2, Matrix3};
use std::collections::BTreeMap;

pub struct Shape3dFeatures {
    /// Values in `SHAPE3D_NAMES` order.
    pub values: Vec<f64>,
    /// Set when a covariance eigenvalue fell below 1e-12 and the axis
    /// features were reported as 0 instead of aborting.
    pub degenerate: bool,
}

/// 2D convex hull (monotone chain), strict turns. Inputs need not be sorted.
fn convex_hull(points: &[(f64, f64)]) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        points[a]
            .partial_cmp(&points[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cross = |o: usize, a: usize, b: usize| {
        let (ox, oy) = points[o];
        let (ax, ay) = points[a];
        let (bx, by) = points[b];
        (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * n);
    for &i in &idx {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in idx.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    hull
}

/// Max pairwise 3D distance over points grouped into planes along one axis;
/// each group is reduced to its in-plane hull first.
fn max_diameter_grouped(
    points: &[(f64, f64, f64)],
    group_key: impl Fn(&(f64, f64, f64)) -> i64,
    in_plane: impl Fn(&(f64, f64, f64)) -> (f64, f64),
    within_plane_only: bool,
) -> f64 {
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        groups.entry(group_key(p)).or_default().push(i);
    }
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for ids in groups.values() {
        let planar: Vec<(f64, f64)> = ids.iter().map(|&i| in_plane(&points[i])).collect();
        let hull = convex_hull(&planar);
        candidates.push(hull.into_iter().map(|h| ids[h]).collect());
    }
    let mut best = 0.0f64;
    if within_plane_only {
        for ids in &candidates {
            for (a, &i) in ids.iter().enumerate() {
                for &j in &ids[a + 1..] {
                    let (x1, y1) = in_plane(&points[i]);
                    let (x2, y2) = in_plane(&points[j]);
                    let d2 = (x1 - x2).powi(2) + (y1 - y2).powi(2);
                    best = best.max(d2);
                }
            }
        }
    } else {
        let flat: Vec<usize> = candidates.into_iter().flatten().collect();
        for (a, &i) in flat.iter().enumerate() {
            for &j in &flat[a + 1..] {
                let (x1, y1, z1) = points[i];
                let (x2, y2, z2) = points[j];
                let d2 = (x1 - x2).powi(2) + (y1 - y2).powi(2) + (z1 - z2).powi(2);
                best = best.max(d2);
            }
        }
    }
    best.sqrt()
}

/// Descending eigenvalues of a symmetric matrix, clamped at 0.
fn sym_eigvals3(m: Matrix3<f64>) -> [f64; 3] {
    let mut ev: Vec<f64> = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0))
        .collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    [ev[0], ev[1], ev[2]]
}

pub fn shape_features_3d(
    m: &Mask,
    spacing: (f64, f64, f64),
) -> Result<Shape3dFeatures, RadiomicsError> {
    if m.is_empty() {
        return Err(RadiomicsError::EmptyMask);
    }
    let (nx, ny, nz) = m.dims;
    let (sx, sy, sz) = spacing;
    let voxvol = sx * sy * sz;

    let mut count = 0usize;
    let mut surface_area = 0.0f64;
    let mut surface_pts: Vec<(f64, f64, f64)> = Vec::new();
    let mut sum = [0.0f64; 3];

    let in_mask = |x: i64, y: i64, z: i64| -> bool {
        x >= 0
            && y >= 0
            && z >= 0
            && x < nx as i64
            && y < ny as i64
            && z < nz as i64
            && m.bits[x as usize + nx * (y as usize + ny * z as usize)]
    };

    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if !m.at(x, y, z) {
                    continue;
                }
                count += 1;
                let p = (x as f64 * sx, y as f64 * sy, z as f64 * sz);
                sum[0] += p.0;
                sum[1] += p.1;
                sum[2] += p.2;
                let (xi, yi, zi) = (x as i64, y as i64, z as i64);
                let mut exposed = 0.0;
                if !in_mask(xi - 1, yi, zi) {
                    exposed += sy * sz;
                }
                if !in_mask(xi + 1, yi, zi) {
                    exposed += sy * sz;
                }
                if !in_mask(xi, yi - 1, zi) {
                    exposed += sx * sz;
                }
                if !in_mask(xi, yi + 1, zi) {
                    exposed += sx * sz;
                }
                if !in_mask(xi, yi, zi - 1) {
                    exposed += sx * sy;
                }
                if !in_mask(xi, yi, zi + 1) {
                    exposed += sx * sy;
                }
                if exposed > 0.0 {
                    surface_area += exposed;
                    surface_pts.push(p);
                }
            }
        }
    }

    let volume = count as f64 * voxvol;
    let svr = surface_area / volume;
    let sphericity = (36.0 * std::f64::consts::PI * volume * volume).powf(1.0 / 3.0) / surface_area;
    let compactness1 =
        volume / (std::f64::consts::PI.sqrt() * surface_area.powf(1.5));
    let compactness2 =
        36.0 * std::f64::consts::PI * volume * volume / surface_area.powi(3);
    let spherical_disproportion = 1.0 / sphericity;

    // Physical-index keys for the plane grouping. Indices, not physical
    // coordinates, so grouping is exact.
    let key_of = |p: &(f64, f64, f64), s: f64| (p.0 / s).round() as i64;
    let max3d = max_diameter_grouped(&surface_pts, |p| (p.2 / sz).round() as i64, |p| (p.0, p.1), false);
    let max_slice =
        max_diameter_grouped(&surface_pts, |p| (p.2 / sz).round() as i64, |p| (p.0, p.1), true);
    let max_column =
        max_diameter_grouped(&surface_pts, |p| (p.1 / sy).round() as i64, |p| (p.0, p.2), true);
    let max_row = max_diameter_grouped(&surface_pts, |p| key_of(p, sx), |p| (p.1, p.2), true);

    // Population covariance of the physical voxel centers.
    let mean = [sum[0] / count as f64, sum[1] / count as f64, sum[2] / count as f64];
    let mut cov = Matrix3::<f64>::zeros();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if !m.at(x, y, z) {
                    continue;
                }
                let d = [
                    x as f64 * sx - mean[0],
                    y as f64 * sy - mean[1],
                    z as f64 * sz - mean[2],
                ];
                for i in 0..3 {
                    for j in 0..3 {
                        cov[(i, j)] += d[i] * d[j];
                    }
                }
            }
        }
    }
    cov /= count as f64;
    let [l1, l2, l3] = sym_eigvals3(cov);

    let mut degenerate = false;
    let axis = |l: f64| 4.0 * l.sqrt();
    let (major, minor, least) = (axis(l1), axis(l2), axis(l3));
    let (elongation, flatness) = if l1 < EPS {
        degenerate = true;
        (0.0, 0.0)
    } else {
        let e = (l2 / l1).sqrt();
        let f = (l3 / l1).sqrt();
        if l2 < EPS || l3 < EPS {
            degenerate = true;
        }
        (e, f)
    };

    Ok(Shape3dFeatures {
        values: vec![
            volume,
            surface_area,
            svr,
            sphericity,
            compactness1,
            compactness2,
            spherical_disproportion,
            max3d,
            max_slice,
            max_column,
            max_row,
            major,
            minor,
            least,
            elongation,
            flatness,
        ],
        degenerate,
    })
}

/// 2D shape on the axial slice with maximal in-mask area (ties: lowest z).
/// Returns the 10 registry values in `SHAPE2D_NAMES` order.
pub fn shape_features_2d(m: &Mask, spacing: (f64, f64, f64)) -> Result<Vec<f64>, RadiomicsError> {
    if m.is_empty() {
        return Err(RadiomicsError::EmptyMask);
    }
    let (nx, ny, nz) = m.dims;
    let (sx, sy, _) = spacing;

    let mut best_z = 0;
    let mut best_area = 0usize;
    for z in 0..nz {
        let area = (0..ny)
            .map(|y| (0..nx).filter(|&x| m.at(x, y, z)).count())
            .sum();
        if area > best_area {
            best_area = area;
            best_z = z;
        }
    }
    let z = best_z;

    let in_mask = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && x < nx as i64 && y < ny as i64 && m.at(x as usize, y as usize, z)
    };

    let mut count = 0usize;
    let mut perimeter = 0.0f64;
    let mut boundary: Vec<(f64, f64)> = Vec::new();
    let mut sum = [0.0f64; 2];
    for y in 0..ny {
        for x in 0..nx {
            if !m.at(x, y, z) {
                continue;
            }
            count += 1;
            sum[0] += x as f64 * sx;
            sum[1] += y as f64 * sy;
            let (xi, yi) = (x as i64, y as i64);
            let mut exposed = 0.0;
            if !in_mask(xi - 1, yi) {
                exposed += sy;
            }
            if !in_mask(xi + 1, yi) {
                exposed += sy;
            }
            if !in_mask(xi, yi - 1) {
                exposed += sx;
            }
            if !in_mask(xi, yi + 1) {
                exposed += sx;
            }
            if exposed > 0.0 {
                perimeter += exposed;
                boundary.push((x as f64 * sx, y as f64 * sy));
            }
        }
    }

    let area = count as f64 * sx * sy;
    let sphericity2d = 2.0 * (std::f64::consts::PI * area).sqrt() / perimeter;

    let hull = convex_hull(&boundary);
    let mut max_diam2 = 0.0f64;
    for (a, &i) in hull.iter().enumerate() {
        for &j in &hull[a + 1..] {
            let d2 =
                (boundary[i].0 - boundary[j].0).powi(2) + (boundary[i].1 - boundary[j].1).powi(2);
            max_diam2 = max_diam2.max(d2);
        }
    }

    let mean = [sum[0] / count as f64, sum[1] / count as f64];
    let mut cov = Matrix2::<f64>::zeros();
    for y in 0..ny {
        for x in 0..nx {
            if !m.at(x, y, z) {
                continue;
            }
            let d = [x as f64 * sx - mean[0], y as f64 * sy - mean[1]];
            for i in 0..2 {
                for j in 0..2 {
                    cov[(i, j)] += d[i] * d[j];
                }
            }
        }
    }
    cov /= count as f64;
    let mut ev: Vec<f64> = cov
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0))
        .collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (l1, l2) = (ev[0], ev[1]);

    let (elongation, eccentricity) = if l1 < EPS {
        (0.0, 0.0)
    } else {
        ((l2 / l1).sqrt(), (1.0 - l2 / l1).sqrt())
    };

    Ok(vec![
        area,
        perimeter,
        perimeter / area,
        sphericity2d,
        1.0 / sphericity2d,
        max_diam2.sqrt(),
        4.0 * l1.sqrt(),
        4.0 * l2.sqrt(),
        elongation,
        eccentricity,
    ])
}
