//! LASSO-penalized logistic regression (proximal gradient) and a linear SVM
//! (deterministic full-batch subgradient with 1/t decay).

use super::{sigmoid, DesignMatrix, LearnError, LinearKind, LinearModel, Normalization};

/// sign(x)·max(|x| − t, 0)
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn logistic_objective(x: &DesignMatrix, w: &[f64], b: f64, lambda: f64) -> f64 {
    let mut loss = 0.0;
    for i in 0..x.n {
        let s = b + x.row(i).iter().zip(w).map(|(xi, wi)| xi * wi).sum::<f64>();
        let y = f64::from(x.y[i]);
        // -[y log σ(s) + (1-y) log(1-σ(s))] in a numerically stable form.
        loss += s.max(0.0) - y * s + (1.0 + (-s.abs()).exp()).ln();
    }
    loss / x.n as f64 + lambda * w.iter().map(|v| v.abs()).sum::<f64>()
}

/// Minimize mean logistic loss + λ‖w‖₁ (intercept unpenalized) by proximal
/// gradient descent. The step size backtracks (halves) whenever a step would
/// increase the objective, which keeps the objective non-increasing; early
/// stop when the parameter max-change drops below 1e-8.
///
/// `x` is expected to be normalized already; `norm` is stored in the model
/// for inference-time replay.
pub fn train_lasso_logistic(
    x: &DesignMatrix,
    lambda: f64,
    iters: usize,
    step: f64,
    norm: Normalization,
) -> Result<LinearModel, LearnError> {
    if !x.has_both_classes() {
        return Err(LearnError::SingleClass);
    }
    let (n, p) = (x.n, x.p);
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut eta = step;
    let mut obj = logistic_objective(x, &w, b, lambda);

    for it in 0..iters {
        let mut gw = vec![0.0; p];
        let mut gb = 0.0;
        for i in 0..n {
            let s = b + x.row(i).iter().zip(&w).map(|(xi, wi)| xi * wi).sum::<f64>();
            let r = sigmoid(s) - f64::from(x.y[i]);
            gb += r;
            for (g, xi) in gw.iter_mut().zip(x.row(i)) {
                *g += r * xi;
            }
        }
        gb /= n as f64;
        for g in &mut gw {
            *g /= n as f64;
        }
        if !gb.is_finite() || gw.iter().any(|g| !g.is_finite()) {
            return Err(LearnError::NonFiniteLoss(it));
        }

        // Backtrack until the proximal step does not increase the objective.
        loop {
            let w_new: Vec<f64> = w
                .iter()
                .zip(&gw)
                .map(|(&wi, &gi)| soft_threshold(wi - eta * gi, eta * lambda))
                .collect();
            let b_new = b - eta * gb;
            let obj_new = logistic_objective(x, &w_new, b_new, lambda);
            if !obj_new.is_finite() {
                return Err(LearnError::NonFiniteLoss(it));
            }
            if obj_new <= obj + 1e-15 || eta < 1e-12 {
                let max_change = w
                    .iter()
                    .zip(&w_new)
                    .map(|(a, c)| (a - c).abs())
                    .fold((b - b_new).abs(), f64::max);
                w = w_new;
                b = b_new;
                obj = obj_new;
                if max_change < 1e-8 {
                    return Ok(LinearModel {
                        kind: LinearKind::LassoLogistic,
                        weights: w,
                        intercept: b,
                        norm,
                    });
                }
                break;
            }
            eta *= 0.5;
        }
    }

    Ok(LinearModel {
        kind: LinearKind::LassoLogistic,
        weights: w,
        intercept: b,
        norm,
    })
}

/// Minimize (1/2)‖w‖² + C·Σ hinge(yᵢ(w·xᵢ + b)) by full-batch subgradient
/// descent with step = step0 / t per epoch. Labels map internally to ±1.
/// The probability surrogate at inference is logistic(score).
pub fn train_linear_svm(
    x: &DesignMatrix,
    c: f64,
    epochs: usize,
    step0: f64,
    norm: Normalization,
) -> Result<LinearModel, LearnError> {
    if !x.has_both_classes() {
        return Err(LearnError::SingleClass);
    }
    let p = x.p;
    let mut w = vec![0.0; p];
    let mut b = 0.0;

    for t in 1..=epochs {
        let mut gw = w.clone(); // d/dw (1/2)||w||^2 = w
        let mut gb = 0.0;
        for i in 0..x.n {
            let yi = if x.y[i] == 1 { 1.0 } else { -1.0 };
            let margin = yi * (b + x.row(i).iter().zip(&w).map(|(xi, wi)| xi * wi).sum::<f64>());
            if margin < 1.0 {
                for (g, xi) in gw.iter_mut().zip(x.row(i)) {
                    *g -= c * yi * xi;
                }
                gb -= c * yi;
            }
        }
        let eta = step0 / t as f64;
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi -= eta * gi;
        }
        b -= eta * gb;
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFiniteLoss(t));
        }
    }

    Ok(LinearModel {
        kind: LinearKind::LinearSvm,
        weights: w,
        intercept: b,
        norm,
    })
}
