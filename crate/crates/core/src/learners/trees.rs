//! Tree ensembles: a bagged random forest with Gini splits and gradient
//! boosting with logistic loss and Newton leaf values.

use super::{sigmoid, DesignMatrix, LearnError, EPS};
use crate::rng::{derive_seed, rng_from_seed};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Gini impurity 1 − Σ (c_k/n)².
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    assert!(n > 0);
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Axis-aligned binary tree; rows with feature value <= threshold go left.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum TreeNode {
    Leaf { value: f64 },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn eval(&self, row: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf { value } => *value,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.eval(row)
                } else {
                    right.eval(row)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub max_depth: usize,
    pub mtry: usize,
    pub seed: u64,
}

impl ForestModel {
    /// Mean of per-tree leaf class-1 frequencies.
    pub fn prob(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.eval(row)).sum::<f64>() / self.trees.len() as f64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoostModel {
    pub trees: Vec<TreeNode>,
    pub depth: usize,
    pub nu: f64,
    pub prior_log_odds: f64,
}

impl BoostModel {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.prior_log_odds + self.nu * self.trees.iter().map(|t| t.eval(row)).sum::<f64>()
    }

    pub fn prob(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}

/// Best split on one feature by the given impurity-sum criterion, as
/// (threshold, total impurity after the split). Thresholds are midpoints
/// between sorted distinct values.
fn best_split_on_feature(
    x: &DesignMatrix,
    rows: &[usize],
    feature: usize,
    // impurity of a subset, scaled so that sums across children compare
    // directly (count-weighted Gini for classification, SSE for regression)
    subset_cost: &dyn Fn(&[usize]) -> f64,
) -> Option<(f64, f64)> {
    let mut order: Vec<usize> = rows.to_vec();
    order.sort_by(|&a, &b| {
        x.row(a)[feature]
            .partial_cmp(&x.row(b)[feature])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut best: Option<(f64, f64)> = None;
    for i in 1..order.len() {
        let lo = x.row(order[i - 1])[feature];
        let hi = x.row(order[i])[feature];
        if lo == hi {
            continue;
        }
        let threshold = (lo + hi) / 2.0;
        let cost = subset_cost(&order[..i]) + subset_cost(&order[i..]);
        // Strict improvement keeps the lowest threshold on cost ties.
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((threshold, cost));
        }
    }
    best
}

fn class_counts(y: &[u8], rows: &[usize]) -> [usize; 2] {
    let pos = rows.iter().filter(|&&i| y[i] == 1).count();
    [rows.len() - pos, pos]
}

fn build_class_tree(
    x: &DesignMatrix,
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    mtry: usize,
    rng: &mut impl Rng,
) -> TreeNode {
    let counts = class_counts(&x.y, rows);
    let leaf = TreeNode::Leaf {
        value: counts[1] as f64 / rows.len() as f64,
    };
    if depth >= max_depth || counts[0] == 0 || counts[1] == 0 {
        return leaf;
    }

    let mut features: Vec<usize> = (0..x.p).collect();
    features.shuffle(rng);
    features.truncate(mtry);
    // Sorted candidate order makes the lowest feature index win on cost ties.
    features.sort_unstable();

    let cost = |subset: &[usize]| -> f64 {
        let c = class_counts(&x.y, subset);
        gini(&c) * subset.len() as f64
    };
    let parent_cost = cost(rows);
    let mut best: Option<(usize, f64, f64)> = None;
    for &f in &features {
        if let Some((threshold, c)) = best_split_on_feature(x, rows, f, &cost) {
            if best.is_none_or(|(_, _, bc)| c < bc) {
                best = Some((f, threshold, c));
            }
        }
    }
    let Some((feature, threshold, c)) = best else {
        return leaf;
    };
    if c >= parent_cost {
        return leaf;
    }

    let (left, right): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| x.row(i)[feature] <= threshold);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(build_class_tree(x, &left, depth + 1, max_depth, mtry, rng)),
        right: Box::new(build_class_tree(x, &right, depth + 1, max_depth, mtry, rng)),
    }
}

/// Bagged forest: per-tree seeded bootstrap of the rows, best Gini split
/// among mtry sampled features, midpoint thresholds, class-frequency leaves.
pub fn train_random_forest(
    x: &DesignMatrix,
    trees: usize,
    max_depth: usize,
    mtry: usize,
    seed: u64,
) -> Result<ForestModel, LearnError> {
    if !x.has_both_classes() {
        return Err(LearnError::SingleClass);
    }
    assert!(mtry >= 1 && mtry <= x.p);
    let mut out = Vec::with_capacity(trees);
    for t in 0..trees {
        let mut rng = rng_from_seed(derive_seed(seed, t as u64));
        let rows: Vec<usize> = (0..x.n).map(|_| rng.gen_range(0..x.n)).collect();
        out.push(build_class_tree(x, &rows, 0, max_depth, mtry, &mut rng));
    }
    Ok(ForestModel {
        trees: out,
        max_depth,
        mtry,
        seed,
    })
}

fn build_reg_tree(
    x: &DesignMatrix,
    rows: &[usize],
    residual: &[f64],
    hessian: &[f64],
    depth: usize,
    max_depth: usize,
) -> TreeNode {
    let newton = |subset: &[usize]| -> f64 {
        let num: f64 = subset.iter().map(|&i| residual[i]).sum();
        let den: f64 = subset.iter().map(|&i| hessian[i]).sum();
        num / den.max(EPS)
    };
    let leaf = TreeNode::Leaf { value: newton(rows) };
    if depth >= max_depth || rows.len() < 2 {
        return leaf;
    }

    let sse = |subset: &[usize]| -> f64 {
        let mean = subset.iter().map(|&i| residual[i]).sum::<f64>() / subset.len() as f64;
        subset.iter().map(|&i| (residual[i] - mean).powi(2)).sum()
    };
    let parent_cost = sse(rows);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x.p {
        if let Some((threshold, c)) = best_split_on_feature(x, rows, f, &sse) {
            if best.is_none_or(|(_, _, bc)| c < bc) {
                best = Some((f, threshold, c));
            }
        }
    }
    let Some((feature, threshold, c)) = best else {
        return leaf;
    };
    if c >= parent_cost {
        return leaf;
    }

    let (left, right): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| x.row(i)[feature] <= threshold);
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(build_reg_tree(x, &left, residual, hessian, depth + 1, max_depth)),
        right: Box::new(build_reg_tree(x, &right, residual, hessian, depth + 1, max_depth)),
    }
}

/// Gradient boosting with logistic loss. F starts at the prior log-odds;
/// each round fits a depth-limited regression tree to residuals y − σ(F)
/// with Newton leaf values Σr / Σσ(1−σ), then F ← F + ν·tree.
pub fn train_gbt(
    x: &DesignMatrix,
    trees: usize,
    depth: usize,
    nu: f64,
    _seed: u64,
) -> Result<BoostModel, LearnError> {
    if !x.has_both_classes() {
        return Err(LearnError::SingleClass);
    }
    let n = x.n;
    let pos = x.y.iter().filter(|&&l| l == 1).count() as f64;
    let prior = (pos / (n as f64 - pos)).ln();
    let mut f = vec![prior; n];
    let rows: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(trees);

    for round in 0..trees {
        let mut residual = vec![0.0; n];
        let mut hessian = vec![0.0; n];
        for i in 0..n {
            let p = sigmoid(f[i]);
            residual[i] = f64::from(x.y[i]) - p;
            hessian[i] = p * (1.0 - p);
        }
        let tree = build_reg_tree(x, &rows, &residual, &hessian, 0, depth);
        for i in 0..n {
            f[i] += nu * tree.eval(x.row(i));
            if !f[i].is_finite() {
                return Err(LearnError::NonFiniteLoss(round));
            }
        }
        out.push(tree);
    }

    Ok(BoostModel {
        trees: out,
        depth,
        nu,
        prior_log_odds: prior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_closed_forms() {
        assert_eq!(gini(&[10, 0]), 0.0);
        assert_eq!(gini(&[5, 5]), 0.5);
        assert!((gini(&[3, 1]) - 0.375).abs() < 1e-15);
    }

    fn xor_matrix(copies: usize) -> DesignMatrix {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..copies {
            for (a, b) in [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)] {
                x.push(a);
                x.push(b);
                y.push(u8::from(a != b));
            }
        }
        DesignMatrix::new(4 * copies, 2, x, y, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn pure_labels_give_depth_zero_tree() {
        let dm = DesignMatrix::new(
            4,
            1,
            vec![1.0, 2.0, 3.0, 4.0],
            vec![1, 1, 1, 1],
            vec!["f0".into()],
        )
        .unwrap();
        let rows: Vec<usize> = (0..4).collect();
        let mut rng = rng_from_seed(1);
        let tree = build_class_tree(&dm, &rows, 0, 6, 1, &mut rng);
        assert_eq!(tree.depth(), 0);
        assert_eq!(tree.eval(&[2.0]), 1.0);
    }

    #[test]
    fn forest_learns_xor_while_stumps_cannot() {
        let dm = xor_matrix(25);
        let forest = train_random_forest(&dm, 100, 6, 1, 11).unwrap();
        let forest_hits = (0..dm.n)
            .filter(|&i| u8::from(forest.prob(dm.row(i)) > 0.5) == dm.y[i])
            .count();
        assert!(forest_hits as f64 / dm.n as f64 >= 0.95, "{forest_hits}/{}", dm.n);

        // A single depth-1 tree sees both features and still cannot beat 0.75.
        let rows: Vec<usize> = (0..dm.n).collect();
        let mut rng = rng_from_seed(12);
        let stump = build_class_tree(&dm, &rows, 0, 1, 2, &mut rng);
        let stump_hits = (0..dm.n)
            .filter(|&i| u8::from(stump.eval(dm.row(i)) > 0.5) == dm.y[i])
            .count();
        assert!(stump_hits as f64 / dm.n as f64 <= 0.75, "{stump_hits}/{}", dm.n);
    }

    #[test]
    fn forest_is_deterministic_in_seed() {
        let dm = xor_matrix(10);
        let a = train_random_forest(&dm, 20, 4, 1, 7).unwrap();
        let b = train_random_forest(&dm, 20, 4, 1, 7).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = train_random_forest(&dm, 20, 4, 1, 8).unwrap();
        assert_ne!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn tie_break_prefers_lowest_feature_and_threshold() {
        // Feature 1 duplicates feature 0, so costs tie exactly; the split
        // must land on feature 0. Values 0/1 vs 0/2 pin the threshold rule.
        let dm = DesignMatrix::new(
            4,
            2,
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
            vec![0, 0, 1, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let rows: Vec<usize> = (0..4).collect();
        let mut rng = rng_from_seed(3);
        let tree = build_class_tree(&dm, &rows, 0, 3, 2, &mut rng);
        match tree {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 0.5);
            }
            TreeNode::Leaf { .. } => panic!("expected a split"),
        }
    }

    fn mean_logloss(f: impl Fn(&[f64]) -> f64, dm: &DesignMatrix) -> f64 {
        (0..dm.n)
            .map(|i| {
                let p = f(dm.row(i)).clamp(1e-12, 1.0 - 1e-12);
                if dm.y[i] == 1 {
                    -p.ln()
                } else {
                    -(1.0 - p).ln()
                }
            })
            .sum::<f64>()
            / dm.n as f64
    }

    #[test]
    fn zero_learning_rate_predicts_the_prior() {
        let dm = xor_matrix(5);
        let m = train_gbt(&dm, 10, 2, 0.0, 1).unwrap();
        let prior_p = sigmoid(m.prior_log_odds);
        for i in 0..dm.n {
            assert!((m.prob(dm.row(i)) - prior_p).abs() < 1e-15);
        }
    }

    #[test]
    fn one_round_beats_the_prior_on_separable_data() {
        let dm = DesignMatrix::new(
            6,
            1,
            vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0],
            vec![0, 0, 0, 1, 1, 1],
            vec!["f0".into()],
        )
        .unwrap();
        let m = train_gbt(&dm, 1, 1, 0.1, 1).unwrap();
        let prior = m.prior_log_odds;
        let prior_loss = mean_logloss(|_| sigmoid(prior), &dm);
        let model_loss = mean_logloss(|r| m.prob(r), &dm);
        assert!(model_loss < prior_loss, "{model_loss} vs {prior_loss}");
    }

    #[test]
    fn training_loss_is_non_increasing_over_rounds() {
        use rand::Rng;
        let mut rng = rng_from_seed(21);
        let n = 40;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            x.push(a);
            x.push(b);
            y.push(u8::from(a + 0.5 * b + 0.2 * rng.gen_range(-1.0..1.0) > 0.0));
        }
        let dm = DesignMatrix::new(n, 2, x, y, vec!["a".into(), "b".into()]).unwrap();
        let m = train_gbt(&dm, 200, 2, 0.1, 1).unwrap();

        // Replay the staged ensemble round by round.
        let mut f: Vec<f64> = vec![m.prior_log_odds; n];
        let mut prev = mean_logloss(|_| sigmoid(m.prior_log_odds), &dm);
        for tree in &m.trees {
            for i in 0..n {
                f[i] += m.nu * tree.eval(dm.row(i));
            }
            let loss = (0..n)
                .map(|i| {
                    let p = sigmoid(f[i]).clamp(1e-12, 1.0 - 1e-12);
                    if dm.y[i] == 1 { -p.ln() } else { -(1.0 - p).ln() }
                })
                .sum::<f64>()
                / n as f64;
            assert!(loss <= prev + 1e-9, "loss rose: {loss} > {prev}");
            prev = loss;
        }
    }

    #[test]
    fn single_class_inputs_are_rejected() {
        let dm = DesignMatrix::new(3, 1, vec![1.0, 2.0, 3.0], vec![1, 1, 1], vec!["f".into()])
            .unwrap();
        assert!(matches!(
            train_random_forest(&dm, 5, 3, 1, 1),
            Err(LearnError::SingleClass)
        ));
        assert!(matches!(train_gbt(&dm, 5, 2, 0.1, 1), Err(LearnError::SingleClass)));
    }
}
