//! Training loop: MixUp batches, SGD with momentum and weight decay, and a
//! cosine-annealed learning rate.

use super::net::{softmax_ce, LayerParams, Network, NUM_CLASSES};
use super::{NetSpec, NnetError, Tensor};
use crate::rng::{derive_seed, rng_from_seed};
use rand::seq::SliceRandom;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr_max: f64,
    pub lr_min: f64,
    pub epochs: usize,
    pub momentum: f64,
    pub weight_decay: f64,
    pub mixup_alpha: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 2,
            lr_max: 0.01,
            lr_min: 0.0,
            epochs: 100,
            momentum: 0.9,
            weight_decay: 5e-4,
            mixup_alpha: 0.2,
            seed: 0,
        }
    }
}

/// lr_min + (lr_max − lr_min)(1 + cos(π t / T)) / 2
pub fn cosine_lr(t: usize, total: usize, lr_max: f64, lr_min: f64) -> f64 {
    assert!(t <= total && total > 0);
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (std::f64::consts::PI * t as f64 / total as f64).cos())
}

/// Convex combination of two samples and their label vectors.
pub fn mixup(
    x1: &Tensor,
    y1: &[f64],
    x2: &Tensor,
    y2: &[f64],
    lambda: f64,
) -> Result<(Tensor, Vec<f64>), NnetError> {
    if x1.shape != x2.shape || y1.len() != y2.len() {
        return Err(NnetError::ShapeMismatch("mixup inputs differ".into()));
    }
    assert!((0.0..=1.0).contains(&lambda));
    let x = Tensor::from_vec(
        &x1.shape,
        x1.data
            .iter()
            .zip(&x2.data)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect(),
    );
    let y = y1
        .iter()
        .zip(y2)
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    Ok((x, y))
}

/// One SGD update: g' = g + wd·p; v ← momentum·v + g'; p ← p − lr·v.
pub fn sgd_step(
    params: &mut [f64],
    grads: &[f64],
    velocity: &mut [f64],
    lr: f64,
    momentum: f64,
    weight_decay: f64,
) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), velocity.len());
    for i in 0..params.len() {
        let g = grads[i] + weight_decay * params[i];
        velocity[i] = momentum * velocity[i] + g;
        params[i] -= lr * velocity[i];
    }
}

/// Training record: the fitted network, the per-epoch (loss, accuracy)
/// curve, and the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub net: Network,
    /// Per-epoch (mean mixed-batch loss, clean training accuracy).
    pub curve: Vec<(f64, f64)>,
    pub config: TrainConfig,
}

fn one_hot(label: u8) -> [f64; NUM_CLASSES] {
    let mut y = [0.0; NUM_CLASSES];
    y[label as usize] = 1.0;
    y
}

/// Train a preset on (image, label) pairs. Each epoch reshuffles with a
/// seed derived from (config seed, epoch); each batch draws one MixUp
/// λ ~ Beta(α, α) and pairs every sample with a partner from a second
/// seeded permutation. Bit-deterministic in the seed.
pub fn train(dataset: &[(Tensor, u8)], spec: NetSpec, cfg: &TrainConfig) -> Result<Checkpoint, NnetError> {
    let n = dataset.len();
    if n < 2
        || !dataset.iter().any(|(_, l)| *l == 1)
        || !dataset.iter().any(|(_, l)| *l == 0)
    {
        return Err(NnetError::BadTrainingSet);
    }
    let side = spec.input_side;
    for (img, _) in dataset {
        if img.shape != [1, side, side] {
            return Err(NnetError::ShapeMismatch(format!(
                "sample shape {:?}, expected [1, {side}, {side}]",
                img.shape
            )));
        }
    }

    let mut net = Network::init(spec, derive_seed(cfg.seed, 0))?;
    let mut velocity: Vec<Option<LayerParams>> = net
        .params
        .iter()
        .map(|p| {
            p.as_ref().map(|lp| LayerParams {
                w: Tensor::zeros(&lp.w.shape),
                b: Tensor::zeros(&lp.b.shape),
            })
        })
        .collect();
    let beta = if cfg.mixup_alpha > 0.0 {
        Some(Beta::new(cfg.mixup_alpha, cfg.mixup_alpha).unwrap())
    } else {
        None
    };

    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, 1 + epoch as u64));
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut partners: Vec<usize> = (0..n).collect();
        partners.shuffle(&mut rng);
        let lr = cosine_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min);

        let mut loss_sum = 0.0;
        for (batch_no, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let lambda = beta
                .as_ref()
                .map_or(1.0, |b| b.sample(&mut rng).clamp(0.0, 1.0));
            let bs = chunk.len();
            let mut xb = Vec::with_capacity(bs * side * side);
            let mut yb = Vec::with_capacity(bs * NUM_CLASSES);
            for (pos, &i) in chunk.iter().enumerate() {
                let j = partners[(batch_no * cfg.batch_size + pos) % n];
                let (xi, li) = &dataset[i];
                let (xj, lj) = &dataset[j];
                let (x, y) = mixup(xi, &one_hot(*li), xj, &one_hot(*lj), lambda)?;
                xb.extend(x.data);
                yb.extend(y);
            }
            let xb = Tensor::from_vec(&[bs, 1, side, side], xb);
            let yb = Tensor::from_vec(&[bs, NUM_CLASSES], yb);

            let acts = net.forward_cached(&xb)?;
            let (loss, dlogits) = softmax_ce(acts.last().unwrap(), &yb);
            if !loss.is_finite() {
                return Err(NnetError::NonFiniteLoss {
                    epoch,
                    batch: batch_no,
                });
            }
            loss_sum += loss * bs as f64;
            let (grads, _) = net.backward(&acts, dlogits);
            for (p, (g, v)) in net
                .params
                .iter_mut()
                .zip(grads.iter().zip(velocity.iter_mut()))
            {
                let (Some(p), Some(g), Some(v)) = (p.as_mut(), g.as_ref(), v.as_mut()) else {
                    continue;
                };
                sgd_step(&mut p.w.data, &g.w.data, &mut v.w.data, lr, cfg.momentum, cfg.weight_decay);
                sgd_step(&mut p.b.data, &g.b.data, &mut v.b.data, lr, cfg.momentum, cfg.weight_decay);
            }
        }

        // Clean (unmixed) pass for the accuracy entry of the curve.
        let mut hits = 0usize;
        for chunk in (0..n).collect::<Vec<_>>().chunks(16) {
            let mut xb = Vec::with_capacity(chunk.len() * side * side);
            for &i in chunk {
                xb.extend_from_slice(&dataset[i].0.data);
            }
            let xb = Tensor::from_vec(&[chunk.len(), 1, side, side], xb);
            let preds = net.predict(&xb)?;
            hits += preds
                .iter()
                .zip(chunk.iter())
                .filter(|&(&p, &i)| p == dataset[i].1)
                .count();
        }
        curve.push((loss_sum / n as f64, hits as f64 / n as f64));
    }

    Ok(Checkpoint {
        format_version: 1,
        net,
        curve,
        config: cfg.clone(),
    })
}
