//! Network container: parameter storage, forward pass with cached
//! activations, exact backprop, and the three architecture presets.

use super::{ActShape, LayerSpec, NetSpec, NnetError, Tensor};
use crate::rng::rng_from_seed;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub const DEFAULT_INPUT_SIDE: usize = 64;
pub const NUM_CLASSES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub w: Tensor,
    pub b: Tensor,
}

/// A spec plus its parameters; `params[i]` is Some only for conv and dense
/// layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub spec: NetSpec,
    pub params: Vec<Option<LayerParams>>,
}

impl NetSpec {
    /// Architecture presets. `tiny_plain` is a straight conv stack,
    /// `tiny_res` adds additive skips, `tiny_dense` concatenative skips.
    pub fn preset(name: &str) -> Option<NetSpec> {
        use LayerSpec::*;
        let conv = |k, in_ch, out_ch| Conv {
            k,
            in_ch,
            out_ch,
            stride: 1,
            pad: 1,
        };
        let layers = match name {
            "tiny_plain" => vec![
                conv(3, 1, 4),
                Relu,
                MaxPool2,
                conv(3, 4, 8),
                Relu,
                MaxPool2,
                conv(3, 8, 8),
                Relu,
                GlobalAvgPool,
                Dense { out: NUM_CLASSES },
            ],
            "tiny_res" => vec![
                conv(3, 1, 8),
                Relu,
                conv(3, 8, 8),
                AddSkip { from: 1 },
                Relu,
                MaxPool2,
                conv(3, 8, 16),
                Relu,
                conv(3, 16, 16),
                AddSkip { from: 7 },
                Relu,
                MaxPool2,
                GlobalAvgPool,
                Dense { out: NUM_CLASSES },
            ],
            "tiny_dense" => vec![
                conv(3, 1, 4),
                Relu,
                conv(3, 4, 4),
                Relu,
                ConcatSkip { from: 1 },
                MaxPool2,
                conv(3, 8, 4),
                Relu,
                conv(3, 4, 4),
                Relu,
                ConcatSkip { from: 7 },
                MaxPool2,
                GlobalAvgPool,
                Dense { out: NUM_CLASSES },
            ],
            _ => return None,
        };
        Some(NetSpec {
            name: name.to_string(),
            input_side: DEFAULT_INPUT_SIDE,
            layers,
        })
    }

    pub const PRESET_NAMES: [&'static str; 3] = ["tiny_plain", "tiny_res", "tiny_dense"];
}

impl Network {
    /// Seeded He initialization: weights ~ N(0, 2/fan_in), biases zero.
    pub fn init(spec: NetSpec, seed: u64) -> Result<Network, NnetError> {
        let shapes = spec.infer_shapes()?;
        let mut rng = rng_from_seed(seed);
        let mut params = Vec::with_capacity(spec.layers.len());
        for (i, layer) in spec.layers.iter().enumerate() {
            params.push(match *layer {
                LayerSpec::Conv {
                    k, in_ch, out_ch, ..
                } => {
                    let fan_in = in_ch * k * k;
                    let dist = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).unwrap();
                    let w = (0..out_ch * fan_in).map(|_| dist.sample(&mut rng)).collect();
                    Some(LayerParams {
                        w: Tensor::from_vec(&[out_ch, in_ch, k, k], w),
                        b: Tensor::zeros(&[out_ch]),
                    })
                }
                LayerSpec::Dense { out } => {
                    let before = if i == 0 {
                        ActShape::Map(1, spec.input_side, spec.input_side)
                    } else {
                        shapes[i - 1].clone()
                    };
                    let fan_in = match before {
                        ActShape::Flat(n) => n,
                        ActShape::Map(c, h, w) => c * h * w,
                    };
                    let dist = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).unwrap();
                    let w = (0..out * fan_in).map(|_| dist.sample(&mut rng)).collect();
                    Some(LayerParams {
                        w: Tensor::from_vec(&[out, fan_in], w),
                        b: Tensor::zeros(&[out]),
                    })
                }
                _ => None,
            });
        }
        Ok(Network { spec, params })
    }

    /// Forward pass keeping every intermediate activation; `acts[0]` is the
    /// input and `acts[i + 1]` the output of layer i.
    pub fn forward_cached(&self, x: &Tensor) -> Result<Vec<Tensor>, NnetError> {
        if x.shape.len() != 4 || x.shape[1] != 1 || x.shape[2] != self.spec.input_side
            || x.shape[3] != self.spec.input_side
        {
            return Err(NnetError::ShapeMismatch(format!(
                "input shape {:?}, expected [n, 1, {side}, {side}]",
                x.shape,
                side = self.spec.input_side
            )));
        }
        let mut acts = Vec::with_capacity(self.spec.layers.len() + 1);
        acts.push(x.clone());
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let prev = &acts[i];
            let out = match *layer {
                LayerSpec::Conv { stride, pad, .. } => {
                    let p = self.params[i].as_ref().unwrap();
                    conv_forward(prev, &p.w, &p.b, stride, pad)
                }
                LayerSpec::Relu => Tensor::from_vec(
                    &prev.shape,
                    prev.data.iter().map(|&v| v.max(0.0)).collect(),
                ),
                LayerSpec::MaxPool2 => maxpool_forward(prev),
                LayerSpec::GlobalAvgPool => gap_forward(prev),
                LayerSpec::Dense { .. } => {
                    let p = self.params[i].as_ref().unwrap();
                    dense_forward(prev, &p.w, &p.b)
                }
                LayerSpec::AddSkip { from } => {
                    let other = &acts[from + 1];
                    Tensor::from_vec(
                        &prev.shape,
                        prev.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
                    )
                }
                LayerSpec::ConcatSkip { from } => concat_channels(prev, &acts[from + 1]),
            };
            out.debug_assert_finite();
            acts.push(out);
        }
        Ok(acts)
    }

    /// Logits for a batch.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor, NnetError> {
        Ok(self.forward_cached(x)?.pop().unwrap())
    }

    /// Backprop `dout` (gradient w.r.t. the final activation) through the
    /// cached forward pass. Returns per-layer parameter gradients plus the
    /// gradient w.r.t. every activation (`[0]` is the network input).
    pub fn backward(
        &self,
        acts: &[Tensor],
        dout: Tensor,
    ) -> (Vec<Option<LayerParams>>, Vec<Tensor>) {
        let n_layers = self.spec.layers.len();
        let mut act_grads: Vec<Tensor> =
            acts.iter().map(|a| Tensor::zeros(&a.shape)).collect();
        act_grads[n_layers] = dout;
        let mut param_grads: Vec<Option<LayerParams>> = vec![None; n_layers];
        let mut done: Vec<Tensor> = acts.iter().map(|_| Tensor::zeros(&[0])).collect();

        for i in (0..n_layers).rev() {
            // All consumers of acts[i + 1] sit at later layers, already
            // processed, so its gradient is complete here.
            let dy = std::mem::replace(&mut act_grads[i + 1], Tensor::zeros(&[0]));
            match self.spec.layers[i] {
                LayerSpec::Conv { stride, pad, .. } => {
                    let p = self.params[i].as_ref().unwrap();
                    let (dx, dw, db) = conv_backward(&acts[i], &p.w, &dy, stride, pad);
                    add_into(&mut act_grads[i], &dx);
                    param_grads[i] = Some(LayerParams { w: dw, b: db });
                }
                LayerSpec::Relu => {
                    for (j, g) in dy.data.iter().enumerate() {
                        if acts[i].data[j] > 0.0 {
                            act_grads[i].data[j] += g;
                        }
                    }
                }
                LayerSpec::MaxPool2 => {
                    let dx = maxpool_backward(&acts[i], &dy);
                    add_into(&mut act_grads[i], &dx);
                }
                LayerSpec::GlobalAvgPool => {
                    let dx = gap_backward(&acts[i].shape, &dy);
                    add_into(&mut act_grads[i], &dx);
                }
                LayerSpec::Dense { .. } => {
                    let p = self.params[i].as_ref().unwrap();
                    let (dx, dw, db) = dense_backward(&acts[i], &p.w, &dy);
                    add_into(&mut act_grads[i], &dx);
                    param_grads[i] = Some(LayerParams { w: dw, b: db });
                }
                LayerSpec::AddSkip { from } => {
                    add_into(&mut act_grads[i], &dy);
                    let copy = dy.clone();
                    add_into(&mut act_grads[from + 1], &copy);
                }
                LayerSpec::ConcatSkip { from } => {
                    let (da, db_) = split_channels(&dy, &acts[i].shape, &acts[from + 1].shape);
                    add_into(&mut act_grads[i], &da);
                    add_into(&mut act_grads[from + 1], &db_);
                }
            }
            done[i + 1] = dy;
        }
        done[0] = std::mem::replace(&mut act_grads[0], Tensor::zeros(&[0]));
        (param_grads, done)
    }

    /// Predicted class for each sample; exact logit ties go to class 1.
    pub fn predict(&self, x: &Tensor) -> Result<Vec<u8>, NnetError> {
        let logits = self.forward(x)?;
        let n = logits.shape[0];
        Ok((0..n)
            .map(|i| u8::from(logits.data[i * NUM_CLASSES + 1] >= logits.data[i * NUM_CLASSES]))
            .collect())
    }
}

fn add_into(dst: &mut Tensor, src: &Tensor) {
    debug_assert_eq!(dst.shape, src.shape);
    for (d, s) in dst.data.iter_mut().zip(&src.data) {
        *d += s;
    }
}

/// Mean softmax cross-entropy against soft labels; returns the loss and its
/// gradient w.r.t. the logits.
pub fn softmax_ce(logits: &Tensor, y_soft: &Tensor) -> (f64, Tensor) {
    assert_eq!(logits.shape, y_soft.shape);
    let n = logits.shape[0];
    let c = logits.shape[1];
    let mut loss = 0.0;
    let mut grad = Tensor::zeros(&logits.shape);
    for i in 0..n {
        let row = &logits.data[i * c..(i + 1) * c];
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&v| (v - m).exp()).collect();
        let z: f64 = exps.iter().sum();
        for j in 0..c {
            let p = exps[j] / z;
            let y = y_soft.data[i * c + j];
            loss -= y * (p.max(1e-300)).ln();
            grad.data[i * c + j] = (p - y) / n as f64;
        }
    }
    (loss / n as f64, grad)
}

fn conv_forward(x: &Tensor, w: &Tensor, b: &Tensor, stride: usize, pad: usize) -> Tensor {
    let (n, cin, h, wd) = (x.shape[0], x.shape[1], x.shape[2], x.shape[3]);
    let (cout, k) = (w.shape[0], w.shape[2]);
    let oh = (h + 2 * pad - k) / stride + 1;
    let ow = (wd + 2 * pad - k) / stride + 1;
    let mut out = Tensor::zeros(&[n, cout, oh, ow]);
    for bi in 0..n {
        for oc in 0..cout {
            let bias = b.data[oc];
            for y in 0..oh {
                for xo in 0..ow {
                    let mut acc = bias;
                    for ic in 0..cin {
                        let xbase = (bi * cin + ic) * h * wd;
                        let wbase = ((oc * cin + ic) * k) * k;
                        for kh in 0..k {
                            let iy = (y * stride + kh) as i64 - pad as i64;
                            if iy < 0 || iy as usize >= h {
                                continue;
                            }
                            let xrow = xbase + iy as usize * wd;
                            let wrow = wbase + kh * k;
                            for kw in 0..k {
                                let ix = (xo * stride + kw) as i64 - pad as i64;
                                if ix < 0 || ix as usize >= wd {
                                    continue;
                                }
                                acc += x.data[xrow + ix as usize] * w.data[wrow + kw];
                            }
                        }
                    }
                    out.data[((bi * cout + oc) * oh + y) * ow + xo] = acc;
                }
            }
        }
    }
    out
}

fn conv_backward(
    x: &Tensor,
    w: &Tensor,
    dy: &Tensor,
    stride: usize,
    pad: usize,
) -> (Tensor, Tensor, Tensor) {
    let (n, cin, h, wd) = (x.shape[0], x.shape[1], x.shape[2], x.shape[3]);
    let (cout, k) = (w.shape[0], w.shape[2]);
    let (oh, ow) = (dy.shape[2], dy.shape[3]);
    let mut dx = Tensor::zeros(&x.shape);
    let mut dw = Tensor::zeros(&w.shape);
    let mut db = Tensor::zeros(&[cout]);
    for bi in 0..n {
        for oc in 0..cout {
            for y in 0..oh {
                for xo in 0..ow {
                    let g = dy.data[((bi * cout + oc) * oh + y) * ow + xo];
                    if g == 0.0 {
                        continue;
                    }
                    db.data[oc] += g;
                    for ic in 0..cin {
                        let xbase = (bi * cin + ic) * h * wd;
                        let wbase = ((oc * cin + ic) * k) * k;
                        for kh in 0..k {
                            let iy = (y * stride + kh) as i64 - pad as i64;
                            if iy < 0 || iy as usize >= h {
                                continue;
                            }
                            let xrow = xbase + iy as usize * wd;
                            let wrow = wbase + kh * k;
                            for kw in 0..k {
                                let ix = (xo * stride + kw) as i64 - pad as i64;
                                if ix < 0 || ix as usize >= wd {
                                    continue;
                                }
                                dw.data[wrow + kw] += g * x.data[xrow + ix as usize];
                                dx.data[xrow + ix as usize] += g * w.data[wrow + kw];
                            }
                        }
                    }
                }
            }
        }
    }
    (dx, dw, db)
}

fn maxpool_forward(x: &Tensor) -> Tensor {
    let (n, c, h, w) = (x.shape[0], x.shape[1], x.shape[2], x.shape[3]);
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Tensor::zeros(&[n, c, oh, ow]);
    for b in 0..n {
        for ch in 0..c {
            let base = (b * c + ch) * h * w;
            for y in 0..oh {
                for xo in 0..ow {
                    let mut m = f64::NEG_INFINITY;
                    for dy in 0..2 {
                        for dx in 0..2 {
                            m = m.max(x.data[base + (2 * y + dy) * w + 2 * xo + dx]);
                        }
                    }
                    out.data[((b * c + ch) * oh + y) * ow + xo] = m;
                }
            }
        }
    }
    out
}

fn maxpool_backward(x: &Tensor, dyt: &Tensor) -> Tensor {
    let (n, c, h, w) = (x.shape[0], x.shape[1], x.shape[2], x.shape[3]);
    let (oh, ow) = (h / 2, w / 2);
    let mut dx = Tensor::zeros(&x.shape);
    for b in 0..n {
        for ch in 0..c {
            let base = (b * c + ch) * h * w;
            for y in 0..oh {
                for xo in 0..ow {
                    // First maximum in scan order receives the gradient.
                    let (mut best, mut bi) = (f64::NEG_INFINITY, 0);
                    for dy in 0..2 {
                        for dx_ in 0..2 {
                            let idx = base + (2 * y + dy) * w + 2 * xo + dx_;
                            if x.data[idx] > best {
                                best = x.data[idx];
                                bi = idx;
                            }
                        }
                    }
                    dx.data[bi] += dyt.data[((b * c + ch) * oh + y) * ow + xo];
                }
            }
        }
    }
    dx
}

fn gap_forward(x: &Tensor) -> Tensor {
    let (n, c, h, w) = (x.shape[0], x.shape[1], x.shape[2], x.shape[3]);
    let mut out = Tensor::zeros(&[n, c]);
    for b in 0..n {
        for ch in 0..c {
            let base = (b * c + ch) * h * w;
            out.data[b * c + ch] =
                x.data[base..base + h * w].iter().sum::<f64>() / (h * w) as f64;
        }
    }
    out
}

fn gap_backward(x_shape: &[usize], dy: &Tensor) -> Tensor {
    let (n, c, h, w) = (x_shape[0], x_shape[1], x_shape[2], x_shape[3]);
    let mut dx = Tensor::zeros(x_shape);
    for b in 0..n {
        for ch in 0..c {
            let g = dy.data[b * c + ch] / (h * w) as f64;
            let base = (b * c + ch) * h * w;
            for v in &mut dx.data[base..base + h * w] {
                *v = g;
            }
        }
    }
    dx
}

fn dense_forward(x: &Tensor, w: &Tensor, b: &Tensor) -> Tensor {
    let n = x.shape[0];
    let fan_in: usize = x.shape[1..].iter().product();
    let out_dim = w.shape[0];
    let mut out = Tensor::zeros(&[n, out_dim]);
    for i in 0..n {
        let row = &x.data[i * fan_in..(i + 1) * fan_in];
        for o in 0..out_dim {
            let wrow = &w.data[o * fan_in..(o + 1) * fan_in];
            out.data[i * out_dim + o] =
                b.data[o] + row.iter().zip(wrow).map(|(a, c)| a * c).sum::<f64>();
        }
    }
    out
}

fn dense_backward(x: &Tensor, w: &Tensor, dy: &Tensor) -> (Tensor, Tensor, Tensor) {
    let n = x.shape[0];
    let fan_in: usize = x.shape[1..].iter().product();
    let out_dim = w.shape[0];
    let mut dx = Tensor::zeros(&x.shape);
    let mut dw = Tensor::zeros(&w.shape);
    let mut db = Tensor::zeros(&[out_dim]);
    for i in 0..n {
        let row = &x.data[i * fan_in..(i + 1) * fan_in];
        for o in 0..out_dim {
            let g = dy.data[i * out_dim + o];
            db.data[o] += g;
            for j in 0..fan_in {
                dw.data[o * fan_in + j] += g * row[j];
                dx.data[i * fan_in + j] += g * w.data[o * fan_in + j];
            }
        }
    }
    (dx, dw, db)
}

fn concat_channels(a: &Tensor, b: &Tensor) -> Tensor {
    let (n, ca, h, w) = (a.shape[0], a.shape[1], a.shape[2], a.shape[3]);
    let cb = b.shape[1];
    let mut out = Tensor::zeros(&[n, ca + cb, h, w]);
    let plane = h * w;
    for bi in 0..n {
        for c in 0..ca {
            let src = (bi * ca + c) * plane;
            let dst = (bi * (ca + cb) + c) * plane;
            out.data[dst..dst + plane].copy_from_slice(&a.data[src..src + plane]);
        }
        for c in 0..cb {
            let src = (bi * cb + c) * plane;
            let dst = (bi * (ca + cb) + ca + c) * plane;
            out.data[dst..dst + plane].copy_from_slice(&b.data[src..src + plane]);
        }
    }
    out
}

fn split_channels(dy: &Tensor, a_shape: &[usize], b_shape: &[usize]) -> (Tensor, Tensor) {
    let (n, ca, h, w) = (a_shape[0], a_shape[1], a_shape[2], a_shape[3]);
    let cb = b_shape[1];
    let plane = h * w;
    let mut da = Tensor::zeros(a_shape);
    let mut db = Tensor::zeros(b_shape);
    for bi in 0..n {
        for c in 0..ca {
            let src = (bi * (ca + cb) + c) * plane;
            let dst = (bi * ca + c) * plane;
            da.data[dst..dst + plane].copy_from_slice(&dy.data[src..src + plane]);
        }
        for c in 0..cb {
            let src = (bi * (ca + cb) + ca + c) * plane;
            let dst = (bi * cb + c) * plane;
            db.data[dst..dst + plane].copy_from_slice(&dy.data[src..src + plane]);
        }
    }
    (da, db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn one_by_one_identity_kernel_preserves_input() {
        let x = Tensor::from_vec(&[1, 1, 2, 2], vec![1.0, -2.0, 3.5, 0.25]);
        let w = Tensor::from_vec(&[1, 1, 1, 1], vec![1.0]);
        let b = Tensor::zeros(&[1]);
        let y = conv_forward(&x, &w, &b, 1, 0);
        assert_eq!(y.data, x.data);
    }

    #[test]
    fn averaging_kernel_keeps_constant_interior() {
        let x = Tensor::from_vec(&[1, 1, 5, 5], vec![3.0; 25]);
        let w = Tensor::from_vec(&[1, 1, 3, 3], vec![1.0 / 9.0; 9]);
        let b = Tensor::zeros(&[1]);
        let y = conv_forward(&x, &w, &b, 1, 0);
        assert_eq!(y.shape, vec![1, 1, 3, 3]);
        for v in &y.data {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    /// Direct six-nested-loop convolution, written independently of the
    /// production kernel.
    fn conv_oracle(x: &Tensor, w: &Tensor, b: &Tensor, stride: usize, pad: usize) -> Tensor {
        let (n, cin, h, wd) = (x.shape[0], x.shape[1], x.shape[2], x.shape[3]);
        let (cout, k) = (w.shape[0], w.shape[2]);
        let oh = (h + 2 * pad - k) / stride + 1;
        let ow = (wd + 2 * pad - k) / stride + 1;
        let mut out = Tensor::zeros(&[n, cout, oh, ow]);
        let xat = |bi: usize, c: usize, y: i64, xx: i64| -> f64 {
            if y < 0 || xx < 0 || y >= h as i64 || xx >= wd as i64 {
                0.0
            } else {
                x.data[((bi * cin + c) * h + y as usize) * wd + xx as usize]
            }
        };
        for bi in 0..n {
            for oc in 0..cout {
                for y in 0..oh {
                    for xo in 0..ow {
                        let mut acc = b.data[oc];
                        for ic in 0..cin {
                            for kh in 0..k {
                                for kw in 0..k {
                                    acc += xat(
                                        bi,
                                        ic,
                                        (y * stride + kh) as i64 - pad as i64,
                                        (xo * stride + kw) as i64 - pad as i64,
                                    ) * w.data[((oc * cin + ic) * k + kh) * k + kw];
                                }
                            }
                        }
                        out.data[((bi * cout + oc) * oh + y) * ow + xo] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn conv_matches_nested_loop_oracle() {
        let mut rng = crate::rng::rng_from_seed(501);
        let x = Tensor::from_vec(
            &[2, 3, 8, 8],
            (0..2 * 3 * 8 * 8).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let w = Tensor::from_vec(
            &[4, 3, 3, 3],
            (0..4 * 3 * 9).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let b = Tensor::from_vec(&[4], (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect());
        for (stride, pad) in [(1, 1), (1, 0), (2, 1)] {
            let fast = conv_forward(&x, &w, &b, stride, pad);
            let slow = conv_oracle(&x, &w, &b, stride, pad);
            assert_eq!(fast.shape, slow.shape);
            for (a, o) in fast.data.iter().zip(&slow.data) {
                assert!((a - o).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn softmax_rows_sum_to_one_and_loss_is_mean() {
        let mut rng = crate::rng::rng_from_seed(502);
        let logits = Tensor::from_vec(
            &[3, 2],
            (0..6).map(|_| rng.gen_range(-4.0..4.0)).collect(),
        );
        let y = Tensor::from_vec(&[3, 2], vec![1.0, 0.0, 0.3, 0.7, 0.0, 1.0]);
        let (loss, grad) = softmax_ce(&logits, &y);
        assert!(loss >= 0.0);
        // Per-sample losses recomputed one row at a time must average to it.
        let mut acc = 0.0;
        for i in 0..3 {
            let li = Tensor::from_vec(&[1, 2], logits.data[2 * i..2 * i + 2].to_vec());
            let yi = Tensor::from_vec(&[1, 2], y.data[2 * i..2 * i + 2].to_vec());
            acc += softmax_ce(&li, &yi).0;
        }
        assert!((loss - acc / 3.0).abs() < 1e-12);
        // Gradient rows sum to zero since softmax and labels both sum to 1.
        for i in 0..3 {
            assert!((grad.data[2 * i] + grad.data[2 * i + 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_dense_net_with_uniform_labels_has_zero_gradient() {
        let spec = NetSpec {
            name: "d".into(),
            input_side: 4,
            layers: vec![LayerSpec::GlobalAvgPool, LayerSpec::Dense { out: 2 }],
        };
        let mut net = Network::init(spec, 1).unwrap();
        let p = net.params[1].as_mut().unwrap();
        p.w.data.iter_mut().for_each(|v| *v = 0.0);
        let x = Tensor::from_vec(&[1, 1, 4, 4], (0..16).map(f64::from).collect());
        let acts = net.forward_cached(&x).unwrap();
        let (_, dlogits) = softmax_ce(acts.last().unwrap(), &Tensor::from_vec(&[1, 2], vec![0.5, 0.5]));
        assert!(dlogits.data.iter().all(|&g| g.abs() < 1e-15));
    }

    /// Loss as a function of the parameters, for finite differences.
    fn loss_of(net: &Network, x: &Tensor, y: &Tensor) -> f64 {
        softmax_ce(&net.forward(x).unwrap(), y).0
    }

    #[test]
    fn finite_differences_validate_every_preset_gradient() {
        let mut rng = crate::rng::rng_from_seed(503);
        for name in NetSpec::PRESET_NAMES {
            let mut spec = NetSpec::preset(name).unwrap();
            spec.input_side = 8;
            let mut net = Network::init(spec, 77).unwrap();
            let x = Tensor::from_vec(
                &[2, 1, 8, 8],
                (0..2 * 64).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            );
            let y = Tensor::from_vec(&[2, 2], vec![0.8, 0.2, 0.1, 0.9]);

            let acts = net.forward_cached(&x).unwrap();
            let (_, dlogits) = softmax_ce(acts.last().unwrap(), &y);
            let (grads, _) = net.backward(&acts, dlogits);

            let h = 1e-5;
            for li in 0..net.spec.layers.len() {
                let Some(g) = &grads[li] else { continue };
                let (gw, gb) = (g.w.data.clone(), g.b.data.clone());
                for (which, analytic) in [(0, gw), (1, gb)] {
                    for j in 0..analytic.len() {
                        let read = |net: &mut Network, delta: f64| {
                            let p = net.params[li].as_mut().unwrap();
                            let t = if which == 0 { &mut p.w } else { &mut p.b };
                            t.data[j] += delta;
                        };
                        read(&mut net, h);
                        let up = loss_of(&net, &x, &y);
                        read(&mut net, -2.0 * h);
                        let dn = loss_of(&net, &x, &y);
                        read(&mut net, h);
                        let fd = (up - dn) / (2.0 * h);
                        let a = analytic[j];
                        let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
                        assert!(
                            rel < 1e-4,
                            "{name} layer {li} param {which}/{j}: analytic {a}, fd {fd}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn presets_shape_check_at_default_size() {
        for name in NetSpec::PRESET_NAMES {
            let spec = NetSpec::preset(name).unwrap();
            let shapes = spec.infer_shapes().unwrap();
            assert_eq!(*shapes.last().unwrap(), super::super::ActShape::Flat(2));
            let convs = spec
                .layers
                .iter()
                .filter(|l| matches!(l, LayerSpec::Conv { .. }))
                .count();
            assert!(convs <= 6);
        }
    }

    #[test]
    fn prediction_tie_goes_to_positive() {
        let spec = NetSpec {
            name: "d".into(),
            input_side: 2,
            layers: vec![LayerSpec::GlobalAvgPool, LayerSpec::Dense { out: 2 }],
        };
        let mut net = Network::init(spec, 1).unwrap();
        let p = net.params[1].as_mut().unwrap();
        p.w.data.iter_mut().for_each(|v| *v = 0.0);
        let x = Tensor::from_vec(&[1, 1, 2, 2], vec![1.0; 4]);
        assert_eq!(net.predict(&x).unwrap(), vec![1]);
    }
}
