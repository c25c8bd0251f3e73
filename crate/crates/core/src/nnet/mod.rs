//! Small CNN engine: double-precision tensors, a handful of layer kinds
//! with exact backprop, MixUp + SGD training with a cosine schedule, slice
//! extraction with majority voting, and Grad-CAM heatmaps.

mod gradcam;
mod net;
mod slices;
mod train;

pub use gradcam::{gradcam, localization_score};
pub use net::{softmax_ce, Network, DEFAULT_INPUT_SIDE, NUM_CLASSES};
pub use slices::{bilinear_resize, extract_slices, majority_vote, SliceImage};
pub use train::{cosine_lr, mixup, sgd_step, train, Checkpoint, TrainConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnetError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("mask selects no voxels")]
    EmptyMask,
    #[error("vote list is empty")]
    EmptyList,
    #[error("training data must contain both classes and at least 2 samples")]
    BadTrainingSet,
}

/// Dense row-major tensor, up to 4 axes (batch, channel, height, width).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), data.len());
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn debug_assert_finite(&self) {
        debug_assert!(self.data.iter().all(|v| v.is_finite()), "non-finite tensor");
    }
}

/// One layer of a [`NetSpec`]. Skip layers reference the output of an
/// earlier layer by index and combine it with the previous layer's output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LayerSpec {
    Conv {
        k: usize,
        in_ch: usize,
        out_ch: usize,
        stride: usize,
        pad: usize,
    },
    Relu,
    MaxPool2,
    GlobalAvgPool,
    Dense { out: usize },
    AddSkip { from: usize },
    ConcatSkip { from: usize },
}

/// Ordered layer stack with a fixed square grayscale input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub name: String,
    pub input_side: usize,
    pub layers: Vec<LayerSpec>,
}

/// Per-layer activation shape, excluding the batch axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActShape {
    /// (channels, height, width)
    Map(usize, usize, usize),
    /// flat feature vector
    Flat(usize),
}

impl NetSpec {
    /// Infer the activation shape after every layer, validating kernel and
    /// skip compatibility. Index i holds the shape after layer i; the input
    /// shape is (1, side, side).
    pub fn infer_shapes(&self) -> Result<Vec<ActShape>, NnetError> {
        let mut shapes = Vec::with_capacity(self.layers.len());
        let mut cur = ActShape::Map(1, self.input_side, self.input_side);
        for (i, layer) in self.layers.iter().enumerate() {
            let mismatch = |msg: String| NnetError::ShapeMismatch(format!("layer {i}: {msg}"));
            let next = match *layer {
                LayerSpec::Conv {
                    k,
                    in_ch,
                    out_ch,
                    stride,
                    pad,
                } => {
                    let ActShape::Map(c, h, w) = cur else {
                        return Err(mismatch("conv needs a feature map input".into()));
                    };
                    if c != in_ch {
                        return Err(mismatch(format!("conv expects {in_ch} channels, got {c}")));
                    }
                    if h + 2 * pad < k || w + 2 * pad < k || stride == 0 {
                        return Err(mismatch(format!("kernel {k} too large for {h}x{w}")));
                    }
                    ActShape::Map(
                        out_ch,
                        (h + 2 * pad - k) / stride + 1,
                        (w + 2 * pad - k) / stride + 1,
                    )
                }
                LayerSpec::Relu => cur.clone(),
                LayerSpec::MaxPool2 => {
                    let ActShape::Map(c, h, w) = cur else {
                        return Err(mismatch("maxpool needs a feature map input".into()));
                    };
                    if h < 2 || w < 2 {
                        return Err(mismatch(format!("map {h}x{w} too small to pool")));
                    }
                    ActShape::Map(c, h / 2, w / 2)
                }
                LayerSpec::GlobalAvgPool => {
                    let ActShape::Map(c, _, _) = cur else {
                        return Err(mismatch("global_avg_pool needs a feature map".into()));
                    };
                    ActShape::Flat(c)
                }
                LayerSpec::Dense { out } => ActShape::Flat(match cur {
                    ActShape::Flat(_) => out,
                    ActShape::Map(..) => {
                        return Err(mismatch("dense needs a flat input".into()));
                    }
                }),
                LayerSpec::AddSkip { from } => {
                    if from >= i {
                        return Err(mismatch(format!("skip from {from} is not earlier")));
                    }
                    if shapes[from] != cur {
                        return Err(mismatch(format!(
                            "add_skip shapes differ: {:?} vs {:?}",
                            shapes[from], cur
                        )));
                    }
                    cur.clone()
                }
                LayerSpec::ConcatSkip { from } => {
                    if from >= i {
                        return Err(mismatch(format!("skip from {from} is not earlier")));
                    }
                    let (ActShape::Map(c1, h1, w1), ActShape::Map(c2, h2, w2)) =
                        (&cur, &shapes[from])
                    else {
                        return Err(mismatch("concat_skip needs feature maps".into()));
                    };
                    if (h1, w1) != (h2, w2) {
                        return Err(mismatch("concat_skip spatial sizes differ".into()));
                    }
                    ActShape::Map(c1 + c2, *h1, *w1)
                }
            };
            shapes.push(next.clone());
            cur = next;
        }
        Ok(shapes)
    }

    /// Index of the last conv layer (the Grad-CAM target).
    pub fn last_conv_index(&self) -> Option<usize> {
        self.layers
            .iter()
            .rposition(|l| matches!(l, LayerSpec::Conv { .. }))
    }
}
