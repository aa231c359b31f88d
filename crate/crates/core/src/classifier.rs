//! CNN classifier over four stacked word embeddings.
//!
//! The four n-dimensional embeddings (A, B, C, D) are stacked into an n×4
//! matrix. A first convolution applies 128 filters of shape 1×2 with stride
//! 2 — each filter sees the (A,B) column pair and the (C,D) column pair of
//! every row, with no overlap — followed by ReLU. A second convolution
//! applies 64 filters of shape 2×2 (valid, over position × pair, 128 input
//! channels), again followed by ReLU, leaving 64·(n−1) activations. A dense
//! layer and a sigmoid turn those into a validity probability.
//!
//! Channel counts are configurable so the whole stack can be verified at
//! tiny dimensions against finite differences; defaults are 128 and 64.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::init;
use crate::nn::ops;
use crate::nn::tensor::{Scalar, Tensor};

/// Classifier hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Embedding dimension n the classifier expects (default 80).
    pub embedding_dim: usize,
    /// Filters in the stride-2 pair convolution (default 128).
    pub conv1_filters: usize,
    /// Filters in the 2×2 valid convolution (default 64).
    pub conv2_filters: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { embedding_dim: 80, conv1_filters: 128, conv2_filters: 64 }
    }
}

impl ClassifierConfig {
    /// Flattened activation count feeding the dense layer: conv2 · (n−1).
    pub fn dense_inputs(&self) -> usize {
        self.conv2_filters * (self.embedding_dim - 1)
    }
}

/// All trainable state of the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams<T> {
    pub config: ClassifierConfig,
    /// `[2, C1]`: left weights then right weights of the 1×2 filters.
    pub conv1_w: Tensor<T>,
    /// `[C1]`.
    pub conv1_b: Tensor<T>,
    /// `[C2, 2, 2, C1]`: each filter one contiguous (di, dj, channel) block.
    pub conv2_w: Tensor<T>,
    /// `[C2]`.
    pub conv2_b: Tensor<T>,
    /// `[1, C2·(n−1)]` over the filter-major flatten of conv2's output.
    pub fc_w: Tensor<T>,
    /// `[1]`.
    pub fc_b: Tensor<T>,
}

impl<T: Scalar> ClassifierParams<T> {
    /// Seeded Glorot-uniform initialization; biases zero.
    pub fn init<R: Rng>(config: ClassifierConfig, rng: &mut R) -> Self {
        let c1 = config.conv1_filters;
        let c2 = config.conv2_filters;
        let k = config.dense_inputs();
        ClassifierParams {
            config,
            conv1_w: init::glorot_uniform(rng, &[2, c1], 2, c1),
            conv1_b: Tensor::zeros(&[c1]),
            conv2_w: init::glorot_uniform(rng, &[c2, 2, 2, c1], 4 * c1, c2),
            conv2_b: Tensor::zeros(&[c2]),
            fc_w: init::glorot_uniform(rng, &[1, k], k, 1),
            fc_b: Tensor::zeros(&[1]),
        }
    }

    /// Every parameter tensor with its canonical name, in fixed order.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor<T>)> {
        vec![
            ("classifier.conv1.weight".into(), &self.conv1_w),
            ("classifier.conv1.bias".into(), &self.conv1_b),
            ("classifier.conv2.weight".into(), &self.conv2_w),
            ("classifier.conv2.bias".into(), &self.conv2_b),
            ("classifier.fc.weight".into(), &self.fc_w),
            ("classifier.fc.bias".into(), &self.fc_b),
        ]
    }

    /// Mutable view of all tensors, same order as [`Self::named_tensors`].
    pub fn trainable_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        vec![
            ("classifier.conv1.weight".into(), &mut self.conv1_w),
            ("classifier.conv1.bias".into(), &mut self.conv1_b),
            ("classifier.conv2.weight".into(), &mut self.conv2_w),
            ("classifier.conv2.bias".into(), &mut self.conv2_b),
            ("classifier.fc.weight".into(), &mut self.fc_w),
            ("classifier.fc.bias".into(), &mut self.fc_b),
        ]
    }

    pub fn cast<U: Scalar>(&self) -> ClassifierParams<U> {
        ClassifierParams {
            config: self.config,
            conv1_w: self.conv1_w.cast(),
            conv1_b: self.conv1_b.cast(),
            conv2_w: self.conv2_w.cast(),
            conv2_b: self.conv2_b.cast(),
            fc_w: self.fc_w.cast(),
            fc_b: self.fc_b.cast(),
        }
    }
}

/// Gradient accumulator shaped like [`ClassifierParams`].
#[derive(Debug, Clone)]
pub struct ClassifierGrads<T> {
    pub conv1_w: Tensor<T>,
    pub conv1_b: Tensor<T>,
    pub conv2_w: Tensor<T>,
    pub conv2_b: Tensor<T>,
    pub fc_w: Tensor<T>,
    pub fc_b: Tensor<T>,
}

impl<T: Scalar> ClassifierGrads<T> {
    pub fn zeros_like(params: &ClassifierParams<T>) -> Self {
        ClassifierGrads {
            conv1_w: Tensor::zeros(params.conv1_w.shape()),
            conv1_b: Tensor::zeros(params.conv1_b.shape()),
            conv2_w: Tensor::zeros(params.conv2_w.shape()),
            conv2_b: Tensor::zeros(params.conv2_b.shape()),
            fc_w: Tensor::zeros(params.fc_w.shape()),
            fc_b: Tensor::zeros(params.fc_b.shape()),
        }
    }

    pub fn fill_zero(&mut self) {
        self.conv1_w.fill_zero();
        self.conv1_b.fill_zero();
        self.conv2_w.fill_zero();
        self.conv2_b.fill_zero();
        self.fc_w.fill_zero();
        self.fc_b.fill_zero();
    }

    /// Scale every gradient by `factor` (batch averaging).
    pub fn scale(&mut self, factor: T) {
        for t in [
            &mut self.conv1_w,
            &mut self.conv1_b,
            &mut self.conv2_w,
            &mut self.conv2_b,
            &mut self.fc_w,
            &mut self.fc_b,
        ] {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }
}

/// Intermediate activations a backward pass needs.
#[derive(Debug, Clone)]
pub struct ScoreCache<T> {
    /// `[n, 4]` stacked embeddings.
    s: Tensor<T>,
    /// `[n, 2, C1]` pre-ReLU pair-conv output.
    pub(crate) z1: Tensor<T>,
    /// `[n, 2, C1]` post-ReLU.
    a1: Tensor<T>,
    /// `[C2, n−1]` pre-ReLU window-conv output.
    pub(crate) z2: Tensor<T>,
    /// `[C2, n−1]` post-ReLU (the dense layer's input, flattened).
    a2: Tensor<T>,
    /// Sigmoid output.
    p: T,
}

impl<T: Scalar> ScoreCache<T> {
    /// The probability this cache's forward pass produced.
    pub fn probability(&self) -> T {
        self.p
    }
}

fn stack_embeddings<T: Scalar>(
    n: usize,
    a: &Tensor<T>,
    b: &Tensor<T>,
    c: &Tensor<T>,
    d: &Tensor<T>,
) -> Result<Tensor<T>> {
    for (name, e) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if e.shape() != [n] {
            return Err(Error::DimensionMismatch(format!(
                "embedding {name} has shape {:?}, classifier expects [{n}]",
                e.shape()
            )));
        }
    }
    let mut s = Tensor::zeros(&[n, 4]);
    let sd = s.data_mut();
    for i in 0..n {
        sd[i * 4] = a.data()[i];
        sd[i * 4 + 1] = b.data()[i];
        sd[i * 4 + 2] = c.data()[i];
        sd[i * 4 + 3] = d.data()[i];
    }
    Ok(s)
}

/// Score a quadruple of embeddings, keeping the backward cache.
pub fn score_quadruple_forward<T: Scalar>(
    params: &ClassifierParams<T>,
    a: &Tensor<T>,
    b: &Tensor<T>,
    c: &Tensor<T>,
    d: &Tensor<T>,
) -> Result<(T, ScoreCache<T>)> {
    let n = params.config.embedding_dim;
    let s = stack_embeddings(n, a, b, c, d)?;
    let z1 = ops::pair_conv_forward(&s, &params.conv1_w, &params.conv1_b);
    let a1 = ops::relu_forward(&z1);
    let z2 = ops::window_conv_forward(&a1, &params.conv2_w, &params.conv2_b);
    let a2 = ops::relu_forward(&z2);
    let flat = a2.reshaped(&[a2.len()])?;
    let logit = ops::dense_forward(&flat, &params.fc_w, &params.fc_b);
    let p = ops::sigmoid_scalar(logit.data()[0]);
    Ok((p, ScoreCache { s, z1, a1, z2, a2, p }))
}

/// Score a quadruple of embeddings (no cache).
pub fn score_quadruple<T: Scalar>(
    params: &ClassifierParams<T>,
    a: &Tensor<T>,
    b: &Tensor<T>,
    c: &Tensor<T>,
    d: &Tensor<T>,
) -> Result<T> {
    score_quadruple_forward(params, a, b, c, d).map(|(p, _)| p)
}

/// Backward pass from the gradient on the pre-sigmoid logit.
///
/// Training uses the fused binary-cross-entropy/sigmoid gradient `p − y` as
/// `d_logit` (see [`crate::nn::loss::bce_sigmoid_grad`]); verification may
/// instead compose `bce_grad` with a literal sigmoid backward. Returns the
/// `[n, 4]` gradient on the stacked embeddings — column j is the gradient
/// for the j-th input embedding — and accumulates parameter gradients.
pub fn score_quadruple_backward<T: Scalar>(
    params: &ClassifierParams<T>,
    cache: &ScoreCache<T>,
    d_logit: T,
    grads: &mut ClassifierGrads<T>,
) -> Tensor<T> {
    let d_logit_t = Tensor::new(&[1], vec![d_logit]).expect("scalar gradient");
    let flat = cache.a2.reshaped(&[cache.a2.len()]).expect("flatten");
    let (d_flat, d_fc_w, d_fc_b) = ops::dense_backward(&flat, &params.fc_w, &d_logit_t);
    accumulate(&mut grads.fc_w, &d_fc_w);
    accumulate(&mut grads.fc_b, &d_fc_b);
    let d_a2 = d_flat.reshaped(cache.a2.shape()).expect("unflatten");
    let d_z2 = ops::relu_backward(&cache.z2, &d_a2);
    let (d_a1, d_conv2_w, d_conv2_b) = ops::window_conv_backward(&cache.a1, &params.conv2_w, &d_z2);
    accumulate(&mut grads.conv2_w, &d_conv2_w);
    accumulate(&mut grads.conv2_b, &d_conv2_b);
    let d_z1 = ops::relu_backward(&cache.z1, &d_a1);
    let (d_s, d_conv1_w, d_conv1_b) = ops::pair_conv_backward(&cache.s, &params.conv1_w, &d_z1);
    accumulate(&mut grads.conv1_w, &d_conv1_w);
    accumulate(&mut grads.conv1_b, &d_conv1_b);
    d_s
}

fn accumulate<T: Scalar>(acc: &mut Tensor<T>, delta: &Tensor<T>) {
    debug_assert_eq!(acc.shape(), delta.shape());
    for (a, d) in acc.data_mut().iter_mut().zip(delta.data()) {
        *a += *d;
    }
}

/// Threshold a probability into a decision; valid iff `p ≥ threshold`.
pub fn classify<T: Scalar>(p: T, threshold: T) -> bool {
    p >= threshold
}
