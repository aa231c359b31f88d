//! Central-finite-difference verification of every backward pass.
//!
//! All checks run in 64-bit mode: each differentiable coordinate (inputs and
//! parameters alike) is perturbed by ±`FD_STEP`, the loss is re-evaluated,
//! and `(f₊ − f₋) / 2h` is compared against the analytic gradient with the
//! scale-aware relative error `|a − n| / max(1e−8, |a| + |n|)`.
//!
//! Multi-output layers are reduced to a scalar loss with a fixed random
//! projection: `L = Σ rᵢ·outᵢ`, whose upstream gradient is exactly `r`.
//! Configurations for the piecewise-linear ops keep inputs away from their
//! kinks (ReLU at 0, pooling ties) so the two-sided difference stays on one
//! linear piece.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::nn::ops;
use crate::nn::tensor::Tensor;

/// Perturbation used by the central differences.
pub const FD_STEP: f64 = 1e-5;
/// Acceptance threshold on the worst relative error.
pub const FD_TOL: f64 = 1e-4;

/// Scale-aware relative error between an analytic and a numeric derivative.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / f64::max(1e-8, analytic.abs() + numeric.abs())
}

/// Outcome of one gradient comparison over a coordinate vector.
#[derive(Debug, Clone, Copy)]
pub struct CheckReport {
    /// Worst relative error across all checked coordinates (0 if none).
    pub max_rel_err: f64,
    /// Number of coordinates compared.
    pub checked: usize,
    /// Flat index of the worst coordinate.
    pub worst_coordinate: usize,
}

impl CheckReport {
    pub fn passes(&self) -> bool {
        self.max_rel_err < FD_TOL
    }
}

/// Compare `analytic` against central differences of `f` around `x0`.
///
/// `f` must be a pure function of the coordinate vector. An empty `x0`
/// yields the vacuous report (max error 0).
pub fn check_gradient(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    analytic: &[f64],
) -> CheckReport {
    assert_eq!(x0.len(), analytic.len(), "analytic gradient length mismatch");
    let mut x = x0.to_vec();
    let mut report = CheckReport { max_rel_err: 0.0, checked: x0.len(), worst_coordinate: 0 };
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + FD_STEP;
        let f_plus = f(&x);
        x[i] = orig - FD_STEP;
        let f_minus = f(&x);
        x[i] = orig;
        let numeric = (f_plus - f_minus) / (2.0 * FD_STEP);
        let err = relative_error(analytic[i], numeric);
        if err > report.max_rel_err {
            report.max_rel_err = err;
            report.worst_coordinate = i;
        }
    }
    report
}

/// The seven verifiable layer kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    CharConvBank,
    MaxPoolPositions,
    PairConvStride2,
    WindowConv2x2,
    Relu,
    Dense,
    Sigmoid,
}

impl LayerKind {
    pub const ALL: [LayerKind; 7] = [
        LayerKind::CharConvBank,
        LayerKind::MaxPoolPositions,
        LayerKind::PairConvStride2,
        LayerKind::WindowConv2x2,
        LayerKind::Relu,
        LayerKind::Dense,
        LayerKind::Sigmoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayerKind::CharConvBank => "char_conv_bank",
            LayerKind::MaxPoolPositions => "max_pool_positions",
            LayerKind::PairConvStride2 => "conv_1x2_stride2",
            LayerKind::WindowConv2x2 => "conv_2x2_valid",
            LayerKind::Relu => "relu",
            LayerKind::Dense => "dense",
            LayerKind::Sigmoid => "sigmoid",
        }
    }
}

/// One verified layer configuration.
#[derive(Debug, Clone, Copy)]
pub struct LayerCheck {
    pub kind: LayerKind,
    pub seed: u64,
    pub report: CheckReport,
}

/// A randomized differentiable problem: coordinates, their analytic
/// gradient, and the scalar loss as a pure function of the coordinates.
struct Problem {
    x0: Vec<f64>,
    analytic: Vec<f64>,
    loss: Box<dyn FnMut(&[f64]) -> f64>,
}

impl Problem {
    fn check(mut self) -> CheckReport {
        check_gradient(&mut *self.loss, &self.x0, &self.analytic)
    }
}

/// Projection weights with magnitude in (0.5, 1.5) — bounded away from zero
/// so no output coordinate is accidentally masked.
fn projection(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * rng.random_range(0.5..1.5)
        })
        .collect()
}

fn uniform_vec(rng: &mut ChaCha8Rng, len: usize, limit: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-limit..limit)).collect()
}

/// Split one flat coordinate vector back into tensors of the given shapes.
fn unpack(flat: &[f64], shapes: &[Vec<usize>]) -> Vec<Tensor<f64>> {
    let mut out = Vec::with_capacity(shapes.len());
    let mut off = 0;
    for s in shapes {
        let n: usize = s.iter().product();
        out.push(Tensor::new(s, flat[off..off + n].to_vec()).expect("unpack shape"));
        off += n;
    }
    debug_assert_eq!(off, flat.len());
    out
}

fn pack(tensors: &[&Tensor<f64>]) -> Vec<f64> {
    tensors.iter().flat_map(|t| t.data().iter().copied()).collect()
}

fn bank_problem(rng: &mut ChaCha8Rng) -> Problem {
    let p = rng.random_range(3..=8usize);
    let m = rng.random_range(2..=4usize);
    let f_per = rng.random_range(1..=2usize);
    let widths = [2usize, 3, 4, 5, 6];
    let mut shapes = vec![vec![p, m]];
    for &w in &widths {
        shapes.push(vec![f_per, w, m]);
        shapes.push(vec![f_per]);
    }
    let total: usize = shapes.iter().map(|s| s.iter().product::<usize>()).sum();
    let x0 = uniform_vec(rng, total, 1.0);
    let r = projection(rng, widths.len() * f_per * p);

    let split = |flat: &[f64]| -> (Tensor<f64>, Vec<(Tensor<f64>, Tensor<f64>)>) {
        let mut ts = unpack(flat, &shapes);
        let x = ts.remove(0);
        let mut banks = Vec::with_capacity(5);
        for _ in 0..5 {
            let k = ts.remove(0);
            let b = ts.remove(0);
            banks.push((k, b));
        }
        (x, banks)
    };

    let (x, banks) = split(&x0);
    let d_out = Tensor::new(&[5 * f_per, p], r.clone()).unwrap();
    let (dx, d_banks) = ops::char_conv_bank_backward(&x, &banks, &d_out);
    let mut grads = vec![&dx];
    for (dk, db) in &d_banks {
        grads.push(dk);
        grads.push(db);
    }
    let analytic = pack(&grads);

    let shapes2 = shapes.clone();
    let loss = Box::new(move |flat: &[f64]| {
        let mut ts = unpack(flat, &shapes2);
        let x = ts.remove(0);
        let mut banks = Vec::with_capacity(5);
        for _ in 0..5 {
            let k = ts.remove(0);
            let b = ts.remove(0);
            banks.push((k, b));
        }
        ops::dot(ops::char_conv_bank_forward(&x, &banks).data(), &r)
    });
    Problem { x0, analytic, loss }
}

fn max_pool_problem(rng: &mut ChaCha8Rng) -> Problem {
    let f_cnt = rng.random_range(1..=4usize);
    let p = rng.random_range(2..=6usize);
    // per row: a random permutation of well-separated levels plus tiny
    // jitter, so the argmax is unique with margin far above 2·FD_STEP
    let mut x0 = Vec::with_capacity(f_cnt * p);
    for _ in 0..f_cnt {
        let mut levels: Vec<f64> =
            (0..p).map(|k| k as f64 * 0.2 + rng.random_range(-0.01..0.01)).collect();
        for i in (1..levels.len()).rev() {
            let j = rng.random_range(0..=i);
            levels.swap(i, j);
        }
        x0.extend(levels);
    }
    let r = projection(rng, f_cnt);
    let shape = vec![f_cnt, p];
    let x = Tensor::new(&shape, x0.clone()).unwrap();
    let (_, arg) = ops::max_pool_forward(&x);
    let d_out = Tensor::new(&[f_cnt], r.clone()).unwrap();
    let dx = ops::max_pool_backward(&arg, p, &d_out);
    let analytic = dx.into_data();
    let loss = Box::new(move |flat: &[f64]| {
        let x = Tensor::new(&shape, flat.to_vec()).unwrap();
        let (out, _) = ops::max_pool_forward(&x);
        ops::dot(out.data(), &r)
    });
    Problem { x0, analytic, loss }
}

fn pair_conv_problem(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.random_range(2..=6usize);
    let c = rng.random_range(1..=4usize);
    let shapes = vec![vec![n, 4], vec![2, c], vec![c]];
    let total = n * 4 + 3 * c;
    let x0 = uniform_vec(rng, total, 1.0);
    let r = projection(rng, n * 2 * c);
    let ts = unpack(&x0, &shapes);
    let d_out = Tensor::new(&[n, 2, c], r.clone()).unwrap();
    let (ds, dw, db) = ops::pair_conv_backward(&ts[0], &ts[1], &d_out);
    let analytic = pack(&[&ds, &dw, &db]);
    let shapes2 = shapes.clone();
    let loss = Box::new(move |flat: &[f64]| {
        let ts = unpack(flat, &shapes2);
        ops::dot(ops::pair_conv_forward(&ts[0], &ts[1], &ts[2]).data(), &r)
    });
    Problem { x0, analytic, loss }
}

fn window_conv_problem(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.random_range(2..=6usize);
    let c = rng.random_range(1..=3usize);
    let c2 = rng.random_range(1..=4usize);
    let shapes = vec![vec![n, 2, c], vec![c2, 2, 2, c], vec![c2]];
    let total = n * 2 * c + c2 * 4 * c + c2;
    let x0 = uniform_vec(rng, total, 1.0);
    let r = projection(rng, c2 * (n - 1));
    let ts = unpack(&x0, &shapes);
    let d_out = Tensor::new(&[c2, n - 1], r.clone()).unwrap();
    let (da, dw, db) = ops::window_conv_backward(&ts[0], &ts[1], &d_out);
    let analytic = pack(&[&da, &dw, &db]);
    let shapes2 = shapes.clone();
    let loss = Box::new(move |flat: &[f64]| {
        let ts = unpack(flat, &shapes2);
        ops::dot(ops::window_conv_forward(&ts[0], &ts[1], &ts[2]).data(), &r)
    });
    Problem { x0, analytic, loss }
}

fn relu_problem(rng: &mut ChaCha8Rng) -> Problem {
    let len = rng.random_range(1..=12usize);
    // magnitudes ≥ 0.05 keep both f(x±h) on the same linear piece
    let x0: Vec<f64> = (0..len)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * rng.random_range(0.05..1.0)
        })
        .collect();
    let r = projection(rng, len);
    let shape = vec![len];
    let x = Tensor::new(&shape, x0.clone()).unwrap();
    let d_out = Tensor::new(&shape, r.clone()).unwrap();
    let analytic = ops::relu_backward(&x, &d_out).into_data();
    let loss = Box::new(move |flat: &[f64]| {
        let x = Tensor::new(&shape, flat.to_vec()).unwrap();
        ops::dot(ops::relu_forward(&x).data(), &r)
    });
    Problem { x0, analytic, loss }
}

fn dense_problem(rng: &mut ChaCha8Rng) -> Problem {
    let k = rng.random_range(1..=8usize);
    let o = rng.random_range(1..=4usize);
    let shapes = vec![vec![k], vec![o, k], vec![o]];
    let x0 = uniform_vec(rng, k + o * k + o, 1.0);
    let r = projection(rng, o);
    let ts = unpack(&x0, &shapes);
    let d_out = Tensor::new(&[o], r.clone()).unwrap();
    let (dx, dw, db) = ops::dense_backward(&ts[0], &ts[1], &d_out);
    let analytic = pack(&[&dx, &dw, &db]);
    let shapes2 = shapes.clone();
    let loss = Box::new(move |flat: &[f64]| {
        let ts = unpack(flat, &shapes2);
        ops::dot(ops::dense_forward(&ts[0], &ts[1], &ts[2]).data(), &r)
    });
    Problem { x0, analytic, loss }
}

fn sigmoid_problem(rng: &mut ChaCha8Rng) -> Problem {
    let len = rng.random_range(1..=8usize);
    let x0 = uniform_vec(rng, len, 3.0);
    let r = projection(rng, len);
    let shape = vec![len];
    let x = Tensor::new(&shape, x0.clone()).unwrap();
    let y = ops::sigmoid_forward(&x);
    let d_out = Tensor::new(&shape, r.clone()).unwrap();
    let analytic = ops::sigmoid_backward(&y, &d_out).into_data();
    let loss = Box::new(move |flat: &[f64]| {
        let x = Tensor::new(&shape, flat.to_vec()).unwrap();
        ops::dot(ops::sigmoid_forward(&x).data(), &r)
    });
    Problem { x0, analytic, loss }
}

/// Check one layer kind under one seeded random configuration.
///
/// Every differentiable coordinate — the input *and* all parameters — is
/// verified in a single flat pass.
pub fn check_layer(kind: LayerKind, seed: u64) -> LayerCheck {
    // decorrelate the streams of different kinds at the same seed
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(kind as u64));
    let problem = match kind {
        LayerKind::CharConvBank => bank_problem(&mut rng),
        LayerKind::MaxPoolPositions => max_pool_problem(&mut rng),
        LayerKind::PairConvStride2 => pair_conv_problem(&mut rng),
        LayerKind::WindowConv2x2 => window_conv_problem(&mut rng),
        LayerKind::Relu => relu_problem(&mut rng),
        LayerKind::Dense => dense_problem(&mut rng),
        LayerKind::Sigmoid => sigmoid_problem(&mut rng),
    };
    LayerCheck { kind, seed, report: problem.check() }
}

/// Run every layer kind over `seeds` configurations each (seeds 0..n).
pub fn check_all_layers(seeds: u64) -> Vec<LayerCheck> {
    let mut out = Vec::with_capacity(LayerKind::ALL.len() * seeds as usize);
    for kind in LayerKind::ALL {
        for seed in 0..seeds {
            out.push(check_layer(kind, seed));
        }
    }
    out
}
