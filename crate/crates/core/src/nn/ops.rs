//! The seven layer operations, each as a pure forward / backward pair.
//!
//! Shapes use the conventions of the two model architectures:
//!
//! * `char_conv` / `char_conv_bank` — character convolution over a word's
//!   embedded character rows `[P, m]` (P = word length + 2 boundary markers),
//!   producing `[F, P]` per width (symmetric zero padding of ⌊w/2⌋ rows on
//!   each side; even widths yield one extra position which is trimmed from
//!   the end so every width lines up on exactly P positions).
//! * `max_pool_positions` — max over the position axis of `[F, P]` → `[F]`,
//!   remembering the first argmax per row for the backward routing.
//! * `pair_conv_stride2` — 1×2 filters with stride 2 over the `[n, 4]`
//!   stacked embedding matrix: each filter sees the (A,B) column pair and the
//!   (C,D) column pair of every row. Output is stored position-major as
//!   `[n, 2, C]` so the following 2×2 convolution reads contiguous windows.
//! * `window_conv_2x2` — valid 2×2 cross-correlation with C input channels
//!   over the (position × pair) grid: `[n, 2, C]` → `[C2, n−1]`. The
//!   row-major output order doubles as the filter-major flatten fed to the
//!   dense layer.
//! * `relu`, `dense`, `sigmoid` — the usual definitions; ReLU's subgradient
//!   at 0 is 0, sigmoid backward consumes the forward *output*.
//!
//! Backward passes take the original inputs (plus whatever small cache the
//! forward returned) and the upstream gradient, and return exact analytic
//! gradients for inputs and parameters. All of them are checked against
//! central finite differences in 64-bit mode by [`crate::nn::gradcheck`].

use crate::nn::tensor::{Scalar, Tensor};

/// Dot product with eight independent accumulators.
///
/// The split lets the compiler vectorize without reassociating a single
/// serial sum, and fixes the summation order so results are reproducible.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::ZERO; 8];
    let chunks = a.len() / 8;
    for i in 0..chunks {
        let (ca, cb) = (&a[i * 8..i * 8 + 8], &b[i * 8..i * 8 + 8]);
        for l in 0..8 {
            acc[l] += ca[l] * cb[l];
        }
    }
    let mut tail = T::ZERO;
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))) + tail
}

/// `y += alpha * x`, elementwise.
#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Zero-pad `x` (`[p, m]` rows) with `pad` zero rows on each side.
fn pad_rows<T: Scalar>(x: &Tensor<T>, pad: usize) -> Vec<T> {
    let (p, m) = (x.shape()[0], x.shape()[1]);
    let mut xp = vec![T::ZERO; (p + 2 * pad) * m];
    xp[pad * m..pad * m + p * m].copy_from_slice(x.data());
    xp
}

// ---------------------------------------------------------------------------
// char_conv (one width) and char_conv_bank
// ---------------------------------------------------------------------------

/// Character convolution for one filter width.
///
/// `x`: `[P, m]` embedded character rows; `kernel`: `[F, w, m]`; `bias`: `[F]`.
/// Output `[F, P]`: position t of filter f is the window dot product over
/// rows t..t+w of the ⌊w/2⌋-padded input, plus bias.
pub fn char_conv_forward<T: Scalar>(x: &Tensor<T>, kernel: &Tensor<T>, bias: &Tensor<T>) -> Tensor<T> {
    let (p, m) = (x.shape()[0], x.shape()[1]);
    let (f_cnt, w) = (kernel.shape()[0], kernel.shape()[1]);
    debug_assert_eq!(kernel.shape()[2], m);
    debug_assert_eq!(bias.shape(), &[f_cnt]);
    let xp = pad_rows(x, w / 2);
    let mut out = Tensor::zeros(&[f_cnt, p]);
    let o = out.data_mut();
    for f in 0..f_cnt {
        let kf = &kernel.data()[f * w * m..(f + 1) * w * m];
        let bf = bias.data()[f];
        for t in 0..p {
            o[f * p + t] = bf + dot(kf, &xp[t * m..(t + w) * m]);
        }
    }
    out
}

/// Gradients of [`char_conv_forward`] w.r.t. input, kernel, and bias.
pub fn char_conv_backward<T: Scalar>(
    x: &Tensor<T>,
    kernel: &Tensor<T>,
    d_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let (p, m) = (x.shape()[0], x.shape()[1]);
    let (f_cnt, w) = (kernel.shape()[0], kernel.shape()[1]);
    debug_assert_eq!(d_out.shape(), &[f_cnt, p]);
    let pad = w / 2;
    let xp = pad_rows(x, pad);
    let mut dxp = vec![T::ZERO; xp.len()];
    let mut dk = Tensor::zeros(&[f_cnt, w, m]);
    let mut db = Tensor::zeros(&[f_cnt]);
    for f in 0..f_cnt {
        let kf = &kernel.data()[f * w * m..(f + 1) * w * m];
        let dkf = &mut dk.data_mut()[f * w * m..(f + 1) * w * m];
        let mut dbf = T::ZERO;
        for t in 0..p {
            let g = d_out.data()[f * p + t];
            dbf += g;
            axpy(g, kf, &mut dxp[t * m..(t + w) * m]);
            axpy(g, &xp[t * m..(t + w) * m], dkf);
        }
        db.data_mut()[f] = dbf;
    }
    let mut dx = Tensor::zeros(&[p, m]);
    dx.data_mut().copy_from_slice(&dxp[pad * m..pad * m + p * m]);
    (dx, dk, db)
}

/// Full bank: run [`char_conv_forward`] for every `(kernel, bias)` pair and
/// stack the `[F_w, P]` outputs row-wise into `[Σ F_w, P]`.
///
/// Banks must be supplied in the documented width order (ascending, w=2
/// first) — the row order of the output defines the embedding component
/// order downstream.
pub fn char_conv_bank_forward<T: Scalar>(x: &Tensor<T>, banks: &[(Tensor<T>, Tensor<T>)]) -> Tensor<T> {
    let p = x.shape()[0];
    let n_total: usize = banks.iter().map(|(k, _)| k.shape()[0]).sum();
    let mut out = Tensor::zeros(&[n_total, p]);
    let mut row = 0;
    for (kernel, bias) in banks {
        let part = char_conv_forward(x, kernel, bias);
        let rows = kernel.shape()[0];
        out.data_mut()[row * p..(row + rows) * p].copy_from_slice(part.data());
        row += rows;
    }
    out
}

/// Gradients of [`char_conv_bank_forward`]: d-input plus per-bank (dk, db).
pub fn char_conv_bank_backward<T: Scalar>(
    x: &Tensor<T>,
    banks: &[(Tensor<T>, Tensor<T>)],
    d_out: &Tensor<T>,
) -> (Tensor<T>, Vec<(Tensor<T>, Tensor<T>)>) {
    let (p, m) = (x.shape()[0], x.shape()[1]);
    let mut dx = Tensor::zeros(&[p, m]);
    let mut d_banks = Vec::with_capacity(banks.len());
    let mut row = 0;
    for (kernel, _) in banks {
        let rows = kernel.shape()[0];
        let slice = Tensor::new(&[rows, p], d_out.data()[row * p..(row + rows) * p].to_vec())
            .expect("bank slice shape");
        let (dxi, dk, db) = char_conv_backward(x, kernel, &slice);
        for (a, b) in dx.data_mut().iter_mut().zip(dxi.data()) {
            *a += *b;
        }
        d_banks.push((dk, db));
        row += rows;
    }
    (dx, d_banks)
}

// ---------------------------------------------------------------------------
// max_pool_positions
// ---------------------------------------------------------------------------

/// Max over the position axis: `[F, P]` → `[F]`, plus first-argmax indices.
pub fn max_pool_forward<T: Scalar>(x: &Tensor<T>) -> (Tensor<T>, Vec<usize>) {
    let (f_cnt, p) = (x.shape()[0], x.shape()[1]);
    assert!(p > 0, "max pool over zero positions");
    let mut out = Tensor::zeros(&[f_cnt]);
    let mut arg = vec![0usize; f_cnt];
    for f in 0..f_cnt {
        let row = &x.data()[f * p..(f + 1) * p];
        let (mut best, mut best_t) = (row[0], 0usize);
        for (t, &v) in row.iter().enumerate().skip(1) {
            // strict > keeps the first index on ties
            if v > best {
                best = v;
                best_t = t;
            }
        }
        out.data_mut()[f] = best;
        arg[f] = best_t;
    }
    (out, arg)
}

/// Route `d_out[f]` to the recorded argmax position of row f.
pub fn max_pool_backward<T: Scalar>(argmax: &[usize], positions: usize, d_out: &Tensor<T>) -> Tensor<T> {
    let f_cnt = argmax.len();
    debug_assert_eq!(d_out.shape(), &[f_cnt]);
    let mut dx = Tensor::zeros(&[f_cnt, positions]);
    for f in 0..f_cnt {
        dx.data_mut()[f * positions + argmax[f]] = d_out.data()[f];
    }
    dx
}

// ---------------------------------------------------------------------------
// pair_conv_stride2  (1×2 filters, stride 2, no overlap)
// ---------------------------------------------------------------------------

/// Stride-2 pair convolution over the stacked embedding matrix.
///
/// `s`: `[n, 4]` with columns (A,B,C,D); `w`: `[2, C]` storing all filters'
/// left weights then all right weights; `b`: `[C]`. Output `[n, 2, C]`:
/// `out[i, j, f] = w[0,f]·s[i, 2j] + w[1,f]·s[i, 2j+1] + b[f]`.
pub fn pair_conv_forward<T: Scalar>(s: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let n = s.shape()[0];
    debug_assert_eq!(s.shape()[1], 4);
    let c = w.shape()[1];
    debug_assert_eq!(w.shape(), &[2, c]);
    debug_assert_eq!(b.shape(), &[c]);
    let (w0, w1) = w.data().split_at(c);
    let bias = b.data();
    let mut out = Tensor::zeros(&[n, 2, c]);
    let o = out.data_mut();
    for i in 0..n {
        for j in 0..2 {
            let (s0, s1) = (s.data()[i * 4 + 2 * j], s.data()[i * 4 + 2 * j + 1]);
            let block = &mut o[(i * 2 + j) * c..(i * 2 + j + 1) * c];
            for f in 0..c {
                block[f] = w0[f] * s0 + w1[f] * s1 + bias[f];
            }
        }
    }
    out
}

/// Gradients of [`pair_conv_forward`] w.r.t. the stack, weights, and bias.
pub fn pair_conv_backward<T: Scalar>(
    s: &Tensor<T>,
    w: &Tensor<T>,
    d_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let n = s.shape()[0];
    let c = w.shape()[1];
    debug_assert_eq!(d_out.shape(), &[n, 2, c]);
    let (w0, w1) = w.data().split_at(c);
    let mut ds = Tensor::zeros(&[n, 4]);
    let mut dw = Tensor::zeros(&[2, c]);
    let mut db = Tensor::zeros(&[c]);
    for i in 0..n {
        for j in 0..2 {
            let g = &d_out.data()[(i * 2 + j) * c..(i * 2 + j + 1) * c];
            let (s0, s1) = (s.data()[i * 4 + 2 * j], s.data()[i * 4 + 2 * j + 1]);
            ds.data_mut()[i * 4 + 2 * j] = dot(g, w0);
            ds.data_mut()[i * 4 + 2 * j + 1] = dot(g, w1);
            let (dw0, dw1) = dw.data_mut().split_at_mut(c);
            axpy(s0, g, dw0);
            axpy(s1, g, dw1);
            for (dbf, &gf) in db.data_mut().iter_mut().zip(g) {
                *dbf += gf;
            }
        }
    }
    (ds, dw, db)
}

// ---------------------------------------------------------------------------
// window_conv_2x2  (valid 2×2 cross-correlation over position × pair)
// ---------------------------------------------------------------------------

/// Valid 2×2 convolution with `C` input channels.
///
/// `act`: `[n, 2, C]` position-major activations; `w`: `[C2, 2, 2, C]` so
/// each output filter's weights are one contiguous 4·C block in (di, dj, c)
/// order — exactly the layout of an input window; `b`: `[C2]`.
/// Output `[C2, n−1]`: `out[g, i] = b[g] + ⟨w[g], act[i..i+2, :, :]⟩`.
pub fn window_conv_forward<T: Scalar>(act: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let (n, c) = (act.shape()[0], act.shape()[2]);
    debug_assert_eq!(act.shape()[1], 2);
    let c2 = w.shape()[0];
    debug_assert_eq!(w.shape(), &[c2, 2, 2, c]);
    debug_assert_eq!(b.shape(), &[c2]);
    assert!(n >= 2, "window conv needs at least 2 positions");
    let win = 4 * c;
    let n_out = n - 1;
    let mut out = Tensor::zeros(&[c2, n_out]);
    let o = out.data_mut();
    for i in 0..n_out {
        // rows i and i+1 are adjacent in memory: one contiguous 4·C window
        let window = &act.data()[i * 2 * c..i * 2 * c + win];
        for g in 0..c2 {
            o[g * n_out + i] = b.data()[g] + dot(&w.data()[g * win..(g + 1) * win], window);
        }
    }
    out
}

/// Gradients of [`window_conv_forward`] w.r.t. activations, weights, bias.
pub fn window_conv_backward<T: Scalar>(
    act: &Tensor<T>,
    w: &Tensor<T>,
    d_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let (n, c) = (act.shape()[0], act.shape()[2]);
    let c2 = w.shape()[0];
    let win = 4 * c;
    let n_out = n - 1;
    debug_assert_eq!(d_out.shape(), &[c2, n_out]);
    let mut d_act = Tensor::zeros(&[n, 2, c]);
    let mut dw = Tensor::zeros(&[c2, 2, 2, c]);
    let mut db = Tensor::zeros(&[c2]);
    for i in 0..n_out {
        let window = &act.data()[i * 2 * c..i * 2 * c + win];
        let d_window = &mut d_act.data_mut()[i * 2 * c..i * 2 * c + win];
        for g in 0..c2 {
            let gair = d_out.data()[g * n_out + i];
            db.data_mut()[g] += gair;
            axpy(gair, &w.data()[g * win..(g + 1) * win], d_window);
            axpy(gair, window, &mut dw.data_mut()[g * win..(g + 1) * win]);
        }
    }
    (d_act, dw, db)
}

// ---------------------------------------------------------------------------
// relu / dense / sigmoid
// ---------------------------------------------------------------------------

/// Elementwise `max(0, x)`.
pub fn relu_forward<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    let mut out = x.clone();
    for v in out.data_mut() {
        if *v < T::ZERO {
            *v = T::ZERO;
        }
    }
    out
}

/// ReLU gradient from the pre-activation input; subgradient at 0 is 0.
pub fn relu_backward<T: Scalar>(x: &Tensor<T>, d_out: &Tensor<T>) -> Tensor<T> {
    debug_assert_eq!(x.shape(), d_out.shape());
    let mut dx = d_out.clone();
    for (g, &v) in dx.data_mut().iter_mut().zip(x.data()) {
        if v <= T::ZERO {
            *g = T::ZERO;
        }
    }
    dx
}

/// Dense layer `W x + b` with `x`: `[K]`, `w`: `[O, K]`, `b`: `[O]`.
pub fn dense_forward<T: Scalar>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let k = x.len();
    let o_dim = w.shape()[0];
    debug_assert_eq!(w.shape(), &[o_dim, k]);
    debug_assert_eq!(b.shape(), &[o_dim]);
    let mut out = Tensor::zeros(&[o_dim]);
    for o in 0..o_dim {
        out.data_mut()[o] = b.data()[o] + dot(&w.data()[o * k..(o + 1) * k], x.data());
    }
    out
}

/// Gradients of [`dense_forward`].
pub fn dense_backward<T: Scalar>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    d_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let k = x.len();
    let o_dim = w.shape()[0];
    debug_assert_eq!(d_out.shape(), &[o_dim]);
    let mut dx = Tensor::zeros(&[k]);
    let mut dw = Tensor::zeros(&[o_dim, k]);
    let db = d_out.clone();
    for o in 0..o_dim {
        let g = d_out.data()[o];
        axpy(g, &w.data()[o * k..(o + 1) * k], dx.data_mut());
        axpy(g, x.data(), &mut dw.data_mut()[o * k..(o + 1) * k]);
    }
    (dx, dw, db)
}

/// Numerically stable logistic sigmoid, elementwise.
pub fn sigmoid_forward<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    let mut out = x.clone();
    for v in out.data_mut() {
        *v = sigmoid_scalar(*v);
    }
    out
}

/// Stable `1/(1+e^(−x))` for one value.
#[inline]
pub fn sigmoid_scalar<T: Scalar>(x: T) -> T {
    if x >= T::ZERO {
        T::ONE / (T::ONE + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::ONE + e)
    }
}

/// Sigmoid gradient from the forward *output* y: `d_out · y · (1 − y)`.
pub fn sigmoid_backward<T: Scalar>(y: &Tensor<T>, d_out: &Tensor<T>) -> Tensor<T> {
    debug_assert_eq!(y.shape(), d_out.shape());
    let mut dx = d_out.clone();
    for (g, &yv) in dx.data_mut().iter_mut().zip(y.data()) {
        *g *= yv * (T::ONE - yv);
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive_sum() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64) * 0.25 - 3.0).collect();
        let b: Vec<f64> = (0..37).map(|i| 1.5 - (i as f64) * 0.1).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-9);
    }

    #[test]
    fn relu_clamps_negatives_and_zero() {
        let x = Tensor::new(&[3], vec![-1.0f64, 0.0, 2.0]).unwrap();
        assert_eq!(relu_forward(&x).data(), &[0.0, 0.0, 2.0]);
        let up = Tensor::new(&[2], vec![5.0f64, 5.0]).unwrap();
        let x2 = Tensor::new(&[2], vec![-1.0f64, 2.0]).unwrap();
        assert_eq!(relu_backward(&x2, &up).data(), &[0.0, 5.0]);
    }

    #[test]
    fn sigmoid_midpoint_and_slope() {
        let x = Tensor::new(&[1], vec![0.0f64]).unwrap();
        let y = sigmoid_forward(&x);
        assert_eq!(y.data()[0], 0.5);
        let up = Tensor::new(&[1], vec![1.0f64]).unwrap();
        let g = sigmoid_backward(&y, &up);
        assert!((g.data()[0] - 0.25).abs() < 1e-15, "sigmoid'(0) must be 0.25");
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        let x = Tensor::new(&[2], vec![-500.0f64, 500.0]).unwrap();
        let y = sigmoid_forward(&x);
        assert!(y.data()[0] >= 0.0 && y.data()[0] < 1e-100);
        assert_eq!(y.data()[1], 1.0);
        assert!(y.all_finite());
    }

    #[test]
    fn dense_identity_passes_input_through() {
        let x = Tensor::new(&[3], vec![1.0f64, -2.0, 0.5]).unwrap();
        let mut w = Tensor::zeros(&[3, 3]);
        for i in 0..3 {
            w.data_mut()[i * 3 + i] = 1.0;
        }
        let b = Tensor::zeros(&[3]);
        assert_eq!(dense_forward(&x, &w, &b).data(), x.data());
    }

    #[test]
    fn pair_conv_difference_filter_extracts_relations() {
        // single filter w=(1,−1), b=0 applied to rows (A_i,B_i,C_i,D_i)
        // must yield (A_i−B_i, C_i−D_i) per row
        let s = Tensor::new(&[2, 4], vec![5.0f64, 3.0, 10.0, 4.0, 1.0, 1.0, 0.0, 2.0]).unwrap();
        let w = Tensor::new(&[2, 1], vec![1.0f64, -1.0]).unwrap();
        let b = Tensor::zeros(&[1]);
        let out = pair_conv_forward(&s, &w, &b);
        assert_eq!(out.shape(), &[2, 2, 1]);
        assert_eq!(out.data(), &[2.0, 6.0, 0.0, -2.0]);
    }

    #[test]
    fn window_conv_output_length_is_n_minus_1() {
        for n in [2usize, 10, 80] {
            let act = Tensor::<f64>::from_fn(&[n, 2, 3], |i| (i % 7) as f64 * 0.1);
            let w = Tensor::<f64>::from_fn(&[5, 2, 2, 3], |i| (i % 5) as f64 * 0.01);
            let b = Tensor::zeros(&[5]);
            let out = window_conv_forward(&act, &w, &b);
            assert_eq!(out.shape(), &[5, n - 1]);
        }
    }

    #[test]
    fn max_pool_takes_first_argmax_on_ties() {
        let x = Tensor::new(&[1, 4], vec![1.0f64, 7.0, 7.0, 3.0]).unwrap();
        let (out, arg) = max_pool_forward(&x);
        assert_eq!(out.data(), &[7.0]);
        assert_eq!(arg, vec![1], "ties must route to the first maximum");
        let up = Tensor::new(&[1], vec![2.5f64]).unwrap();
        let dx = max_pool_backward(&arg, 4, &up);
        assert_eq!(dx.data(), &[0.0, 2.5, 0.0, 0.0]);
    }

    #[test]
    fn char_conv_all_widths_produce_p_positions() {
        let p = 6;
        let x = Tensor::<f64>::from_fn(&[p, 4], |i| (i as f64 * 0.37).sin());
        for w in 2..=6 {
            let kernel = Tensor::<f64>::from_fn(&[3, w, 4], |i| (i as f64 * 0.11).cos() * 0.2);
            let bias = Tensor::new(&[3], vec![0.1, -0.2, 0.0]).unwrap();
            let out = char_conv_forward(&x, &kernel, &bias);
            assert_eq!(out.shape(), &[3, p], "width {w} must keep {p} positions");
        }
    }

    #[test]
    fn char_conv_hand_computed_bigram() {
        // width 2, m=2, single filter [[1,0],[0,1]]: position t scores
        // xp[t][0] + xp[t+1][1] with one zero row padded either side.
        let x = Tensor::new(&[3, 2], vec![1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let k = Tensor::new(&[1, 2, 2], vec![1.0f64, 0.0, 0.0, 1.0]).unwrap();
        let b = Tensor::zeros(&[1]);
        let out = char_conv_forward(&x, &k, &b);
        // padded rows: [0,0],[1,2],[3,4],[5,6],[0,0]; windows at t=0..2
        assert_eq!(out.data(), &[0.0 + 2.0, 1.0 + 4.0, 3.0 + 6.0]);
    }

    #[test]
    fn bank_concatenates_in_bank_order() {
        let x = Tensor::<f64>::from_fn(&[4, 2], |i| i as f64 * 0.1);
        let k2 = Tensor::<f64>::from_fn(&[2, 2, 2], |i| i as f64 * 0.01);
        let b2 = Tensor::zeros(&[2]);
        let k3 = Tensor::<f64>::from_fn(&[1, 3, 2], |i| 0.3 - i as f64 * 0.02);
        let b3 = Tensor::zeros(&[1]);
        let banks = vec![(k2.clone(), b2.clone()), (k3.clone(), b3.clone())];
        let out = char_conv_bank_forward(&x, &banks);
        assert_eq!(out.shape(), &[3, 4]);
        let first = char_conv_forward(&x, &k2, &b2);
        let second = char_conv_forward(&x, &k3, &b3);
        assert_eq!(&out.data()[0..8], first.data());
        assert_eq!(&out.data()[8..12], second.data());
    }
}
