//! Seeded weight initialization.

use rand::Rng;

use crate::nn::tensor::{Scalar, Tensor};

/// Uniform draw in `(−limit, limit)` for every element.
pub fn uniform<T: Scalar, R: Rng>(rng: &mut R, shape: &[usize], limit: f64) -> Tensor<T> {
    Tensor::from_fn(shape, |_| T::from_f64(rng.random_range(-limit..limit)))
}

/// Glorot/Xavier uniform: `±√(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<T: Scalar, R: Rng>(
    rng: &mut R,
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
) -> Tensor<T> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    uniform(rng, shape, limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn glorot_respects_bounds_and_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t: Tensor<f32> = glorot_uniform(&mut rng, &[40, 5], 200, 16);
        let limit = (6.0f64 / 216.0).sqrt() as f32;
        assert!(t.data().iter().all(|&x| x.abs() < limit));
        // not degenerate
        assert!(t.data().iter().any(|&x| x.abs() > limit / 10.0));
        // same seed, same draw
        let mut rng2 = ChaCha8Rng::seed_from_u64(9);
        let t2: Tensor<f32> = glorot_uniform(&mut rng2, &[40, 5], 200, 16);
        assert_eq!(t, t2);
    }
}
