//! End-to-end training of the embedder and classifier on analogy data.
//!
//! One *base* quadruple contributes a block of examples per update: its 8
//! equivalent forms as positives plus 3 invalid reorderings as negatives
//! (an extended mode uses 8 negatives instead). The four words are embedded
//! once per base and every form reuses those embeddings — a form only
//! permutes which embedding sits in which input column, and the same
//! permutation routes the embedding gradients back to the right words.
//!
//! Batches count base quadruples, not examples; gradients are averaged over
//! the examples actually formed. The backward pass starts from the fused
//! sigmoid/cross-entropy gradient `p − y`, which stays exact where the
//! separate factors would saturate in f32. Sampling, weight initialization,
//! and the per-epoch reshuffle all derive from one seed, so two runs with
//! the same data and configuration produce bit-identical models.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::classifier::{
    self, ClassifierConfig, ClassifierGrads, ClassifierParams, ScoreCache,
};
use crate::corpus::{self, AnalogyDataset, Split};
use crate::embedder::{
    self, CharVocab, EmbedderConfig, EmbedderGrads, EmbedderParams,
};
use crate::error::{Error, Result};
use crate::nn::adam::{AdamConfig, AdamState};
use crate::nn::gradcheck::{self, CheckReport};
use crate::nn::{loss, ops, Scalar, Tensor};

/// The 8 equivalent forms as column permutations of the base (A,B,C,D) =
/// (0,1,2,3): entry j of a map names the base word that fills input column
/// j. Order matches [`crate::augment::equivalent_forms`], which a test
/// enforces.
const POSITIVE_MAPS: [[usize; 4]; 8] = [
    [0, 1, 2, 3],
    [2, 3, 0, 1],
    [0, 2, 1, 3],
    [1, 0, 3, 2],
    [3, 1, 2, 0],
    [3, 2, 1, 0],
    [2, 0, 3, 1],
    [1, 3, 0, 2],
];

/// The 3 base negatives as column permutations; order matches
/// [`crate::augment::negative_forms`].
const NEGATIVE_MAPS: [[usize; 4]; 3] = [[1, 0, 2, 3], [2, 1, 0, 3], [0, 0, 2, 3]];

/// Column permutations and labels of one base's training examples:
/// 8 positives followed by `negatives_per_base` ∈ {3, 8} negatives.
///
/// The extended negative list mirrors
/// [`crate::augment::negative_forms_extended`]: the 3 base negatives, then
/// equivalent form f = 1..5 of negative (f+1) mod 3 — a rotated round-robin
/// over the bases covering every structural family of invalid reordering.
pub fn training_maps(negatives_per_base: usize) -> Result<Vec<([usize; 4], bool)>> {
    if negatives_per_base != 3 && negatives_per_base != 8 {
        return Err(Error::InvalidInput(format!(
            "negatives per base must be 3 or 8, got {negatives_per_base}"
        )));
    }
    let mut maps: Vec<([usize; 4], bool)> =
        POSITIVE_MAPS.iter().map(|&m| (m, true)).collect();
    for &m in &NEGATIVE_MAPS {
        maps.push((m, false));
    }
    if negatives_per_base == 8 {
        for form in 1..=5 {
            let neg = NEGATIVE_MAPS[(form + 1) % 3];
            let mut composed = [0usize; 4];
            for (slot, c) in composed.iter_mut().enumerate() {
                *c = neg[POSITIVE_MAPS[form][slot]];
            }
            maps.push((composed, false));
        }
    }
    Ok(maps)
}

/// Everything that shapes a training run. All fields have defaults, so a
/// partial JSON config deserializes with the rest filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Passes over the sampled training set.
    pub epochs: usize,
    /// Base quadruples drawn (without replacement) from the dataset; the
    /// draw is clamped to the dataset size.
    pub sample: usize,
    /// Base quadruples per optimizer step.
    pub batch_size: usize,
    /// Adam step size.
    pub learning_rate: f64,
    /// Master seed for sampling, initialization, and shuffling.
    pub seed: u64,
    /// Negative forms per base: 3 (default) or 8 (extended mode).
    pub negatives_per_base: usize,
    /// Character embedding size m.
    pub char_dim: usize,
    /// Convolution filters per width in the embedder (n = 5 × this).
    pub filters_per_width: usize,
    /// Train embedder filter biases (they stay zero when off).
    pub use_bias: bool,
    /// First classifier convolution's filter count.
    pub conv1_filters: usize,
    /// Second classifier convolution's filter count.
    pub conv2_filters: usize,
    /// Decision threshold the trained model classifies with.
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            sample: 50_000,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            negatives_per_base: 3,
            char_dim: 64,
            filters_per_width: 16,
            use_bias: true,
            conv1_filters: 128,
            conv2_filters: 64,
            threshold: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn embedder_config(&self) -> EmbedderConfig {
        EmbedderConfig {
            char_dim: self.char_dim,
            filters_per_width: self.filters_per_width,
            use_bias: self.use_bias,
        }
    }

    pub fn classifier_config(&self) -> ClassifierConfig {
        ClassifierConfig {
            embedding_dim: self.embedder_config().output_dim(),
            conv1_filters: self.conv1_filters,
            conv2_filters: self.conv2_filters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epochs", self.epochs),
            ("sample", self.sample),
            ("batch_size", self.batch_size),
            ("char_dim", self.char_dim),
            ("filters_per_width", self.filters_per_width),
            ("conv1_filters", self.conv1_filters),
            ("conv2_filters", self.conv2_filters),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "learning rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if self.negatives_per_base != 3 && self.negatives_per_base != 8 {
            return Err(Error::InvalidInput(format!(
                "negatives per base must be 3 or 8, got {}",
                self.negatives_per_base
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidInput(format!(
                "threshold must lie strictly between 0 and 1, got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Per-epoch training telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    /// Zero-based epoch index.
    pub epoch: usize,
    /// Mean binary cross-entropy over every example seen this epoch.
    pub mean_loss: f64,
    /// Examples seen this epoch (bases × forms per base).
    pub examples: usize,
}

/// One splitmix64 round; stretches the master seed into independent
/// per-purpose seeds without correlated streams.
fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Forward + backward over every form of one base quadruple.
///
/// Embeds the four words once, scores each permuted form against its label,
/// and accumulates parameter gradients (unaveraged) into `egrads`/`cgrads`.
/// Returns the summed loss over the forms.
fn base_quadruple_pass<T: Scalar>(
    emb: &EmbedderParams<T>,
    cls: &ClassifierParams<T>,
    vocab: &CharVocab,
    words: [&str; 4],
    maps: &[([usize; 4], bool)],
    egrads: &mut EmbedderGrads<T>,
    cgrads: &mut ClassifierGrads<T>,
) -> Result<T> {
    let n = emb.output_dim();
    let mut embeddings = Vec::with_capacity(4);
    let mut caches = Vec::with_capacity(4);
    for w in words {
        let (e, cache) = embedder::embed_word_forward(emb, vocab, w)?;
        embeddings.push(e);
        caches.push(cache);
    }
    let mut d_emb = vec![Tensor::<T>::zeros(&[n]); 4];
    let mut total = T::ZERO;
    for &(map, positive) in maps {
        let (p, cache) = classifier::score_quadruple_forward(
            cls,
            &embeddings[map[0]],
            &embeddings[map[1]],
            &embeddings[map[2]],
            &embeddings[map[3]],
        )?;
        let y = if positive { T::ONE } else { T::ZERO };
        total += loss::bce_loss(p, y);
        let d_s = classifier::score_quadruple_backward(
            cls,
            &cache,
            loss::bce_sigmoid_grad(p, y),
            cgrads,
        );
        for (j, &word) in map.iter().enumerate() {
            let dst = d_emb[word].data_mut();
            for i in 0..n {
                dst[i] += d_s.data()[i * 4 + j];
            }
        }
    }
    for (cache, d) in caches.iter().zip(&d_emb) {
        embedder::embed_word_backward(emb, cache, d, egrads);
    }
    Ok(total)
}

/// Gradient tensors in the optimizer's parameter order (embedder first,
/// biases skipped when untrained, then the classifier).
fn ordered_grads<'a, T: Scalar>(
    egrads: &'a EmbedderGrads<T>,
    cgrads: &'a ClassifierGrads<T>,
    use_bias: bool,
) -> Vec<&'a Tensor<T>> {
    let mut out: Vec<&Tensor<T>> = vec![&egrads.char_embeddings];
    for (k, b) in &egrads.banks {
        out.push(k);
        if use_bias {
            out.push(b);
        }
    }
    out.extend([
        &cgrads.conv1_w,
        &cgrads.conv1_b,
        &cgrads.conv2_w,
        &cgrads.conv2_b,
        &cgrads.fc_w,
        &cgrads.fc_b,
    ]);
    out
}

/// Train a model on `dataset`, reporting each finished epoch to `on_epoch`.
///
/// The dataset must be a non-empty train split. Aborts with an error if the
/// loss or any gradient goes non-finite rather than training onward from
/// poisoned state.
pub fn train_observed(
    dataset: &AnalogyDataset,
    config: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochStats),
) -> Result<(Checkpoint, Vec<EpochStats>)> {
    config.validate()?;
    if dataset.split != Split::Train {
        return Err(Error::InvalidInput(format!(
            "training expects the train split, got {:?}",
            dataset.split
        )));
    }
    if dataset.is_empty() {
        return Err(Error::InvalidInput("cannot train on an empty dataset".into()));
    }
    let sampled = corpus::sample_quadruples(&dataset.quadruples, config.sample, config.seed);
    let vocab = CharVocab::build(sampled.iter().flat_map(|q| q.words()))?;
    let maps = training_maps(config.negatives_per_base)?;

    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(config.seed, 1));
    let mut emb = EmbedderParams::<f32>::init(config.embedder_config(), vocab.len(), &mut rng);
    let mut cls = ClassifierParams::<f32>::init(config.classifier_config(), &mut rng);

    let shapes: Vec<Vec<usize>> = emb
        .trainable_mut()
        .iter()
        .map(|(_, t)| t.shape().to_vec())
        .chain(cls.trainable_mut().iter().map(|(_, t)| t.shape().to_vec()))
        .collect();
    let shape_refs: Vec<&[usize]> = shapes.iter().map(|s| s.as_slice()).collect();
    let adam_cfg = AdamConfig { learning_rate: config.learning_rate, ..AdamConfig::default() };
    let mut adam = AdamState::<f32>::new(adam_cfg, &shape_refs);

    let mut egrads = EmbedderGrads::zeros_like(&emb);
    let mut cgrads = ClassifierGrads::zeros_like(&cls);
    let mut stats = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..sampled.len()).collect();

    for epoch in 0..config.epochs {
        let mut epoch_rng = ChaCha20Rng::seed_from_u64(derive_seed(config.seed, 2 + epoch as u64));
        order.shuffle(&mut epoch_rng);
        let mut epoch_loss = 0.0f64;
        let mut epoch_examples = 0usize;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            egrads.fill_zero();
            cgrads.fill_zero();
            let mut batch_loss = 0.0f64;
            for &qi in batch {
                let total = base_quadruple_pass(
                    &emb,
                    &cls,
                    &vocab,
                    sampled[qi].words(),
                    &maps,
                    &mut egrads,
                    &mut cgrads,
                )?;
                batch_loss += total.to_f64();
            }
            let examples = batch.len() * maps.len();
            if !batch_loss.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "training diverged: non-finite loss in epoch {epoch}, batch {batch_idx}"
                )));
            }
            let inv = 1.0 / examples as f32;
            egrads.scale(inv);
            cgrads.scale(inv);
            {
                let mut params: Vec<&mut Tensor<f32>> =
                    emb.trainable_mut().into_iter().map(|(_, t)| t).collect();
                params.extend(cls.trainable_mut().into_iter().map(|(_, t)| t));
                let grads = ordered_grads(&egrads, &cgrads, config.use_bias);
                adam.step(&mut params, &grads)?;
            }
            epoch_loss += batch_loss;
            epoch_examples += examples;
        }
        let stat = EpochStats {
            epoch,
            mean_loss: epoch_loss / epoch_examples as f64,
            examples: epoch_examples,
        };
        on_epoch(&stat);
        stats.push(stat);
    }

    let final_loss = stats.last().map(|s| s.mean_loss).unwrap_or(f64::NAN);
    let checkpoint = Checkpoint {
        language: dataset.language.clone(),
        config: config.clone(),
        vocab,
        embedder: emb,
        classifier: cls,
        final_loss,
    };
    Ok((checkpoint, stats))
}

/// Train a model on `dataset` (see [`train_observed`]).
pub fn train(dataset: &AnalogyDataset, config: &TrainConfig) -> Result<Checkpoint> {
    train_observed(dataset, config, &mut |_| {}).map(|(ck, _)| ck)
}

/// Smallest useful model for whole-pipeline verification: every dimension
/// shrunk, but all five filter widths and both classifier stages present.
fn verification_config() -> TrainConfig {
    TrainConfig {
        char_dim: 3,
        filters_per_width: 2,
        conv1_filters: 4,
        conv2_filters: 3,
        ..TrainConfig::default()
    }
}

/// Flatten parameters in optimizer order into one coordinate vector.
fn flatten_params(emb: &mut EmbedderParams<f64>, cls: &mut ClassifierParams<f64>) -> Vec<f64> {
    let mut flat = Vec::new();
    for (_, t) in emb.trainable_mut() {
        flat.extend_from_slice(t.data());
    }
    for (_, t) in cls.trainable_mut() {
        flat.extend_from_slice(t.data());
    }
    flat
}

/// Inverse of [`flatten_params`].
fn load_params(flat: &[f64], emb: &mut EmbedderParams<f64>, cls: &mut ClassifierParams<f64>) {
    let mut offset = 0;
    for (_, t) in emb.trainable_mut().into_iter().chain(cls.trainable_mut()) {
        let len = t.len();
        t.data_mut().copy_from_slice(&flat[offset..offset + len]);
        offset += len;
    }
    assert_eq!(offset, flat.len(), "parameter vector length mismatch");
}

/// Minimum margins of a forward pass around the non-differentiable points:
/// distance of every pre-ReLU activation from 0 and of every max-pool
/// winner from the runner-up. Finite differencing is only trustworthy when
/// both stay well above the probe step.
fn kink_margins(
    emb: &EmbedderParams<f64>,
    vocab: &CharVocab,
    words: [&str; 4],
    score_caches: &[ScoreCache<f64>],
) -> Result<(f64, f64)> {
    let mut relu_margin = f64::INFINITY;
    let mut pool_gap = f64::INFINITY;
    for w in words {
        let (_, cache) = embedder::embed_word_forward(emb, vocab, w)?;
        let pre_pool = ops::char_conv_bank_forward(&cache.x, &emb.banks);
        let &[f, p] = pre_pool.shape() else { unreachable!("bank output is 2-d") };
        for fi in 0..f {
            let row = &pre_pool.data()[fi * p..(fi + 1) * p];
            let mut best = f64::NEG_INFINITY;
            let mut second = f64::NEG_INFINITY;
            for &v in row {
                if v > best {
                    second = best;
                    best = v;
                } else if v > second {
                    second = v;
                }
            }
            if p > 1 {
                pool_gap = pool_gap.min(best - second);
            }
        }
    }
    for cache in score_caches {
        for t in [&cache.z1, &cache.z2] {
            for &v in t.data() {
                relu_margin = relu_margin.min(v.abs());
            }
        }
    }
    Ok((relu_margin, pool_gap))
}

/// Finite-difference check of the *composed* training gradient: embed four
/// words, score all 11 forms of the base quadruple, sum the losses, and
/// compare the analytic gradient of every trainable coordinate (character
/// rows, bank filters, both convolutions, dense layer) against central
/// differences.
///
/// Random configurations can land near a ReLU kink or a pool tie, where
/// finite differences are meaningless; such draws are rejected and redrawn
/// deterministically from the seed.
pub fn check_full_stack(seed: u64) -> Result<CheckReport> {
    const ALPHABET: &[char] = &['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];
    // 25× the probe step: ReLU and max are piecewise linear, so a kink only
    // corrupts the comparison if an evaluation lands on its far side, i.e.
    // within FD_STEP of it. Typical draws sit around 1e-4, so a much larger
    // margin would reject nearly everything.
    const MARGIN: f64 = 25.0 * gradcheck::FD_STEP;
    let config = verification_config();
    let maps = training_maps(config.negatives_per_base)?;

    for attempt in 0..128u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, 0x6B69_6E6B ^ (attempt << 8)));
        let words: Vec<String> = (0..4)
            .map(|_| {
                use rand::Rng;
                let len = rng.random_range(3..=5);
                (0..len).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())]).collect()
            })
            .collect();
        let words: [&str; 4] = [&words[0], &words[1], &words[2], &words[3]];
        let vocab = CharVocab::build(words)?;
        let mut emb =
            EmbedderParams::<f64>::init(config.embedder_config(), vocab.len(), &mut rng);
        let mut cls = ClassifierParams::<f64>::init(config.classifier_config(), &mut rng);

        let mut caches = Vec::with_capacity(maps.len());
        let mut embeddings = Vec::with_capacity(4);
        for w in words {
            embeddings.push(embedder::embed_word(&emb, &vocab, w)?);
        }
        for &(map, _) in &maps {
            let (_, cache) = classifier::score_quadruple_forward(
                &cls,
                &embeddings[map[0]],
                &embeddings[map[1]],
                &embeddings[map[2]],
                &embeddings[map[3]],
            )?;
            caches.push(cache);
        }
        let (relu_margin, pool_gap) = kink_margins(&emb, &vocab, words, &caches)?;
        if relu_margin < MARGIN || pool_gap < MARGIN {
            continue;
        }

        let mut egrads = EmbedderGrads::zeros_like(&emb);
        let mut cgrads = ClassifierGrads::zeros_like(&cls);
        base_quadruple_pass(&emb, &cls, &vocab, words, &maps, &mut egrads, &mut cgrads)?;
        let analytic = {
            let mut flat = vec![egrads.char_embeddings.data().to_vec()];
            for (k, b) in &egrads.banks {
                flat.push(k.data().to_vec());
                if config.use_bias {
                    flat.push(b.data().to_vec());
                }
            }
            for t in [
                &cgrads.conv1_w,
                &cgrads.conv1_b,
                &cgrads.conv2_w,
                &cgrads.conv2_b,
                &cgrads.fc_w,
                &cgrads.fc_b,
            ] {
                flat.push(t.data().to_vec());
            }
            flat.concat()
        };

        let x0 = flatten_params(&mut emb, &mut cls);
        let vocab_ref = &vocab;
        let maps_ref = &maps;
        let mut f = |flat: &[f64]| {
            load_params(flat, &mut emb, &mut cls);
            let mut eg = EmbedderGrads::zeros_like(&emb);
            let mut cg = ClassifierGrads::zeros_like(&cls);
            base_quadruple_pass(&emb, &cls, vocab_ref, words, maps_ref, &mut eg, &mut cg)
                .expect("forward pass on checked configuration")
                .to_f64()
        };
        return Ok(gradcheck::check_gradient(&mut f, &x0, &analytic));
    }
    Err(Error::InvalidInput(
        "no kink-free configuration found for the full-stack gradient check".into(),
    ))
}
