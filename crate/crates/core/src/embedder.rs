//! Character-level CNN word embedder.
//!
//! A word is mapped to a fixed-size vector as follows: prepend a
//! start-of-word marker and append an end-of-word marker, look up one
//! m-dimensional embedding row per character (unknown characters contribute
//! an all-zero row), run a bank of convolution filters — 16 filters for each
//! width 2–6 by default, 80 in total — over the padded rows, and max-pool
//! each filter's activations over positions. The embedding dimension n
//! equals the total filter count and is independent of word length.
//!
//! Component order is fixed: banks by ascending width (w=2 first), filters
//! in ascending index within a bank.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::init;
use crate::nn::ops;
use crate::nn::tensor::{Scalar, Tensor};

/// The five filter widths of the convolution bank, ascending.
pub const FILTER_WIDTHS: [usize; 5] = [2, 3, 4, 5, 6];

/// Character inventory with dense indices plus two reserved marker rows.
///
/// Corpus characters occupy indices `0..alphabet_len()` in sorted code-point
/// order; the start-of-word and end-of-word markers take the two indices
/// after them, so they can never collide with real characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub struct CharVocab {
    chars: Vec<char>,
    index: HashMap<char, usize>,
}

impl CharVocab {
    /// Build from every character of every word in the corpus.
    ///
    /// Deterministic: indices follow sorted code-point order. Fails on a
    /// corpus with no characters at all.
    pub fn build<'a>(words: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let set: BTreeSet<char> = words.into_iter().flat_map(|w| w.chars()).collect();
        if set.is_empty() {
            return Err(Error::InvalidInput("cannot build a vocabulary from an empty corpus".into()));
        }
        Ok(Self::from_chars(set.into_iter().collect()))
    }

    fn from_chars(mut chars: Vec<char>) -> Self {
        chars.sort_unstable();
        chars.dedup();
        let index = chars.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        CharVocab { chars, index }
    }

    /// Number of embedding rows: corpus characters + the two markers.
    pub fn len(&self) -> usize {
        self.chars.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one character
    }

    /// Number of real corpus characters (markers excluded).
    pub fn alphabet_len(&self) -> usize {
        self.chars.len()
    }

    /// Row index of the start-of-word marker.
    pub fn bow(&self) -> usize {
        self.chars.len()
    }

    /// Row index of the end-of-word marker.
    pub fn eow(&self) -> usize {
        self.chars.len() + 1
    }

    /// Embedding row of a character; `None` for characters never seen when
    /// the vocabulary was built (those get an all-zero row).
    pub fn lookup(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    /// The sorted character inventory.
    pub fn chars(&self) -> &[char] {
        &self.chars
    }
}

impl From<CharVocab> for String {
    fn from(v: CharVocab) -> String {
        v.chars.into_iter().collect()
    }
}

impl From<String> for CharVocab {
    fn from(s: String) -> CharVocab {
        CharVocab::from_chars(s.chars().collect())
    }
}

/// Embedder hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedderConfig {
    /// Character embedding size m (default 64).
    pub char_dim: usize,
    /// Filters per width (default 16, giving n = 80 over the five widths).
    pub filters_per_width: usize,
    /// Whether filter biases are trained. They are stored either way; when
    /// disabled they stay at their zero initialization.
    pub use_bias: bool,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig { char_dim: 64, filters_per_width: 16, use_bias: true }
    }
}

impl EmbedderConfig {
    /// Output embedding dimension n = widths × filters per width.
    pub fn output_dim(&self) -> usize {
        FILTER_WIDTHS.len() * self.filters_per_width
    }
}

/// All trainable state of the embedder.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedderParams<T> {
    pub config: EmbedderConfig,
    /// `[|V|, m]`: one row per vocabulary entry, markers included.
    pub char_embeddings: Tensor<T>,
    /// Per width (ascending): kernel `[F, w, m]` and bias `[F]`.
    pub banks: Vec<(Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> EmbedderParams<T> {
    /// Seeded initialization: char rows uniform in ±0.1, kernels Glorot
    /// uniform with fan_in = w·m / fan_out = filter count, biases zero.
    pub fn init<R: Rng>(config: EmbedderConfig, vocab_size: usize, rng: &mut R) -> Self {
        let m = config.char_dim;
        let f = config.filters_per_width;
        let char_embeddings = init::uniform(rng, &[vocab_size, m], 0.1);
        let banks = FILTER_WIDTHS
            .iter()
            .map(|&w| {
                let kernel = init::glorot_uniform(rng, &[f, w, m], w * m, f);
                let bias = Tensor::zeros(&[f]);
                (kernel, bias)
            })
            .collect();
        EmbedderParams { config, char_embeddings, banks }
    }

    /// Output embedding dimension n.
    pub fn output_dim(&self) -> usize {
        self.config.output_dim()
    }

    /// Every parameter tensor with its canonical name, in fixed order.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor<T>)> {
        let mut out = vec![("embedder.char_embeddings".to_string(), &self.char_embeddings)];
        for (i, (k, b)) in self.banks.iter().enumerate() {
            let w = FILTER_WIDTHS[i];
            out.push((format!("embedder.bank_w{w}.kernel"), k));
            out.push((format!("embedder.bank_w{w}.bias"), b));
        }
        out
    }

    /// Mutable view of the tensors that training may update; biases are
    /// excluded when `use_bias` is off.
    pub fn trainable_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        let use_bias = self.config.use_bias;
        let mut out = vec![("embedder.char_embeddings".to_string(), &mut self.char_embeddings)];
        for (i, (k, b)) in self.banks.iter_mut().enumerate() {
            let w = FILTER_WIDTHS[i];
            out.push((format!("embedder.bank_w{w}.kernel"), k));
            if use_bias {
                out.push((format!("embedder.bank_w{w}.bias"), b));
            }
        }
        out
    }

    pub fn cast<U: Scalar>(&self) -> EmbedderParams<U> {
        EmbedderParams {
            config: self.config,
            char_embeddings: self.char_embeddings.cast(),
            banks: self.banks.iter().map(|(k, b)| (k.cast(), b.cast())).collect(),
        }
    }
}

/// Accumulator for embedder gradients, shaped like [`EmbedderParams`].
#[derive(Debug, Clone)]
pub struct EmbedderGrads<T> {
    pub char_embeddings: Tensor<T>,
    pub banks: Vec<(Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> EmbedderGrads<T> {
    pub fn zeros_like(params: &EmbedderParams<T>) -> Self {
        EmbedderGrads {
            char_embeddings: Tensor::zeros(params.char_embeddings.shape()),
            banks: params
                .banks
                .iter()
                .map(|(k, b)| (Tensor::zeros(k.shape()), Tensor::zeros(b.shape())))
                .collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        self.char_embeddings.fill_zero();
        for (k, b) in &mut self.banks {
            k.fill_zero();
            b.fill_zero();
        }
    }

    /// Scale every gradient by `factor` (batch averaging).
    pub fn scale(&mut self, factor: T) {
        for v in self.char_embeddings.data_mut() {
            *v *= factor;
        }
        for (k, b) in &mut self.banks {
            for v in k.data_mut() {
                *v *= factor;
            }
            for v in b.data_mut() {
                *v *= factor;
            }
        }
    }
}

/// What the backward pass needs from a forward embedding of one word.
#[derive(Debug, Clone)]
pub struct EmbedCache<T> {
    /// The assembled `[P, m]` character-row matrix (P = word length + 2).
    pub(crate) x: Tensor<T>,
    /// Vocabulary row per position; `None` marks an unknown character's
    /// constant zero row, which receives no gradient.
    rows: Vec<Option<usize>>,
    /// First-argmax position per filter, from the max pool.
    argmax: Vec<usize>,
}

/// Embed a word, keeping the cache needed for a backward pass.
pub fn embed_word_forward<T: Scalar>(
    params: &EmbedderParams<T>,
    vocab: &CharVocab,
    word: &str,
) -> Result<(Tensor<T>, EmbedCache<T>)> {
    if word.is_empty() {
        return Err(Error::InvalidInput("cannot embed an empty word".into()));
    }
    let m = params.config.char_dim;
    let mut rows = Vec::with_capacity(word.chars().count() + 2);
    rows.push(Some(vocab.bow()));
    rows.extend(word.chars().map(|c| vocab.lookup(c)));
    rows.push(Some(vocab.eow()));
    let p = rows.len();
    let mut x = Tensor::zeros(&[p, m]);
    for (t, row) in rows.iter().enumerate() {
        if let Some(r) = row {
            x.data_mut()[t * m..(t + 1) * m]
                .copy_from_slice(&params.char_embeddings.data()[r * m..(r + 1) * m]);
        }
    }
    let pre_pool = ops::char_conv_bank_forward(&x, &params.banks);
    let (embedding, argmax) = ops::max_pool_forward(&pre_pool);
    Ok((embedding, EmbedCache { x, rows, argmax }))
}

/// Embed a word (no cache).
pub fn embed_word<T: Scalar>(
    params: &EmbedderParams<T>,
    vocab: &CharVocab,
    word: &str,
) -> Result<Tensor<T>> {
    embed_word_forward(params, vocab, word).map(|(e, _)| e)
}

/// Accumulate gradients of one embedded word into `grads`.
///
/// `d_embedding` is the upstream gradient on the n-dim output. Unknown-
/// character rows are constants and receive nothing; every known row
/// (markers included) accumulates into its vocabulary row, so repeated
/// characters sum their contributions.
pub fn embed_word_backward<T: Scalar>(
    params: &EmbedderParams<T>,
    cache: &EmbedCache<T>,
    d_embedding: &Tensor<T>,
    grads: &mut EmbedderGrads<T>,
) {
    let m = params.config.char_dim;
    let p = cache.rows.len();
    let d_pre_pool = ops::max_pool_backward(&cache.argmax, p, d_embedding);
    let (dx, d_banks) = ops::char_conv_bank_backward(&cache.x, &params.banks, &d_pre_pool);
    for (gb, db) in grads.banks.iter_mut().zip(d_banks) {
        for (a, b) in gb.0.data_mut().iter_mut().zip(db.0.data()) {
            *a += *b;
        }
        for (a, b) in gb.1.data_mut().iter_mut().zip(db.1.data()) {
            *a += *b;
        }
    }
    for (t, row) in cache.rows.iter().enumerate() {
        if let Some(r) = row {
            ops::axpy(
                T::ONE,
                &dx.data()[t * m..(t + 1) * m],
                &mut grads.char_embeddings.data_mut()[r * m..(r + 1) * m],
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_params(seed: u64, vocab: &CharVocab) -> EmbedderParams<f64> {
        let config = EmbedderConfig { char_dim: 3, filters_per_width: 2, use_bias: true };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EmbedderParams::init(config, vocab.len(), &mut rng)
    }

    #[test]
    fn vocab_is_sorted_dense_and_marker_safe() {
        let vocab = CharVocab::build(["ab", "ba"]).unwrap();
        assert_eq!(vocab.len(), 4, "two chars plus the two markers");
        assert_eq!(vocab.chars(), &['a', 'b']);
        assert_eq!(vocab.lookup('a'), Some(0));
        assert_eq!(vocab.lookup('b'), Some(1));
        assert_eq!(vocab.bow(), 2);
        assert_eq!(vocab.eow(), 3);
        assert_eq!(vocab.lookup('z'), None);
    }

    #[test]
    fn vocab_build_is_deterministic_and_empty_corpus_fails() {
        let v1 = CharVocab::build(["kissa", "koira"]).unwrap();
        let v2 = CharVocab::build(["koira", "kissa"]).unwrap();
        assert_eq!(v1, v2);
        assert!(CharVocab::build([]).is_err());
    }

    #[test]
    fn vocab_string_round_trip() {
        let v = CharVocab::build(["mäyrä"]).unwrap();
        let s: String = v.clone().into();
        assert_eq!(CharVocab::from(s), v);
    }

    #[test]
    fn foreign_alphabet_is_entirely_unknown() {
        let vocab = CharVocab::build(["haus", "maus"]).unwrap();
        assert!("дом".chars().all(|c| vocab.lookup(c).is_none()));
    }

    #[test]
    fn embedding_dim_is_fixed_regardless_of_word_length() {
        let vocab = CharVocab::build(["abcdef"]).unwrap();
        let params = tiny_params(7, &vocab);
        let n = params.output_dim();
        assert_eq!(n, 10);
        for word in ["a", "abc", "abcdefabcdefabcdefabcdefabcdefabcdefabcdefab"] {
            let e = embed_word(&params, &vocab, word).unwrap();
            assert_eq!(e.shape(), &[n], "length {} word", word.chars().count());
        }
    }

    #[test]
    fn zero_filters_give_zero_embedding() {
        let vocab = CharVocab::build(["word"]).unwrap();
        let mut params = tiny_params(3, &vocab);
        for (k, b) in &mut params.banks {
            k.fill_zero();
            b.fill_zero();
        }
        let e = embed_word(&params, &vocab, "word").unwrap();
        assert!(e.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_word_is_rejected() {
        let vocab = CharVocab::build(["x"]).unwrap();
        let params = tiny_params(1, &vocab);
        assert!(embed_word(&params, &vocab, "").is_err());
    }

    #[test]
    fn all_unknown_word_embeds_like_explicit_zero_rows() {
        // a word of only unknown characters is the BOW + zero rows + EOW
        // sequence — not necessarily the zero vector
        let vocab = CharVocab::build(["abc"]).unwrap();
        let params = tiny_params(11, &vocab);
        let e_unknown = embed_word(&params, &vocab, "xyz").unwrap();
        let e_unknown2 = embed_word(&params, &vocab, "qqq").unwrap();
        // same length + all-unknown ⇒ identical row matrices ⇒ identical output
        assert_eq!(e_unknown, e_unknown2);
        assert!(e_unknown.data().iter().any(|&v| v != 0.0), "boundary markers still contribute");
    }

    #[test]
    fn single_width2_filter_matches_hand_rolled_max() {
        // one filter per width; zero all banks except w=2, whose single
        // filter is hand-set. The first output component must equal the max
        // over positions of that filter's response.
        let vocab = CharVocab::build(["ab"]).unwrap();
        let config = EmbedderConfig { char_dim: 2, filters_per_width: 1, use_bias: true };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut params: EmbedderParams<f64> = EmbedderParams::init(config, vocab.len(), &mut rng);
        for (k, b) in &mut params.banks {
            k.fill_zero();
            b.fill_zero();
        }
        params.banks[0].0 = Tensor::new(&[1, 2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();

        let e = embed_word(&params, &vocab, "ab").unwrap();
        // row matrix: BOW, a, b, EOW (4 rows); filter scores row[t][0] + row[t+1][1]
        let emb = |r: usize, c: usize| params.char_embeddings.at2(r, c);
        let rows = [vocab.bow(), 0, 1, vocab.eow()];
        let mut scores = vec![emb(rows[0], 1)]; // window (pad, BOW)
        for t in 0..3 {
            scores.push(emb(rows[t], 0) + emb(rows[t + 1], 1));
        }
        let expect = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((e.data()[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn perturbing_one_char_only_moves_covered_components() {
        // changing character k can only change pooled maxima whose winning
        // window covered a position influenced by k — spot-check that at
        // least some components stay identical on a long word
        let vocab = CharVocab::build(["abcdefgh"]).unwrap();
        let params = tiny_params(23, &vocab);
        let e1 = embed_word(&params, &vocab, "abcdefgh").unwrap();
        let e2 = embed_word(&params, &vocab, "abcdefgq").unwrap(); // 'q' unknown: big change at the end
        assert_ne!(e1, e2);
        let same = e1.data().iter().zip(e2.data()).filter(|(a, b)| a == b).count();
        assert!(same > 0, "components pooled from the unchanged prefix must persist");
    }

    #[test]
    fn gradients_match_finite_differences_through_whole_embedder() {
        use crate::nn::gradcheck;
        let vocab = CharVocab::build(["abcde"]).unwrap();
        let params = tiny_params(41, &vocab);
        let word = "badec";
        let n = params.output_dim();
        let mut proj_rng = ChaCha8Rng::seed_from_u64(99);
        let r: Vec<f64> = (0..n).map(|_| proj_rng.random_range(0.5..1.5)).collect();

        let (_, cache) = embed_word_forward(&params, &vocab, word).unwrap();
        let mut grads = EmbedderGrads::zeros_like(&params);
        let d_emb = Tensor::new(&[n], r.clone()).unwrap();
        embed_word_backward(&params, &cache, &d_emb, &mut grads);

        let mut flat = Vec::new();
        flat.extend_from_slice(params.char_embeddings.data());
        for (k, b) in &params.banks {
            flat.extend_from_slice(k.data());
            flat.extend_from_slice(b.data());
        }
        let mut analytic = Vec::new();
        analytic.extend_from_slice(grads.char_embeddings.data());
        for (k, b) in &grads.banks {
            analytic.extend_from_slice(k.data());
            analytic.extend_from_slice(b.data());
        }

        let template = params.clone();
        let vocab2 = vocab.clone();
        let mut loss = move |x: &[f64]| {
            let mut p = template.clone();
            let mut off = 0;
            let take = |buf: &mut Tensor<f64>, off: &mut usize, x: &[f64]| {
                let n = buf.len();
                buf.data_mut().copy_from_slice(&x[*off..*off + n]);
                *off += n;
            };
            take(&mut p.char_embeddings, &mut off, x);
            for (k, b) in &mut p.banks {
                take(k, &mut off, x);
                take(b, &mut off, x);
            }
            let e = embed_word(&p, &vocab2, word).unwrap();
            ops::dot(e.data(), &r)
        };
        let report = gradcheck::check_gradient(&mut loss, &flat, &analytic);
        assert!(
            report.passes(),
            "embedder gradient check failed: rel err {} at {}",
            report.max_rel_err,
            report.worst_coordinate
        );
    }
}
