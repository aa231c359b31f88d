//! Seeded generator of toy suffixing languages.
//!
//! A synthetic language is a set of random lemmas over a chosen alphabet
//! plus a list of suffix rules; every (lemma, rule) pair yields one
//! inflection triple, so the extraction pipeline can build analogies from
//! it exactly as from real inflection tables. Two configs with disjoint
//! alphabets give a worst-case transfer pair: models trained on one see
//! only unknown characters in the other.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::corpus::{self, AnalogyDataset, MorphTriple, Split};
use crate::error::{Error, Result};

/// Shape of a synthetic language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    /// Number of distinct lemmas to generate.
    pub lemmas: usize,
    /// Characters lemmas are built from (duplicates ignored).
    pub alphabet: String,
    /// Suffix rules; each becomes one feature bundle `suffix=+<s>`.
    pub suffixes: Vec<String>,
    /// Inclusive lemma-length range, in characters.
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            lemmas: 500,
            alphabet: "abcdefghijklmnopqrstuvwxyz".to_string(),
            suffixes: vec!["s".to_string(), "ed".to_string()],
            min_len: 3,
            max_len: 8,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<Vec<char>> {
        if self.lemmas == 0 {
            return Err(Error::InvalidInput("lemmas must be at least 1".into()));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::InvalidInput(format!(
                "lemma length range {}..={} is empty or starts at zero",
                self.min_len, self.max_len
            )));
        }
        if self.suffixes.is_empty() || self.suffixes.iter().any(|s| s.is_empty()) {
            return Err(Error::InvalidInput(
                "at least one non-empty suffix is required".into(),
            ));
        }
        let mut seen = HashSet::new();
        let chars: Vec<char> = self
            .alphabet
            .chars()
            .filter(|c| seen.insert(*c))
            .collect();
        if chars.is_empty() {
            return Err(Error::InvalidInput("alphabet must not be empty".into()));
        }
        // Distinct words of length min..=max over k characters.
        let mut capacity = 0u128;
        for len in self.min_len..=self.max_len {
            capacity = capacity.saturating_add((chars.len() as u128).saturating_pow(len as u32));
        }
        if capacity < self.lemmas as u128 {
            return Err(Error::InvalidInput(format!(
                "alphabet of {} characters admits only {} lemmas of length {}..={}, {} requested",
                chars.len(),
                capacity,
                self.min_len,
                self.max_len,
                self.lemmas
            )));
        }
        Ok(chars)
    }
}

/// Generate the language's inflection triples, lemma-major and
/// deterministic in the seed.
pub fn synth_triples(config: &SynthConfig) -> Result<Vec<MorphTriple>> {
    let chars = config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut seen = HashSet::with_capacity(config.lemmas);
    let mut lemmas = Vec::with_capacity(config.lemmas);
    // Rejection sampling; the capacity precheck makes success certain, but
    // configs that ask for nearly every possible lemma would collide for a
    // long time, so give up after a generous number of draws.
    let max_draws = 1000 * config.lemmas + 1000;
    let mut draws = 0usize;
    while lemmas.len() < config.lemmas {
        if draws >= max_draws {
            return Err(Error::InvalidInput(format!(
                "gave up sampling {} distinct lemmas after {} draws; enlarge the \
                 alphabet or the length range",
                config.lemmas, draws
            )));
        }
        draws += 1;
        let len = rng.random_range(config.min_len..=config.max_len);
        let lemma: String = (0..len)
            .map(|_| chars[rng.random_range(0..chars.len())])
            .collect();
        if seen.insert(lemma.clone()) {
            lemmas.push(lemma);
        }
    }
    let mut out = Vec::with_capacity(config.lemmas * config.suffixes.len());
    for lemma in &lemmas {
        for suffix in &config.suffixes {
            out.push(MorphTriple {
                lemma: lemma.clone(),
                features: format!("suffix=+{suffix}"),
                form: format!("{lemma}{suffix}"),
            });
        }
    }
    Ok(out)
}

/// Generate a language and run it through analogy extraction.
pub fn synth_dataset(config: &SynthConfig, language: &str, split: Split) -> Result<AnalogyDataset> {
    let triples = synth_triples(config)?;
    let quads = corpus::extract_sigmorphon_analogies(&triples);
    Ok(AnalogyDataset::new(language, split, quads))
}

/// Write triples as `lemma⟨TAB⟩features⟨TAB⟩form` lines — the format
/// [`corpus::parse_sigmorphon`] reads.
pub fn write_triples(path: &Path, triples: &[MorphTriple]) -> Result<()> {
    let mut buf = Vec::with_capacity(triples.len() * 24);
    for t in triples {
        writeln!(buf, "{}\t{}\t{}", t.lemma, t.features, t.form).expect("write to vec");
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
