//! Corpus ingestion, quadruple extraction, coverage, and word statistics.
//!
//! Two input layouts are supported: inflection tables with one
//! `lemma⟨TAB⟩features⟨TAB⟩form` triple per line, and relation-pair files
//! with one `left⟨TAB⟩right` pair per line where the relation is named by
//! the file stem. Both extractors pair records that share a key (the
//! verbatim feature string, or the relation id) and emit exactly one
//! quadruple per unordered pair, self-pairs included — a key class of k
//! records yields k·(k+1)/2 quadruples.
//!
//! Words are treated as sequences of Unicode code points; no normalization
//! is applied unless the caller opts into NFC.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::augment;
use crate::error::{Error, Result};

/// One inflection record: lemma, verbatim feature string, inflected form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphTriple {
    pub lemma: String,
    pub features: String,
    pub form: String,
}

/// One word pair of a named morphological relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPair {
    pub relation_id: String,
    pub left: String,
    pub right: String,
}

/// Validity label of a quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Valid,
    Invalid,
}

/// An ordered word quadruple `a : b :: c : d` with its label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnalogyQuadruple {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub label: Label,
}

impl AnalogyQuadruple {
    pub fn valid(a: impl Into<String>, b: impl Into<String>, c: impl Into<String>, d: impl Into<String>) -> Self {
        AnalogyQuadruple { a: a.into(), b: b.into(), c: c.into(), d: d.into(), label: Label::Valid }
    }

    pub fn invalid(a: impl Into<String>, b: impl Into<String>, c: impl Into<String>, d: impl Into<String>) -> Self {
        AnalogyQuadruple { a: a.into(), b: b.into(), c: c.into(), d: d.into(), label: Label::Invalid }
    }

    /// The four words in order.
    pub fn words(&self) -> [&str; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// The (a,b,c,d) tuple as owned strings, dropping the label.
    fn key(&self) -> (String, String, String, String) {
        (self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone())
    }
}

/// Which split a dataset represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

/// An ordered collection of quadruples with its provenance tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyDataset {
    pub quadruples: Vec<AnalogyQuadruple>,
    pub language: String,
    pub split: Split,
}

impl AnalogyDataset {
    pub fn new(language: impl Into<String>, split: Split, quadruples: Vec<AnalogyQuadruple>) -> Self {
        AnalogyDataset { quadruples, language: language.into(), split }
    }

    pub fn len(&self) -> usize {
        self.quadruples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadruples.is_empty()
    }
}

fn nfc_maybe(s: &str, nfc: bool) -> String {
    if nfc {
        s.nfc().collect()
    } else {
        s.to_string()
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parse an inflection table: `lemma⟨TAB⟩features⟨TAB⟩form` per line.
///
/// Fields are whitespace-trimmed; the feature column is kept verbatim after
/// trimming; extra columns are ignored; blank lines are skipped. With `nfc`
/// set, lemma and form are NFC-normalized (features stay untouched).
pub fn parse_sigmorphon(path: &Path, nfc: bool) -> Result<Vec<MorphTriple>> {
    let content = read_file(path)?;
    let mut out = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        }
        let (lemma, features, form) = (cols[0].trim(), cols[1].trim(), cols[2].trim());
        if lemma.is_empty() || features.is_empty() || form.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: "empty lemma, features, or form".into(),
            });
        }
        out.push(MorphTriple {
            lemma: nfc_maybe(lemma, nfc),
            features: features.to_string(),
            form: nfc_maybe(form, nfc),
        });
    }
    Ok(out)
}

/// Parse a relation-pair file: one `left⟨TAB⟩right` (or whitespace-
/// separated) pair per line; the relation id is the file stem.
pub fn parse_relation_pairs(path: &Path, nfc: bool) -> Result<Vec<RelationPair>> {
    let relation_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidInput(format!("cannot derive a relation id from {path:?}")))?
        .to_string();
    let content = read_file(path)?;
    let mut out = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("expected a word pair, found {} fields", fields.len()),
            });
        }
        out.push(RelationPair {
            relation_id: relation_id.clone(),
            left: nfc_maybe(fields[0], nfc),
            right: nfc_maybe(fields[1], nfc),
        });
    }
    Ok(out)
}

/// Emit one valid quadruple per unordered pair of records sharing a key,
/// self-pairs included, preserving first-occurrence key order and file
/// order within each class.
fn extract_by_key<T>(items: &[T], key: impl Fn(&T) -> &str, quad: impl Fn(&T, &T) -> AnalogyQuadruple) -> Vec<AnalogyQuadruple> {
    let mut order: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, item) in items.iter().enumerate() {
        let k = key(item);
        match index.get(k) {
            Some(&g) => order[g].push(i),
            None => {
                index.insert(k, order.len());
                order.push(vec![i]);
            }
        }
    }
    let total: usize = order.iter().map(|g| g.len() * (g.len() + 1) / 2).sum();
    let mut out = Vec::with_capacity(total);
    for group in &order {
        for (pos, &i) in group.iter().enumerate() {
            for &j in &group[pos..] {
                out.push(quad(&items[i], &items[j]));
            }
        }
    }
    out
}

/// Pair every two triples with identical feature strings (self-pairs
/// included): `lemma_i : form_i :: lemma_j : form_j`, one orientation per
/// unordered pair.
pub fn extract_sigmorphon_analogies(triples: &[MorphTriple]) -> Vec<AnalogyQuadruple> {
    extract_by_key(
        triples,
        |t| &t.features,
        |t, u| AnalogyQuadruple::valid(&t.lemma, &t.form, &u.lemma, &u.form),
    )
}

/// Pair every two pairs of the same relation (self-pairs included):
/// `left_i : right_i :: left_j : right_j`.
pub fn extract_pair_analogies(pairs: &[RelationPair]) -> Vec<AnalogyQuadruple> {
    extract_by_key(
        pairs,
        |p| &p.relation_id,
        |p, q| AnalogyQuadruple::valid(&p.left, &p.right, &q.left, &q.right),
    )
}

/// Percentage of target quadruples with at least one of their 8 equivalent
/// forms present verbatim in the reference (exact 4-tuple equality).
///
/// An empty target is vacuously fully covered (100.0).
pub fn coverage(target: &AnalogyDataset, reference: &AnalogyDataset) -> f64 {
    if target.quadruples.is_empty() {
        return 100.0;
    }
    let reference_set: HashSet<(String, String, String, String)> =
        reference.quadruples.iter().map(|q| q.key()).collect();
    let covered = target
        .quadruples
        .iter()
        .filter(|q| {
            augment::equivalent_forms(q).iter().any(|form| reference_set.contains(&form.key()))
        })
        .count();
    100.0 * covered as f64 / target.quadruples.len() as f64
}

/// Mean, population standard deviation, and maximum of one statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatSummary {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
}

fn summarize(values: &[f64]) -> StatSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    StatSummary { mean, std: var.sqrt(), max }
}

/// Adjacent-repeat and length statistics over a word multiset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordStats {
    /// Count of positions i with `w[i] == w[i+1]` (code-point level).
    pub repeats: StatSummary,
    /// Code-point length.
    pub length: StatSummary,
    /// Number of words measured (with multiplicity).
    pub count: usize,
}

/// Compute [`WordStats`] over every word, with multiplicity.
pub fn word_stats<'a>(words: impl IntoIterator<Item = &'a str>) -> Result<WordStats> {
    let mut repeats = Vec::new();
    let mut lengths = Vec::new();
    for w in words {
        let chars: Vec<char> = w.chars().collect();
        repeats.push(chars.windows(2).filter(|p| p[0] == p[1]).count() as f64);
        lengths.push(chars.len() as f64);
    }
    if lengths.is_empty() {
        return Err(Error::InvalidInput("word statistics need at least one word".into()));
    }
    Ok(WordStats { repeats: summarize(&repeats), length: summarize(&lengths), count: lengths.len() })
}

/// Seeded uniform draw of `n` quadruples without replacement.
///
/// Returns the whole (shuffled) list when `n ≥ len`. Deterministic for a
/// fixed seed: a partial Fisher–Yates pass over the index vector.
pub fn sample_quadruples(quads: &[AnalogyQuadruple], n: usize, seed: u64) -> Vec<AnalogyQuadruple> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let take = n.min(quads.len());
    let mut idx: Vec<usize> = (0..quads.len()).collect();
    for i in 0..take {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    idx[..take].iter().map(|&i| quads[i].clone()).collect()
}

/// Seeded split into (train, test) with `train_fraction` going to train
/// (⌊len·fraction⌋ items after a full shuffle).
pub fn split_quadruples(
    quads: &[AnalogyQuadruple],
    train_fraction: f64,
    seed: u64,
) -> (Vec<AnalogyQuadruple>, Vec<AnalogyQuadruple>) {
    assert!((0.0..=1.0).contains(&train_fraction), "fraction must be in [0,1]");
    let mut shuffled = sample_quadruples(quads, quads.len(), seed);
    let cut = (quads.len() as f64 * train_fraction).floor() as usize;
    let test = shuffled.split_off(cut);
    (shuffled, test)
}

/// Read the interchange format: `a⟨TAB⟩b⟨TAB⟩c⟨TAB⟩d` per line, all valid.
pub fn read_quadruples(path: &Path) -> Result<Vec<AnalogyQuadruple>> {
    let content = read_file(path)?;
    let mut out = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 4 || cols.iter().any(|c| c.is_empty()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("expected 4 tab-separated words, got {:?}", line),
            });
        }
        out.push(AnalogyQuadruple::valid(cols[0], cols[1], cols[2], cols[3]));
    }
    Ok(out)
}

/// Write the interchange format read by [`read_quadruples`].
pub fn write_quadruples(path: &Path, quads: &[AnalogyQuadruple]) -> Result<()> {
    let mut buf = Vec::with_capacity(quads.len() * 24);
    for q in quads {
        writeln!(buf, "{}\t{}\t{}\t{}", q.a, q.b, q.c, q.d).expect("write to vec");
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_inflection_triples_in_order() {
        let f = write_tmp(
            "lenkkitossut\tpos=N,case=ON+ESS,num=PL\tlenkkitossuilla\nkissa\tpos=N,case=GEN,num=SG\tkissan\n",
        );
        let triples = parse_sigmorphon(f.path(), false).unwrap();
        assert_eq!(triples.len(), 2);
        assert_eq!(triples[0].lemma, "lenkkitossut");
        assert_eq!(triples[0].features, "pos=N,case=ON+ESS,num=PL");
        assert_eq!(triples[0].form, "lenkkitossuilla");
        assert_eq!(triples[1].lemma, "kissa");
    }

    #[test]
    fn empty_file_parses_to_empty_list() {
        let f = write_tmp("");
        assert!(parse_sigmorphon(f.path(), false).unwrap().is_empty());
        assert!(parse_relation_pairs(f.path(), false).unwrap().is_empty());
    }

    #[test]
    fn missing_column_names_the_line() {
        let f = write_tmp("good\tfeat\tform\nbad-line-without-tabs\n");
        let err = parse_sigmorphon(f.path(), false).unwrap_err();
        assert!(err.to_string().contains(":2:"), "got: {err}");
        assert!(err.is_contract_violation());
    }

    #[test]
    fn nfc_flag_normalizes_words_only() {
        // "é" as e + combining acute vs precomposed
        let f = write_tmp("cafe\u{0301}\tfeat=e\u{0301}\tcafe\u{0301}s\n");
        let raw = parse_sigmorphon(f.path(), false).unwrap();
        assert_eq!(raw[0].lemma.chars().count(), 5);
        let norm = parse_sigmorphon(f.path(), true).unwrap();
        assert_eq!(norm[0].lemma, "café");
        assert_eq!(norm[0].lemma.chars().count(), 4);
        assert_eq!(norm[0].features, "feat=e\u{0301}", "features stay verbatim");
    }

    #[test]
    fn relation_id_comes_from_file_stem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("adj + sa.txt");
        std::fs::write(&path, "良い\t良さ\n高い\t高さ\n").unwrap();
        let pairs = parse_relation_pairs(&path, false).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].relation_id, "adj + sa");
        assert_eq!(pairs[0].left, "良い");
        assert_eq!(pairs[0].right, "良さ");
    }

    #[test]
    fn malformed_pair_line_errors_with_number() {
        let f = write_tmp("a b\nc\n");
        let err = parse_relation_pairs(f.path(), false).unwrap_err();
        assert!(err.to_string().contains(":2:"), "got: {err}");
    }

    fn triple(lemma: &str, feat: &str, form: &str) -> MorphTriple {
        MorphTriple { lemma: lemma.into(), features: feat.into(), form: form.into() }
    }

    #[test]
    fn two_triples_sharing_features_give_three_quadruples() {
        let triples =
            vec![triple("cat", "PL", "cats"), triple("dog", "PL", "dogs"), triple("do", "GER", "doing")];
        let quads = extract_sigmorphon_analogies(&triples);
        // PL class of 2 → 3, GER class of 1 → 1
        assert_eq!(quads.len(), 4);
        assert_eq!(quads[0], AnalogyQuadruple::valid("cat", "cats", "cat", "cats"));
        assert_eq!(quads[1], AnalogyQuadruple::valid("cat", "cats", "dog", "dogs"));
        assert_eq!(quads[2], AnalogyQuadruple::valid("dog", "dogs", "dog", "dogs"));
        assert_eq!(quads[3], AnalogyQuadruple::valid("do", "doing", "do", "doing"));
    }

    #[test]
    fn extraction_count_law_matches_brute_force() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let classes = rng.random_range(1..5usize);
            let mut triples = Vec::new();
            let mut expect = 0;
            for cls in 0..classes {
                let k = rng.random_range(1..7usize);
                expect += k * (k + 1) / 2;
                for i in 0..k {
                    triples.push(triple(&format!("l{cls}_{i}"), &format!("F{cls}"), &format!("f{cls}_{i}")));
                }
            }
            assert_eq!(extract_sigmorphon_analogies(&triples).len(), expect);
        }
    }

    #[test]
    fn every_quadruple_side_comes_from_an_input_triple() {
        let triples = vec![
            triple("a", "F", "a'"),
            triple("b", "F", "b'"),
            triple("c", "F", "c'"),
            triple("x", "G", "x'"),
        ];
        let legal: HashSet<(String, String)> =
            triples.iter().map(|t| (t.lemma.clone(), t.form.clone())).collect();
        for q in extract_sigmorphon_analogies(&triples) {
            assert!(legal.contains(&(q.a.clone(), q.b.clone())));
            assert!(legal.contains(&(q.c.clone(), q.d.clone())));
        }
    }

    #[test]
    fn fifty_pairs_give_1275_quadruples() {
        let pairs: Vec<RelationPair> = (0..50)
            .map(|i| RelationPair {
                relation_id: "r".into(),
                left: format!("l{i}"),
                right: format!("r{i}"),
            })
            .collect();
        assert_eq!(extract_pair_analogies(&pairs).len(), 1275);
    }

    #[test]
    fn self_coverage_is_always_complete() {
        let quads = vec![
            AnalogyQuadruple::valid("a", "b", "c", "d"),
            AnalogyQuadruple::valid("x", "y", "z", "w"),
        ];
        let ds = AnalogyDataset::new("toy", Split::Train, quads);
        assert_eq!(coverage(&ds, &ds), 100.0);
    }

    #[test]
    fn a_central_permutation_in_the_reference_counts_as_covered() {
        let target = AnalogyDataset::new(
            "toy",
            Split::Train,
            vec![AnalogyQuadruple::valid("a", "b", "c", "d")],
        );
        let reference = AnalogyDataset::new(
            "toy",
            Split::Train,
            vec![AnalogyQuadruple::valid("a", "c", "b", "d")],
        );
        assert_eq!(coverage(&target, &reference), 100.0);
        let unrelated = AnalogyDataset::new(
            "toy",
            Split::Train,
            vec![AnalogyQuadruple::valid("q", "w", "e", "r")],
        );
        assert_eq!(coverage(&target, &unrelated), 0.0);
    }

    #[test]
    fn word_stats_hand_checked() {
        let stats = word_stats(["aabb"]).unwrap();
        assert_eq!(stats.repeats.mean, 2.0);
        assert_eq!(stats.length.mean, 4.0);
        let stats = word_stats(["abc"]).unwrap();
        assert_eq!(stats.repeats.mean, 0.0);
        assert_eq!(stats.length.mean, 3.0);
        assert!(word_stats([]).is_err());
    }

    #[test]
    fn word_stats_is_order_invariant_and_counts_multiplicity() {
        let s1 = word_stats(["aa", "b", "aa"]).unwrap();
        let s2 = word_stats(["b", "aa", "aa"]).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.count, 3);
        // lengths 2,1,2 → mean 5/3; repeats 1,0,1 → mean 2/3
        assert!((s1.length.mean - 5.0 / 3.0).abs() < 1e-12);
        assert!((s1.repeats.mean - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s1.length.max, 2.0);
    }

    #[test]
    fn sampling_is_deterministic_without_replacement() {
        let quads: Vec<AnalogyQuadruple> =
            (0..100).map(|i| AnalogyQuadruple::valid(format!("a{i}"), "b", "c", "d")).collect();
        let s1 = sample_quadruples(&quads, 30, 7);
        let s2 = sample_quadruples(&quads, 30, 7);
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 30);
        let distinct: HashSet<_> = s1.iter().map(|q| q.a.clone()).collect();
        assert_eq!(distinct.len(), 30, "no replacement");
        let s3 = sample_quadruples(&quads, 30, 8);
        assert_ne!(s1, s3, "different seed, different draw");
        // oversampling returns everything
        assert_eq!(sample_quadruples(&quads, 1000, 1).len(), 100);
    }

    #[test]
    fn split_respects_fraction_and_partitions() {
        let quads: Vec<AnalogyQuadruple> =
            (0..26410).map(|i| AnalogyQuadruple::valid(format!("a{i}"), "b", "c", "d")).collect();
        let (train, test) = split_quadruples(&quads, 0.7, 42);
        assert_eq!(train.len(), 18487);
        assert_eq!(test.len(), 7923);
        let all: HashSet<_> = train.iter().chain(&test).map(|q| q.a.clone()).collect();
        assert_eq!(all.len(), 26410, "split must partition the dataset");
    }

    #[test]
    fn interchange_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("quads.tsv");
        let quads = vec![
            AnalogyQuadruple::valid("cat", "cats", "dog", "dogs"),
            AnalogyQuadruple::valid("良い", "良さ", "高い", "高さ"),
        ];
        write_quadruples(&path, &quads).unwrap();
        assert_eq!(read_quadruples(&path).unwrap(), quads);
    }

    #[test]
    fn unreadable_file_is_an_io_error() {
        let err = read_quadruples(Path::new("/nonexistent/definitely/missing.tsv")).unwrap_err();
        assert!(!err.is_contract_violation());
    }
}
