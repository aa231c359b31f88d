//! Monte-Carlo analogy solver by random string recombination.
//!
//! One trial merges `b` and `c` into a random interleaving (each string's
//! internal order preserved, uniform over all merge patterns) and then
//! deletes `a` from it as a subsequence, keeping the deletion feasible with
//! random choices along the way; the characters that survive form one
//! candidate for `a : b :: c : ?`. Across many trials the right completion
//! tends to dominate the frequency table. Candidates always have length
//! `|b| + |c| − |a|`, since a trial emits only when all of `a` was deleted.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{validate_k, RankedSolutions};
use crate::error::{Error, Result};

/// Trial count that gives stable rankings on word-sized inputs.
pub const DEFAULT_RHO: usize = 1000;

/// Solve `a : b :: c : ?` with `rho` random recombination trials, ranking
/// candidates by frequency (ties lexicographic). Deterministic for a fixed
/// seed. Trials where `a` cannot be deleted are dropped; if none succeeds
/// the ranking is empty.
pub fn alea_solve(a: &str, b: &str, c: &str, rho: usize, seed: u64) -> Result<RankedSolutions> {
    if rho == 0 {
        return Err(Error::InvalidInput("trial count must be at least 1".into()));
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let c: Vec<char> = c.chars().collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut shuffle = Vec::with_capacity(b.len() + c.len());
    for _ in 0..rho {
        draw_interleaving(&b, &c, &mut rng, &mut shuffle);
        if let Some(candidate) = delete_subsequence(&shuffle, &a, &mut rng) {
            *counts.entry(candidate).or_insert(0) += 1;
        }
    }
    Ok(RankedSolutions::by_descending_score(counts))
}

/// Classify `a : b :: c : d` as valid iff `d` ranks among the top k
/// candidates of [`alea_solve`].
pub fn alea_classify(
    a: &str,
    b: &str,
    c: &str,
    d: &str,
    k: usize,
    rho: usize,
    seed: u64,
) -> Result<bool> {
    validate_k(k)?;
    Ok(alea_solve(a, b, c, rho, seed)?.contains_in_top(d, k))
}

/// Append a uniform random interleaving of `b` and `c` into `out`
/// (cleared first). Taking from `b` with probability `remaining_b / total`
/// at every step weights each complete merge pattern equally.
fn draw_interleaving(b: &[char], c: &[char], rng: &mut impl Rng, out: &mut Vec<char>) {
    out.clear();
    let (mut i, mut j) = (0usize, 0usize);
    while i < b.len() || j < c.len() {
        let nb = (b.len() - i) as u64;
        let nc = (c.len() - j) as u64;
        let take_b = nc == 0 || (nb > 0 && rng.random_range(0..nb + nc) < nb);
        if take_b {
            out.push(b[i]);
            i += 1;
        } else {
            out.push(c[j]);
            j += 1;
        }
    }
}

/// Delete one embedding of `a` from `s`, choosing among embeddings with a
/// left-to-right scan that flips a coin at each optional match; a match is
/// forced when skipping it would make the rest of `a` unmatchable. Returns
/// the surviving characters, or `None` when `a` is not a subsequence of `s`.
fn delete_subsequence(s: &[char], a: &[char], rng: &mut impl Rng) -> Option<String> {
    // latest[j]: the latest position where matching a[j] may start so that
    // a[j..] still embeds into the rest of s; computed right to left.
    let mut latest = vec![0usize; a.len() + 1];
    latest[a.len()] = s.len();
    for j in (0..a.len()).rev() {
        latest[j] = s[..latest[j + 1]].iter().rposition(|&ch| ch == a[j])?;
    }
    let mut out = Vec::with_capacity(s.len() - a.len());
    let mut next = 0usize;
    for (t, &ch) in s.iter().enumerate() {
        if next < a.len() && ch == a[next] && (t == latest[next] || rng.random_bool(0.5)) {
            next += 1;
        } else {
            out.push(ch);
        }
    }
    debug_assert_eq!(next, a.len(), "the scan must finish the deletion");
    Some(out.into_iter().collect())
}
