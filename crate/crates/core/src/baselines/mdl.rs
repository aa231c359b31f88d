//! Description-length analogy solver.
//!
//! The transformation language: a rewrite `a → b` is a factorization
//! `a = pa · core · sa`, `b = pb · core · sb` around a shared infix (the
//! core may be empty). The rule deletes the prefix `pa` and suffix `sa` and
//! inserts `pb` and `sb` in their place; it applies to `c` iff `c` starts
//! with `pa` and ends with `sa` (without overlap), producing
//! `x = pb · middle · sb` where `middle` is what the rule left untouched.
//!
//! Every factorization is enumerated and each candidate keeps its cheapest
//! description: 2 bits of structure per non-empty edit slot (of the four)
//! plus ⌈log₂|Σ|⌉ bits per literal character in the edits, Σ being the
//! combined alphabet of the three given words (a candidate only rearranges
//! characters of `b` and `c`, so it never widens Σ). Ranking is by
//! ascending bit cost, ties lexicographic; the procedure is deterministic.

use std::collections::{BTreeMap, BTreeSet};

use super::{validate_k, RankedSolutions};
use crate::error::Result;

/// Solve `a : b :: c : ?` by enumerating rewrite factorizations of `a → b`
/// and applying each to `c`; empty when no factorization applies.
pub fn mdl_solve(a: &str, b: &str, c: &str) -> RankedSolutions {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let c: Vec<char> = c.chars().collect();
    let alphabet: BTreeSet<char> = a.iter().chain(&b).chain(&c).copied().collect();
    let literal_bits = ceil_log2(alphabet.len().max(1)) as u64;

    let mut best: BTreeMap<String, u64> = BTreeMap::new();
    for i in 0..=a.len() {
        for len in 0..=(a.len() - i) {
            let core = &a[i..i + len];
            let (pa, sa) = (&a[..i], &a[i + len..]);
            if c.len() < pa.len() + sa.len()
                || &c[..pa.len()] != pa
                || &c[c.len() - sa.len()..] != sa
            {
                continue;
            }
            let middle = &c[pa.len()..c.len() - sa.len()];
            for j in 0..=(b.len().saturating_sub(len)) {
                if &b[j..j + len] != core {
                    continue;
                }
                let (pb, sb) = (&b[..j], &b[j + len..]);
                let filled =
                    [pa, pb, sa, sb].iter().filter(|slot| !slot.is_empty()).count() as u64;
                let literals = (pa.len() + pb.len() + sa.len() + sb.len()) as u64;
                let cost = 2 * filled + literals * literal_bits;
                let x: String = pb.iter().chain(middle).chain(sb).collect();
                best.entry(x)
                    .and_modify(|prev| *prev = (*prev).min(cost))
                    .or_insert(cost);
            }
        }
    }
    RankedSolutions::by_ascending_score(best)
}

/// Classify `a : b :: c : d` as valid iff `d` ranks among the top k
/// candidates of [`mdl_solve`].
pub fn kolmo_classify(a: &str, b: &str, c: &str, d: &str, k: usize) -> Result<bool> {
    validate_k(k)?;
    Ok(mdl_solve(a, b, c).contains_in_top(d, k))
}

/// ⌈log₂ n⌉ for n ≥ 1.
fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        (n - 1).ilog2() + 1
    }
}
