//! Exact formal analogy checker.
//!
//! `a : b :: c : d` holds formally iff some string is simultaneously an
//! interleaving of (a, d) and an interleaving of (b, c) — the two shuffle
//! products intersect. Deciding that needs no enumeration: a dynamic
//! program over prefix states (i, j, k, l) — characters consumed from a,
//! d, b, c, with i + j == k + l — marks which states can emit a common
//! string, and the answer is whether the final state is reachable. The
//! criterion is symmetric in each pair, which is exactly why the 8
//! equivalent forms of an analogy all agree: every form keeps {a, d} as
//! one pair and {b, c} as the other.

/// Decide `a : b :: c : d` by shuffle-product intersection.
pub fn formal_classify(a: &str, b: &str, c: &str, d: &str) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let c: Vec<char> = c.chars().collect();
    let d: Vec<char> = d.chars().collect();
    if a.len() + d.len() != b.len() + c.len() {
        return false;
    }
    let (al, bl, cl, dl) = (a.len(), b.len(), c.len(), d.len());
    // reach[i][j][k] ⇔ a common prefix consumes i of a, j of d, k of b —
    // and thus i + j − k of c, which the loop keeps in range.
    let idx = |i: usize, j: usize, k: usize| (i * (dl + 1) + j) * (bl + 1) + k;
    let mut reach = vec![false; (al + 1) * (dl + 1) * (bl + 1)];
    reach[idx(0, 0, 0)] = true;
    for i in 0..=al {
        for j in 0..=dl {
            for k in 0..=bl.min(i + j) {
                let l = i + j - k;
                if l > cl || !reach[idx(i, j, k)] {
                    continue;
                }
                // The next common character extends a or d on one side and
                // b or c on the other; all four pairings may be open.
                let sources = [(a.get(i).copied(), i + 1, j), (d.get(j).copied(), i, j + 1)];
                for (ch, ni, nj) in sources {
                    let Some(ch) = ch else { continue };
                    if k < bl && b[k] == ch {
                        reach[idx(ni, nj, k + 1)] = true;
                    }
                    if l < cl && c[l] == ch {
                        reach[idx(ni, nj, k)] = true;
                    }
                }
            }
        }
    }
    reach[idx(al, dl, bl)]
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::augment::equivalent_forms;
    use crate::corpus::AnalogyQuadruple;

    /// All interleavings of x and y, by brute-force enumeration.
    fn shuffles(x: &str, y: &str) -> BTreeSet<String> {
        if x.is_empty() {
            return BTreeSet::from([y.to_string()]);
        }
        if y.is_empty() {
            return BTreeSet::from([x.to_string()]);
        }
        let mut out = BTreeSet::new();
        let (xh, xt) = x.split_at(x.chars().next().unwrap().len_utf8());
        for s in shuffles(xt, y) {
            out.insert(format!("{xh}{s}"));
        }
        let (yh, yt) = y.split_at(y.chars().next().unwrap().len_utf8());
        for s in shuffles(x, yt) {
            out.insert(format!("{yh}{s}"));
        }
        out
    }

    fn oracle(a: &str, b: &str, c: &str, d: &str) -> bool {
        !shuffles(a, d).is_disjoint(&shuffles(b, c))
    }

    #[test]
    fn documented_examples_decide_as_stated() {
        assert!(formal_classify("a", "ab", "c", "cb"), "common interleaving acb");
        assert!(formal_classify("cat", "cats", "dog", "dogs"));
        assert!(!formal_classify("cat", "cats", "dog", "cats"));
    }

    #[test]
    fn degenerate_and_empty_operands_work() {
        assert!(formal_classify("x", "x", "x", "x"));
        assert!(formal_classify("", "", "", ""));
        assert!(formal_classify("", "s", "s", "ss"), "prefixing s: ∅:s::s:ss");
        assert!(!formal_classify("", "s", "s", "t"));
    }

    #[test]
    fn agrees_with_the_brute_force_oracle_exhaustively() {
        // Every quadruple over {a, b} with word lengths ≤ 3: 15⁴ cases.
        let mut words = vec![String::new()];
        for len in 1..=3 {
            for n in 0..(1 << len) {
                words.push((0..len).map(|i| if n >> i & 1 == 0 { 'a' } else { 'b' }).collect());
            }
        }
        assert_eq!(words.len(), 15);
        let mut valid = 0usize;
        for a in &words {
            for b in &words {
                for c in &words {
                    for d in &words {
                        let got = formal_classify(a, b, c, d);
                        assert_eq!(got, oracle(a, b, c, d), "({a}, {b}, {c}, {d})");
                        valid += got as usize;
                    }
                }
            }
        }
        assert!(valid > 0, "the sweep must exercise both outcomes");
    }

    #[test]
    fn decision_is_invariant_under_all_equivalent_forms() {
        let words = ["", "a", "b", "ab", "ba", "aab"];
        for a in words {
            for b in words {
                for c in words {
                    for d in words {
                        let expect = formal_classify(a, b, c, d);
                        let q = AnalogyQuadruple::valid(a, b, c, d);
                        for form in equivalent_forms(&q) {
                            let [fa, fb, fc, fd] = form.words();
                            assert_eq!(
                                formal_classify(fa, fb, fc, fd),
                                expect,
                                "form ({fa}, {fb}, {fc}, {fd}) of ({a}, {b}, {c}, {d})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn valid_decisions_satisfy_the_character_count_law() {
        // A common interleaving forces |a|σ + |d|σ == |b|σ + |c|σ for every
        // character σ; check it on all valid outcomes of a small sweep.
        let words = ["a", "b", "ab", "ba", "abb", "bab"];
        let count = |w: &str, ch: char| w.chars().filter(|&c| c == ch).count();
        for a in words {
            for b in words {
                for c in words {
                    for d in words {
                        if formal_classify(a, b, c, d) {
                            for ch in ['a', 'b'] {
                                assert_eq!(
                                    count(a, ch) + count(d, ch),
                                    count(b, ch) + count(c, ch),
                                    "({a}, {b}, {c}, {d}) on {ch}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unicode_words_are_compared_by_code_point() {
        assert!(formal_classify("mäyrä", "mäyrässä", "mäyrä", "mäyrässä"));
        assert!(!formal_classify("mäyrä", "mäyrässä", "kolo", "kolossa"));
    }
}
