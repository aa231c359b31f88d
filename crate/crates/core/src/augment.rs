//! Form generation: the 8 equivalent reorderings of a valid analogy and the
//! invalid reorderings used as negative examples.
//!
//! A valid `A:B::C:D` stays valid under symmetry (swap the two sides) and
//! central permutation (swap B and C); composing those yields exactly 8
//! equivalent forms. Three reorderings that contradict the axioms serve as
//! negatives: `B:A::C:D`, `C:B::A:D`, and `A:A::C:D`. Training uses the 8
//! positives plus the 3 base negatives; evaluation expands each negative
//! into its own 8 forms for a total of 24.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use crate::corpus::{AnalogyQuadruple, Label};
use crate::error::{Error, Result};

/// The 8 equivalent forms of `q`, in fixed order:
/// `A:B::C:D`, `C:D::A:B`, `A:C::B:D`, `B:A::D:C`, `D:B::C:A`, `D:C::B:A`,
/// `C:A::D:B`, `B:D::A:C`. All labeled valid.
pub fn equivalent_forms(q: &AnalogyQuadruple) -> Vec<AnalogyQuadruple> {
    let (a, b, c, d) = (&q.a, &q.b, &q.c, &q.d);
    vec![
        AnalogyQuadruple::valid(a, b, c, d),
        AnalogyQuadruple::valid(c, d, a, b),
        AnalogyQuadruple::valid(a, c, b, d),
        AnalogyQuadruple::valid(b, a, d, c),
        AnalogyQuadruple::valid(d, b, c, a),
        AnalogyQuadruple::valid(d, c, b, a),
        AnalogyQuadruple::valid(c, a, d, b),
        AnalogyQuadruple::valid(b, d, a, c),
    ]
}

/// The 3 invalid reorderings of the base form, in fixed order:
/// `B:A::C:D`, `C:B::A:D`, `A:A::C:D`. All labeled invalid.
pub fn negative_forms(q: &AnalogyQuadruple) -> Vec<AnalogyQuadruple> {
    let (a, b, c, d) = (&q.a, &q.b, &q.c, &q.d);
    vec![
        AnalogyQuadruple::invalid(b, a, c, d),
        AnalogyQuadruple::invalid(c, b, a, d),
        AnalogyQuadruple::invalid(a, a, c, d),
    ]
}

/// An extended negative set of 8, used by the alternative training mode:
/// the 3 base negatives, then 5 of their equivalent forms — form index
/// f = 1..5 paired with negative (f+1) mod 3, a round-robin over the bases
/// rotated so the five draws touch every structural family of invalid
/// reordering (adjacent and straddling placements of the repeated word,
/// and both rotation directions).
///
/// This construction is a documented artifact choice — only the *count* of
/// 8 negatives is externally specified, not which reorderings to use.
pub fn negative_forms_extended(q: &AnalogyQuadruple) -> Vec<AnalogyQuadruple> {
    let bases = negative_forms(q);
    let expansions: Vec<Vec<AnalogyQuadruple>> = bases
        .iter()
        .map(|n| {
            equivalent_forms(n)
                .into_iter()
                .map(|mut f| {
                    f.label = Label::Invalid;
                    f
                })
                .collect()
        })
        .collect();
    let mut out = bases;
    for form_idx in 1..=5 {
        out.push(expansions[(form_idx + 1) % 3][form_idx].clone());
    }
    out
}

/// The positives and negatives generated from one base quadruple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedSet {
    pub origin: AnalogyQuadruple,
    pub positives: Vec<AnalogyQuadruple>,
    pub negatives: Vec<AnalogyQuadruple>,
}

impl AugmentedSet {
    /// Positives followed by negatives, in their fixed orders.
    pub fn examples(&self) -> impl Iterator<Item = &AnalogyQuadruple> {
        self.positives.iter().chain(self.negatives.iter())
    }
}

/// Training augmentation: 8 positives + 3 negatives (the base negatives
/// only — negatives are not expanded during training).
pub fn augment_for_training(q: &AnalogyQuadruple) -> AugmentedSet {
    AugmentedSet {
        origin: q.clone(),
        positives: equivalent_forms(q),
        negatives: negative_forms(q),
    }
}

/// Evaluation augmentation: 8 positives + 24 negatives (each of the 3 base
/// negatives expanded into its 8 equivalent forms, kept in base-major
/// order and labeled invalid).
pub fn augment_for_eval(q: &AnalogyQuadruple) -> AugmentedSet {
    let negatives = negative_forms(q)
        .iter()
        .flat_map(|n| {
            equivalent_forms(n).into_iter().map(|mut f| {
                f.label = Label::Invalid;
                f
            })
        })
        .collect();
    AugmentedSet { origin: q.clone(), positives: equivalent_forms(q), negatives }
}

/// Drop every negative that textually equals one of the same base's
/// positives (degenerate quadruples like `x:x::y:z` produce such
/// collisions). Positives are kept untouched.
pub fn dedup_conflicts(set: &mut AugmentedSet) {
    let positives: HashSet<[&str; 4]> = set.positives.iter().map(|p| p.words()).collect();
    // collect retained indices first so the borrow of positives ends
    let keep: Vec<bool> = set.negatives.iter().map(|n| !positives.contains(&n.words())).collect();
    let mut it = keep.iter();
    set.negatives.retain(|_| *it.next().expect("keep mask length"));
}

/// Write labeled examples: `a⟨TAB⟩b⟨TAB⟩c⟨TAB⟩d⟨TAB⟩{1|0}` per line.
pub fn write_labeled(path: &Path, quads: &[AnalogyQuadruple]) -> Result<()> {
    let mut buf = Vec::with_capacity(quads.len() * 26);
    for q in quads {
        let flag = if q.label == Label::Valid { '1' } else { '0' };
        writeln!(buf, "{}\t{}\t{}\t{}\t{}", q.a, q.b, q.c, q.d, flag).expect("write to vec");
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Read labeled examples written by [`write_labeled`].
pub fn read_labeled(path: &Path) -> Result<Vec<AnalogyQuadruple>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        let parse_err = |msg: String| Error::Parse { path: path.to_path_buf(), line: idx + 1, msg };
        if cols.len() != 5 || cols[..4].iter().any(|c| c.is_empty()) {
            return Err(parse_err(format!("expected 4 words and a label, got {line:?}")));
        }
        let label = match cols[4] {
            "1" => Label::Valid,
            "0" => Label::Invalid,
            other => return Err(parse_err(format!("label must be 0 or 1, got {other:?}"))),
        };
        out.push(AnalogyQuadruple { a: cols[0].into(), b: cols[1].into(), c: cols[2].into(), d: cols[3].into(), label });
    }
    Ok(out)
}
