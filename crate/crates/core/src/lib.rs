//! Detection of morphological analogies `A:B::C:D`.
//!
//! The crate provides the full pipeline around a character-level neural
//! classifier trained from scratch, plus symbolic baselines:
//!
//! * [`corpus`] — parsing inflection tables and relation-pair files,
//!   quadruple extraction, dataset coverage, word statistics.
//! * [`augment`] — the 8 equivalent forms and the invalid reorderings used
//!   for training (3 per base) and evaluation (24 per base).
//! * [`nn`] — a minimal from-scratch tensor/layer/optimizer kernel with a
//!   finite-difference gradient checker.
//! * [`embedder`] / [`classifier`] — the character-CNN word embedder and the
//!   CNN that scores a stacked quadruple of embeddings.
//! * [`train`] / [`checkpoint`] — joint end-to-end training and a
//!   self-contained binary model format.
//! * [`baselines`] — Alea (Monte-Carlo interleaving), a minimum-description-
//!   length solver, and an exact shuffle-intersection analogy checker.
//! * [`eval`] — the positive/negative/base accuracy protocol, cross-language
//!   transfer, and report emission.
//! * [`synth`] — a seeded toy-language generator for end-to-end tests.

pub mod augment;
pub mod baselines;
pub mod checkpoint;
pub mod classifier;
pub mod corpus;
pub mod embedder;
pub mod error;
pub mod eval;
pub mod nn;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
