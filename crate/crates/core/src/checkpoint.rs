//! Binary model checkpoints: a self-describing, checksummed container for
//! everything needed to reload and run a trained model.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "MRPH"                      4-byte magic
//! version                     u32
//! header length               u32
//! header                      JSON: language, training config, vocabulary,
//!                             final loss, and a tensor manifest of
//!                             (name, shape, offset into the payload)
//! payload                     raw f32 parameter data, manifest order
//! checksum                    u32 CRC-32 over every preceding byte
//! ```
//!
//! The manifest makes the payload self-describing: tensors are located by
//! name and validated against the shapes the configuration implies, so a
//! reordered or truncated file is rejected rather than misread. Save and
//! load round-trip bit-exactly — parameters are stored as raw IEEE-754
//! bits, and the header serializer is deterministic — so equal models
//! produce byte-identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{self, ClassifierParams};
use crate::embedder::{self, CharVocab, EmbedderParams, FILTER_WIDTHS};
use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::train::TrainConfig;

pub const MAGIC: [u8; 4] = *b"MRPH";
pub const FORMAT_VERSION: u32 = 1;

/// A trained model plus everything needed to use it: the vocabulary it was
/// built on, its configuration, and the loss it ended at.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Language tag of the training data (free-form, e.g. "finnish").
    pub language: String,
    pub config: TrainConfig,
    pub vocab: CharVocab,
    pub embedder: EmbedderParams<f32>,
    pub classifier: ClassifierParams<f32>,
    /// Mean training loss of the final epoch.
    pub final_loss: f64,
}

#[derive(Serialize, Deserialize)]
struct Header {
    language: String,
    config: TrainConfig,
    vocab: CharVocab,
    final_loss: f64,
    manifest: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    name: String,
    shape: Vec<usize>,
    /// Byte offset of this tensor's data within the payload section.
    offset: u64,
}

impl Checkpoint {
    /// Serialize to the container format described in the module docs.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let named: Vec<(String, &Tensor<f32>)> = self
            .embedder
            .named_tensors()
            .into_iter()
            .chain(self.classifier.named_tensors())
            .collect();
        let mut manifest = Vec::with_capacity(named.len());
        let mut payload = Vec::new();
        for (name, tensor) in &named {
            manifest.push(ManifestEntry {
                name: name.clone(),
                shape: tensor.shape().to_vec(),
                offset: payload.len() as u64,
            });
            for v in tensor.data() {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
        let header = Header {
            language: self.language.clone(),
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            final_loss: self.final_loss,
            manifest,
        };
        let header_bytes = serde_json::to_vec(&header)
            .map_err(|e| Error::InvalidInput(format!("unserializable checkpoint header: {e}")))?;

        let mut out =
            Vec::with_capacity(4 + 4 + 4 + header_bytes.len() + payload.len() + 4);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header_bytes.len() as u32).to_le_bytes());
        out.extend_from_slice(&header_bytes);
        out.extend_from_slice(&payload);
        out.extend_from_slice(&crc32fast::hash(&out).to_le_bytes());
        Ok(out)
    }

    /// Parse and validate a serialized checkpoint.
    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
        let bad = |msg: String| Error::BadCheckpoint(msg);
        if bytes.len() < 16 {
            return Err(bad(format!("file too short ({} bytes)", bytes.len())));
        }
        if bytes[..4] != MAGIC {
            return Err(bad("bad magic: not a model checkpoint".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(bad(format!(
                "unsupported format version {version} (this build reads {FORMAT_VERSION})"
            )));
        }
        let stored_crc = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().expect("4 bytes"));
        let computed_crc = crc32fast::hash(&bytes[..bytes.len() - 4]);
        if stored_crc != computed_crc {
            return Err(bad(format!(
                "checksum mismatch (stored {stored_crc:#010x}, computed {computed_crc:#010x}): corrupt file"
            )));
        }
        let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        let payload_start = 12 + header_len;
        if payload_start > bytes.len() - 4 {
            return Err(bad(format!("header length {header_len} overruns the file")));
        }
        let header: Header = serde_json::from_slice(&bytes[12..payload_start])
            .map_err(|e| bad(format!("malformed header: {e}")))?;
        let payload = &bytes[payload_start..bytes.len() - 4];

        let econfig = header.config.embedder_config();
        let cconfig = header.config.classifier_config();
        let expected = expected_shapes(&econfig, &cconfig, header.vocab.len());
        if header.manifest.len() != expected.len() {
            return Err(bad(format!(
                "manifest lists {} tensors, expected {}",
                header.manifest.len(),
                expected.len()
            )));
        }
        let read = |name: &str, shape: &[usize]| -> Result<Tensor<f32>> {
            let entry = header
                .manifest
                .iter()
                .find(|e| e.name == name)
                .ok_or_else(|| bad(format!("manifest is missing tensor {name}")))?;
            if entry.shape != shape {
                return Err(bad(format!(
                    "tensor {name} has shape {:?}, configuration implies {shape:?}",
                    entry.shape
                )));
            }
            let count: usize = shape.iter().product();
            let start = entry.offset as usize;
            let end = start + count * 4;
            if end > payload.len() {
                return Err(bad(format!("tensor {name} overruns the payload")));
            }
            let data = payload[start..end]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            Tensor::new(shape, data)
        };

        let m = econfig.char_dim;
        let f = econfig.filters_per_width;
        let char_embeddings = read("embedder.char_embeddings", &[header.vocab.len(), m])?;
        let mut banks = Vec::with_capacity(FILTER_WIDTHS.len());
        for w in FILTER_WIDTHS {
            let kernel = read(&format!("embedder.bank_w{w}.kernel"), &[f, w, m])?;
            let bias = read(&format!("embedder.bank_w{w}.bias"), &[f])?;
            banks.push((kernel, bias));
        }
        let embedder = EmbedderParams { config: econfig, char_embeddings, banks };

        let (c1, c2) = (cconfig.conv1_filters, cconfig.conv2_filters);
        let classifier = ClassifierParams {
            config: cconfig,
            conv1_w: read("classifier.conv1.weight", &[2, c1])?,
            conv1_b: read("classifier.conv1.bias", &[c1])?,
            conv2_w: read("classifier.conv2.weight", &[c2, 2, 2, c1])?,
            conv2_b: read("classifier.conv2.bias", &[c2])?,
            fc_w: read("classifier.fc.weight", &[1, cconfig.dense_inputs()])?,
            fc_b: read("classifier.fc.bias", &[1])?,
        };

        Ok(Checkpoint {
            language: header.language,
            config: header.config,
            vocab: header.vocab,
            embedder,
            classifier,
            final_loss: header.final_loss,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Probability that `a:b::c:d` is a valid analogy.
    pub fn score(&self, words: [&str; 4]) -> Result<f32> {
        let embedded: Vec<Tensor<f32>> = words
            .iter()
            .map(|w| embedder::embed_word(&self.embedder, &self.vocab, w))
            .collect::<Result<_>>()?;
        classifier::score_quadruple(
            &self.classifier,
            &embedded[0],
            &embedded[1],
            &embedded[2],
            &embedded[3],
        )
    }

    /// Threshold decision on [`Self::score`].
    pub fn classify(&self, words: [&str; 4]) -> Result<bool> {
        Ok(classifier::classify(self.score(words)?, self.config.threshold as f32))
    }
}

/// Name → shape table the configuration implies, for manifest validation.
fn expected_shapes(
    econfig: &embedder::EmbedderConfig,
    cconfig: &classifier::ClassifierConfig,
    vocab_len: usize,
) -> Vec<(String, Vec<usize>)> {
    let m = econfig.char_dim;
    let f = econfig.filters_per_width;
    let (c1, c2) = (cconfig.conv1_filters, cconfig.conv2_filters);
    let mut out = vec![("embedder.char_embeddings".to_string(), vec![vocab_len, m])];
    for w in FILTER_WIDTHS {
        out.push((format!("embedder.bank_w{w}.kernel"), vec![f, w, m]));
        out.push((format!("embedder.bank_w{w}.bias"), vec![f]));
    }
    out.push(("classifier.conv1.weight".into(), vec![2, c1]));
    out.push(("classifier.conv1.bias".into(), vec![c1]));
    out.push(("classifier.conv2.weight".into(), vec![c2, 2, 2, c1]));
    out.push(("classifier.conv2.bias".into(), vec![c2]));
    out.push(("classifier.fc.weight".into(), vec![1, cconfig.dense_inputs()]));
    out.push(("classifier.fc.bias".into(), vec![1]));
    out
}
