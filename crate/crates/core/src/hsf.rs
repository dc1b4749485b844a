//! Hidden-state fixture (HSF) format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "HSF1" | u32 header length | JSON header | f32le data
//! ```
//!
//! The JSON header is `{version, dim, layer_count, dtype: "f32le", groups:
//! [{label, phrase, token_count}], meta?}`. Group tensors follow in header
//! order, each stored row-major as `[layer][token][dim]`. Layer 0 is the
//! input embedding.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HSF1";
pub const VERSION: u32 = 1;
pub const DTYPE: &str = "f32le";

/// Token class of a group: prompt `A`, desirable basin `B`, undesirable
/// basin `D`, conversation `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
    D,
    C,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::A, Label::B, Label::D, Label::C];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::A => "A",
            Label::B => "B",
            Label::D => "D",
            Label::C => "C",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Label::A),
            "B" => Ok(Label::B),
            "D" => Ok(Label::D),
            "C" => Ok(Label::C),
            other => Err(Error::UnknownLabel(other.to_owned())),
        }
    }
}

/// One phrase (or prompt, or conversation turn) worth of hidden states.
#[derive(Clone, Debug, PartialEq)]
pub struct Group {
    pub label: Label,
    /// Source text, carried verbatim and never interpreted.
    pub phrase: String,
    token_count: usize,
    layer_count: usize,
    dim: usize,
    data: Vec<f32>,
}

impl Group {
    /// Builds a group from a flat `[layer][token][dim]` buffer.
    pub fn new(
        label: Label,
        phrase: impl Into<String>,
        layer_count: usize,
        token_count: usize,
        dim: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        if token_count == 0 {
            return Err(Error::Empty("group must hold at least one token"));
        }
        let expected = layer_count * token_count * dim;
        if data.len() != expected {
            return Err(Error::DimMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            label,
            phrase: phrase.into(),
            token_count,
            layer_count,
            dim,
            data,
        })
    }

    /// Builds a group from per-layer, per-token vectors.
    pub fn from_layers(label: Label, phrase: impl Into<String>, layers: &[Vec<Vec<f32>>]) -> Result<Self> {
        let layer_count = layers.len();
        let token_count = layers.first().map_or(0, Vec::len);
        let dim = layers.first().and_then(|l| l.first()).map_or(0, Vec::len);
        let mut data = Vec::with_capacity(layer_count * token_count * dim);
        for layer in layers {
            if layer.len() != token_count {
                return Err(Error::DimMismatch {
                    expected: token_count,
                    actual: layer.len(),
                });
            }
            for token in layer {
                if token.len() != dim {
                    return Err(Error::DimMismatch {
                        expected: dim,
                        actual: token.len(),
                    });
                }
                data.extend_from_slice(token);
            }
        }
        Self::new(label, phrase, layer_count, token_count, dim, data)
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Hidden state of `token` at `layer`.
    pub fn token(&self, layer: usize, token: usize) -> &[f32] {
        let start = (layer * self.token_count + token) * self.dim;
        &self.data[start..start + self.dim]
    }

    /// All token states at `layer`.
    pub fn layer(&self, layer: usize) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        let stride = self.token_count * self.dim;
        self.data[layer * stride..(layer + 1) * stride].chunks_exact(self.dim)
    }

    /// Token-mean of this group at `layer`, in double precision.
    pub fn mean_at(&self, layer: usize) -> Vec<f64> {
        let mut acc = vec![0.0f64; self.dim];
        for tok in self.layer(layer) {
            for (a, &v) in acc.iter_mut().zip(tok) {
                *a += f64::from(v);
            }
        }
        let n = self.token_count as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    fn check_finite(&self, group_index: usize) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => {
                let dim = i % self.dim;
                let token = (i / self.dim) % self.token_count;
                let layer = i / (self.dim * self.token_count);
                Err(Error::NonFinite {
                    value: self.data[i],
                    group: group_index,
                    layer,
                    token,
                    dim,
                })
            }
        }
    }
}

/// Per-layer, per-token hidden states with group labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledStateSet {
    dim: usize,
    layer_count: usize,
    groups: Vec<Group>,
    /// Free-form extractor metadata (model id, capture point, ...).
    pub meta: Option<serde_json::Value>,
}

impl LabeledStateSet {
    pub fn new(dim: usize, layer_count: usize) -> Result<Self> {
        if dim == 0 || layer_count == 0 {
            return Err(Error::InvalidParameter("dim and layer_count must be positive".into()));
        }
        Ok(Self {
            dim,
            layer_count,
            groups: Vec::new(),
            meta: None,
        })
    }

    pub fn with_groups(dim: usize, layer_count: usize, groups: Vec<Group>) -> Result<Self> {
        let mut set = Self::new(dim, layer_count)?;
        for g in groups {
            set.push(g)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, group: Group) -> Result<()> {
        if group.dim != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                actual: group.dim,
            });
        }
        if group.layer_count != self.layer_count {
            return Err(Error::DimMismatch {
                expected: self.layer_count,
                actual: group.layer_count,
            });
        }
        self.groups.push(group);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn groups_with(&self, label: Label) -> impl Iterator<Item = &Group> + '_ {
        self.groups.iter().filter(move |g| g.label == label)
    }

    pub fn has_label(&self, label: Label) -> bool {
        self.groups.iter().any(|g| g.label == label)
    }

    /// Index of the penultimate residual entry (the last one when only a
    /// single entry is stored).
    pub fn penultimate_layer(&self) -> usize {
        self.layer_count.saturating_sub(2)
    }

    pub fn check_layer(&self, layer: usize) -> Result<()> {
        if layer < self.layer_count {
            Ok(())
        } else {
            Err(Error::LayerOutOfRange {
                layer,
                layer_count: self.layer_count,
            })
        }
    }

    pub fn total_tokens(&self) -> usize {
        self.groups.iter().map(|g| g.token_count).sum()
    }

    /// Size of the tensor section of the serialised file.
    pub fn data_bytes(&self) -> usize {
        self.total_tokens() * self.layer_count * self.dim * 4
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    dim: usize,
    layer_count: usize,
    dtype: String,
    groups: Vec<GroupHeader>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct GroupHeader {
    label: String,
    phrase: String,
    token_count: usize,
}

/// Serialises `set` to `sink`, returning the number of bytes written.
pub fn write_hsf<W: Write>(set: &LabeledStateSet, mut sink: W) -> Result<u64> {
    for (i, g) in set.groups.iter().enumerate() {
        g.check_finite(i)?;
    }
    let header = Header {
        version: VERSION,
        dim: set.dim,
        layer_count: set.layer_count,
        dtype: DTYPE.to_owned(),
        groups: set
            .groups
            .iter()
            .map(|g| GroupHeader {
                label: g.label.as_str().to_owned(),
                phrase: g.phrase.clone(),
                token_count: g.token_count,
            })
            .collect(),
        meta: set.meta.clone(),
    };
    let header = serde_json::to_vec(&header)?;
    let header_len = u32::try_from(header.len()).map_err(|_| Error::InvalidHeader("header exceeds 4 GiB".into()))?;

    sink.write_all(MAGIC)?;
    sink.write_all(&header_len.to_le_bytes())?;
    sink.write_all(&header)?;
    let mut buf = Vec::with_capacity(64 * 1024);
    for g in &set.groups {
        for chunk in g.data.chunks(16 * 1024) {
            buf.clear();
            for v in chunk {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            sink.write_all(&buf)?;
        }
    }
    sink.flush()?;
    Ok((8 + header.len() + set.data_bytes()) as u64)
}

/// Parses an HSF stream.
pub fn read_hsf<R: Read>(mut source: R) -> Result<LabeledStateSet> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    parse_hsf(&bytes)
}

pub fn parse_hsf(bytes: &[u8]) -> Result<LabeledStateSet> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic {
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    if bytes.len() < 8 {
        return Err(Error::TruncatedHeader {
            expected: 8,
            actual: bytes.len(),
        });
    }
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let data_start = 8 + header_len;
    if bytes.len() < data_start {
        return Err(Error::TruncatedHeader {
            expected: data_start,
            actual: bytes.len(),
        });
    }
    let header: Header =
        serde_json::from_slice(&bytes[8..data_start]).map_err(|e| Error::InvalidHeader(e.to_string()))?;
    if header.version != VERSION {
        return Err(Error::InvalidHeader(format!("unsupported version {}", header.version)));
    }
    if header.dtype != DTYPE {
        return Err(Error::InvalidHeader(format!("unsupported dtype {:?}", header.dtype)));
    }
    let mut set =
        LabeledStateSet::new(header.dim, header.layer_count).map_err(|e| Error::InvalidHeader(e.to_string()))?;
    set.meta = header.meta;

    let labels = header
        .groups
        .iter()
        .map(|g| g.label.parse::<Label>())
        .collect::<Result<Vec<_>>>()?;
    if let Some(i) = header.groups.iter().position(|g| g.token_count == 0) {
        return Err(Error::InvalidHeader(format!("group {i} has zero tokens")));
    }
    let expected: usize = header
        .groups
        .iter()
        .map(|g| g.token_count * header.layer_count * header.dim * 4)
        .sum();
    let data = &bytes[data_start..];
    if data.len() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            actual: data.len(),
        });
    }

    let mut offset = 0;
    for (i, (gh, label)) in header.groups.into_iter().zip(labels).enumerate() {
        let n = gh.token_count * header.layer_count * header.dim;
        let values: Vec<f32> = data[offset..offset + n * 4]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        offset += n * 4;
        let group = Group::new(label, gh.phrase, header.layer_count, gh.token_count, header.dim, values)?;
        group.check_finite(i)?;
        set.groups.push(group);
    }
    Ok(set)
}

pub fn save(set: &LabeledStateSet, path: impl AsRef<Path>) -> Result<u64> {
    let file = File::create(path)?;
    write_hsf(set, BufWriter::new(file))
}

pub fn load(path: impl AsRef<Path>) -> Result<LabeledStateSet> {
    let file = File::open(path)?;
    read_hsf(BufReader::new(file))
}
