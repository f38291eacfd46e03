//! Exact cosine kNN over enriched-chunk vectors.
//!
//! Vectors are held as `f32` (the on-disk precision) and scored in `f64`.
//! Search is a full scan; ties are broken by ascending chunk id, so results do
//! not depend on insertion order or thread count.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! "CIRX" | version u16 | dim u32 | count u64
//! count × { chunk_id: u32 len + UTF-8 | doc_id: u32 len + UTF-8 | section u32 }
//! count × dim × f32
//! ```

use std::cmp::Ordering;
use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingVector;
use crate::error::{Error, Result};
use crate::io_util;

pub const MAGIC: &[u8; 4] = b"CIRX";
pub const VERSION: u16 = 1;

/// Accepted deviation from unit norm for stored `f32` vectors.
const STORED_NORM_TOLERANCE: f64 = 1e-4;
/// Accepted deviation from unit norm for incoming `f64` vectors.
const INPUT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub chunk_id: String,
    pub doc_id: String,
    pub section_index: u32,
    pub vector: Vec<f32>,
}

/// Input row for [`VectorIndex::build`].
#[derive(Debug, Clone)]
pub struct IndexInput {
    pub chunk_id: String,
    pub doc_id: String,
    pub section_index: usize,
    pub vector: EmbeddingVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    dim: usize,
    entries: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub chunk_id: String,
    pub doc_id: String,
    pub section_index: u32,
    pub score: f64,
}

/// Ranked hits, best first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub hits: Vec<Hit>,
}

impl SearchResult {
    pub fn chunk_ids(&self) -> impl Iterator<Item = &str> {
        self.hits.iter().map(|h| h.chunk_id.as_str())
    }
}

/// Descending score, then ascending chunk id.
pub fn rank_order(a_score: f64, a_id: &str, b_score: f64, b_id: &str) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_id.cmp(b_id))
}

fn check_norm_f32(v: &[f32], id: &str) -> Result<()> {
    let n = v
        .iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt();
    if (n - 1.0).abs() > STORED_NORM_TOLERANCE {
        return Err(Error::Validation(format!(
            "vector for {id} is not unit norm ({n})"
        )));
    }
    Ok(())
}

impl VectorIndex {
    /// Validates and freezes `inputs`: uniform `dim`, unit vectors, unique ids.
    pub fn build(dim: usize, inputs: Vec<IndexInput>) -> Result<Self> {
        let mut entries = Vec::with_capacity(inputs.len());
        for input in inputs {
            if input.vector.dim() != dim {
                return Err(Error::Validation(format!(
                    "vector for {} has dim {}, index dim is {dim}",
                    input.chunk_id,
                    input.vector.dim()
                )));
            }
            let n = input.vector.norm();
            if (n - 1.0).abs() > INPUT_NORM_TOLERANCE {
                return Err(Error::Validation(format!(
                    "vector for {} is not unit norm ({n})",
                    input.chunk_id
                )));
            }
            entries.push(IndexEntry {
                chunk_id: input.chunk_id,
                doc_id: input.doc_id,
                section_index: u32::try_from(input.section_index)
                    .map_err(|_| Error::Validation("section index exceeds u32".into()))?,
                vector: input.vector.components.iter().map(|&x| x as f32).collect(),
            });
        }
        Self::from_entries(dim, entries)
    }

    /// Validates entries that already hold `f32` vectors.
    pub fn from_entries(dim: usize, entries: Vec<IndexEntry>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if e.vector.len() != dim {
                return Err(Error::Validation(format!(
                    "vector for {} has dim {}, index dim is {dim}",
                    e.chunk_id,
                    e.vector.len()
                )));
            }
            check_norm_f32(&e.vector, &e.chunk_id)?;
            if !seen.insert(e.chunk_id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate chunk id {}",
                    e.chunk_id
                )));
            }
        }
        Ok(VectorIndex { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    /// Cosine scores of every entry against `query`, in entry order.
    pub fn scores(&self, query: &EmbeddingVector) -> Result<Vec<f64>> {
        if query.dim() != self.dim {
            return Err(Error::Validation(format!(
                "query dim {} does not match index dim {}",
                query.dim(),
                self.dim
            )));
        }
        let q = &query.components;
        Ok(self
            .entries
            .iter()
            .map(|e| {
                e.vector
                    .iter()
                    .zip(q)
                    .map(|(&v, &x)| f64::from(v) * x)
                    .sum()
            })
            .collect())
    }

    /// Exact top-`k` by cosine score.
    pub fn search(&self, query: &EmbeddingVector, k: usize) -> Result<SearchResult> {
        if k == 0 {
            return Err(Error::Domain("k must be >= 1".into()));
        }
        let scores = self.scores(query)?;
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        let cmp = |&a: &usize, &b: &usize| {
            rank_order(
                scores[a],
                &self.entries[a].chunk_id,
                scores[b],
                &self.entries[b].chunk_id,
            )
        };
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable_by(cmp);
        Ok(SearchResult {
            hits: order
                .into_iter()
                .map(|i| {
                    let e = &self.entries[i];
                    Hit {
                        chunk_id: e.chunk_id.clone(),
                        doc_id: e.doc_id.clone(),
                        section_index: e.section_index,
                        score: scores[i],
                    }
                })
                .collect(),
        })
    }

    /// Runs [`search`](Self::search) for every query, in parallel when enabled.
    pub fn search_batch(&self, queries: &[EmbeddingVector], k: usize) -> Result<Vec<SearchResult>> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            queries.par_iter().map(|q| self.search(q, k)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            queries.iter().map(|q| self.search(q, k)).collect()
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(18 + self.entries.len() * (self.dim * 4 + 32));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for e in &self.entries {
            for s in [&e.chunk_id, &e.doc_id] {
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
            out.extend_from_slice(&e.section_index.to_le_bytes());
        }
        for e in &self.entries {
            for x in &e.vector {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let dim = u32::from_le_bytes(r.array()?) as usize;
        let count = u64::from_le_bytes(r.array()?);
        let count = usize::try_from(count).map_err(|_| Error::Format("count overflows".into()))?;
        // Every entry needs at least 12 id bytes and 4·dim vector bytes.
        if count.saturating_mul(12 + 4 * dim) > bytes.len() {
            return Err(Error::Format(format!(
                "truncated: header declares {count} entries"
            )));
        }
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            let chunk_id = r.string()?;
            let doc_id = r.string()?;
            let section_index = u32::from_le_bytes(r.array()?);
            ids.push((chunk_id, doc_id, section_index));
        }
        let mut entries = Vec::with_capacity(count);
        for (chunk_id, doc_id, section_index) in ids {
            let mut vector = Vec::with_capacity(dim);
            for _ in 0..dim {
                vector.push(f32::from_le_bytes(r.array()?));
            }
            entries.push(IndexEntry {
                chunk_id,
                doc_id,
                section_index,
                vector,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Self::from_entries(dim, entries).map_err(|e| Error::Format(e.to_string()))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn string(&mut self) -> Result<String> {
        let len = u32::from_le_bytes(self.array()?) as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Format("id is not UTF-8".into()))
    }
}

pub fn save_index(index: &VectorIndex, path: &Path) -> Result<()> {
    io_util::write_atomic(path, &index.to_bytes())
}

pub fn load_index(path: &Path) -> Result<VectorIndex> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    VectorIndex::from_bytes(&bytes)
}
