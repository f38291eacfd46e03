//! Tokenizer and fixed-window chunker.
//!
//! A token is a maximal run of alphanumeric characters after lowercasing.
//! Everything else (whitespace, punctuation, symbols) is a boundary and is
//! dropped. Token counts are therefore exact and independent of any model
//! vocabulary, which is what the injection ratio needs.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::io_util;

/// Smallest accepted window size.
pub const MIN_TARGET: usize = 16;

/// Splits `text` into lowercase alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// A contiguous window of one section's body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub section_index: usize,
    pub heading_path: Vec<String>,
    pub tokens: Vec<String>,
}

impl Chunk {
    /// Token count, `L(c)`.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Structured form of a chunk id: `<doc_id>#s<section>#o<offset>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkId {
    pub doc_id: String,
    pub section_index: usize,
    pub offset: usize,
}

impl ChunkId {
    pub fn parse(id: &str) -> Option<ChunkId> {
        let mut parts = id.rsplitn(3, '#');
        let offset = parts.next()?.strip_prefix('o')?.parse().ok()?;
        let section_index = parts.next()?.strip_prefix('s')?.parse().ok()?;
        let doc_id = parts.next()?.to_owned();
        Some(ChunkId {
            doc_id,
            section_index,
            offset,
        })
    }
}

impl fmt::Display for ChunkId {
    // Zero padding keeps lexicographic order equal to document order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}#s{:03}#o{:05}",
            self.doc_id, self.section_index, self.offset
        )
    }
}

/// Splits every section body into consecutive non-overlapping windows of
/// `target` tokens. The final window of a section may be shorter; windows
/// never cross section boundaries.
pub fn chunk_document(doc: &Document, target: usize) -> Result<Vec<Chunk>> {
    if target < MIN_TARGET {
        return Err(Error::config(
            "chunk_token_target",
            format!("must be >= {MIN_TARGET}, got {target}"),
        ));
    }
    let mut chunks = Vec::new();
    for (section_index, section) in doc.sections.iter().enumerate() {
        for (w, window) in section.body.chunks(target).enumerate() {
            let id = ChunkId {
                doc_id: doc.doc_id.clone(),
                section_index,
                offset: w * target,
            };
            chunks.push(Chunk {
                chunk_id: id.to_string(),
                doc_id: doc.doc_id.clone(),
                section_index,
                heading_path: section.heading_path.clone(),
                tokens: window.to_vec(),
            });
        }
    }
    Ok(chunks)
}

/// Chunks a whole corpus, preserving document order.
pub fn chunk_corpus(docs: &[Document], target: usize) -> Result<Vec<Chunk>> {
    #[cfg(feature = "parallel")]
    let per_doc: Vec<Vec<Chunk>> = {
        use rayon::prelude::*;
        docs.par_iter()
            .map(|d| chunk_document(d, target))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let per_doc: Vec<Vec<Chunk>> = docs
        .iter()
        .map(|d| chunk_document(d, target))
        .collect::<Result<_>>()?;
    Ok(per_doc.into_iter().flatten().collect())
}

/// Writes one chunk per line as JSON.
pub fn write_chunks(chunks: &[Chunk], path: &Path) -> Result<()> {
    let mut out = String::new();
    for c in chunks {
        out.push_str(&serde_json::to_string(c).expect("chunk serializes"));
        out.push('\n');
    }
    io_util::write_atomic(path, out.as_bytes())
}

pub fn read_chunks(path: &Path) -> Result<Vec<Chunk>> {
    let text = io_util::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}
