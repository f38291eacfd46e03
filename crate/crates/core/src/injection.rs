//! Context blocks, the injection ratio, and injection strategies.
//!
//! An enriched chunk is `I ⊕ c`: the context block `I` followed by the base
//! chunk `c`. Its injection ratio is `CIR = L(I) / (L(I) + L(c))`.
//!
//! Static strategies are sized against a reference chunk length so that a
//! full-length chunk lands on the nominal ratio of its level (0.15, 0.35,
//! 0.60, 0.85). The density-aware strategy instead caps the context per chunk
//! so the ratio never exceeds `t_max`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chunking::{tokenize, Chunk, ChunkId};
use crate::corpus::{Document, LEAD_LEN};
use crate::error::{Error, Result};
use crate::io_util;

/// Token inserted between rendered headings.
pub const HIERARCHY_SEPARATOR: &str = "sep";
pub const DEFAULT_T_MAX: f64 = 0.35;

/// `L(I) / (L(I) + L(c))`.
pub fn compute_cir(context_len: usize, chunk_len: usize) -> Result<f64> {
    if chunk_len == 0 {
        return Err(Error::Domain("chunk length must be >= 1".into()));
    }
    Ok(ratio(context_len, chunk_len))
}

fn ratio(context_len: usize, chunk_len: usize) -> f64 {
    context_len as f64 / (context_len + chunk_len) as f64
}

/// Largest context length whose injection ratio stays at or below `t_max`:
/// `floor(L(c) · t_max / (1 - t_max))`, corrected against floating-point
/// rounding so that `compute_cir(budget, L(c)) <= t_max` always holds.
pub fn ddai_budget(chunk_len: usize, t_max: f64) -> Result<usize> {
    if !(t_max > 0.0 && t_max < 1.0) {
        return Err(Error::Domain(format!(
            "t_max must lie in (0, 1), got {t_max}"
        )));
    }
    if chunk_len == 0 {
        return Err(Error::Domain("chunk length must be >= 1".into()));
    }
    let mut budget = (chunk_len as f64 * t_max / (1.0 - t_max)).floor() as usize;
    while budget > 0 && ratio(budget, chunk_len) > t_max {
        budget -= 1;
    }
    while ratio(budget + 1, chunk_len) <= t_max {
        budget += 1;
    }
    Ok(budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Baseline,
    Low,
    Medium,
    High,
    Overload,
    Ddai,
}

impl StrategyKind {
    /// The five static levels, in increasing injection order.
    pub const STATIC: [StrategyKind; 5] = [
        StrategyKind::Baseline,
        StrategyKind::Low,
        StrategyKind::Medium,
        StrategyKind::High,
        StrategyKind::Overload,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Baseline => "baseline",
            StrategyKind::Low => "low",
            StrategyKind::Medium => "medium",
            StrategyKind::High => "high",
            StrategyKind::Overload => "overload",
            StrategyKind::Ddai => "ddai",
        }
    }

    /// Ratio a full reference-length chunk receives under this level.
    pub fn nominal_cir(self) -> Option<f64> {
        match self {
            StrategyKind::Baseline => Some(0.0),
            StrategyKind::Low => Some(0.15),
            StrategyKind::Medium => Some(0.35),
            StrategyKind::High => Some(0.60),
            StrategyKind::Overload => Some(0.85),
            StrategyKind::Ddai => None,
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(StrategyKind::Baseline),
            "low" => Ok(StrategyKind::Low),
            "medium" => Ok(StrategyKind::Medium),
            "high" => Ok(StrategyKind::High),
            "overload" => Ok(StrategyKind::Overload),
            "ddai" => Ok(StrategyKind::Ddai),
            other => Err(Error::config(
                "strategy",
                format!("unknown strategy {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionStrategy {
    pub kind: StrategyKind,
    /// Hierarchy tokens, padded with title tokens when the rendered path is
    /// shorter. Ignored by `Ddai`, which uses the unpadded path.
    pub hierarchy_budget: usize,
    pub summary_budget: usize,
    pub include_metadata: bool,
    /// Only read by `Ddai`.
    pub t_max: f64,
}

fn context_for_ratio(reference_len: usize, cir: f64) -> usize {
    (reference_len as f64 * cir / (1.0 - cir)).round() as usize
}

impl InjectionStrategy {
    /// Budgets for `kind` sized against chunks of `reference_len` tokens.
    pub fn preset(kind: StrategyKind, reference_len: usize) -> Self {
        let hierarchy = context_for_ratio(reference_len, 0.15);
        let (hierarchy_budget, summary_budget, include_metadata) = match kind {
            StrategyKind::Baseline | StrategyKind::Ddai => (0, 0, false),
            StrategyKind::Low => (hierarchy, 0, false),
            StrategyKind::Medium | StrategyKind::High | StrategyKind::Overload => {
                let total = context_for_ratio(reference_len, kind.nominal_cir().expect("static"));
                (hierarchy, total - hierarchy, kind == StrategyKind::Overload)
            }
        };
        InjectionStrategy {
            kind,
            hierarchy_budget,
            summary_budget,
            include_metadata,
            t_max: DEFAULT_T_MAX,
        }
    }

    pub fn ddai(t_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max < 1.0) {
            return Err(Error::config(
                "t_max",
                format!("must lie in (0, 1), got {t_max}"),
            ));
        }
        Ok(InjectionStrategy {
            t_max,
            ..InjectionStrategy::preset(StrategyKind::Ddai, 0)
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextBlock {
    pub hierarchy_tokens: Vec<String>,
    pub summary_tokens: Vec<String>,
    pub metadata_tokens: Vec<String>,
}

impl ContextBlock {
    /// `L(I)`.
    pub fn len(&self) -> usize {
        self.hierarchy_tokens.len() + self.summary_tokens.len() + self.metadata_tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Hierarchy, then summary, then metadata.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.hierarchy_tokens.iter().cloned());
        out.extend(self.summary_tokens.iter().cloned());
        out.extend(self.metadata_tokens.iter().cloned());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedChunk {
    pub base: Chunk,
    pub context: ContextBlock,
    /// `context.tokens() ⊕ base.tokens`.
    pub tokens: Vec<String>,
    pub cir: f64,
}

/// Heading path rendered as tokens, headings joined by [`HIERARCHY_SEPARATOR`].
pub fn render_hierarchy(heading_path: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, h) in heading_path.iter().enumerate() {
        if i > 0 {
            out.push(HIERARCHY_SEPARATOR.to_owned());
        }
        out.extend(tokenize(h));
    }
    out
}

/// Extractive digest of a document: the lead sentence of every section, in
/// order.
pub fn document_digest(doc: &Document) -> Vec<String> {
    doc.sections
        .iter()
        .flat_map(|s| s.lead().iter().cloned())
        .collect()
}

/// First `n` tokens of `source` repeated end to end; empty if `source` is.
fn cycle_take(source: &[String], n: usize) -> Vec<String> {
    if source.is_empty() {
        return Vec::new();
    }
    source.iter().cycle().take(n).cloned().collect()
}

fn metadata(doc: &Document) -> Vec<String> {
    let mut out = vec!["document".to_owned()];
    out.extend(tokenize(&doc.doc_id));
    out.push(doc.typology.to_string());
    out.push("sections".to_owned());
    for s in &doc.sections {
        if let Some(h) = s.heading_path.get(1) {
            out.extend(tokenize(h));
        }
    }
    out
}

/// Builds the context block `I` for `chunk` under `strategy`.
pub fn build_context(
    doc: &Document,
    chunk: &Chunk,
    strategy: &InjectionStrategy,
) -> Result<ContextBlock> {
    if chunk.doc_id != doc.doc_id || chunk.section_index >= doc.sections.len() {
        return Err(Error::Validation(format!(
            "chunk {} does not belong to document {}",
            chunk.chunk_id, doc.doc_id
        )));
    }
    let path = render_hierarchy(&chunk.heading_path);
    let block = match strategy.kind {
        StrategyKind::Baseline => ContextBlock::default(),
        StrategyKind::Ddai => {
            let budget = ddai_budget(chunk.len(), strategy.t_max)?;
            let hierarchy: Vec<String> = path.into_iter().take(budget).collect();
            // A summary shorter than one lead sentence carries no usable
            // signal; short chunks get the hierarchy alone.
            let rest = budget - hierarchy.len();
            let rest = if rest >= LEAD_LEN { rest } else { 0 };
            ContextBlock {
                hierarchy_tokens: hierarchy,
                summary_tokens: cycle_take(&document_digest(doc), rest),
                metadata_tokens: Vec::new(),
            }
        }
        _ => {
            let mut hierarchy = path;
            if hierarchy.len() < strategy.hierarchy_budget {
                let pad = cycle_take(&doc.title, strategy.hierarchy_budget - hierarchy.len());
                hierarchy.extend(pad);
            }
            hierarchy.truncate(strategy.hierarchy_budget);
            ContextBlock {
                hierarchy_tokens: hierarchy,
                summary_tokens: cycle_take(&document_digest(doc), strategy.summary_budget),
                metadata_tokens: if strategy.include_metadata {
                    metadata(doc)
                } else {
                    Vec::new()
                },
            }
        }
    };
    Ok(block)
}

/// `c' = I ⊕ c` with its injection ratio.
pub fn enrich(chunk: &Chunk, context: ContextBlock) -> Result<EnrichedChunk> {
    let cir = compute_cir(context.len(), chunk.len())?;
    let mut tokens = context.tokens();
    tokens.extend(chunk.tokens.iter().cloned());
    Ok(EnrichedChunk {
        base: chunk.clone(),
        context,
        tokens,
        cir,
    })
}

/// Enriches every chunk of a corpus. `chunks` must reference documents in
/// `docs` by id.
pub fn enrich_corpus(
    docs: &[Document],
    chunks: &[Chunk],
    strategy: &InjectionStrategy,
) -> Result<Vec<EnrichedChunk>> {
    let by_id: std::collections::HashMap<&str, &Document> =
        docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let one = |c: &Chunk| -> Result<EnrichedChunk> {
        let doc = by_id.get(c.doc_id.as_str()).ok_or_else(|| {
            Error::Validation(format!("chunk {} has unknown document", c.chunk_id))
        })?;
        enrich(c, build_context(doc, c, strategy)?)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        chunks.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        chunks.iter().map(one).collect()
    }
}

/// One line of the enriched-chunk dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedRecord {
    pub chunk_id: String,
    pub strategy: StrategyKind,
    pub cir: f64,
    pub tokens: Vec<String>,
}

impl EnrichedRecord {
    pub fn from_enriched(e: &EnrichedChunk, strategy: StrategyKind) -> Self {
        EnrichedRecord {
            chunk_id: e.base.chunk_id.clone(),
            strategy,
            cir: e.cir,
            tokens: e.tokens.clone(),
        }
    }

    pub fn parsed_id(&self) -> Result<ChunkId> {
        ChunkId::parse(&self.chunk_id)
            .ok_or_else(|| Error::Validation(format!("malformed chunk id {:?}", self.chunk_id)))
    }
}

pub fn write_enriched(records: &[EnrichedRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    io_util::write_atomic(path, out.as_bytes())
}

pub fn read_enriched(path: &Path) -> Result<Vec<EnrichedRecord>> {
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
