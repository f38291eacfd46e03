//! Retrieval metrics, strategy sweeps, and reports.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chunking::{chunk_corpus, Chunk, ChunkId};
use crate::corpus::{render_corpus, Document, Intent, QuerySpec};
use crate::embedding::{dot, Embedder, EmbedderConfig, EmbeddingVector};
use crate::error::{Error, Result};
use crate::injection::{enrich_corpus, InjectionStrategy, StrategyKind};
use crate::io_util;
use crate::retrieval::{Hit, IndexInput, SearchResult, VectorIndex};

/// Binary-gain NDCG@k. `ranked` is best first; returns 0 when `relevant` is
/// empty.
pub fn ndcg_at_k<S: AsRef<str>>(ranked: &[S], relevant: &BTreeSet<String>, k: usize) -> f64 {
    if relevant.is_empty() || k == 0 {
        return 0.0;
    }
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, id)| relevant.contains(id.as_ref()))
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..k.min(relevant.len()))
        .map(|i| 1.0 / ((i + 2) as f64).log2())
        .sum();
    dcg / ideal
}

/// Recall@k for one query.
///
/// Specific: 1 if the gold chunk is among the first `k` hits. Thematic: runs
/// of consecutive hits from the same document are collapsed, and the result
/// is 1 if the gold document is among the first `k` documents.
pub fn recall_at_k(ranking: &SearchResult, query: &QuerySpec, k: usize) -> f64 {
    let hit = match query.intent {
        Intent::Specific => ranking
            .hits
            .iter()
            .take(k)
            .any(|h| query.gold_chunk_ids.contains(&h.chunk_id)),
        Intent::Thematic => {
            let mut docs: Vec<&str> = Vec::new();
            for h in &ranking.hits {
                if docs.last() != Some(&h.doc_id.as_str()) {
                    docs.push(&h.doc_id);
                }
            }
            docs.iter().take(k).any(|d| *d == query.gold_doc_id)
        }
    };
    if hit {
        1.0
    } else {
        0.0
    }
}

/// Mean pairwise cosine among one document's chunk vectors; `None` below two
/// vectors.
pub fn mean_pairwise_similarity(vectors: &[EmbeddingVector]) -> Option<f64> {
    if vectors.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            total += dot(&vectors[i].components, &vectors[j].components);
            pairs += 1;
        }
    }
    Some(total / pairs as f64)
}

/// Intra-document homogenization: [`mean_pairwise_similarity`] averaged over
/// documents, skipping those with fewer than two chunks.
pub fn homogenization(per_document: &[Vec<EmbeddingVector>]) -> Option<f64> {
    let means: Vec<f64> = per_document
        .iter()
        .filter_map(|v| mean_pairwise_similarity(v))
        .collect();
    if means.is_empty() {
        None
    } else {
        Some(means.iter().sum::<f64>() / means.len() as f64)
    }
}

/// Share of specific-query failures whose top hit is in the gold document
/// but in a different section. `None` when there are no failures.
pub fn wrong_section_share(failures: &[(&QuerySpec, &Hit)]) -> Option<f64> {
    if failures.is_empty() {
        return None;
    }
    let wrong_section = failures
        .iter()
        .filter(|(q, top)| {
            let gold_section = q
                .gold_chunk_ids
                .iter()
                .next()
                .and_then(|id| ChunkId::parse(id))
                .map(|c| c.section_index);
            top.doc_id == q.gold_doc_id && gold_section != Some(top.section_index as usize)
        })
        .count();
    Some(wrong_section as f64 / failures.len() as f64)
}

/// Cut-offs used by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoffs {
    pub ndcg_k: usize,
    pub recall_k: usize,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs {
            ndcg_k: 10,
            recall_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub strategy: StrategyKind,
    pub mean_cir: f64,
    pub ndcg10: f64,
    pub recall5_specific: f64,
    pub recall5_thematic: f64,
    pub homogenization: f64,
    pub wrong_section_share: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepFlags {
    pub inverted_u: bool,
    pub curve_cross_cir: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config_digest: String,
    /// Ascending by `mean_cir`.
    pub rows: Vec<MetricRow>,
    pub flags: SweepFlags,
}

impl SweepReport {
    pub fn row(&self, kind: StrategyKind) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.strategy == kind)
    }
}

/// Shape flags over rows sorted by `mean_cir`.
///
/// `inverted_u`: some interior row beats both end rows on NDCG.
/// `curve_cross_cir`: when specific recall leads at the lowest ratio, the
/// smallest ratio at which thematic recall overtakes it.
pub fn shape_flags(rows: &[MetricRow]) -> SweepFlags {
    let inverted_u = rows.len() >= 3 && {
        let first = rows[0].ndcg10;
        let last = rows[rows.len() - 1].ndcg10;
        rows[1..rows.len() - 1]
            .iter()
            .any(|r| r.ndcg10 > first && r.ndcg10 > last)
    };
    let curve_cross_cir = match rows.first() {
        Some(r0) if r0.recall5_specific > r0.recall5_thematic => rows
            .iter()
            .find(|r| r.recall5_thematic > r.recall5_specific)
            .map(|r| r.mean_cir),
        _ => None,
    };
    SweepFlags {
        inverted_u,
        curve_cross_cir,
    }
}

/// Everything a sweep needs besides the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub strategies: Vec<InjectionStrategy>,
    pub embedder: EmbedderConfig,
    pub chunk_token_target: usize,
    pub cutoffs: Cutoffs,
}

impl SweepSettings {
    /// The five static levels, sized for `chunk_token_target`.
    pub fn standard(embedder: EmbedderConfig, chunk_token_target: usize) -> Self {
        SweepSettings {
            strategies: StrategyKind::STATIC
                .iter()
                .map(|&k| InjectionStrategy::preset(k, chunk_token_target))
                .collect(),
            embedder,
            chunk_token_target,
            cutoffs: Cutoffs::default(),
        }
    }
}

fn config_digest(docs: &[Document], queries: &[QuerySpec], settings: &SweepSettings) -> String {
    let mut h = Sha256::new();
    h.update(render_corpus(docs, queries).as_bytes());
    h.update(serde_json::to_vec(settings).expect("settings serialize"));
    hex::encode(&h.finalize()[..8])
}

/// Runs chunk → inject → embed → index → evaluate for every strategy.
pub fn run_sweep(
    docs: &[Document],
    queries: &[QuerySpec],
    settings: &SweepSettings,
) -> Result<SweepReport> {
    if docs.is_empty() {
        return Err(Error::Validation("sweep needs a non-empty corpus".into()));
    }
    if queries.is_empty() {
        return Err(Error::Validation("sweep needs at least one query".into()));
    }
    if settings.strategies.is_empty() {
        return Err(Error::config(
            "strategies",
            "at least one strategy is required",
        ));
    }
    let embedder = Embedder::new(settings.embedder)?;
    let chunks = chunk_corpus(docs, settings.chunk_token_target)?;
    let query_texts: Vec<Vec<String>> = queries.iter().map(|q| q.text.clone()).collect();
    let query_vectors = embedder.embed_batch(&query_texts)?;

    let run = |s: &InjectionStrategy| {
        evaluate_strategy(
            docs,
            &chunks,
            queries,
            &query_vectors,
            s,
            &embedder,
            settings.cutoffs,
        )
    };
    #[cfg(feature = "parallel")]
    let mut rows: Vec<MetricRow> = {
        use rayon::prelude::*;
        settings
            .strategies
            .par_iter()
            .map(run)
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let mut rows: Vec<MetricRow> = settings.strategies.iter().map(run).collect::<Result<_>>()?;

    check_static_order(&rows)?;
    rows.sort_by(|a, b| a.mean_cir.total_cmp(&b.mean_cir));
    let flags = shape_flags(&rows);
    Ok(SweepReport {
        config_digest: config_digest(docs, queries, settings),
        rows,
        flags,
    })
}

/// Static levels must yield strictly increasing mean ratios in level order.
fn check_static_order(rows: &[MetricRow]) -> Result<()> {
    let mut statics: Vec<&MetricRow> = rows
        .iter()
        .filter(|r| r.strategy != StrategyKind::Ddai)
        .collect();
    statics.sort_by_key(|r| r.strategy);
    for w in statics.windows(2) {
        if w[0].strategy != w[1].strategy && w[0].mean_cir >= w[1].mean_cir {
            return Err(Error::Validation(format!(
                "mean CIR of {} ({}) is not below {} ({})",
                w[0].strategy, w[0].mean_cir, w[1].strategy, w[1].mean_cir
            )));
        }
    }
    Ok(())
}

fn evaluate_strategy(
    docs: &[Document],
    chunks: &[Chunk],
    queries: &[QuerySpec],
    query_vectors: &[EmbeddingVector],
    strategy: &InjectionStrategy,
    embedder: &Embedder,
    cutoffs: Cutoffs,
) -> Result<MetricRow> {
    let enriched = enrich_corpus(docs, chunks, strategy)?;
    let mean_cir = enriched.iter().map(|e| e.cir).sum::<f64>() / enriched.len() as f64;
    let texts: Vec<&[String]> = enriched.iter().map(|e| e.tokens.as_slice()).collect();
    let vectors = embed_slices(embedder, &texts)?;

    let mut per_document: Vec<Vec<EmbeddingVector>> = Vec::new();
    let mut last_doc: Option<&str> = None;
    for (e, v) in enriched.iter().zip(&vectors) {
        if last_doc != Some(e.base.doc_id.as_str()) {
            per_document.push(Vec::new());
            last_doc = Some(&e.base.doc_id);
        }
        per_document.last_mut().expect("pushed").push(v.clone());
    }
    let homog = homogenization(&per_document).unwrap_or(0.0);

    let inputs = enriched
        .iter()
        .zip(vectors)
        .map(|(e, vector)| IndexInput {
            chunk_id: e.base.chunk_id.clone(),
            doc_id: e.base.doc_id.clone(),
            section_index: e.base.section_index,
            vector,
        })
        .collect();
    let index = VectorIndex::build(embedder.dim(), inputs)?;
    let depth = cutoffs.ndcg_k.max(cutoffs.recall_k);
    let results = index.search_batch(query_vectors, depth)?;

    let mut ndcg = 0.0;
    let (mut spec_hits, mut spec_n, mut them_hits, mut them_n) = (0.0, 0usize, 0.0, 0usize);
    let mut failures: Vec<(&QuerySpec, &Hit)> = Vec::new();
    for (q, res) in queries.iter().zip(&results) {
        let ids: Vec<&str> = res.chunk_ids().collect();
        ndcg += ndcg_at_k(&ids, &q.gold_chunk_ids, cutoffs.ndcg_k);
        let r = recall_at_k(res, q, cutoffs.recall_k);
        match q.intent {
            Intent::Specific => {
                spec_hits += r;
                spec_n += 1;
                if let Some(top) = res.hits.first() {
                    if !q.gold_chunk_ids.contains(&top.chunk_id) {
                        failures.push((q, top));
                    }
                }
            }
            Intent::Thematic => {
                them_hits += r;
                them_n += 1;
            }
        }
    }
    let mean = |hits: f64, n: usize| if n == 0 { 0.0 } else { hits / n as f64 };
    Ok(MetricRow {
        strategy: strategy.kind,
        mean_cir,
        ndcg10: ndcg / queries.len() as f64,
        recall5_specific: mean(spec_hits, spec_n),
        recall5_thematic: mean(them_hits, them_n),
        homogenization: homog,
        wrong_section_share: wrong_section_share(&failures),
    })
}

fn embed_slices(embedder: &Embedder, texts: &[&[String]]) -> Result<Vec<EmbeddingVector>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        texts.par_iter().map(|t| embedder.embed(t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        texts.iter().map(|t| embedder.embed(t)).collect()
    }
}

pub const CSV_HEADER: &str =
    "strategy,mean_cir,ndcg10,recall5_specific,recall5_thematic,homogenization,wrong_section_share";

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

pub fn render_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.strategy,
            fixed(r.mean_cir),
            fixed(r.ndcg10),
            fixed(r.recall5_specific),
            fixed(r.recall5_thematic),
            fixed(r.homogenization),
            r.wrong_section_share.map(fixed).unwrap_or_default(),
        );
    }
    out
}

/// One-line summary of the shape flags.
pub fn render_flags(report: &SweepReport) -> String {
    format!(
        "# flags config_digest={} inverted_u={} curve_cross_cir={}",
        report.config_digest,
        report.flags.inverted_u,
        report
            .flags
            .curve_cross_cir
            .map(fixed)
            .unwrap_or_else(|| "none".into()),
    )
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ReportLine {
    Row(MetricRow),
    Flags {
        config_digest: String,
        inverted_u: bool,
        curve_cross_cir: Option<f64>,
    },
}

pub fn render_jsonl(report: &SweepReport) -> String {
    let mut out = String::new();
    for r in &report.rows {
        out.push_str(&serde_json::to_string(&ReportLine::Row(r.clone())).expect("row serializes"));
        out.push('\n');
    }
    let flags = ReportLine::Flags {
        config_digest: report.config_digest.clone(),
        inverted_u: report.flags.inverted_u,
        curve_cross_cir: report.flags.curve_cross_cir,
    };
    out.push_str(&serde_json::to_string(&flags).expect("flags serialize"));
    out.push('\n');
    out
}

pub fn parse_jsonl(text: &str) -> Result<SweepReport> {
    let mut rows = Vec::new();
    let mut tail = None;
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let parsed: ReportLine = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        match parsed {
            ReportLine::Row(r) => rows.push(r),
            ReportLine::Flags {
                config_digest,
                inverted_u,
                curve_cross_cir,
            } => {
                tail = Some((
                    config_digest,
                    SweepFlags {
                        inverted_u,
                        curve_cross_cir,
                    },
                ))
            }
        }
    }
    let (config_digest, flags) = tail.ok_or(Error::Parse {
        line: text.lines().count() + 1,
        reason: "missing flags record".into(),
    })?;
    Ok(SweepReport {
        config_digest,
        rows,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Jsonl,
    PlotData,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" => Ok(ReportFormat::Jsonl),
            "plotdata" => Ok(ReportFormat::PlotData),
            other => Err(Error::config(
                "format",
                format!("unknown report format {other:?}"),
            )),
        }
    }
}

/// Per-strategy two-column series: `<metric> <value>` per line, in CSV
/// column order.
pub fn render_plot_series(row: &MetricRow) -> String {
    let mut out = String::new();
    let mut line = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            let _ = writeln!(out, "{name} {}", fixed(v));
        }
    };
    line("mean_cir", Some(row.mean_cir));
    line("ndcg10", Some(row.ndcg10));
    line("recall5_specific", Some(row.recall5_specific));
    line("recall5_thematic", Some(row.recall5_thematic));
    line("homogenization", Some(row.homogenization));
    line("wrong_section_share", row.wrong_section_share);
    out
}

/// Writes the report into `dir`; returns the files written.
pub fn emit_report(report: &SweepReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            let p = dir.join("sweep.csv");
            io_util::write_atomic(&p, render_csv(report).as_bytes())?;
            written.push(p);
        }
        ReportFormat::Jsonl => {
            let p = dir.join("sweep.jsonl");
            io_util::write_atomic(&p, render_jsonl(report).as_bytes())?;
            written.push(p);
        }
        ReportFormat::PlotData => {
            for row in &report.rows {
                let p = dir.join(format!("plot_{}.dat", row.strategy));
                io_util::write_atomic(&p, render_plot_series(row).as_bytes())?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, CorpusConfig};

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    fn hit(chunk: &str, doc: &str, section: u32) -> Hit {
        Hit {
            chunk_id: chunk.into(),
            doc_id: doc.into(),
            section_index: section,
            score: 0.0,
        }
    }

    fn query(intent: Intent, gold: &[&str], doc: &str) -> QuerySpec {
        QuerySpec {
            query_id: "q".into(),
            intent,
            text: vec!["x".into()],
            gold_chunk_ids: set(gold),
            gold_doc_id: doc.into(),
        }
    }

    #[test]
    fn ndcg_hand_cases() {
        let ranked = ["a", "b", "c"];
        assert_eq!(ndcg_at_k(&ranked, &set(&["a"]), 10), 1.0);
        let second = ndcg_at_k(&ranked, &set(&["b"]), 10);
        assert!((second - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!((second - 0.6309).abs() < 1e-4);
        assert_eq!(ndcg_at_k(&ranked, &set(&["z"]), 10), 0.0);
        assert_eq!(ndcg_at_k(&ranked, &BTreeSet::new(), 10), 0.0);
    }

    #[test]
    fn recall_cases() {
        let ranking = SearchResult {
            hits: vec![
                hit("d1#s000#o00000", "d1", 0),
                hit("d1#s001#o00000", "d1", 1),
                hit("d2#s000#o00000", "d2", 0),
                hit("g#s000#o00000", "g", 0),
                hit("d3#s000#o00000", "d3", 0),
                hit("g#s002#o00000", "g", 2),
            ],
        };
        let spec = |gold| query(Intent::Specific, &[gold], "g");
        assert_eq!(recall_at_k(&ranking, &spec("g#s000#o00000"), 5), 1.0);
        assert_eq!(recall_at_k(&ranking, &spec("g#s002#o00000"), 5), 0.0);
        let thematic_ranking = SearchResult {
            hits: vec![
                hit("g1", "g", 0),
                hit("g2", "g", 1),
                hit("x", "x", 0),
                hit("y", "y", 0),
                hit("g3", "g", 2),
            ],
        };
        let them = query(Intent::Thematic, &["g1", "g2", "g3"], "g");
        assert_eq!(recall_at_k(&thematic_ranking, &them, 5), 1.0);
        // Consecutive same-document hits collapse: d1 d2 g d3 are four documents.
        let them_g = query(Intent::Thematic, &["g#s000#o00000"], "g");
        assert_eq!(recall_at_k(&ranking, &them_g, 3), 1.0);
        assert_eq!(
            recall_at_k(&ranking, &query(Intent::Thematic, &["q"], "none"), 5),
            0.0
        );
    }

    #[test]
    fn homogenization_cases() {
        let e = |v: Vec<f64>| EmbeddingVector::normalized(v).unwrap();
        let same = vec![e(vec![1.0, 2.0]), e(vec![1.0, 2.0]), e(vec![1.0, 2.0])];
        assert!((homogenization(&[same]).unwrap() - 1.0).abs() < 1e-12);
        let ortho = vec![
            e(vec![1.0, 0.0, 0.0]),
            e(vec![0.0, 1.0, 0.0]),
            e(vec![0.0, 0.0, 1.0]),
        ];
        assert_eq!(homogenization(&[ortho]).unwrap(), 0.0);
        assert_eq!(homogenization(&[vec![e(vec![1.0])]]), None);

        // Pairwise cosines 0.2, 0.4, 0.6 by construction through a Gram matrix
        // factorisation.
        let gram = [[1.0, 0.2, 0.4], [0.2, 1.0, 0.6], [0.4, 0.6, 1.0]];
        let l = cholesky3(gram);
        let vs: Vec<EmbeddingVector> = (0..3)
            .map(|i| EmbeddingVector::from_unit(vec![l[i][0], l[i][1], l[i][2]]))
            .collect();
        let got = mean_pairwise_similarity(&vs).unwrap();
        assert!((got - (0.2 + 0.4 + 0.6) / 3.0).abs() < 1e-12, "{got}");
    }

    fn cholesky3(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut l = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                l[i][j] = if i == j {
                    (a[i][i] - s).sqrt()
                } else {
                    (a[i][j] - s) / l[j][j]
                };
            }
        }
        l
    }

    #[test]
    fn wrong_section_cases() {
        let q = query(Intent::Specific, &["g#s001#o00000"], "g");
        let other_doc = hit("x#s001#o00000", "x", 1);
        let same_doc = hit("g#s003#o00000", "g", 3);
        assert_eq!(wrong_section_share(&[]), None);
        assert_eq!(
            wrong_section_share(&[(&q, &other_doc), (&q, &other_doc)]),
            Some(0.0)
        );
        assert_eq!(wrong_section_share(&[(&q, &same_doc)]), Some(1.0));
        let mut nine = vec![(&q, &same_doc); 4];
        nine.extend(vec![(&q, &other_doc); 5]);
        assert!((wrong_section_share(&nine).unwrap() - 4.0 / 9.0).abs() < 1e-15);
    }

    fn row(kind: StrategyKind, cir: f64, ndcg: f64, spec: f64, them: f64) -> MetricRow {
        MetricRow {
            strategy: kind,
            mean_cir: cir,
            ndcg10: ndcg,
            recall5_specific: spec,
            recall5_thematic: them,
            homogenization: cir,
            wrong_section_share: None,
        }
    }

    #[test]
    fn flags_from_typical_rows() {
        use StrategyKind::*;
        let rows = vec![
            row(Baseline, 0.0, 0.682, 0.72, 0.45),
            row(Low, 0.15, 0.741, 0.78, 0.65),
            row(Medium, 0.35, 0.785, 0.81, 0.88),
            row(High, 0.60, 0.710, 0.65, 0.94),
            row(Overload, 0.85, 0.595, 0.42, 0.96),
        ];
        let f = shape_flags(&rows);
        assert!(f.inverted_u);
        assert_eq!(f.curve_cross_cir, Some(0.35));
        assert_eq!(
            shape_flags(&rows[..1]),
            SweepFlags {
                inverted_u: false,
                curve_cross_cir: None
            }
        );
        let monotone: Vec<_> = rows
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, mut r)| {
                r.ndcg10 = i as f64;
                r
            })
            .collect();
        assert!(!shape_flags(&monotone).inverted_u);
    }

    #[test]
    fn report_rendering() {
        use StrategyKind::*;
        let report = SweepReport {
            config_digest: "abc".into(),
            rows: vec![
                row(Baseline, 0.0, 0.5, 0.7, 0.4),
                row(Low, 0.15, 0.6, 0.6, 0.7),
            ],
            flags: SweepFlags {
                inverted_u: false,
                curve_cross_cir: Some(0.15),
            },
        };
        let csv = render_csv(&report);
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
        assert_eq!(parse_jsonl(&render_jsonl(&report)).unwrap(), report);
        let empty = SweepReport {
            rows: vec![],
            ..report.clone()
        };
        assert_eq!(render_csv(&empty), format!("{CSV_HEADER}\n"));
        assert!(parse_jsonl("").is_err());

        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&report, ReportFormat::PlotData, dir.path()).unwrap();
        assert_eq!(files.len(), report.rows.len());
        let series = std::fs::read_to_string(&files[0]).unwrap();
        assert!(series.lines().all(|l| l.split_whitespace().count() == 2));
    }

    #[test]
    fn baseline_only_sweep() {
        let cfg = CorpusConfig::with_docs(1, 6);
        let (docs, queries) = generate_corpus(&cfg).unwrap();
        let mut settings = SweepSettings::standard(EmbedderConfig::default(), 250);
        settings.strategies.truncate(1);
        let report = run_sweep(&docs, &queries, &settings).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(!report.flags.inverted_u);
        assert_eq!(report.flags.curve_cross_cir, None);
        let r = &report.rows[0];
        for m in [
            r.ndcg10,
            r.recall5_specific,
            r.recall5_thematic,
            r.homogenization,
        ] {
            assert!((0.0..=1.0).contains(&m));
        }
        assert_eq!(r.mean_cir, 0.0);
    }

    #[test]
    fn empty_inputs_rejected() {
        let settings = SweepSettings::standard(EmbedderConfig::default(), 250);
        assert!(run_sweep(&[], &[], &settings).is_err());
    }
}
