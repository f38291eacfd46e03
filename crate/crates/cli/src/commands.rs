use std::path::{Path, PathBuf};

use anyhow::Result;
use cirlab_core::chunking::{chunk_corpus, read_chunks, tokenize, write_chunks};
use cirlab_core::corpus::{
    deserialize_corpus, generate_corpus, serialize_corpus, CorpusConfig, Document, QuerySpec,
};
use cirlab_core::embedding::{Embedder, EmbedderConfig};
use cirlab_core::evaluation::{
    emit_report, parse_jsonl, render_csv, render_flags, run_sweep, ReportFormat, SweepSettings,
};
use cirlab_core::injection::{
    enrich_corpus, read_enriched, write_enriched, EnrichedRecord, InjectionStrategy, StrategyKind,
};
use cirlab_core::retrieval::{load_index, save_index, IndexInput, VectorIndex};
use cirlab_core::write_atomic;

use crate::config::RunConfig;
use crate::CliError;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const CHUNKS_FILE: &str = "chunks.jsonl";

pub fn enriched_file(kind: StrategyKind) -> String {
    format!("enriched_{kind}.jsonl")
}

pub fn vectors_file(kind: StrategyKind) -> String {
    format!("vectors_{kind}.cirx")
}

pub fn index_file(kind: StrategyKind) -> String {
    format!("index_{kind}.cirx")
}

/// Shared per-invocation state: resolved config plus output directory.
pub struct Ctx {
    pub config: RunConfig,
    pub command: &'static str,
}

impl Ctx {
    fn out(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    /// Path of a stage input: the explicit one, or the default in the output
    /// directory. Missing files are reported as such.
    fn input(&self, explicit: Option<&Path>, default: &str) -> Result<PathBuf> {
        let p = explicit
            .map(Path::to_path_buf)
            .unwrap_or_else(|| self.out(default));
        if !p.exists() {
            return Err(CliError::MissingInput(p).into());
        }
        Ok(p)
    }

    /// Creates the output directory and echoes the resolved config into it.
    fn prepare(&self) -> Result<()> {
        let dir = &self.config.out_dir;
        std::fs::create_dir_all(dir).map_err(|e| cirlab_core::Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let echo = self.out(&format!("{}.config.toml", self.command));
        write_atomic(&echo, self.config.to_toml(self.command).as_bytes())?;
        Ok(())
    }

    fn strategy_kind(&self) -> Result<StrategyKind> {
        Ok(self.config.strategy.parse()?)
    }

    fn strategy(&self) -> Result<InjectionStrategy> {
        let kind = self.strategy_kind()?;
        Ok(match kind {
            StrategyKind::Ddai => InjectionStrategy::ddai(self.config.t_max)?,
            k => InjectionStrategy::preset(k, self.config.target),
        })
    }

    fn embedder(&self, dim: usize) -> Result<Embedder> {
        Ok(Embedder::new(EmbedderConfig {
            dim,
            hash_seed: self.config.hash_seed,
        })?)
    }

    fn corpus_config(&self) -> Result<CorpusConfig> {
        let mut c = CorpusConfig::with_docs(self.config.seed, self.config.docs);
        c.chunk_token_target = self.config.target;
        c.validate()?;
        Ok(c)
    }
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

pub fn gen(ctx: &Ctx) -> Result<()> {
    let (docs, queries) = generate_corpus(&ctx.corpus_config()?)?;
    ctx.prepare()?;
    let path = ctx.out(CORPUS_FILE);
    serialize_corpus(&docs, &queries, &path)?;
    println!("{} documents, {} queries", docs.len(), queries.len());
    announce(&[path]);
    Ok(())
}

pub fn chunk(ctx: &Ctx, corpus: Option<&Path>) -> Result<()> {
    let (docs, _) = deserialize_corpus(&ctx.input(corpus, CORPUS_FILE)?)?;
    let chunks = chunk_corpus(&docs, ctx.config.target)?;
    ctx.prepare()?;
    let path = ctx.out(CHUNKS_FILE);
    write_chunks(&chunks, &path)?;
    println!("{} chunks from {} documents", chunks.len(), docs.len());
    announce(&[path]);
    Ok(())
}

pub fn inject(ctx: &Ctx, corpus: Option<&Path>, chunks: Option<&Path>) -> Result<()> {
    let (docs, _) = deserialize_corpus(&ctx.input(corpus, CORPUS_FILE)?)?;
    let chunks = read_chunks(&ctx.input(chunks, CHUNKS_FILE)?)?;
    let strategy = ctx.strategy()?;
    let enriched = enrich_corpus(&docs, &chunks, &strategy)?;
    let records: Vec<EnrichedRecord> = enriched
        .iter()
        .map(|e| EnrichedRecord::from_enriched(e, strategy.kind))
        .collect();
    ctx.prepare()?;
    let path = ctx.out(&enriched_file(strategy.kind));
    write_enriched(&records, &path)?;
    let mean = records.iter().map(|r| r.cir).sum::<f64>() / records.len().max(1) as f64;
    println!(
        "{} chunks enriched with {}, mean cir {mean:.6}",
        records.len(),
        strategy.kind
    );
    announce(&[path]);
    Ok(())
}

pub fn embed(ctx: &Ctx, enriched: Option<&Path>) -> Result<()> {
    let kind = ctx.strategy_kind()?;
    let records = read_enriched(&ctx.input(enriched, &enriched_file(kind))?)?;
    let embedder = ctx.embedder(ctx.config.dim)?;
    let texts: Vec<Vec<String>> = records.iter().map(|r| r.tokens.clone()).collect();
    let vectors = embedder.embed_batch(&texts)?;
    let inputs = records
        .iter()
        .zip(vectors)
        .map(|(r, vector)| {
            let id = r.parsed_id()?;
            Ok(IndexInput {
                chunk_id: r.chunk_id.clone(),
                doc_id: id.doc_id,
                section_index: id.section_index,
                vector,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let index = VectorIndex::build(embedder.dim(), inputs)?;
    ctx.prepare()?;
    // The dump is named after the strategy recorded in the file, not the flag.
    let recorded = records.first().map(|r| r.strategy).unwrap_or(kind);
    let path = ctx.out(&vectors_file(recorded));
    save_index(&index, &path)?;
    println!("{} vectors, dim {}", index.len(), index.dim());
    announce(&[path]);
    Ok(())
}

pub fn index(ctx: &Ctx, vectors: Option<&Path>) -> Result<()> {
    let kind = ctx.strategy_kind()?;
    let src = ctx.input(vectors, &vectors_file(kind))?;
    let index = load_index(&src)?;
    ctx.prepare()?;
    let stem = src.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let name = match stem.strip_prefix("vectors_") {
        Some(rest) => format!("index_{rest}"),
        None => index_file(kind),
    };
    let path = ctx.out(&name);
    save_index(&index, &path)?;
    println!("{} entries, dim {}", index.len(), index.dim());
    announce(&[path]);
    Ok(())
}

pub fn query(ctx: &Ctx, index_path: Option<&Path>, text: &str) -> Result<()> {
    let kind = ctx.strategy_kind()?;
    let index = load_index(&ctx.input(index_path, &index_file(kind))?)?;
    let embedder = ctx.embedder(index.dim())?;
    let tokens = tokenize(text);
    let q = embedder.embed(&tokens)?;
    let result = index.search(&q, ctx.config.k)?;
    for (rank, h) in result.hits.iter().enumerate() {
        println!(
            "{}\t{:.6}\t{}\t{}\t{}",
            rank + 1,
            h.score,
            h.chunk_id,
            h.doc_id,
            h.section_index
        );
    }
    Ok(())
}

fn load_or_generate(ctx: &Ctx, corpus: Option<&Path>) -> Result<(Vec<Document>, Vec<QuerySpec>)> {
    match corpus {
        Some(p) => Ok(deserialize_corpus(&ctx.input(Some(p), CORPUS_FILE)?)?),
        None => Ok(generate_corpus(&ctx.corpus_config()?)?),
    }
}

pub fn sweep(ctx: &Ctx, corpus: Option<&Path>) -> Result<()> {
    let (docs, queries) = load_or_generate(ctx, corpus)?;
    let embedder = EmbedderConfig {
        dim: ctx.config.dim,
        hash_seed: ctx.config.hash_seed,
    };
    let mut settings = SweepSettings::standard(embedder, ctx.config.target);
    if ctx.config.with_ddai {
        settings
            .strategies
            .push(InjectionStrategy::ddai(ctx.config.t_max)?);
    }
    let report = run_sweep(&docs, &queries, &settings)?;
    ctx.prepare()?;
    let mut written = emit_report(&report, ReportFormat::Csv, &ctx.config.out_dir)?;
    written.extend(emit_report(
        &report,
        ReportFormat::Jsonl,
        &ctx.config.out_dir,
    )?);
    print!("{}", render_csv(&report));
    println!("{}", render_flags(&report));
    announce(&written);
    Ok(())
}

pub fn report(ctx: &Ctx, input: Option<&Path>, format: ReportFormat) -> Result<()> {
    let src = ctx.input(input, "sweep.jsonl")?;
    let text = std::fs::read_to_string(&src).map_err(|e| cirlab_core::Error::Io {
        path: src.clone(),
        source: e,
    })?;
    let report = parse_jsonl(&text)?;
    ctx.prepare()?;
    let written = emit_report(&report, format, &ctx.config.out_dir)?;
    for p in &written {
        println!("{}", p.display());
    }
    Ok(())
}
