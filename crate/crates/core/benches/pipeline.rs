//! Single-thread vs. default rayon pool on the hot stages. Build with
//! `--no-default-features` to measure the sequential fallback instead.

use std::hint::black_box;

use cirlab_core::chunking::chunk_corpus;
use cirlab_core::corpus::{generate_corpus, CorpusConfig};
use cirlab_core::embedding::{Embedder, EmbedderConfig};
use cirlab_core::evaluation::{run_sweep, SweepSettings};
use cirlab_core::injection::{enrich_corpus, InjectionStrategy, StrategyKind};
use cirlab_core::retrieval::{IndexInput, VectorIndex};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("1-thread", one), ("default", all)]
}

fn pipeline(c: &mut Criterion) {
    let config = CorpusConfig::with_docs(42, 50);
    let (docs, queries) = generate_corpus(&config).unwrap();
    let chunks = chunk_corpus(&docs, config.chunk_token_target).unwrap();
    let embedder = Embedder::new(EmbedderConfig::default()).unwrap();
    let medium = InjectionStrategy::preset(StrategyKind::Medium, config.chunk_token_target);
    let enriched = enrich_corpus(&docs, &chunks, &medium).unwrap();
    let texts: Vec<Vec<String>> = enriched.iter().map(|e| e.tokens.clone()).collect();
    let vectors = embedder.embed_batch(&texts).unwrap();
    let inputs: Vec<IndexInput> = enriched
        .iter()
        .zip(&vectors)
        .map(|(e, v)| IndexInput {
            chunk_id: e.base.chunk_id.clone(),
            doc_id: e.base.doc_id.clone(),
            section_index: e.base.section_index,
            vector: v.clone(),
        })
        .collect();
    let index = VectorIndex::build(embedder.dim(), inputs).unwrap();
    let query_texts: Vec<Vec<String>> = queries.iter().map(|q| q.text.clone()).collect();
    let query_vectors = embedder.embed_batch(&query_texts).unwrap();
    let settings = SweepSettings::standard(EmbedderConfig::default(), config.chunk_token_target);

    let mut group = c.benchmark_group("embed_batch");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| embedder.embed_batch(black_box(&texts)).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("search_batch");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| index.search_batch(black_box(&query_vectors), 10).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| run_sweep(black_box(&docs), &queries, &settings).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
