use std::collections::BTreeSet;

use cirlab_core::chunking::chunk_corpus;
use cirlab_core::corpus::{generate_corpus, CorpusConfig};
use cirlab_core::embedding::{
    dilution_curve, orthogonalize, similarity, Embedder, EmbedderConfig, EmbeddingVector,
};
use cirlab_core::evaluation::{
    ndcg_at_k, parse_jsonl, render_csv, render_jsonl, run_sweep, SweepSettings,
};
use cirlab_core::injection::{enrich_corpus, InjectionStrategy, StrategyKind};
use proptest::prelude::*;

fn unit(raw: Vec<f64>) -> Option<EmbeddingVector> {
    EmbeddingVector::normalized(raw).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // For orthogonal local/global directions and a query that does not favour
    // the global one, every positive weight lowers the similarity.
    #[test]
    fn mixing_never_helps_without_global_alignment(
        q in prop::collection::vec(-1.0f64..1.0, 6),
        l in prop::collection::vec(-1.0f64..1.0, 6),
        g in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let (Some(q), Some(l), Some(g)) = (unit(q), unit(l), unit(g)) else { return Ok(()) };
        let Ok(g) = orthogonalize(&g, &l) else { return Ok(()) };
        let a = similarity(&q, &l);
        let b = similarity(&q, &g);
        prop_assume!(a > 1e-6 && b <= 0.0);
        for (lambda, s) in dilution_curve(&q, &l, &g, 101).unwrap().into_iter().skip(1) {
            prop_assert!(s < a, "lambda {} gives {} >= {}", lambda, s, a);
        }
    }

    #[test]
    fn ndcg_ignores_order_of_irrelevant_tail(
        n in 12usize..40,
        relevant_mask in prop::collection::vec(any::<bool>(), 40),
        seed in any::<u64>(),
    ) {
        let ids: Vec<String> = (0..n).map(|i| format!("c{i:02}")).collect();
        let relevant: BTreeSet<String> = ids
            .iter()
            .zip(&relevant_mask)
            .filter(|(_, r)| **r)
            .map(|(id, _)| id.clone())
            .collect();
        let base = ndcg_at_k(&ids, &relevant, 10);
        prop_assert!((0.0..=1.0).contains(&base));

        // Shuffle the non-relevant items ranked below 10 among their own slots.
        let mut shuffled = ids.clone();
        let slots: Vec<usize> = (10..n).filter(|&i| !relevant.contains(&ids[i])).collect();
        let mut moved: Vec<String> = slots.iter().map(|&i| ids[i].clone()).collect();
        let shift = (seed as usize) % moved.len().max(1);
        moved.rotate_left(shift);
        for (slot, id) in slots.iter().zip(moved) {
            shuffled[*slot] = id;
        }
        prop_assert_eq!(base, ndcg_at_k(&shuffled, &relevant, 10));
    }
}

#[test]
fn effective_lambda_tracks_cir_across_strategies() {
    let config = CorpusConfig::with_docs(7, 16);
    let (docs, _) = generate_corpus(&config).unwrap();
    let chunks = chunk_corpus(&docs, config.chunk_token_target).unwrap();
    let embedder = Embedder::new(EmbedderConfig::default()).unwrap();

    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for kind in StrategyKind::STATIC {
        let strategy = InjectionStrategy::preset(kind, config.chunk_token_target);
        for e in enrich_corpus(&docs, &chunks, &strategy).unwrap() {
            pairs.push((e.cir, embedder.effective_lambda(&e).unwrap()));
        }
    }
    assert!(pairs.len() >= 1000, "only {} enriched chunks", pairs.len());
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pairs.windows(2) {
        assert!(w[1].1 >= w[0].1 - 1e-9, "lambda not monotone in cir: {w:?}");
    }
}

#[test]
fn homogenization_rises_with_injection_on_several_seeds() {
    for seed in [1, 2, 3] {
        let config = CorpusConfig::with_docs(seed, 24);
        let (docs, queries) = generate_corpus(&config).unwrap();
        let settings =
            SweepSettings::standard(EmbedderConfig::default(), config.chunk_token_target);
        let report = run_sweep(&docs, &queries, &settings).unwrap();
        for w in report.rows.windows(2) {
            assert!(
                w[1].homogenization >= w[0].homogenization,
                "seed {seed}: {} {} -> {} {}",
                w[0].strategy,
                w[0].homogenization,
                w[1].strategy,
                w[1].homogenization
            );
        }
    }
}

#[test]
fn sweep_output_is_reproducible_and_round_trips() {
    let config = CorpusConfig::with_docs(11, 15);
    let (docs, queries) = generate_corpus(&config).unwrap();
    let mut settings =
        SweepSettings::standard(EmbedderConfig::default(), config.chunk_token_target);
    settings
        .strategies
        .push(InjectionStrategy::ddai(0.35).unwrap());
    let a = run_sweep(&docs, &queries, &settings).unwrap();
    let b = run_sweep(&docs, &queries, &settings).unwrap();
    assert_eq!(render_csv(&a), render_csv(&b));
    assert_eq!(render_jsonl(&a), render_jsonl(&b));
    assert_eq!(parse_jsonl(&render_jsonl(&a)).unwrap(), a);

    // A different seed must change the digest.
    let (docs2, queries2) = generate_corpus(&CorpusConfig::with_docs(12, 15)).unwrap();
    let c = run_sweep(&docs2, &queries2, &settings).unwrap();
    assert_ne!(a.config_digest, c.config_digest);
}
