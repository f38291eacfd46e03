//! Seeded synthetic corpus with ground-truth queries.
//!
//! Documents fall into three typologies (normative, technical, transactional)
//! with different densities. Each document belongs to a topic cluster whose
//! vocabulary is disjoint from every other cluster; documents of the same
//! cluster share topic tokens and are told apart by a pair of subject tokens
//! unique to the document. Facts are anchored by rare key tokens that occur
//! nowhere else in the corpus and are placed so that a fact never straddles a
//! chunk window.
//!
//! Two query intents are generated:
//! * specific: the fact's key phrase plus one to three intent words; the gold
//!   set is the single chunk holding the fact;
//! * thematic: subject and topic tokens of one document; the gold set is every
//!   chunk of that document.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chunking::{chunk_document, ChunkId, MIN_TARGET};
use crate::error::{Error, Result};
use crate::io_util;

/// Length of the lead sentence that opens every section body. The extractive
/// digest used for summaries is built from these leads.
pub const LEAD_LEN: usize = 12;
/// Number of rare tokens in a fact's key phrase.
pub const KEY_PHRASE_LEN: usize = 3;
/// Times each key token is repeated inside its fact statement.
pub const KEY_REPEATS: usize = 3;
/// Length of a fact statement.
pub const STATEMENT_LEN: usize = KEY_PHRASE_LEN * KEY_REPEATS + 3;
/// Focus words in each lead sentence.
const LEAD_FOCUS: usize = 3;
/// Subject tokens per document.
pub const SUBJECT_TOKENS: usize = 2;

const INTENT_WORDS: &[&str] = &[
    "what",
    "which",
    "minimum",
    "maximum",
    "value",
    "limit",
    "required",
    "rate",
    "price",
    "period",
    "deadline",
    "amount",
    "caliber",
    "tolerance",
    "fee",
    "term",
    "weight",
    "duration",
    "threshold",
    "quota",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Typology {
    Normative,
    Technical,
    Transactional,
}

impl Typology {
    pub const ALL: [Typology; 3] = [
        Typology::Normative,
        Typology::Technical,
        Typology::Transactional,
    ];

    fn id_prefix(self) -> &'static str {
        match self {
            Typology::Normative => "nor",
            Typology::Technical => "tec",
            Typology::Transactional => "trn",
        }
    }

    fn title_word(self) -> &'static str {
        match self {
            Typology::Normative => "regulation",
            Typology::Technical => "specification",
            Typology::Transactional => "ledger",
        }
    }

    fn heading_words(self) -> &'static [&'static str] {
        match self {
            Typology::Normative => &["article", "clause", "chapter", "annex", "provision"],
            Typology::Technical => &[
                "properties",
                "dimensions",
                "handling",
                "packaging",
                "testing",
            ],
            Typology::Transactional => &["prices", "settlement", "invoice", "matrix", "schedule"],
        }
    }

    /// Multiplier applied to the configured section length range.
    fn length_scale(self) -> f64 {
        match self {
            Typology::Normative => 1.4,
            Typology::Technical => 0.6,
            Typology::Transactional => 1.0,
        }
    }
}

impl fmt::Display for Typology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Typology::Normative => "normative",
            Typology::Technical => "technical",
            Typology::Transactional => "transactional",
        })
    }
}

impl FromStr for Typology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normative" => Ok(Typology::Normative),
            "technical" => Ok(Typology::Technical),
            "transactional" => Ok(Typology::Transactional),
            other => Err(Error::config(
                "typology",
                format!("unknown typology {other:?}"),
            )),
        }
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub min: usize,
    pub max: usize,
}

impl Span {
    pub const fn new(min: usize, max: usize) -> Self {
        Span { min, max }
    }

    fn sample(self, rng: &mut impl Rng) -> usize {
        rng.gen_range(self.min..=self.max)
    }

    fn check(self, field: &'static str, floor: usize) -> Result<()> {
        if self.min < floor {
            return Err(Error::config(
                field,
                format!("min must be >= {floor}, got {}", self.min),
            ));
        }
        if self.min > self.max {
            return Err(Error::config(
                field,
                format!("min {} exceeds max {}", self.min, self.max),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub doc_counts: BTreeMap<Typology, usize>,
    pub sections_per_doc: Span,
    pub chunk_token_target: usize,
    pub facts_per_section: Span,
    pub vocab_topic_size: usize,
    pub vocab_shared_size: usize,
    /// Section body length before the per-typology scale is applied.
    pub section_tokens: Span,
    /// Documents sharing one topic vocabulary.
    pub docs_per_topic: usize,
    pub query_count: usize,
    /// Share of queries with specific intent; the rest are thematic.
    pub specific_fraction: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig::with_docs(42, 50)
    }
}

impl CorpusConfig {
    /// Reference configuration with `docs` documents split 3:4:3 across the
    /// normative, technical and transactional typologies.
    pub fn with_docs(seed: u64, docs: usize) -> Self {
        let normative = (docs as f64 * 0.3).round() as usize;
        let technical = (docs as f64 * 0.4).round() as usize;
        let transactional = docs.saturating_sub(normative + technical);
        CorpusConfig {
            seed,
            doc_counts: BTreeMap::from([
                (Typology::Normative, normative),
                (Typology::Technical, technical),
                (Typology::Transactional, transactional),
            ]),
            sections_per_doc: Span::new(6, 10),
            chunk_token_target: 250,
            facts_per_section: Span::new(1, 2),
            vocab_topic_size: 40,
            vocab_shared_size: 1500,
            section_tokens: Span::new(150, 650),
            docs_per_topic: 8,
            query_count: 4 * docs,
            specific_fraction: 0.5,
        }
    }

    pub fn total_docs(&self) -> usize {
        self.doc_counts.values().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_docs() == 0 {
            return Err(Error::config(
                "doc_counts",
                "at least one document is required",
            ));
        }
        if self.chunk_token_target < MIN_TARGET {
            return Err(Error::config(
                "chunk_token_target",
                format!("must be >= {MIN_TARGET}, got {}", self.chunk_token_target),
            ));
        }
        if self.chunk_token_target < STATEMENT_LEN {
            return Err(Error::config(
                "chunk_token_target",
                format!("must hold a fact statement of {STATEMENT_LEN} tokens"),
            ));
        }
        self.sections_per_doc.check("sections_per_doc", 1)?;
        self.facts_per_section.check("facts_per_section", 1)?;
        self.section_tokens.check("section_tokens", 1)?;
        if self.vocab_topic_size < 4 {
            return Err(Error::config("vocab_topic_size", "must be >= 4"));
        }
        if self.vocab_shared_size < 1 {
            return Err(Error::config("vocab_shared_size", "must be >= 1"));
        }
        if self.docs_per_topic < 1 {
            return Err(Error::config("docs_per_topic", "must be >= 1"));
        }
        if self.query_count < 2 {
            return Err(Error::config("query_count", "must be >= 2"));
        }
        if !(self.specific_fraction > 0.0 && self.specific_fraction < 1.0) {
            return Err(Error::config("specific_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub fact_id: String,
    pub key_phrase: Vec<String>,
    pub statement: Vec<String>,
    pub home_section: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    /// H1..Hk, rooted at the document title.
    pub heading_path: Vec<String>,
    pub body: Vec<String>,
    pub facts: Vec<Fact>,
}

impl Section {
    /// The opening sentence of the body.
    pub fn lead(&self) -> &[String] {
        &self.body[..self.body.len().min(LEAD_LEN)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub typology: Typology,
    pub title: Vec<String>,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Specific,
    Thematic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub query_id: String,
    pub intent: Intent,
    pub text: Vec<String>,
    pub gold_chunk_ids: BTreeSet<String>,
    pub gold_doc_id: String,
}

/// Derives an independent stream seed from a parent seed and a stage label.
pub fn fork_seed(seed: u64, label: &str) -> u64 {
    let mut h = crate::embedding::fnv1a64(seed, label.as_bytes());
    h = crate::embedding::splitmix64(h);
    h
}

struct Vocab {
    shared: Vec<String>,
    shared_weights: WeightedIndex<f64>,
    numbers: Vec<String>,
    used: HashSet<String>,
}

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "gr", "kl",
    "pr", "st", "tr",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];

fn pseudo_word(rng: &mut impl Rng, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).expect("non-empty"));
        w.push_str(NUCLEI.choose(rng).expect("non-empty"));
    }
    w
}

impl Vocab {
    fn new(rng: &mut impl Rng, shared_size: usize) -> Self {
        let mut used: HashSet<String> = INTENT_WORDS.iter().map(|w| w.to_string()).collect();
        for t in Typology::ALL {
            used.insert(t.title_word().to_owned());
            used.extend(t.heading_words().iter().map(|w| w.to_string()));
        }
        let mut shared: Vec<String> = INTENT_WORDS.iter().map(|w| w.to_string()).collect();
        while shared.len() < shared_size + INTENT_WORDS.len() {
            let syl = rng.gen_range(2..=3);
            let w = pseudo_word(rng, syl);
            if used.insert(w.clone()) {
                shared.push(w);
            }
        }
        shared[INTENT_WORDS.len()..].shuffle(rng);
        // Mild Zipf over the background vocabulary.
        let weights: Vec<f64> = (0..shared.len())
            .map(|r| 1.0 / ((r + 1) as f64).powf(0.6))
            .collect();
        let shared_weights = WeightedIndex::new(&weights).expect("positive weights");
        let numbers = (0..400).map(|n| (n * 5 + 10).to_string()).collect();
        Vocab {
            shared,
            shared_weights,
            numbers,
            used,
        }
    }

    fn fresh(&mut self, rng: &mut impl Rng, syllables: usize) -> String {
        loop {
            let w = pseudo_word(rng, syllables);
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn background(&self, rng: &mut impl Rng) -> String {
        self.shared[self.shared_weights.sample(rng)].clone()
    }

    fn number(&self, rng: &mut impl Rng) -> String {
        self.numbers.choose(rng).expect("non-empty").clone()
    }
}

struct Topic {
    tokens: Vec<String>,
}

struct DocPlan {
    doc_id: String,
    typology: Typology,
    topic: usize,
    subject: Vec<String>,
    /// Topic tokens this document leans on; thematic queries draw from them.
    focus: Vec<String>,
}

/// Generates documents and queries; a pure function of `config`.
pub fn generate_corpus(config: &CorpusConfig) -> Result<(Vec<Document>, Vec<QuerySpec>)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(fork_seed(config.seed, "corpus/vocab"));
    let mut vocab = Vocab::new(&mut rng, config.vocab_shared_size);

    // Topic clusters per typology.
    let mut topics: Vec<Topic> = Vec::new();
    let mut plans: Vec<DocPlan> = Vec::new();
    for (&typology, &count) in &config.doc_counts {
        if count == 0 {
            continue;
        }
        let n_topics = count.div_ceil(config.docs_per_topic);
        let first_topic = topics.len();
        for _ in 0..n_topics {
            let tokens = (0..config.vocab_topic_size)
                .map(|_| vocab.fresh(&mut rng, 3))
                .collect();
            topics.push(Topic { tokens });
        }
        for i in 0..count {
            let topic = first_topic + i % n_topics;
            let subject = (0..SUBJECT_TOKENS)
                .map(|_| vocab.fresh(&mut rng, 4))
                .collect();
            let focus_len = (config.vocab_topic_size / 4).max(2);
            let focus = topics[topic]
                .tokens
                .choose_multiple(&mut rng, focus_len)
                .cloned()
                .collect();
            plans.push(DocPlan {
                doc_id: format!("{}-{:03}", typology.id_prefix(), i),
                typology,
                topic,
                subject,
                focus,
            });
        }
    }

    let mut fact_counter = 0usize;
    let mut documents = Vec::with_capacity(plans.len());
    for plan in &plans {
        let mut doc_rng = ChaCha8Rng::seed_from_u64(fork_seed(
            config.seed,
            &format!("corpus/doc/{}", plan.doc_id),
        ));
        documents.push(build_document(
            plan,
            &topics[plan.topic],
            &vocab,
            config,
            &mut fact_counter,
            &mut doc_rng,
        ));
    }

    let mut qrng = ChaCha8Rng::seed_from_u64(fork_seed(config.seed, "corpus/queries"));
    let queries = build_queries(&documents, &plans, config, &mut qrng)?;
    Ok((documents, queries))
}

fn build_document(
    plan: &DocPlan,
    topic: &Topic,
    vocab: &Vocab,
    config: &CorpusConfig,
    fact_counter: &mut usize,
    rng: &mut ChaCha8Rng,
) -> Document {
    let typology = plan.typology;
    let mut title = vec![typology.title_word().to_owned()];
    title.extend(plan.subject.iter().cloned());
    title.extend(plan.focus.iter().take(2).cloned());
    let title_str = title.join(" ");

    let n_sections = config.sections_per_doc.sample(rng);
    let heading_words = typology.heading_words();
    let mut sections = Vec::with_capacity(n_sections);
    for s in 0..n_sections {
        let mut heading_path = vec![title_str.clone()];
        let h2 = format!(
            "{} {} {}",
            heading_words[s % heading_words.len()],
            s + 1,
            topic.tokens.choose(rng).expect("non-empty topic"),
        );
        heading_path.push(h2);
        let depth = match typology {
            Typology::Normative => rng.gen_range(3..=4),
            _ => rng.gen_range(2..=3),
        };
        for _ in 2..depth {
            heading_path.push(format!(
                "{} {}",
                vocab.background(rng),
                topic.tokens.choose(rng).expect("non-empty topic")
            ));
        }

        let n_facts = config.facts_per_section.sample(rng);
        let scale = typology.length_scale();
        let sampled = (config.section_tokens.sample(rng) as f64 * scale).round() as usize;
        let needed = LEAD_LEN + n_facts * (STATEMENT_LEN + 2) + 1;
        let len = sampled.max(needed);

        let mut body: Vec<Option<String>> = vec![None; len];
        for (i, t) in lead_sentence(plan, vocab, rng).into_iter().enumerate() {
            body[i] = Some(t);
        }

        let mut facts = Vec::with_capacity(n_facts);
        for _ in 0..n_facts {
            let fact = make_fact(*fact_counter, s, vocab, rng);
            *fact_counter += 1;
            let pos = place(&body, config.chunk_token_target, rng)
                .expect("section sized to hold its facts");
            for (i, t) in fact.statement.iter().enumerate() {
                body[pos + i] = Some(t.clone());
            }
            facts.push(fact);
        }

        let body = fill(body, typology, plan, topic, vocab, rng);
        sections.push(Section {
            heading_path,
            body,
            facts,
        });
    }
    Document {
        doc_id: plan.doc_id.clone(),
        typology,
        title,
        sections,
    }
}

fn lead_sentence(plan: &DocPlan, vocab: &Vocab, rng: &mut impl Rng) -> Vec<String> {
    let mut lead = Vec::with_capacity(LEAD_LEN);
    lead.push(plan.subject.choose(rng).expect("non-empty").clone());
    for _ in 0..LEAD_FOCUS {
        lead.push(plan.focus.choose(rng).expect("non-empty focus").clone());
    }
    while lead.len() < LEAD_LEN {
        lead.push(vocab.background(rng));
    }
    lead.shuffle(rng);
    lead
}

fn make_fact(n: usize, section: usize, vocab: &Vocab, rng: &mut impl Rng) -> Fact {
    // Digits make key tokens disjoint from every generated word, and the
    // counter makes them unique across the corpus.
    let key_phrase: Vec<String> = (0..KEY_PHRASE_LEN)
        .map(|j| {
            format!(
                "{}{}{}",
                pseudo_word(rng, 1),
                n * KEY_PHRASE_LEN + j,
                pseudo_word(rng, 1)
            )
        })
        .collect();
    let attr = INTENT_WORDS.choose(rng).expect("non-empty").to_string();
    let mut statement = vec![attr];
    for r in 0..KEY_REPEATS {
        statement.extend(key_phrase.iter().cloned());
        if r == 0 {
            statement.push(vocab.number(rng));
        }
    }
    statement.push(vocab.background(rng));
    debug_assert_eq!(statement.len(), STATEMENT_LEN);
    Fact {
        fact_id: format!("f{n:05}"),
        key_phrase,
        statement,
        home_section: section,
    }
}

/// Finds a free run of `STATEMENT_LEN` slots that lies inside one chunk window.
fn place(body: &[Option<String>], target: usize, rng: &mut impl Rng) -> Option<usize> {
    let fits = |p: usize| {
        p + STATEMENT_LEN <= body.len()
            && p / target == (p + STATEMENT_LEN - 1) / target
            && body[p..p + STATEMENT_LEN].iter().all(Option::is_none)
    };
    for _ in 0..64 {
        let p = rng.gen_range(LEAD_LEN..body.len());
        if fits(p) {
            return Some(p);
        }
    }
    (LEAD_LEN..body.len()).find(|&p| fits(p))
}

fn fill(
    body: Vec<Option<String>>,
    typology: Typology,
    plan: &DocPlan,
    topic: &Topic,
    vocab: &Vocab,
    rng: &mut impl Rng,
) -> Vec<String> {
    let (p_topic, p_number) = match typology {
        Typology::Normative => (0.18, 0.02),
        Typology::Technical => (0.22, 0.15),
        Typology::Transactional => (0.15, 0.30),
    };
    const P_SUBJECT: f64 = 0.003;
    body.into_iter()
        .map(|slot| {
            slot.unwrap_or_else(|| {
                let u: f64 = rng.gen();
                if u < P_SUBJECT {
                    plan.subject.choose(rng).expect("non-empty").clone()
                } else if u < P_SUBJECT + p_topic {
                    topic.tokens.choose(rng).expect("non-empty").clone()
                } else if u < P_SUBJECT + p_topic + p_number {
                    vocab.number(rng)
                } else {
                    vocab.background(rng)
                }
            })
        })
        .collect()
}

fn build_queries(
    documents: &[Document],
    plans: &[DocPlan],
    config: &CorpusConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<QuerySpec>> {
    let target = config.chunk_token_target;
    let n_specific = ((config.query_count as f64) * config.specific_fraction).round() as usize;
    let n_specific = n_specific.clamp(1, config.query_count - 1);
    let n_thematic = config.query_count - n_specific;

    // (doc index, section index, fact index)
    let mut all_facts: Vec<(usize, usize, usize)> = Vec::new();
    for (d, doc) in documents.iter().enumerate() {
        for (s, sec) in doc.sections.iter().enumerate() {
            for f in 0..sec.facts.len() {
                all_facts.push((d, s, f));
            }
        }
    }
    all_facts.shuffle(rng);

    let mut queries = Vec::with_capacity(config.query_count);
    for (d, s, f) in all_facts.into_iter().take(n_specific) {
        let doc = &documents[d];
        let section = &doc.sections[s];
        let fact = &section.facts[f];
        let pos = find_run(&section.body, &fact.statement).expect("statement present in body");
        let gold = ChunkId {
            doc_id: doc.doc_id.clone(),
            section_index: s,
            offset: (pos / target) * target,
        };
        // Intent words: the fact's attribute, then possibly the document's
        // subject, then a generic question word.
        let n_intent = rng.gen_range(1..=3);
        let mut text = vec![fact.statement[0].clone()];
        if n_intent >= 2 {
            text.push(plans[d].subject.choose(rng).expect("non-empty").clone());
        }
        if n_intent >= 3 {
            text.push(INTENT_WORDS.choose(rng).expect("non-empty").to_string());
        }
        text.extend(fact.key_phrase.iter().cloned());
        queries.push(QuerySpec {
            query_id: String::new(),
            intent: Intent::Specific,
            text,
            gold_chunk_ids: BTreeSet::from([gold.to_string()]),
            gold_doc_id: doc.doc_id.clone(),
        });
    }

    let mut doc_order: Vec<usize> = (0..documents.len()).collect();
    doc_order.shuffle(rng);
    for i in 0..n_thematic {
        let d = doc_order[i % doc_order.len()];
        let doc = &documents[d];
        let plan = &plans[d];
        let mut text: Vec<String> = vec![plan.subject.choose(rng).expect("non-empty").clone()];
        let n_topic = rng.gen_range(2..=3);
        text.extend(plan.focus.choose_multiple(rng, n_topic).cloned());
        let gold: BTreeSet<String> = chunk_document(doc, target)?
            .into_iter()
            .map(|c| c.chunk_id)
            .collect();
        queries.push(QuerySpec {
            query_id: String::new(),
            intent: Intent::Thematic,
            text,
            gold_chunk_ids: gold,
            gold_doc_id: doc.doc_id.clone(),
        });
    }

    queries.shuffle(rng);
    for (i, q) in queries.iter_mut().enumerate() {
        q.query_id = format!("q{i:04}");
    }
    Ok(queries)
}

fn find_run(haystack: &[String], needle: &[String]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Document(Document),
    Queries { count: usize },
    Query(QuerySpec),
}

/// Renders the corpus as JSON Lines: one `document` record per document,
/// then a `queries` header carrying the count, then one `query` record each.
pub fn render_corpus(documents: &[Document], queries: &[QuerySpec]) -> String {
    let mut out = String::new();
    let mut push = |r: &Record| {
        out.push_str(&serde_json::to_string(r).expect("corpus record serializes"));
        out.push('\n');
    };
    for d in documents {
        push(&Record::Document(d.clone()));
    }
    push(&Record::Queries {
        count: queries.len(),
    });
    for q in queries {
        push(&Record::Query(q.clone()));
    }
    out
}

pub fn parse_corpus(text: &str) -> Result<(Vec<Document>, Vec<QuerySpec>)> {
    let mut documents = Vec::new();
    let mut queries = Vec::new();
    let mut expected: Option<usize> = None;
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        let err = |reason: &str| Error::Parse {
            line: line_no,
            reason: reason.to_owned(),
        };
        match (record, expected) {
            (Record::Document(d), None) => documents.push(d),
            (Record::Document(_), Some(_)) => return Err(err("document record after query block")),
            (Record::Queries { count }, None) => expected = Some(count),
            (Record::Queries { .. }, Some(_)) => return Err(err("duplicate query block")),
            (Record::Query(_), None) => return Err(err("query record before query block header")),
            (Record::Query(q), Some(n)) => {
                if queries.len() == n {
                    return Err(err("more query records than declared"));
                }
                queries.push(q);
            }
        }
    }
    match expected {
        None => Err(Error::Parse {
            line: last_line + 1,
            reason: "missing query block".into(),
        }),
        Some(n) if n != queries.len() => Err(Error::Parse {
            line: last_line + 1,
            reason: format!("truncated: expected {n} queries, found {}", queries.len()),
        }),
        Some(_) => Ok((documents, queries)),
    }
}

pub fn serialize_corpus(documents: &[Document], queries: &[QuerySpec], path: &Path) -> Result<()> {
    io_util::write_atomic(path, render_corpus(documents, queries).as_bytes())
}

pub fn deserialize_corpus(path: &Path) -> Result<(Vec<Document>, Vec<QuerySpec>)> {
    parse_corpus(&io_util::read_to_string(path)?)
}
