use std::collections::HashMap;

use park_core::corpus::{build_qrels, chronological_split, generate_synthetic, make_queries, QrelMode, SplitSpec, SynthConfig};
use park_core::lexical::{Analyzer, Bm25Params, InvertedIndex};

fn corpus_5k() -> park_core::corpus::SynthOutput {
    let cfg = SynthConfig {
        n_docs: 5_000,
        n_authors: 500,
        ..Default::default()
    };
    generate_synthetic(&cfg, 17).unwrap()
}

struct Counts<'a> {
    per_doc: Vec<HashMap<&'a str, f64>>,
    df: HashMap<&'a str, f64>,
    avg_len: f64,
}

fn count(docs: &[Vec<String>]) -> Counts<'_> {
    let per_doc: Vec<HashMap<&str, f64>> = docs
        .iter()
        .map(|d| {
            let mut m = HashMap::new();
            for t in d {
                *m.entry(t.as_str()).or_insert(0.0) += 1.0;
            }
            m
        })
        .collect();
    let mut df = HashMap::new();
    for m in &per_doc {
        for t in m.keys() {
            *df.entry(*t).or_insert(0.0) += 1.0;
        }
    }
    let avg_len = docs.iter().map(|d| d.len() as f64).sum::<f64>() / docs.len() as f64;
    Counts { per_doc, df, avg_len }
}

/// Scores every document from raw token counts and sorts them all.
fn exhaustive(docs: &[Vec<String>], c: &Counts, query: &[String], p: Bm25Params) -> Vec<(usize, f64)> {
    let n = docs.len() as f64;
    let (counts, avg) = (&c.per_doc, c.avg_len);
    let df = |t: &str| c.df.get(t).copied().unwrap_or(0.0);
    let idf: Vec<f64> = query.iter().map(|t| (1.0 + (n - df(t) + 0.5) / (df(t) + 0.5)).ln()).collect();
    let mut all: Vec<(usize, f64)> = (0..docs.len())
        .map(|o| {
            let len = docs[o].len() as f64;
            let mut s = 0.0;
            for (t, w) in query.iter().zip(&idf) {
                let tf = counts[o].get(t.as_str()).copied().unwrap_or(0.0);
                if tf > 0.0 {
                    s += w * tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * len / avg));
                }
            }
            (o, s)
        })
        .filter(|&(_, s)| s > 0.0)
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all
}

#[test]
fn topk_equals_exhaustive_scoring_on_5k_documents() {
    let out = corpus_5k();
    let analyzer = Analyzer::default();
    let docs: Vec<Vec<String>> = out.corpus.docs().iter().map(|d| analyzer.analyze(&d.text())).collect();
    let index = InvertedIndex::from_token_lists(&docs).unwrap();
    let counts = count(&docs);
    let p = Bm25Params::default();
    let ordinals: Vec<usize> = (0..out.corpus.len()).step_by(25).collect();
    let (queries, _) = make_queries(&out.corpus, &ordinals, |_| true);
    assert!(queries.len() >= 195);
    for q in queries.iter().take(200) {
        let tokens = analyzer.analyze(&q.text);
        let fast = index.retrieve_topk(p, &tokens, 100);
        let slow = exhaustive(&docs, &counts, &tokens, p);
        assert_eq!(fast.len(), slow.len().min(100), "query {}", q.query_id);
        for (a, b) in fast.iter().zip(&slow) {
            assert_eq!(a.0, b.0, "query {}", q.query_id);
            assert!((a.1 - b.1).abs() < 1e-12);
        }
    }
}

#[test]
fn generation_and_splitting_are_pure_functions_of_the_seed() {
    let cfg = SynthConfig {
        n_docs: 1_500,
        n_authors: 150,
        ..Default::default()
    };
    let a = generate_synthetic(&cfg, 5).unwrap();
    let b = generate_synthetic(&cfg, 5).unwrap();
    assert_eq!(a.corpus.docs(), b.corpus.docs());
    assert_eq!(a.authors, b.authors);
    assert_ne!(generate_synthetic(&cfg, 6).unwrap().corpus.docs(), a.corpus.docs());
    let spec = SplitSpec { cutoff_year: 2016 };
    assert_eq!(chronological_split(&a.corpus, spec).unwrap(), chronological_split(&b.corpus, spec).unwrap());
}

#[test]
fn test_judgments_only_name_retrievable_documents() {
    let out = corpus_5k();
    let analyzer = Analyzer::default();
    let index = InvertedIndex::build(&out.corpus, analyzer).unwrap();
    let split = chronological_split(&out.corpus, SplitSpec { cutoff_year: 2017 }).unwrap();
    let (queries, _) = make_queries(&out.corpus, &split.test, |_| true);
    for mode in [QrelMode::CitationsOnly, QrelMode::Union] {
        let (qrels, _) = build_qrels(&out.corpus, &index, Bm25Params::default(), analyzer, &queries, mode, 50);
        assert!(!qrels.is_empty());
        for q in &queries {
            for d in qrels.get(&q.query_id).into_iter().flatten() {
                let o = out.corpus.ordinal(d).unwrap();
                assert!(out.corpus.get(o).year < q.year, "{} judges a document from year {}", q.query_id, out.corpus.get(o).year);
            }
        }
    }
}
