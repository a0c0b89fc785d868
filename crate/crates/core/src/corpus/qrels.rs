use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, Query};
use crate::error::{Error, Result};
use crate::lexical::{Analyzer, Bm25Params, InvertedIndex};

/// How relevant documents are derived from a generating paper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QrelMode {
    /// Documents the paper cites.
    CitationsOnly,
    /// Cited documents plus the BM25 top-`depth` for the unprocessed title.
    Union,
}

/// Binary relevance judgments, query id to relevant doc ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrelSet(pub BTreeMap<String, BTreeSet<String>>);

impl QrelSet {
    pub fn get(&self, query_id: &str) -> Option<&BTreeSet<String>> {
        self.0.get(query_id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn insert(&mut self, query_id: impl Into<String>, docs: BTreeSet<String>) {
        self.0.insert(query_id.into(), docs);
    }
}

/// Builds relevance judgments for queries generated from papers.
///
/// Only documents published strictly before the query year are eligible, which
/// is exactly the pool the first stage searches for that query. The
/// generating paper never judges itself. Queries that end up with no relevant
/// document are left out; their ids are returned.
pub fn build_qrels(
    corpus: &Corpus,
    index: &InvertedIndex,
    params: Bm25Params,
    analyzer: Analyzer,
    queries: &[Query],
    mode: QrelMode,
    depth: usize,
) -> (QrelSet, Vec<String>) {
    let judged = crate::par::map(queries, |q| {
        let Some(src) = q.source_doc_id.as_deref().and_then(|id| corpus.ordinal(id)) else {
            return BTreeSet::new();
        };
        let eligible = |o: usize| o != src && corpus.get(o).year < q.year;
        let mut rel: BTreeSet<String> = corpus
            .reference_ordinals(src)
            .into_iter()
            .filter(|&o| eligible(o))
            .map(|o| corpus.get(o).doc_id.clone())
            .collect();
        if mode == QrelMode::Union {
            let tokens = analyzer.analyze(&corpus.get(src).title);
            for (o, _) in index.retrieve_topk_filtered(params, &tokens, depth, eligible) {
                rel.insert(corpus.get(o).doc_id.clone());
            }
        }
        rel
    });
    let mut set = QrelSet::default();
    let mut dropped = Vec::new();
    for (q, rel) in queries.iter().zip(judged) {
        if rel.is_empty() {
            log::debug!("query {} has no relevant documents, dropped", q.query_id);
            dropped.push(q.query_id.clone());
        } else {
            set.insert(q.query_id.clone(), rel);
        }
    }
    (set, dropped)
}

/// TREC qrels: `query_id 0 doc_id relevance`.
pub fn write_qrels(path: impl AsRef<Path>, qrels: &QrelSet) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for (q, docs) in &qrels.0 {
        for d in docs {
            writeln!(w, "{q} 0 {d} 1").map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_qrels(path: impl AsRef<Path>) -> Result<QrelSet> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut set = QrelSet::default();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != 4 {
            return Err(Error::parse(path, i + 1, "expected `query_id 0 doc_id relevance`"));
        }
        match cols[3] {
            "1" => {
                set.0.entry(cols[0].to_string()).or_default().insert(cols[2].to_string());
            }
            "0" => {}
            other => return Err(Error::parse(path, i + 1, format!("relevance must be 0 or 1, got {other}"))),
        }
    }
    Ok(set)
}
