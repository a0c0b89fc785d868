//! Academic corpus model, line-delimited JSON ingestion, query generation,
//! relevance judgments and chronological splitting.

mod qrels;
mod query;
mod split;
pub mod synth;

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use qrels::{build_qrels, read_qrels, write_qrels, QrelMode, QrelSet};
pub use query::{is_stopword, make_queries, make_query, read_queries, stem, write_queries, Query, STOPWORDS};
pub use split::{chronological_split, percentile_year, Split, SplitSpec};
pub use synth::{generate_synthetic, SynthConfig, SynthOutput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub author_ids: Vec<String>,
    #[serde(default)]
    pub venue_id: Option<String>,
    pub year: i32,
    #[serde(default)]
    pub references: Vec<String>,
}

impl Document {
    /// Title and abstract joined, which is what both the lexical index and the
    /// dense encoder see.
    pub fn text(&self) -> String {
        format!("{} {}", self.title, self.abstract_text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Author {
    pub author_id: String,
    pub affiliation_id: Option<String>,
}

// Accepts either a single affiliation or a list; only the first listed one
// is kept.
impl<'de> Deserialize<'de> for Author {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Aff {
            One(String),
            Many(Vec<String>),
        }
        #[derive(Deserialize)]
        struct Raw {
            author_id: String,
            #[serde(default)]
            affiliation_id: Option<Aff>,
        }
        let raw = Raw::deserialize(d)?;
        let affiliation_id = match raw.affiliation_id {
            Some(Aff::One(a)) => Some(a),
            Some(Aff::Many(v)) => v.into_iter().next(),
            None => None,
        };
        Ok(Author {
            author_id: raw.author_id,
            affiliation_id,
        })
    }
}

/// Documents in file order. A document's position is its ordinal everywhere
/// downstream (index postings, embedding rows, graph nodes).
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

/// What ingestion had to repair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub documents: usize,
    pub self_references_dropped: usize,
    pub dangling_references_dropped: usize,
}

impl Corpus {
    /// Builds a corpus, enforcing unique ids and cleaning references.
    pub fn new(mut docs: Vec<Document>) -> Result<(Self, LoadReport)> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if by_id.insert(d.doc_id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate doc_id {}", d.doc_id)));
            }
        }
        let mut report = LoadReport {
            documents: docs.len(),
            ..Default::default()
        };
        for d in docs.iter_mut() {
            let mut seen = HashSet::new();
            let own = d.doc_id.clone();
            d.references.retain(|r| {
                if *r == own {
                    report.self_references_dropped += 1;
                    false
                } else if !by_id.contains_key(r) {
                    report.dangling_references_dropped += 1;
                    false
                } else {
                    seen.insert(r.clone())
                }
            });
        }
        Ok((Corpus { docs, by_id }, report))
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn get(&self, ordinal: usize) -> &Document {
        &self.docs[ordinal]
    }

    pub fn ordinal(&self, doc_id: &str) -> Option<usize> {
        self.by_id.get(doc_id).copied()
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = self.docs.iter().map(|d| d.year).min()?;
        let max = self.docs.iter().map(|d| d.year).max()?;
        Some((min, max))
    }

    /// Ordinals of documents that reference `ordinal`, or an empty list.
    pub fn reference_ordinals(&self, ordinal: usize) -> Vec<usize> {
        self.docs[ordinal]
            .references
            .iter()
            .filter_map(|r| self.ordinal(r))
            .collect()
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads a corpus file (one JSON document record per line).
pub fn load_corpus(path: impl AsRef<Path>) -> Result<(Corpus, LoadReport)> {
    let path = path.as_ref();
    let docs: Vec<Document> = read_jsonl(path)?;
    Corpus::new(docs).map_err(|e| match e {
        Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn save_corpus(path: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    write_jsonl(path.as_ref(), corpus.docs())
}

pub fn load_authors(path: impl AsRef<Path>) -> Result<Vec<Author>> {
    let path = path.as_ref();
    let authors: Vec<Author> = read_jsonl(path)?;
    let mut seen = HashSet::new();
    for a in &authors {
        if !seen.insert(a.author_id.as_str()) {
            return Err(Error::Data(format!("{}: duplicate author_id {}", path.display(), a.author_id)));
        }
    }
    Ok(authors)
}

pub fn save_authors(path: impl AsRef<Path>, authors: &[Author]) -> Result<()> {
    write_jsonl(path.as_ref(), authors)
}
