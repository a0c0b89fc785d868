use std::collections::HashMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

use super::Analyzer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Term -> postings sorted by document ordinal, plus document lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    pub(super) term_ids: HashMap<String, u32>,
    /// Terms in lexicographic order; a term's id is its position here.
    pub(super) terms: Vec<String>,
    pub(super) postings: Vec<Vec<Posting>>,
    pub(super) doc_lens: Vec<u32>,
    pub(super) avg_doc_len: f64,
}

const BUILD_CHUNK: usize = 2048;

impl InvertedIndex {
    /// Indexes title + abstract of every document, ordinals in corpus order.
    pub fn build(corpus: &Corpus, analyzer: Analyzer) -> Result<Self> {
        let docs = crate::par::map(corpus.docs(), |d| analyzer.analyze(&d.text()));
        Self::from_token_lists(&docs)
    }

    pub fn from_token_lists(docs: &[Vec<String>]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Data("cannot index an empty corpus".into()));
        }
        // Chunk-local postings, merged in chunk order so lists stay sorted.
        let partials = crate::par::map_range(docs.len().div_ceil(BUILD_CHUNK), |c| {
            let start = c * BUILD_CHUNK;
            let end = (start + BUILD_CHUNK).min(docs.len());
            let mut local: HashMap<&str, Vec<Posting>> = HashMap::new();
            for (o, toks) in docs[start..end].iter().enumerate() {
                let mut tf: HashMap<&str, u32> = HashMap::new();
                for t in toks {
                    *tf.entry(t.as_str()).or_default() += 1;
                }
                for (t, n) in tf {
                    local.entry(t).or_default().push(Posting {
                        doc: (start + o) as u32,
                        tf: n,
                    });
                }
            }
            for list in local.values_mut() {
                list.sort_unstable_by_key(|p| p.doc);
            }
            local
        });
        let mut merged: HashMap<&str, Vec<Posting>> = HashMap::new();
        for part in partials {
            for (t, list) in part {
                merged.entry(t).or_default().extend(list);
            }
        }
        let mut terms: Vec<String> = merged.keys().map(|t| t.to_string()).collect();
        terms.sort_unstable();
        let postings = terms.iter().map(|t| merged.remove(t.as_str()).unwrap()).collect();
        let doc_lens: Vec<u32> = docs.iter().map(|d| d.len() as u32).collect();
        Ok(Self::from_parts(terms, postings, doc_lens))
    }

    pub(super) fn from_parts(terms: Vec<String>, postings: Vec<Vec<Posting>>, doc_lens: Vec<u32>) -> Self {
        let total: u64 = doc_lens.iter().map(|&l| l as u64).sum();
        let avg_doc_len = total as f64 / doc_lens.len() as f64;
        let term_ids = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        InvertedIndex {
            term_ids,
            terms,
            postings,
            doc_lens,
            avg_doc_len,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_lens.len()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn doc_len(&self, ordinal: usize) -> u32 {
        self.doc_lens[ordinal]
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn postings(&self, term: &str) -> Option<&[Posting]> {
        self.term_ids.get(term).map(|&id| self.postings[id as usize].as_slice())
    }

    /// Document frequency; 0 for unknown terms.
    pub fn df(&self, term: &str) -> usize {
        self.postings(term).map_or(0, |p| p.len())
    }

    pub fn tf(&self, term: &str, ordinal: usize) -> u32 {
        self.postings(term)
            .and_then(|p| p.binary_search_by_key(&(ordinal as u32), |x| x.doc).ok().map(|i| p[i].tf))
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(docs: &[&str]) -> Vec<Vec<String>> {
        docs.iter().map(|d| crate::lexical::tokenize(d)).collect()
    }

    #[test]
    fn single_document_counts() {
        let idx = InvertedIndex::from_token_lists(&toks(&["x x y"])).unwrap();
        assert_eq!(idx.postings("x").unwrap(), &[Posting { doc: 0, tf: 2 }]);
        assert_eq!(idx.postings("y").unwrap(), &[Posting { doc: 0, tf: 1 }]);
        assert_eq!(idx.avg_doc_len(), 3.0);
    }

    #[test]
    fn identical_documents_get_identical_postings() {
        let idx = InvertedIndex::from_token_lists(&toks(&["a b a", "a b a"])).unwrap();
        let p = idx.postings("a").unwrap();
        assert_eq!(p, &[Posting { doc: 0, tf: 2 }, Posting { doc: 1, tf: 2 }]);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(InvertedIndex::from_token_lists(&[]).is_err());
    }

    #[test]
    fn invariants_hold_across_chunks() {
        let docs: Vec<Vec<String>> = (0..5000).map(|i| vec![format!("t{}", i % 7), format!("u{}", i % 13), "all".into()]).collect();
        let idx = InvertedIndex::from_token_lists(&docs).unwrap();
        assert_eq!(idx.df("all"), 5000);
        for t in idx.terms() {
            let p = idx.postings(t).unwrap();
            assert!(p.windows(2).all(|w| w[0].doc < w[1].doc));
        }
        assert_eq!(idx.avg_doc_len(), 3.0);
    }
}
