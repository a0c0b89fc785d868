use serde::{Deserialize, Serialize};

use super::InvertedIndex;
use crate::error::{Error, Result};

/// Okapi BM25 parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 0.9, b: 0.4 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0) || !(0.0..=1.0).contains(&self.b) {
            return Err(Error::Config(format!("bm25 needs k1 > 0 and b in [0, 1], got k1={} b={}", self.k1, self.b)));
        }
        Ok(())
    }

    /// Non-negative idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
    pub fn idf(n_docs: usize, df: usize) -> f64 {
        let (n, df) = (n_docs as f64, df as f64);
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Contribution of one query term occurrence to a document's score.
    #[inline]
    pub fn term_weight(&self, idf: f64, tf: u32, doc_len: u32, avg_doc_len: f64) -> f64 {
        let tf = tf as f64;
        let norm = self.k1 * (1.0 - self.b + self.b * doc_len as f64 / avg_doc_len);
        idf * tf * (self.k1 + 1.0) / (tf + norm)
    }
}

impl InvertedIndex {
    /// BM25 score of one document. Every query token occurrence contributes,
    /// so a repeated query term counts twice.
    pub fn bm25_score(&self, params: Bm25Params, query: &[String], ordinal: usize) -> f64 {
        let n = self.doc_count();
        let len = self.doc_lens[ordinal];
        let mut score = 0.0;
        for t in query {
            let tf = self.tf(t, ordinal);
            if tf > 0 {
                score += params.term_weight(Bm25Params::idf(n, self.df(t)), tf, len, self.avg_doc_len);
            }
        }
        score
    }

    /// Top-`k` documents by BM25, descending, ties by ascending ordinal. Only
    /// positive scores are returned.
    pub fn retrieve_topk(&self, params: Bm25Params, query: &[String], k: usize) -> Vec<(usize, f64)> {
        self.retrieve_topk_filtered(params, query, k, |_| true)
    }

    /// As [`retrieve_topk`](Self::retrieve_topk), restricted to ordinals the
    /// filter accepts.
    pub fn retrieve_topk_filtered(
        &self,
        params: Bm25Params,
        query: &[String],
        k: usize,
        filter: impl Fn(usize) -> bool,
    ) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        let n = self.doc_count();
        let mut acc = vec![0.0f64; n];
        let mut touched: Vec<u32> = Vec::new();
        // term-at-a-time; per document the additions happen in query-token
        // order, the same order bm25_score uses
        for t in query {
            let Some(&id) = self.term_ids.get(t.as_str()) else { continue };
            let plist = &self.postings[id as usize];
            let idf = Bm25Params::idf(n, plist.len());
            for p in plist {
                let d = p.doc as usize;
                if acc[d] == 0.0 {
                    touched.push(p.doc);
                }
                acc[d] += params.term_weight(idf, p.tf, self.doc_lens[d], self.avg_doc_len);
            }
        }
        let mut hits: Vec<(usize, f64)> = touched
            .into_iter()
            .map(|d| (d as usize, acc[d as usize]))
            .filter(|&(d, s)| s > 0.0 && filter(d))
            .collect();
        let cmp = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
        if hits.len() > k {
            hits.select_nth_unstable_by(k - 1, cmp);
            hits.truncate(k);
        }
        hits.sort_unstable_by(cmp);
        hits
    }
}
