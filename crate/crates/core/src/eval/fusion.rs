use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(s - min) / (max - min)`; a constant list maps to zeros.
pub fn minmax_normalize(scores: &[f64]) -> Vec<f64> {
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if !(hi > lo) {
        return vec![0.0; scores.len()];
    }
    let span = hi - lo;
    scores.iter().map(|s| (s - lo) / span).collect()
}

/// Convex weights of the lexical, dense and user channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub bm25: f64,
    pub dense: f64,
    pub user: f64,
}

impl Lambdas {
    pub fn new(bm25: f64, dense: f64, user: f64) -> Result<Self> {
        let l = Lambdas { bm25, dense, user };
        l.check()?;
        Ok(l)
    }

    pub fn check(&self) -> Result<()> {
        let parts = [self.bm25, self.dense, self.user];
        if parts.iter().any(|&x| !(x >= 0.0)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "lambdas must be nonnegative and sum to 1, got ({}, {}, {})",
                self.bm25, self.dense, self.user
            )));
        }
        Ok(())
    }

    pub const BM25: Lambdas = Lambdas { bm25: 1.0, dense: 0.0, user: 0.0 };
    pub const DENSE: Lambdas = Lambdas { bm25: 0.0, dense: 1.0, user: 0.0 };
    pub const USER: Lambdas = Lambdas { bm25: 0.0, dense: 0.0, user: 1.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub doc_id: String,
    pub bm25: f64,
    pub dense: f64,
    pub user: f64,
}

/// First-stage candidates of one query, in BM25 rank order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateList {
    pub query_id: String,
    pub candidates: Vec<Candidate>,
}

/// Candidate list with each channel min-max normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedList {
    pub query_id: String,
    pub doc_ids: Vec<String>,
    pub bm25: Vec<f64>,
    pub dense: Vec<f64>,
    pub user: Vec<f64>,
}

impl NormalizedList {
    pub fn new(list: &CandidateList) -> Self {
        let col = |f: fn(&Candidate) -> f64| minmax_normalize(&list.candidates.iter().map(f).collect::<Vec<_>>());
        NormalizedList {
            query_id: list.query_id.clone(),
            doc_ids: list.candidates.iter().map(|c| c.doc_id.clone()).collect(),
            bm25: col(|c| c.bm25),
            dense: col(|c| c.dense),
            user: col(|c| c.user),
        }
    }

    pub fn fused_scores(&self, l: &Lambdas) -> Vec<f64> {
        (0..self.doc_ids.len())
            .map(|i| l.bm25 * self.bm25[i] + l.dense * self.dense[i] + l.user * self.user[i])
            .collect()
    }

    /// Indices into the list, by fused score descending then doc id.
    pub fn ranking(&self, l: &Lambdas) -> Vec<(usize, f64)> {
        let s = self.fused_scores(l);
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then_with(|| self.doc_ids[a].cmp(&self.doc_ids[b])));
        idx.into_iter().map(|i| (i, s[i])).collect()
    }

    pub fn ranked_ids(&self, l: &Lambdas) -> Vec<&str> {
        self.ranking(l).into_iter().map(|(i, _)| self.doc_ids[i].as_str()).collect()
    }
}

/// Fused ranking `(doc_id, score)` of one candidate list.
pub fn fuse(l: &Lambdas, list: &CandidateList) -> Result<Vec<(String, f64)>> {
    l.check()?;
    let n = NormalizedList::new(list);
    Ok(n.ranking(l).into_iter().map(|(i, s)| (n.doc_ids[i].clone(), s)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(minmax_normalize(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_normalize(&[5.0; 3]), vec![0.0; 3]);
        assert!(minmax_normalize(&[]).is_empty());
    }

    #[test]
    fn lambdas_are_checked() {
        assert!(Lambdas::new(0.5, 0.5, 0.0).is_ok());
        assert!(matches!(Lambdas::new(0.5, 0.6, 0.0), Err(Error::Contract(_))));
        assert!(Lambdas::new(-0.1, 1.1, 0.0).is_err());
        let bad = Lambdas { bm25: 1.0, dense: 1.0, user: 0.0 };
        let list = CandidateList { query_id: "q".into(), candidates: vec![] };
        assert!(fuse(&bad, &list).is_err());
    }

    #[test]
    fn hand_computed_weighted_sums() {
        let raw = [(4.0, 0.1, 0.0), (2.0, 0.5, 1.0), (0.0, 0.3, 0.5), (3.0, 0.9, 0.25), (1.0, 0.2, 0.75)];
        let list = CandidateList {
            query_id: "q".into(),
            candidates: raw
                .iter()
                .enumerate()
                .map(|(i, &(b, d, u))| Candidate {
                    doc_id: format!("d{i}"),
                    bm25: b,
                    dense: d,
                    user: u,
                })
                .collect(),
        };
        // normalized: bm25 /4, dense (x-0.1)/0.8, user as is
        let expect: Vec<f64> = raw
            .iter()
            .map(|&(b, d, u)| 0.4 * (b / 4.0) + 0.4 * ((d - 0.1) / 0.8) + 0.2 * u)
            .collect();
        let l = Lambdas::new(0.4, 0.4, 0.2).unwrap();
        let fused = fuse(&l, &list).unwrap();
        for (id, s) in &fused {
            let i: usize = id[1..].parse().unwrap();
            assert!((s - expect[i]).abs() < 1e-12);
        }
        assert!(fused.windows(2).all(|w| w[0].1 >= w[1].1));
        let ids: Vec<String> = fuse(&Lambdas::BM25, &list).unwrap().into_iter().map(|x| x.0).collect();
        assert_eq!(ids, vec!["d0", "d3", "d1", "d4", "d2"]);
    }
}
