use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::QrelSet;

pub fn map_at_k<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<String>, k: usize) -> f64 {
    let denom = relevant.len().min(k);
    if denom == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, d) in ranking.iter().take(k).enumerate() {
        if relevant.contains(d.as_ref()) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / denom as f64
}

pub fn mrr_at_k<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<String>, k: usize) -> f64 {
    ranking
        .iter()
        .take(k)
        .position(|d| relevant.contains(d.as_ref()))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

pub fn ndcg_at_k<S: AsRef<str>>(ranking: &[S], relevant: &BTreeSet<String>, k: usize) -> f64 {
    let disc = |i: usize| 1.0 / ((i + 2) as f64).log2();
    let ideal: f64 = (0..relevant.len().min(k)).map(disc).sum();
    if ideal == 0.0 {
        return 0.0;
    }
    let dcg: f64 = ranking
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, d)| relevant.contains(d.as_ref()))
        .map(|(i, _)| disc(i))
        .sum();
    dcg / ideal
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricCutoffs {
    pub map: usize,
    pub mrr: usize,
    pub ndcg: usize,
}

impl Default for MetricCutoffs {
    fn default() -> Self {
        MetricCutoffs {
            map: 100,
            mrr: 10,
            ndcg: 10,
        }
    }
}

/// Per-query metrics over the queries that have judgments.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub query_ids: Vec<String>,
    pub map: Vec<f64>,
    pub mrr: Vec<f64>,
    pub ndcg: Vec<f64>,
    /// Queries without relevant documents, left out of the means.
    pub excluded: usize,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

impl QueryMetrics {
    pub fn mean_map(&self) -> f64 {
        mean(&self.map)
    }

    pub fn mean_mrr(&self) -> f64 {
        mean(&self.mrr)
    }

    pub fn mean_ndcg(&self) -> f64 {
        mean(&self.ndcg)
    }
}

/// Scores the rankings of `query_ids` (in that order). A query missing from
/// `rankings` ranks nothing and scores 0.
pub fn evaluate<'a, F>(query_ids: &[String], qrels: &QrelSet, cut: MetricCutoffs, ranking_of: F) -> QueryMetrics
where
    F: Fn(&str) -> Option<Vec<&'a str>>,
{
    let mut out = QueryMetrics::default();
    for q in query_ids {
        let rel = match qrels.get(q) {
            Some(r) if !r.is_empty() => r,
            _ => {
                out.excluded += 1;
                continue;
            }
        };
        let ranking = ranking_of(q).unwrap_or_default();
        out.query_ids.push(q.clone());
        out.map.push(map_at_k(&ranking, rel, cut.map));
        out.mrr.push(mrr_at_k(&ranking, rel, cut.mrr));
        out.ndcg.push(ndcg_at_k(&ranking, rel, cut.ndcg));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_single() {
        let r = rel(&["a"]);
        assert_eq!(map_at_k(&["a", "b"], &r, 100), 1.0);
        assert_eq!(mrr_at_k(&["a", "b"], &r, 10), 1.0);
        assert_eq!(ndcg_at_k(&["a", "b"], &r, 10), 1.0);
    }

    #[test]
    fn cutoffs_and_discounts() {
        let ranking: Vec<String> = (0..20).map(|i| format!("d{i}")).collect();
        assert_eq!(mrr_at_k(&ranking, &rel(&["d10"]), 10), 0.0);
        assert!((ndcg_at_k(&ranking, &rel(&["d1"]), 10) - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert!((ndcg_at_k(&ranking, &rel(&["d1"]), 10) - 0.63093).abs() < 1e-5);
        // hits at 1 and 3 out of 2 relevant: (1 + 2/3) / 2
        assert!((map_at_k(&ranking, &rel(&["d0", "d2"]), 100) - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_judgments_are_excluded() {
        let mut q = QrelSet::default();
        q.insert("q1", rel(&["a"]));
        q.insert("q2", BTreeSet::new());
        let ids = vec!["q1".to_string(), "q2".to_string(), "q3".to_string()];
        let m = evaluate(&ids, &q, MetricCutoffs::default(), |_| Some(vec!["a"]));
        assert_eq!(m.excluded, 2);
        assert_eq!(m.map, vec![1.0]);
    }
}
