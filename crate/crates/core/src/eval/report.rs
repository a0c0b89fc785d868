use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{MetricCutoffs, QueryMetrics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemResult {
    pub name: String,
    pub metrics: QueryMetrics,
}

/// Paired comparison of MAP between two systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub system: String,
    pub baseline: String,
    pub map_difference: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub cutoffs: MetricCutoffs,
    pub systems: Vec<SystemResult>,
    pub comparisons: Vec<Comparison>,
}

impl MetricReport {
    pub fn system(&self, name: &str) -> Option<&QueryMetrics> {
        self.systems.iter().find(|s| s.name == name).map(|s| &s.metrics)
    }

    pub fn to_table(&self) -> String {
        let c = self.cutoffs;
        let mut s = metric_table(
            "system",
            self.systems.iter().map(|r| (r.name.as_str(), &r.metrics)),
            c,
        );
        if let Some(first) = self.systems.first() {
            let _ = writeln!(
                s,
                "\n{} judged queries, {} without judgments excluded",
                first.metrics.map.len(),
                first.metrics.excluded
            );
        }
        if !self.comparisons.is_empty() {
            let _ = writeln!(s, "\n{:<14} {:<14} {:>10} {:>10}", "system", "baseline", "dMAP", "p");
            for cmp in &self.comparisons {
                let _ = writeln!(
                    s,
                    "{:<14} {:<14} {:>+10.4} {:>10.4}",
                    cmp.system, cmp.baseline, cmp.map_difference, cmp.p_value
                );
            }
        }
        s
    }

    /// `key=value` lines for scripts.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for r in &self.systems {
            let m = &r.metrics;
            let _ = writeln!(s, "{}.map@{}={:.6}", r.name, self.cutoffs.map, m.mean_map());
            let _ = writeln!(s, "{}.mrr@{}={:.6}", r.name, self.cutoffs.mrr, m.mean_mrr());
            let _ = writeln!(s, "{}.ndcg@{}={:.6}", r.name, self.cutoffs.ndcg, m.mean_ndcg());
            let _ = writeln!(s, "{}.queries={}", r.name, m.map.len());
        }
        for c in &self.comparisons {
            let _ = writeln!(s, "p.{}.vs.{}={:.6}", c.system, c.baseline, c.p_value);
        }
        s
    }
}

/// Aligned MAP/MRR/NDCG table, one row per entry in the given order.
pub fn metric_table<'a>(
    header: &str,
    rows: impl IntoIterator<Item = (&'a str, &'a QueryMetrics)>,
    c: MetricCutoffs,
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>9} {:>9} {:>9}",
        header,
        format!("MAP@{}", c.map),
        format!("MRR@{}", c.mrr),
        format!("NDCG@{}", c.ndcg)
    );
    for (name, m) in rows {
        let _ = writeln!(s, "{:<16} {:>9.4} {:>9.4} {:>9.4}", name, m.mean_map(), m.mean_mrr(), m.mean_ndcg());
    }
    s
}

/// Ablation rows in the order given (conventionally Only User, + Venue,
/// + Affiliation) followed by the reference row.
pub fn ablation_table(rows: &[(String, QueryMetrics)], reference: Option<(&str, &QueryMetrics)>, c: MetricCutoffs) -> String {
    let mut s = metric_table("configuration", rows.iter().map(|(n, m)| (n.as_str(), m)), c);
    if let Some((name, m)) = reference {
        let _ = writeln!(s, "{:<16} {:>9.4} {:>9.4} {:>9.4}", name, m.mean_map(), m.mean_mrr(), m.mean_ndcg());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qm(v: f64) -> QueryMetrics {
        QueryMetrics {
            query_ids: vec!["q".into()],
            map: vec![v],
            mrr: vec![v],
            ndcg: vec![v],
            excluded: 0,
        }
    }

    #[test]
    fn ablation_rows_keep_order() {
        let rows = vec![("Only User".to_string(), qm(0.1)), ("+ Venue".to_string(), qm(0.2)), ("+ Affiliation".to_string(), qm(0.2))];
        let t = ablation_table(&rows, Some(("no KG", &qm(0.05))), MetricCutoffs::default());
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("Only User") && lines[2].starts_with("+ Venue") && lines[3].starts_with("+ Affiliation"));
        assert_eq!(lines[2][16..], lines[3][16..]);
    }

    #[test]
    fn kv_lines() {
        let r = MetricReport {
            systems: vec![SystemResult { name: "BM25".into(), metrics: qm(0.5) }],
            ..Default::default()
        };
        assert!(r.to_kv().contains("BM25.map@100=0.500000"));
        assert!(r.to_table().contains("BM25"));
    }
}
