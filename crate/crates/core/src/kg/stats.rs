use std::fmt::Write;

use serde::Serialize;

use super::{EntityCatalog, EntityKind, RelationType, Triple};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DegreeSummary {
    pub min: usize,
    pub median: usize,
    pub max: usize,
    pub mean: f64,
    pub isolated: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KgStats {
    pub triples: usize,
    /// Indexed by [`RelationType::index`].
    pub per_relation: [usize; 5],
    /// Entity counts in [`EntityKind::ALL`] order.
    pub per_kind: [usize; 4],
    /// Total degree (as head or tail) per entity kind.
    pub degrees: [DegreeSummary; 4],
}

pub fn kg_stats(triples: &[Triple], catalog: &EntityCatalog) -> KgStats {
    let mut degree = vec![0usize; catalog.len()];
    let mut per_relation = [0; 5];
    for t in triples {
        per_relation[t.relation.index()] += 1;
        degree[t.head as usize] += 1;
        degree[t.tail as usize] += 1;
    }
    let mut per_kind = [0; 4];
    let mut degrees = [DegreeSummary::default(); 4];
    for (i, kind) in EntityKind::ALL.into_iter().enumerate() {
        let mut d: Vec<usize> = degree[catalog.range(kind)].to_vec();
        per_kind[i] = d.len();
        if d.is_empty() {
            continue;
        }
        d.sort_unstable();
        degrees[i] = DegreeSummary {
            min: d[0],
            median: d[d.len() / 2],
            max: d[d.len() - 1],
            mean: d.iter().sum::<usize>() as f64 / d.len() as f64,
            isolated: d.iter().filter(|&&x| x == 0).count(),
        };
    }
    KgStats {
        triples: triples.len(),
        per_relation,
        per_kind,
        degrees,
    }
}

impl KgStats {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {:>10}", "relation", "triples");
        for r in RelationType::ALL {
            let _ = writeln!(s, "{:<12} {:>10}", r.name(), self.per_relation[r.index()]);
        }
        let _ = writeln!(s, "{:<12} {:>10}", "total", self.triples);
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<12} {:>8} {:>6} {:>6} {:>6} {:>9} {:>8}",
            "kind", "entities", "min", "median", "max", "mean", "isolated"
        );
        for (i, k) in EntityKind::ALL.into_iter().enumerate() {
            let d = self.degrees[i];
            let _ = writeln!(
                s,
                "{:<12} {:>8} {:>6} {:>6} {:>6} {:>9.2} {:>8}",
                k.name(),
                self.per_kind[i],
                d.min,
                d.median,
                d.max,
                d.mean,
                d.isolated
            );
        }
        s
    }
}
