use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::fusion::{Lambdas, NormalizedList};
use super::metrics::map_at_k;
use crate::corpus::QrelSet;
use crate::error::{Error, Result};
use crate::par;

/// Every point of the simplex lattice with spacing `step`, ordered by
/// (bm25, dense) ascending.
pub fn lambda_grid(step: f64) -> Result<Vec<Lambdas>> {
    let n = (1.0 / step).round();
    if !(step > 0.0) || !(step <= 1.0) || (n * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("lambda grid step {step} does not divide 1")));
    }
    let n = n as usize;
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        for j in 0..=n - i {
            let k = n - i - j;
            out.push(Lambdas {
                bm25: i as f64 / n as f64,
                dense: j as f64 / n as f64,
                user: k as f64 / n as f64,
            });
        }
    }
    Ok(out)
}

/// Mean MAP@`k` of the fused rankings over the judged queries.
pub fn fused_map(lists: &[NormalizedList], qrels: &QrelSet, l: &Lambdas, k: usize) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for list in lists {
        let Some(rel) = qrels.get(&list.query_id).filter(|r| !r.is_empty()) else {
            continue;
        };
        sum += map_at_k(&list.ranked_ids(l), rel, k);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: Lambdas,
    pub best_map: f64,
    pub grid: Vec<(Lambdas, f64)>,
}

impl TuneResult {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>6} {:>6} {:>6} {:>10}", "bm25", "dense", "user", "MAP@100");
        for (l, m) in &self.grid {
            let mark = if l == &self.best { " *" } else { "" };
            let _ = writeln!(s, "{:>6.2} {:>6.2} {:>6.2} {:>10.6}{mark}", l.bm25, l.dense, l.user, m);
        }
        s
    }
}

/// Lattice point with the highest validation MAP@`k`; ties go to the larger
/// dense weight, then the larger bm25 weight.
pub fn tune_lambdas(lists: &[NormalizedList], qrels: &QrelSet, step: f64, k: usize) -> Result<TuneResult> {
    tune_over(lists, qrels, lambda_grid(step)?, k)
}

/// As [`tune_lambdas`] over an arbitrary candidate set of weights.
pub fn tune_over(lists: &[NormalizedList], qrels: &QrelSet, grid: Vec<Lambdas>, k: usize) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::Config("empty lambda grid".into()));
    }
    let judged = lists
        .iter()
        .filter(|l| qrels.get(&l.query_id).is_some_and(|r| !r.is_empty()))
        .count();
    if judged == 0 {
        return Err(Error::Data("no judged validation queries to tune on".into()));
    }
    let scores = par::map(&grid, |l| fused_map(lists, qrels, l, k));
    let mut best = 0;
    for i in 1..grid.len() {
        let (a, b) = (&grid[i], &grid[best]);
        let better = scores[i] > scores[best]
            || (scores[i] == scores[best] && (a.dense > b.dense || (a.dense == b.dense && a.bm25 > b.bm25)));
        if better {
            best = i;
        }
    }
    Ok(TuneResult {
        best: grid[best],
        best_map: scores[best],
        grid: grid.into_iter().zip(scores).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(lambda_grid(0.5).unwrap().len(), 6);
        assert_eq!(lambda_grid(0.05).unwrap().len(), 231);
        assert!(lambda_grid(0.3).is_err());
        for l in lambda_grid(0.05).unwrap() {
            l.check().unwrap();
        }
    }

    #[test]
    fn empty_validation_is_an_error() {
        assert!(tune_lambdas(&[], &QrelSet::default(), 0.05, 100).is_err());
    }
}
