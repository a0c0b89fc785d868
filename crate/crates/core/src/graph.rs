//! Citation-graph baselines: PageRank and citation-count popularity.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::par;
use crate::util::fmt_g6;

/// Citations among the documents published before a cutoff. Nodes are
/// numbered compactly; `nodes[i]` is the corpus ordinal of node `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    nodes: Vec<usize>,
    node_of: Vec<Option<u32>>,
    out_degree: Vec<u32>,
    incoming: Vec<Vec<u32>>,
    edges: usize,
}

impl CitationGraph {
    pub fn from_corpus(corpus: &Corpus, before_year: Option<i32>) -> Self {
        let keep = |o: usize| before_year.is_none_or(|y| corpus.get(o).year < y);
        let nodes: Vec<usize> = (0..corpus.len()).filter(|&o| keep(o)).collect();
        let mut node_of = vec![None; corpus.len()];
        for (i, &o) in nodes.iter().enumerate() {
            node_of[o] = Some(i as u32);
        }
        let mut out_degree = vec![0u32; nodes.len()];
        let mut incoming = vec![Vec::new(); nodes.len()];
        let mut edges = 0;
        for (i, &o) in nodes.iter().enumerate() {
            for r in corpus.reference_ordinals(o) {
                if let Some(j) = node_of[r] {
                    if j as usize != i {
                        out_degree[i] += 1;
                        incoming[j as usize].push(i as u32);
                        edges += 1;
                    }
                }
            }
        }
        CitationGraph {
            nodes,
            node_of,
            out_degree,
            incoming,
            edges,
        }
    }

    /// Builds a graph directly from an edge list over `n` nodes.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut out_degree = vec![0u32; n];
        let mut incoming = vec![Vec::new(); n];
        let mut count = 0;
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for (a, b) in sorted {
            if a != b {
                out_degree[a] += 1;
                incoming[b].push(a as u32);
                count += 1;
            }
        }
        CitationGraph {
            nodes: (0..n).collect(),
            node_of: (0..n as u32).map(Some).collect(),
            out_degree,
            incoming,
            edges: count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn node(&self, corpus_ordinal: usize) -> Option<usize> {
        self.node_of.get(corpus_ordinal).copied().flatten().map(|n| n as usize)
    }
}

/// Times the document was cited within the graph; 0 for documents outside it.
pub fn pop_score(graph: &CitationGraph, corpus_ordinal: usize) -> u32 {
    graph.node(corpus_ordinal).map_or(0, |n| graph.incoming[n].len() as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankConfig {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            alpha: 0.85,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    /// Indexed by graph node.
    pub node_scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl PageRank {
    /// Score of a corpus document; 0 outside the graph.
    pub fn score(&self, graph: &CitationGraph, corpus_ordinal: usize) -> f64 {
        graph.node(corpus_ordinal).map_or(0.0, |n| self.node_scores[n])
    }
}

/// Power iteration with uniform teleportation; the rank of dangling nodes
/// is spread uniformly. Stops when the L1 change drops below `tol`.
pub fn pagerank(graph: &CitationGraph, cfg: &PageRankConfig) -> Result<PageRank> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) || !(cfg.tol > 0.0) {
        return Err(Error::Config(format!("pagerank needs 0 < alpha < 1 and tol > 0, got {cfg:?}")));
    }
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Data("pagerank on an empty graph".into()));
    }
    let nf = n as f64;
    let mut r = vec![1.0 / nf; n];
    for it in 1..=cfg.max_iter {
        let dangling: f64 = (0..n).filter(|&i| graph.out_degree[i] == 0).map(|i| r[i]).sum();
        let base = (1.0 - cfg.alpha) / nf + cfg.alpha * dangling / nf;
        let prev = &r;
        let next = par::map_range(n, |i| {
            base + cfg.alpha
                * graph.incoming[i]
                    .iter()
                    .map(|&j| prev[j as usize] / graph.out_degree[j as usize] as f64)
                    .sum::<f64>()
        });
        let change: f64 = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        if change < cfg.tol {
            return Ok(PageRank {
                node_scores: r,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(PageRank {
        node_scores: r,
        iterations: cfg.max_iter,
        converged: false,
    })
}

/// `doc_id<TAB>score` for every document in the graph.
pub fn write_scores(path: impl AsRef<Path>, corpus: &Corpus, graph: &CitationGraph, pr: &PageRank) -> Result<()> {
    let path = path.as_ref();
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for (i, &o) in graph.nodes.iter().enumerate() {
        writeln!(w, "{}\t{}", corpus.get(o).doc_id, fmt_g6(pr.node_scores[i])).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_digraph_is_uniform() {
        let edges: Vec<(usize, usize)> = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).collect();
        let g = CitationGraph::from_edges(4, &edges);
        let pr = pagerank(&g, &PageRankConfig::default()).unwrap();
        assert!(pr.converged);
        for s in &pr.node_scores {
            assert!((s - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_graph_and_bad_alpha_are_errors() {
        let g = CitationGraph::from_edges(0, &[]);
        assert!(pagerank(&g, &PageRankConfig::default()).is_err());
        let g = CitationGraph::from_edges(2, &[(0, 1)]);
        let bad = PageRankConfig {
            alpha: 1.0,
            ..Default::default()
        };
        assert!(matches!(pagerank(&g, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn popularity_counts_incoming_edges() {
        let g = CitationGraph::from_edges(5, &[(0, 4), (1, 4), (2, 4), (3, 0), (4, 4)]);
        assert_eq!(pop_score(&g, 4), 3);
        assert_eq!(pop_score(&g, 1), 0);
        assert_eq!(g.edge_count(), 4);
    }
}
