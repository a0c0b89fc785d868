use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::util::fmt_g6;

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub rank: usize,
    pub score: f64,
}

/// Ranked results per query, in TREC run layout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFile {
    pub tag: String,
    pub queries: BTreeMap<String, Vec<RunEntry>>,
}

impl RunFile {
    pub fn new(tag: impl Into<String>) -> Self {
        RunFile {
            tag: tag.into(),
            queries: BTreeMap::new(),
        }
    }

    /// Adds a ranking given best first; ranks are assigned from 1.
    pub fn push_ranking(&mut self, query_id: impl Into<String>, ranking: impl IntoIterator<Item = (String, f64)>) {
        let entries = ranking
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RunEntry { doc_id, rank: i + 1, score })
            .collect();
        self.queries.insert(query_id.into(), entries);
    }

    pub fn ranking(&self, query_id: &str) -> Option<Vec<&str>> {
        self.queries.get(query_id).map(|e| e.iter().map(|x| x.doc_id.as_str()).collect())
    }

    pub fn validate(&self) -> Result<()> {
        for (q, entries) in &self.queries {
            let mut seen = std::collections::HashSet::new();
            for (i, e) in entries.iter().enumerate() {
                if e.rank != i + 1 {
                    return Err(Error::Contract(format!("query {q}: rank {} at position {}", e.rank, i + 1)));
                }
                if i > 0 && e.score > entries[i - 1].score {
                    return Err(Error::Contract(format!("query {q}: score increases at rank {}", e.rank)));
                }
                if !seen.insert(&e.doc_id) {
                    return Err(Error::Contract(format!("query {q}: duplicate doc {}", e.doc_id)));
                }
            }
        }
        Ok(())
    }
}

/// `query_id Q0 doc_id rank score tag`, scores with 6 significant digits.
pub fn write_run(path: impl AsRef<Path>, run: &RunFile) -> Result<()> {
    run.validate()?;
    let path = path.as_ref();
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for (q, entries) in &run.queries {
        for e in entries {
            writeln!(w, "{q} Q0 {} {} {} {}", e.doc_id, e.rank, fmt_g6(e.score), run.tag).map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_run(path: impl AsRef<Path>) -> Result<RunFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut run = RunFile::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(Error::parse(path, n + 1, format!("expected 6 columns, found {}", cols.len())));
        }
        let rank: usize = cols[3]
            .parse()
            .ok()
            .filter(|&r| r > 0)
            .ok_or_else(|| Error::parse(path, n + 1, format!("bad rank `{}`", cols[3])))?;
        let score: f64 = cols[4]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(path, n + 1, format!("bad score `{}`", cols[4])))?;
        if run.tag.is_empty() {
            run.tag = cols[5].to_string();
        }
        run.queries.entry(cols[0].to_string()).or_default().push(RunEntry {
            doc_id: cols[2].to_string(),
            rank,
            score,
        });
    }
    for entries in run.queries.values_mut() {
        entries.sort_by_key(|e| e.rank);
    }
    run.validate().map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    Ok(run)
}
