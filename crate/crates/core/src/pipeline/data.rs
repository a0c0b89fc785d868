use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{read_json, write_json, Stage, Workspace};
use crate::corpus::{
    build_qrels, chronological_split, generate_synthetic, load_authors, load_corpus, make_queries, percentile_year,
    read_queries, read_qrels, save_authors, save_corpus, write_qrels, write_queries, Corpus, Query, QrelSet,
    SplitSpec,
};
use crate::error::{Error, Result};
use crate::lexical::{read_index, write_index, InvertedIndex};

pub(super) const CORPUS: &str = "corpus.jsonl";
pub(super) const AUTHORS: &str = "authors.jsonl";
pub(super) const SPLIT: &str = "split.json";
pub(super) const INDEX: &str = "index.bin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Train,
    Validation,
    Test,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::Train, Part::Validation, Part::Test];

    pub fn name(self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Validation => "validation",
            Part::Test => "test",
        }
    }

    pub fn queries_file(self) -> String {
        format!("queries_{}.tsv", self.name())
    }

    pub fn qrels_file(self) -> String {
        format!("qrels_{}.txt", self.name())
    }
}

/// Year boundaries of the chronological protocol. Test queries come from
/// papers published from `cutoff_year` on, validation queries from
/// `[fit_before, cutoff_year)`, and every learned component (dense encoder,
/// knowledge graph, user histories, citation graph) only sees papers
/// published before `fit_before`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub cutoff_year: i32,
    pub fit_before: i32,
    pub documents: usize,
    pub fit_documents: usize,
    pub validation_documents: usize,
    pub test_documents: usize,
    pub self_references_dropped: usize,
    pub dangling_references_dropped: usize,
}

pub(super) fn synth(ws: &Workspace, dir: &Path) -> Result<()> {
    let out = generate_synthetic(&ws.cfg.synth, ws.stage_seed("synth"))?;
    save_corpus(dir.join(CORPUS), &out.corpus)?;
    save_authors(dir.join(AUTHORS), &out.authors)
}

pub(super) fn ingest(ws: &Workspace, dir: &Path) -> Result<()> {
    let (corpus_path, authors_path) = match (&ws.cfg.paths.corpus, &ws.cfg.paths.authors) {
        (Some(c), Some(a)) => (ws.external_input(c), ws.external_input(a)),
        _ => (ws.input(Stage::Synth, CORPUS)?, ws.input(Stage::Synth, AUTHORS)?),
    };
    let (corpus, report) = load_corpus(&corpus_path)?;
    let authors = load_authors(&authors_path)?;
    let split = &ws.cfg.split;
    let cutoff = match split.cutoff_year {
        Some(y) => y,
        None => percentile_year(&corpus, split.cutoff_percentile).ok_or_else(|| Error::Data("empty corpus".into()))?,
    };
    let fit_before = cutoff - split.validation_years;
    let parts = chronological_split(&corpus, SplitSpec { cutoff_year: cutoff })?;
    let fit: Vec<usize> = parts.train.iter().copied().filter(|&o| corpus.get(o).year < fit_before).collect();
    let validation: Vec<usize> = parts.train.iter().copied().filter(|&o| corpus.get(o).year >= fit_before).collect();
    if fit.is_empty() || validation.is_empty() {
        return Err(Error::Data(format!(
            "cutoff {cutoff} with {} validation year(s) leaves an empty fit or validation partition",
            split.validation_years
        )));
    }
    let active: BTreeSet<&str> = fit.iter().flat_map(|&o| corpus.get(o).author_ids.iter().map(String::as_str)).collect();
    for (part, ordinals) in [(Part::Train, &fit), (Part::Validation, &validation), (Part::Test, &parts.test)] {
        let (queries, skipped) = make_queries(&corpus, ordinals, |a| active.contains(a));
        if skipped > 0 {
            log::info!("{} {} papers produced no query", skipped, part.name());
        }
        write_queries(dir.join(part.queries_file()), &queries)?;
    }
    save_corpus(dir.join(CORPUS), &corpus)?;
    save_authors(dir.join(AUTHORS), &authors)?;
    let info = SplitInfo {
        cutoff_year: cutoff,
        fit_before,
        documents: corpus.len(),
        fit_documents: fit.len(),
        validation_documents: validation.len(),
        test_documents: parts.test.len(),
        self_references_dropped: report.self_references_dropped,
        dangling_references_dropped: report.dangling_references_dropped,
    };
    log::info!("split: cutoff {cutoff}, fit before {fit_before}, {} test papers", info.test_documents);
    write_json(&dir.join(SPLIT), &info)
}

pub(super) fn load_ingested(ws: &Workspace) -> Result<(Corpus, Vec<crate::corpus::Author>, SplitInfo)> {
    let (corpus, _) = load_corpus(ws.input(Stage::Ingest, CORPUS)?)?;
    let authors = load_authors(ws.input(Stage::Ingest, AUTHORS)?)?;
    let info = read_json(&ws.input(Stage::Ingest, SPLIT)?)?;
    Ok((corpus, authors, info))
}

pub(super) fn index(ws: &Workspace, dir: &Path) -> Result<()> {
    let (corpus, _, _) = load_ingested(ws)?;
    let r = &ws.cfg.retrieval;
    let index = InvertedIndex::build(&corpus, r.analyzer())?;
    write_index(dir.join(INDEX), &index)?;
    for part in Part::ALL {
        let queries = read_queries(ws.input(Stage::Ingest, &part.queries_file())?)?;
        let mode = match part {
            Part::Train => r.train_qrels,
            Part::Validation => r.validation_qrels,
            Part::Test => r.test_qrels,
        };
        let (qrels, dropped) = build_qrels(&corpus, &index, r.bm25(), r.analyzer(), &queries, mode, r.union_depth);
        let judged: Vec<Query> = queries.into_iter().filter(|q| qrels.get(&q.query_id).is_some()).collect();
        let cap = match part {
            Part::Train => None,
            Part::Validation => ws.cfg.split.max_validation_queries,
            Part::Test => ws.cfg.split.max_test_queries,
        };
        let kept = sample_queries(judged, cap, ws.stage_seed(part.name()));
        let mut kept_qrels = QrelSet::default();
        for q in &kept {
            kept_qrels.insert(q.query_id.clone(), qrels.get(&q.query_id).cloned().unwrap_or_default());
        }
        log::info!(
            "{}: {} judged queries kept ({} dropped without judgments, mode {:?})",
            part.name(),
            kept.len(),
            dropped.len(),
            mode
        );
        write_queries(dir.join(part.queries_file()), &kept)?;
        write_qrels(dir.join(part.qrels_file()), &kept_qrels)?;
    }
    Ok(())
}

/// At most `cap` queries, drawn without replacement and kept in input order.
fn sample_queries(queries: Vec<Query>, cap: Option<usize>, seed: u64) -> Vec<Query> {
    let cap = match cap {
        Some(c) if c < queries.len() => c,
        _ => return queries,
    };
    let mut idx: Vec<usize> = (0..queries.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let keep: BTreeSet<usize> = idx.into_iter().take(cap).collect();
    queries.into_iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, q)| q).collect()
}

pub(super) fn load_part(ws: &Workspace, part: Part) -> Result<(Vec<Query>, QrelSet)> {
    let queries = read_queries(ws.input(Stage::Index, &part.queries_file())?)?;
    let qrels = read_qrels(ws.input(Stage::Index, &part.qrels_file())?)?;
    Ok((queries, qrels))
}

pub(super) fn load_index(ws: &Workspace) -> Result<InvertedIndex> {
    read_index(ws.input(Stage::Index, INDEX)?)
}
