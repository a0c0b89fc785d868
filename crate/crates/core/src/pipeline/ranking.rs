use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::{load_index, load_ingested, load_part, Part};
use super::models::{load_docs, load_encoder, load_kge, Variant};
use super::{read_json, write_json, write_text, Stage, Workspace};
use crate::corpus::{QrelSet, Query};
use crate::dense::{dense_score, encode_text};
use crate::error::{Error, Result};
use crate::eval::{
    ablation_table, evaluate, lambda_grid, significance_test, tune_over, write_run, Candidate, CandidateList, Comparison,
    Lambdas, MetricCutoffs, MetricReport, NormalizedList, QueryMetrics, RunFile, SystemResult, TuneResult,
};
use crate::graph::{pagerank, pop_score, write_scores, CitationGraph};
use crate::kge::KgModel;
use crate::par;
use crate::user::{attention_user_vector, build_user_contexts, mean_user_vector, resolve_user_scores, self_citation_score, ParkScorer, UserScore};
use crate::util::{cosine, derive_seed};

/// Systems of the main comparison, in report order.
pub const SYSTEMS: [&str; 10] = [
    "BM25",
    "Dense",
    "BM25+Dense",
    "Mean",
    "Attention",
    "SelfCitation",
    "PageRank",
    "POP",
    "PARK-E",
    "PARK-H",
];

/// The non-personalized fusion every other system is compared against.
pub const REFERENCE: &str = "BM25+Dense";

fn model_tag(m: KgModel) -> &'static str {
    match m {
        KgModel::TransE => "PARK-E",
        KgModel::TransH => "PARK-H",
    }
}

fn ablation_system(v: Variant, m: KgModel) -> String {
    match v {
        Variant::Full => model_tag(m).to_string(),
        _ => format!("{}/{}", model_tag(m), v.name()),
    }
}

/// Every system the pipeline scores: the main comparison plus the reduced-KG
/// variants of the ablation model.
pub fn system_names(ablation_model: KgModel) -> Vec<String> {
    let mut out: Vec<String> = SYSTEMS.iter().map(|s| s.to_string()).collect();
    out.push(ablation_system(Variant::User, ablation_model));
    out.push(ablation_system(Variant::Venue, ablation_model));
    out
}

/// File-name form of a system name.
pub fn slug(system: &str) -> String {
    let mut s = String::new();
    for c in system.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('_') {
            s.push('_');
        }
    }
    s.trim_matches('_').to_string()
}

/// First-stage candidates of one query with every raw score channel. The
/// user channel of each personalized system is already floor-filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredList {
    pub query_id: String,
    pub user_id: String,
    pub doc_ids: Vec<String>,
    pub bm25: Vec<f64>,
    pub dense: Vec<f64>,
    pub users: BTreeMap<String, Vec<f64>>,
}

impl ScoredList {
    /// Candidate list with `system`'s user channel (zeros for systems without
    /// one).
    pub fn candidates(&self, system: &str) -> CandidateList {
        let user = self.users.get(system);
        CandidateList {
            query_id: self.query_id.clone(),
            candidates: (0..self.doc_ids.len())
                .map(|i| Candidate {
                    doc_id: self.doc_ids[i].clone(),
                    bm25: self.bm25[i],
                    dense: self.dense[i],
                    user: user.map_or(0.0, |u| u[i]),
                })
                .collect(),
        }
    }
}

fn candidates_file(part: Part) -> String {
    format!("candidates_{}.jsonl", part.name())
}

fn write_lists(path: &Path, lists: &[ScoredList]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for l in lists {
        let line = serde_json::to_string(l).expect("scored list serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_lists(path: &Path) -> Result<Vec<ScoredList>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}

pub(super) fn score(ws: &Workspace, dir: &Path) -> Result<()> {
    let (corpus, _, info) = load_ingested(ws)?;
    let index = load_index(ws)?;
    let encoder = load_encoder(ws)?;
    let store = load_docs(ws, &corpus)?;
    let mut kges = Vec::new();
    for (v, m) in super::models::kge_runs(ws) {
        kges.push((ablation_system(v, m), load_kge(ws, v, m)?));
    }
    let contexts = build_user_contexts(&corpus, info.fit_before);
    let graph = CitationGraph::from_corpus(&corpus, Some(info.fit_before));
    let pr = pagerank(&graph, &ws.cfg.user.pagerank)?;
    if !pr.converged {
        log::warn!("PageRank stopped after {} iterations without converging", pr.iterations);
    }
    write_scores(dir.join("pagerank.tsv"), &corpus, &graph, &pr)?;

    let r = &ws.cfg.retrieval;
    let (bm25, analyzer, k) = (r.bm25(), r.analyzer(), r.candidates);
    let ucfg = &ws.cfg.user;
    for part in [Part::Validation, Part::Test] {
        let (queries, _) = load_part(ws, part)?;
        let lists: Vec<ScoredList> = par::map(&queries, |q: &Query| {
            let tokens = analyzer.analyze(&q.text);
            let hits = index.retrieve_topk_filtered(bm25, &tokens, k, |o| corpus.get(o).year < q.year);
            let qv = encode_text(&encoder, &q.text).vector;
            let ords: Vec<usize> = hits.iter().map(|h| h.0).collect();
            let authors = |o: usize| &corpus.get(o).author_ids;
            let ctx = contexts.get(&q.user_id);
            let mut users = BTreeMap::new();

            let mean = ctx.and_then(|c| mean_user_vector(&store, c));
            let att = ctx.and_then(|c| attention_user_vector(&qv, &store, c));
            for (name, u) in [("Mean", mean), ("Attention", att)] {
                let s: Vec<UserScore> = ords
                    .iter()
                    .map(|&o| match &u {
                        Some(u) if !store.empty[o] => UserScore::Score(cosine(u, &store.row_f64(o))),
                        Some(_) => UserScore::NoKnownAuthors,
                        None => UserScore::UnknownUser,
                    })
                    .collect();
                users.insert(name.to_string(), resolve_user_scores(&s));
            }
            users.insert(
                "SelfCitation".into(),
                ords.iter().map(|&o| self_citation_score(&q.user_id, ctx, authors(o))).collect(),
            );
            users.insert("PageRank".into(), ords.iter().map(|&o| pr.score(&graph, o)).collect());
            users.insert("POP".into(), ords.iter().map(|&o| pop_score(&graph, o) as f64).collect());
            for (name, emb) in &kges {
                let scorer = ParkScorer::new(emb, &q.user_id, ucfg.aggregation, ucfg.similarity);
                let s: Vec<UserScore> = ords.iter().map(|&o| scorer.score(authors(o))).collect();
                users.insert(name.clone(), resolve_user_scores(&s));
            }
            ScoredList {
                query_id: q.query_id.clone(),
                user_id: q.user_id.clone(),
                doc_ids: ords.iter().map(|&o| corpus.get(o).doc_id.clone()).collect(),
                bm25: hits.iter().map(|h| h.1).collect(),
                dense: ords.iter().map(|&o| dense_score(&qv, &store.row_f64(o))).collect(),
                users,
            }
        });
        let empty = lists.iter().filter(|l| l.doc_ids.is_empty()).count();
        if empty > 0 {
            log::warn!("{empty} {} queries retrieved no candidates", part.name());
        }
        write_lists(&dir.join(candidates_file(part)), &lists)?;
    }
    Ok(())
}

fn load_lists(ws: &Workspace, part: Part) -> Result<Vec<ScoredList>> {
    read_lists(&ws.input(Stage::Score, &candidates_file(part))?)
}

/// Tuned weights per system, as stored by `tune`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedSystem {
    pub system: String,
    pub lambdas: Lambdas,
    pub validation_map: f64,
}

/// Weights that are not tuned: pure single-channel systems.
fn fixed_lambdas(system: &str) -> Option<Lambdas> {
    match system {
        "BM25" => Some(Lambdas::BM25),
        "Dense" => Some(Lambdas::DENSE),
        _ => None,
    }
}

pub(super) fn tune(ws: &Workspace, dir: &Path) -> Result<()> {
    let lists = load_lists(ws, Part::Validation)?;
    let (_, qrels) = load_part(ws, Part::Validation)?;
    let k = ws.cfg.eval.map_k;
    let grid = lambda_grid(ws.cfg.fusion.step)?;
    let mut tuned = Vec::new();
    let mut tables = String::new();
    for system in system_names(ws.cfg.kge.ablation_model) {
        let norm: Vec<NormalizedList> = lists.iter().map(|l| NormalizedList::new(&l.candidates(&system))).collect();
        let candidates: Vec<Lambdas> = match fixed_lambdas(&system) {
            Some(l) => vec![l],
            None if system == REFERENCE => grid.iter().copied().filter(|l| l.user == 0.0).collect(),
            None => grid.clone(),
        };
        let res: TuneResult = tune_over(&norm, &qrels, candidates, k)?;
        log::info!(
            "{system}: lambdas ({:.2}, {:.2}, {:.2}), validation MAP@{k} {:.4}",
            res.best.bm25,
            res.best.dense,
            res.best.user,
            res.best_map
        );
        tables.push_str(&format!("# {system}\n{}\n", res.to_table()));
        tuned.push(TunedSystem {
            system,
            lambdas: res.best,
            validation_map: res.best_map,
        });
    }
    write_text(&dir.join("grid.txt"), &tables)?;
    write_json(&dir.join("lambdas.json"), &tuned)
}

fn load_tuned(ws: &Workspace) -> Result<Vec<TunedSystem>> {
    read_json(&ws.input(Stage::Tune, "lambdas.json")?)
}

fn cutoffs(ws: &Workspace) -> MetricCutoffs {
    let e = &ws.cfg.eval;
    MetricCutoffs {
        map: e.map_k,
        mrr: e.mrr_k,
        ndcg: e.ndcg_k,
    }
}

/// Fused test run and per-query metrics of one tuned system.
fn run_system(t: &TunedSystem, lists: &[ScoredList], qrels: &QrelSet, query_ids: &[String], cut: MetricCutoffs) -> (RunFile, QueryMetrics) {
    let rankings: Vec<Vec<(String, f64)>> = par::map(lists, |l| {
        let n = NormalizedList::new(&l.candidates(&t.system));
        n.ranking(&t.lambdas).into_iter().map(|(i, s)| (n.doc_ids[i].clone(), s)).collect()
    });
    let mut run = RunFile::new(slug(&t.system));
    for (l, r) in lists.iter().zip(rankings) {
        run.push_ranking(l.query_id.clone(), r);
    }
    let metrics = evaluate(query_ids, qrels, cut, |q| run.ranking(q));
    (run, metrics)
}

fn evaluate_all(ws: &Workspace, write_runs: Option<&Path>) -> Result<Vec<SystemResult>> {
    let lists = load_lists(ws, Part::Test)?;
    let (queries, qrels) = load_part(ws, Part::Test)?;
    let ids: Vec<String> = queries.iter().map(|q| q.query_id.clone()).collect();
    let cut = cutoffs(ws);
    let mut out = Vec::new();
    for t in load_tuned(ws)? {
        let (run, metrics) = run_system(&t, &lists, &qrels, &ids, cut);
        if let Some(dir) = write_runs {
            write_run(dir.join(format!("{}.run", slug(&t.system))), &run)?;
        }
        out.push(SystemResult { name: t.system, metrics });
    }
    Ok(out)
}

pub(super) fn eval(ws: &Workspace, dir: &Path) -> Result<()> {
    let runs = dir.join("runs");
    fs::create_dir_all(&runs).map_err(|e| Error::io(&runs, e))?;
    let systems = evaluate_all(ws, Some(&runs))?;
    let find = |name: &str| systems.iter().find(|s| s.name == name).map(|s| &s.metrics);
    let reference = find(REFERENCE).ok_or_else(|| Error::Data(format!("no `{REFERENCE}` system was tuned")))?;
    let mut pairs: Vec<(&str, &str)> = vec![(REFERENCE, "BM25")];
    pairs.extend(systems.iter().map(|s| s.name.as_str()).filter(|n| *n != REFERENCE).map(|n| (n, REFERENCE)));
    let mut comparisons = Vec::new();
    for (system, baseline) in pairs {
        let (a, b) = (find(system).expect("listed system"), find(baseline).unwrap_or(reference));
        let p = significance_test(&a.map, &b.map, ws.cfg.eval.permutations, derive_seed(ws.cfg.seed, &format!("sig/{system}/{baseline}")))?;
        comparisons.push(Comparison {
            system: system.to_string(),
            baseline: baseline.to_string(),
            map_difference: a.mean_map() - b.mean_map(),
            p_value: p,
        });
    }
    let report = MetricReport {
        cutoffs: cutoffs(ws),
        systems,
        comparisons,
    };
    write_text(&dir.join("report.txt"), &report.to_table())?;
    write_text(&dir.join("report.kv"), &report.to_kv())?;
    write_json(&dir.join("report.json"), &report)
}

pub(super) fn ablate(ws: &Workspace, dir: &Path) -> Result<()> {
    let m = ws.cfg.kge.ablation_model;
    let systems = evaluate_all(ws, None)?;
    let find = |name: &str| {
        systems
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.metrics.clone())
            .ok_or_else(|| Error::Data(format!("no tuned system `{name}` for the ablation")))
    };
    let rows = vec![
        ("Only User".to_string(), find(&ablation_system(Variant::User, m))?),
        ("+ Venue".to_string(), find(&ablation_system(Variant::Venue, m))?),
        ("+ Affiliation".to_string(), find(&ablation_system(Variant::Full, m))?),
    ];
    let reference = find(REFERENCE)?;
    let table = ablation_table(&rows, Some(("no KG", &reference)), cutoffs(ws));
    write_text(&dir.join("ablation.txt"), &format!("# {} ablation over KG node types\n{table}", m.name()))?;
    let mut kv = String::new();
    for (name, q) in rows.iter().map(|(n, q)| (n.as_str(), q)).chain([("no KG", &reference)]) {
        let key = slug(name);
        kv.push_str(&format!(
            "{key}.map={:.6}\n{key}.mrr={:.6}\n{key}.ndcg={:.6}\n",
            q.mean_map(),
            q.mean_mrr(),
            q.mean_ndcg()
        ));
    }
    write_text(&dir.join("ablation.kv"), &kv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("BM25+Dense"), "bm25_dense");
        assert_eq!(slug("PARK-H/user"), "park_h_user");
        assert_eq!(slug("+ Affiliation"), "affiliation");
    }

    #[test]
    fn system_list_has_ablation_variants() {
        let names = system_names(KgModel::TransH);
        assert_eq!(names.len(), 12);
        assert!(names.contains(&"PARK-H/user".to_string()) && names.contains(&"PARK-H/venue".to_string()));
        assert_eq!(system_names(KgModel::TransE)[10], "PARK-E/user");
    }
}
