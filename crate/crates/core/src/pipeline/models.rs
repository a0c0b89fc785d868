use std::path::Path;

use super::data::{load_ingested, load_part, Part};
use super::{write_json, write_text, Stage, Workspace};
use crate::corpus::{Author, Corpus};
use crate::dense::{embed_corpus, read_embeddings, train_encoder, write_embeddings, DocEmbeddingStore, HashedBowEncoder, TrainingPair};
use crate::error::Result;
use crate::kg::{self, build_catalog, kg_stats, read_triples, write_triples, EntityCatalog, EntityKind, KgConfig};
use crate::kge::{self, load_kg_embeddings, save_kg_embeddings, KgEmbeddings, KgModel};

pub(super) const ENCODER: &str = "encoder.emb";
pub(super) const DOCS: &str = "docs.emb";
pub(super) const TRIPLES: &str = "triples.tsv";

/// KG variants of the ablation, from the smallest graph to the full one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    User,
    Venue,
    Full,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::User, Variant::Venue, Variant::Full];

    pub fn name(self) -> &'static str {
        match self {
            Variant::User => "user",
            Variant::Venue => "venue",
            Variant::Full => "full",
        }
    }

    pub fn config(self, base: &KgConfig) -> KgConfig {
        match self {
            Variant::User => KgConfig {
                include_venue: false,
                include_affiliation: false,
                ..*base
            },
            Variant::Venue => KgConfig {
                include_venue: true,
                include_affiliation: false,
                ..*base
            },
            Variant::Full => *base,
        }
    }
}

/// Trained (variant, model) pairs: both models on the full graph and the
/// ablation model on the reduced graphs.
pub(super) fn kge_runs(ws: &Workspace) -> Vec<(Variant, KgModel)> {
    let m = ws.cfg.kge.ablation_model;
    vec![
        (Variant::Full, KgModel::TransE),
        (Variant::Full, KgModel::TransH),
        (Variant::User, m),
        (Variant::Venue, m),
    ]
}

pub(super) fn kge_dir_name(v: Variant, m: KgModel) -> String {
    format!("{}_{}", v.name(), m.name())
}

pub(super) fn train_dense(ws: &Workspace, dir: &Path) -> Result<()> {
    let (corpus, _, _) = load_ingested(ws)?;
    let (queries, qrels) = load_part(ws, Part::Train)?;
    let enc_cfg = &ws.cfg.encoder;
    let mut encoder = HashedBowEncoder::new(enc_cfg.dim, enc_cfg.buckets, ws.cfg.retrieval.analyzer(), ws.stage_seed("encoder"))?;
    let mut pairs = Vec::new();
    for q in &queries {
        let Some(rel) = qrels.get(&q.query_id) else { continue };
        let src = q.source_doc_id.as_deref().and_then(|id| corpus.ordinal(id));
        let mut cited: Vec<usize> = src.map(|s| corpus.reference_ordinals(s)).unwrap_or_default();
        cited.retain(|&o| rel.contains(&corpus.get(o).doc_id));
        let mut docs = cited.clone();
        docs.extend(rel.iter().filter_map(|id| corpus.ordinal(id)).filter(|o| !cited.contains(o)));
        docs.truncate(enc_cfg.max_pairs_per_query);
        pairs.extend(docs.into_iter().map(|doc| TrainingPair { query: q.text.clone(), doc }));
    }
    let texts: Vec<String> = corpus.docs().iter().map(|d| d.text()).collect();
    let mut train_cfg = enc_cfg.train.clone();
    train_cfg.seed = ws.stage_seed("dense");
    log::info!("dense training on {} pairs", pairs.len());
    let log = train_encoder(&mut encoder, &pairs, &texts, &train_cfg)?;
    write_embeddings(dir.join(ENCODER), &encoder.to_matrix())?;
    write_json(&dir.join("train_log.json"), &log)
}

pub(super) fn load_encoder(ws: &Workspace) -> Result<HashedBowEncoder> {
    HashedBowEncoder::from_matrix(&read_embeddings(ws.input(Stage::TrainDense, ENCODER)?)?, ws.cfg.retrieval.analyzer())
}

pub(super) fn embed(ws: &Workspace, dir: &Path) -> Result<()> {
    let (corpus, _, _) = load_ingested(ws)?;
    let encoder = load_encoder(ws)?;
    let store = embed_corpus(&encoder, &corpus);
    let empty = store.empty.iter().filter(|&&e| e).count();
    if empty > 0 {
        log::warn!("{empty} documents have no indexable text and a zero embedding");
    }
    store.save(dir.join(DOCS))
}

pub(super) fn load_docs(ws: &Workspace, corpus: &Corpus) -> Result<DocEmbeddingStore> {
    let (store, fixed) = crate::dense::load_precomputed_embeddings(ws.input(Stage::Embed, DOCS)?, Some(corpus.len()))?;
    if fixed > 0 {
        log::warn!("{fixed} document embeddings were re-normalized on load");
    }
    Ok(store)
}

pub(super) fn build_kg(ws: &Workspace, dir: &Path) -> Result<()> {
    let (corpus, authors, info) = load_ingested(ws)?;
    for v in Variant::ALL {
        let cfg = v.config(&ws.cfg.kg);
        let catalog = build_catalog(&corpus, &authors, &cfg);
        let triples = kg::build_kg(&corpus, &authors, &catalog, &cfg, Some(info.fit_before))?;
        kg::check_kinds(&triples, &catalog)?;
        let sub = dir.join(v.name());
        std::fs::create_dir_all(&sub).map_err(|e| crate::Error::io(&sub, e))?;
        write_triples(sub.join(TRIPLES), &triples, &catalog)?;
        let stats = kg_stats(&triples, &catalog);
        write_text(&sub.join("stats.txt"), &stats.to_table())?;
        log::info!("kg {}: {} entities, {} triples", v.name(), catalog.len(), triples.len());
    }
    Ok(())
}

fn catalog_for(corpus: &Corpus, authors: &[Author], ws: &Workspace, v: Variant) -> EntityCatalog {
    build_catalog(corpus, authors, &v.config(&ws.cfg.kg))
}

pub(super) fn train_kg(ws: &Workspace, dir: &Path) -> Result<()> {
    let (corpus, authors, _) = load_ingested(ws)?;
    let store = load_docs(ws, &corpus)?;
    for (v, model) in kge_runs(ws) {
        let catalog = catalog_for(&corpus, &authors, ws, v);
        let triples = read_triples(ws.input(Stage::BuildKg, &format!("{}/{TRIPLES}", v.name()))?, &catalog)?;
        let doc_rows: Vec<usize> = catalog
            .range(EntityKind::Document)
            .map(|e| corpus.ordinal(catalog.id(e as u32)).expect("catalog documents come from the corpus"))
            .collect();
        let mut cfg = ws.cfg.kge.train.clone();
        cfg.seed = ws.stage_seed("kge");
        log::info!("training {} on the {} graph ({} triples)", model.name(), v.name(), triples.len());
        let (emb, logs) = kge::train_kg(model, &triples, &store, &doc_rows, &catalog, &cfg)?;
        let sub = dir.join(kge_dir_name(v, model));
        save_kg_embeddings(&sub, &emb)?;
        write_json(&sub.join("train_log.json"), &logs)?;
    }
    Ok(())
}

pub(super) fn load_kge(ws: &Workspace, v: Variant, m: KgModel) -> Result<KgEmbeddings> {
    let name = kge_dir_name(v, m);
    // register the matrices as inputs
    ws.input(Stage::TrainKg, &format!("{name}/manifest.txt"))?;
    ws.input(Stage::TrainKg, &format!("{name}/entities.emb"))?;
    load_kg_embeddings(ws.dir(Stage::TrainKg).join(name))
}
