//! Translational KG embeddings (TransE and TransH) with document rows frozen
//! to the dense document vectors.

mod io;
mod model;
mod sampler;
mod train;

pub use io::{load_kg_embeddings, save_kg_embeddings};
pub use model::{
    pair_loss_grad, score_grad, transe_score, transh_penalty, transh_project, transh_score, KgModel, PairGrad, ScoreGrad,
};
pub use sampler::{sample_negative, Negative, Side, TripleSet, MAX_ATTEMPTS};
pub use train::{train_kg, KgEpochLog, KgTrainConfig};

use crate::dense::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::kg::{EntityCatalog, EntityKind, RelationType, Triple};
use crate::par;
use crate::util::{dot, to_f64};

#[derive(Debug, Clone, PartialEq)]
pub struct KgEmbeddings {
    pub model: KgModel,
    pub entities: EmbeddingMatrix,
    /// One row per [`RelationType`], in `RelationType::ALL` order.
    pub relations: EmbeddingMatrix,
    /// TransH hyperplane normals, same row order as `relations`.
    pub normals: Option<EmbeddingMatrix>,
    pub frozen: Vec<bool>,
    /// Number of training triples touching each entity.
    pub degree: Vec<u32>,
    pub catalog: EntityCatalog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityVector {
    pub vector: Vec<f64>,
    pub frozen: bool,
}

impl KgEmbeddings {
    pub fn dim(&self) -> usize {
        self.entities.dim
    }

    pub fn row(&self, ordinal: u32) -> Vec<f64> {
        self.entities.row_f64(ordinal as usize)
    }

    /// An entity is known when at least one training triple mentions it.
    pub fn is_known(&self, ordinal: u32) -> bool {
        self.degree[ordinal as usize] > 0
    }

    pub fn score(&self, t: &Triple) -> f64 {
        let h = self.row(t.head);
        let tl = self.row(t.tail);
        let r = self.relations.row_f64(t.relation.index());
        match (&self.normals, self.model) {
            (Some(n), KgModel::TransH) => transh_score(&h, &tl, &n.row_f64(t.relation.index()), &r),
            _ => transe_score(&h, &r, &tl),
        }
    }
}

pub fn entity_vector(emb: &KgEmbeddings, kind: EntityKind, id: &str) -> Result<EntityVector> {
    let o = emb
        .catalog
        .ordinal(kind, id)
        .ok_or_else(|| Error::Lookup(format!("{kind} `{id}`")))?;
    Ok(EntityVector {
        vector: emb.row(o),
        frozen: emb.frozen[o as usize],
    })
}

/// Mean over `test` of the rank of the true tail among all entities of the
/// tail kind, ordered by ascending distance. Other known tails of the same
/// (head, relation) are removed before ranking; ties count in the true
/// tail's favor.
pub fn filtered_mean_rank(emb: &KgEmbeddings, test: &[Triple], known: &TripleSet) -> f64 {
    if test.is_empty() {
        return 0.0;
    }
    let ranks = par::map(test, |t| {
        let (_, tail_kind) = t.relation.signature();
        let w = emb.normals.as_ref().filter(|_| emb.model == KgModel::TransH).map(|n| n.row_f64(t.relation.index()));
        let proj = |v: Vec<f64>| match &w {
            Some(w) => {
                let s = dot(w, &v);
                v.iter().zip(w).map(|(a, b)| a - s * b).collect()
            }
            None => v,
        };
        let r = emb.relations.row_f64(t.relation.index());
        let anchor: Vec<f64> = proj(emb.row(t.head)).iter().zip(&r).map(|(a, b)| a + b).collect();
        let dist = |c: u32| -> f64 {
            let pc = proj(to_f64(emb.entities.row(c as usize)));
            anchor.iter().zip(&pc).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        };
        let target = dist(t.tail);
        let filtered: std::collections::HashSet<u32> = known.tails(t.head, t.relation).collect();
        let better = emb
            .catalog
            .range(tail_kind)
            .map(|c| c as u32)
            .filter(|c| *c != t.tail && !filtered.contains(c))
            .filter(|&c| dist(c) < target)
            .count();
        (better + 1) as f64
    });
    ranks.iter().sum::<f64>() / ranks.len() as f64
}

/// Relation names in row order, for manifests and reports.
pub fn relation_names() -> Vec<&'static str> {
    RelationType::ALL.iter().map(|r| r.name()).collect()
}
