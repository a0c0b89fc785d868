use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{pair_loss_grad, transh_penalty, KgModel};
use super::sampler::{sample_negative, Negative, TripleSet};
use super::KgEmbeddings;
use crate::dense::{DocEmbeddingStore, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::kg::{EntityCatalog, EntityKind, RelationType, Triple};
use crate::optim::{AdamW, AdamWConfig};
use crate::par;
use crate::util::{dot, norm};

const N_REL: usize = RelationType::ALL.len();
const GRAD_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgTrainConfig {
    pub margin: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub negatives: usize,
    /// Weight of the TransH orthogonality penalty.
    pub soft_constraint: f64,
    pub epsilon: f64,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for KgTrainConfig {
    fn default() -> Self {
        KgTrainConfig {
            margin: 1.0,
            lr: 1e-3,
            weight_decay: 0.01,
            epochs: 50,
            batch_size: 4096,
            negatives: 1,
            soft_constraint: 0.25,
            epsilon: 1e-3,
            seed: 7,
        }
    }
}

impl KgTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.margin > 0.0
            && self.lr > 0.0
            && self.weight_decay >= 0.0
            && self.batch_size >= 1
            && self.negatives >= 1
            && self.soft_constraint >= 0.0
            && self.epsilon >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid KG training config: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KgEpochLog {
    pub epoch: usize,
    /// Mean over pairs of the hinge loss plus the weighted penalty, measured
    /// before each batch update.
    pub loss: f64,
    pub penalty: f64,
    pub failed_negatives: usize,
    pub max_normal_deviation: f64,
    /// Largest |w . proj(h)| over the normals and a probe of entity rows.
    pub max_orthogonality_residual: f64,
    pub max_trainable_norm: f64,
}

/// Flat f64 parameter buffer: entity rows, then relation rows, then normal
/// rows, all of width `dim`.
struct Params {
    dim: usize,
    n_ent: usize,
    data: Vec<f64>,
}

impl Params {
    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.dim..(r + 1) * self.dim]
    }

    fn rel_row(&self, rel: RelationType) -> usize {
        self.n_ent + rel.index()
    }

    fn normal_row(&self, rel: RelationType) -> usize {
        self.n_ent + N_REL + rel.index()
    }
}

fn uniform_unit_row<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    let bound = 6.0 / (dim as f64).sqrt();
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-bound..bound)).collect();
    crate::util::normalize(&mut v);
    v
}

/// Trains entity, relation and (for TransH) normal vectors with the margin
/// ranking loss. Document entity rows are copied from `docs` and receive no
/// updates. `doc_rows[i]` is the store row of the i-th Document entity of the
/// catalog.
pub fn train_kg(
    model: KgModel,
    triples: &[Triple],
    docs: &DocEmbeddingStore,
    doc_rows: &[usize],
    catalog: &EntityCatalog,
    cfg: &KgTrainConfig,
) -> Result<(KgEmbeddings, Vec<KgEpochLog>)> {
    cfg.validate()?;
    let dim = docs.dim();
    let doc_range = catalog.range(EntityKind::Document);
    if doc_rows.len() != doc_range.len() {
        return Err(Error::Config(format!(
            "{} document entities but {} document rows supplied",
            doc_range.len(),
            doc_rows.len()
        )));
    }
    if let Some(&r) = doc_rows.iter().find(|&&r| r >= docs.len()) {
        return Err(Error::Config(format!("document row {r} is missing from a store of {} rows", docs.len())));
    }
    let n_ent = catalog.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut p = Params {
        dim,
        n_ent,
        data: vec![0.0; (n_ent + 2 * N_REL) * dim],
    };
    let mut frozen = vec![false; n_ent];
    for e in 0..n_ent {
        if doc_range.contains(&e) {
            frozen[e] = true;
            let src = docs.row(doc_rows[e - doc_range.start]);
            for (dst, &x) in p.row_mut(e).iter_mut().zip(src) {
                *dst = x as f64;
            }
        } else {
            let v = uniform_unit_row(&mut rng, dim);
            p.row_mut(e).copy_from_slice(&v);
        }
    }
    for r in 0..2 * N_REL {
        let v = uniform_unit_row(&mut rng, dim);
        p.row_mut(n_ent + r).copy_from_slice(&v);
    }
    let mut degree = vec![0u32; n_ent];
    for t in triples {
        degree[t.head as usize] += 1;
        degree[t.tail as usize] += 1;
    }
    let mut present = [false; N_REL];
    for t in triples {
        present[t.relation.index()] = true;
    }

    let known = TripleSet::new(triples.to_vec());
    let mut opt = AdamW::new(
        AdamWConfig {
            lr: cfg.lr,
            weight_decay: cfg.weight_decay,
            ..AdamWConfig::default()
        },
        p.data.len(),
    );
    let mut grad = vec![0.0; p.data.len()];
    let n_rows = n_ent + 2 * N_REL;
    let mut mark = vec![false; n_rows];
    let mut order: Vec<usize> = (0..triples.len()).collect();
    let mut logs = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut pairs_seen = 0usize;
        let mut pen_last = 0.0;
        let mut failed = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let mut pairs: Vec<(Triple, Negative)> = Vec::with_capacity(batch.len() * cfg.negatives);
            for &i in batch {
                for _ in 0..cfg.negatives {
                    match sample_negative(&triples[i], catalog, &known, &mut rng) {
                        Some(n) => pairs.push((triples[i], n)),
                        None => failed += 1,
                    }
                }
            }
            if pairs.is_empty() {
                continue;
            }
            let scale = 1.0 / pairs.len() as f64;
            let pr = &p;
            let chunks = par::map_chunks(&pairs, GRAD_CHUNK, |chunk| {
                let mut rows: Vec<u32> = Vec::new();
                let mut vals: Vec<f64> = Vec::new();
                let mut loss = 0.0;
                for (pos, neg) in chunk {
                    let rel = pos.relation;
                    let normal: &[f64] = match model {
                        KgModel::TransE => &[],
                        KgModel::TransH => pr.row(pr.normal_row(rel)),
                    };
                    let g = pair_loss_grad(
                        model,
                        (pr.row(pos.head as usize), pr.row(pos.tail as usize)),
                        (pr.row(neg.triple.head as usize), pr.row(neg.triple.tail as usize)),
                        pr.row(pr.rel_row(rel)),
                        normal,
                        cfg.margin,
                    );
                    if g.loss == 0.0 {
                        continue;
                    }
                    loss += g.loss;
                    let mut emit = |row: usize, v: &[f64]| {
                        rows.push(row as u32);
                        vals.extend_from_slice(v);
                    };
                    emit(pos.head as usize, &g.pos.h);
                    emit(pos.tail as usize, &g.pos.t);
                    emit(neg.triple.head as usize, &g.neg.h);
                    emit(neg.triple.tail as usize, &g.neg.t);
                    emit(pr.rel_row(rel), &g.pos.rel);
                    emit(pr.rel_row(rel), &g.neg.rel);
                    if model == KgModel::TransH {
                        emit(pr.normal_row(rel), &g.pos.normal);
                        emit(pr.normal_row(rel), &g.neg.normal);
                    }
                }
                (loss, rows, vals)
            });

            let mut touched: Vec<usize> = Vec::new();
            for (loss, rows, vals) in &chunks {
                loss_sum += loss;
                for (k, &r) in rows.iter().enumerate() {
                    let r = r as usize;
                    if r < n_ent && frozen[r] {
                        continue;
                    }
                    if !mark[r] {
                        mark[r] = true;
                        touched.push(r);
                    }
                    for (acc, g) in grad[r * dim..(r + 1) * dim].iter_mut().zip(&vals[k * dim..(k + 1) * dim]) {
                        *acc += scale * g;
                    }
                }
            }
            pairs_seen += pairs.len();

            if model == KgModel::TransH && cfg.soft_constraint > 0.0 {
                let mut pen = 0.0;
                for rel in RelationType::ALL.into_iter().filter(|r| present[r.index()]) {
                    let (nr, dr) = (p.normal_row(rel), p.rel_row(rel));
                    let (v, g_w, g_d) = transh_penalty(p.row(nr), p.row(dr), cfg.epsilon);
                    if v == 0.0 {
                        continue;
                    }
                    pen += v;
                    for (row, g) in [(nr, g_w), (dr, g_d)] {
                        if !mark[row] {
                            mark[row] = true;
                            touched.push(row);
                        }
                        for (acc, x) in grad[row * dim..(row + 1) * dim].iter_mut().zip(&g) {
                            *acc += cfg.soft_constraint * x;
                        }
                    }
                }
                loss_sum += cfg.soft_constraint * pen * pairs.len() as f64;
                pen_last = pen;
            }

            touched.sort_unstable();
            opt.step_rows(&mut p.data, &grad, &touched, dim);
            for &r in &touched {
                grad[r * dim..(r + 1) * dim].iter_mut().for_each(|x| *x = 0.0);
                mark[r] = false;
                if r < n_ent {
                    // norm constraint on trainable entities
                    let row = p.row_mut(r);
                    let n = norm(row);
                    if n > 1.0 {
                        row.iter_mut().for_each(|x| *x /= n);
                    }
                } else if r >= n_ent + N_REL {
                    crate::util::normalize(p.row_mut(r));
                }
            }
        }
        let log = epoch_log(&p, model, &frozen, epoch, loss_sum, pairs_seen, pen_last, failed);
        log::info!(
            "kg epoch {epoch}: loss {:.6} penalty {:.3e} normal dev {:.2e} max norm {:.6} failed negatives {failed}",
            log.loss,
            log.penalty,
            log.max_normal_deviation,
            log.max_trainable_norm
        );
        logs.push(log);
    }

    let to_matrix = |rows: std::ops::Range<usize>| {
        let count = rows.len();
        EmbeddingMatrix {
            count,
            dim,
            data: p.data[rows.start * dim..rows.end * dim].iter().map(|&x| x as f32).collect(),
        }
    };
    let emb = KgEmbeddings {
        model,
        entities: to_matrix(0..n_ent),
        relations: to_matrix(n_ent..n_ent + N_REL),
        normals: (model == KgModel::TransH).then(|| to_matrix(n_ent + N_REL..n_ent + 2 * N_REL)),
        frozen,
        degree,
        catalog: catalog.clone(),
    };
    Ok((emb, logs))
}

#[allow(clippy::too_many_arguments)]
fn epoch_log(
    p: &Params,
    model: KgModel,
    frozen: &[bool],
    epoch: usize,
    loss_sum: f64,
    pairs: usize,
    penalty: f64,
    failed: usize,
) -> KgEpochLog {
    let max_trainable_norm = (0..p.n_ent)
        .filter(|&e| !frozen[e])
        .map(|e| norm(p.row(e)))
        .fold(0.0, f64::max);
    let (mut dev, mut ortho) = (0.0f64, 0.0f64);
    if model == KgModel::TransH {
        let probe: Vec<usize> = (0..p.n_ent).step_by((p.n_ent / 64).max(1)).collect();
        for rel in RelationType::ALL {
            let w = p.row(p.normal_row(rel));
            dev = dev.max((norm(w) - 1.0).abs());
            for &e in &probe {
                let v = p.row(e);
                let s = dot(w, v);
                let proj: Vec<f64> = v.iter().zip(w).map(|(a, b)| a - s * b).collect();
                ortho = ortho.max(dot(w, &proj).abs());
            }
        }
    }
    KgEpochLog {
        epoch,
        loss: if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 },
        penalty,
        failed_negatives: failed,
        max_normal_deviation: dev,
        max_orthogonality_residual: ortho,
        max_trainable_norm,
    }
}
