use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encoder::{Forward, HashedBowEncoder};
use super::loss::triplet_loss_grad;
use crate::error::{Error, Result};
use crate::optim::{AdamW, AdamWConfig};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenseTrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub margin: f64,
    pub weight_decay: f64,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for DenseTrainConfig {
    fn default() -> Self {
        DenseTrainConfig {
            epochs: 3,
            lr: 1e-3,
            batch_size: 128,
            margin: 1.0,
            weight_decay: 0.01,
            seed: 7,
        }
    }
}

impl DenseTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::Config(format!(
                "dense batch_size must be at least 2 for in-batch negatives, got {}",
                self.batch_size
            )));
        }
        if !(self.margin > 0.0) {
            return Err(Error::Config("dense margin must be positive".into()));
        }
        if !(self.lr > 0.0) || !(self.weight_decay >= 0.0) {
            return Err(Error::Config("dense lr must be positive and weight_decay nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub query: String,
    pub doc: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DenseTrainLog {
    /// Mean per-query loss of each epoch, measured before the batch update.
    pub epoch_loss: Vec<f64>,
    pub steps: u64,
}

/// Trains the bucket table with the triplet loss, using the other positives
/// of a batch as negatives. A positive that is the same document as the
/// query's own positive is not used as its negative.
///
/// Gradients are computed per query in parallel and summed in batch order,
/// so the result does not depend on the thread count.
pub fn train_encoder(
    encoder: &mut HashedBowEncoder,
    pairs: &[TrainingPair],
    doc_texts: &[String],
    cfg: &DenseTrainConfig,
) -> Result<DenseTrainLog> {
    cfg.validate()?;
    if let Some(p) = pairs.iter().find(|p| p.doc >= doc_texts.len()) {
        return Err(Error::Data(format!("training pair points at doc ordinal {} of {}", p.doc, doc_texts.len())));
    }
    let mut log = DenseTrainLog::default();
    if cfg.epochs == 0 || pairs.is_empty() {
        return Ok(log);
    }
    let dim = encoder.dim();
    let mut opt = AdamW::new(
        AdamWConfig {
            lr: cfg.lr,
            weight_decay: cfg.weight_decay,
            ..AdamWConfig::default()
        },
        encoder.table.len(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut grad = vec![0.0; encoder.table.len()];
    let mut mark = vec![false; encoder.buckets()];

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let enc: &HashedBowEncoder = encoder;
            let fw: Vec<(Forward, Forward)> = par::map(batch, |&i| {
                let p = &pairs[i];
                (enc.forward(&p.query), enc.forward(&doc_texts[p.doc]))
            });
            let items: Vec<usize> = (0..batch.len()).collect();
            let grads = par::map(&items, |&i| {
                let own = pairs[batch[i]].doc;
                let neg_idx: Vec<usize> = (0..batch.len()).filter(|&j| j != i && pairs[batch[j]].doc != own).collect();
                let negs: Vec<&[f64]> = neg_idx.iter().map(|&j| fw[j].1.out.as_slice()).collect();
                let g = triplet_loss_grad(&fw[i].0.out, &fw[i].1.out, &negs, cfg.margin);
                (neg_idx, g)
            });

            let scale = 1.0 / batch.len() as f64;
            let mut g_q = vec![vec![0.0; dim]; batch.len()];
            let mut g_p = vec![vec![0.0; dim]; batch.len()];
            for (i, (neg_idx, g)) in grads.iter().enumerate() {
                total += g.loss;
                add_scaled(&mut g_q[i], &g.q, scale);
                add_scaled(&mut g_p[i], &g.pos, scale);
                for (&j, gn) in neg_idx.iter().zip(&g.negatives) {
                    add_scaled(&mut g_p[j], gn, scale);
                }
            }

            let mut touched = Vec::new();
            for (i, (fq, fp)) in fw.iter().enumerate() {
                encoder.backward(fq, &g_q[i], &mut grad, &mut touched, &mut mark);
                encoder.backward(fp, &g_p[i], &mut grad, &mut touched, &mut mark);
            }
            touched.sort_unstable();
            opt.step_rows(&mut encoder.table, &grad, &touched, dim);
            for &b in &touched {
                grad[b * dim..(b + 1) * dim].iter_mut().for_each(|x| *x = 0.0);
                mark[b] = false;
            }
        }
        let mean = total / pairs.len() as f64;
        log::info!("dense epoch {}: mean loss {:.6}", epoch + 1, mean);
        log.epoch_loss.push(mean);
    }
    log.steps = opt.steps();
    Ok(log)
}

fn add_scaled(acc: &mut [f64], g: &[f64], s: f64) {
    for (a, x) in acc.iter_mut().zip(g) {
        *a += s * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexical::Analyzer;

    fn toy() -> (Vec<TrainingPair>, Vec<String>) {
        let docs: Vec<String> = (0..12).map(|i| format!("topic{} word{} shared{}", i % 4, i, i % 3)).collect();
        let pairs = (0..48)
            .map(|i| TrainingPair {
                query: format!("topic{} word{}", i % 12 % 4, i % 12),
                doc: i % 12,
            })
            .collect();
        (pairs, docs)
    }

    #[test]
    fn rejects_small_batches() {
        let mut e = HashedBowEncoder::new(4, 64, Analyzer::default(), 0).unwrap();
        let (p, d) = toy();
        let cfg = DenseTrainConfig { batch_size: 1, ..Default::default() };
        assert!(matches!(train_encoder(&mut e, &p, &d, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn zero_epochs_is_identity() {
        let mut e = HashedBowEncoder::new(4, 64, Analyzer::default(), 0).unwrap();
        let before = e.clone();
        let (p, d) = toy();
        let cfg = DenseTrainConfig { epochs: 0, ..Default::default() };
        train_encoder(&mut e, &p, &d, &cfg).unwrap();
        assert_eq!(e, before);
    }

    #[test]
    fn loss_decreases_and_is_reproducible() {
        let (p, d) = toy();
        let cfg = DenseTrainConfig {
            epochs: 30,
            lr: 1e-2,
            batch_size: 8,
            ..Default::default()
        };
        let mut a = HashedBowEncoder::new(8, 256, Analyzer::default(), 3).unwrap();
        let log = train_encoder(&mut a, &p, &d, &cfg).unwrap();
        assert!(log.epoch_loss.last().unwrap() < log.epoch_loss.first().unwrap());
        let mut b = HashedBowEncoder::new(8, 256, Analyzer::default(), 3).unwrap();
        train_encoder(&mut b, &p, &d, &cfg).unwrap();
        assert_eq!(a.table(), b.table());
    }
}
