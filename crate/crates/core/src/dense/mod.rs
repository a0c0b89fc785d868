//! Text embeddings: a trainable hashed bag-of-words encoder, the triplet
//! trainer, and the document embedding store shared with the KG embedder.

mod encoder;
mod loss;
mod store;
mod train;

pub use encoder::{encode_text, Encoded, HashedBowEncoder};
pub use loss::{triplet_loss, triplet_loss_grad, TripletGrad};
pub use store::{
    load_precomputed_embeddings, read_embeddings, write_embeddings, DocEmbeddingStore, EmbeddingMatrix, EMBEDDING_MAGIC,
    EMBEDDING_VERSION,
};
pub use train::{train_encoder, DenseTrainConfig, DenseTrainLog, TrainingPair};

use crate::corpus::Corpus;
use crate::par;

/// One row per document, in ordinal order.
pub fn embed_corpus(encoder: &HashedBowEncoder, corpus: &Corpus) -> DocEmbeddingStore {
    let rows = par::map(corpus.docs(), |d| encode_text(encoder, &d.text()).vector);
    let mut m = EmbeddingMatrix::zeros(rows.len(), encoder.dim());
    for (i, r) in rows.iter().enumerate() {
        for (dst, &x) in m.row_mut(i).iter_mut().zip(r) {
            *dst = x as f32;
        }
    }
    DocEmbeddingStore::from_matrix(m)
}

/// Dot product of two normalized vectors. Zero vectors score 0.
pub fn dense_score(q: &[f64], d: &[f64]) -> f64 {
    assert_eq!(q.len(), d.len(), "contract violation: dimension mismatch");
    crate::util::dot(q, d).clamp(-1.0, 1.0)
}
