//! Personalized academic retrieval: BM25 candidates, dense re-ranking, and
//! knowledge-graph user models fused into a single ranking.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod dense;
pub mod error;
pub mod eval;
pub mod graph;
pub mod kg;
pub mod kge;
pub mod lexical;
pub mod optim;
pub mod par;
pub mod pipeline;
pub mod user;
pub mod util;

pub use error::{Error, Result};
