use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::store::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::lexical::Analyzer;
use crate::util::fnv1a;

/// Bag-of-words encoder over hashed token buckets: the text vector is the
/// L2-normalized mean of the bucket rows of its tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct HashedBowEncoder {
    dim: usize,
    buckets: usize,
    analyzer: Analyzer,
    /// `buckets x dim`, row-major
    pub(super) table: Vec<f64>,
}

/// Output of [`encode_text`]. `empty` marks text without tokens, whose vector
/// is all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub vector: Vec<f64>,
    pub empty: bool,
}

/// Intermediate values kept for back-propagation.
#[derive(Debug, Clone)]
pub(super) struct Forward {
    pub buckets: Vec<usize>,
    pub norm: f64,
    pub out: Vec<f64>,
}

impl HashedBowEncoder {
    /// Random N(0, 1/d) table.
    pub fn new(dim: usize, buckets: usize, analyzer: Analyzer, seed: u64) -> Result<Self> {
        if dim == 0 || buckets == 0 {
            return Err(Error::Config("encoder needs dim >= 1 and buckets >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0 / (dim as f64).sqrt()).unwrap();
        let table = (0..dim * buckets).map(|_| normal.sample(&mut rng)).collect();
        Ok(HashedBowEncoder {
            dim,
            buckets,
            analyzer,
            table,
        })
    }

    pub fn from_matrix(m: &EmbeddingMatrix, analyzer: Analyzer) -> Result<Self> {
        if m.dim == 0 || m.count == 0 {
            return Err(Error::Data("encoder table is empty".into()));
        }
        if m.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data("encoder table has non-finite entries".into()));
        }
        Ok(HashedBowEncoder {
            dim: m.dim,
            buckets: m.count,
            analyzer,
            table: m.data.iter().map(|&x| x as f64).collect(),
        })
    }

    pub fn to_matrix(&self) -> EmbeddingMatrix {
        EmbeddingMatrix {
            count: self.buckets,
            dim: self.dim,
            data: self.table.iter().map(|&x| x as f32).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn buckets(&self) -> usize {
        self.buckets
    }

    pub fn analyzer(&self) -> Analyzer {
        self.analyzer
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a(token.as_bytes()) % self.buckets as u64) as usize
    }

    fn row(&self, b: usize) -> &[f64] {
        &self.table[b * self.dim..(b + 1) * self.dim]
    }

    pub(super) fn forward(&self, text: &str) -> Forward {
        let buckets: Vec<usize> = crate::lexical::tokenize(text)
            .into_iter()
            .filter(|t| !crate::corpus::is_stopword(t))
            .map(|t| self.bucket(&if self.analyzer.stem { crate::corpus::stem(&t) } else { t }))
            .collect();
        let mut out = vec![0.0; self.dim];
        if buckets.is_empty() {
            return Forward { buckets, norm: 0.0, out };
        }
        for &b in &buckets {
            for (o, x) in out.iter_mut().zip(self.row(b)) {
                *o += x;
            }
        }
        let inv = 1.0 / buckets.len() as f64;
        out.iter_mut().for_each(|x| *x *= inv);
        let norm = crate::util::normalize(&mut out);
        Forward { buckets, norm, out }
    }

    /// Accumulates d(loss)/d(table) given d(loss)/d(output) into `grad`, and
    /// records touched bucket rows.
    pub(super) fn backward(&self, fw: &Forward, g_out: &[f64], grad: &mut [f64], touched: &mut Vec<usize>, mark: &mut [bool]) {
        if fw.norm == 0.0 {
            return;
        }
        // d normalize(m) / dm = (I - v v^T) / |m|
        let proj = crate::util::dot(g_out, &fw.out);
        let scale = 1.0 / (fw.norm * fw.buckets.len() as f64);
        let g_row: Vec<f64> = g_out.iter().zip(&fw.out).map(|(g, v)| (g - proj * v) * scale).collect();
        for &b in &fw.buckets {
            if !mark[b] {
                mark[b] = true;
                touched.push(b);
            }
            for (acc, g) in grad[b * self.dim..(b + 1) * self.dim].iter_mut().zip(&g_row) {
                *acc += g;
            }
        }
    }
}

/// Embeds a text. Empty token lists give the zero vector with `empty` set.
pub fn encode_text(encoder: &HashedBowEncoder, text: &str) -> Encoded {
    let fw = encoder.forward(text);
    Encoded {
        empty: fw.buckets.is_empty(),
        vector: fw.out,
    }
}
