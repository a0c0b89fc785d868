//! Embedding matrices and their binary container.
//!
//! ```text
//! magic    4 bytes  "PKEM"
//! version  u32      1
//! count    u32
//! dim      u32
//! data     count x dim f32, row-major
//! ```
//!
//! All numbers little-endian. The same container holds document embeddings,
//! query embeddings, encoder tables and knowledge-graph embeddings.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const EMBEDDING_MAGIC: &[u8; 4] = b"PKEM";
pub const EMBEDDING_VERSION: u32 = 1;

/// Row-major `count x dim` matrix of f32.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub count: usize,
    pub dim: usize,
    pub data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn zeros(count: usize, dim: usize) -> Self {
        EmbeddingMatrix {
            count,
            dim,
            data: vec![0.0; count * dim],
        }
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_f64(&self, i: usize) -> Vec<f64> {
        crate::util::to_f64(self.row(i))
    }
}

pub fn write_embeddings(path: impl AsRef<Path>, m: &EmbeddingMatrix) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(EMBEDDING_MAGIC).map_err(io)?;
    w.write_all(&EMBEDDING_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(m.count as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(m.dim as u32).to_le_bytes()).map_err(io)?;
    for x in &m.data {
        w.write_all(&x.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let bad = |m: String| Error::Data(format!("{}: {m}", path.display()));
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut head = [0u8; 16];
    r.read_exact(&mut head).map_err(|e| Error::io(path, e))?;
    if &head[0..4] != EMBEDDING_MAGIC {
        return Err(bad("not an embedding file (bad magic)".into()));
    }
    let word = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != EMBEDDING_VERSION {
        return Err(bad(format!("unsupported embedding format version {version}")));
    }
    let (count, dim) = (word(8) as usize, word(12) as usize);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() != count * dim * 4 {
        return Err(bad(format!("header declares {count}x{dim} floats but payload has {} bytes", bytes.len())));
    }
    let data = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(EmbeddingMatrix { count, dim, data })
}

/// One L2-normalized row per document ordinal. Rows for documents with no
/// tokens are zero and flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct DocEmbeddingStore {
    pub matrix: EmbeddingMatrix,
    pub empty: Vec<bool>,
}

impl DocEmbeddingStore {
    pub fn from_matrix(matrix: EmbeddingMatrix) -> Self {
        let empty = (0..matrix.count).map(|i| matrix.row(i).iter().all(|&x| x == 0.0)).collect();
        DocEmbeddingStore { matrix, empty }
    }

    pub fn len(&self) -> usize {
        self.matrix.count
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.count == 0
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        self.matrix.row(i)
    }

    pub fn row_f64(&self, i: usize) -> Vec<f64> {
        self.matrix.row_f64(i)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_embeddings(path, &self.matrix)
    }
}

/// Loads externally computed embeddings, e.g. from a transformer encoder.
///
/// Rows are re-normalized when their norm is off by more than 1e-3; the
/// second value counts such rows.
pub fn load_precomputed_embeddings(path: impl AsRef<Path>, expected_count: Option<usize>) -> Result<(DocEmbeddingStore, usize)> {
    let path = path.as_ref();
    let mut m = read_embeddings(path)?;
    if let Some(n) = expected_count {
        if m.count != n {
            return Err(Error::Data(format!("{}: expected {n} embedding rows, found {}", path.display(), m.count)));
        }
    }
    let mut fixed = 0;
    for i in 0..m.count {
        let row = m.row_mut(i);
        let norm = row.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt();
        if norm > 0.0 && (norm - 1.0).abs() > 1e-3 {
            row.iter_mut().for_each(|x| *x = (*x as f64 / norm) as f32);
            fixed += 1;
        }
    }
    if fixed > 0 {
        log::warn!("{}: re-normalized {fixed} rows", path.display());
    }
    Ok((DocEmbeddingStore::from_matrix(m), fixed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_identical() {
        let m = EmbeddingMatrix {
            count: 3,
            dim: 2,
            data: vec![0.1, -0.2, f32::MIN_POSITIVE, 1e30, 0.0, -0.0],
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        write_embeddings(f.path(), &m).unwrap();
        let back = read_embeddings(f.path()).unwrap();
        assert_eq!(back.data.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), m.data.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn wrong_count_names_expected_and_found() {
        let f = tempfile::NamedTempFile::new().unwrap();
        write_embeddings(f.path(), &EmbeddingMatrix::zeros(4, 3)).unwrap();
        let err = load_precomputed_embeddings(f.path(), Some(5)).unwrap_err().to_string();
        assert!(err.contains("expected 5") && err.contains("found 4"), "{err}");
    }

    #[test]
    fn bad_magic_and_version() {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), b"XXXX\x01\0\0\0\0\0\0\0\0\0\0\0").unwrap();
        assert!(read_embeddings(f.path()).is_err());
        std::fs::write(f.path(), b"PKEM\x09\0\0\0\0\0\0\0\0\0\0\0").unwrap();
        assert!(read_embeddings(f.path()).unwrap_err().to_string().contains("version 9"));
    }

    #[test]
    fn unnormalized_rows_are_fixed_and_counted() {
        let m = EmbeddingMatrix {
            count: 4,
            dim: 2,
            data: vec![3.0, 4.0, 0.6, 0.8, 0.0, 0.0, 0.0, 2.0],
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        write_embeddings(f.path(), &m).unwrap();
        let (store, fixed) = load_precomputed_embeddings(f.path(), Some(4)).unwrap();
        assert_eq!(fixed, 2);
        assert_eq!(store.row(0), &[0.6, 0.8]);
        assert_eq!(store.row(3), &[0.0, 1.0]);
        assert_eq!(store.empty, vec![false, false, true, false]);
    }
}
