//! Binary index snapshot.
//!
//! All integers little-endian:
//!
//! ```text
//! magic        4 bytes  "PKIX"
//! version      u32      1
//! doc_count    u32
//! avg_doc_len  f64      IEEE-754 bits
//! doc_lens     doc_count x u32
//! term_count   u32
//! term_count times, in lexicographic term order:
//!   term_len   u32
//!   term       term_len bytes of UTF-8
//!   n_postings u32
//!   n_postings times: doc u32, tf u32
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{InvertedIndex, Posting};
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &[u8; 4] = b"PKIX";
pub const INDEX_VERSION: u32 = 1;

pub fn write_index(path: impl AsRef<Path>, index: &InvertedIndex) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(INDEX_MAGIC).map_err(io)?;
    w.write_all(&INDEX_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(index.doc_count() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&index.avg_doc_len.to_le_bytes()).map_err(io)?;
    for &l in &index.doc_lens {
        w.write_all(&l.to_le_bytes()).map_err(io)?;
    }
    w.write_all(&(index.terms.len() as u32).to_le_bytes()).map_err(io)?;
    for (term, plist) in index.terms.iter().zip(&index.postings) {
        w.write_all(&(term.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(term.as_bytes()).map_err(io)?;
        w.write_all(&(plist.len() as u32).to_le_bytes()).map_err(io)?;
        for p in plist {
            w.write_all(&p.doc.to_le_bytes()).map_err(io)?;
            w.write_all(&p.tf.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

struct Reader<R> {
    inner: R,
    path: std::path::PathBuf,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| Error::io(&self.path, e))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
}

pub fn read_index(path: impl AsRef<Path>) -> Result<InvertedIndex> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        inner: BufReader::new(file),
        path: path.to_path_buf(),
    };
    let bad = |m: String| Error::Data(format!("{}: {m}", path.display()));
    if &r.bytes::<4>()? != INDEX_MAGIC {
        return Err(bad("not an index snapshot (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != INDEX_VERSION {
        return Err(bad(format!("unsupported index version {version}")));
    }
    let n = r.u32()? as usize;
    let avg = f64::from_le_bytes(r.bytes()?);
    let mut doc_lens = Vec::with_capacity(n);
    for _ in 0..n {
        doc_lens.push(r.u32()?);
    }
    let n_terms = r.u32()? as usize;
    let mut terms = Vec::with_capacity(n_terms);
    let mut postings = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let len = r.u32()? as usize;
        let mut buf = vec![0u8; len];
        r.inner.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
        let term = String::from_utf8(buf).map_err(|_| bad("term is not UTF-8".into()))?;
        let np = r.u32()? as usize;
        let mut plist = Vec::with_capacity(np);
        for _ in 0..np {
            let doc = r.u32()?;
            let tf = r.u32()?;
            if doc as usize >= n {
                return Err(bad(format!("posting for {term:?} points past doc_count")));
            }
            plist.push(Posting { doc, tf });
        }
        terms.push(term);
        postings.push(plist);
    }
    let index = InvertedIndex::from_parts(terms, postings, doc_lens);
    if index.avg_doc_len.to_bits() != avg.to_bits() {
        return Err(bad("stored average document length disagrees with lengths".into()));
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexical::tokenize;

    #[test]
    fn snapshot_round_trip_is_lossless() {
        let docs: Vec<Vec<String>> = ["alpha beta beta", "gamma", "beta gamma delta ünï"].iter().map(|d| tokenize(d)).collect();
        let idx = InvertedIndex::from_token_lists(&docs).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_index(f.path(), &idx).unwrap();
        assert_eq!(read_index(f.path()).unwrap(), idx);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), b"NOPE....").unwrap();
        assert!(read_index(f.path()).is_err());
    }
}
