//! First-stage lexical retrieval: tokenization, an in-memory inverted index,
//! BM25 scoring and top-k retrieval.

mod bm25;
mod index;
mod snapshot;

use serde::{Deserialize, Serialize};

pub use bm25::Bm25Params;
pub use index::{InvertedIndex, Posting};
pub use snapshot::{read_index, write_index, INDEX_MAGIC, INDEX_VERSION};

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Text analysis shared by the index, its queries and the dense encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analyzer {
    /// Apply the inflectional stemmer to every token. Queries are stemmed when
    /// they are built, so the index must be stemmed too for them to match.
    pub stem: bool,
}

impl Default for Analyzer {
    fn default() -> Self {
        Analyzer { stem: true }
    }
}

impl Analyzer {
    pub fn analyze(&self, text: &str) -> Vec<String> {
        let toks = tokenize(text);
        if self.stem {
            toks.into_iter().map(|t| crate::corpus::stem(&t)).collect()
        } else {
            toks
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("BM25, okapi!"), vec!["bm25", "okapi"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a-b c"), vec!["a", "b", "c"]);
    }

    #[test]
    fn analyzer_stems_when_asked() {
        assert_eq!(Analyzer { stem: true }.analyze("Parsing documents"), vec!["parse", "document"]);
        assert_eq!(Analyzer { stem: false }.analyze("Parsing documents"), vec!["parsing", "documents"]);
    }
}
