//! Query construction from paper titles: lowercase, stopword removal and a
//! small rule-based inflectional stemmer.
//!
//! The stemmer only undoes plural `-s`/`-es`/`-ies` and `-ed`/`-ing`
//! inflections, restoring a final `e` or undoubling a consonant where the
//! rule table says so. It is iterated to a fixed point, so stemming is
//! idempotent by construction.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::Corpus;
use crate::error::{Error, Result};
use crate::lexical::tokenize;

/// Stopword list, version 1 (120 entries).
pub const STOPWORDS: [&str; 120] = [
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "him", "his", "how",
    "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my",
    "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our",
    "ours", "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that",
    "the", "their", "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when",
    "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
    "yours", "yourself",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

// Words the suffix rules would damage.
const PROTECTED: &[&str] = &[
    "always", "analysis", "anything", "basis", "bias", "bring", "during", "economics", "embed",
    "ethics", "everything", "genetics", "graphics", "hundred", "king", "linguistics",
    "mathematics", "morning", "news", "nothing", "physics", "politics", "ring", "robotics",
    "semantics", "series", "sing", "something", "species", "spring", "statistics", "string",
    "thing", "wing",
];

const IRREGULAR: &[(&str, &str)] = &[("used", "use"), ("uses", "use"), ("using", "use")];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn is_consonant(c: u8) -> bool {
    c.is_ascii_lowercase() && !is_vowel(c)
}

/// Repairs a stem after `-ed`/`-ing` removal.
fn repair(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") || stem.ends_with("ut") {
        return format!("{stem}e");
    }
    if n >= 2 && b[n - 1] == b[n - 2] && is_consonant(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    let last = b[n - 1];
    if last == b's' && n >= 2 && !matches!(b[n - 2], b's' | b'u' | b'i') {
        return format!("{stem}e");
    }
    if matches!(last, b'v' | b'u' | b'c') {
        return format!("{stem}e");
    }
    // short consonant-vowel-consonant stems: "cod" -> "code", "tun" -> "tune"
    if (3..=4).contains(&n)
        && is_consonant(b[n - 3])
        && is_vowel(b[n - 2])
        && is_consonant(last)
        && !matches!(last, b'w' | b'x' | b'y')
        && b[..n - 3].iter().all(|&c| is_consonant(c))
    {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|c| is_vowel(c) || c == b'y')
}

fn stem_once(word: &str) -> String {
    if word.len() <= 3 || !word.bytes().all(|c| c.is_ascii_lowercase()) {
        return word.to_string();
    }
    if PROTECTED.binary_search(&word).is_ok() {
        return word.to_string();
    }
    if let Some((_, to)) = IRREGULAR.iter().find(|(from, _)| *from == word) {
        return to.to_string();
    }
    if let Some(s) = word.strip_suffix("ies") {
        if s.len() >= 2 {
            return format!("{s}y");
        }
    }
    if let Some(s) = word.strip_suffix("ied") {
        if s.len() >= 2 {
            return format!("{s}y");
        }
    }
    if word.ends_with("sses") {
        return word[..word.len() - 2].to_string();
    }
    for suf in ["xes", "zes", "ches", "shes"] {
        if word.ends_with(suf) {
            return word[..word.len() - 2].to_string();
        }
    }
    if word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return word.to_string();
    }
    if let Some(s) = word.strip_suffix('s') {
        return s.to_string();
    }
    if word.ends_with("eed") {
        return word.to_string();
    }
    if let Some(s) = word.strip_suffix("ing") {
        if s.len() >= 3 && has_vowel(s) {
            return repair(s);
        }
        return word.to_string();
    }
    if let Some(s) = word.strip_suffix("ed") {
        if s.len() >= 3 && has_vowel(s) {
            return repair(s);
        }
    }
    word.to_string()
}

/// Inflectional stem of a lowercase token.
pub fn stem(word: &str) -> String {
    let mut cur = word.to_string();
    for _ in 0..=word.len() {
        let next = stem_once(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Turns a title into a keyword query. The result may be empty.
pub fn make_query(title: &str) -> String {
    tokenize(title)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .map(|t| stem(&t))
        .filter(|t| !is_stopword(t))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub query_id: String,
    pub user_id: String,
    pub text: String,
    pub year: i32,
    pub source_doc_id: Option<String>,
}

/// One query per document ordinal. The writer is the first author for whom
/// `has_history` holds, or the first author when none does. Documents without
/// authors or whose title reduces to nothing are skipped; the second value
/// counts them.
pub fn make_queries(corpus: &Corpus, ordinals: &[usize], has_history: impl Fn(&str) -> bool) -> (Vec<Query>, usize) {
    let mut skipped = 0;
    let mut out = Vec::with_capacity(ordinals.len());
    for &o in ordinals {
        let d = corpus.get(o);
        let text = make_query(&d.title);
        let writer = d.author_ids.iter().find(|a| has_history(a)).or(d.author_ids.first());
        match writer {
            Some(user) if !text.is_empty() => out.push(Query {
                query_id: format!("q_{}", d.doc_id),
                user_id: user.clone(),
                text,
                year: d.year,
                source_doc_id: Some(d.doc_id.clone()),
            }),
            _ => skipped += 1,
        }
    }
    (out, skipped)
}

/// Tab-separated: `query_id user_id year source_doc_id text`, with `-` for a
/// missing source document.
pub fn write_queries(path: impl AsRef<Path>, queries: &[Query]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for q in queries {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            q.query_id,
            q.user_id,
            q.year,
            q.source_doc_id.as_deref().unwrap_or("-"),
            q.text
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_queries(path: impl AsRef<Path>) -> Result<Vec<Query>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.splitn(5, '\t').collect();
        if cols.len() != 5 {
            return Err(Error::parse(path, i + 1, "expected 5 tab-separated columns"));
        }
        let year = cols[2]
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad year {:?}", cols[2])))?;
        out.push(Query {
            query_id: cols[0].to_string(),
            user_id: cols[1].to_string(),
            year,
            source_doc_id: (cols[3] != "-").then(|| cols[3].to_string()),
            text: cols[4].to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stopword_list_is_sorted_and_sized() {
        assert_eq!(STOPWORDS.len(), 120);
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
        assert!(PROTECTED.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn title_examples() {
        assert_eq!(make_query("The Retrieval of Documents"), "retrieval document");
        assert_eq!(make_query("the of and"), "");
        assert_eq!(make_query("parsing"), "parse");
    }

    #[test]
    fn stemmer_rule_table() {
        let cases = [
            ("documents", "document"),
            ("studies", "study"),
            ("applied", "apply"),
            ("classes", "class"),
            ("matches", "match"),
            ("focus", "focus"),
            ("running", "run"),
            ("embedding", "embed"),
            ("embedded", "embed"),
            ("created", "create"),
            ("normalizing", "normalize"),
            ("solving", "solve"),
            ("reducing", "reduce"),
            ("coding", "code"),
            ("learning", "learn"),
            ("based", "base"),
            ("proposed", "propose"),
            ("computing", "compute"),
            ("need", "need"),
            ("bm25", "bm25"),
            ("string", "string"),
            ("using", "use"),
        ];
        for (w, s) in cases {
            assert_eq!(stem(w), s, "stem({w})");
        }
    }

    proptest! {
        #[test]
        fn stem_is_idempotent(w in "[a-z]{1,12}") {
            let s = stem(&w);
            prop_assert_eq!(stem(&s), s);
        }

        #[test]
        fn make_query_is_idempotent(t in "[A-Za-z ,.-]{0,60}") {
            let q = make_query(&t);
            prop_assert_eq!(make_query(&q), q);
        }
    }
}
