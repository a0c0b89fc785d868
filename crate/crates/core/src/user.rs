//! User-model scores: the KG-embedding similarity between the query writer
//! and a candidate's authors, plus the Mean, Attention and Self-Citation
//! baselines.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::dense::DocEmbeddingStore;
use crate::kg::EntityKind;
use crate::kge::KgEmbeddings;
use crate::util::{cosine, dot, normalize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserSimilarity {
    #[default]
    Cosine,
    NegativeL2,
}

/// A user's history before the fit cutoff.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserContext {
    pub user_id: String,
    pub authored: Vec<usize>,
    pub coauthors: BTreeSet<String>,
}

/// Contexts of every author with at least one document published before
/// `before_year`.
pub fn build_user_contexts(corpus: &Corpus, before_year: i32) -> HashMap<String, UserContext> {
    let mut out: HashMap<String, UserContext> = HashMap::new();
    for (o, d) in corpus.docs().iter().enumerate() {
        if d.year >= before_year {
            continue;
        }
        for a in &d.author_ids {
            let ctx = out.entry(a.clone()).or_insert_with(|| UserContext {
                user_id: a.clone(),
                ..Default::default()
            });
            if ctx.authored.last() != Some(&o) {
                ctx.authored.push(o);
            }
            ctx.coauthors.extend(d.author_ids.iter().filter(|b| *b != a).cloned());
        }
    }
    out
}

/// Outcome of a user score before per-query floor filling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UserScore {
    Score(f64),
    /// The query user has no history: no personalization.
    UnknownUser,
    /// None of the candidate's authors is known.
    NoKnownAuthors,
}

/// Unknown users score 0 everywhere; candidates without known authors get
/// the smallest score among the other candidates of the query.
pub fn resolve_user_scores(scores: &[UserScore]) -> Vec<f64> {
    let floor = scores
        .iter()
        .filter_map(|s| match s {
            UserScore::Score(v) => Some(*v),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 0.0 };
    scores
        .iter()
        .map(|s| match s {
            UserScore::Score(v) => *v,
            UserScore::UnknownUser => 0.0,
            UserScore::NoKnownAuthors => floor,
        })
        .collect()
}

/// Per-query handle on the query writer's entity vector.
pub struct ParkScorer<'a> {
    emb: &'a KgEmbeddings,
    user: Option<Vec<f64>>,
    mode: AggregationMode,
    similarity: UserSimilarity,
}

impl<'a> ParkScorer<'a> {
    pub fn new(emb: &'a KgEmbeddings, query_user: &str, mode: AggregationMode, similarity: UserSimilarity) -> Self {
        let user = emb
            .catalog
            .ordinal(EntityKind::User, query_user)
            .filter(|&o| emb.is_known(o))
            .map(|o| emb.row(o));
        ParkScorer {
            emb,
            user,
            mode,
            similarity,
        }
    }

    pub fn has_user(&self) -> bool {
        self.user.is_some()
    }

    pub fn score<S: AsRef<str>>(&self, candidate_authors: &[S]) -> UserScore {
        let Some(u) = &self.user else {
            return UserScore::UnknownUser;
        };
        let sims: Vec<f64> = candidate_authors
            .iter()
            .filter_map(|a| self.emb.catalog.ordinal(EntityKind::User, a.as_ref()))
            .filter(|&o| self.emb.is_known(o))
            .map(|o| {
                let v = self.emb.row(o);
                match self.similarity {
                    UserSimilarity::Cosine => cosine(u, &v),
                    UserSimilarity::NegativeL2 => -u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(),
                }
            })
            .collect();
        if sims.is_empty() {
            return UserScore::NoKnownAuthors;
        }
        UserScore::Score(match self.mode {
            AggregationMode::Max => sims.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            AggregationMode::Mean => sims.iter().sum::<f64>() / sims.len() as f64,
        })
    }
}

pub fn park_user_score<S: AsRef<str>>(
    emb: &KgEmbeddings,
    query_user: &str,
    candidate_authors: &[S],
    mode: AggregationMode,
) -> UserScore {
    ParkScorer::new(emb, query_user, mode, UserSimilarity::Cosine).score(candidate_authors)
}

/// Normalized mean of the user's authored document rows; `None` when the
/// user has no usable history.
pub fn mean_user_vector(store: &DocEmbeddingStore, ctx: &UserContext) -> Option<Vec<f64>> {
    let rows: Vec<usize> = ctx.authored.iter().copied().filter(|&o| !store.empty[o]).collect();
    if rows.is_empty() {
        return None;
    }
    let mut acc = vec![0.0; store.dim()];
    for &o in &rows {
        for (a, x) in acc.iter_mut().zip(store.row(o)) {
            *a += *x as f64;
        }
    }
    let n = rows.len() as f64;
    acc.iter_mut().for_each(|x| *x /= n);
    (normalize(&mut acc) > 0.0).then_some(acc)
}

/// softmax_i(q . d_i / sqrt(dim))
pub fn attention_weights(q: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    let scale = 1.0 / (q.len() as f64).sqrt();
    let logits: Vec<f64> = rows.iter().map(|r| dot(q, r) * scale).collect();
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|x| x / z).collect()
}

/// Query-conditioned user vector: attention-weighted sum of authored rows,
/// normalized.
pub fn attention_user_vector(q: &[f64], store: &DocEmbeddingStore, ctx: &UserContext) -> Option<Vec<f64>> {
    let rows: Vec<Vec<f64>> = ctx.authored.iter().filter(|&&o| !store.empty[o]).map(|&o| store.row_f64(o)).collect();
    if rows.is_empty() {
        return None;
    }
    let alpha = attention_weights(q, &rows);
    let mut v = vec![0.0; store.dim()];
    for (a, r) in alpha.iter().zip(&rows) {
        for (x, y) in v.iter_mut().zip(r) {
            *x += a * y;
        }
    }
    (normalize(&mut v) > 0.0).then_some(v)
}

pub fn attention_user_score(q: &[f64], ctx: &UserContext, store: &DocEmbeddingStore, candidate: usize) -> UserScore {
    match attention_user_vector(q, store, ctx) {
        Some(u) => UserScore::Score(cosine(&u, &store.row_f64(candidate))),
        None => UserScore::UnknownUser,
    }
}

/// 1 when a candidate author is the query user or one of their co-authors.
pub fn self_citation_score<S: AsRef<str>>(user_id: &str, ctx: Option<&UserContext>, candidate_authors: &[S]) -> f64 {
    let hit = candidate_authors
        .iter()
        .any(|a| a.as_ref() == user_id || ctx.is_some_and(|c| c.coauthors.contains(a.as_ref())));
    if hit {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::dense::EmbeddingMatrix;

    fn doc(id: &str, authors: &[&str], year: i32) -> Document {
        Document {
            doc_id: id.into(),
            title: String::new(),
            abstract_text: String::new(),
            author_ids: authors.iter().map(|s| s.to_string()).collect(),
            venue_id: None,
            year,
            references: vec![],
        }
    }

    fn store(rows: &[&[f32]]) -> DocEmbeddingStore {
        let dim = rows[0].len();
        DocEmbeddingStore::from_matrix(EmbeddingMatrix {
            count: rows.len(),
            dim,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        })
    }

    #[test]
    fn contexts_respect_cutoff() {
        let (c, _) = Corpus::new(vec![doc("a", &["u1", "u2"], 2000), doc("b", &["u1"], 2001), doc("c", &["u1", "u3"], 2005)]).unwrap();
        let ctx = build_user_contexts(&c, 2003);
        assert_eq!(ctx["u1"].authored, vec![0, 1]);
        assert_eq!(ctx["u1"].coauthors.iter().collect::<Vec<_>>(), vec!["u2"]);
        assert!(!ctx.contains_key("u3"));
    }

    #[test]
    fn self_citation_examples() {
        let ctx = UserContext {
            user_id: "u1".into(),
            authored: vec![0],
            coauthors: ["u2".to_string()].into(),
        };
        assert_eq!(self_citation_score("u1", Some(&ctx), &["u1"]), 1.0);
        assert_eq!(self_citation_score("u1", Some(&ctx), &["x", "y"]), 0.0);
        assert_eq!(self_citation_score("u1", Some(&ctx), &["x", "u2"]), 1.0);
        assert_eq!(self_citation_score("u1", None, &["u2"]), 0.0);
    }

    #[test]
    fn mean_vector_examples() {
        let s = store(&[&[0.6, 0.8], &[0.6, 0.8], &[0.0, 0.0]]);
        let ctx = UserContext {
            authored: vec![0, 1],
            ..Default::default()
        };
        let v = mean_user_vector(&s, &ctx).unwrap();
        assert!((v[0] - 0.6f32 as f64 / s.row_f64(0)[0].hypot(s.row_f64(0)[1])).abs() < 1e-12);
        let empty = UserContext {
            authored: vec![2],
            ..Default::default()
        };
        assert!(mean_user_vector(&s, &empty).is_none());
    }

    #[test]
    fn attention_singleton_and_identical_rows() {
        let s = store(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let one = UserContext {
            authored: vec![1],
            ..Default::default()
        };
        assert_eq!(attention_weights(&[0.3, 0.2], &[vec![0.0, 1.0]]), vec![1.0]);
        let UserScore::Score(v) = attention_user_score(&[0.5, 0.5], &one, &s, 0) else { panic!() };
        assert!(v.abs() < 1e-15);
        let same = UserContext {
            authored: vec![0, 2],
            ..Default::default()
        };
        assert_eq!(attention_user_vector(&[-3.0, 7.0], &s, &same).unwrap(), vec![1.0, 0.0]);
        assert_eq!(attention_user_score(&[1.0, 0.0], &UserContext::default(), &s, 0), UserScore::UnknownUser);
    }

    #[test]
    fn floor_filling() {
        let s = [UserScore::Score(0.5), UserScore::NoKnownAuthors, UserScore::Score(-0.2)];
        assert_eq!(resolve_user_scores(&s), vec![0.5, -0.2, -0.2]);
        assert_eq!(resolve_user_scores(&[UserScore::UnknownUser; 3]), vec![0.0; 3]);
        assert_eq!(resolve_user_scores(&[UserScore::NoKnownAuthors]), vec![0.0]);
    }
}
