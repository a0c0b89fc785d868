//! Synthetic academic corpus generator.
//!
//! Documents are drawn from a topic model with per-topic vocabularies and
//! per-subtopic focus words. Authors belong to affiliations, and an author's
//! topical interests follow their affiliation's topic most of the time. Teams
//! are assembled around a lead author from repeat collaborators, colleagues
//! at the same affiliation and other authors working on the topic. Citations
//! mix three behaviours:
//!
//! * social: the team's own earlier work or work from a team member's
//!   affiliation,
//! * topical: earlier same-topic (often same-subtopic) papers, preferentially
//!   the already well-cited ones,
//! * background: any earlier paper.
//!
//! Lexical, semantic, popularity and personalization signals therefore all
//! carry information about which papers a new paper cites.

use std::collections::HashSet;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;
use serde::{Deserialize, Serialize};

use super::{is_stopword, stem, Author, Corpus, Document};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_docs: usize,
    pub n_authors: usize,
    pub n_venues: usize,
    pub n_affiliations: usize,
    pub n_topics: usize,
    pub vocab_size: usize,
    pub year_start: i32,
    pub year_end: i32,
    pub subtopics_per_topic: usize,
    pub subtopic_focus_words: usize,
    pub title_len: [usize; 2],
    pub abstract_len: [usize; 2],
    pub references: [usize; 2],
    /// Share of the vocabulary that is topic-neutral background.
    pub background_share: f64,
    /// Probability that a content token is drawn from the background pool.
    pub background_rate: f64,
    /// Upper bound of a document's secondary-topic weight.
    pub secondary_topic_weight: f64,
    pub title_focus_rate: f64,
    pub abstract_focus_rate: f64,
    pub stopword_rate: f64,
    /// Spelling conventions. Each document writes in one of them, and a
    /// share of the topical vocabulary has a different surface form per
    /// convention, so related papers do not always use the same terms.
    pub dialects: usize,
    pub dialect_word_share: f64,
    /// Probability that a varied word is written in the document's own
    /// dialect rather than a random one.
    pub dialect_consistency: f64,
    pub social_citation_rate: f64,
    pub topical_citation_rate: f64,
    /// Within topical citations, probability of drawing from the subtopic
    /// rather than the whole topic.
    pub subtopic_citation_rate: f64,
    /// Subtopics of a topic sit on a ring. Within subtopic citations, the
    /// probability of citing a neighbouring subtopic instead of the own one.
    /// Neighbours share no vocabulary, so only a learned representation can
    /// relate them.
    pub neighbor_subtopic_rate: f64,
    /// Within topical citations, probability of drawing proportionally to
    /// citations received rather than uniformly.
    pub preferential_rate: f64,
    /// Draws from a social pool before settling for an off-topic paper.
    pub social_topic_tries: usize,
    /// Within social citations, probability of citing the team's own papers
    /// rather than the affiliation's.
    pub self_citation_share: f64,
    pub repeat_coauthor_rate: f64,
    pub coauthor_same_affiliation_rate: f64,
    pub affiliation_topic_rate: f64,
    pub home_venue_rate: f64,
    /// Linear growth of yearly output.
    pub growth: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_docs: 20_000,
            n_authors: 2_000,
            n_venues: 50,
            n_affiliations: 200,
            n_topics: 25,
            vocab_size: 8_000,
            year_start: 2000,
            year_end: 2019,
            subtopics_per_topic: 12,
            subtopic_focus_words: 15,
            title_len: [5, 12],
            abstract_len: [50, 150],
            references: [3, 15],
            background_share: 0.2,
            background_rate: 0.1,
            secondary_topic_weight: 0.2,
            title_focus_rate: 0.8,
            abstract_focus_rate: 0.35,
            stopword_rate: 0.25,
            dialects: 3,
            dialect_word_share: 0.5,
            dialect_consistency: 1.0,
            social_citation_rate: 0.35,
            topical_citation_rate: 0.55,
            subtopic_citation_rate: 0.8,
            neighbor_subtopic_rate: 0.5,
            preferential_rate: 0.5,
            social_topic_tries: 3,
            self_citation_share: 0.3,
            repeat_coauthor_rate: 0.3,
            coauthor_same_affiliation_rate: 0.5,
            affiliation_topic_rate: 0.8,
            home_venue_rate: 0.6,
            growth: 0.1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(format!("synth: {m}")));
        if self.n_docs < 2 {
            return err("n_docs must be at least 2");
        }
        if self.vocab_size == 0 {
            return err("vocabulary is empty");
        }
        if self.n_topics == 0 || self.subtopics_per_topic == 0 {
            return err("need at least one topic and one subtopic");
        }
        if self.topic_slice() == 0 {
            return err("vocabulary too small for the number of topics");
        }
        if self.dialects == 0 {
            return err("need at least one dialect");
        }
        if self.n_authors == 0 {
            return err("need at least one author");
        }
        if self.year_end < self.year_start {
            return err("year_end precedes year_start");
        }
        for (name, [lo, hi]) in [("title_len", self.title_len), ("abstract_len", self.abstract_len), ("references", self.references)] {
            if lo > hi {
                return err(&format!("{name} range is inverted"));
            }
        }
        if self.title_len[0] == 0 {
            return err("titles need at least one token");
        }
        Ok(())
    }

    fn background_words(&self) -> usize {
        ((self.vocab_size as f64) * self.background_share.clamp(0.0, 1.0)).floor() as usize
    }

    fn topic_slice(&self) -> usize {
        (self.vocab_size - self.background_words().min(self.vocab_size)) / self.n_topics.max(1)
    }
}

/// Generated corpus plus the latent variables behind it.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: Corpus,
    pub authors: Vec<Author>,
    /// Primary topic per document ordinal.
    pub doc_topics: Vec<usize>,
    /// Topic affinities per author, in author order.
    pub author_topics: Vec<Vec<usize>>,
    /// Topic per affiliation.
    pub affiliation_topics: Vec<usize>,
}

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "t", "v", "z", "br", "cr", "dr", "gr", "pl",
    "st", "tr", "th", "sh", "qu",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou", "ea"];
const CODAS: &[&str] = &["", "", "n", "r", "l", "m", "k", "x", "t"];
const TITLE_STOPWORDS: &[&str] = &["a", "and", "by", "for", "from", "in", "into", "of", "on", "the", "to", "with"];

fn vocabulary(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(NUCLEI.choose(rng).unwrap());
            w.push_str(CODAS.choose(rng).unwrap());
        }
        if w.len() >= 4 && stem(&w) == w && !is_stopword(&w) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 1.0))).expect("nonempty")
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct Lexicon {
    words: Vec<String>,
    background: std::ops::Range<usize>,
    topics: Vec<std::ops::Range<usize>>,
    topic_dist: Vec<WeightedIndex<f64>>,
    bg_dist: Option<WeightedIndex<f64>>,
    /// focus[t][s]: word indices
    focus: Vec<Vec<Vec<usize>>>,
    /// forms[w][dialect]: index of the surface form of word `w`
    forms: Vec<Vec<usize>>,
}

struct DocLatent {
    topic: usize,
    subtopic: usize,
    secondary: usize,
    secondary_weight: f64,
    dialect: usize,
    dialect_consistency: f64,
}

impl Lexicon {
    fn new(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Self {
        let bg = cfg.background_words();
        let varied: Vec<bool> = (0..cfg.vocab_size)
            .map(|w| w >= bg && cfg.dialects > 1 && rng.gen_bool(cfg.dialect_word_share.clamp(0.0, 1.0)))
            .collect();
        let extra = varied.iter().filter(|&&v| v).count() * (cfg.dialects - 1);
        let words = vocabulary(cfg.vocab_size + extra, rng);
        let mut next = cfg.vocab_size;
        let forms = varied
            .iter()
            .enumerate()
            .map(|(w, &v)| {
                let mut f = vec![w];
                for _ in 1..cfg.dialects {
                    if v {
                        f.push(next);
                        next += 1;
                    } else {
                        f.push(w);
                    }
                }
                f
            })
            .collect();
        let slice = cfg.topic_slice();
        let topics: Vec<_> = (0..cfg.n_topics).map(|t| bg + t * slice..bg + (t + 1) * slice).collect();
        let topic_dist = topics.iter().map(|r| zipf(r.len())).collect();
        let focus = topics
            .iter()
            .map(|r| {
                (0..cfg.subtopics_per_topic)
                    .map(|_| {
                        let k = cfg.subtopic_focus_words.clamp(1, r.len());
                        rand::seq::index::sample(rng, r.len(), k).into_iter().map(|i| r.start + i).collect()
                    })
                    .collect()
            })
            .collect();
        Lexicon {
            words,
            background: 0..bg,
            topics,
            topic_dist,
            bg_dist: (bg > 0).then(|| zipf(bg)),
            focus,
            forms,
        }
    }

    fn topic_word(&self, t: usize, lat: &DocLatent, rng: &mut ChaCha8Rng) -> &str {
        self.form(self.topics[t].start + self.topic_dist[t].sample(rng), lat, rng)
    }

    fn form(&self, w: usize, lat: &DocLatent, rng: &mut ChaCha8Rng) -> &str {
        let forms = &self.forms[w];
        let d = if rng.gen::<f64>() < lat.dialect_consistency {
            lat.dialect
        } else {
            rng.gen_range(0..forms.len())
        };
        &self.words[forms[d]]
    }

    fn content_word(&self, cfg: &SynthConfig, lat: &DocLatent, focus_rate: f64, rng: &mut ChaCha8Rng) -> &str {
        if let Some(bg) = &self.bg_dist {
            if rng.gen_bool(cfg.background_rate.clamp(0.0, 1.0)) {
                return &self.words[self.background.start + bg.sample(rng)];
            }
        }
        if rng.gen::<f64>() < lat.secondary_weight {
            return self.topic_word(lat.secondary, lat, rng);
        }
        if rng.gen::<f64>() < focus_rate {
            let f = &self.focus[lat.topic][lat.subtopic];
            return self.form(*f.choose(rng).unwrap(), lat, rng);
        }
        self.topic_word(lat.topic, lat, rng)
    }

    fn title(&self, cfg: &SynthConfig, lat: &DocLatent, rng: &mut ChaCha8Rng) -> String {
        let n = rng.gen_range(cfg.title_len[0]..=cfg.title_len[1]);
        let mut toks = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 && rng.gen_bool(cfg.stopword_rate.clamp(0.0, 1.0)) {
                toks.push(TITLE_STOPWORDS.choose(rng).unwrap().to_string());
            } else {
                toks.push(capitalize(self.content_word(cfg, lat, cfg.title_focus_rate, rng)));
            }
        }
        toks.join(" ")
    }

    fn abstract_text(&self, cfg: &SynthConfig, lat: &DocLatent, rng: &mut ChaCha8Rng) -> String {
        let n = rng.gen_range(cfg.abstract_len[0]..=cfg.abstract_len[1]);
        let mut toks = Vec::with_capacity(n);
        for _ in 0..n {
            if rng.gen_bool(cfg.stopword_rate.clamp(0.0, 1.0)) {
                toks.push(TITLE_STOPWORDS.choose(rng).unwrap().to_string());
            } else {
                toks.push(self.content_word(cfg, lat, cfg.abstract_focus_rate, rng).to_string());
            }
        }
        let mut s = toks.join(" ");
        s.push('.');
        s
    }
}

fn docs_per_year(cfg: &SynthConfig) -> Vec<usize> {
    let years = (cfg.year_end - cfg.year_start + 1) as usize;
    let w: Vec<f64> = (0..years).map(|i| 1.0 + cfg.growth.max(0.0) * i as f64).collect();
    let total: f64 = w.iter().sum();
    let mut counts: Vec<usize> = w.iter().map(|x| (x / total * cfg.n_docs as f64).floor() as usize).collect();
    let mut rest = cfg.n_docs - counts.iter().sum::<usize>();
    let mut i = years;
    while rest > 0 {
        i = if i == 0 { years - 1 } else { i - 1 };
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

/// Generates a corpus and author table. Pure function of `(cfg, seed)`.
pub fn generate_synthetic(cfg: &SynthConfig, seed: u64) -> Result<SynthOutput> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lex = Lexicon::new(cfg, &mut rng);
    let t_count = cfg.n_topics;

    // venues and affiliations
    let mut topic_venues = vec![Vec::new(); t_count];
    for v in 0..cfg.n_venues {
        topic_venues[v % t_count].push(v);
    }
    let pick_venue = |t: usize, rng: &mut ChaCha8Rng| -> Option<usize> {
        if cfg.n_venues == 0 {
            None
        } else if topic_venues[t].is_empty() {
            Some(rng.gen_range(0..cfg.n_venues))
        } else {
            topic_venues[t].choose(rng).copied()
        }
    };
    let aff_topic: Vec<usize> = (0..cfg.n_affiliations).map(|_| rng.gen_range(0..t_count)).collect();
    let aff_subtopic: Vec<usize> = (0..cfg.n_affiliations).map(|_| rng.gen_range(0..cfg.subtopics_per_topic)).collect();
    let aff_venue: Vec<Option<usize>> = aff_topic.iter().map(|&t| pick_venue(t, &mut rng)).collect();

    // authors
    let n_auth = cfg.n_authors;
    let span = (cfg.year_end - cfg.year_start + 1) as usize;
    let productivity = LogNormal::new(0.0, 0.8).unwrap();
    let mut author_aff: Vec<Option<usize>> = Vec::with_capacity(n_auth);
    let mut author_topics: Vec<Vec<usize>> = Vec::with_capacity(n_auth);
    let mut author_weight = Vec::with_capacity(n_auth);
    let mut author_start = Vec::with_capacity(n_auth);
    for _ in 0..n_auth {
        let aff = (cfg.n_affiliations > 0).then(|| rng.gen_range(0..cfg.n_affiliations));
        let k = match rng.gen::<f64>() {
            x if x < 0.5 => 1,
            x if x < 0.85 => 2,
            _ => 3,
        }
        .min(t_count);
        let mut topics = Vec::with_capacity(k);
        match aff {
            Some(a) if rng.gen_bool(cfg.affiliation_topic_rate.clamp(0.0, 1.0)) => topics.push(aff_topic[a]),
            _ => topics.push(rng.gen_range(0..t_count)),
        }
        while topics.len() < k {
            let t = rng.gen_range(0..t_count);
            if !topics.contains(&t) {
                topics.push(t);
            }
        }
        author_aff.push(aff);
        author_topics.push(topics);
        author_weight.push(productivity.sample(&mut rng));
        author_start.push(cfg.year_start + rng.gen_range(0..span.saturating_sub(2).max(1)) as i32);
    }
    let author_pick = WeightedIndex::new(&author_weight).expect("positive weights");
    let mut topic_authors = vec![Vec::new(); t_count];
    for (a, ts) in author_topics.iter().enumerate() {
        for &t in ts {
            topic_authors[t].push(a);
        }
    }
    let mut aff_members = vec![Vec::new(); cfg.n_affiliations];
    for (a, aff) in author_aff.iter().enumerate() {
        if let Some(f) = aff {
            aff_members[*f].push(a);
        }
    }

    // documents, in chronological order
    let per_year = docs_per_year(cfg);
    let n_sub = cfg.subtopics_per_topic;
    let mut docs: Vec<Document> = Vec::with_capacity(cfg.n_docs);
    let mut doc_topic: Vec<usize> = Vec::with_capacity(cfg.n_docs);
    let mut doc_subtopic: Vec<usize> = Vec::with_capacity(cfg.n_docs);
    let mut doc_authors: Vec<Vec<usize>> = Vec::with_capacity(cfg.n_docs);
    // citation pools only ever hold papers from earlier years
    let mut topic_urn: Vec<Vec<u32>> = vec![Vec::new(); t_count];
    let mut sub_urn: Vec<Vec<u32>> = vec![Vec::new(); t_count * n_sub];
    let mut topic_docs: Vec<Vec<u32>> = vec![Vec::new(); t_count];
    let mut sub_docs: Vec<Vec<u32>> = vec![Vec::new(); t_count * n_sub];
    let mut author_docs: Vec<Vec<u32>> = vec![Vec::new(); n_auth];
    let mut aff_docs: Vec<Vec<u32>> = vec![Vec::new(); cfg.n_affiliations];
    let mut coauthors: Vec<Vec<usize>> = vec![Vec::new(); n_auth];
    let mut earlier = 0usize;

    for (yi, &count) in per_year.iter().enumerate() {
        let year = cfg.year_start + yi as i32;
        let first_this_year = docs.len();
        for _ in 0..count {
            let ordinal = docs.len();
            let active = |a: usize| author_start[a] <= year;
            let lead = loop {
                let a = author_pick.sample(&mut rng);
                if active(a) {
                    break a;
                }
            };
            let topics = &author_topics[lead];
            let topic = if rng.gen_bool(0.6) { topics[0] } else { *topics.choose(&mut rng).unwrap() };
            let subtopic = match author_aff[lead] {
                Some(f) if aff_topic[f] == topic && rng.gen_bool(0.5) => aff_subtopic[f],
                _ => rng.gen_range(0..n_sub),
            };
            let (secondary, secondary_weight) = if t_count > 1 {
                let mut s = rng.gen_range(0..t_count - 1);
                if s >= topic {
                    s += 1;
                }
                (s, rng.gen::<f64>() * cfg.secondary_topic_weight)
            } else {
                (topic, 0.0)
            };
            let lat = DocLatent {
                topic,
                subtopic,
                secondary,
                secondary_weight,
                dialect: rng.gen_range(0..cfg.dialects),
                dialect_consistency: cfg.dialect_consistency,
            };

            let size = match rng.gen::<f64>() {
                x if x < 0.2 => 1,
                x if x < 0.55 => 2,
                x if x < 0.85 => 3,
                _ => 4,
            };
            let mut team = vec![lead];
            for _ in 0..20 {
                if team.len() >= size {
                    break;
                }
                let r = rng.gen::<f64>();
                let cand = if r < cfg.repeat_coauthor_rate && !coauthors[lead].is_empty() {
                    *coauthors[lead].choose(&mut rng).unwrap()
                } else if rng.gen_bool(cfg.coauthor_same_affiliation_rate.clamp(0.0, 1.0)) && author_aff[lead].is_some() {
                    *aff_members[author_aff[lead].unwrap()].choose(&mut rng).unwrap()
                } else if !topic_authors[topic].is_empty() {
                    *topic_authors[topic].choose(&mut rng).unwrap()
                } else {
                    rng.gen_range(0..n_auth)
                };
                if active(cand) && !team.contains(&cand) {
                    team.push(cand);
                }
            }

            let venue = match author_aff[lead].and_then(|f| aff_venue[f]) {
                Some(v) if v % t_count == topic && rng.gen_bool(cfg.home_venue_rate.clamp(0.0, 1.0)) => Some(v),
                _ => pick_venue(topic, &mut rng),
            };

            let mut refs: Vec<u32> = Vec::new();
            if earlier > 0 {
                let n_refs = rng.gen_range(cfg.references[0]..=cfg.references[1]).min(earlier);
                let mut attempts = 0;
                while refs.len() < n_refs && attempts < 20 * n_refs.max(1) {
                    attempts += 1;
                    let r = rng.gen::<f64>();
                    let social = r < cfg.social_citation_rate;
                    let topical = !social && r < cfg.social_citation_rate + cfg.topical_citation_rate;
                    let mut pick = None;
                    if social {
                        let member = *team.choose(&mut rng).unwrap();
                        let pool = if rng.gen_bool(cfg.self_citation_share.clamp(0.0, 1.0)) {
                            &author_docs[member]
                        } else {
                            match author_aff[member] {
                                Some(f) => &aff_docs[f],
                                None => &author_docs[member],
                            }
                        };
                        for _ in 0..cfg.social_topic_tries.max(1) {
                            pick = pool.choose(&mut rng).copied();
                            if pick.is_some_and(|p| doc_topic[p as usize] == topic) {
                                break;
                            }
                        }
                    }
                    if pick.is_none() && (social || topical) {
                        let sub = rng.gen_bool(cfg.subtopic_citation_rate.clamp(0.0, 1.0));
                        let s = if n_sub > 1 && rng.gen_bool(cfg.neighbor_subtopic_rate.clamp(0.0, 1.0)) {
                            if rng.gen_bool(0.5) {
                                (subtopic + 1) % n_sub
                            } else {
                                (subtopic + n_sub - 1) % n_sub
                            }
                        } else {
                            subtopic
                        };
                        let pool = match (sub, rng.gen_bool(cfg.preferential_rate.clamp(0.0, 1.0))) {
                            (true, true) => &sub_urn[topic * n_sub + s],
                            (true, false) => &sub_docs[topic * n_sub + s],
                            (false, true) => &topic_urn[topic],
                            (false, false) => &topic_docs[topic],
                        };
                        pick = pool.choose(&mut rng).copied();
                    }
                    let cited = pick.unwrap_or_else(|| rng.gen_range(0..earlier) as u32);
                    if !refs.contains(&cited) {
                        refs.push(cited);
                        let c = cited as usize;
                        topic_urn[doc_topic[c]].push(cited);
                        sub_urn[doc_topic[c] * n_sub + doc_subtopic[c]].push(cited);
                    }
                }
            }

            docs.push(Document {
                doc_id: format!("d{:06}", ordinal),
                title: lex.title(cfg, &lat, &mut rng),
                abstract_text: lex.abstract_text(cfg, &lat, &mut rng),
                author_ids: team.iter().map(|a| format!("u{:05}", a)).collect(),
                venue_id: venue.map(|v| format!("v{:03}", v)),
                year,
                references: refs.iter().map(|&r| format!("d{:06}", r)).collect(),
            });
            doc_topic.push(topic);
            doc_subtopic.push(subtopic);
            for &a in &team {
                for &b in &team {
                    if a != b && !coauthors[a].contains(&b) {
                        coauthors[a].push(b);
                    }
                }
            }
            doc_authors.push(team);
        }

        // year rollover: this year's papers become citable
        for o in first_this_year..docs.len() {
            let ou = o as u32;
            topic_urn[doc_topic[o]].push(ou);
            sub_urn[doc_topic[o] * n_sub + doc_subtopic[o]].push(ou);
            topic_docs[doc_topic[o]].push(ou);
            sub_docs[doc_topic[o] * n_sub + doc_subtopic[o]].push(ou);
            let mut affs: Vec<usize> = Vec::new();
            for &a in &doc_authors[o] {
                author_docs[a].push(ou);
                if let Some(f) = author_aff[a] {
                    if !affs.contains(&f) {
                        affs.push(f);
                    }
                }
            }
            for f in affs {
                aff_docs[f].push(ou);
            }
        }
        earlier = docs.len();
    }

    let authors = (0..n_auth)
        .map(|a| Author {
            author_id: format!("u{:05}", a),
            affiliation_id: author_aff[a].map(|f| format!("f{:03}", f)),
        })
        .collect();
    let (corpus, _) = Corpus::new(docs)?;
    Ok(SynthOutput {
        corpus,
        authors,
        doc_topics: doc_topic,
        author_topics,
        affiliation_topics: aff_topic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::make_query;

    fn small() -> SynthConfig {
        SynthConfig {
            n_docs: 800,
            n_authors: 120,
            n_venues: 6,
            n_affiliations: 12,
            n_topics: 4,
            vocab_size: 600,
            ..Default::default()
        }
    }

    fn serialize(out: &SynthOutput) -> String {
        let mut s = String::new();
        for d in out.corpus.docs() {
            s.push_str(&serde_json::to_string(d).unwrap());
            s.push('\n');
        }
        for a in &out.authors {
            s.push_str(&serde_json::to_string(a).unwrap());
            s.push('\n');
        }
        s
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_synthetic(&small(), 11).unwrap();
        let b = generate_synthetic(&small(), 11).unwrap();
        assert_eq!(serialize(&a), serialize(&b));
        let c = generate_synthetic(&small(), 12).unwrap();
        assert_ne!(serialize(&a), serialize(&c));
    }

    #[test]
    fn single_topic_shares_one_pool() {
        let cfg = SynthConfig {
            n_topics: 1,
            background_share: 0.0,
            ..small()
        };
        let out = generate_synthetic(&cfg, 3).unwrap();
        assert!(out.doc_topics.iter().all(|&t| t == 0));
        let lex_words: HashSet<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            Lexicon::new(&cfg, &mut rng).words.into_iter().collect()
        };
        for d in out.corpus.docs().iter().take(50) {
            for t in crate::lexical::tokenize(&d.text()) {
                assert!(lex_words.contains(&t) || TITLE_STOPWORDS.contains(&t.as_str()), "{t}");
            }
        }
    }

    #[test]
    fn config_errors() {
        assert!(generate_synthetic(&SynthConfig { n_docs: 1, ..small() }, 0).is_err());
        assert!(generate_synthetic(&SynthConfig { vocab_size: 0, ..small() }, 0).is_err());
    }

    #[test]
    fn structural_invariants() {
        let out = generate_synthetic(&small(), 5).unwrap();
        let c = &out.corpus;
        assert_eq!(c.len(), 800);
        for (o, d) in c.docs().iter().enumerate() {
            let n = d.title.split_whitespace().count();
            assert!((5..=12).contains(&n));
            let m = d.abstract_text.split_whitespace().count();
            assert!((50..=150).contains(&m));
            assert!(!d.author_ids.is_empty() && d.author_ids.len() <= 4);
            for r in c.reference_ordinals(o) {
                assert!(c.get(r).year < d.year, "citations point to earlier years");
            }
            assert!(!make_query(&d.title).is_empty());
        }
        for ts in &out.author_topics {
            assert!((1..=3).contains(&ts.len()));
        }
    }
}
