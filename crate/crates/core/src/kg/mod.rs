//! Academic knowledge graph: users, documents, venues and affiliations linked
//! by five user-centric relations.

mod io;
mod stats;

pub use io::{read_triples, write_triples};
pub use stats::{kg_stats, DegreeSummary, KgStats};

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::{Author, Corpus};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    User,
    Document,
    Venue,
    Affiliation,
}

impl EntityKind {
    pub const ALL: [EntityKind; 4] = [EntityKind::User, EntityKind::Document, EntityKind::Venue, EntityKind::Affiliation];

    pub fn name(self) -> &'static str {
        match self {
            EntityKind::User => "user",
            EntityKind::Document => "document",
            EntityKind::Venue => "venue",
            EntityKind::Affiliation => "affiliation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        EntityKind::ALL.into_iter().find(|k| k.name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    Wrote,
    Cited,
    InVenue,
    Affiliated,
    CoAuthor,
}

impl RelationType {
    pub const ALL: [RelationType; 5] = [
        RelationType::Wrote,
        RelationType::Cited,
        RelationType::InVenue,
        RelationType::Affiliated,
        RelationType::CoAuthor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationType::Wrote => "wrote",
            RelationType::Cited => "cited",
            RelationType::InVenue => "in_venue",
            RelationType::Affiliated => "affiliated",
            RelationType::CoAuthor => "co_author",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        RelationType::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_symmetric(self) -> bool {
        self == RelationType::CoAuthor
    }

    /// Required (head, tail) kinds.
    pub fn signature(self) -> (EntityKind, EntityKind) {
        use EntityKind::*;
        match self {
            RelationType::Wrote | RelationType::Cited => (User, Document),
            RelationType::InVenue => (User, Venue),
            RelationType::Affiliated => (User, Affiliation),
            RelationType::CoAuthor => (User, User),
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub head: u32,
    pub relation: RelationType,
    pub tail: u32,
}

impl Triple {
    pub fn new(head: u32, relation: RelationType, tail: u32) -> Self {
        Triple { head, relation, tail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgConfig {
    pub include_venue: bool,
    pub include_affiliation: bool,
    /// Keep (u, cited, d) when u also wrote d.
    pub include_self_citations: bool,
}

impl Default for KgConfig {
    fn default() -> Self {
        KgConfig {
            include_venue: true,
            include_affiliation: true,
            include_self_citations: false,
        }
    }
}

impl KgConfig {
    pub fn only_user() -> Self {
        KgConfig {
            include_venue: false,
            include_affiliation: false,
            ..Self::default()
        }
    }

    pub fn with_venue() -> Self {
        KgConfig {
            include_affiliation: false,
            ..Self::default()
        }
    }
}

/// Entities grouped by kind, in the order of [`EntityKind::ALL`], each
/// group sorted by external id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityCatalog {
    ids: Vec<String>,
    kinds: Vec<EntityKind>,
    ranges: [Range<usize>; 4],
    lookup: HashMap<(EntityKind, String), u32>,
}

impl EntityCatalog {
    pub fn from_groups(groups: [Vec<String>; 4]) -> Self {
        let mut ids = Vec::new();
        let mut kinds = Vec::new();
        let mut ranges: [Range<usize>; 4] = Default::default();
        let mut lookup = HashMap::new();
        for (kind, group) in EntityKind::ALL.into_iter().zip(groups) {
            let set: BTreeSet<String> = group.into_iter().collect();
            let start = ids.len();
            for id in set {
                lookup.insert((kind, id.clone()), ids.len() as u32);
                ids.push(id);
                kinds.push(kind);
            }
            ranges[kind.index()] = start..ids.len();
        }
        EntityCatalog { ids, kinds, ranges, lookup }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ordinal(&self, kind: EntityKind, id: &str) -> Option<u32> {
        self.lookup.get(&(kind, id.to_string())).copied()
    }

    pub fn kind(&self, ordinal: u32) -> EntityKind {
        self.kinds[ordinal as usize]
    }

    pub fn id(&self, ordinal: u32) -> &str {
        &self.ids[ordinal as usize]
    }

    pub fn range(&self, kind: EntityKind) -> Range<usize> {
        self.ranges[kind.index()].clone()
    }

    pub fn count(&self, kind: EntityKind) -> usize {
        self.ranges[kind.index()].len()
    }

    pub fn entities(&self) -> impl Iterator<Item = (u32, EntityKind, &str)> {
        self.ids.iter().zip(&self.kinds).enumerate().map(|(i, (id, k))| (i as u32, *k, id.as_str()))
    }

    fn require(&self, kind: EntityKind, id: &str) -> Result<u32> {
        self.ordinal(kind, id)
            .ok_or_else(|| Error::Data(format!("{kind} `{id}` is not in the entity catalog")))
    }
}

/// Catalogs every document and every author (from the author table and from
/// document bylines), plus venues and affiliations when enabled.
pub fn build_catalog(corpus: &Corpus, authors: &[Author], config: &KgConfig) -> EntityCatalog {
    let mut users: Vec<String> = authors.iter().map(|a| a.author_id.clone()).collect();
    users.extend(corpus.docs().iter().flat_map(|d| d.author_ids.iter().cloned()));
    let docs = corpus.docs().iter().map(|d| d.doc_id.clone()).collect();
    let venues = if config.include_venue {
        corpus.docs().iter().filter_map(|d| d.venue_id.clone()).collect()
    } else {
        Vec::new()
    };
    let affiliations = if config.include_affiliation {
        authors.iter().filter_map(|a| a.affiliation_id.clone()).collect()
    } else {
        Vec::new()
    };
    EntityCatalog::from_groups([users, docs, venues, affiliations])
}

/// Triples derived from documents published before `cutoff_year` (all
/// documents when `None`). Cited documents must also precede the cutoff, and
/// only users with a paper before it are linked to their affiliation, so
/// every KG variant covers the same users. Output is sorted and deduplicated.
pub fn build_kg(
    corpus: &Corpus,
    authors: &[Author],
    catalog: &EntityCatalog,
    config: &KgConfig,
    cutoff_year: Option<i32>,
) -> Result<Vec<Triple>> {
    let before = |year: i32| cutoff_year.is_none_or(|c| year < c);
    let ordinals: Vec<usize> = (0..corpus.len()).filter(|&i| before(corpus.get(i).year)).collect();

    let per_doc = par::map(&ordinals, |&o| -> Result<Vec<Triple>> {
        let doc = corpus.get(o);
        let mut out = Vec::new();
        let d = catalog.require(EntityKind::Document, &doc.doc_id)?;
        let mut users = Vec::with_capacity(doc.author_ids.len());
        for a in &doc.author_ids {
            users.push(catalog.require(EntityKind::User, a)?);
        }
        let venue = match (&doc.venue_id, config.include_venue) {
            (Some(v), true) => Some(catalog.require(EntityKind::Venue, v)?),
            _ => None,
        };
        let mut cited = Vec::new();
        for r in corpus.reference_ordinals(o) {
            let rd = corpus.get(r);
            if before(rd.year) {
                cited.push((r, catalog.require(EntityKind::Document, &rd.doc_id)?));
            }
        }
        for (i, &u) in users.iter().enumerate() {
            out.push(Triple::new(u, RelationType::Wrote, d));
            if let Some(v) = venue {
                out.push(Triple::new(u, RelationType::InVenue, v));
            }
            for (j, &other) in users.iter().enumerate() {
                if i != j && u != other {
                    out.push(Triple::new(u, RelationType::CoAuthor, other));
                }
            }
            for &(r, c) in &cited {
                if !config.include_self_citations && corpus.get(r).author_ids.contains(&doc.author_ids[i]) {
                    continue;
                }
                out.push(Triple::new(u, RelationType::Cited, c));
            }
        }
        Ok(out)
    });
    let mut triples = Vec::new();
    for t in per_doc {
        triples.extend(t?);
    }
    if config.include_affiliation {
        let active: HashSet<&str> = ordinals.iter().flat_map(|&o| corpus.get(o).author_ids.iter().map(String::as_str)).collect();
        for a in authors.iter().filter(|a| active.contains(a.author_id.as_str())) {
            if let Some(f) = &a.affiliation_id {
                let u = catalog.require(EntityKind::User, &a.author_id)?;
                triples.push(Triple::new(u, RelationType::Affiliated, catalog.require(EntityKind::Affiliation, f)?));
            }
        }
    }
    triples.sort_unstable();
    triples.dedup();
    Ok(triples)
}

/// Errors on the first triple whose endpoint kinds violate its relation.
pub fn check_kinds(triples: &[Triple], catalog: &EntityCatalog) -> Result<()> {
    for t in triples {
        let (h, tl) = t.relation.signature();
        if catalog.kind(t.head) != h || catalog.kind(t.tail) != tl {
            return Err(Error::Data(format!(
                "triple ({} {}, {}, {} {}) violates the {} signature",
                catalog.kind(t.head),
                catalog.id(t.head),
                t.relation,
                catalog.kind(t.tail),
                catalog.id(t.tail),
                t.relation
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::Document;

    pub fn doc(id: &str, authors: &[&str], venue: &str, year: i32, refs: &[&str]) -> Document {
        Document {
            doc_id: id.into(),
            title: format!("title {id}"),
            abstract_text: String::new(),
            author_ids: authors.iter().map(|s| s.to_string()).collect(),
            venue_id: Some(venue.into()),
            year,
            references: refs.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn author(id: &str, aff: Option<&str>) -> Author {
        Author {
            author_id: id.into(),
            affiliation_id: aff.map(Into::into),
        }
    }

    fn toy() -> (Corpus, Vec<Author>) {
        let (c, _) = Corpus::new(vec![
            doc("d1", &["u1", "u2"], "v1", 2000, &[]),
            doc("d2", &["u1"], "v1", 2001, &["d1"]),
            doc("d3", &["u3"], "v2", 2002, &["d1", "d2"]),
            doc("d4", &["u3", "u1"], "v2", 2010, &["d3"]),
        ])
        .unwrap();
        let a = vec![author("u1", Some("f1")), author("u2", Some("f2")), author("u3", None), author("u4", Some("f1"))];
        (c, a)
    }

    fn has(triples: &[Triple], cat: &EntityCatalog, h: (EntityKind, &str), r: RelationType, t: (EntityKind, &str)) -> bool {
        let tr = Triple::new(cat.ordinal(h.0, h.1).unwrap(), r, cat.ordinal(t.0, t.1).unwrap());
        triples.binary_search(&tr).is_ok()
    }

    #[test]
    fn catalog_counts() {
        let (c, _) = Corpus::new(vec![doc("d1", &["u1", "u2"], "v1", 2000, &[]), doc("d2", &["u3"], "v1", 2001, &[])]).unwrap();
        let a = vec![author("u1", Some("f1")), author("u2", Some("f2")), author("u3", Some("f1"))];
        let cat = build_catalog(&c, &a, &KgConfig::default());
        assert_eq!(cat.len(), 8);
        let only = build_catalog(&c, &a, &KgConfig::only_user());
        assert_eq!(only.len(), 5);
        assert_eq!(only.count(EntityKind::Venue) + only.count(EntityKind::Affiliation), 0);
        assert_eq!(build_catalog(&c, &a, &KgConfig::default()), cat);
        for (o, k, id) in cat.entities() {
            assert_eq!(cat.ordinal(k, id), Some(o));
        }
    }

    #[test]
    fn relation_definitions() {
        use EntityKind::*;
        use RelationType::*;
        let (c, a) = toy();
        let cat = build_catalog(&c, &a, &KgConfig::default());
        let t = build_kg(&c, &a, &cat, &KgConfig::default(), Some(2005)).unwrap();
        check_kinds(&t, &cat).unwrap();
        assert!(has(&t, &cat, (User, "u1"), Wrote, (Document, "d1")));
        assert!(has(&t, &cat, (User, "u2"), Wrote, (Document, "d1")));
        assert!(has(&t, &cat, (User, "u1"), CoAuthor, (User, "u2")));
        assert!(has(&t, &cat, (User, "u2"), CoAuthor, (User, "u1")));
        assert!(has(&t, &cat, (User, "u3"), Cited, (Document, "d2")));
        // u1 cites its own d1 from d2: excluded by default
        assert!(!has(&t, &cat, (User, "u1"), Cited, (Document, "d1")));
        let n_venue = t.iter().filter(|x| x.relation == InVenue && cat.id(x.head) == "u1").count();
        assert_eq!(n_venue, 1);
        assert!(has(&t, &cat, (User, "u1"), Affiliated, (Affiliation, "f1")));
        // u4 never published, so nothing places it in the graph
        assert!(!has(&t, &cat, (User, "u4"), Affiliated, (Affiliation, "f1")));
        // d4 is past the cutoff
        assert!(!has(&t, &cat, (User, "u3"), CoAuthor, (User, "u1")));
        let d4 = cat.ordinal(Document, "d4").unwrap();
        assert!(t.iter().all(|x| x.tail != d4));

        let with_self = KgConfig {
            include_self_citations: true,
            ..KgConfig::default()
        };
        let t2 = build_kg(&c, &a, &build_catalog(&c, &a, &with_self), &with_self, Some(2005)).unwrap();
        assert_eq!(t2.len(), t.len() + 1);
    }

    #[test]
    fn ablation_configs_nest() {
        let (c, a) = toy();
        let full_cat = build_catalog(&c, &a, &KgConfig::default());
        let named = |cfg: KgConfig| -> BTreeSet<(String, RelationType, String)> {
            let cat = build_catalog(&c, &a, &cfg);
            build_kg(&c, &a, &cat, &cfg, None)
                .unwrap()
                .into_iter()
                .map(|t| (cat.id(t.head).to_string(), t.relation, cat.id(t.tail).to_string()))
                .collect()
        };
        let only = named(KgConfig::only_user());
        let venue = named(KgConfig::with_venue());
        let full = named(KgConfig::default());
        assert!(only.is_subset(&venue) && venue.is_subset(&full));
        assert!(only.len() < venue.len() && venue.len() < full.len());
        assert!(full_cat.len() > build_catalog(&c, &a, &KgConfig::only_user()).len());
    }

    #[test]
    fn unresolvable_endpoint_is_an_error() {
        let (c, a) = toy();
        let cat = build_catalog(&c, &a, &KgConfig::only_user());
        assert!(build_kg(&c, &a, &cat, &KgConfig::default(), None).is_err());
    }

    #[test]
    fn coauthor_is_symmetric_on_synthetic_data() {
        let cfg = crate::corpus::SynthConfig {
            n_docs: 400,
            n_authors: 80,
            ..Default::default()
        };
        let out = crate::corpus::generate_synthetic(&cfg, 3).unwrap();
        let cat = build_catalog(&out.corpus, &out.authors, &KgConfig::default());
        let t = build_kg(&out.corpus, &out.authors, &cat, &KgConfig::default(), None).unwrap();
        check_kinds(&t, &cat).unwrap();
        for x in t.iter().filter(|x| x.relation == RelationType::CoAuthor) {
            assert_ne!(x.head, x.tail);
            assert!(t.binary_search(&Triple::new(x.tail, RelationType::CoAuthor, x.head)).is_ok());
        }
        assert_eq!(kg_stats(&t, &cat).per_relation[RelationType::CoAuthor.index()] % 2, 0);
    }
}
