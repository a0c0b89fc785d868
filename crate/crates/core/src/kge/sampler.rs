use rand::Rng;

use crate::kg::{EntityCatalog, Triple};

/// Triples sorted by (head, relation, tail) for membership tests and
/// per-(head, relation) tail lookups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleSet(Vec<Triple>);

impl TripleSet {
    pub fn new(mut triples: Vec<Triple>) -> Self {
        triples.sort_unstable();
        triples.dedup();
        TripleSet(triples)
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.0.binary_search(t).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Triple] {
        &self.0
    }

    /// Known tails of `(head, relation, ?)`, ascending.
    pub fn tails(&self, head: u32, relation: crate::kg::RelationType) -> impl Iterator<Item = u32> + '_ {
        let start = self.0.partition_point(|t| (t.head, t.relation) < (head, relation));
        self.0[start..]
            .iter()
            .take_while(move |t| t.head == head && t.relation == relation)
            .map(|t| t.tail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Head,
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Negative {
    pub triple: Triple,
    pub side: Side,
}

pub const MAX_ATTEMPTS: usize = 100;

/// Replaces the head or the tail (each with probability 1/2, redrawn on every
/// attempt) by a uniform entity of the kind the relation requires. A
/// candidate that is a known triple is rejected. Returns `None` after
/// [`MAX_ATTEMPTS`] rejections.
pub fn sample_negative<R: Rng + ?Sized>(
    triple: &Triple,
    catalog: &EntityCatalog,
    known: &TripleSet,
    rng: &mut R,
) -> Option<Negative> {
    let (head_kind, tail_kind) = triple.relation.signature();
    let heads = catalog.range(head_kind);
    let tails = catalog.range(tail_kind);
    for _ in 0..MAX_ATTEMPTS {
        let side = if rng.gen_bool(0.5) { Side::Head } else { Side::Tail };
        let mut t = *triple;
        match side {
            Side::Head if !heads.is_empty() => t.head = rng.gen_range(heads.clone()) as u32,
            Side::Tail if !tails.is_empty() => t.tail = rng.gen_range(tails.clone()) as u32,
            _ => continue,
        }
        if !known.contains(&t) {
            debug_assert_eq!(catalog.kind(t.head), head_kind);
            debug_assert_eq!(catalog.kind(t.tail), tail_kind);
            return Some(Negative { triple: t, side });
        }
    }
    None
}
