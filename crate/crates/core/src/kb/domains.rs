//! Relation argument domains and cardinality categories, computed from the
//! training split only.

use crate::bitset::Bitset;

use super::{Split, TripleStore};

/// Observed subject domain X_r and object domain Y_r per relation.
///
/// An entity is in X_r iff some training triple (e, r, ·) exists, and
/// symmetrically for Y_r. Relations absent from training have empty domains.
#[derive(Clone, Debug)]
pub struct RelationDomains {
    n_entities: usize,
    subjects: Vec<Bitset>,
    objects: Vec<Bitset>,
}

impl RelationDomains {
    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn n_relations(&self) -> usize {
        self.subjects.len()
    }

    pub fn subject_domain(&self, r: usize) -> &Bitset {
        &self.subjects[r]
    }

    pub fn object_domain(&self, r: usize) -> &Bitset {
        &self.objects[r]
    }

    /// True when relation `r` occurs in the training split.
    pub fn contains_relation(&self, r: usize) -> bool {
        !self.subjects[r].is_empty()
    }

    /// Ids of relations present in training data, ascending.
    pub fn relations(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.subjects.len()).filter(|&r| self.contains_relation(r))
    }
}

/// Scans training triples into per-relation argument domains.
pub fn compute_domains(store: &TripleStore) -> RelationDomains {
    let n_e = store.n_entities();
    let n_r = store.n_relations();
    let mut subjects = vec![Bitset::new(n_e); n_r];
    let mut objects = vec![Bitset::new(n_e); n_r];
    for t in store.train() {
        subjects[t.relation].insert(t.subject);
        objects[t.relation].insert(t.object);
    }
    RelationDomains {
        n_entities: n_e,
        subjects,
        objects,
    }
}

/// Cardinality category of a relation under the o/s, s/o threshold rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationCategory {
    OneToOne,
    OneToMany,
    ManyToOne,
    ManyToMany,
}

impl RelationCategory {
    pub fn label(&self) -> &'static str {
        match self {
            RelationCategory::OneToOne => "1-to-1",
            RelationCategory::OneToMany => "1-to-n",
            RelationCategory::ManyToOne => "n-to-1",
            RelationCategory::ManyToMany => "n-to-n",
        }
    }

    /// Index in 0..4, for table layouts.
    pub fn index(&self) -> usize {
        match self {
            RelationCategory::OneToOne => 0,
            RelationCategory::OneToMany => 1,
            RelationCategory::ManyToOne => 2,
            RelationCategory::ManyToMany => 3,
        }
    }

    pub const ALL: [RelationCategory; 4] = [
        RelationCategory::OneToOne,
        RelationCategory::OneToMany,
        RelationCategory::ManyToOne,
        RelationCategory::ManyToMany,
    ];
}

/// Classifies each relation by the average number of objects per subject
/// (o/s) and subjects per object (s/o) over training triples:
/// both below `threshold` → 1-to-1, only o/s at or above → 1-to-n, only s/o
/// at or above → n-to-1, both → n-to-n. Relations absent from training are
/// `None`. The conventional threshold is 1.5.
pub fn classify_relations(store: &TripleStore, threshold: f64) -> Vec<Option<RelationCategory>> {
    let domains = compute_domains(store);
    let counts = store.relation_counts(Split::Train);
    (0..store.n_relations())
        .map(|r| {
            if counts[r] == 0 {
                return None;
            }
            let objects_per_subject = counts[r] as f64 / domains.subject_domain(r).len() as f64;
            let subjects_per_object = counts[r] as f64 / domains.object_domain(r).len() as f64;
            Some(match (objects_per_subject < threshold, subjects_per_object < threshold) {
                (true, true) => RelationCategory::OneToOne,
                (false, true) => RelationCategory::OneToMany,
                (true, false) => RelationCategory::ManyToOne,
                (false, false) => RelationCategory::ManyToMany,
            })
        })
        .collect()
}
