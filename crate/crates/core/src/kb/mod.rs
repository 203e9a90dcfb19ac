//! Triple ingestion, vocabularies, splits, and relation metadata.
//!
//! Datasets are plain UTF-8 text, one `subject\trelation\tobject` fact per
//! line. Tokens are mapped to dense ids in first-appearance order (train,
//! then valid, then test), which makes id assignment reproducible.

mod domains;
mod vocab;

pub use domains::{classify_relations, compute_domains, RelationCategory, RelationDomains};
pub use vocab::Vocabulary;

use std::collections::HashSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected 3 tab-separated fields, found {found}")]
    Parse {
        path: String,
        line: usize,
        found: usize,
    },
    #[error("{path}:{line}: duplicate triple within split")]
    DuplicateTriple { path: String, line: usize },
    #[error("unknown {kind} token '{token}' under fixed vocabulary")]
    UnknownToken { kind: &'static str, token: String },
    #[error("duplicate token '{token}' in vocabulary")]
    DuplicateToken { token: String },
    #[error("triple ({0}, {1}, {2}) has an id outside vocabulary bounds")]
    IdOutOfBounds(usize, usize, usize),
    #[error("operation produced an empty triple store")]
    EmptyResult,
    #[error("inverse relation name '{name}' collides with an existing relation")]
    InverseNameClash { name: String },
}

/// A (subject, relation, object) fact with dense ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: usize,
    pub relation: usize,
    pub object: usize,
}

impl Triple {
    pub fn new(subject: usize, relation: usize, object: usize) -> Self {
        Triple { subject, relation, object }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

/// Immutable triple collection with train/valid/test splits and membership
/// indexes over each split.
///
/// Construction validates the no-duplicate-within-split invariant; duplicates
/// *across* splits are allowed (see [`cross_split_duplicates`](Self::cross_split_duplicates)).
#[derive(Clone, Debug)]
pub struct TripleStore {
    vocab: Vocabulary,
    train: Vec<Triple>,
    valid: Vec<Triple>,
    test: Vec<Triple>,
    train_set: HashSet<Triple>,
    valid_set: HashSet<Triple>,
    test_set: HashSet<Triple>,
    /// When inverse augmentation has run, `inverse_of[r]` is the partner id.
    inverse_of: Option<Vec<usize>>,
}

impl TripleStore {
    pub fn new(
        vocab: Vocabulary,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self, KbError> {
        for t in train.iter().chain(&valid).chain(&test) {
            if t.subject >= vocab.n_entities()
                || t.object >= vocab.n_entities()
                || t.relation >= vocab.n_relations()
            {
                return Err(KbError::IdOutOfBounds(t.subject, t.relation, t.object));
            }
        }
        let index = |triples: &[Triple]| -> Result<HashSet<Triple>, KbError> {
            let mut set = HashSet::with_capacity(triples.len());
            for (i, t) in triples.iter().enumerate() {
                if !set.insert(*t) {
                    return Err(KbError::DuplicateTriple {
                        path: "<memory>".to_string(),
                        line: i + 1,
                    });
                }
            }
            Ok(set)
        };
        let train_set = index(&train)?;
        let valid_set = index(&valid)?;
        let test_set = index(&test)?;
        Ok(TripleStore {
            vocab,
            train,
            valid,
            test,
            train_set,
            valid_set,
            test_set,
            inverse_of: None,
        })
    }

    /// Loads train/valid/test files, building the vocabulary incrementally in
    /// that order. `valid`/`test` may be absent.
    pub fn load(
        train: &Path,
        valid: Option<&Path>,
        test: Option<&Path>,
    ) -> Result<Self, KbError> {
        let mut vocab = Vocabulary::new();
        let train_t = load_triples(train, &mut vocab, false)?;
        let valid_t = match valid {
            Some(p) => load_triples(p, &mut vocab, false)?,
            None => Vec::new(),
        };
        let test_t = match test {
            Some(p) => load_triples(p, &mut vocab, false)?,
            None => Vec::new(),
        };
        TripleStore::new(vocab, train_t, valid_t, test_t)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn n_entities(&self) -> usize {
        self.vocab.n_entities()
    }

    pub fn n_relations(&self) -> usize {
        self.vocab.n_relations()
    }

    pub fn split(&self, split: Split) -> &[Triple] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn train(&self) -> &[Triple] {
        &self.train
    }

    pub fn valid(&self) -> &[Triple] {
        &self.valid
    }

    pub fn test(&self) -> &[Triple] {
        &self.test
    }

    pub fn n_triples(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    /// Membership over the union of all splits (corruption checks, filtered
    /// ranking).
    pub fn contains(&self, t: &Triple) -> bool {
        self.train_set.contains(t) || self.valid_set.contains(t) || self.test_set.contains(t)
    }

    pub fn in_split(&self, t: &Triple, split: Split) -> bool {
        match split {
            Split::Train => self.train_set.contains(t),
            Split::Valid => self.valid_set.contains(t),
            Split::Test => self.test_set.contains(t),
        }
    }

    /// Number of valid/test triples that also appear in an earlier split.
    /// Leakage is reported, not rejected; public benchmark splits contain it.
    pub fn cross_split_duplicates(&self) -> usize {
        let valid_dups = self.valid.iter().filter(|t| self.train_set.contains(t)).count();
        let test_dups = self
            .test
            .iter()
            .filter(|t| self.train_set.contains(t) || self.valid_set.contains(t))
            .count();
        valid_dups + test_dups
    }

    /// Per-relation triple counts over one split, indexed by relation id.
    pub fn relation_counts(&self, split: Split) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_relations()];
        for t in self.split(split) {
            counts[t.relation] += 1;
        }
        counts
    }

    /// The partner id of `r` under inverse augmentation, if any.
    pub fn inverse_of(&self, r: usize) -> Option<usize> {
        self.inverse_of.as_ref().map(|m| m[r])
    }

    pub fn is_inverse_augmented(&self) -> bool {
        self.inverse_of.is_some()
    }

    /// Keeps only triples (in all splits) whose relation has at least
    /// `min_count` training occurrences, and re-compacts both vocabularies
    /// preserving original id order.
    pub fn filter_frequent_relations(&self, min_count: usize) -> Result<TripleStore, KbError> {
        assert!(min_count >= 1, "min_count must be >= 1");
        let counts = self.relation_counts(Split::Train);
        let keep: Vec<bool> = counts.iter().map(|&c| c >= min_count).collect();

        let kept = |triples: &[Triple]| -> Vec<Triple> {
            triples.iter().copied().filter(|t| keep[t.relation]).collect()
        };
        let train = kept(&self.train);
        let valid = kept(&self.valid);
        let test = kept(&self.test);
        if train.is_empty() && valid.is_empty() && test.is_empty() {
            return Err(KbError::EmptyResult);
        }

        // Entities surviving in any remaining triple, original order.
        let mut entity_used = vec![false; self.n_entities()];
        for t in train.iter().chain(&valid).chain(&test) {
            entity_used[t.subject] = true;
            entity_used[t.object] = true;
        }
        let mut entity_map = vec![usize::MAX; self.n_entities()];
        let mut relation_map = vec![usize::MAX; self.n_relations()];
        let mut entities = Vec::new();
        let mut relations = Vec::new();
        for (id, used) in entity_used.iter().enumerate() {
            if *used {
                entity_map[id] = entities.len();
                entities.push(self.vocab.entity_name(id).to_string());
            }
        }
        for (id, kept) in keep.iter().enumerate() {
            if *kept {
                relation_map[id] = relations.len();
                relations.push(self.vocab.relation_name(id).to_string());
            }
        }
        let vocab = Vocabulary::from_names(&entities, &relations)?;
        let remap = |triples: Vec<Triple>| -> Vec<Triple> {
            triples
                .into_iter()
                .map(|t| Triple::new(entity_map[t.subject], relation_map[t.relation], entity_map[t.object]))
                .collect()
        };
        TripleStore::new(vocab, remap(train), remap(valid), remap(test))
    }

    /// Adds, for every relation `r`, a relation `r__inv` holding all reversed
    /// training triples, and records the pairing so rule search can skip
    /// trivial `r__inv ∘ r` patterns. Idempotent: an already-augmented store
    /// is returned unchanged.
    pub fn augment_inverses(&self) -> Result<TripleStore, KbError> {
        if self.inverse_of.is_some() {
            return Ok(self.clone());
        }
        let n_r = self.n_relations();
        let mut vocab = self.vocab.clone();
        let mut inverse_of = vec![usize::MAX; 2 * n_r];
        for r in 0..n_r {
            let name = format!("{}__inv", self.vocab.relation_name(r));
            if vocab.contains_relation_name(&name) {
                return Err(KbError::InverseNameClash { name });
            }
            let inv = vocab.intern_relation(&name);
            inverse_of[r] = inv;
            inverse_of[inv] = r;
        }
        let mut train = self.train.clone();
        train.extend(
            self.train
                .iter()
                .map(|t| Triple::new(t.object, inverse_of[t.relation], t.subject)),
        );
        let mut store = TripleStore::new(vocab, train, self.valid.clone(), self.test.clone())?;
        store.inverse_of = Some(inverse_of);
        Ok(store)
    }

    /// Re-emits one split in the triple file format.
    pub fn save_split(&self, split: Split, path: &Path) -> Result<(), KbError> {
        let file = fs::File::create(path).map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        for t in self.split(split) {
            writeln!(
                w,
                "{}\t{}\t{}",
                self.vocab.entity_name(t.subject),
                self.vocab.relation_name(t.relation),
                self.vocab.entity_name(t.object)
            )
            .map_err(|source| KbError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        w.flush().map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(())
    }
}

/// Parses one triple file into dense ids.
///
/// With `fixed_vocab`, unknown tokens are an error; otherwise they are
/// interned in first-appearance order (subject before object within a line).
/// A line that repeats an earlier triple of the same file is rejected.
pub fn load_triples(
    path: &Path,
    vocab: &mut Vocabulary,
    fixed_vocab: bool,
) -> Result<Vec<Triple>, KbError> {
    let text = fs::read_to_string(path).map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut triples = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(KbError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                found: fields.len(),
            });
        }
        let lookup_entity = |vocab: &mut Vocabulary, token: &str| -> Result<usize, KbError> {
            if fixed_vocab {
                vocab.entity_id(token).ok_or_else(|| KbError::UnknownToken {
                    kind: "entity",
                    token: token.to_string(),
                })
            } else {
                Ok(vocab.intern_entity(token))
            }
        };
        let subject = lookup_entity(vocab, fields[0])?;
        let relation = if fixed_vocab {
            vocab.relation_id(fields[1]).ok_or_else(|| KbError::UnknownToken {
                kind: "relation",
                token: fields[1].to_string(),
            })?
        } else {
            vocab.intern_relation(fields[1])
        };
        let object = lookup_entity(vocab, fields[2])?;
        let t = Triple::new(subject, relation, object);
        if !seen.insert(t) {
            return Err(KbError::DuplicateTriple {
                path: path.display().to_string(),
                line: i + 1,
            });
        }
        triples.push(t);
    }
    Ok(triples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn first_appearance_ordering() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "train.txt", "obama\tnationality\tusa\n");
        let mut vocab = Vocabulary::new();
        let triples = load_triples(&path, &mut vocab, false).unwrap();
        assert_eq!(triples, vec![Triple::new(0, 0, 1)]);
        assert_eq!(vocab.entity_names(), &["obama".to_string(), "usa".to_string()]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "bad.txt", "a\tr\tb\nbroken line\n");
        let mut vocab = Vocabulary::new();
        let err = load_triples(&path, &mut vocab, false).unwrap_err();
        match err {
            KbError::Parse { line, found, .. } => {
                assert_eq!(line, 2);
                assert_eq!(found, 1);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn duplicate_line_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "dup.txt", "a\tr\tb\na\tr\tb\n");
        let mut vocab = Vocabulary::new();
        let err = load_triples(&path, &mut vocab, false).unwrap_err();
        assert!(matches!(err, KbError::DuplicateTriple { line: 2, .. }));
    }

    #[test]
    fn unknown_token_under_fixed_vocab() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "t.txt", "a\tr\tb\n");
        let mut vocab = Vocabulary::from_names(&["a"], &["r"]).unwrap();
        let err = load_triples(&path, &mut vocab, true).unwrap_err();
        match err {
            KbError::UnknownToken { token, .. } => assert_eq!(token, "b"),
            other => panic!("unexpected error: {other}"),
        }
    }

    fn toy_store() -> TripleStore {
        // r0 appears 5 times in train, r1 twice.
        let dir = tempfile::tempdir().unwrap();
        let train = write_file(
            &dir,
            "train.txt",
            "a\tr0\tb\nc\tr0\tb\nd\tr0\te\na\tr0\te\nb\tr0\tc\na\tr1\tb\nb\tr1\tc\n",
        );
        let valid = write_file(&dir, "valid.txt", "c\tr0\te\n");
        let test = write_file(&dir, "test.txt", "d\tr1\ta\n");
        TripleStore::load(&train, Some(&valid), Some(&test)).unwrap()
    }

    #[test]
    fn filter_keeps_frequent_relations_and_recompacts() {
        let store = toy_store();
        let filtered = store.filter_frequent_relations(3).unwrap();
        assert_eq!(filtered.n_relations(), 1);
        assert_eq!(filtered.train().len(), 5);
        assert_eq!(filtered.valid().len(), 1);
        // test triple used r1 -> dropped
        assert_eq!(filtered.test().len(), 0);
        // ids are dense and consistent after recompaction
        for t in filtered.train() {
            assert!(t.subject < filtered.n_entities());
            assert!(t.relation < filtered.n_relations());
        }
        assert_eq!(filtered.vocab().relation_name(0), "r0");
    }

    #[test]
    fn filter_min_count_one_is_identity() {
        let store = toy_store();
        let filtered = store.filter_frequent_relations(1).unwrap();
        assert_eq!(filtered.train(), store.train());
        assert_eq!(filtered.n_entities(), store.n_entities());
        assert_eq!(filtered.n_relations(), store.n_relations());
    }

    #[test]
    fn filter_empty_result_is_error() {
        let store = toy_store();
        assert!(matches!(
            store.filter_frequent_relations(100),
            Err(KbError::EmptyResult)
        ));
    }

    #[test]
    fn relation_count_sum_equals_train_len() {
        let store = toy_store();
        let counts = store.relation_counts(Split::Train);
        assert_eq!(counts.iter().sum::<usize>(), store.train().len());
    }

    #[test]
    fn augment_inverses_adds_reversed_train_triples() {
        let store = toy_store();
        let aug = store.augment_inverses().unwrap();
        assert_eq!(aug.n_relations(), 2 * store.n_relations());
        assert_eq!(aug.train().len(), 2 * store.train().len());
        let r0 = aug.vocab().relation_id("r0").unwrap();
        let r0_inv = aug.vocab().relation_id("r0__inv").unwrap();
        assert_eq!(aug.inverse_of(r0), Some(r0_inv));
        assert_eq!(aug.inverse_of(r0_inv), Some(r0));
        let a = aug.vocab().entity_id("a").unwrap();
        let b = aug.vocab().entity_id("b").unwrap();
        assert!(aug.in_split(&Triple::new(b, r0_inv, a), Split::Train));
        // valid/test untouched
        assert_eq!(aug.valid().len(), store.valid().len());
    }

    #[test]
    fn augment_inverses_is_idempotent() {
        let store = toy_store();
        let once = store.augment_inverses().unwrap();
        let twice = once.augment_inverses().unwrap();
        assert_eq!(twice.n_relations(), once.n_relations());
        assert_eq!(twice.train().len(), once.train().len());
    }

    #[test]
    fn cross_split_duplicates_counted_not_rejected() {
        let mut vocab = Vocabulary::new();
        let a = vocab.intern_entity("a");
        let b = vocab.intern_entity("b");
        let r = vocab.intern_relation("r");
        let t = Triple::new(a, r, b);
        let store = TripleStore::new(vocab, vec![t], vec![t], vec![t]).unwrap();
        assert_eq!(store.cross_split_duplicates(), 2);
    }

    #[test]
    fn membership_index_consistent_with_lists() {
        let store = toy_store();
        for split in [Split::Train, Split::Valid, Split::Test] {
            for t in store.split(split) {
                assert!(store.in_split(t, split));
                assert!(store.contains(t));
            }
        }
        assert!(!store.contains(&Triple::new(0, 0, 0)));
    }
}
