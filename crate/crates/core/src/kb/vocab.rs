//! Entity and relation vocabularies with dense, stable integer ids.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::KbError;

/// Maps entity and relation tokens to dense 0-based ids.
///
/// Ids are assigned in first-appearance order and are stable across
/// save/load: the vocabulary export format is one token per line, where the
/// line number (0-based) is the id.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    entities: Vec<String>,
    relations: Vec<String>,
    entity_index: HashMap<String, usize>,
    relation_index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from explicit token lists, rejecting duplicates.
    pub fn from_names<S: AsRef<str>>(entities: &[S], relations: &[S]) -> Result<Self, KbError> {
        let mut vocab = Vocabulary::new();
        for name in entities {
            let name = name.as_ref();
            if vocab.entity_index.contains_key(name) {
                return Err(KbError::DuplicateToken { token: name.to_string() });
            }
            vocab.intern_entity(name);
        }
        for name in relations {
            let name = name.as_ref();
            if vocab.relation_index.contains_key(name) {
                return Err(KbError::DuplicateToken { token: name.to_string() });
            }
            vocab.intern_relation(name);
        }
        Ok(vocab)
    }

    pub fn n_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    /// Returns the id for `name`, interning it if unseen.
    pub fn intern_entity(&mut self, name: &str) -> usize {
        if let Some(&id) = self.entity_index.get(name) {
            return id;
        }
        let id = self.entities.len();
        self.entities.push(name.to_string());
        self.entity_index.insert(name.to_string(), id);
        id
    }

    pub fn intern_relation(&mut self, name: &str) -> usize {
        if let Some(&id) = self.relation_index.get(name) {
            return id;
        }
        let id = self.relations.len();
        self.relations.push(name.to_string());
        self.relation_index.insert(name.to_string(), id);
        id
    }

    pub fn entity_id(&self, name: &str) -> Option<usize> {
        self.entity_index.get(name).copied()
    }

    pub fn relation_id(&self, name: &str) -> Option<usize> {
        self.relation_index.get(name).copied()
    }

    pub fn entity_name(&self, id: usize) -> &str {
        &self.entities[id]
    }

    pub fn relation_name(&self, id: usize) -> &str {
        &self.relations[id]
    }

    pub fn entity_names(&self) -> &[String] {
        &self.entities
    }

    pub fn relation_names(&self) -> &[String] {
        &self.relations
    }

    pub fn contains_relation_name(&self, name: &str) -> bool {
        self.relation_index.contains_key(name)
    }

    /// Writes one token per line; the line number is the id.
    pub fn save_entities(&self, path: &Path) -> Result<(), KbError> {
        save_tokens(path, &self.entities)
    }

    pub fn save_relations(&self, path: &Path) -> Result<(), KbError> {
        save_tokens(path, &self.relations)
    }

    /// Reads a vocabulary export written by [`save_entities`](Self::save_entities).
    pub fn load_tokens(path: &Path) -> Result<Vec<String>, KbError> {
        let text = fs::read_to_string(path).map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(text.lines().map(|l| l.to_string()).collect())
    }
}

fn save_tokens(path: &Path, tokens: &[String]) -> Result<(), KbError> {
    let file = fs::File::create(path).map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    for token in tokens {
        writeln!(w, "{token}").map_err(|source| KbError::Io {
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
