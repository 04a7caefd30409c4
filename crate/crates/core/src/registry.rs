//! File-backed registry of creditmaps, keyed by canonical product ID.
//!
//! Layout under the registry root:
//!
//! ```text
//! <root>/objects/<sha256-of-canonical-id>.jsonld   the registered document, as ingested
//! <root>/index.tsv                                 canonical_id \t relative_path \t headline
//! <root>/.lock                                     held by the single writer
//! ```
//!
//! Every file is replaced by write-to-temp then rename, so readers never see
//! a partial document or index. The index can always be rebuilt from
//! `objects/`.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::jsonld::{parse_creditmap, ParseError, ParseMode, Warning, WarningCode};
use crate::model::{validate_creditmap, CreditMap, EntityId, IdScheme, ProductMeta, Violation};

pub const OBJECTS_DIR: &str = "objects";
pub const INDEX_FILE: &str = "index.tsv";
pub const LOCK_FILE: &str = ".lock";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("document does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error("creditmap failed validation ({} violation(s))", .0.len())]
    ValidationFailed(Vec<Violation>),
    #[error("{0} is already registered")]
    DuplicateProduct(EntityId),
    #[error("{0} is not registered")]
    NotFound(EntityId),
    #[error("{0}")]
    Storage(String),
}

impl RegistryError {
    pub fn code(&self) -> &'static str {
        match self {
            RegistryError::Parse(e) => e.code(),
            RegistryError::ValidationFailed(_) => "ValidationFailed",
            RegistryError::DuplicateProduct(_) => "DuplicateProduct",
            RegistryError::NotFound(_) => "NotFound",
            RegistryError::Storage(_) => "StorageError",
        }
    }
}

fn storage(context: impl std::fmt::Display, err: io::Error) -> RegistryError {
    RegistryError::Storage(format!("{context}: {err}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    /// Relative to the registry root, `/`-separated.
    pub path: String,
    pub headline: String,
}

/// Outcome of a successful ingest.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub id: EntityId,
    pub replaced: bool,
    pub warnings: Vec<Warning>,
}

/// Disagreement between `index.tsv` and `objects/`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Drift {
    /// Indexed, but the file is missing or does not parse to that ID.
    BrokenEntry { id: EntityId, path: String },
    /// Present in `objects/` but not indexed.
    Unindexed { path: String },
}

#[derive(Debug)]
pub struct Registry {
    root: PathBuf,
    index: BTreeMap<EntityId, IndexEntry>,
}

/// Lowercase hex SHA-256 of the canonical ID text.
pub fn object_digest(id: &EntityId) -> String {
    hex::encode(Sha256::digest(id.to_string().as_bytes()))
}

fn object_path(id: &EntityId) -> String {
    format!("{OBJECTS_DIR}/{}.jsonld", object_digest(id))
}

impl Registry {
    /// Opens a registry. A missing root is an empty registry; nothing is
    /// created until the first ingest. A missing index is rebuilt in memory
    /// from `objects/`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Registry, RegistryError> {
        let root = root.into();
        let mut reg = Registry { root, index: BTreeMap::new() };
        reg.reload()?;
        Ok(reg)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.index.contains_key(id)
    }

    pub fn index(&self) -> &BTreeMap<EntityId, IndexEntry> {
        &self.index
    }

    fn reload(&mut self) -> Result<(), RegistryError> {
        let index_path = self.root.join(INDEX_FILE);
        self.index = match fs::read_to_string(&index_path) {
            Ok(text) => parse_index(&text, &index_path)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => self.scan()?,
            Err(e) => return Err(storage(index_path.display(), e)),
        };
        Ok(())
    }

    /// Parses and validates `text`, then stores it under its product ID.
    ///
    /// With `force`, an existing document for the same product is replaced.
    pub fn ingest(&mut self, text: &[u8], force: bool) -> Result<Ingested, RegistryError> {
        let (map, mut warnings) = parse_creditmap(text, ParseMode::Lenient)?;
        let violations = validate_creditmap(&map);
        if !violations.is_empty() {
            return Err(RegistryError::ValidationFailed(violations));
        }
        let id = map.product.id.clone();
        if id.scheme() == IdScheme::Name {
            warnings.push(Warning {
                code: WarningCode::NoPersistentId,
                path: "@id".into(),
                message: format!("product has no persistent identifier; registered under {id}"),
            });
        }

        let _lock = self.lock()?;
        self.reload()?;
        let replaced = self.index.contains_key(&id);
        if replaced && !force {
            return Err(RegistryError::DuplicateProduct(id));
        }

        let rel = object_path(&id);
        fs::create_dir_all(self.root.join(OBJECTS_DIR))
            .map_err(|e| storage(self.root.join(OBJECTS_DIR).display(), e))?;
        write_atomic(&self.root.join(&rel), text)?;
        self.index.insert(
            id.clone(),
            IndexEntry { path: rel, headline: map.product.headline.clone() },
        );
        self.write_index()?;
        Ok(Ingested { id, replaced, warnings })
    }

    pub fn get(&self, id: &EntityId) -> Result<CreditMap, RegistryError> {
        let entry = self.index.get(id).ok_or_else(|| RegistryError::NotFound(id.clone()))?;
        let map = self.read_object(&entry.path)?;
        if &map.product.id != id {
            return Err(RegistryError::Storage(format!(
                "{} holds {} but is indexed as {id}; rebuild the index",
                entry.path, map.product.id
            )));
        }
        Ok(map)
    }

    /// All registered products, sorted by canonical ID text.
    pub fn list(&self) -> Result<Vec<(EntityId, ProductMeta)>, RegistryError> {
        self.index
            .keys()
            .map(|id| self.get(id).map(|m| (id.clone(), m.product)))
            .collect()
    }

    /// Every registered creditmap, in ID order.
    pub fn load_all(&self) -> Result<Vec<CreditMap>, RegistryError> {
        self.index.keys().map(|id| self.get(id)).collect()
    }

    /// Regenerates `index.tsv` from the contents of `objects/`.
    pub fn rebuild_index(&mut self) -> Result<(), RegistryError> {
        let _lock = self.lock()?;
        self.index = self.scan()?;
        self.write_index()
    }

    /// Compares the index with what `objects/` actually holds.
    pub fn check(&self) -> Result<Vec<Drift>, RegistryError> {
        let mut drift = Vec::new();
        for (id, entry) in &self.index {
            let ok = matches!(self.read_object(&entry.path), Ok(m) if &m.product.id == id);
            if !ok {
                drift.push(Drift::BrokenEntry { id: id.clone(), path: entry.path.clone() });
            }
        }
        let indexed: Vec<&str> = self.index.values().map(|e| e.path.as_str()).collect();
        for rel in self.object_files()? {
            if !indexed.contains(&rel.as_str()) {
                drift.push(Drift::Unindexed { path: rel });
            }
        }
        Ok(drift)
    }

    fn read_object(&self, rel: &str) -> Result<CreditMap, RegistryError> {
        let path = self.root.join(rel);
        let bytes = fs::read(&path).map_err(|e| storage(path.display(), e))?;
        let (map, _) = parse_creditmap(&bytes, ParseMode::Lenient)
            .map_err(|e| RegistryError::Storage(format!("{}: {e}", path.display())))?;
        Ok(map)
    }

    fn object_files(&self) -> Result<Vec<String>, RegistryError> {
        let dir = self.root.join(OBJECTS_DIR);
        let entries = match fs::read_dir(&dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(storage(dir.display(), e)),
        };
        let mut out = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| storage(dir.display(), e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.ends_with(".jsonld") && !name.starts_with('.') {
                out.push(format!("{OBJECTS_DIR}/{name}"));
            }
        }
        out.sort();
        Ok(out)
    }

    fn scan(&self) -> Result<BTreeMap<EntityId, IndexEntry>, RegistryError> {
        let mut index = BTreeMap::new();
        for rel in self.object_files()? {
            let map = self.read_object(&rel)?;
            if rel != object_path(&map.product.id) {
                return Err(RegistryError::Storage(format!(
                    "{rel} holds {} whose digest path is {}",
                    map.product.id,
                    object_path(&map.product.id)
                )));
            }
            index.insert(map.product.id, IndexEntry { path: rel, headline: map.product.headline });
        }
        Ok(index)
    }

    fn write_index(&self) -> Result<(), RegistryError> {
        let mut text = String::new();
        for (id, entry) in &self.index {
            let headline: String = entry
                .headline
                .chars()
                .map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c })
                .collect();
            text.push_str(&format!("{id}\t{}\t{headline}\n", entry.path));
        }
        write_atomic(&self.root.join(INDEX_FILE), text.as_bytes())
    }

    fn lock(&self) -> Result<LockGuard, RegistryError> {
        fs::create_dir_all(&self.root).map_err(|e| storage(self.root.display(), e))?;
        let path = self.root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(LockGuard { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(RegistryError::Storage(format!(
                "registry is locked by another writer ({})",
                path.display()
            ))),
            Err(e) => Err(storage(path.display(), e)),
        }
    }
}

struct LockGuard {
    path: PathBuf,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn parse_index(text: &str, path: &Path) -> Result<BTreeMap<EntityId, IndexEntry>, RegistryError> {
    let mut index = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = || RegistryError::Storage(format!("{}:{}: malformed index line", path.display(), n + 1));
        let mut fields = line.splitn(3, '\t');
        let (Some(id), Some(rel), Some(headline)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(bad());
        };
        let id = EntityId::parse(id).map_err(|_| bad())?;
        index.insert(id, IndexEntry { path: rel.to_string(), headline: headline.to_string() });
    }
    Ok(index)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RegistryError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(storage(path.display(), e));
    }
    Ok(())
}
