//! Precomputed census tables shipped with the crate, guarded by a SHA-256 digest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{census_tables, CensusTables, Mode};
use crate::error::{Error, Result};

/// Environment variable naming a directory that replaces the bundled data.
pub const DATA_DIR_ENV: &str = "MATCHABLE_DATA_DIR";

const FILE: &str = "census.json";
const DIGEST_FILE: &str = "census.json.sha256";

static EMBEDDED: &str = include_str!("../../data/census.json");
static EMBEDDED_DIGEST: &str = include_str!("../../data/census.json.sha256");

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct DataFile {
    version: u32,
    tables: Vec<CensusTables>,
}

/// A set of census tables keyed by `(mode, l)`.
#[derive(Debug, Clone, Default)]
pub struct DataStore {
    tables: BTreeMap<(Mode, u32), CensusTables>,
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl DataStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `text` after checking it against the expected hex digest.
    pub fn from_json(text: &str, expected_digest: &str) -> Result<Self> {
        let got = digest(text);
        if got != expected_digest.trim() {
            return Err(Error::Input(format!(
                "census data integrity check failed: digest {got}, expected {}",
                expected_digest.trim()
            )));
        }
        let file: DataFile = serde_json::from_str(text).map_err(|e| Error::Input(format!("census data: {e}")))?;
        let mut store = DataStore::new();
        for t in file.tables {
            store.insert(t);
        }
        Ok(store)
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            fs::read_to_string(dir.join(name)).map_err(|e| Error::Input(format!("{}: {e}", dir.join(name).display())))
        };
        Self::from_json(&read(FILE)?, &read(DIGEST_FILE)?)
    }

    /// Serialized form and its digest.
    pub fn to_json(&self) -> (String, String) {
        let file = DataFile {
            version: 1,
            tables: self.tables.values().cloned().collect(),
        };
        let text = serde_json::to_string_pretty(&file).expect("census data serializes") + "\n";
        let d = digest(&text);
        (text, d)
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        let (text, d) = self.to_json();
        fs::create_dir_all(dir).map_err(|e| Error::Input(format!("{}: {e}", dir.display())))?;
        let write = |name: &str, body: &str| {
            fs::write(dir.join(name), body).map_err(|e| Error::Input(format!("{}: {e}", dir.join(name).display())))
        };
        write(FILE, &text)?;
        write(DIGEST_FILE, &(d + "\n"))
    }

    pub fn insert(&mut self, t: CensusTables) {
        self.tables.insert((t.row.mode, t.row.ell), t);
    }

    pub fn get(&self, ell: u32, mode: Mode) -> Option<&CensusTables> {
        self.tables.get(&(mode, ell))
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CensusTables> {
        self.tables.values()
    }

    /// Stored tables when present (unless `recompute`), fresh computation otherwise.
    pub fn tables(&self, ell: u32, mode: Mode, recompute: bool) -> Result<CensusTables> {
        match self.get(ell, mode) {
            Some(t) if !recompute => Ok(t.clone()),
            _ => census_tables(ell, mode),
        }
    }
}

/// The bundled tables, or those in `$MATCHABLE_DATA_DIR` when it is set.
pub fn bundled() -> Result<DataStore> {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) => DataStore::load_dir(Path::new(&dir)),
        None => DataStore::from_json(EMBEDDED, EMBEDDED_DIGEST),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_checked() {
        let mut store = DataStore::new();
        store.insert(census_tables(5, Mode::Odd).unwrap());
        let (text, d) = store.to_json();
        let back = DataStore::from_json(&text, &d).unwrap();
        assert_eq!(back.get(5, Mode::Odd), store.get(5, Mode::Odd));
        let tampered = text.replacen("\"ell\": 5", "\"ell\": 6", 1);
        assert!(matches!(DataStore::from_json(&tampered, &d), Err(Error::Input(_))));
    }

    #[test]
    fn embedded_data_loads() {
        let store = DataStore::from_json(EMBEDDED, EMBEDDED_DIGEST).unwrap();
        for t in store.iter() {
            assert_eq!(t.row.total(), 1u128 << t.row.ell);
        }
    }
}
