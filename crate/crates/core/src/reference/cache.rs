use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{OperatorKind, ReferenceDistribution, ReferenceKey};
use crate::digit::DigitPmf;
use crate::error::{Error, Result};

pub const CACHE_VERSION: u32 = 1;

/// Entry fields in canonical order, checksum excluded.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct EntryBody {
    operator: OperatorKind,
    entries_per_vector: usize,
    observed_len_bucket: usize,
    pmf: [f64; 9],
    calibration_floor: f64,
    mc_draws: usize,
    calibration_samples: usize,
    seed: u64,
    #[serde(default)]
    skipped_draws: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    #[serde(flatten)]
    body: EntryBody,
    checksum: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    entries: Vec<Entry>,
}

impl EntryBody {
    fn checksum(&self) -> String {
        let canonical = serde_json::to_string(self).expect("entry serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn from_reference(r: &ReferenceDistribution) -> Result<Self> {
        let key = r.key()?;
        Ok(EntryBody {
            operator: key.operator,
            entries_per_vector: key.entries_per_vector,
            observed_len_bucket: key.observed_len_bucket,
            pmf: *r.pmf.probs(),
            calibration_floor: r.floor()?,
            mc_draws: r.mc_draws,
            calibration_samples: r.calibration_samples,
            seed: r.seed,
            skipped_draws: r.skipped_draws,
        })
    }

    fn into_reference(self) -> Result<ReferenceDistribution> {
        Ok(ReferenceDistribution {
            operator: self.operator,
            entries_per_vector: self.entries_per_vector,
            observed_len_bucket: Some(self.observed_len_bucket),
            pmf: DigitPmf::new(self.pmf, 1e-9)?,
            calibration_floor: Some(self.calibration_floor),
            mc_draws: self.mc_draws,
            calibration_samples: self.calibration_samples,
            seed: self.seed,
            skipped_draws: self.skipped_draws,
        })
    }
}

/// Calibrated references persisted as a single JSON document.
#[derive(Debug, Clone, Default)]
pub struct ReferenceCache {
    path: Option<PathBuf>,
    entries: BTreeMap<ReferenceKey, ReferenceDistribution>,
}

impl ReferenceCache {
    /// Purely in-memory cache.
    pub fn in_memory() -> Self {
        ReferenceCache::default()
    }

    /// Opens `path`; a missing file is an empty cache.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let entries = if path.exists() {
            read_entries(&path)?
        } else {
            BTreeMap::new()
        };
        Ok(ReferenceCache {
            path: Some(path),
            entries,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &ReferenceKey) -> Result<&ReferenceDistribution> {
        self.entries
            .get(key)
            .ok_or_else(|| Error::CacheMiss(key.to_string()))
    }

    pub fn insert(&mut self, reference: ReferenceDistribution) -> Result<()> {
        let key = reference.key()?;
        reference.floor()?;
        self.entries.insert(key, reference);
        Ok(())
    }

    pub fn references(&self) -> impl Iterator<Item = &ReferenceDistribution> {
        self.entries.values()
    }

    /// Writes the cache to its path through a temporary file and rename.
    pub fn store(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let entries = self
            .entries
            .values()
            .map(|r| {
                let body = EntryBody::from_reference(r)?;
                let checksum = body.checksum();
                Ok(Entry { body, checksum })
            })
            .collect::<Result<Vec<_>>>()?;
        let doc = CacheFile {
            version: CACHE_VERSION,
            entries,
        };
        let mut json = serde_json::to_string_pretty(&doc)?;
        json.push('\n');

        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(json.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn read_entries(path: &Path) -> Result<BTreeMap<ReferenceKey, ReferenceDistribution>> {
    let corrupt = |reason: String| Error::CorruptCache {
        path: path.to_path_buf(),
        reason,
    };
    let text = fs::read_to_string(path)?;
    let doc: CacheFile = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if doc.version != CACHE_VERSION {
        return Err(corrupt(format!("unsupported version {}", doc.version)));
    }
    let mut entries = BTreeMap::new();
    for (i, entry) in doc.entries.into_iter().enumerate() {
        if entry.body.checksum() != entry.checksum {
            return Err(corrupt(format!("checksum mismatch in entry {i}")));
        }
        let floor = entry.body.calibration_floor;
        if !(0.0..1.0).contains(&floor) {
            return Err(corrupt(format!(
                "entry {i} has floor {floor} outside [0, 1)"
            )));
        }
        let reference = entry
            .body
            .into_reference()
            .map_err(|e| corrupt(format!("entry {i}: {e}")))?;
        entries.insert(reference.key()?, reference);
    }
    Ok(entries)
}

/// Looks up one calibrated reference in the cache file at `path`.
pub fn load_reference(path: &Path, key: &ReferenceKey) -> Result<ReferenceDistribution> {
    if !path.exists() {
        return Err(Error::CacheMiss(key.to_string()));
    }
    ReferenceCache::open(path)?.get(key).cloned()
}

/// Adds or replaces one calibrated reference in the cache file at `path`.
pub fn store_reference(path: &Path, reference: &ReferenceDistribution) -> Result<()> {
    let mut cache = ReferenceCache::open(path)?;
    cache.insert(reference.clone())?;
    cache.store()
}
