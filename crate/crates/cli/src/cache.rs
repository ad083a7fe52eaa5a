//! On-disk `PeriodData` cache keyed by the period-affecting config.

use std::io::Write;
use std::path::{Path, PathBuf};

use mchgap::pipeline::{Precomputed, Prepared};
use mchgap::verification::VerificationReport;
use serde::{Deserialize, Serialize};

use crate::config::Loaded;
use crate::CliError;

pub const DOCUMENT_VERSION: u32 = 1;

/// Serialized periods, optionally with the static verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodsDocument {
    pub format_version: u32,
    pub cache_key: String,
    pub genus: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precomputed: Option<Precomputed>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

pub fn cache_path(loaded: &Loaded) -> PathBuf {
    loaded.cache_dir().join(format!("{}.json", loaded.config.cache_key()))
}

/// What `prepare` did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Hit,
    Computed,
}

fn read_cached(path: &Path, key: &str) -> Result<Option<Precomputed>, String> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.to_string()),
    };
    let doc: PeriodsDocument = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    if doc.format_version != DOCUMENT_VERSION || doc.cache_key != key {
        return Err("stale format or key".into());
    }
    doc.precomputed.map(Some).ok_or_else(|| "no periods stored".to_string())
}

/// Builds the pipeline products, from the cache when it holds a readable
/// entry for this config.
pub fn prepare(loaded: &Loaded) -> Result<(Prepared, Origin), CliError> {
    let cfg = &loaded.config;
    let key = cfg.cache_key();
    let path = cache_path(loaded);
    match read_cached(&path, &key) {
        Ok(Some(pre)) => {
            eprintln!("cache hit {key}");
            let prep = Prepared::from_cache(loaded.params.clone(), pre, cfg.tau)?;
            return Ok((prep, Origin::Hit));
        }
        Ok(None) => eprintln!("cache miss {key}"),
        Err(e) => eprintln!("warning: cache entry {} unreadable ({e}); recomputing", path.display()),
    }
    let prep = Prepared::build(loaded.params.clone(), cfg.quadrature.rule(), cfg.tau)?;
    let doc = PeriodsDocument {
        format_version: DOCUMENT_VERSION,
        cache_key: key,
        genus: prep.model.genus,
        precomputed: Some(prep.precomputed()),
        error: None,
        verification: None,
    };
    write_atomic(&path, &to_json(&doc))?;
    Ok((prep, Origin::Computed))
}
