//! On-disk cache of Pareto frontiers keyed by system content hash and `n`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{FrontierEntry, ParetoFrontier};
use crate::numerics::Scalar;
use crate::system::Vector;
use crate::trees::BinaryTree;

pub const CACHE_DIR_ENV: &str = "BILGROWTH_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct Record {
    hash: String,
    n: usize,
    truncated: bool,
    entries: Vec<(Vec<String>, String)>,
}

#[derive(Debug, Clone)]
pub struct FrontierCache {
    dir: PathBuf,
}

impl FrontierCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(FrontierCache { dir })
    }

    /// Cache rooted at `$BILGROWTH_CACHE_DIR`, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::new(PathBuf::from(d)).map(Some),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, hash: &str, n: usize) -> PathBuf {
        self.dir.join(format!("{hash}-n{n}.json"))
    }

    pub fn load(&self, hash: &str, n: usize) -> Result<Option<ParetoFrontier>> {
        let path = self.path(hash, n);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let bad = |m: String| Error::parse(path.display().to_string(), m);
        let rec: Record = serde_json::from_slice(&bytes).map_err(|e| bad(e.to_string()))?;
        if rec.hash != hash || rec.n != n {
            return Err(bad("cache record does not match its key".into()));
        }
        let mut entries = Vec::with_capacity(rec.entries.len());
        for (v, w) in rec.entries {
            let vector = v
                .iter()
                .map(|x| Scalar::parse_literal(x))
                .collect::<Result<Vec<_>>>()?;
            let witness: BinaryTree = w.parse()?;
            entries.push(FrontierEntry { vector: Vector::new(vector), witness });
        }
        Ok(Some(ParetoFrontier::from_entries(n, entries, rec.truncated)))
    }

    /// Writes atomically via a temporary file and rename.
    pub fn store(&self, hash: &str, f: &ParetoFrontier) -> Result<()> {
        let rec = Record {
            hash: hash.to_string(),
            n: f.n,
            truncated: f.truncated,
            entries: f
                .entries()
                .iter()
                .map(|e| {
                    (
                        e.vector.entries().iter().map(Scalar::to_string).collect(),
                        e.witness.to_string(),
                    )
                })
                .collect(),
        };
        let path = self.path(hash, f.n);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&rec).expect("record serializes"))?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
