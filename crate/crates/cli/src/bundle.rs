use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Stamped into every artifact so outputs can be traced to their inputs.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub config_sha256: String,
    pub master_seed: u64,
}

impl Provenance {
    pub fn new(canonical_config: &str, master_seed: u64) -> Self {
        let digest = Sha256::digest(canonical_config.as_bytes());
        Self { config_sha256: hex::encode(digest), master_seed }
    }

    /// Comment line for text and CSV artifacts.
    pub fn header(&self) -> String {
        format!("# config_sha256={} master_seed={}\n", self.config_sha256, self.master_seed)
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Stamped<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

pub fn stamped_json<T: Serialize>(prov: &Provenance, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Stamped { provenance: prov, body }).expect("artifact serializes");
    s.push('\n');
    s
}

/// Output directory that only appears at its final path once complete.
/// Files are staged in a sibling directory and swapped in by `commit`.
pub struct Staging {
    target: PathBuf,
    staging: PathBuf,
}

impl Staging {
    pub fn new(target: &Path) -> io::Result<Self> {
        let name = target
            .file_name()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no final component"))?
            .to_string_lossy()
            .into_owned();
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging)?;
        Ok(Self { target: target.to_path_buf(), staging })
    }

    pub fn write(&self, rel: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> io::Result<()> {
        let path = self.staging.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, contents)
    }

    pub fn commit(self) -> io::Result<PathBuf> {
        let old = self.staging.with_extension("old");
        if self.target.exists() {
            if old.exists() {
                fs::remove_dir_all(&old)?;
            }
            fs::rename(&self.target, &old)?;
        }
        fs::rename(&self.staging, &self.target)?;
        if old.exists() {
            fs::remove_dir_all(&old)?;
        }
        Ok(self.target.clone())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if self.staging.exists() {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
