//! Corpus directory layout:
//!
//! ```text
//! <dir>/sites.jsonl     one SiteRecord per line
//! <dir>/pages.jsonl     one PageRecord per line
//! <dir>/images.jsonl    one ImageRecord per line (response headers inline)
//! <dir>/skipped.jsonl   one SkippedImage per line
//! <dir>/blobs/<digest>  raw image bytes, file name is the lowercase hex SHA-256
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{ContentDigest, Corpus};
use crate::error::CorpusError;

pub const SITES_FILE: &str = "sites.jsonl";
pub const PAGES_FILE: &str = "pages.jsonl";
pub const IMAGES_FILE: &str = "images.jsonl";
pub const SKIPPED_FILE: &str = "skipped.jsonl";
pub const BLOB_DIR: &str = "blobs";

pub(crate) fn to_jsonl<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("records serialize");
        out.push(b'\n');
    }
    out
}

fn read_jsonl<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<Vec<T>, CorpusError> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| CorpusError::io(&path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| CorpusError::Parse {
                file: name.to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CorpusError> {
    fs::write(path, bytes).map_err(|e| CorpusError::io(path, e))
}

/// Reads and validates a corpus directory. Blobs are not loaded.
pub fn load(dir: &Path) -> Result<Corpus, CorpusError> {
    let sites = read_jsonl(dir, SITES_FILE)?;
    let pages = read_jsonl(dir, PAGES_FILE)?;
    let images = read_jsonl(dir, IMAGES_FILE)?;
    let skipped = if dir.join(SKIPPED_FILE).exists() {
        read_jsonl(dir, SKIPPED_FILE)?
    } else {
        Vec::new()
    };
    Corpus::new(sites, pages, images, skipped)
}

/// Writes the record files of `corpus` into `dir` (created if missing).
pub fn save(corpus: &Corpus, dir: &Path) -> Result<(), CorpusError> {
    fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    write_file(&dir.join(SITES_FILE), &to_jsonl(&corpus.sites))?;
    write_file(&dir.join(PAGES_FILE), &to_jsonl(&corpus.pages))?;
    write_file(&dir.join(IMAGES_FILE), &to_jsonl(&corpus.images))?;
    write_file(&dir.join(SKIPPED_FILE), &to_jsonl(&corpus.skipped))?;
    Ok(())
}

pub fn blob_path(dir: &Path, digest: &ContentDigest) -> PathBuf {
    dir.join(BLOB_DIR).join(digest.to_hex())
}

pub fn read_blob(dir: &Path, digest: &ContentDigest) -> Result<Vec<u8>, CorpusError> {
    let path = blob_path(dir, digest);
    fs::read(&path).map_err(|e| CorpusError::io(path, e))
}

/// A corpus being assembled in a sibling staging directory. Nothing appears
/// at the destination until [`Staging::commit`] renames it into place.
#[derive(Debug)]
pub struct Staging {
    staging: PathBuf,
    dest: PathBuf,
}

impl Staging {
    pub fn begin(dest: &Path) -> Result<Self, CorpusError> {
        let name = dest
            .file_name()
            .ok_or_else(|| CorpusError::Corrupt(format!("bad output path {}", dest.display())))?
            .to_string_lossy()
            .into_owned();
        let parent = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| CorpusError::io(&staging, e))?;
        }
        let blobs = staging.join(BLOB_DIR);
        fs::create_dir_all(&blobs).map_err(|e| CorpusError::io(&blobs, e))?;
        Ok(Staging {
            staging,
            dest: dest.to_path_buf(),
        })
    }

    pub fn put_blob(&self, digest: &ContentDigest, bytes: &[u8]) -> Result<(), CorpusError> {
        let path = blob_path(&self.staging, digest);
        if path.exists() {
            return Ok(());
        }
        write_file(&path, bytes)
    }

    pub fn commit(self, corpus: &Corpus) -> Result<PathBuf, CorpusError> {
        save(corpus, &self.staging)?;
        if self.dest.exists() {
            fs::remove_dir_all(&self.dest).map_err(|e| CorpusError::io(&self.dest, e))?;
        }
        fs::rename(&self.staging, &self.dest).map_err(|e| CorpusError::io(&self.dest, e))?;
        Ok(self.dest.clone())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if self.staging.exists() {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
