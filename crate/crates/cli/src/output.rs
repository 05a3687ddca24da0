//! Output staging: every file is rendered in memory first and only written once
//! the whole command has succeeded.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, rel: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((rel.into(), bytes));
    }

    pub fn extend(&mut self, files: Vec<(PathBuf, Vec<u8>)>) {
        self.files.extend(files);
    }

    pub fn add_csv<T: Serialize>(&mut self, rel: impl Into<PathBuf>, rows: &[T]) -> Result<()> {
        let rel = rel.into();
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).with_context(|| format!("serializing {}", rel.display()))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.add(rel, bytes);
        Ok(())
    }

    pub fn add_json<T: Serialize>(&mut self, rel: impl Into<PathBuf>, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(rel, bytes);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    /// Writes each file through a temporary sibling and a rename, so a reader
    /// never observes a half-written file.
    pub fn commit(self, root: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (rel, bytes) in self.files {
            let path = root.join(&rel);
            let dir = path.parent().unwrap_or(root);
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
            tmp_name.push(".partial");
            let tmp = path.with_file_name(tmp_name);
            fs::write(&tmp, &bytes).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, &path).with_context(|| format!("writing {}", path.display()))?;
            written.push(rel);
        }
        Ok(written)
    }
}
