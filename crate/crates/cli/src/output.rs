//! Output directory with a content-hash manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use conformal_optics::io::{write_cfof, write_csv_matrix, write_pgm};
use conformal_optics::{Field, Scalars};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Error)]
#[error("{path}: {source}")]
pub struct IoError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// Collects files written for one scenario run. Writes are sequential; the manifest lists
/// every file with its SHA-256, sorted by name.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, IoError> {
        fs::create_dir_all(dir).map_err(|source| IoError {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), IoError> {
        let path = self.dir.join(name);
        let io = |source| IoError {
            path: path.clone(),
            source,
        };
        let mut f = fs::File::create(&path).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        let hash = hex::encode(Sha256::digest(bytes));
        self.files.retain(|(n, _)| n != name);
        self.files.push((name.to_string(), hash));
        Ok(())
    }

    fn encode<F>(&mut self, name: &str, f: F) -> Result<(), IoError>
    where
        F: FnOnce(&mut Vec<u8>) -> conformal_optics::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| IoError {
            path: self.dir.join(name),
            source: std::io::Error::other(e.to_string()),
        })?;
        self.write_bytes(name, &buf)
    }

    pub fn write_cfof(&mut self, name: &str, field: &Field, wavelength: f64) -> Result<(), IoError> {
        self.encode(name, |b| write_cfof(b, field, wavelength))
    }

    pub fn write_pgm(&mut self, name: &str, image: &Scalars) -> Result<(), IoError> {
        self.encode(name, |b| write_pgm(b, image))
    }

    pub fn write_csv_matrix(&mut self, name: &str, values: &Scalars) -> Result<(), IoError> {
        self.encode(name, |b| write_csv_matrix(b, values))
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), IoError> {
        self.write_bytes(name, text.as_bytes())
    }

    pub fn manifest_text(&self) -> String {
        let mut files = self.files.clone();
        files.sort();
        files
            .iter()
            .map(|(n, h)| format!("{h}  {n}\n"))
            .collect()
    }

    /// Writes `manifest.txt` and returns its text.
    pub fn finish(self) -> Result<String, IoError> {
        let text = self.manifest_text();
        let path = self.dir.join(MANIFEST);
        fs::write(&path, &text).map_err(|source| IoError { path, source })?;
        Ok(text)
    }
}
