//! Artifact files. Every file starts with the provenance line
//! `# config_sha256=<hex>`; numbers use one fixed format so identical runs
//! give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dqw_core::{Error, Result};

pub fn num(x: f64) -> String {
    format!("{x:.9e}")
}

pub struct Artifacts {
    dir: PathBuf,
    header: String,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path, hash: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header: format!("# config_sha256={hash}\n"),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, format!("{}{body}", self.header))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut body = columns.join(",");
        body.push('\n');
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.write(name, &body)
    }

    /// One `index detuning reason` line per entry.
    pub fn log(&mut self, name: &str, title: &str, entries: &[String]) -> Result<PathBuf> {
        let mut body = format!("# {title}\n");
        for e in entries {
            let _ = writeln!(body, "{e}");
        }
        self.write(name, &body)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
