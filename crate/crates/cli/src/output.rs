use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;
use spatial_growth::analysis::manifest;
use spatial_growth::{Graph, Seed};

/// Output directory of one command.
pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(OutDir(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn json(&self, name: &str, value: &Value) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn manifest(&self, config: Value, seed: Seed, results: Value) -> Result<PathBuf> {
        self.json("manifest.json", &manifest(&config, seed, results))
    }
}

/// `u v` per line, readable by `--lattice custom:<file>`.
pub fn edge_list(g: &Graph) -> String {
    let mut s = format!("# origin {}\n", g.origin());
    for &(u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

/// CSV with a header row; every value is written with `Display`.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
