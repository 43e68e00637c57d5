//! Output files: CSV tables and `key: value` sidecars.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nlgreen::grid::format_number;
use nlgreen::GridFunction;

/// Ordered `key: value` text written next to a CSV.
#[derive(Debug, Default)]
pub struct Sidecar {
    entries: Vec<(String, String)>,
}

impl Sidecar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.put(key, format_number(value))
    }

    pub fn extend_prefixed(&mut self, prefix: &str, map: &BTreeMap<String, String>) -> &mut Self {
        for (k, v) in map {
            self.put(format!("{prefix}{k}"), v);
        }
        self
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}: {}\n", v.replace('\n', " "))).collect()
    }
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }

    pub fn sidecar(&self, name: &str, sidecar: &Sidecar) -> Result<()> {
        self.text(name, &sidecar.render())
    }

    pub fn curve(&self, name: &str, label: &str, g: &GridFunction) -> Result<()> {
        let mut buf = Vec::new();
        g.write_csv(&mut buf, label)?;
        fs::write(self.path(name), buf).with_context(|| format!("writing {name}"))
    }

    /// Multi-column CSV sharing the grid of `columns[0]`.
    pub fn columns(&self, name: &str, labels: &[&str], columns: &[GridFunction]) -> Result<()> {
        let mut body = format!("t,{}\n", labels.join(","));
        let len = columns.iter().map(GridFunction::len).min().unwrap_or(0);
        for i in 0..len {
            body.push_str(&format_number(columns[0].spec().time(i)));
            for c in columns {
                body.push(',');
                body.push_str(&format_number(c.values()[i]));
            }
            body.push('\n');
        }
        self.text(name, &body)
    }

    pub fn rows(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut body = header.join(",");
        body.push('\n');
        for r in rows {
            body.push_str(&r.join(","));
            body.push('\n');
        }
        self.text(name, &body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_lines_are_key_colon_value() {
        let mut s = Sidecar::new();
        s.put("model", "kdv").num("strength", -0.5).num("zero", 0.0);
        assert_eq!(s.render(), "model: kdv\nstrength: -0.5\nzero: 0\n");
    }

    #[test]
    fn columns_share_the_first_grid() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        let a = GridFunction::new(0.0, 0.5, vec![1.0, 2.0, 3.0]).unwrap();
        let b = GridFunction::new(0.0, 0.5, vec![0.0, -1.0]).unwrap();
        out.columns("x.csv", &["a", "b"], &[a, b]).unwrap();
        let text = fs::read_to_string(out.path("x.csv")).unwrap();
        assert_eq!(text, "t,a,b\n0,1.0,0\n0.5,2.0,-1.0\n");
    }
}
