use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Output directory plus the set of formats to write.
pub struct OutputBundle {
    pub dir: PathBuf,
    formats: Vec<Format>,
}

impl OutputBundle {
    pub fn new(dir: &Path, formats: &[Format]) -> Result<Self> {
        if formats.is_empty() {
            bail!("at least one output format is required");
        }
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(OutputBundle { dir: dir.to_path_buf(), formats: formats.to_vec() })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_with(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<PathBuf> {
        let path = self.path(name);
        let file = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    pub fn write_str(&self, name: &str, body: &str) -> Result<PathBuf> {
        self.write_with(name, |w| w.write_all(body.as_bytes()))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let body = serde_json::to_string_pretty(value)?;
        self.write_str(name, &(body + "\n"))
    }
}

/// RFC 4180 field quoting.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(csv_field("abc"), "abc");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn bundle_requires_format() {
        let d = tempfile::tempdir().unwrap();
        assert!(OutputBundle::new(d.path(), &[]).is_err());
        let b = OutputBundle::new(&d.path().join("x"), &[Format::Csv]).unwrap();
        assert!(b.wants(Format::Csv) && !b.wants(Format::Svg));
        b.write_str("a.txt", "hi").unwrap();
        assert_eq!(fs::read_to_string(b.path("a.txt")).unwrap(), "hi");
    }
}
