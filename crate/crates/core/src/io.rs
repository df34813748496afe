//! CSV and JSON writers. Every file starts with (CSV) or embeds (JSON) the
//! resolved configuration that produced it. Floats are printed with 17
//! significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::VERSION;

/// Round-trippable decimal form of `x`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes `# <config json>` followed by a header row and `rows`.
pub fn write_csv<I>(path: &Path, config: &Value, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file = fs::File::create(path)?;
    writeln!(file, "# {}", serde_json::to_string(config)?)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'a str,
    config: &'a Value,
    data: &'a T,
}

/// Writes `{ "version", "config", "data" }` as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, config: &Value, data: &T) -> Result<()> {
    let env = Envelope { version: VERSION, config, data };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub description: String,
}

/// Collects written files and indexes them in `manifest.json`.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), entries: Vec::new() })
    }

    /// Path for `name`, registered in the manifest.
    pub fn file(&mut self, name: &str, description: &str) -> PathBuf {
        self.entries.push(ManifestEntry { file: name.into(), description: description.into() });
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn finish(self, config: &Value) -> Result<PathBuf> {
        let path = self.root.join("manifest.json");
        write_json(&path, config, &self.entries)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.737946999085467e-3, 1e-300, 12345.678] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_has_config_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let cfg = serde_json::json!({"seed": 1});
        write_csv(&path, &cfg, &["a", "b"], vec![vec!["1".into(), fmt_f64(0.5)]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# {\"seed\":1}\na,b\n1,5.0000000000000000e-1\n");
    }
}
