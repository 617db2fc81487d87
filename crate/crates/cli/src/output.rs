use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Round-trip float formatting with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Output directory plus the hash stamped into every artifact.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub sha256: String,
}

impl Sink {
    pub fn new(dir: PathBuf, sha256: String) -> CliResult<Self> {
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { action: "create", path: dir.clone(), source })?;
        Ok(Self { dir, sha256 })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, body).map_err(|source| CliError::Io { action: "write", path: path.clone(), source })?;
        Ok(path)
    }

    /// Writes `value` as pretty JSON with a top-level `config_sha256` field.
    pub fn json(&self, name: &str, value: &impl Serialize) -> CliResult<PathBuf> {
        let mut v = serde_json::to_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        match &mut v {
            Value::Object(map) => {
                map.insert("config_sha256".into(), Value::String(self.sha256.clone()));
            }
            other => {
                let inner = std::mem::take(other);
                *other = serde_json::json!({ "config_sha256": self.sha256, "data": inner });
            }
        }
        let mut body = serde_json::to_string_pretty(&v).map_err(|e| CliError::Config(e.to_string()))?;
        body.push('\n');
        self.write(name, &body)
    }

    pub fn csv(&self, name: &str, table: &Csv) -> CliResult<PathBuf> {
        let mut body = format!("# config_sha256={}\n", self.sha256);
        body.push_str(&table.header.join(","));
        body.push('\n');
        for row in &table.rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.write(name, &body)
    }

    pub fn text(&self, name: &str, body: &str) -> CliResult<PathBuf> {
        self.write(name, &format!("# config_sha256={}\n{body}", self.sha256))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Gnuplot script drawing the convergence table on log–log axes.
pub fn convergence_script(csv: &Path, columns: &[(usize, &str)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set xlabel 'h'");
    let _ = writeln!(s, "set ylabel 'error'");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output 'convergence.png'");
    let file = csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let plots: Vec<String> =
        columns.iter().map(|(c, title)| format!("'{file}' using 1:{c} with linespoints title '{title}'")).collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}
