//! Byte-stable CSV output and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `1e-4 <= |v| < 1e12`.
pub fn g12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    trim_zeros(&format!("{v:.*}", (11 - exp) as usize)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table with a header row.
pub struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table { text: format!("{}\n", header.join(",")), width: header.len() }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.width, "row width");
        let parts: Vec<String> = cells.iter().map(Cell::render).collect();
        let _ = writeln!(self.text, "{}", parts.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => g12(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Collects the files of one run and writes them together with a manifest.
pub struct RunOutput {
    dir: PathBuf,
    files: Vec<(String, String)>,
    /// `key = value` lines describing the run.
    params: Vec<(String, String)>,
}

impl RunOutput {
    pub fn new(dir: &Path) -> RunOutput {
        RunOutput { dir: dir.to_path_buf(), files: Vec::new(), params: Vec::new() }
    }

    pub fn param(&mut self, key: &str, value: impl Into<String>) {
        self.params.push((key.to_string(), value.into()));
    }

    pub fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    /// Writes every file, then `manifest.txt`. Returns the written paths.
    pub fn write(self) -> Result<Vec<PathBuf>, CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", p.display()));
        fs::create_dir_all(&self.dir).map_err(|e| io(&self.dir, e))?;
        let mut written = Vec::new();
        let mut manifest = String::new();
        let _ = writeln!(manifest, "tool = covgame {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.params {
            let _ = writeln!(manifest, "{k} = {v}");
        }
        for (name, contents) in &self.files {
            let path = self.dir.join(name);
            fs::write(&path, contents).map_err(|e| io(&path, e))?;
            let digest = Sha256::digest(contents.as_bytes());
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            let _ = writeln!(manifest, "sha256 {name} = {hex}");
            written.push(path);
        }
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let _ = writeln!(manifest, "timestamp_unix = {stamp}");
        let path = self.dir.join("manifest.txt");
        fs::write(&path, manifest).map_err(|e| io(&path, e))?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (1.5, "1.5"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (1.430388150786159, "1.43038815079"),
            (-0.003996, "-0.003996"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (999999999999.5, "1e+12"),
            (0.99999999999999, "1"),
            (1e-300, "1e-300"),
            (f64::NAN, "nan"),
        ];
        for (v, want) in cases {
            assert_eq!(g12(v), want, "{v}");
        }
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.row(&[Cell::Num(0.5), Cell::Int(3), Cell::Text("x".into())]);
        assert_eq!(t.into_string(), "a,b,c\n0.5,3,x\n");
    }
}
