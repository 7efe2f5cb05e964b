//! CSV output and run metadata.

use std::fmt::Write as _;
use std::path::Path;

use crate::io::{self, FormatError};

/// Format a float with 9 significant digits, `%g` style: fixed notation for
/// exponents in `[-5, 9)`, scientific otherwise, trailing zeros trimmed.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Accumulates CSV text with a fixed header.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        io::write(path, &self.text)
    }
}

/// `run.meta`: `key=value` lines describing one command invocation.
#[derive(Debug, Clone, Default)]
pub struct RunMeta {
    entries: Vec<(String, String)>,
}

impl RunMeta {
    pub fn new(command: &str) -> Self {
        let mut meta = Self::default();
        meta.set("command", command);
        meta.set("camem_version", env!("CARGO_PKG_VERSION"));
        meta
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Write `run.meta` into `dir`.
    pub fn write_into(&self, dir: &Path) -> Result<(), FormatError> {
        io::write(&dir.join("run.meta"), &self.render())
    }
}
