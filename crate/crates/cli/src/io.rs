//! Text file formats.
//!
//! - Dataset: header `n Q C`, then `C` rows of `n` integers.
//! - Layout: header `n L`, then `L` lines of sorted neuron indices.
//! - Weights: per cluster in order, a header `cluster m n_l` followed by
//!   `row col value` triplets.
//! - Images: plain graymap (`P2`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clustered_am::imagesys::ImagePattern;
use clustered_am::{ClusterLayout, Dataset, SparseWeightMatrix};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        source: clustered_am::Error,
    },
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write `contents` to `path`, creating parent directories.
pub fn write(path: &Path, contents: &str) -> Result<()> {
    let io = |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Self {
            path,
            inner: text.lines().enumerate(),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> FormatError {
        FormatError::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// Next non-blank line as `(1-based number, text)`.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim()))
            .find(|(_, l)| !l.is_empty())
    }

    fn numbers<T: std::str::FromStr>(&self, line: usize, text: &str) -> Result<Vec<T>> {
        text.split_whitespace()
            .map(|t| t.parse().map_err(|_| self.err(line, format!("cannot parse `{t}`"))))
            .collect()
    }
}

fn model_err(path: &Path) -> impl FnOnce(clustered_am::Error) -> FormatError + '_ {
    move |source| FormatError::Model {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let (ln, header) = lines.next_line().ok_or_else(|| lines.err(1, "missing `n Q C` header"))?;
    let h: Vec<usize> = lines.numbers(ln, header)?;
    let [n, q, c] = h[..] else {
        return Err(lines.err(ln, "header must be `n Q C`"));
    };
    let mut data = Vec::with_capacity(n * c);
    for row in 0..c {
        let (ln, l) = lines
            .next_line()
            .ok_or_else(|| lines.err(ln, format!("expected {c} rows, found {row}")))?;
        let values: Vec<u32> = lines.numbers(ln, l)?;
        if values.len() != n {
            return Err(lines.err(ln, format!("expected {n} entries, found {}", values.len())));
        }
        data.extend(values);
    }
    if let Some((ln, _)) = lines.next_line() {
        return Err(lines.err(ln, format!("more than the {c} rows declared")));
    }
    let q = u32::try_from(q).map_err(|_| lines.err(1, "alphabet size too large"))?;
    Dataset::from_flat(n, q, data).map_err(model_err(path))
}

pub fn format_dataset(d: &Dataset) -> String {
    let mut out = format!("{} {} {}\n", d.n(), d.alphabet_size(), d.len());
    for p in d.patterns() {
        join_into(&mut out, p);
    }
    out
}

fn join_into<T: std::fmt::Display>(out: &mut String, values: &[T]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

pub fn write_dataset(path: &Path, d: &Dataset) -> Result<()> {
    write(path, &format_dataset(d))
}

pub fn read_layout(path: &Path) -> Result<ClusterLayout> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let (ln, header) = lines.next_line().ok_or_else(|| lines.err(1, "missing `n L` header"))?;
    let h: Vec<usize> = lines.numbers(ln, header)?;
    let [n, l] = h[..] else {
        return Err(lines.err(ln, "header must be `n L`"));
    };
    let mut clusters = Vec::with_capacity(l);
    for c in 0..l {
        let (ln, text) = lines
            .next_line()
            .ok_or_else(|| lines.err(ln, format!("expected {l} clusters, found {c}")))?;
        clusters.push(lines.numbers(ln, text)?);
    }
    if let Some((ln, _)) = lines.next_line() {
        return Err(lines.err(ln, format!("more than the {l} clusters declared")));
    }
    ClusterLayout::new(n, clusters).map_err(model_err(path))
}

pub fn format_layout(layout: &ClusterLayout) -> String {
    let mut out = format!("{} {}\n", layout.n(), layout.num_clusters());
    for c in layout.clusters() {
        join_into(&mut out, c);
    }
    out
}

pub fn write_layout(path: &Path, layout: &ClusterLayout) -> Result<()> {
    write(path, &format_layout(layout))
}

/// Rows, columns and `(row, col, value)` entries of one cluster being read.
type PendingCluster = (usize, usize, Vec<(usize, usize, f64)>);

/// Weights are stored with a zero cutoff; the learned cutoff has already
/// been applied when the file was written.
pub fn read_weights(path: &Path) -> Result<Vec<SparseWeightMatrix>> {
    let text = read(path)?;
    let mut lines = Lines::new(path, &text);
    let mut out = Vec::new();
    let mut current: Option<PendingCluster> = None;
    let finish = |out: &mut Vec<SparseWeightMatrix>, cur: Option<PendingCluster>| {
        if let Some((m, cols, entries)) = cur {
            let id = out.len();
            out.push(SparseWeightMatrix::new(id, m, cols, entries, 0.0).map_err(model_err(path))?);
        }
        Ok::<_, FormatError>(())
    };
    while let Some((ln, l)) = lines.next_line() {
        let mut parts = l.split_whitespace();
        if l.starts_with("cluster") {
            parts.next();
            let rest: Vec<usize> = lines.numbers(ln, &parts.collect::<Vec<_>>().join(" "))?;
            let [m, cols] = rest[..] else {
                return Err(lines.err(ln, "cluster header must be `cluster m n_l`"));
            };
            finish(&mut out, current.take())?;
            current = Some((m, cols, Vec::new()));
            continue;
        }
        let Some((_, _, entries)) = current.as_mut() else {
            return Err(lines.err(ln, "entry before the first `cluster` header"));
        };
        let toks: Vec<&str> = parts.collect();
        let [r, c, v] = toks[..] else {
            return Err(lines.err(ln, "entries must be `row col value`"));
        };
        let parse_idx = |t: &str| t.parse::<usize>().map_err(|_| lines.err(ln, format!("cannot parse `{t}`")));
        let value = v.parse::<f64>().map_err(|_| lines.err(ln, format!("cannot parse `{v}`")))?;
        entries.push((parse_idx(r)?, parse_idx(c)?, value));
    }
    finish(&mut out, current)?;
    Ok(out)
}

pub fn format_weights(weights: &[SparseWeightMatrix]) -> String {
    let mut out = String::new();
    for w in weights {
        let _ = writeln!(out, "cluster {} {}", w.rows(), w.cols());
        for &(r, c, v) in w.entries() {
            let _ = writeln!(out, "{r} {c} {v}");
        }
    }
    out
}

pub fn write_weights(path: &Path, weights: &[SparseWeightMatrix]) -> Result<()> {
    write(path, &format_weights(weights))
}

/// Read a plain graymap, rescaling to `[0, 255]` when `maxval != 255`.
pub fn read_pgm(path: &Path) -> Result<ImagePattern> {
    let text = read(path)?;
    let err = |message: &str| FormatError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: message.to_string(),
    };
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(err("not a plain graymap (expected `P2`)"));
    }
    let mut num = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| err(&format!("missing {what}")))?
            .parse()
            .map_err(|_| err(&format!("bad {what}")))
    };
    let (w, h, maxval) = (num("width")?, num("height")?, num("maxval")?);
    if maxval == 0 || maxval > 65535 {
        return Err(err("maxval must lie in [1, 65535]"));
    }
    let mut pixels = Vec::with_capacity(w * h);
    for _ in 0..w * h {
        let v = num("pixel")?;
        if v > maxval {
            return Err(err("pixel exceeds maxval"));
        }
        pixels.push(((v * 255 + maxval / 2) / maxval) as u8);
    }
    if tokens.next().is_some() {
        return Err(err("trailing data after pixels"));
    }
    ImagePattern::new(w, h, pixels).map_err(model_err(path))
}

pub fn format_pgm(img: &ImagePattern) -> String {
    let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height());
    for row in img.pixels().chunks(img.width().max(1)) {
        join_into(&mut out, row);
    }
    out
}

pub fn write_pgm(path: &Path, img: &ImagePattern) -> Result<()> {
    write(path, &format_pgm(img))
}
