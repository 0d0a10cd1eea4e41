//! On-disk formats. Every parser works on in-memory bytes and reports
//! failures with a line number or byte offset; the `load_*` wrappers attach
//! the path.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

mod curves;
mod embeddings;
mod features;
mod lists;
mod output;
mod topics;
mod triads;

pub use curves::{parse_curves, render_curves, write_curves, CurveRow, CURVES_HEADER};
pub use embeddings::{
    load_embeddings, parse_embeddings_binary, parse_embeddings_text, write_embeddings_binary,
    write_embeddings_text, EmbeddingFormat,
};
pub use features::{load_features, parse_features, write_features};
pub use lists::{load_dictionary, load_stoplist, parse_word_list, write_word_list};
pub use output::{HistogramJson, MappingJson, ScoredWordJson, TopicOutput};
pub use topics::{load_topics, parse_topics, write_topics};
pub use triads::{load_triads, parse_triads, write_triads};

/// Where in a file a parse error was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// 1-based line number.
    Line(usize),
    /// 0-based byte offset.
    Byte(usize),
    Whole,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Byte(n) => write!(f, "byte {n}"),
            Location::Whole => f.write_str("file"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: Location,
    pub message: String,
}

impl ParseError {
    pub fn line(line: usize, message: impl Into<String>) -> Self {
        Self { location: Location::Line(line), message: message.into() }
    }

    pub fn byte(offset: usize, message: impl Into<String>) -> Self {
        Self { location: Location::Byte(offset), message: message.into() }
    }

    pub fn whole(message: impl Into<String>) -> Self {
        Self { location: Location::Whole, message: message.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: no such file", .path.display())]
    NotFound { path: PathBuf },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", .path.display())]
    Parse { path: PathBuf, source: ParseError },
}

impl FormatError {
    pub(crate) fn parse(path: &Path, source: ParseError) -> Self {
        Self::Parse { path: path.to_path_buf(), source }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            Self::NotFound { path: path.to_path_buf() }
        } else {
            Self::Io { path: path.to_path_buf(), source }
        }
    }
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|e| FormatError::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String, FormatError> {
    let bytes = read_bytes(path)?;
    into_utf8(bytes).map_err(|e| FormatError::parse(path, e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), FormatError> {
    std::fs::write(path, contents).map_err(|e| FormatError::io(path, e))
}

pub(crate) fn into_utf8(bytes: Vec<u8>) -> Result<String, ParseError> {
    String::from_utf8(bytes).map_err(|e| ParseError::byte(e.utf8_error().valid_up_to(), "invalid UTF-8"))
}

/// Non-empty lines with their 1-based numbers. A trailing `\r` is dropped.
pub(crate) fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Parses a `COUNT DIM` header line.
pub(crate) fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize), ParseError> {
    let mut parts = line.split_whitespace();
    let count = parts.next().and_then(|s| s.parse().ok());
    let dim = parts.next().and_then(|s| s.parse().ok());
    match (count, dim, parts.next()) {
        (Some(c), Some(d), None) => Ok((c, d)),
        _ => Err(ParseError::line(lineno, format!("expected header `COUNT DIM`, found `{line}`"))),
    }
}

/// Parses `name v1 ... vD`, requiring exactly `dim` reals.
pub(crate) fn parse_vector_line(line: &str, lineno: usize, dim: usize) -> Result<(&str, Vec<f64>), ParseError> {
    let mut parts = line.split_whitespace();
    let name = parts.next().ok_or_else(|| ParseError::line(lineno, "empty line"))?;
    let values = parts
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| ParseError::line(lineno, format!("`{p}` is not a number")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.len() != dim {
        return Err(ParseError::line(
            lineno,
            format!("`{name}` has {} components, header says {dim}", values.len()),
        ));
    }
    Ok((name, values))
}

/// Shortest decimal that parses back to the same `f64`.
pub(crate) fn push_reals(out: &mut String, values: &[f64]) {
    use fmt::Write;
    for v in values {
        write!(out, " {v}").expect("writing to a String");
    }
}
