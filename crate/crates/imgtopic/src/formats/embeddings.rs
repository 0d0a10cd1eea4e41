use std::path::Path;

use imgtopic_core::{EmbeddingTable, EmbeddingTableBuilder};

use super::{
    into_utf8, numbered_lines, parse_header, parse_vector_line, push_reals, read_bytes, write_file, FormatError,
    ParseError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// Header `V D`, then `word v1 ... vD` per line.
    Text,
    /// Header line `V D`, then per word: token, one space, `D` little-endian
    /// `f32`, newline.
    Binary,
}

impl EmbeddingFormat {
    /// `.bin` means binary, anything else text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => EmbeddingFormat::Binary,
            _ => EmbeddingFormat::Text,
        }
    }
}

fn builder(dim: usize, location: impl Fn(String) -> ParseError) -> Result<EmbeddingTableBuilder, ParseError> {
    EmbeddingTableBuilder::new(dim).map_err(|e| location(e.to_string()))
}

pub fn parse_embeddings_text(text: &str) -> Result<EmbeddingTable, ParseError> {
    let mut lines = numbered_lines(text);
    let (n, header) = lines.next().ok_or_else(|| ParseError::whole("empty embedding file"))?;
    let (count, dim) = parse_header(header, n)?;
    let mut table = builder(dim, |m| ParseError::line(n, m))?;
    let mut seen = 0;
    let mut last = n;
    for (n, line) in lines {
        let (word, values) = parse_vector_line(line, n, dim)?;
        table.insert(word, &values).map_err(|e| ParseError::line(n, e.to_string()))?;
        seen += 1;
        last = n;
    }
    if seen != count {
        return Err(ParseError::line(last, format!("header declares {count} words, found {seen}")));
    }
    Ok(table.finish())
}

pub fn parse_embeddings_binary(bytes: &[u8]) -> Result<EmbeddingTable, ParseError> {
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| ParseError::byte(0, "missing header line"))?;
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|_| ParseError::byte(0, "header is not UTF-8"))?;
    let (count, dim) = parse_header(header, 1).map_err(|e| ParseError::byte(0, e.message))?;
    let mut table = builder(dim, |m| ParseError::byte(0, m))?;
    let mut pos = header_end + 1;
    let mut values = vec![0.0f64; dim];
    for _ in 0..count {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        let len = bytes[start..]
            .iter()
            .position(|&b| b == b' ')
            .ok_or_else(|| ParseError::byte(start, "truncated word token"))?;
        let word = std::str::from_utf8(&bytes[start..start + len])
            .map_err(|_| ParseError::byte(start, "word token is not UTF-8"))?;
        pos = start + len + 1;
        let end = pos + 4 * dim;
        if end > bytes.len() {
            return Err(ParseError::byte(pos, format!("truncated vector for `{word}`")));
        }
        for (v, chunk) in values.iter_mut().zip(bytes[pos..end].chunks_exact(4)) {
            *v = f64::from(f32::from_le_bytes(chunk.try_into().expect("chunk of 4")));
        }
        table.insert(word, &values).map_err(|e| ParseError::byte(start, e.to_string()))?;
        pos = end;
        if bytes.get(pos) == Some(&b'\n') {
            pos += 1;
        }
    }
    if bytes[pos..].iter().any(|b| !b.is_ascii_whitespace()) {
        return Err(ParseError::byte(pos, format!("data after the {count} declared words")));
    }
    Ok(table.finish())
}

pub fn load_embeddings(path: &Path, format: EmbeddingFormat) -> Result<EmbeddingTable, FormatError> {
    let bytes = read_bytes(path)?;
    let parsed = match format {
        EmbeddingFormat::Text => into_utf8(bytes).and_then(|t| parse_embeddings_text(&t)),
        EmbeddingFormat::Binary => parse_embeddings_binary(&bytes),
    };
    parsed.map_err(|e| FormatError::parse(path, e))
}

/// Writes the raw (unnormalized) vectors.
pub fn write_embeddings_text(path: &Path, table: &EmbeddingTable) -> Result<(), FormatError> {
    let mut out = format!("{} {}\n", table.len(), table.dim());
    for (i, word) in table.words().iter().enumerate() {
        out.push_str(word);
        push_reals(&mut out, table.raw_row(i));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

/// Writes the raw vectors rounded to `f32`.
pub fn write_embeddings_binary(path: &Path, table: &EmbeddingTable) -> Result<(), FormatError> {
    let mut out = format!("{} {}\n", table.len(), table.dim()).into_bytes();
    for (i, word) in table.words().iter().enumerate() {
        out.extend_from_slice(word.as_bytes());
        out.push(b' ');
        for &v in table.raw_row(i) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.push(b'\n');
    }
    write_file(path, &out)
}
