use std::path::Path;

use imgtopic_core::retrieval::RetrievalError;
use imgtopic_core::FeatureStore;

use super::{numbered_lines, parse_header, parse_vector_line, push_reals, read_text, write_file, FormatError, ParseError};

/// Header `N D`, then `N` lines `image_id v1 ... vD`.
pub fn parse_features(text: &str) -> Result<FeatureStore, ParseError> {
    let mut lines = numbered_lines(text);
    let (n, header) = lines.next().ok_or_else(|| ParseError::whole("empty feature file"))?;
    let (count, dim) = parse_header(header, n)?;
    let mut store = FeatureStore::new(dim).map_err(|e| ParseError::line(n, e.to_string()))?;
    let mut last = n;
    for (n, line) in lines {
        let (id, values) = parse_vector_line(line, n, dim)?;
        store.push(id, &values).map_err(|e| match e {
            RetrievalError::DuplicateId(id) => ParseError::line(n, format!("duplicate image id `{id}`")),
            other => ParseError::line(n, other.to_string()),
        })?;
        last = n;
    }
    if store.len() != count {
        return Err(ParseError::line(last, format!("header declares {count} vectors, found {}", store.len())));
    }
    Ok(store)
}

pub fn load_features(path: &Path) -> Result<FeatureStore, FormatError> {
    parse_features(&read_text(path)?).map_err(|e| FormatError::parse(path, e))
}

pub fn write_features(path: &Path, store: &FeatureStore) -> Result<(), FormatError> {
    let mut out = format!("{} {}\n", store.len(), store.dim());
    for (id, row) in store.iter() {
        out.push_str(id);
        push_reals(&mut out, row);
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}
