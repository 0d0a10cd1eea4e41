use std::path::Path;

use imgtopic_core::StopList;

use super::{numbered_lines, read_text, write_file, FormatError};

/// One word per line, surrounding whitespace trimmed, blank lines skipped.
pub fn parse_word_list(text: &str) -> Vec<String> {
    numbered_lines(text).map(|(_, l)| l.trim().to_string()).collect()
}

pub fn load_stoplist(path: &Path) -> Result<StopList, FormatError> {
    Ok(StopList::parse(&read_text(path)?))
}

pub fn load_dictionary(path: &Path) -> Result<Vec<String>, FormatError> {
    Ok(parse_word_list(&read_text(path)?))
}

pub fn write_word_list<S: AsRef<str>>(path: &Path, words: &[S]) -> Result<(), FormatError> {
    let mut out = String::new();
    for w in words {
        out.push_str(w.as_ref());
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}
