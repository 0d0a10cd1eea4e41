use std::fmt::Write;
use std::path::Path;

use imgtopic_core::TagTriad;

use super::{numbered_lines, read_text, write_file, FormatError, ParseError};

/// `image_id<TAB>query_text<TAB>click_count` per line; blank lines are skipped.
pub fn parse_triads(text: &str) -> Result<Vec<TagTriad>, ParseError> {
    numbered_lines(text)
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            let [id, query, clicks] = fields[..] else {
                return Err(ParseError::line(n, format!("expected 3 tab-separated fields, found {}", fields.len())));
            };
            let clicks: u64 = clicks
                .trim()
                .parse()
                .map_err(|_| ParseError::line(n, format!("click count `{clicks}` is not a non-negative integer")))?;
            TagTriad::new(id, query, clicks).map_err(|e| ParseError::line(n, e.to_string()))
        })
        .collect()
}

pub fn load_triads(path: &Path) -> Result<Vec<TagTriad>, FormatError> {
    parse_triads(&read_text(path)?).map_err(|e| FormatError::parse(path, e))
}

pub fn write_triads(path: &Path, triads: &[TagTriad]) -> Result<(), FormatError> {
    let mut out = String::new();
    for t in triads {
        writeln!(out, "{}\t{}\t{}", t.image_id(), t.query_text(), t.click_count()).expect("writing to a String");
    }
    write_file(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::Location;

    #[test]
    fn parses_and_skips_blank_lines() {
        let t = parse_triads("i1\tred car\t3\n\ni2\tboat\t1\r\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].image_id(), "i2");
        assert_eq!(t[1].click_count(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_triads("i1\ta\t1\ni2\tb\n").unwrap_err().location, Location::Line(2));
        assert_eq!(parse_triads("i1\ta\tx\n").unwrap_err().location, Location::Line(1));
        assert_eq!(parse_triads("a\tb\t1\ni3\tc\t0\n").unwrap_err().location, Location::Line(2));
    }
}
