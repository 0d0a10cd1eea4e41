use std::fmt::Write;
use std::path::Path;

use imgtopic_core::eval::{CurveKey, EvalReport};

use super::{numbered_lines, write_file, FormatError, ParseError};

pub const CURVES_HEADER: &str = "mode,method,n_images,mean_jaccard";

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub mode: String,
    pub method: String,
    pub n_images: usize,
    pub mean_jaccard: f64,
}

/// One row per report point, means with six decimals.
pub fn render_curves(report: &EvalReport) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for p in &report.points {
        let CurveKey { mode, method, n_images } = p.key;
        writeln!(out, "{mode},{method},{n_images},{:.6}", p.mean_jaccard).expect("writing to a String");
    }
    out
}

pub fn write_curves(path: &Path, report: &EvalReport) -> Result<(), FormatError> {
    write_file(path, render_curves(report).as_bytes())
}

pub fn parse_curves(text: &str) -> Result<Vec<CurveRow>, ParseError> {
    let mut lines = numbered_lines(text);
    match lines.next() {
        Some((_, h)) if h == CURVES_HEADER => {}
        Some((n, h)) => return Err(ParseError::line(n, format!("unexpected header `{h}`"))),
        None => return Err(ParseError::whole("missing header")),
    }
    lines
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            let [mode, method, n_images, mean] = fields[..] else {
                return Err(ParseError::line(n, "expected 4 comma-separated fields"));
            };
            Ok(CurveRow {
                mode: mode.to_string(),
                method: method.to_string(),
                n_images: n_images.parse().map_err(|_| ParseError::line(n, "bad n_images"))?,
                mean_jaccard: mean.parse().map_err(|_| ParseError::line(n, "bad mean_jaccard"))?,
            })
        })
        .collect()
}
