//! Single-column series files.
//!
//! One value per line, an optional `value` header, `#` comments and blank
//! lines are skipped.

use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected one column, found {found}")]
    Columns { line: u64, found: usize },
    #[error("line {line}: cannot parse {text:?} as a number")]
    Parse { line: u64, text: String },
    #[error("line {line}: value {value} is not finite")]
    NotFinite { line: u64, value: f64 },
    #[error("line {line}: {source}")]
    Csv { line: u64, source: csv::Error },
    #[error("a series needs at least 2 values, found {0}")]
    TooShort(usize),
}

pub fn read_series(path: &Path) -> Result<Vec<f64>, SeriesError> {
    let io = |source| SeriesError::Io { path: path.display().to_string(), source };
    let mut text = String::new();
    std::fs::File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(io)?;
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<Vec<f64>, SeriesError> {
    let mut out = Vec::new();
    let mut first = true;
    // Lines are counted by hand: the csv reader does not count skipped comments.
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let rec = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(raw.as_bytes())
            .into_records()
            .next()
            .transpose()
            .map_err(|source| SeriesError::Csv { line, source })?
            .unwrap_or_default();
        if rec.len() != 1 {
            return Err(SeriesError::Columns { line, found: rec.len() });
        }
        let field = &rec[0];
        if std::mem::take(&mut first) && field.eq_ignore_ascii_case("value") {
            continue;
        }
        let value: f64 =
            field.parse().map_err(|_| SeriesError::Parse { line, text: field.to_string() })?;
        if !value.is_finite() {
            return Err(SeriesError::NotFinite { line, value });
        }
        out.push(value);
    }
    if out.len() < 2 {
        return Err(SeriesError::TooShort(out.len()));
    }
    Ok(out)
}

pub fn write_series<W: Write>(w: W, values: &[f64], header: bool) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if header {
        wtr.write_record(["value"])?;
    }
    for v in values {
        wtr.write_record([format_f64(*v)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Shortest representation that round-trips.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comments_and_blanks() {
        let s = parse_series("# gauge 7\nvalue\n1.5\n\n-2e-3\n# end\n4\n").unwrap();
        assert_eq!(s, vec![1.5, -0.002, 4.0]);
        let e = parse_series("# a\n# b\n1\n\nx\n").unwrap_err();
        assert!(matches!(e, SeriesError::Parse { line: 5, .. }), "{e}");
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_series("value\n1\n2\nabc\n").unwrap_err();
        assert!(matches!(e, SeriesError::Parse { line: 4, .. }), "{e}");
        let e = parse_series("1\n2,3\n").unwrap_err();
        assert!(matches!(e, SeriesError::Columns { line: 2, found: 2 }), "{e}");
        let e = parse_series("1\nNaN\n").unwrap_err();
        assert!(matches!(e, SeriesError::NotFinite { line: 2, .. }), "{e}");
        assert!(matches!(parse_series("value\n3\n"), Err(SeriesError::TooShort(1))));
    }

    #[test]
    fn write_then_read() {
        let v = vec![0.1, -1.0 / 3.0, 1e300];
        let mut buf = Vec::new();
        write_series(&mut buf, &v, true).unwrap();
        assert_eq!(parse_series(std::str::from_utf8(&buf).unwrap()).unwrap(), v);
    }
}
