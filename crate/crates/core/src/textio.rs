//! Shared helpers for the line-oriented text formats (basis, model, dataset).

use crate::error::{Error, Result};

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// 9 significant digits, used for result tables.
pub fn fmt_table(x: f64) -> String {
    format!("{x:.8e}")
}

pub(crate) fn join_exact(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&fmt_exact(*v));
    }
    out
}

pub(crate) fn parse_real(line: usize, field: &str, token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, field, format!("`{token}` is not a real number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, field, format!("`{token}` is not finite")));
    }
    Ok(v)
}

pub(crate) fn parse_usize(line: usize, field: &str, token: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::parse(line, field, format!("`{token}` is not a nonnegative integer")))
}

/// Parses whitespace-separated reals, requiring exactly `expected` of them.
pub(crate) fn parse_reals(line: usize, field: &str, text: &str, expected: usize) -> Result<Vec<f64>> {
    let values = text
        .split_whitespace()
        .map(|t| parse_real(line, field, t))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::parse(
            line,
            field,
            format!("expected {expected} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

/// Cursor over a text document yielding `key value...` lines with 1-based numbers.
/// Blank lines and `#` comments are skipped.
pub(crate) struct KeyedLines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> KeyedLines<'a> {
    pub fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
            last_line: 0,
        }
    }

    /// Next non-comment line as `(line_number, content)`.
    pub fn next_line(&mut self, wanted: &str) -> Result<(usize, &'a str)> {
        for (i, raw) in self.lines.by_ref() {
            self.last_line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok((i + 1, trimmed));
        }
        Err(Error::parse(
            self.last_line + 1,
            wanted,
            "unexpected end of file",
        ))
    }

    /// Next line, which must start with `key`; returns the remainder.
    pub fn expect(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, content) = self.next_line(key)?;
        let (head, rest) = content
            .split_once(char::is_whitespace)
            .unwrap_or((content, ""));
        if head != key {
            return Err(Error::parse(n, key, format!("expected `{key}`, found `{head}`")));
        }
        Ok((n, rest.trim()))
    }

    /// Errors if any non-comment content remains.
    pub fn expect_end(&mut self) -> Result<()> {
        for (i, raw) in self.lines.by_ref() {
            let trimmed = raw.trim();
            if !trimmed.is_empty() && !trimmed.starts_with('#') {
                return Err(Error::parse(i + 1, "end", "unexpected trailing content"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = fmt_exact(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn keyed_lines_report_line_numbers() {
        let text = "# header\nalpha 1 2\n\nbeta x\n";
        let mut lines = KeyedLines::new(text);
        let (n, rest) = lines.expect("alpha").unwrap();
        assert_eq!((n, rest), (2, "1 2"));
        let err = lines.expect("gamma").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn reals_count_is_enforced() {
        let err = parse_reals(7, "mean", "1 2 3", 4).unwrap_err();
        assert!(err.to_string().contains("line 7"));
        assert!(err.to_string().contains("mean"));
    }
}
