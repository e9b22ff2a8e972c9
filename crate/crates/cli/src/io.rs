use crate::CliError;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

/// Rows of `width` numbers separated by commas or whitespace. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_rows(text: &str, width: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if fields.len() != width {
            return Err(CliError::Input(format!("line {}: expected {width} value(s), found {}", k + 1, fields.len())));
        }
        let row = fields
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(CliError::Input(format!("line {}: `{f}` is not a finite number", k + 1))),
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input("empty sample".into()));
    }
    Ok(rows)
}

pub fn read_1d(path: &Path) -> Result<Vec<f64>, CliError> {
    Ok(parse_rows(&read_text(path)?, 1)?.into_iter().map(|r| r[0]).collect())
}

pub fn read_2d(path: &Path) -> Result<Vec<[f64; 2]>, CliError> {
    Ok(parse_rows(&read_text(path)?, 2)?.into_iter().map(|r| [r[0], r[1]]).collect())
}

pub fn read_mask(path: &Path) -> Result<String, CliError> {
    read_text(path)
}

/// Writes to `path`, or to standard output when it is `None`.
pub fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_with_comments_and_separators() {
        let rows = parse_rows("# header\n1, 2\n\n3 4\n", 2).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_rows("1\n2\nx\n", 1).unwrap_err().to_string();
        assert!(e.starts_with("line 3:"), "{e}");
        let e = parse_rows("1\n2 3\n", 1).unwrap_err().to_string();
        assert!(e.starts_with("line 2:"), "{e}");
        assert_eq!(parse_rows("# nothing\n", 1).unwrap_err().to_string(), "empty sample");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.5, -2.25e-9, 3e20, 0.1 + 0.2] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1.4e-14), "1.4e-14");
    }
}
