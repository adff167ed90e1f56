// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use anyhow::{bail, Context, Result};

/// A series read from CSV: values from the first column, optional labels
/// from the second.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub values: Vec<f64>,
    pub index: Option<Vec<String>>,
}

/// Reads one numeric column, optionally followed by an index column. A
/// first row whose value does not parse is taken as a header.
pub fn read_series(path: &Path) -> Result<Series> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: malformed CSV", path.display()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let field = record.get(0).unwrap_or("");
        let value = match field.parse::<f64>() {
            Ok(v) => v,
            Err(_) if line == 0 => continue,
            Err(_) => bail!("{}:{}: `{field}` is not a number", path.display(), line + 1),
        };
        if !value.is_finite() {
            bail!("{}:{}: non-finite value", path.display(), line + 1);
        }
        match (width, record.len()) {
            (None, w @ (1 | 2)) => width = Some(w),
            (None, w) => bail!("{}:{}: expected 1 or 2 columns, found {w}", path.display(), line + 1),
            (Some(w), got) if w != got => {
                bail!("{}:{}: expected {w} columns, found {got}", path.display(), line + 1)
            }
            _ => {}
        }
        values.push(value);
        if let Some(label) = record.get(1) {
            labels.push(label.to_string());
        }
    }
    if values.is_empty() {
        bail!("{}: no observations", path.display());
    }
    Ok(Series {
        values,
        index: (width == Some(2)).then_some(labels),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn header_and_index() {
        let f = write("value,date\n1.5,2020-01\n-2,2020-02\n");
        let s = read_series(f.path()).unwrap();
        assert_eq!(s.values, vec![1.5, -2.0]);
        assert_eq!(s.index.unwrap(), vec!["2020-01", "2020-02"]);
    }

    #[test]
    fn bare_column() {
        let s = read_series(write("1\n2\n\n3\n").path()).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0, 3.0]);
        assert!(s.index.is_none());
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_series(write("").path()).is_err());
        assert!(read_series(write("y\n").path()).is_err());
        assert!(read_series(write("1\nx\n").path()).is_err());
        assert!(read_series(write("1\nNaN\n").path()).is_err());
        assert!(read_series(write("1,a\n2\n").path()).is_err());
    }
}
