//! CSV and JSON emission helpers.
//!
//! Conventions shared by every exporter: `.` decimal separator, `,` CSV
//! delimiter, a header row, 12 significant digits, and infinities written
//! as the literal token `inf`. NaN is never written; encountering one is
//! an error.

use crate::{Error, Result};

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

/// Format a number with 12 significant digits, or `inf`.
pub fn fmt_sig(x: f64) -> Result<String> {
    if x.is_nan() {
        return Err(Error::Domain("refusing to write NaN".into()));
    }
    if x.is_infinite() {
        return Ok(if x > 0.0 { "inf".into() } else { "-inf".into() });
    }
    Ok(format!("{x:.11e}"))
}

fn cell_str(c: &Cell) -> Result<String> {
    match c {
        Cell::Num(x) => fmt_sig(*x),
        Cell::Text(s) => Ok(s.clone()),
    }
}

/// Write a CSV table; each row must match the header length.
pub fn write_csv(
    out: &mut impl std::io::Write,
    headers: &[&str],
    rows: &[Vec<Cell>],
) -> Result<()> {
    writeln!(out, "{}", headers.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        let fields: Result<Vec<String>> = row.iter().map(cell_str).collect();
        writeln!(out, "{}", fields?.join(","))?;
    }
    Ok(())
}

/// Write the same table as JSON: one array per column, numbers as numbers
/// and infinities as the string `"inf"`.
pub fn write_json(
    out: &mut impl std::io::Write,
    headers: &[&str],
    rows: &[Vec<Cell>],
) -> Result<()> {
    let mut obj = serde_json::Map::new();
    for (j, h) in headers.iter().enumerate() {
        let mut col = Vec::with_capacity(rows.len());
        for row in rows {
            let v = match &row[j] {
                Cell::Num(x) if x.is_nan() => {
                    return Err(Error::Domain("refusing to write NaN".into()))
                }
                Cell::Num(x) if x.is_infinite() => {
                    serde_json::Value::String(if *x > 0.0 { "inf" } else { "-inf" }.into())
                }
                Cell::Num(x) => serde_json::json!(x),
                Cell::Text(s) => serde_json::Value::String(s.clone()),
            };
            col.push(v);
        }
        obj.insert(h.to_string(), serde_json::Value::Array(col));
    }
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(obj))
        .map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_12_significant_digits() {
        assert_eq!(fmt_sig(0.649968944654883).unwrap(), "6.49968944655e-1");
        assert_eq!(fmt_sig(-12.5).unwrap(), "-1.25000000000e1");
        assert_eq!(fmt_sig(f64::INFINITY).unwrap(), "inf");
        assert!(fmt_sig(f64::NAN).is_err());
    }

    #[test]
    fn csv_and_json_round() {
        let rows = vec![
            vec![Cell::Num(1.0), Cell::Text("A".into()), Cell::Num(f64::INFINITY)],
            vec![Cell::Num(-2.5), Cell::Text("B".into()), Cell::Num(0.125)],
        ];
        let mut csv = Vec::new();
        write_csv(&mut csv, &["u", "case", "t"], &rows).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("u,case,t\n"));
        assert!(text.contains(",inf"));
        let mut js = Vec::new();
        write_json(&mut js, &["u", "case", "t"], &rows).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
        assert_eq!(v["case"][1], "B");
        assert_eq!(v["t"][0], "inf");
        assert_eq!(v["u"][1], -2.5);
    }
}
