//! Rendering of result records as CSV, JSON or an aligned text table.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;

/// A flat record that can be written in every output format.
pub trait Record: Serialize {
    fn header() -> &'static [&'static str];
    fn csv_fields(&self) -> Vec<String>;
    /// Human-oriented cells, numbers at 2 decimals.
    fn table_fields(&self) -> Vec<String>;
}

/// Full-precision number text: shortest representation that round-trips,
/// switching to exponent form outside a readable range.
pub fn num(x: f64) -> String {
    if x == 0.0 || (1e-5..1e16).contains(&x.abs()) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), num)
}

pub fn opt_int(x: Option<u64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn dp2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub fn opt_dp2(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), dp2)
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_records<R: Record, W: Write>(
    w: &mut W,
    format: Format,
    inputs: &Value,
    rows: &[R],
) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut out = csv_writer(&mut *w);
            out.write_record(R::header())?;
            for r in rows {
                out.write_record(r.csv_fields())?;
            }
            out.flush()
        }
        Format::Json => write_json(w, json!({ "inputs": inputs, "rows": rows })),
        Format::Table => {
            writeln!(w, "# {}", describe_inputs(inputs))?;
            let cells: Vec<Vec<String>> = rows.iter().map(R::table_fields).collect();
            if let [single] = cells.as_slice() {
                // one record reads better as key/value lines
                let width = R::header().iter().map(|h| h.len()).max().unwrap_or(0);
                for (h, c) in R::header().iter().zip(single) {
                    writeln!(w, "{h:<width$}  {c}")?;
                }
                return Ok(());
            }
            write_aligned(w, R::header(), &cells)
        }
    }
}

pub fn write_json<W: Write>(w: &mut W, value: Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, &value)?;
    writeln!(w)
}

/// `key=value` pairs of a flat JSON object, in key order.
pub fn describe_inputs(inputs: &Value) -> String {
    match inputs.as_object() {
        Some(map) => map
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(" "),
        None => inputs.to_string(),
    }
}

pub fn write_aligned<W: Write>(w: &mut W, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (width, cell) in widths.iter_mut().zip(row) {
            *width = (*width).max(cell.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| -> String {
        cells
            .zip(&widths)
            .map(|(c, wd)| format!("{c:>wd$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(w, "{}", line(&mut header.iter().copied()))?;
    for row in rows {
        writeln!(w, "{}", line(&mut row.iter().map(String::as_str)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            1.0,
            9.440_815_2,
            1e-300,
            6.02e23,
            -0.948,
            1e-5,
            123_456.789,
        ] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1e-300), "1e-300");
        assert_eq!(num(0.25), "0.25");
    }

    #[test]
    fn two_decimals() {
        assert_eq!(dp2(-0.9475), "-0.95");
        assert_eq!(dp2(-1e-12), "0.00");
        assert_eq!(opt_dp2(None), "undefined");
    }

    #[test]
    fn aligned_table() {
        let mut buf = Vec::new();
        write_aligned(&mut buf, &["a", "bbb"], &[vec!["10".into(), "1".into()]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), " a  bbb\n10    1\n");
    }
}
