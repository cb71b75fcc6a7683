//! The `AC-FIELD v1` snapshot format.
//!
//! ```text
//! AC-FIELD v1 dim=2 N=64,32 L=1,0.5 t=0.25
//! 5.0000000000000000e-1
//! ...
//! ```
//!
//! One header line, then one value per line in row-major order (last axis
//! fastest). Values are written with 17 significant digits, which is enough
//! for every `f64` to survive a write/read cycle bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::torus_grid::{ScalarField, TorusGrid};

const MAGIC: &str = "AC-FIELD v1";

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn encode_field(field: &ScalarField, t: f64) -> String {
    let g = field.grid();
    let mut out = String::with_capacity(24 * (field.len() + 2));
    let _ = writeln!(
        out,
        "{MAGIC} dim={} N={} L={} t={}",
        g.dim(),
        join(g.points()),
        join(g.lengths()),
        t
    );
    for &v in field.values() {
        out.push_str(&format_value(v));
        out.push('\n');
    }
    out
}

fn bad(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "AC-FIELD v1 snapshot",
        detail: detail.into(),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, key: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.parse::<T>().map_err(|_| bad(format!("bad {key} entry {x:?}"))))
        .collect()
}

/// Parses a snapshot, returning the field and its time stamp.
pub fn decode_field(text: &str) -> Result<(ScalarField, f64)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| bad(format!("header does not start with {MAGIC:?}")))?;

    let (mut dim, mut points, mut lengths, mut t) = (None, None, None, None);
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| bad(format!("header token {token:?} is not key=value")))?;
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad("bad dim"))?),
            "N" => points = Some(parse_list::<usize>(value, "N")?),
            "L" => lengths = Some(parse_list::<f64>(value, "L")?),
            "t" => t = Some(value.parse::<f64>().map_err(|_| bad("bad t"))?),
            other => return Err(bad(format!("unknown header key {other:?}"))),
        }
    }
    let dim = dim.ok_or_else(|| bad("missing dim"))?;
    let points = points.ok_or_else(|| bad("missing N"))?;
    let lengths = lengths.ok_or_else(|| bad("missing L"))?;
    let t = t.ok_or_else(|| bad("missing t"))?;
    if points.len() != dim || lengths.len() != dim {
        return Err(bad("dim disagrees with N or L"));
    }
    let grid = TorusGrid::new(&lengths, &points)?;

    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = line
            .parse::<f64>()
            .map_err(|_| bad(format!("value line {} is not a number", i + 2)))?;
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(bad(format!(
            "expected {} values, found {}",
            grid.len(),
            values.len()
        )));
    }
    Ok((ScalarField::new(grid, values)?, t))
}

pub fn write_field(path: &Path, field: &ScalarField, t: f64) -> Result<()> {
    fs::write(path, encode_field(field, t)).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: &Path) -> Result<(ScalarField, f64)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_field(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = TorusGrid::new(&[1.0, 0.5], &[8, 8]).unwrap();
        let f = ScalarField::constant(g, 0.5).unwrap();
        let text = encode_field(&f, 0.25);
        let first = text.lines().next().unwrap();
        assert_eq!(first, "AC-FIELD v1 dim=2 N=8,8 L=1,0.5 t=0.25");
        assert_eq!(text.lines().nth(1).unwrap(), "5.0000000000000000e-1");
        assert_eq!(text.lines().count(), 65);
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode_field("").is_err());
        assert!(decode_field("AC-FIELD v2 dim=1 N=8 L=1 t=0").is_err());
        let short = "AC-FIELD v1 dim=1 N=8 L=1 t=0\n0.5\n";
        assert!(decode_field(short).is_err());
        let mut ok = String::from("AC-FIELD v1 dim=1 N=8 L=1 t=0\n");
        for _ in 0..8 {
            ok.push_str("0.5\n");
        }
        assert!(decode_field(&ok).is_ok());
        assert!(decode_field(&ok.replace("dim=1", "dim=2")).is_err());
        assert!(decode_field(&ok.replace("t=0", "t=0 x=1")).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            values in proptest::collection::vec(-1e300f64..1e300, 64),
            t in 0.0f64..1e6,
        ) {
            let g = TorusGrid::new(&[0.1 + t.fract(), 1.0], &[8, 8]).unwrap();
            let f = ScalarField::new(g, values).unwrap();
            let (back, tb) = decode_field(&encode_field(&f, t)).unwrap();
            prop_assert_eq!(tb.to_bits(), t.to_bits());
            prop_assert_eq!(back.grid(), f.grid());
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
