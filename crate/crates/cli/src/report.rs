//! Report model and the three output formats.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unconverged,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
            Self::Unconverged => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub input: String,
    pub input_sha256: String,
    pub tolerances: BTreeMap<&'static str, f64>,
}

impl Provenance {
    pub fn new(seed: u64, input: String, bytes: &[u8]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            input,
            input_sha256: hex::encode(Sha256::digest(bytes)),
            tolerances: BTreeMap::new(),
        }
    }

    pub fn tol(mut self, name: &'static str, value: f64) -> Self {
        self.tolerances.insert(name, value);
        self
    }
}

/// One named comparison `|value − expected| ≤ tolerance` (or `value ≤ tolerance`
/// when nothing is expected).
#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub value: f64,
    pub expected: Option<f64>,
    /// Exact form of the expected value, when there is one.
    pub exact: Option<String>,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn near(check: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            value,
            expected: Some(expected),
            exact: None,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }

    pub fn at_most(check: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            value,
            expected: None,
            exact: None,
            tolerance,
            pass: value <= tolerance,
        }
    }

    pub fn flag(check: impl Into<String>, pass: bool) -> Self {
        Self {
            check: check.into(),
            value: if pass { 1.0 } else { 0.0 },
            expected: Some(1.0),
            exact: None,
            tolerance: 0.0,
            pass,
        }
    }

    pub fn exact(mut self, s: impl ToString) -> Self {
        self.exact = Some(s.to_string());
        self
    }
}

/// What a command produced, in the shape each output format needs.
pub trait Payload: Serialize {
    /// Header and rows for csv and table output.
    fn rows(&self) -> (Vec<&'static str>, Vec<Vec<String>>);
}

#[derive(Serialize)]
pub struct Report<T: Payload> {
    pub command: &'static str,
    pub status: Status,
    pub provenance: Provenance,
    pub checks: Vec<CheckRow>,
    pub result: T,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

impl<T: Payload> Report<T> {
    pub fn new(command: &'static str, provenance: Provenance, checks: Vec<CheckRow>, result: T) -> Self {
        let status = if checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self { command, status, provenance, checks, result, messages: Vec::new() }
    }

    pub fn render(&self, format: Format) -> io::Result<Vec<u8>> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => {
                let (header, rows) = self.result.rows();
                if rows.is_empty() {
                    check_csv(&self.checks)
                } else {
                    csv_bytes(&header, &rows)
                }
            }
            Format::Table => Ok(self.table().into_bytes()),
        }
    }

    fn table(&self) -> String {
        let mut out = format!(
            "{} {} [{}] ({} {}, seed {})\n",
            self.command,
            self.provenance.input,
            status_word(self.status),
            self.provenance.tool,
            self.provenance.version,
            self.provenance.seed
        );
        if !self.checks.is_empty() {
            let rows = self.checks.iter().map(check_cells).collect::<Vec<_>>();
            out += &aligned(&CHECK_HEADER, &rows);
        }
        let (header, rows) = self.result.rows();
        if !rows.is_empty() {
            out += "\n";
            out += &aligned(&header, &rows);
        }
        for m in &self.messages {
            out += &format!("note: {m}\n");
        }
        out
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Unconverged => "UNCONVERGED",
    }
}

const CHECK_HEADER: [&str; 6] = ["check", "value", "expected", "exact", "tolerance", "pass"];

fn check_cells(c: &CheckRow) -> Vec<String> {
    vec![
        c.check.clone(),
        fmt_f64(c.value),
        c.expected.map(fmt_f64).unwrap_or_default(),
        c.exact.clone().unwrap_or_default(),
        fmt_f64(c.tolerance),
        if c.pass { "yes" } else { "NO" }.into(),
    ]
}

fn check_csv(checks: &[CheckRow]) -> io::Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = checks.iter().map(check_cells).collect();
    csv_bytes(&CHECK_HEADER, &rows)
}

/// Shortest representation that reads back to the same double, in exponent
/// form for very small or very large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        s.truncate(s.trim_end().len());
        s + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

/// Pretty JSON whose floats carry 17 significant digits.
struct SigFigs<'a>(PrettyFormatter<'a>);

impl Formatter for SigFigs<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigs(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(io::Error::other)?;
    out.push(b'\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_floats_have_seventeen_digits() {
        let s = String::from_utf8(to_json(&vec![0.5, 11.0 / 12.0]).unwrap()).unwrap();
        assert!(s.contains("5.0000000000000000e-1"), "{s}");
        assert!(s.contains("9.1666666666666663e-1"), "{s}");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.5, 11.0 / 12.0]);
    }

    #[test]
    fn non_finite_floats_become_null() {
        let s = String::from_utf8(to_json(&vec![f64::NAN]).unwrap()).unwrap();
        assert!(s.contains("null"));
    }

    #[test]
    fn number_cells_round_trip() {
        for x in [0.0, 0.5, 11.0 / 12.0, 3.6880726988814706e-17, 1e-9, -2.5e20] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1e-9), "1e-9");
        assert_eq!(fmt_f64(0.875), "0.875");
    }

    #[test]
    fn check_rows() {
        assert!(CheckRow::near("x", 1.0, 1.0 + 1e-12, 1e-9).pass);
        assert!(!CheckRow::at_most("r", 1e-3, 1e-9).pass);
        assert!(CheckRow::flag("ok", true).pass);
    }

    #[test]
    fn aligned_columns() {
        let t = aligned(&["a", "bb"], &[vec!["long".into(), "1".into()]]);
        assert_eq!(t, "a     bb\nlong  1\n");
    }
}
