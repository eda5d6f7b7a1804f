use std::io::{self, Write};

use crate::diagnostics::LocalTemperature;

/// Significant digits written for every real number.
pub const CSV_DIGITS: usize = 12;

pub const UNITS_NOTE: &str =
    "units: energies in hbar*omega (level splitting 1), time in 1/omega, gamma in omega";

/// Formats `v` with [`CSV_DIGITS`] significant digits, trailing zeros trimmed.
/// Non-finite values become `inf`, `-inf` or `nan`.
pub fn format_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (CSV_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Temp(LocalTemperature),
    Flag(bool),
}

impl Value {
    pub fn render(&self) -> String {
        match *self {
            Value::Num(v) => format_sig(v),
            Value::Temp(LocalTemperature::Finite(v)) => format_sig(v),
            Value::Temp(t) => t.to_string(),
            Value::Flag(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Num(v) => v,
            Value::Temp(t) => t.value(),
            Value::Flag(b) => f64::from(u8::from(b)),
        }
    }
}

/// Metadata, header and rows of one output file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub metadata: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ScanTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric values of one column; panics on an unknown name.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self.column_index(name).unwrap_or_else(|| panic!("no column `{name}`"));
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for line in &self.metadata {
            if line.is_empty() {
                writeln!(w, "#")?;
            } else {
                writeln!(w, "# {line}")?;
            }
        }
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::render).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Metadata lines shared by every CSV: tool version, units and a config echo.
/// The echo sits between `config:` and `end config` and reparses as TOML.
pub fn metadata(mode: &str, config_toml: &str) -> Vec<String> {
    let mut m = vec![
        format!("qthermo {}", env!("CARGO_PKG_VERSION")),
        format!("mode: {mode}"),
        UNITS_NOTE.to_string(),
        "config:".to_string(),
    ];
    m.extend(config_toml.lines().map(|l| format!("  {l}")));
    m.push("end config".to_string());
    m
}

/// Recovers the echoed config text from CSV output written with [`metadata`].
pub fn config_echo(csv: &str) -> Option<String> {
    let mut lines = csv.lines().map_while(|l| l.strip_prefix('#'));
    lines.by_ref().find(|l| l.trim() == "config:")?;
    let mut out = String::new();
    for l in lines {
        if l.trim() == "end config" {
            return Some(out);
        }
        out.push_str(l.strip_prefix("   ").unwrap_or(l.trim_start()));
        out.push('\n');
    }
    None
}
