use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde_json::{json, Value};

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form outside
/// `1e-4 ≤ |x| < 1e12`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (11 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV field.
pub enum Cell {
    F(f64),
    S(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_float(*x),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::S(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::S(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::S(s)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(n: $t) -> Self {
                Cell::S(n.to_string())
            }
        }
    )*};
}
int_cell!(u32, u64, usize);

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

pub fn manifest(command: &str, params: Value, seed: Option<u64>, elapsed_s: f64) -> Value {
    json!({
        "command": command,
        "params": params,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "elapsed_s": elapsed_s,
    })
}

/// `BASE.csv` and `BASE.json` with `--out BASE`; otherwise CSV on stdout and the
/// manifest on stderr.
pub fn emit(table: &Table, manifest: &Value, out: Option<&PathBuf>) -> io::Result<()> {
    let csv = table.to_csv()?;
    let json = serde_json::to_string_pretty(manifest)? + "\n";
    match out {
        Some(base) => {
            let with_ext = |ext: &str| {
                let mut s = base.clone().into_os_string();
                s.push(ext);
                PathBuf::from(s)
            };
            fs::write(with_ext(".csv"), csv)?;
            fs::write(with_ext(".json"), json)
        }
        None => {
            io::stdout().lock().write_all(&csv)?;
            io::stderr().lock().write_all(json.as_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printf_g_style() {
        assert_eq!(fmt_float(0.5 * 5f64.ln()), "0.804718956217");
        assert_eq!(fmt_float(2.5), "2.5");
        assert_eq!(fmt_float(-3.0), "-3");
        assert_eq!(fmt_float(1e-5), "1e-05");
        assert_eq!(fmt_float(1.25e-4), "0.000125");
        assert_eq!(fmt_float(123456789012.0), "123456789012");
        assert_eq!(fmt_float(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_float(0.9999999999999), "1");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_float(f64::NAN), "nan");
    }

    #[test]
    fn csv_quotes_only_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(row!["x,y", 1.5]);
        t.push(row![Option::<f64>::None, true]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "a,b\n\"x,y\",1.5\n,true\n");
    }
}
