//! Tabular reports and their CSV / JSON renderings.

use serde_json::{json, Map, Value as Json};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Self::Text(v.to_owned())
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Self::Missing, Self::Num)
    }
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Self::Int(i) => i.to_string(),
            Self::Num(x) => format_sig6(*x),
            Self::Text(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
            Self::Missing => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Self::Int(i) => json!(i),
            Self::Num(x) if x.is_finite() => json!(x),
            Self::Num(_) | Self::Missing => Json::Null,
            Self::Text(s) => json!(s),
            Self::Bool(b) => json!(b),
        }
    }
}

/// Six significant digits, fixed notation for moderate magnitudes and
/// exponent notation otherwise, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s.to_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::csv_field)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }

    fn to_json(&self) -> Json {
        Json::Array(
            self.rows
                .iter()
                .map(|row| {
                    let record: Map<String, Json> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| ((*c).to_owned(), v.json()))
                        .collect();
                    Json::Object(record)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub metadata: Metadata,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut doc = Map::new();
        doc.insert(
            "metadata".into(),
            json!({
                "tool": "bdrlab",
                "tool_version": env!("CARGO_PKG_VERSION"),
                "command": self.metadata.command,
                "seed": self.metadata.seed,
                "config_hash": self.metadata.config_hash,
            }),
        );
        for t in &self.tables {
            doc.insert(t.name.to_owned(), t.to_json());
        }
        let mut out = serde_json::to_vec_pretty(&Json::Object(doc)).map_err(|e| CliError::Output(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(-5.0), "-5");
        assert_eq!(format_sig6(156.20448), "156.204");
        assert_eq!(format_sig6(0.16031), "0.16031");
        assert_eq!(format_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(format_sig6(123456789.0), "1.23457e8");
        assert_eq!(format_sig6(1.5e-7), "1.5e-7");
        assert_eq!(format_sig6(999999.6), "1e6");
        assert_eq!(format_sig6(0.0), "0");
    }

    #[test]
    fn formatting_is_idempotent() {
        for x in [1.0 / 7.0, -2.5e-9, 12345.678, 8.68032, 1e21, 0.00012345678] {
            let once = format_sig6(x);
            assert_eq!(format_sig6(once.parse().unwrap()), once);
        }
    }

    #[test]
    fn csv_has_header_and_lf() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![Value::Int(1), Value::Num(0.5)]);
        t.push(vec![Value::Missing, Value::Text("x,y".into())]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "a,b\n1,0.5\n,\"x,y\"\n");
    }
}
