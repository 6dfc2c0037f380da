use serde::Serialize;
use serde_json::{Map, Value};

use circlekit::exponents::DeltaRow;
use circlekit::verify::{MainTermConstants, VerificationRecord};

use crate::args::Common;

#[derive(Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
    pub command: String,
    pub flags: Value,
    pub budget: String,
}

#[derive(Debug, Serialize)]
pub struct SeriesEntry {
    pub k: u32,
    pub q_max: u64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub near_zero: bool,
    pub term_envelope: f64,
}

#[derive(Debug, Serialize)]
pub struct IntegralRow {
    pub k: u32,
    pub which: u8,
    pub span: f64,
    pub b: f64,
    pub value: f64,
    pub quadrature_error: f64,
    pub tail_bound: f64,
    pub oracle: Option<f64>,
    pub oracle_diff: Option<f64>,
}

#[derive(Debug, Default, Serialize)]
pub struct Integrals {
    pub values: Vec<IntegralRow>,
    pub main_term: Vec<MainTermConstants>,
}

/// Fixed top-level layout shared by every command; unused sections are null.
#[derive(Debug, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub delta_table: Option<Vec<DeltaRow>>,
    pub series: Option<Vec<SeriesEntry>>,
    pub integrals: Option<Integrals>,
    pub records: Vec<VerificationRecord>,
    pub diagnostics: Option<Map<String, Value>>,
}

impl Report {
    pub fn new(command: &str, flags: &Common, extra: Value, budget: u128) -> Self {
        let mut flags = serde_json::to_value(flags).expect("flags serialize");
        if let (Value::Object(map), Value::Object(more)) = (&mut flags, extra) {
            map.extend(more);
        }
        Report {
            meta: Meta {
                tool: "circle-kit",
                version: env!("CARGO_PKG_VERSION"),
                library_version: circlekit::VERSION,
                command: command.to_string(),
                flags,
                budget: budget.to_string(),
            },
            delta_table: None,
            series: None,
            integrals: None,
            records: Vec::new(),
            diagnostics: None,
        }
    }

    pub fn diagnostic<T: Serialize>(&mut self, name: &str, value: &T) {
        self.diagnostics.get_or_insert_with(Map::new).insert(
            name.to_string(),
            serde_json::to_value(value).expect("diagnostic serializes"),
        );
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        round_floats(&mut v);
        serde_json::to_string_pretty(&v).expect("value prints") + "\n"
    }
}

/// Round every float to 12 significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked");
            let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
            if let Some(m) = serde_json::Number::from_f64(r) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// A named CSV table.
pub struct Table {
    pub name: String,
    pub csv: String,
}

impl Table {
    pub fn new(name: impl Into<String>, csv: String) -> Self {
        Table {
            name: name.into(),
            csv,
        }
    }
}
