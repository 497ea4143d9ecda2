//! Byte-stable report serialization.
//!
//! JSON objects are emitted with sorted keys and every non-integer number is
//! printed with 17 significant digits in exponent form, e.g.
//! `5.0000000000000000e-1`.
//! CSV has one row per trial, then a blank line and a `key,value` summary block.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};
use thiserror::Error;

use super::config::Format;
use super::run::ScenarioReport;

#[derive(Debug, Error)]
#[error("failed to write report to {path}: {source}")]
pub struct WriteError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// 17 significant digits, exponent form with an explicit exponent sign.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => s,
    }
}

fn canonical(value: Value) -> Value {
    match value {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            let x = n.as_f64().expect("finite report number");
            Value::Number(format_real(x).parse::<Number>().expect("valid JSON number"))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, canonical(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

/// `{config, trials, summary}` with canonical number formatting.
pub fn to_json_value(report: &ScenarioReport) -> Value {
    canonical(serde_json::to_value(report).expect("report serializes"))
}

pub fn to_json(report: &ScenarioReport) -> String {
    let mut out = serde_json::to_string_pretty(&to_json_value(report)).expect("report serializes");
    out.push('\n');
    out
}

fn cell(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn to_csv(report: &ScenarioReport) -> String {
    let value = to_json_value(report);
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["trial", "outcome", "detail"])
        .expect("in-memory write");
    for trial in value["trials"].as_array().into_iter().flatten() {
        writer
            .write_record([
                cell(&trial["trial"]),
                cell(&trial["outcome"]),
                cell(&trial["detail"]),
            ])
            .expect("in-memory write");
    }
    let mut out =
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv");
    out.push('\n');

    let mut footer = csv::Writer::from_writer(Vec::new());
    footer
        .write_record(["summary", "value"])
        .expect("in-memory write");
    for (key, v) in value["summary"].as_object().into_iter().flatten() {
        footer
            .write_record([key.clone(), cell(v)])
            .expect("in-memory write");
    }
    out.push_str(
        std::str::from_utf8(&footer.into_inner().expect("in-memory flush")).expect("utf-8 csv"),
    );
    out
}

pub fn render(report: &ScenarioReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}

pub fn emit_report(report: &ScenarioReport, format: Format, path: &Path) -> Result<(), WriteError> {
    fs::write(path, render(report, format)).map_err(|source| WriteError {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn reals_use_seventeen_digits() {
        assert_eq!(format_real(0.5), "5.0000000000000000e-1");
        assert_eq!(format_real(1.0), "1.0000000000000000e+0");
        let v = canonical(json!({"b": 0.25, "a": [1, 2.0]}));
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":[1,2.0000000000000000e+0],"b":2.5000000000000000e-1}"#
        );
    }
}
