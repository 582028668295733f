//! Rendering: 12 significant digits everywhere, CSV with a header row, JSON
//! as a single document.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use empconc_core::verify::CheckReport;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// `x` rounded to 12 significant digits; non-finite values pass through.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest text for `sig12(x)`: positional for moderate magnitudes,
/// scientific below 1e-5 and from 1e16 on. NaN renders as an empty cell.
pub fn fmt_num(x: f64) -> String {
    let r = sig12(x);
    if r.is_nan() {
        String::new()
    } else if r != 0.0 && r.is_finite() && (r.abs() < 1e-5 || r.abs() >= 1e16) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Rounds every floating-point number in `v` to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = sig12(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn json_document<T: serde::Serialize>(value: &T) -> Result<String, String> {
    let v = serde_json::to_value(value).map_err(|e| e.to_string())?;
    let mut text = serde_json::to_string_pretty(&round_json(v)).map_err(|e| e.to_string())?;
    text.push('\n');
    Ok(text)
}

pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for row in rows {
        w.write_record(row).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

pub const REPORT_HEADER: [&str; 8] = [
    "check_name",
    "domain",
    "worst_margin",
    "pass",
    "advisory",
    "points_checked",
    "violation_count",
    "values",
];

pub fn report_rows(reports: &[CheckReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            let values: Vec<String> = r.values.iter().map(|(k, v)| format!("{k}={}", fmt_num(*v))).collect();
            vec![
                r.check_name.clone(),
                r.domain.clone(),
                fmt_num(r.worst_margin),
                r.pass.to_string(),
                r.advisory.to_string(),
                r.points_checked.to_string(),
                r.violation_count.to_string(),
                values.join(";"),
            ]
        })
        .collect()
}

pub fn render_reports(reports: &[CheckReport], format: OutputFormat) -> Result<String, String> {
    match format {
        OutputFormat::Json => json_document(&reports),
        OutputFormat::Csv => csv_document(&REPORT_HEADER, &report_rows(reports)),
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use empconc_core::verify::ReportBuilder;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num((-0.2f64).exp()), "0.818730753078");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(2.0 / 9.0), "0.222222222222");
        assert_eq!(fmt_num(f64::MAX), "1.79769313486e308");
        assert_eq!(fmt_num(f64::NAN), "");
        assert_eq!(fmt_num(-1.23456789012345e-9), "-1.23456789012e-9");
        assert_eq!(fmt_num(0.0001), "0.0001");
        assert_eq!(sig12(sig12(1.0 / 3.0)), sig12(1.0 / 3.0));
    }

    #[test]
    fn reports_render_both_ways() {
        let mut b = ReportBuilder::new("demo", "a, b", 1e-12);
        b.dominates(1.0, 1.0 / 3.0, || unreachable!());
        b.value("t0", 0.4634067204742797);
        let reports = vec![b.finish()];
        let csv = render_reports(&reports, OutputFormat::Csv).unwrap();
        assert_eq!(
            csv,
            "check_name,domain,worst_margin,pass,advisory,points_checked,violation_count,values\n\
             demo,\"a, b\",0.666666666667,true,false,1,0,t0=0.463406720474\n"
        );
        let json = render_reports(&reports, OutputFormat::Json).unwrap();
        let back: Vec<CheckReport> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[0].worst_margin, 0.666666666667);
        // rounding is idempotent, so a second pass reproduces the text
        assert_eq!(render_reports(&back, OutputFormat::Json).unwrap(), json);
    }
}
