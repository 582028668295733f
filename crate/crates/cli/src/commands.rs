use serde::Serialize;

use empconc_core::bound_functions::{
    chernoff_optimized_tail, generic_bennett_tail, rademacher_tail_bound, BoundConstants, BoundParams, ConstantId,
    Side, TailForm,
};
use empconc_core::processes::format::load_scenario;
use empconc_core::processes::{with_workers, Scenario};
use empconc_core::verify::{certify_scenario, lemma_suite, CertifyOptions, CheckReport};

use crate::grid::parse_grid;
use crate::output::{csv_document, emit, fmt_num, json_document, render_reports, OutputFormat};
use crate::{Command, IoArgs};

/// Runs one subcommand; `Ok` carries the exit code, `Err` a usage diagnostic.
pub fn run(command: Command, io: &IoArgs) -> Result<u8, String> {
    if io.workers == Some(0) {
        return Err("--workers must be at least 1".into());
    }
    match command {
        Command::Bound {
            side,
            form,
            mean_z,
            v_n,
            x,
        } => bound(side, form, mean_z, v_n, x, io),
        Command::Invert {
            side,
            form,
            mean_z,
            v_n,
            delta,
        } => invert(side, form, mean_z, v_n, delta, io),
        Command::Compare { mean_z, v_n, x_grid } => compare(mean_z, v_n, &x_grid, io),
        Command::Simulate {
            scenario,
            trials,
            seed,
            x_grid,
            t_grid,
            mode,
            perturb,
        } => {
            let s = load_scenario(&scenario).map_err(|e| e.to_string())?;
            let x_grid = match x_grid {
                Some(g) => parse_grid(&g)?,
                None => default_x_grid(&s),
            };
            let opts = CertifyOptions {
                mode,
                x_grid,
                t_grid: parse_grid(&t_grid)?,
                trials,
                seed,
                workers: io.workers,
                constants: parse_perturbations(&perturb)?,
                ..CertifyOptions::default()
            };
            let reports = certify_scenario(&s, &opts).map_err(|e| e.to_string())?;
            finish_reports(&reports, io)
        }
        Command::Lemmas { grid_points } => {
            let reports = with_workers(io.workers, || lemma_suite(grid_points))
                .map_err(|e| e.to_string())?
                .map_err(|e| e.to_string())?;
            finish_reports(&reports, io)
        }
    }
}

fn finish_reports(reports: &[CheckReport], io: &IoArgs) -> Result<u8, String> {
    emit(&render_reports(reports, io.format)?, io.out.as_deref())?;
    Ok(if reports.iter().any(CheckReport::is_authoritative_failure) {
        1
    } else {
        0
    })
}

/// 50 deviations from 0 to twice the largest possible `|Z|`.
fn default_x_grid(s: &Scenario) -> Vec<f64> {
    let reach: f64 = (0..s.n())
        .map(|k| {
            (0..s.m())
                .flat_map(|i| s.values(i, k).iter().map(|v| v.abs()))
                .fold(0.0, f64::max)
        })
        .sum();
    let span = (2.0 * reach).max(1.0);
    (0..50).map(|i| span * i as f64 / 49.0).collect()
}

fn parse_perturbations(items: &[String]) -> Result<BoundConstants, String> {
    let mut c = BoundConstants::default();
    for item in items {
        let (name, rel) = item
            .split_once('=')
            .ok_or_else(|| format!("--perturb expects NAME=REL, got '{item}'"))?;
        let id: ConstantId = name.trim().parse()?;
        let rel: f64 = rel
            .trim()
            .parse()
            .map_err(|e| format!("bad perturbation '{rel}': {e}"))?;
        if !rel.is_finite() || rel <= -1.0 {
            return Err(format!("perturbation {rel} must be finite and above -1"));
        }
        c = c.perturbed(id, rel);
    }
    Ok(c)
}

fn params(mean_z: f64, v_n: f64) -> Result<BoundParams, String> {
    let p = BoundParams::new(mean_z, v_n).map_err(|e| e.to_string())?;
    if p.v() <= 0.0 {
        return Err(format!("v = v_n + 2 mean_z must be positive, got {}", p.v()));
    }
    Ok(p)
}

#[derive(Serialize)]
struct BoundRecord {
    side: Side,
    form: TailForm,
    mean_z: f64,
    v_n: f64,
    v: f64,
    x: f64,
    bound: f64,
}

fn bound(side: Side, form: TailForm, mean_z: f64, v_n: f64, x: f64, io: &IoArgs) -> Result<u8, String> {
    let p = params(mean_z, v_n)?;
    let value = BoundConstants::default()
        .tail(x, &p, form, side)
        .map_err(|e| e.to_string())?;
    let text = match io.format {
        OutputFormat::Json => json_document(&BoundRecord {
            side,
            form,
            mean_z,
            v_n,
            v: p.v(),
            x,
            bound: value,
        })?,
        OutputFormat::Csv => csv_document(
            &["side", "form", "mean_z", "v_n", "v", "x", "bound"],
            &[vec![
                side.to_string(),
                form.to_string(),
                fmt_num(mean_z),
                fmt_num(v_n),
                fmt_num(p.v()),
                fmt_num(x),
                fmt_num(value),
            ]],
        )?,
    };
    emit(&text, io.out.as_deref())?;
    Ok(0)
}

#[derive(Serialize)]
struct InvertRecord {
    side: Side,
    form: TailForm,
    mean_z: f64,
    v_n: f64,
    v: f64,
    delta: f64,
    x: f64,
    round_trip_error: f64,
}

fn invert(side: Side, form: TailForm, mean_z: f64, v_n: f64, delta: f64, io: &IoArgs) -> Result<u8, String> {
    let p = params(mean_z, v_n)?;
    let c = BoundConstants::default();
    let x = c.invert_tail(delta, &p, form, side).map_err(|e| e.to_string())?;
    let back = c.tail(x, &p, form, side).map_err(|e| e.to_string())?;
    let record = InvertRecord {
        side,
        form,
        mean_z,
        v_n,
        v: p.v(),
        delta,
        x,
        round_trip_error: (back - delta).abs(),
    };
    let text = match io.format {
        OutputFormat::Json => json_document(&record)?,
        OutputFormat::Csv => csv_document(
            &["side", "form", "mean_z", "v_n", "v", "delta", "x", "round_trip_error"],
            &[vec![
                side.to_string(),
                form.to_string(),
                fmt_num(mean_z),
                fmt_num(v_n),
                fmt_num(p.v()),
                fmt_num(delta),
                fmt_num(x),
                fmt_num(record.round_trip_error),
            ]],
        )?,
    };
    emit(&text, io.out.as_deref())?;
    Ok(0)
}

const COMPARE_COLUMNS: [&str; 12] = [
    "x",
    "upper_b",
    "upper_c_tight",
    "upper_c_simple",
    "upper_chernoff",
    "lower_b",
    "lower_c_tight",
    "lower_c_simple",
    "lower_chernoff",
    "bennett_a1_b1.5",
    "bennett_a1_b1",
    "median_gaussian",
];

const MEDIAN_NOTE: &str = "median_gaussian is exp(-x^2/(8 v_n)) for deviations above a median of Z, \
     not above E(Z); it is blank when v_n = 0";

#[derive(Serialize)]
struct CompareDocument {
    mean_z: f64,
    v_n: f64,
    v: f64,
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    notes: Vec<&'static str>,
}

fn compare_row(x: f64, p: &BoundParams) -> Result<Vec<f64>, String> {
    let c = BoundConstants::default();
    let mut row = vec![x];
    for side in [Side::Upper, Side::Lower] {
        for form in TailForm::ALL {
            row.push(c.tail(x, p, form, side).map_err(|e| e.to_string())?);
        }
        row.push(chernoff_optimized_tail(x, p, side).map_err(|e| e.to_string())?.bound);
    }
    for b in [1.5, 1.0] {
        row.push(generic_bennett_tail(x, p.v(), 1.0, b).map_err(|e| e.to_string())?);
    }
    row.push(if p.v_n() > 0.0 {
        rademacher_tail_bound(x, p.v_n()).map_err(|e| e.to_string())?
    } else {
        f64::NAN
    });
    Ok(row)
}

fn compare(mean_z: f64, v_n: f64, x_grid: &str, io: &IoArgs) -> Result<u8, String> {
    let p = params(mean_z, v_n)?;
    let xs = parse_grid(x_grid)?;
    let rows = xs.iter().map(|&x| compare_row(x, &p)).collect::<Result<Vec<_>, _>>()?;
    let text = match io.format {
        OutputFormat::Json => json_document(&CompareDocument {
            mean_z,
            v_n,
            v: p.v(),
            columns: COMPARE_COLUMNS.to_vec(),
            rows,
            notes: vec![MEDIAN_NOTE],
        })?,
        OutputFormat::Csv => {
            eprintln!("note: {MEDIAN_NOTE}");
            let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|v| fmt_num(*v)).collect()).collect();
            csv_document(&COMPARE_COLUMNS, &cells)?
        }
    };
    emit(&text, io.out.as_deref())?;
    Ok(0)
}
