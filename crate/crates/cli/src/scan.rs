use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use classicality::indicators::closed_form;
use classicality::strata::{enumerate_strata, moduli_grid, spectrum_from_moduli};
use classicality::{
    indicator, DegeneracyType, Error, Extended, IndicatorOptions, IndicatorResult, KernelSpectrum, RealScalar, Result,
    Scalar, DEFAULT_SEED,
};
use rayon::prelude::*;
use serde_json::json;

use crate::{parse_method, parse_stratum};

/// Relative tolerance between an engine value and a closed form.
const AGREEMENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanArith {
    Extended,
    Double,
}

#[derive(Args)]
pub struct ScanArgs {
    #[arg(long)]
    n: usize,
    /// Points per moduli angle.
    #[arg(long, default_value_t = 50)]
    grid: usize,
    /// Strata such as `2,1`, repeatable or `;`-separated, or `all`.
    /// Defaults to every stratum except the maximal one.
    #[arg(long)]
    stratum: Vec<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ScanArith::Extended)]
    arith: ScanArith,
}

fn resolve_strata(raw: &[String], n: usize) -> Result<Vec<DegeneracyType>> {
    let all = enumerate_strata(n)?.strata;
    let parts: Vec<&str> = raw.iter().flat_map(|s| s.split(';')).map(str::trim).filter(|s| !s.is_empty()).collect();
    if parts.is_empty() {
        return Ok(all.into_iter().filter(|k| !k.is_full()).collect());
    }
    if parts.iter().any(|p| p.eq_ignore_ascii_case("all")) {
        return Ok(all);
    }
    parts.iter().map(|p| parse_stratum(Some(p), n)).collect()
}

pub fn angle_columns(n: usize) -> Vec<String> {
    match n {
        2 => vec![],
        3 => vec!["zeta".into()],
        4 => vec!["psi1".into(), "psi2".into()],
        _ => (1..=n - 2).map(|i| format!("angle{i}")).collect(),
    }
}

fn flag<S: Scalar>(k: &DegeneracyType, pi: &KernelSpectrum<S>, r: &IndicatorResult<S>) -> &'static str {
    match closed_form(k, pi) {
        None => "unchecked",
        Some(cf) => {
            let (v, c) = (r.value.to_f64(), cf.to_f64());
            let tol = AGREEMENT_TOL * c.abs() + 4.0 * r.stderr.unwrap_or(0.0);
            if (v - c).abs() <= tol {
                "ok"
            } else {
                "disputed"
            }
        }
    }
}

fn rows_for<S: RealScalar>(
    a: &ScanArgs,
    strata: &[DegeneracyType],
    idx: usize,
    angles: &[f64],
) -> Result<Vec<Vec<String>>> {
    let pi = spectrum_from_moduli::<S>(a.n, angles)?;
    let opts = IndicatorOptions {
        mc_samples: a.mc_samples,
        seed: a.seed.wrapping_add(idx as u64),
    };
    let head: Vec<String> = angles.iter().map(Scalar::decimal_string).collect();
    strata
        .iter()
        .map(|k| {
            let method = parse_method(a.method.as_deref(), k)?;
            let r = indicator(k, &pi, method, &opts)?;
            let mut row = head.clone();
            row.push(k.plus_string());
            row.push(r.value.decimal_string());
            row.push(method.name().to_string());
            row.push(flag(k, &pi, &r).to_string());
            Ok(row)
        })
        .collect()
}

pub fn scan_rows(a: &ScanArgs) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let strata = resolve_strata(&a.stratum, a.n)?;
    let points = moduli_grid(a.n, a.grid)?;
    let per_point: Vec<Vec<Vec<String>>> = points
        .par_iter()
        .enumerate()
        .map(|(i, ang)| match a.arith {
            ScanArith::Extended => rows_for::<Extended>(a, &strata, i, ang),
            ScanArith::Double => rows_for::<f64>(a, &strata, i, ang),
        })
        .collect::<Result<_>>()?;
    let mut header = angle_columns(a.n);
    header.extend(["stratum", "q_value", "method", "flag"].map(String::from));
    Ok((header, per_point.into_iter().flatten().collect()))
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Domain(format!("output: {e}"))
}

pub fn run(a: &ScanArgs) -> Result<()> {
    let (header, rows) = scan_rows(a)?;
    let mut out: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(File::create(p).map_err(io_err)?),
        None => Box::new(io::stdout().lock()),
    };
    match a.format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
            w.write_record(&header).map_err(io_err)?;
            for r in &rows {
                w.write_record(r).map_err(io_err)?;
            }
            w.flush().map_err(io_err)?;
        }
        Format::Json => {
            let doc = json!({
                "n": a.n,
                "grid": a.grid,
                "seed": a.seed,
                "arithmetic": match a.arith {
                    ScanArith::Extended => Extended::NAME,
                    ScanArith::Double => f64::NAME,
                },
                "columns": header,
                "rows": rows,
            });
            let s = serde_json::to_string_pretty(&doc).map_err(io_err)?;
            writeln!(out, "{s}").map_err(io_err)?;
        }
    }
    Ok(())
}
