mod scan;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use classicality::strata::spectrum_from_moduli;
use classicality::verify::{run_all, table, Level};
use classicality::{
    indicator, DegeneracyType, Error, Extended, IndicatorOptions, KernelSpectrum, Method, Rational, Result, Scalar,
    Surd, DEFAULT_SEED,
};
use serde_json::Value;

/// Residual accepted on user-supplied spectra before projection.
const INPUT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "classicality", version, about = "Classicality indicators of finite-level Wigner kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Indicator for one spectrum and stratum, printed as JSON.
    Compute(ComputeArgs),
    /// Indicators over a grid of moduli angles.
    Scan(scan::ScanArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Arith {
    Auto,
    Exact,
    Extended,
    Double,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    n: usize,
    /// Multiplicities, e.g. `2,1`; defaults to the regular stratum.
    #[arg(long)]
    stratum: Option<String>,
    /// Kernel eigenvalues, e.g. `1,1,-1` or `1/2+1/2*sqrt(3),1/2-1/2*sqrt(3)`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "moduli")]
    spectrum: Option<Vec<String>>,
    /// Moduli angles in radians; `pi/3` style values are accepted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    moduli: Option<Vec<String>>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Arith::Auto)]
    arith: Arith,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
    level: LevelArg,
}

/// Caps the global worker pool when `CLASSICALITY_THREADS` is set.
fn configure_threads() {
    let threads = std::env::var("CLASSICALITY_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok());
    if let Some(t) = threads.filter(|&t| t > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let res = match cli.command {
        Command::Compute(a) => compute(&a).map(|v| {
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            0
        }),
        Command::Scan(a) => scan::run(&a).map(|_| 0),
        Command::Verify(a) => {
            let level = match a.level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let outcomes = run_all(level);
            print!("{}", table(&outcomes));
            Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
        }
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub fn parse_stratum(s: Option<&str>, n: usize) -> Result<DegeneracyType> {
    let k = match s {
        None => DegeneracyType::regular(n),
        Some(s) => DegeneracyType::parse(s)?,
    };
    if k.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: k.n() });
    }
    Ok(k)
}

pub fn parse_method(s: Option<&str>, k: &DegeneracyType) -> Result<Method> {
    match s {
        Some(s) => s.parse(),
        None => Ok(Method::default_for_degree(k.density_degree())),
    }
}

/// Radians, optionally written as `a*pi/b`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let bad = || Error::Parse(format!("invalid angle {s:?}"));
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let coeff = match head.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let div = match tail {
        "" => 1.0,
        d => d.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coeff * std::f64::consts::PI / div)
}

fn sorted<S: Scalar>(mut pi: Vec<S>) -> Vec<S> {
    pi.sort_by(|a, b| b.to_f64().total_cmp(&a.to_f64()));
    pi
}

fn parse_spectrum<S: Scalar>(raw: &[String]) -> Result<KernelSpectrum<S>> {
    let pi = raw.iter().map(|s| S::parse_str(s.trim())).collect::<Result<Vec<S>>>()?;
    KernelSpectrum::projected(sorted(pi), INPUT_TOL)
}

/// Exact spectrum when every entry is rational or lies in one quadratic field.
fn exact_spectrum(raw: &[String]) -> Option<Result<KernelSpectrum<Surd>>> {
    let pi = raw.iter().map(|s| Surd::parse(s.trim())).collect::<Result<Vec<Surd>>>().ok()?;
    let mut fields = pi.iter().map(Surd::radicand).filter(|&d| d != 0);
    if let Some(d) = fields.next() {
        if fields.any(|e| e != d) {
            return None;
        }
    }
    Some(KernelSpectrum::new(sorted(pi)))
}

fn run<S: Scalar>(k: &DegeneracyType, pi: &KernelSpectrum<S>, method: Method, opts: &IndicatorOptions) -> Result<Value> {
    if pi.n() != k.n() {
        return Err(Error::DimensionMismatch { expected: k.n(), got: pi.n() });
    }
    Ok(indicator(k, pi, method, opts)?.to_json())
}

fn compute(a: &ComputeArgs) -> Result<Value> {
    let n = a.n;
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    let k = parse_stratum(a.stratum.as_deref(), n)?;
    let method = parse_method(a.method.as_deref(), &k)?;
    let opts = IndicatorOptions {
        mc_samples: a.mc_samples,
        seed: a.seed,
    };
    let arith = match a.arith {
        Arith::Auto if method == Method::MonteCarlo => Arith::Double,
        x => x,
    };
    if let Some(raw) = &a.spectrum {
        if raw.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: raw.len() });
        }
        return match arith {
            Arith::Auto => match exact_spectrum(raw) {
                Some(Ok(pi)) => run(&k, &pi, method, &opts),
                Some(Err(Error::InvalidSpectrum { .. })) | None => {
                    run(&k, &parse_spectrum::<Extended>(raw)?, method, &opts)
                }
                Some(Err(e)) => Err(e),
            },
            Arith::Exact => match exact_spectrum(raw) {
                Some(pi) => run(&k, &pi?, method, &opts),
                None => Err(Error::Domain(
                    "exact arithmetic needs rational entries or entries from one quadratic field".into(),
                )),
            },
            Arith::Extended => run(&k, &parse_spectrum::<Extended>(raw)?, method, &opts),
            Arith::Double => run(&k, &parse_spectrum::<f64>(raw)?, method, &opts),
        };
    }
    let angles = match &a.moduli {
        Some(raw) => raw.iter().map(|s| parse_angle(s)).collect::<Result<Vec<f64>>>()?,
        None if n == 2 => vec![],
        None => return Err(Error::Domain("one of --spectrum or --moduli is required for n >= 3".into())),
    };
    match arith {
        Arith::Auto | Arith::Exact => {
            if n == 2 && angles.is_empty() {
                return run(&k, &KernelSpectrum::<Surd>::qubit()?, method, &opts);
            }
            if n == 3 && angles.len() == 1 {
                if let Some(pi) = qutrit_endpoint(angles[0]) {
                    return run(&k, &pi?, method, &opts);
                }
            }
            if arith == Arith::Exact {
                return Err(Error::Domain("these moduli have no exact spectrum; use --arith extended".into()));
            }
            run(&k, &spectrum_from_moduli::<Extended>(n, &angles)?, method, &opts)
        }
        Arith::Extended => run(&k, &spectrum_from_moduli::<Extended>(n, &angles)?, method, &opts),
        Arith::Double => run(&k, &spectrum_from_moduli::<f64>(n, &angles)?, method, &opts),
    }
}

fn qutrit_endpoint(zeta: f64) -> Option<Result<KernelSpectrum<Rational>>> {
    let q = |a, b| Rational::ratio(a, b);
    if zeta == 0.0 {
        Some(KernelSpectrum::new(vec![q(1, 1), q(1, 1), q(-1, 1)]))
    } else if (zeta - std::f64::consts::FRAC_PI_3).abs() <= 1e-15 {
        Some(KernelSpectrum::new(vec![q(5, 3), q(-1, 3), q(-1, 3)]))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_parse() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert!((parse_angle("pi/3").unwrap() - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * std::f64::consts::PI / 3.0);
        assert_eq!(parse_angle("-pi").unwrap(), -std::f64::consts::PI);
        assert!(parse_angle("pi3").is_err());
    }

    #[test]
    fn mixed_fields_are_not_exact() {
        let raw: Vec<String> = ["sqrt(2)", "sqrt(3)"].iter().map(|s| s.to_string()).collect();
        assert!(exact_spectrum(&raw).is_none());
    }
}
