//! Command-line front end. Exit codes: 0 success, 1 numerical failure or a
//! failed verification case, 2 usage error.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::foundation::{Complex, PhysicalConfig};
use crate::registry::{self, Catalogue, ReportFormat};
use crate::wavepacket::{self, Amplitude, Method};
use crate::zeta::{self, Statistic};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "freewave", version, about = "Free-particle wave-packet integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate psi(x, t) for a momentum amplitude.
    Psi(PsiArgs),
    /// Compute zeta(m + 1/2).
    Zeta(ZetaArgs),
    /// Run the identity catalogue.
    Verify(VerifyArgs),
    /// Emit an identity over a grid as CSV.
    Table(TableArgs),
    /// Print the ledger of reconciled constants.
    Ledger(LedgerArgs),
}

#[derive(Debug, Args)]
struct PsiArgs {
    #[arg(long, value_parser = ["gaussian", "sech", "glaisher"])]
    amplitude: String,
    /// Gaussian width parameter, "re,im" or real.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    z0: f64,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    /// Time, "re,im" or real.
    #[arg(long, allow_hyphen_values = true)]
    t: String,
    /// closed, quadrature, heat or theta; defaults to closed for Gaussians.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ZetaArgs {
    #[arg(long, allow_hyphen_values = true)]
    m: i64,
    #[arg(long, default_value = "fermi")]
    statistic: String,
    #[arg(long, default_value = "lattice", value_parser = ["lattice", "reference"])]
    method: String,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "*")]
    suite: String,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "markdown")]
    format: String,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long)]
    identity: String,
    /// start:stop:steps
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct LedgerArgs {
    #[arg(long)]
    json: bool,
}

/// Parses "re,im" or a bare real.
pub fn parse_complex(text: &str) -> Result<Complex> {
    let bad = || Error::usage(format!("expected 're,im' or a real number, got '{text}'"));
    let mut parts = text.split(',');
    let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(s) => s.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex::new(re, im))
}

fn physical_config(hbar: Option<f64>, mass: Option<f64>) -> Result<PhysicalConfig> {
    match (hbar, mass) {
        (None, None) => Ok(PhysicalConfig::natural()),
        (Some(h), Some(m)) => PhysicalConfig::new(h, m).map_err(|e| Error::usage(e.to_string())),
        _ => Err(Error::usage("--hbar and --mass must be given together")),
    }
}

#[derive(Serialize)]
struct JsonComplex {
    re: f64,
    im: f64,
}

impl From<Complex> for JsonComplex {
    fn from(z: Complex) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct PsiOutput {
    psi: JsonComplex,
    method: Method,
    error_estimate: f64,
    x: f64,
    t: JsonComplex,
}

fn cmd_psi(a: &PsiArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = physical_config(a.hbar, a.mass)?;
    let t = parse_complex(&a.t)?;
    let amp = match a.amplitude.as_str() {
        "gaussian" => {
            let alpha = parse_complex(a.alpha.as_deref().ok_or_else(|| Error::usage("gaussian needs --alpha"))?)?;
            Amplitude::gaussian(alpha, a.z0).map_err(|e| Error::usage(e.to_string()))?
        }
        "sech" => {
            let beta = a.beta.ok_or_else(|| Error::usage("sech needs --beta"))?;
            Amplitude::sech(beta, a.z0).map_err(|e| Error::usage(e.to_string()))?
        }
        _ => Amplitude::glaisher(),
    };
    let method = match &a.method {
        Some(m) => m.parse::<Method>()?,
        None if a.amplitude == "gaussian" => Method::Closed,
        None => Method::Quadrature,
    };
    let v = wavepacket::psi(&amp, a.x, t, &cfg, method)?;
    if a.json {
        let doc = PsiOutput {
            psi: v.psi.into(),
            method: v.method,
            error_estimate: v.error_estimate,
            x: a.x,
            t: t.into(),
        };
        writeln!(out, "{}", serde_json::to_string(&doc).expect("serializes")).ok();
    } else {
        writeln!(out, "psi = {} {:+}i", v.psi.re, v.psi.im).ok();
        writeln!(out, "method = {}", method_name(v.method)).ok();
        writeln!(out, "error_estimate = {:e}", v.error_estimate).ok();
    }
    Ok(EXIT_OK)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Closed => "closed",
        Method::Quadrature => "quadrature",
        Method::HeatSeries => "heat",
        Method::ThetaSeries => "theta",
    }
}

#[derive(Serialize)]
struct ZetaOutput {
    m: u32,
    statistic: Statistic,
    method: String,
    zeta: f64,
    error_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    correction_sum: Option<f64>,
}

fn cmd_zeta(a: &ZetaArgs, out: &mut dyn Write) -> Result<i32> {
    if !(1..=6).contains(&a.m) {
        return Err(Error::usage(format!("--m must be in 1..6, got {}", a.m)));
    }
    let m = a.m as u32;
    let statistic: Statistic = a.statistic.parse()?;
    let doc = if a.method == "reference" {
        ZetaOutput {
            m,
            statistic,
            method: a.method.clone(),
            zeta: zeta::zeta_half_reference(m)?,
            error_estimate: 1e-15,
            correction_sum: None,
        }
    } else {
        let z = zeta::zeta_from_lattice(m, statistic)?;
        ZetaOutput {
            m,
            statistic,
            method: a.method.clone(),
            zeta: z.zeta_value,
            error_estimate: z.error_estimate,
            correction_sum: Some(z.correction_sum.abs()),
        }
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string(&doc).expect("serializes")).ok();
    } else {
        writeln!(out, "zeta({}/2) = {:.15}", 2 * m + 1, doc.zeta).ok();
        writeln!(out, "method = {}", doc.method).ok();
        writeln!(out, "error_estimate = {:e}", doc.error_estimate).ok();
        if let Some(c) = doc.correction_sum {
            writeln!(out, "correction_sum = {c:e}").ok();
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let format: ReportFormat = a.format.parse()?;
    let cat = Catalogue::bundled();
    let reports = cat.run_suite(&a.suite, a.tol)?;
    let doc = registry::emit_report(&reports, &cat.ledger, format);
    write!(out, "{doc}").ok();
    if format == ReportFormat::Json {
        writeln!(out).ok();
    }
    Ok(if registry::passed_count(&reports) == reports.len() {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}

fn cmd_table(a: &TableArgs, out: &mut dyn Write) -> Result<i32> {
    let cat = Catalogue::bundled();
    let spec = cat
        .table(&a.identity)
        .ok_or_else(|| Error::usage(format!("unknown identity '{}'", a.identity)))?;
    let grid = registry::parse_grid(&a.grid)?;
    let csv = registry::table_csv(&registry::evaluate_table(spec, &grid)?);
    match &a.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| Error::usage(format!("cannot write {}: {e}", path.display())))?
        }
        None => write!(out, "{csv}").unwrap_or(()),
    }
    Ok(EXIT_OK)
}

fn cmd_ledger(a: &LedgerArgs, out: &mut dyn Write) -> Result<i32> {
    let cat = Catalogue::bundled();
    if a.json {
        writeln!(out, "{}", registry::ledger_json(&cat.ledger)).ok();
    } else {
        write!(out, "{}", registry::ledger_markdown(&cat.ledger)).ok();
    }
    Ok(EXIT_OK)
}

/// Runs one invocation, writing the document to `out` and diagnostics to
/// `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            write!(target, "{e}").ok();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Psi(a) => cmd_psi(a, out),
        Command::Zeta(a) => cmd_zeta(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Table(a) => cmd_table(a, out),
        Command::Ledger(a) => cmd_ledger(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("freewave").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn complex_flags() {
        assert_eq!(parse_complex("1,-2").unwrap(), Complex::new(1.0, -2.0));
        assert_eq!(parse_complex("0.5").unwrap(), Complex::new(0.5, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("a,b").is_err());
    }

    #[test]
    fn psi_text_and_json() {
        let (code, out, _) = call(&["psi", "--amplitude", "gaussian", "--alpha", "1", "--x", "0", "--t", "0,0"]);
        assert_eq!(code, 0);
        assert!(out.contains("1.77245385090"), "{out}");
        let (code, out, _) = call(&["psi", "--amplitude", "sech", "--beta", "3.14159265", "--x", "0", "--t", "0,0", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["psi"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn physical_units_need_both_flags() {
        let (code, _, err) = call(&["psi", "--amplitude", "gaussian", "--alpha", "1", "--x", "0", "--t", "1", "--hbar", "2"]);
        assert_eq!(code, 2, "{err}");
        let (code, _, _) =
            call(&["psi", "--amplitude", "gaussian", "--alpha", "1", "--x", "0", "--t", "1", "--hbar", "2", "--mass", "1"]);
        assert_eq!(code, 0);
    }

    #[test]
    fn zeta_ranges() {
        assert_eq!(call(&["zeta", "--m", "0", "--method", "lattice", "--statistic", "bose"]).0, 2);
        assert_eq!(call(&["zeta", "--m", "7"]).0, 2);
        let (code, out, _) = call(&["zeta", "--m", "1", "--method", "reference"]);
        assert_eq!(code, 0);
        assert!(out.contains("2.612375348685"), "{out}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&[]).0, 2);
        assert_eq!(call(&["bogus"]).0, 2);
        assert_eq!(call(&["verify", "--suite", "none-*"]).0, 2);
        assert_eq!(call(&["table", "--identity", "nope", "--grid", "0:1:2"]).0, 2);
        assert_eq!(call(&["table", "--identity", "G2.4", "--grid", "0:1:0"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn ledger_outputs() {
        let (code, out, _) = call(&["ledger"]);
        assert_eq!(code, 0);
        let cat = registry::Catalogue::bundled();
        assert!(cat.ledger.iter().all(|e| out.contains(&e.paper_eq)));
        let (_, out, _) = call(&["ledger", "--json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v.as_array().unwrap().len() >= 7);
    }
}
