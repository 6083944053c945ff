//! The identity catalogue, its runner, and the ledger of reconciled constants.
//!
//! Cases live in `data/catalogue.toml`; each names an evaluator `kind` and its
//! parameters, and compares a left side with an independent right side.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::closedform;
use crate::error::{Error, Result};
use crate::foundation::{rel_diff, Complex, PhysicalConfig};
use crate::hermite;
use crate::quadrature::{integrate_decaying, DecayBound, Integrand, QuadOptions};
use crate::wavepacket::{self, Amplitude, Method};
use crate::zeta::{self, Statistic};

const BUNDLED: &str = include_str!("../data/catalogue.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct IdentityCase {
    pub id: String,
    pub paper_eq: String,
    pub kind: String,
    #[serde(default)]
    pub params: toml::Table,
    pub lhs_descriptor: String,
    pub rhs_descriptor: String,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionLedgerEntry {
    pub paper_eq: String,
    pub printed_form: String,
    pub implemented_form: String,
    #[serde(rename = "constants")]
    pub reconciled_constants: BTreeMap<String, f64>,
    pub evidence: Vec<String>,
}

/// A grid-sweepable identity for `freewave table`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TableSpec {
    pub id: String,
    pub kind: String,
    /// Parameter swept by the grid.
    pub var: String,
    /// Fixed imaginary part when the swept parameter is complex.
    pub imag: Option<f64>,
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub case_id: String,
    pub paper_eq: String,
    pub lhs: Complex,
    pub rhs: Complex,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_ms: f64,
    /// Evaluation failure, if any; the case then counts as failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct CatalogueFile {
    #[allow(dead_code)]
    version: u32,
    #[serde(default)]
    case: Vec<IdentityCase>,
    #[serde(default)]
    correction: Vec<CorrectionLedgerEntry>,
    #[serde(default)]
    table: Vec<TableSpec>,
}

#[derive(Debug, Clone)]
pub struct Catalogue {
    pub cases: Vec<IdentityCase>,
    pub ledger: Vec<CorrectionLedgerEntry>,
    pub tables: Vec<TableSpec>,
}

impl Catalogue {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled catalogue is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: CatalogueFile =
            toml::from_str(text).map_err(|e| Error::usage(format!("catalogue: {e}")))?;
        let mut ids = HashSet::new();
        for c in &file.case {
            if !ids.insert(c.id.as_str()) {
                return Err(Error::usage(format!("duplicate case id '{}'", c.id)));
            }
            if !(c.tolerance > 0.0) {
                return Err(Error::usage(format!("case '{}' needs a positive tolerance", c.id)));
            }
        }
        let mut constants = HashSet::new();
        for entry in &file.correction {
            if entry.evidence.len() < 2 {
                return Err(Error::usage(format!(
                    "ledger entry '{}' needs at least two evidence cases",
                    entry.paper_eq
                )));
            }
            if let Some(missing) = entry.evidence.iter().find(|e| !ids.contains(e.as_str())) {
                return Err(Error::usage(format!("ledger evidence '{missing}' is not a case")));
            }
            for name in entry.reconciled_constants.keys() {
                if !constants.insert(name.clone()) {
                    return Err(Error::usage(format!("constant '{name}' is ledgered twice")));
                }
            }
        }
        let mut cases = file.case;
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Self {
            cases,
            ledger: file.correction,
            tables: file.table,
        })
    }

    pub fn table(&self, id: &str) -> Option<&TableSpec> {
        self.tables.iter().find(|t| t.id == id)
    }

    /// Runs every case whose id matches the glob, ordered by id.
    pub fn run_suite(&self, filter: &str, tol_override: Option<f64>) -> Result<Vec<IdentityReport>> {
        if let Some(t) = tol_override {
            if !(t > 0.0) {
                return Err(Error::usage("tolerance override must be positive"));
            }
        }
        let re = glob_regex(filter)?;
        let selected: Vec<&IdentityCase> = self.cases.iter().filter(|c| re.is_match(&c.id)).collect();
        if selected.is_empty() {
            return Err(Error::usage(format!("no cases match '{filter}'")));
        }
        let mut reports: Vec<IdentityReport> = selected
            .par_iter()
            .map(|c| run_case(c, tol_override.unwrap_or(c.tolerance)))
            .collect();
        reports.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        Ok(reports)
    }
}

/// [`Catalogue::run_suite`] on the bundled catalogue.
pub fn run_suite(filter: &str, tol_override: Option<f64>) -> Result<Vec<IdentityReport>> {
    Catalogue::bundled().run_suite(filter, tol_override)
}

fn glob_regex(glob: &str) -> Result<Regex> {
    let mut pat = String::from("^");
    for ch in glob.chars() {
        match ch {
            '*' => pat.push_str(".*"),
            '?' => pat.push('.'),
            c => pat.push_str(&regex::escape(&c.to_string())),
        }
    }
    pat.push('$');
    Regex::new(&pat).map_err(|e| Error::usage(format!("bad filter '{glob}': {e}")))
}

fn run_case(case: &IdentityCase, tolerance: f64) -> IdentityReport {
    let start = Instant::now();
    let outcome = evaluate(&case.kind, &Params(&case.params));
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let (lhs, rhs, error) = match outcome {
        Ok((l, r)) => (l, r, None),
        Err(e) => (Complex::new(f64::NAN, f64::NAN), Complex::new(f64::NAN, f64::NAN), Some(e.to_string())),
    };
    let abs_err = (lhs - rhs).norm();
    let rel_err = rel_diff(lhs, rhs);
    let passed = error.is_none() && (abs_err <= tolerance || rel_err <= tolerance);
    IdentityReport {
        case_id: case.id.clone(),
        paper_eq: case.paper_eq.clone(),
        lhs,
        rhs,
        abs_err,
        rel_err,
        tolerance,
        passed,
        runtime_ms,
        error,
    }
}

// ---- parameters -------------------------------------------------------------

struct Params<'a>(&'a toml::Table);

impl Params<'_> {
    fn get(&self, key: &str) -> Result<&toml::Value> {
        self.0
            .get(key)
            .ok_or_else(|| Error::usage(format!("missing parameter '{key}'")))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            toml::Value::Float(v) => Ok(*v),
            toml::Value::Integer(v) => Ok(*v as f64),
            _ => Err(Error::usage(format!("parameter '{key}' must be a number"))),
        }
    }

    fn usize(&self, key: &str) -> Result<usize> {
        match self.get(key)? {
            toml::Value::Integer(v) if *v >= 0 => Ok(*v as usize),
            _ => Err(Error::usage(format!("parameter '{key}' must be a non-negative integer"))),
        }
    }

    fn complex(&self, key: &str) -> Result<Complex> {
        match self.get(key)? {
            toml::Value::Array(a) if a.len() == 2 => {
                let part = |v: &toml::Value| match v {
                    toml::Value::Float(f) => Ok(*f),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    _ => Err(Error::usage(format!("parameter '{key}' must be [re, im]"))),
                };
                Ok(Complex::new(part(&a[0])?, part(&a[1])?))
            }
            _ => Ok(Complex::new(self.f64(key)?, 0.0)),
        }
    }

    fn str(&self, key: &str) -> Result<&str> {
        self.get(key)?
            .as_str()
            .ok_or_else(|| Error::usage(format!("parameter '{key}' must be a string")))
    }

    fn amplitude(&self) -> Result<Amplitude> {
        match self.str("amplitude")? {
            "gaussian" => Amplitude::gaussian_real(self.f64("alpha")?),
            "sech" => Amplitude::sech(self.f64("beta")?, 0.0),
            "glaisher" => Ok(Amplitude::glaisher()),
            "self_reciprocal" => Ok(Amplitude::self_reciprocal_sech()),
            other => Err(Error::usage(format!("unknown amplitude '{other}'"))),
        }
    }
}

// ---- oracles ----------------------------------------------------------------

const ORACLE: QuadOptions = QuadOptions {
    abs_tol: 1e-14,
    rel_tol: 1e-13,
    max_evals: crate::quadrature::DEFAULT_MAX_EVALS,
};

fn trig_moment_oracle(n: usize, a: Complex, b: Complex, x: Complex, sine: bool) -> Result<Complex> {
    let f = move |z: f64| {
        let t = if sine {
            (a * z).sin() * (b * z).sin()
        } else {
            (a * z).cos() * (b * z).cos()
        };
        (-x * z * z).exp() * z.powi(2 * n as i32) * t
    };
    let decay = DecayBound::gaussian(1.0, x.re)
        .with_power(2.0 * n as f64)
        .with_linear_growth(a.im.abs() + b.im.abs());
    integrate_decaying(
        &Integrand::half_line(&f)
            .decay(decay)
            .oscillation(a.re.abs() + b.re.abs(), 0.0),
        &ORACLE,
    )?
    .into_value("moment oracle")
}

fn gr_oracle(order: usize, a: f64, beta: f64, sine: bool) -> Result<Complex> {
    let w = 2f64.sqrt() * beta;
    let root = a.sqrt();
    let f = move |z: f64| {
        let h = hermite::hermite_real(order, root * z).unwrap_or(f64::NAN);
        let t = if sine { (w * z).sin() } else { (w * z).cos() };
        Complex::new((-a * z * z).exp() * h * t, 0.0)
    };
    // |H_k(sqrt(a) z)| <= sum |c_i| a^{i/2} max(1, z)^k
    let coeffs = hermite::hermite_coefficients(order)?;
    let scale: f64 = coeffs.iter().enumerate().map(|(i, c)| c.abs() * root.powi(i as i32)).sum();
    integrate_decaying(
        &Integrand::half_line(&f)
            .decay(DecayBound::gaussian(scale, a).with_power(order as f64))
            .oscillation(w, 0.0),
        &ORACLE,
    )?
    .into_value("Hermite transform oracle")
}

fn real(v: f64) -> Complex {
    Complex::new(v, 0.0)
}

/// Evaluates one identity: (lhs, rhs).
fn evaluate(kind: &str, p: &Params<'_>) -> Result<(Complex, Complex)> {
    let cfg = PhysicalConfig::natural();
    match kind {
        "coscos" | "sinsin" => {
            let (n, a, b, x) = (p.usize("n")?, p.complex("a")?, p.complex("b")?, p.complex("x")?);
            let sine = kind == "sinsin";
            let closed = if sine {
                closedform::sinsin(n, a, b, x)?
            } else {
                closedform::coscos(n, a, b, x)?
            };
            Ok((closed, trig_moment_oracle(n, a, b, x, sine)?))
        }
        "gr_cos" => {
            let (n, a, beta) = (p.usize("n")?, p.f64("a")?, p.f64("beta")?);
            Ok((real(closedform::gr_hermite_cos(n, a, beta)?), gr_oracle(2 * n, a, beta, false)?))
        }
        "gr_sin" => {
            let (n, a, beta) = (p.usize("n")?, p.f64("a")?, p.f64("beta")?);
            Ok((real(closedform::gr_hermite_sin(n, a, beta)?), gr_oracle(2 * n + 1, a, beta, true)?))
        }
        "cosine_moment" => {
            let (n, a, x) = (p.usize("n")?, p.complex("a")?, p.complex("x")?);
            let oracle = trig_moment_oracle(n, a, Complex::new(0.0, 0.0), x, false)?;
            Ok((closedform::f_cosine_moment(n, a, x)?, oracle))
        }
        "shifted_hermite" => {
            let n = p.usize("n")?;
            let s = hermite::shifted_argument_identity(n, p.f64("a")?, p.f64("b")?, p.f64("x")?)?;
            Ok((real(s.lhs), real(hermite::shifted_identity_constant(n) * s.rhs)))
        }
        "gaussian_psi" => {
            let amp = Amplitude::gaussian(p.complex("alpha")?, p.f64("z0")?)?;
            let (x, tau) = (p.f64("x")?, p.complex("tau")?);
            let closed = wavepacket::psi(&amp, x, tau, &cfg, Method::Closed)?.psi;
            let quad = wavepacket::psi(&amp, x, tau, &cfg, Method::Quadrature)?.psi;
            Ok((closed, quad))
        }
        "heat_series" => {
            let alpha = p.f64("alpha")?;
            let amp = Amplitude::gaussian_real(alpha)?;
            let (x, tau) = (p.f64("x")?, p.complex("tau")?);
            let s = asymptotics::heat_series(&amp, x, tau, p.usize("terms")?)?;
            Ok((s.value, wavepacket::gaussian_psi_closed(real(alpha), 0.0, real(x), tau)?))
        }
        "schrodinger" => {
            let amp = Amplitude::gaussian_real(p.f64("alpha")?)?;
            let h = p.f64("h")?;
            let r = wavepacket::schrodinger_residual(&amp, p.f64("x")?, p.complex("tau")?, &cfg, h, h)?;
            Ok((real(r), real(0.0)))
        }
        "hermite_expansion" => {
            let amp = p.amplitude()?;
            let (n, x, tau) = (p.usize("n")?, p.f64("x")?, p.complex("tau")?);
            let e = wavepacket::hermite_expansion(&amp, n, x, tau, &cfg)?.psi;
            Ok((e, wavepacket::psi(&amp, x, tau, &cfg, Method::Quadrature)?.psi))
        }
        "parseval" => {
            let amp = p.amplitude()?;
            let (n, x, tau) = (p.usize("n")?, p.f64("x")?, p.complex("tau")?);
            let t = wavepacket::parseval_transformed_derivative(&amp, n, x, tau, &cfg)?.psi;
            Ok((t, wavepacket::psi_x_derivative(&amp, n, x, tau, &cfg)?.psi))
        }
        "self_reciprocal" => {
            let amp = Amplitude::self_reciprocal_sech();
            let c = wavepacket::self_reciprocal_check(&amp, p.f64("x")?, p.complex("tau")?, &cfg)?;
            Ok((c.lhs, c.rhs))
        }
        "sech_theta" => {
            let (beta, x, tau) = (p.f64("beta")?, p.f64("x")?, p.complex("tau")?);
            let s = asymptotics::sech_theta_series(beta, x, tau, asymptotics::SECH_SERIES_CAP)?;
            let q = asymptotics::sech_theta_integral(beta, x, tau, &QuadOptions::mixed(1e-12, 1e-11))?;
            Ok((s.value, q.into_value("sech theta integral")?))
        }
        "glaisher_theta" => {
            let (q, s) = asymptotics::glaisher_theta_integral(p.f64("x")?)?;
            Ok((q.into_value("Glaisher integral")?, s.value))
        }
        "glaisher_large_t" => {
            let (x, tau) = (p.f64("x")?, p.complex("tau")?);
            let s = asymptotics::glaisher_large_t_series(x, tau, asymptotics::GLAISHER_SERIES_CAP)?;
            let q = asymptotics::glaisher_large_t_integral(x, tau, &QuadOptions::mixed(1e-12, 1e-11))?;
            Ok((s.value, q.into_value("Glaisher large-t integral")?))
        }
        "theta_tau_slope" => theta_tau_slope(p),
        "alternating_gaussian" => {
            let (s, q) = zeta::glaisher_alternating_gaussian(p.f64("b")?)?;
            Ok((s.value, q.into_value("alternating Gaussian integral")?))
        }
        "zeta_lattice" => {
            let m = p.usize("m")? as u32;
            let statistic: Statistic = p.str("statistic")?.parse()?;
            let z = zeta::zeta_from_lattice(m, statistic)?;
            Ok((real(z.zeta_value), real(zeta::zeta_half_reference(m)?)))
        }
        "poisson" => {
            let m = p.usize("m")? as u32;
            let statistic: Statistic = p.str("statistic")?.parse()?;
            let g = zeta::lattice_function(m, statistic);
            let f0 = if statistic == Statistic::Bose && m == 1 { 1.0 } else { 0.0 };
            let f = zeta::EvenFunction {
                f: &g,
                f0,
                decay: DecayBound::gaussian(2.0, 1.0).with_power(2.0 * m as f64),
            };
            let d = zeta::poisson_cosine_check(&f, p.usize("k")?, p.usize("n")?)?;
            Ok((real(d), real(0.0)))
        }
        other => Err(Error::usage(format!("unknown identity kind '{other}'"))),
    }
}

/// First-order tau behaviour at tau = 0: the integral's slope is -i times the
/// z^2 moment, the series' slope i (coefficient) times its weighted sum; both
/// sides are reported without the common factor i.
fn theta_tau_slope(p: &Params<'_>) -> Result<(Complex, Complex)> {
    let x = p.f64("x")?;
    let zero = crate::foundation::ReducedTime::new(Complex::new(0.0, 0.0));
    let (amp, series_slope) = match p.str("family")? {
        "sech" => {
            let beta = p.f64("beta")?;
            let c = asymptotics::sech_theta_rate(beta);
            let weighted: f64 = (0..asymptotics::SECH_SERIES_CAP)
                .map(|r| {
                    let k = (2 * r + 1) as f64;
                    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                    sign * k * k * (-k * c * x).exp()
                })
                .sum();
            (Amplitude::sech(beta, 0.0)?, c * c * asymptotics::sech_theta_prefactor(beta) * weighted)
        }
        "glaisher" => (
            Amplitude::glaisher(),
            asymptotics::GLAISHER_THETA_QUARTIC
                * asymptotics::GLAISHER_THETA_PREFACTOR
                * asymptotics::glaisher_theta_derivative(2, x),
        ),
        other => return Err(Error::usage(format!("unknown theta family '{other}'"))),
    };
    let m2 = crate::quadrature::packet_moment_oracle(&amp, 2, real(x), zero, &QuadOptions::mixed(1e-13, 1e-12))?
        .into_value("second moment")?
        * 0.5;
    Ok((-m2, real(series_slope)))
}

// ---- tables -----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub grid_var: f64,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_err: f64,
}

/// Parses "start:stop:steps" into `steps` evenly spaced points.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, steps] = parts.as_slice() else {
        return Err(Error::usage(format!("grid must be start:stop:steps, got '{text}'")));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::usage(format!("bad grid bound '{s}'")))
    };
    let (start, stop) = (num(start)?, num(stop)?);
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| Error::usage(format!("bad grid step count '{steps}'")))?;
    if steps == 0 {
        return Err(Error::usage("grid needs at least one step"));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    Ok((0..steps)
        .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
        .collect())
}

pub fn evaluate_table(spec: &TableSpec, grid: &[f64]) -> Result<Vec<TableRow>> {
    grid.par_iter()
        .map(|&g| {
            let mut params = spec.params.clone();
            let value = match spec.imag {
                Some(im) => toml::Value::Array(vec![g.into(), im.into()]),
                None => g.into(),
            };
            params.insert(spec.var.clone(), value);
            let (lhs, rhs) = evaluate(&spec.kind, &Params(&params))?;
            Ok(TableRow {
                grid_var: g,
                lhs_re: lhs.re,
                lhs_im: lhs.im,
                rhs_re: rhs.re,
                rhs_im: rhs.im,
                abs_err: (lhs - rhs).norm(),
            })
        })
        .collect()
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    if rows.is_empty() {
        return "grid_var,lhs_re,lhs_im,rhs_re,rhs_im,abs_err\n".to_string();
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

// ---- reports ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::usage(format!("unknown format '{other}'"))),
        }
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
struct JsonCase<'a> {
    id: &'a str,
    paper_eq: &'a str,
    lhs: JsonComplex,
    rhs: JsonComplex,
    abs_err: f64,
    rel_err: f64,
    passed: bool,
}

#[derive(Serialize)]
struct JsonLedger<'a> {
    paper_eq: &'a str,
    printed_form: &'a str,
    implemented_form: &'a str,
    constants: &'a BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    cases: Vec<JsonCase<'a>>,
    passed: usize,
    failed: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    ledger: Vec<JsonLedger<'a>>,
}

pub fn passed_count(reports: &[IdentityReport]) -> usize {
    reports.iter().filter(|r| r.passed).count()
}

/// Serializes reports (and the ledger, if given). Output depends only on the
/// inputs' value fields, never on runtimes.
pub fn emit_report(reports: &[IdentityReport], ledger: &[CorrectionLedgerEntry], format: ReportFormat) -> String {
    let passed = passed_count(reports);
    let failed = reports.len() - passed;
    match format {
        ReportFormat::Json => {
            let doc = JsonReport {
                cases: reports
                    .iter()
                    .map(|r| JsonCase {
                        id: &r.case_id,
                        paper_eq: &r.paper_eq,
                        lhs: r.lhs.into(),
                        rhs: r.rhs.into(),
                        abs_err: r.abs_err,
                        rel_err: r.rel_err,
                        passed: r.passed,
                    })
                    .collect(),
                passed,
                failed,
                ledger: ledger
                    .iter()
                    .map(|e| JsonLedger {
                        paper_eq: &e.paper_eq,
                        printed_form: &e.printed_form,
                        implemented_form: &e.implemented_form,
                        constants: &e.reconciled_constants,
                    })
                    .collect(),
            };
            serde_json::to_string(&doc).expect("report serializes")
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["id", "paper_eq", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err", "rel_err", "passed"])
                .expect("in-memory write");
            for r in reports {
                w.write_record([
                    r.case_id.clone(),
                    r.paper_eq.clone(),
                    r.lhs.re.to_string(),
                    r.lhs.im.to_string(),
                    r.rhs.re.to_string(),
                    r.rhs.im.to_string(),
                    r.abs_err.to_string(),
                    r.rel_err.to_string(),
                    r.passed.to_string(),
                ])
                .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
        }
        ReportFormat::Markdown => {
            let mut out = String::from("| id | reference | lhs | rhs | abs_err | rel_err | passed |\n");
            out.push_str("|---|---|---|---|---|---|---|\n");
            for r in reports {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {:.3e} | {:.3e} | {} |",
                    r.case_id,
                    r.paper_eq,
                    fmt_complex(r.lhs),
                    fmt_complex(r.rhs),
                    r.abs_err,
                    r.rel_err,
                    if r.passed { "yes" } else { "no" }
                );
            }
            let _ = writeln!(out, "\n{passed} passed, {failed} failed\n");
            out.push_str(&ledger_markdown(ledger));
            out
        }
    }
}

fn fmt_complex(z: Complex) -> String {
    format!("{:.12e}{:+.12e}i", z.re, z.im)
}

pub fn ledger_markdown(ledger: &[CorrectionLedgerEntry]) -> String {
    if ledger.is_empty() {
        return "no corrections recorded\n".to_string();
    }
    let mut out = String::from("## Correction ledger\n\n");
    out.push_str("| reference | printed | implemented | constants | evidence |\n");
    out.push_str("|---|---|---|---|---|\n");
    for e in ledger {
        let constants: Vec<String> = e
            .reconciled_constants
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            e.paper_eq,
            e.printed_form,
            e.implemented_form,
            constants.join(", "),
            e.evidence.join(", ")
        );
    }
    out
}

pub fn ledger_json(ledger: &[CorrectionLedgerEntry]) -> String {
    serde_json::to_string_pretty(ledger).expect("ledger serializes")
}

/// Values the ledger records, recomputed from the library constants.
pub fn library_constants() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("moment_scale_per_order", 0.25),
        ("kappa_base", hermite::shifted_identity_constant(1)),
        ("c_P", wavepacket::PARSEVAL_CONSTANT),
        ("phase", wavepacket::RECIPROCAL_PHASE),
        ("sech_scale", (PI / 2.0).sqrt()),
        ("C_s_beta_over_pi", asymptotics::sech_theta_prefactor(1.0) / PI),
        ("c_beta_over_pi", asymptotics::sech_theta_rate(1.0) / PI),
        ("C_g", asymptotics::GLAISHER_THETA_PREFACTOR),
        ("q", asymptotics::GLAISHER_THETA_QUARTIC),
        ("kappa0", zeta::KAPPA0),
        ("kappa1", zeta::KAPPA1),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalogue_is_consistent() {
        let cat = Catalogue::bundled();
        assert!(cat.cases.len() > 40);
        let lib = library_constants();
        let mut seen = 0;
        for e in &cat.ledger {
            for (k, v) in &e.reconciled_constants {
                let want = lib.get(k.as_str()).unwrap_or_else(|| panic!("unknown constant {k}"));
                assert!((v - want).abs() < 1e-15, "{k}");
                seen += 1;
            }
        }
        assert_eq!(seen, lib.len());
        for id in ["G2.4", "T2.1", "T2.2", "C1.2.1", "psi"] {
            assert!(cat.table(id).is_some(), "{id}");
        }
    }

    #[test]
    fn catalogue_validation() {
        let dup = r#"version = 1
[[case]]
id = "a"
paper_eq = "x"
kind = "coscos"
lhs_descriptor = ""
rhs_descriptor = ""
tolerance = 1e-8
[[case]]
id = "a"
paper_eq = "x"
kind = "coscos"
lhs_descriptor = ""
rhs_descriptor = ""
tolerance = 1e-8
"#;
        assert!(Catalogue::parse(dup).is_err());
        let neg = dup.replacen("id = \"a\"", "id = \"b\"", 1).replacen("1e-8", "-1.0", 1);
        assert!(Catalogue::parse(&neg).is_err());
        let thin = r#"version = 1
[[case]]
id = "a"
paper_eq = "x"
kind = "coscos"
lhs_descriptor = ""
rhs_descriptor = ""
tolerance = 1e-8
[[correction]]
paper_eq = "x"
printed_form = ""
implemented_form = ""
constants = { k = 1.0 }
evidence = ["a"]
"#;
        assert!(Catalogue::parse(thin).is_err());
    }

    #[test]
    fn glob_matching() {
        let re = glob_regex("L1.1-*").unwrap();
        assert!(re.is_match("L1.1-coscos-n2"));
        assert!(!re.is_match("L1X1-coscos"));
        assert!(!re.is_match("xL1.1-"));
        assert!(glob_regex("T?.1-*").unwrap().is_match("T3.1-fermi-m1"));
    }

    #[test]
    fn suite_examples() {
        let r = run_suite("L1.1-*", None).unwrap();
        assert_eq!(r.len(), 8);
        assert!(r.iter().all(|c| c.passed), "{r:?}");
        assert!(r.windows(2).all(|w| w[0].case_id < w[1].case_id));
        let z = run_suite("T3.1-*", None).unwrap();
        assert_eq!(z.len(), 5);
        assert!(z.iter().all(|c| c.passed));
        assert!(matches!(run_suite("nonexistent-*", None), Err(Error::Usage(_))));
    }

    #[test]
    fn full_bundled_suite_passes() {
        let r = run_suite("*", None).unwrap();
        let failed: Vec<_> = r.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }

    #[test]
    fn tolerance_override_applies() {
        let r = run_suite("E4.1-*", Some(1e-300)).unwrap();
        assert!(r.iter().all(|c| c.tolerance == 1e-300));
    }

    #[test]
    fn report_formats() {
        assert_eq!(emit_report(&[], &[], ReportFormat::Json), r#"{"cases":[],"passed":0,"failed":0}"#);
        let r = run_suite("E4.1-moment-n1-a0", None).unwrap();
        let json: serde_json::Value = serde_json::from_str(&emit_report(&r, &[], ReportFormat::Json)).unwrap();
        assert_eq!(json["passed"], 1);
        assert_eq!(json["failed"], 0);
        let case = &json["cases"][0];
        for key in ["id", "paper_eq", "lhs", "rhs", "abs_err", "rel_err", "passed"] {
            assert!(case.get(key).is_some(), "{key}");
        }
        assert!(case["lhs"]["re"].is_number() && case["rhs"]["im"].is_number());

        let csv = emit_report(&r, &[], ReportFormat::Csv);
        assert!(csv.starts_with("id,paper_eq,lhs_re,lhs_im,rhs_re,rhs_im,abs_err,rel_err,passed\n"));
        assert_eq!(csv.lines().count(), 2);

        let cat = Catalogue::bundled();
        let md = emit_report(&r, &cat.ledger, ReportFormat::Markdown);
        assert!(md.contains("## Correction ledger"));
        let with_ledger: serde_json::Value =
            serde_json::from_str(&emit_report(&r, &cat.ledger, ReportFormat::Json)).unwrap();
        assert_eq!(with_ledger["ledger"].as_array().unwrap().len(), cat.ledger.len());
        assert!(with_ledger["ledger"][0]["constants"].is_object());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = emit_report(&run_suite("E3.1-*", None).unwrap(), &[], ReportFormat::Json);
        let b = emit_report(&run_suite("E3.1-*", None).unwrap(), &[], ReportFormat::Json);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_ledger_message() {
        assert_eq!(ledger_markdown(&[]), "no corrections recorded\n");
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.5:2:16").unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g[0], 0.5);
        assert!((g[15] - 2.0).abs() < 1e-15);
        assert_eq!(parse_grid("1:2:1").unwrap(), vec![1.0]);
        assert!(matches!(parse_grid("1:2:0"), Err(Error::Usage(_))));
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn glaisher_table_rows() {
        let cat = Catalogue::bundled();
        let rows = evaluate_table(cat.table("G2.4").unwrap(), &parse_grid("0.5:2:16").unwrap()).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().all(|r| r.abs_err <= 1e-7));
        let csv = table_csv(&rows);
        assert!(csv.starts_with("grid_var,lhs_re,lhs_im,rhs_re,rhs_im,abs_err\n"));
        assert_eq!(csv.lines().count(), 17);
    }
}
