//! Half-integer zeta values from Gaussian lattice sums: the alternating
//! Gaussian series, its Hermite-weighted derivatives, Poisson summation, and
//! the extraction of zeta(m + 1/2) from sum n^{2m} / (e^{n^2} +- 1).

use std::f64::consts::PI;

use serde::Serialize;

use crate::asymptotics::SeriesEval;
use crate::error::{Error, Result};
use crate::foundation::{compensated_sum, Complex};
use crate::hermite::hermite_coefficients;
use crate::quadrature::{integrate_decaying, DecayBound, Integrand, QuadOptions, QuadratureResult};

pub const GAMMA_HALF_CAP: u32 = 40;

/// Range of m accepted by [`zeta_from_lattice`].
pub const LATTICE_M_RANGE: std::ops::RangeInclusive<u32> = 1..=6;

/// Weight of the zeta term: the integral over [0, inf) of x^{2m}/(e^{x^2} +- 1)
/// is KAPPA0 Gamma(m+1/2) (eta or zeta)(m+1/2).
pub const KAPPA0: f64 = 0.5;
pub const KAPPA0_PRINTED: f64 = 1.0;

/// Weight of the double sum: twice the cosine terms of Poisson summation.
pub const KAPPA1: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// e^{x^2} + 1 in the denominator.
    Fermi,
    /// e^{x^2} - 1 in the denominator.
    Bose,
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fermi" => Ok(Statistic::Fermi),
            "bose" => Ok(Statistic::Bose),
            other => Err(Error::usage(format!("unknown statistic '{other}'"))),
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Statistic::Fermi => "fermi",
            Statistic::Bose => "bose",
        })
    }
}

/// Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!).
pub fn gamma_half(m: u32) -> Result<f64> {
    if m > GAMMA_HALF_CAP {
        return Err(Error::capacity(format!("gamma_half({m}) exceeds cap {GAMMA_HALF_CAP}")));
    }
    Ok((1..=m).map(|j| j as f64 - 0.5).product::<f64>() * PI.sqrt())
}

/// Dirichlet eta by the Cohen-Villegas-Zagier acceleration.
pub fn dirichlet_eta(s: f64) -> f64 {
    let n = 40usize;
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..n {
        c = b - c;
        sum += c * ((k + 1) as f64).powf(-s);
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// zeta(m + 1/2) from the accelerated eta series.
pub fn zeta_half_reference(m: u32) -> Result<f64> {
    if m < 1 {
        return Err(Error::domain("zeta(m + 1/2) needs m >= 1"));
    }
    let s = m as f64 + 0.5;
    Ok(dirichlet_eta(s) / (1.0 - 2f64.powf(1.0 - s)))
}

const BERNOULLI_2J: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz zeta sum_{k>=0} (k + a)^{-s} by Euler-Maclaurin, continued to
/// s < 1 (s != 1), for a > 0.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    let shift = (30.0 - a).max(0.0).ceil() as usize;
    let head = compensated_sum((0..shift).map(|k| (a + k as f64).powf(-s)));
    let q = a + shift as f64;
    let mut acc = q.powf(1.0 - s) / (s - 1.0) + 0.5 * q.powf(-s);
    // B_2j/(2j)! s(s+1)...(s+2j-2) q^{-s-2j+1}
    let mut poch = s;
    let mut fact = 2.0;
    let mut qpow = q.powf(-s - 1.0);
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        acc += b / fact * poch * qpow;
        let j2 = 2.0 * (j + 1) as f64;
        poch *= (s + j2 - 1.0) * (s + j2);
        fact *= (j2 + 1.0) * (j2 + 2.0);
        qpow /= q * q;
    }
    head + acc
}

/// sum_{k>K} (-1)^{k-1} k^{-s}
fn alternating_tail(s: f64, k: usize) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let kf = k as f64;
    sign * 2f64.powf(-s) * (hurwitz_zeta(s, (kf + 1.0) / 2.0) - hurwitz_zeta(s, (kf + 2.0) / 2.0))
}

/// sum_{k>K} k^{-s}
fn plain_tail(s: f64, k: usize) -> f64 {
    hurwitz_zeta(s, k as f64 + 1.0)
}

/// sum_{k>=1} sign_k k^{-1/2-m} e^{-b^2/k} H_2m(b/sqrt k): direct summation up
/// to K, then the tail from the u = 1/k power series of e^{-b^2 u} H_2m(b sqrt u).
fn hermite_gaussian_sum(m: u32, b: f64, alternating: bool) -> Result<(f64, usize)> {
    let k_direct = 64usize.max((4.0 * b * b).ceil() as usize);
    let coeffs = hermite_coefficients(2 * m as usize)?;
    let head = compensated_sum((1..=k_direct).map(|k| {
        let kf = k as f64;
        let sign = if alternating && k % 2 == 0 { -1.0 } else { 1.0 };
        let y = b / kf.sqrt();
        let h = coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c);
        sign * kf.powf(-0.5 - m as f64) * (-b * b / kf).exp() * h
    }));

    let b2 = b * b;
    let mut tail_terms = Vec::new();
    let mut j = 0usize;
    loop {
        // d_j = sum_i c_2i b^{2i} (-b^2)^{j-i} / (j-i)!
        let mut d = 0.0;
        for i in 0..=j.min(m as usize) {
            let mut e = 1.0;
            for l in 1..=(j - i) {
                e *= -b2 / l as f64;
            }
            d += coeffs[2 * i] * b2.powi(i as i32) * e;
        }
        let s = m as f64 + 0.5 + j as f64;
        let t = if alternating {
            alternating_tail(s, k_direct)
        } else {
            plain_tail(s, k_direct)
        };
        let term = d * t;
        tail_terms.push(term);
        if (j > m as usize && term.abs() <= 1e-20 * head.abs().max(1e-300)) || j > 200 {
            break;
        }
        j += 1;
    }
    Ok((head + compensated_sum(tail_terms), k_direct + j))
}

fn lattice_prefactor(m: u32) -> f64 {
    4f64.powi(-(m as i32)) * PI.sqrt() / 2.0
}

/// 2^{-2m} (sqrt(pi)/2) (-1)^{k-1} k^{-1/2} e^{-b^2/k} H_2m(b/sqrt k) k^{-m}
pub fn h_term(k: u32, m: u32, b: f64) -> Result<f64> {
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    Ok(sign * l_term(k, m, b)?)
}

/// h_term without the alternating sign.
pub fn l_term(k: u32, m: u32, b: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::domain("k starts at 1"));
    }
    let kf = k as f64;
    let h = crate::hermite::hermite_real(2 * m as usize, b / kf.sqrt())?;
    Ok(lattice_prefactor(m) * kf.powf(-0.5 - m as f64) * (-b * b / kf).exp() * h)
}

/// sum_{k>=1} h_term(k, m, b)
pub fn h_sum(m: u32, b: f64) -> Result<f64> {
    Ok(lattice_prefactor(m) * hermite_gaussian_sum(m, b, true)?.0)
}

/// sum_{k>=1} l_term(k, m, b); needs m >= 1.
pub fn l_sum(m: u32, b: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::domain("the unsigned sum diverges for m = 0"));
    }
    Ok(lattice_prefactor(m) * hermite_gaussian_sum(m, b, false)?.0)
}

/// sum_{n>=1} (-1)^{n-1} e^{-b^2/n} / sqrt(n) next to
/// (2/sqrt(pi)) times the integral over [0, inf) of cos(2bx)/(1 + e^{x^2}).
pub fn glaisher_alternating_gaussian(b: f64) -> Result<(SeriesEval, QuadratureResult)> {
    let (value, terms) = hermite_gaussian_sum(0, b, true)?;
    // the tail expansion's last retained term bounds what was dropped
    let series = SeriesEval {
        value: Complex::new(value, 0.0),
        terms_used: terms,
        tail_estimate: 1e-15 * value.abs().max(1e-300) + 1e-16,
        diverging: false,
    };
    let f = |x: f64| Complex::new((2.0 * b * x).cos() / (1.0 + (x * x).exp()), 0.0);
    let mut integral = integrate_decaying(
        &Integrand::half_line(&f)
            .decay(DecayBound::gaussian(1.0, 1.0))
            .oscillation(2.0 * b, 0.0),
        &QuadOptions::mixed(1e-15, 1e-13),
    )?;
    let scale = 2.0 / PI.sqrt();
    integral.value *= scale;
    integral.abs_error_estimate *= scale;
    Ok((series, integral))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSumSpec {
    m: u32,
    statistic: Statistic,
    n_max: u32,
}

impl LatticeSumSpec {
    /// n_max is the smallest n with 2 n^{2m} e^{-n^2} < 1e-16.
    pub fn new(m: u32, statistic: Statistic) -> Result<Self> {
        if m < 1 {
            return Err(Error::domain("lattice sums need m >= 1"));
        }
        let n_max = (1u32..)
            .find(|&n| tail_bound(m, n) < 1e-16)
            .expect("Gaussian decay wins");
        Ok(Self { m, statistic, n_max })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn statistic(&self) -> Statistic {
        self.statistic
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn tail_bound(&self) -> f64 {
        tail_bound(self.m, self.n_max)
    }
}

fn tail_bound(m: u32, n: u32) -> f64 {
    let nf = n as f64;
    2.0 * nf.powi(2 * m as i32) * (-nf * nf).exp()
}

fn lattice_summand(m: u32, x: f64, statistic: Statistic) -> f64 {
    let e = x * x;
    let den = match statistic {
        Statistic::Fermi => e.exp() + 1.0,
        Statistic::Bose => e.exp_m1(),
    };
    x.powi(2 * m as i32) / den
}

/// sum_{n=1}^{n_max} n^{2m} / (e^{n^2} +- 1)
pub fn lattice_sum(spec: &LatticeSumSpec) -> f64 {
    compensated_sum((1..=spec.n_max).map(|n| lattice_summand(spec.m, n as f64, spec.statistic)))
}

/// lim_{x -> 0} x^{2m} / (e^{x^2} +- 1)
fn summand_at_zero(m: u32, statistic: Statistic) -> f64 {
    match (statistic, m) {
        (Statistic::Bose, 1) => 1.0,
        _ => 0.0,
    }
}

fn zeta_weight(m: u32, statistic: Statistic) -> Result<f64> {
    let eta = match statistic {
        Statistic::Fermi => 1.0 - 2f64.powf(0.5 - m as f64),
        Statistic::Bose => 1.0,
    };
    Ok(gamma_half(m)? * eta)
}

/// (-1)^m sum_{n>=1} (h_sum or l_sum)(m, pi n), until terms are below
/// 1e-14 of the running total.
pub fn lattice_double_sum(m: u32, statistic: Statistic) -> Result<f64> {
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mut terms = Vec::new();
    for n in 1..=40u32 {
        let b = PI * n as f64;
        let t = match statistic {
            Statistic::Fermi => h_sum(m, b)?,
            Statistic::Bose => l_sum(m, b)?,
        };
        terms.push(t);
        let total = compensated_sum(terms.iter().copied());
        if t.abs() <= 1e-14 * total.abs() {
            return Ok(sign * total);
        }
    }
    Err(Error::non_convergence("lattice double sum", terms.last().map_or(f64::INFINITY, |t| t.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaExtraction {
    pub zeta_value: f64,
    /// kappa1 times the signed double sum, as it enters the identity.
    pub correction_sum: f64,
    pub lattice_sum: f64,
    /// Lattice truncation plus roundoff in the double sum, mapped onto zeta.
    pub error_estimate: f64,
}

/// Solve lattice = -f(0)/2 + k0 Gamma(m+1/2) eta_factor zeta(m+1/2) + k1 (-1)^m sum sum
/// for zeta(m+1/2), with the given constants.
pub fn zeta_from_lattice_with(m: u32, statistic: Statistic, kappa0: f64, kappa1: f64) -> Result<ZetaExtraction> {
    if !LATTICE_M_RANGE.contains(&m) {
        return Err(Error::domain(format!("m must be in 1..=6, got {m}")));
    }
    let spec = LatticeSumSpec::new(m, statistic)?;
    let lattice = lattice_sum(&spec);
    let correction = kappa1 * lattice_double_sum(m, statistic)?;
    let f0 = summand_at_zero(m, statistic);
    let weight = kappa0 * zeta_weight(m, statistic)?;
    let zeta = (lattice + f0 / 2.0 - correction) / weight;
    let noise = spec.tail_bound() + 1e-14 * (lattice.abs() + correction.abs());
    Ok(ZetaExtraction {
        zeta_value: zeta,
        correction_sum: correction,
        lattice_sum: lattice,
        error_estimate: noise / weight.abs(),
    })
}

pub fn zeta_from_lattice(m: u32, statistic: Statistic) -> Result<ZetaExtraction> {
    zeta_from_lattice_with(m, statistic, KAPPA0, KAPPA1)
}

/// kappa0 from the single fermi case m = 1, with kappa1 held fixed.
pub fn calibrate_kappa0(kappa1: f64) -> Result<f64> {
    let spec = LatticeSumSpec::new(1, Statistic::Fermi)?;
    let lhs = lattice_sum(&spec) - kappa1 * lattice_double_sum(1, Statistic::Fermi)?;
    Ok(lhs / (zeta_weight(1, Statistic::Fermi)? * zeta_half_reference(1)?))
}

/// (kappa0, kappa1) solved from the fermi cases m = 1 and m = 2 against the
/// reference zeta values.
pub fn calibrate_lattice_constants() -> Result<(f64, f64)> {
    let row = |m: u32| -> Result<[f64; 3]> {
        let spec = LatticeSumSpec::new(m, Statistic::Fermi)?;
        let lhs = lattice_sum(&spec) + summand_at_zero(m, Statistic::Fermi) / 2.0;
        let a = zeta_weight(m, Statistic::Fermi)? * zeta_half_reference(m)?;
        let b = lattice_double_sum(m, Statistic::Fermi)?;
        Ok([a, b, lhs])
    };
    let [a1, b1, y1] = row(1)?;
    let [a2, b2, y2] = row(2)?;
    let det = a1 * b2 - a2 * b1;
    Ok(((y1 * b2 - y2 * b1) / det, (a1 * y2 - a2 * y1) / det))
}

/// An even test function on [0, inf) with its decay.
pub struct EvenFunction<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub f0: f64,
    pub decay: DecayBound,
}

/// |sum_{n=1}^N f(n) - (-f(0)/2 + integral f + 2 sum_{k=1}^K integral f(x) cos(2 pi k x))|
pub fn poisson_cosine_check(f: &EvenFunction<'_>, k_max: usize, n_max: usize) -> Result<f64> {
    let opts = QuadOptions::mixed(1e-14, 1e-13);
    let lattice = compensated_sum((1..=n_max).map(|n| (f.f)(n as f64)));
    let mut pieces = vec![-f.f0 / 2.0];
    for k in 0..=k_max {
        let w = 2.0 * PI * k as f64;
        let g = |x: f64| Complex::new((f.f)(x) * (w * x).cos(), 0.0);
        let r = integrate_decaying(
            &Integrand::half_line(&g).decay(f.decay.clone()).oscillation(w, 0.0),
            &opts,
        )?;
        let v = r.into_value("Poisson cosine integral")?.re;
        pieces.push(if k == 0 { v } else { 2.0 * v });
    }
    Ok((lattice - compensated_sum(pieces)).abs())
}

/// x^{2m} / (e^{x^2} +- 1) as an [`EvenFunction`] payload.
pub fn lattice_function(m: u32, statistic: Statistic) -> impl Fn(f64) -> f64 {
    move |x| lattice_summand(m, x, statistic)
}
