//! Expansions of wave-packet integrals: integration by parts with an explicit
//! remainder, the heat series in tau, and the theta series for the sech and
//! Glaisher amplitudes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::foundation::{ensure_finite, Complex, CompensatedSum, ReducedTime, I};
use crate::quadrature::{
    integrate_finite, psi_oracle_with, Oscillation, QuadOptions, QuadratureResult,
};
use crate::wavepacket::{transform_derivative, Amplitude, Parity};

/// Largest number of terms accepted by the sech theta series.
pub const SECH_SERIES_CAP: usize = 200;

/// Largest number of terms accepted by the Glaisher theta series.
pub const GLAISHER_SERIES_CAP: usize = 100;

/// IBP orders above this are refused.
pub const IBP_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: Complex,
    pub terms_used: usize,
    pub tail_estimate: f64,
    /// Terms started growing: the partial sum is an optimal truncation of an
    /// asymptotic or divergent series, not a converged value.
    pub diverging: bool,
}

impl SeriesEval {
    pub fn times(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            tail_estimate: self.tail_estimate * c.abs(),
            ..self
        }
    }
}

/// A function on [a, b] known together with its derivatives.
pub struct SmoothFunction<'a> {
    pub derivative: &'a dyn Fn(usize, f64) -> Complex,
    pub max_order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbpExpansion {
    pub boundary_terms: Vec<Complex>,
    pub remainder: Complex,
    pub order: usize,
    pub remainder_error: f64,
}

impl IbpExpansion {
    pub fn reconstruction(&self) -> Complex {
        self.boundary_terms.iter().copied().collect::<CompensatedSum>().value() + self.remainder
    }
}

fn oscillatory_integral(g: &dyn Fn(f64) -> Complex, a: f64, b: f64, x: f64) -> QuadratureResult {
    let f = |z: f64| g(z) * (I * x * z).exp();
    integrate_finite(&f, a, b, Oscillation::new(x, 0.0), &QuadOptions::mixed(1e-15, 1e-13))
}

/// integral over [a, b] of e^{ixz} f(z) by direct quadrature.
pub fn ibp_direct(f: &SmoothFunction<'_>, a: f64, b: f64, x: f64) -> Result<Complex> {
    oscillatory_integral(&|z| (f.derivative)(0, z), a, b, x).into_value("direct oscillatory integral")
}

/// n steps of integration by parts on the integral over [a, b] of e^{ixz} f(z):
/// terms (i/x)^{k+1} (e^{iax} f^(k)(a) - e^{ibx} f^(k)(b)), remainder
/// (i/x)^n times the integral of e^{ixz} f^(n)(z).
pub fn ibp_expansion(f: &SmoothFunction<'_>, a: f64, b: f64, x: f64, n: usize) -> Result<IbpExpansion> {
    if n > IBP_CAP {
        return Err(Error::capacity(format!("IBP order {n} exceeds {IBP_CAP}")));
    }
    if n > f.max_order {
        return Err(Error::capacity(format!(
            "IBP order {n} needs derivatives beyond the supplied {}",
            f.max_order
        )));
    }
    if !(x > 0.0) {
        return Err(Error::domain("IBP expansion needs x > 0"));
    }
    let ix = I / x;
    let (ea, eb) = ((I * a * x).exp(), (I * b * x).exp());
    let boundary_terms = (0..n)
        .map(|k| ix.powu(k as u32 + 1) * (ea * (f.derivative)(k, a) - eb * (f.derivative)(k, b)))
        .collect();
    let r = oscillatory_integral(&|z| (f.derivative)(n, z), a, b, x);
    let pre = ix.powu(n as u32);
    Ok(IbpExpansion {
        boundary_terms,
        remainder: ensure_finite(pre * r.value, "IBP remainder")?,
        order: n,
        remainder_error: pre.norm() * r.abs_error_estimate,
    })
}

/// Full psi from the heat series 2 sum_{n<=N} (i tau)^n / n! d^{2n}/dx^{2n} phi_c(x).
pub fn heat_series(amp: &Amplitude, x: f64, tau: Complex, n_terms: usize) -> Result<SeriesEval> {
    if amp.parity() != Parity::Even {
        return Err(Error::unsupported("heat series needs an even amplitude"));
    }
    if n_terms > 31 {
        return Err(Error::capacity("heat series supports at most 31 terms"));
    }
    let mut terms = Vec::with_capacity(n_terms + 2);
    let mut coeff = Complex::new(1.0, 0.0);
    for n in 0..=n_terms + 1 {
        if n > 0 {
            coeff *= I * tau / n as f64;
        }
        terms.push(coeff * transform_derivative(amp, 2 * n, x)?);
    }
    let next = terms.pop().unwrap().norm();
    let last = terms.last().unwrap().norm();
    let diverging = terms
        .windows(2)
        .enumerate()
        .any(|(i, w)| i + 1 > n_terms / 2 && w[1].norm() > w[0].norm())
        || (n_terms > 0 && next > last);
    let rho = if last > 0.0 { next / last } else { 0.0 };
    let tail = if !diverging && rho < 1.0 {
        next / (1.0 - rho)
    } else {
        next
    };
    let value = terms.iter().copied().collect::<CompensatedSum>().value() * 2.0;
    Ok(SeriesEval {
        value: ensure_finite(value, "heat series")?,
        terms_used: n_terms + 1,
        tail_estimate: 2.0 * tail,
        diverging,
    })
}

/// Sum terms k = 0..=cap from `term`, stopping at the smallest term of an
/// eventually growing series (optimal truncation) or once terms are negligible.
fn truncated_sum(cap: usize, term: impl Fn(usize) -> Complex) -> SeriesEval {
    let mut acc = CompensatedSum::new();
    let mut prev = f64::INFINITY;
    let mut used = 0;
    let mut diverging = false;
    let mut t = term(0);
    loop {
        let mag = t.norm();
        if used > 0 && mag > prev {
            diverging = true;
            break;
        }
        acc.add(t);
        used += 1;
        prev = mag;
        let next = term(used);
        if used > cap {
            t = next;
            break;
        }
        if next.norm() <= 1e-18 * acc.value().norm() && next.norm() <= mag {
            t = next;
            break;
        }
        t = next;
    }
    SeriesEval {
        value: acc.value(),
        terms_used: used,
        tail_estimate: t.norm(),
        diverging,
    }
}

/// Prefactor of the sech theta series for the half-line integral.
pub fn sech_theta_prefactor(beta: f64) -> f64 {
    PI / beta
}

/// x-rate of the sech theta series.
pub fn sech_theta_rate(beta: f64) -> f64 {
    PI / (2.0 * beta)
}

/// Printed prefactor of the sech theta series.
pub fn sech_theta_prefactor_printed(beta: f64) -> f64 {
    PI / (2.0 * beta)
}

pub const GLAISHER_THETA_PREFACTOR: f64 = 1.0;
pub const GLAISHER_THETA_QUARTIC: f64 = 1.0;
pub const GLAISHER_THETA_PREFACTOR_PRINTED: f64 = 1.0;
pub const GLAISHER_THETA_QUARTIC_PRINTED: f64 = 0.25;

/// C_s sum_{r<=N} (-1)^r exp(-(2r+1) c x + i c^2 (2r+1)^2 tau), c = pi/(2 beta),
/// against the integral over [0, inf) of cos(xz) sech(beta z) e^{-i tau z^2}.
pub fn sech_theta_series(beta: f64, x: f64, tau: Complex, n_terms: usize) -> Result<SeriesEval> {
    if !(beta > 0.0) {
        return Err(Error::domain("beta must be positive"));
    }
    if !(x > 0.0) {
        return Err(Error::domain("theta series diverges for x <= 0"));
    }
    if tau.im > 0.0 {
        return Err(Error::domain("theta series needs Im(tau) <= 0"));
    }
    if n_terms > SECH_SERIES_CAP {
        return Err(Error::capacity(format!("at most {SECH_SERIES_CAP} terms")));
    }
    let c = sech_theta_rate(beta);
    let pre = sech_theta_prefactor(beta);
    let s = truncated_sum(n_terms, |r| {
        let k = (2 * r + 1) as f64;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        (Complex::new(-k * c * x, 0.0) + I * c * c * k * k * tau).exp() * sign
    });
    Ok(s.times(pre))
}

/// The integral matched by [`sech_theta_series`], by quadrature.
pub fn sech_theta_integral(beta: f64, x: f64, tau: Complex, opts: &QuadOptions) -> Result<QuadratureResult> {
    let amp = Amplitude::sech(beta, 0.0)?;
    half_packet(&amp, x, tau, opts)
}

fn half_packet(amp: &Amplitude, x: f64, tau: Complex, opts: &QuadOptions) -> Result<QuadratureResult> {
    let mut r = psi_oracle_with(amp, Complex::new(x, 0.0), ReducedTime::new(tau), &opts.tightened(0.5))?;
    r.value *= 0.5;
    r.abs_error_estimate *= 0.5;
    Ok(r)
}

/// sum_n (-1)^n (2n+1) e^{-(2n+1)^2 x}
pub fn glaisher_theta_series(x: f64) -> Result<SeriesEval> {
    if !(x > 0.0) {
        return Err(Error::domain("theta series diverges for x <= 0"));
    }
    Ok(truncated_sum(10_000, |n| {
        let k = (2 * n + 1) as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        Complex::new(sign * k * (-k * k * x).exp(), 0.0)
    }))
}

/// m-th x-derivative of the Glaisher theta series.
pub fn glaisher_theta_derivative(m: usize, x: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut peaked = false;
    let mut prev = 0.0f64;
    for n in 0..100_000usize {
        let k = (2 * n + 1) as f64;
        let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
        let t = sign * k * (2.0 * m as f64 * k.ln() - k * k * x).exp();
        acc.add(Complex::new(t, 0.0));
        if t.abs() < prev {
            peaked = true;
        }
        prev = t.abs();
        if peaked && t.abs() <= 1e-18 * acc.value().norm() {
            break;
        }
    }
    acc.value().re
}

/// The Glaisher cosine integral (integral over [0, inf) of K(z) cos(xz)) next
/// to its theta series.
pub fn glaisher_theta_integral(x: f64) -> Result<(QuadratureResult, SeriesEval)> {
    let series = glaisher_theta_series(x)?;
    let integral = half_packet(&Amplitude::glaisher(), x, Complex::new(0.0, 0.0), &QuadOptions::mixed(1e-12, 1e-11))?;
    Ok((integral, series))
}

/// C_g sum_{n<=N} (-1)^n (2n+1) exp(-(2n+1)^2 x + i q (2n+1)^4 tau).
pub fn glaisher_large_t_series(x: f64, tau: Complex, n_terms: usize) -> Result<SeriesEval> {
    glaisher_large_t_series_with(x, tau, n_terms, GLAISHER_THETA_PREFACTOR, GLAISHER_THETA_QUARTIC)
}

pub fn glaisher_large_t_series_with(
    x: f64,
    tau: Complex,
    n_terms: usize,
    prefactor: f64,
    quartic: f64,
) -> Result<SeriesEval> {
    if !(x > 0.0) {
        return Err(Error::domain("theta series diverges for x <= 0"));
    }
    if tau.im > 0.0 {
        return Err(Error::domain("theta series needs Im(tau) <= 0"));
    }
    if n_terms > GLAISHER_SERIES_CAP {
        return Err(Error::capacity(format!("at most {GLAISHER_SERIES_CAP} terms")));
    }
    let s = truncated_sum(n_terms, |n| {
        let k = (2 * n + 1) as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        (Complex::new(-k * k * x, 0.0) + I * quartic * k.powi(4) * tau).exp() * (sign * k)
    });
    Ok(s.times(prefactor))
}

/// The integral matched by [`glaisher_large_t_series`]:
/// integral over [0, inf) of K(z) cos(xz) e^{-i tau z^2}.
pub fn glaisher_large_t_integral(x: f64, tau: Complex, opts: &QuadOptions) -> Result<QuadratureResult> {
    half_packet(&Amplitude::glaisher(), x, tau, opts)
}

/// Theta-series constants recovered from the oracle where the series is
/// anchored: prefactor and x-rate from tau = 0, tau-coefficient from the
/// tau-derivative at tau = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCalibration {
    pub sech_beta: f64,
    pub sech_prefactor: f64,
    pub sech_rate: f64,
    /// Fitted coefficient of i (2r+1)^2 tau, to compare with rate^2.
    pub sech_tau_coefficient: f64,
    pub glaisher_prefactor: f64,
    pub glaisher_quartic: f64,
}

/// Points (x) used by the calibration.
pub const CALIBRATION_X: [f64; 3] = [1.0, 1.5, 2.0];

fn sech_series_at(pre: f64, c: f64, x: f64) -> f64 {
    (0..200)
        .map(|r| {
            let k = (2 * r + 1) as f64;
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            sign * (-k * c * x).exp()
        })
        .sum::<f64>()
        * pre
}

pub fn calibrate_theta_constants(beta: f64) -> Result<ThetaCalibration> {
    let opts = QuadOptions::mixed(1e-14, 1e-13);
    let zero = Complex::new(0.0, 0.0);
    let ys: Vec<f64> = CALIBRATION_X
        .iter()
        .map(|&x| sech_theta_integral(beta, x, zero, &opts).and_then(|r| r.into_value("calibration")).map(|v| v.re))
        .collect::<Result<_>>()?;

    // Gauss-Newton on (prefactor, rate), started from the leading-term fit
    let (x0, x2) = (CALIBRATION_X[0], CALIBRATION_X[2]);
    let mut c = (ys[0] / ys[2]).ln() / (x2 - x0);
    let mut pre = ys[0] * (c * x0).exp();
    for _ in 0..50 {
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for (i, &x) in CALIBRATION_X.iter().enumerate() {
            let f = sech_series_at(pre, c, x);
            let h = 1e-7 * c;
            let dc = (sech_series_at(pre, c + h, x) - sech_series_at(pre, c - h, x)) / (2.0 * h);
            let dp = f / pre;
            let res = ys[i] - f;
            let j = [dp, dc];
            for a in 0..2 {
                jtr[a] += j[a] * res;
                for b in 0..2 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        let dp = (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let dc = (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
        pre += dp;
        c += dc;
        if dp.abs() < 1e-15 * pre.abs() && dc.abs() < 1e-15 * c.abs() {
            break;
        }
    }

    // tau-derivative at 0: the integral gives -i (z^2 moment), the series
    // i kappa pre sum (-1)^r (2r+1)^2 e^{-(2r+1) c x}
    let x = CALIBRATION_X[0];
    let amp = Amplitude::sech(beta, 0.0)?;
    let m2 = crate::quadrature::packet_moment_oracle(&amp, 2, Complex::new(x, 0.0), ReducedTime::new(zero), &opts)?
        .into_value("calibration moment")?
        * 0.5;
    // m2 = integral over [0, inf) of z^2 cos(xz) sech(beta z)
    let weighted: f64 = (0..200)
        .map(|r| {
            let k = (2 * r + 1) as f64;
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            sign * k * k * (-k * c * x).exp()
        })
        .sum::<f64>()
        * pre;
    let sech_tau_coefficient = -m2.re / weighted;

    // Glaisher: prefactor at tau = 0 from the unit-prefactor series, quartic
    // coefficient from the z^2 moment against sum (-1)^n (2n+1)^5 e^{-(2n+1)^2 x}
    let mut gp = 0.0;
    for &x in &CALIBRATION_X {
        let (integral, series) = glaisher_theta_integral(x)?;
        gp += integral.into_value("Glaisher calibration")?.re / series.value.re;
    }
    let glaisher_prefactor = gp / CALIBRATION_X.len() as f64;
    let g2 = crate::quadrature::packet_moment_oracle(
        &Amplitude::glaisher(),
        2,
        Complex::new(x, 0.0),
        ReducedTime::new(zero),
        &QuadOptions::mixed(1e-13, 1e-12),
    )?
    .into_value("Glaisher moment")?
        * 0.5;
    let glaisher_quartic = -g2.re / (glaisher_theta_derivative(2, x) * glaisher_prefactor);

    Ok(ThetaCalibration {
        sech_beta: beta,
        sech_prefactor: pre,
        sech_rate: c,
        sech_tau_coefficient,
        glaisher_prefactor,
        glaisher_quartic,
    })
}
