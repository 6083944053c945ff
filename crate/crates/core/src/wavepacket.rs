//! Free-particle wave packets psi(x, tau) = integral of phi(z) e^{ixz - i tau z^2}
//! for a small catalogue of momentum amplitudes, with the derivative,
//! transform and rearrangement identities that act on them.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::asymptotics;
use crate::closedform;
use crate::error::{Error, Result};
use crate::foundation::{
    binomial_f64, ensure_finite, reduced_time, sqrt_principal, Complex, PhysicalConfig,
    ReducedTime, I,
};
use crate::hermite::{gaussian_derivative, hermite_eval, hermite_growth_constant};
use crate::quadrature::{
    integrate_decaying, packet_moment_oracle, DecayBound, Envelope, Integrand, QuadOptions,
    QuadratureResult,
};

/// Highest derivative order served by finite differences.
pub const FD_DERIVATIVE_CAP: usize = 8;

/// Above this order sech derivatives switch from the tanh polynomial to the pole sum.
const SECH_POLY_CAP: usize = 12;

/// Argument scale of the Glaisher kernel: c = GLAISHER_RATE * sqrt|z|.
pub const GLAISHER_RATE: f64 = PI / (2.0 * std::f64::consts::SQRT_2);

/// |K(z)| <= GLAISHER_BOUND * exp(-c).
pub const GLAISHER_BOUND: f64 = 1.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

type Callable = Arc<dyn Fn(f64) -> Complex + Send + Sync>;

#[derive(Clone)]
pub enum AmplitudeKind {
    Gaussian { alpha: Complex, z0: f64 },
    Sech { beta: f64, z0: f64 },
    /// cosh(c) cos(c) / (cosh(2c) + cos(2c)), c = (pi/2) sqrt(|z|/2)
    GlaisherKernel,
    Custom {
        f: Callable,
        decay: DecayBound,
        sup_bound: f64,
    },
}

impl fmt::Debug for AmplitudeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmplitudeKind::Gaussian { alpha, z0 } => {
                write!(f, "Gaussian {{ alpha: {alpha}, z0: {z0} }}")
            }
            AmplitudeKind::Sech { beta, z0 } => write!(f, "Sech {{ beta: {beta}, z0: {z0} }}"),
            AmplitudeKind::GlaisherKernel => write!(f, "GlaisherKernel"),
            AmplitudeKind::Custom { decay, .. } => write!(f, "Custom {{ decay: {decay:?} }}"),
        }
    }
}

/// A momentum amplitude phi(z) with its parity and how far it can be
/// differentiated analytically.
#[derive(Debug, Clone)]
pub struct Amplitude {
    kind: AmplitudeKind,
    parity: Parity,
    max_analytic_derivative: usize,
}

impl Amplitude {
    pub fn gaussian(alpha: Complex, z0: f64) -> Result<Self> {
        if !(alpha.re > 0.0) {
            return Err(Error::domain(format!("Gaussian needs Re(alpha) > 0, got {alpha}")));
        }
        Ok(Self {
            kind: AmplitudeKind::Gaussian { alpha, z0 },
            parity: if z0 == 0.0 { Parity::Even } else { Parity::None },
            max_analytic_derivative: crate::hermite::HERMITE_CAP,
        })
    }

    pub fn gaussian_real(alpha: f64) -> Result<Self> {
        Self::gaussian(Complex::new(alpha, 0.0), 0.0)
    }

    pub fn sech(beta: f64, z0: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("sech needs beta > 0, got {beta}")));
        }
        Ok(Self {
            kind: AmplitudeKind::Sech { beta, z0 },
            parity: if z0 == 0.0 { Parity::Even } else { Parity::None },
            max_analytic_derivative: 64,
        })
    }

    pub fn glaisher() -> Self {
        Self {
            kind: AmplitudeKind::GlaisherKernel,
            parity: Parity::Even,
            max_analytic_derivative: 0,
        }
    }

    /// sech(sqrt(pi/2) z), its own bare cosine transform up to sqrt(pi/2).
    pub fn self_reciprocal_sech() -> Self {
        Self::sech(FRAC_PI_2.sqrt(), 0.0).expect("positive scale")
    }

    /// A user amplitude. The decay bound must be declared; `sup_bound`
    /// bounds |phi| on the real line.
    pub fn custom(
        f: impl Fn(f64) -> Complex + Send + Sync + 'static,
        decay: DecayBound,
        sup_bound: f64,
        parity: Parity,
    ) -> Result<Self> {
        if !decay.is_declared() {
            return Err(Error::domain("custom amplitude must declare a decay bound"));
        }
        if !(sup_bound > 0.0 && sup_bound.is_finite()) {
            return Err(Error::domain("custom amplitude needs a finite sup bound"));
        }
        Ok(Self {
            kind: AmplitudeKind::Custom {
                f: Arc::new(f),
                decay,
                sup_bound,
            },
            parity,
            max_analytic_derivative: 0,
        })
    }

    pub fn kind(&self) -> &AmplitudeKind {
        &self.kind
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn max_analytic_derivative(&self) -> usize {
        self.max_analytic_derivative
    }

    pub fn value(&self, z: f64) -> Complex {
        match &self.kind {
            AmplitudeKind::Gaussian { alpha, z0 } => {
                let u = z - z0;
                (-alpha * u * u).exp()
            }
            AmplitudeKind::Sech { beta, z0 } => Complex::new(sech(beta * (z - z0)), 0.0),
            AmplitudeKind::GlaisherKernel => Complex::new(glaisher_kernel(z), 0.0),
            AmplitudeKind::Custom { f, .. } => f(z),
        }
    }

    /// Pointwise decay of |phi| for the oracle's tail truncation.
    pub fn decay(&self) -> DecayBound {
        match &self.kind {
            AmplitudeKind::Gaussian { .. } | AmplitudeKind::Sech { .. } => {
                DecayBound::from(self.base_envelope().expect("analytic kind"))
            }
            AmplitudeKind::GlaisherKernel => DecayBound::stretched(GLAISHER_BOUND, GLAISHER_RATE),
            AmplitudeKind::Custom { decay, .. } => decay.clone(),
        }
    }

    /// sup over the real line of |phi|.
    pub fn sup_bound(&self) -> f64 {
        match &self.kind {
            AmplitudeKind::Gaussian { .. } | AmplitudeKind::Sech { .. } => 1.0,
            AmplitudeKind::GlaisherKernel => GLAISHER_BOUND,
            AmplitudeKind::Custom { sup_bound, .. } => *sup_bound,
        }
    }

    fn base_envelope(&self) -> Option<Envelope> {
        match &self.kind {
            AmplitudeKind::Gaussian { alpha, z0 } => Some(Envelope::Gaussian {
                scale: 1.0,
                rate: alpha.re,
                shift: z0.abs(),
                power: 0.0,
            }),
            AmplitudeKind::Sech { beta, z0 } => Some(Envelope::Exponential {
                scale: 2.0,
                rate: *beta,
                shift: z0.abs(),
                power: 0.0,
            }),
            _ => None,
        }
    }

    /// Envelope bounding |phi^(j)|, for the analytic kinds.
    pub fn derivative_decay(&self, j: usize) -> Option<DecayBound> {
        let base = DecayBound::from(self.base_envelope()?);
        match &self.kind {
            AmplitudeKind::Gaussian { alpha, z0 } => {
                let root = sqrt_principal(*alpha).norm();
                let growth = hermite_growth_constant(j).ok()?;
                let scale = alpha.norm().powf(j as f64 / 2.0)
                    * growth
                    * ((1.0 + root) * (1.0 + z0.abs())).powi(j as i32);
                Some(base.scaled(scale).with_power(j as f64))
            }
            AmplitudeKind::Sech { beta, .. } => {
                let poly = sech_polynomial(j);
                let scale = beta.powi(j as i32) * poly.iter().map(|c| c.abs()).sum::<f64>();
                Some(base.scaled(scale))
            }
            _ => None,
        }
    }
}

/// sech(y) without overflow.
pub fn sech(y: f64) -> f64 {
    let e = (-y.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// The Glaisher kernel, evaluated in a form that stays finite for large |z|.
pub fn glaisher_kernel(z: f64) -> f64 {
    let c = GLAISHER_RATE * z.abs().sqrt();
    let e2 = (-2.0 * c).exp();
    let e4 = e2 * e2;
    let num = c.cos() * ((-c).exp() + (-3.0 * c).exp()) / (1.0 + e4);
    let den = 1.0 + (2.0 * c).cos() * 2.0 * e2 / (1.0 + e4);
    num / den
}

/// Coefficients (lowest degree first) of P_n with sech^(n)(y) = sech(y) P_n(tanh y).
pub fn sech_polynomial(n: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..n {
        // P' (1 - t^2) - t P
        let mut next = vec![0.0; p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k + 1] -= c;
            if k >= 1 {
                next[k - 1] += k as f64 * c;
                next[k + 1] -= k as f64 * c;
            }
        }
        p = next;
    }
    p
}

/// n-th derivative of sech at y.
pub fn sech_derivative(n: usize, y: f64) -> f64 {
    if n <= SECH_POLY_CAP {
        let t = y.tanh();
        let p = sech_polynomial(n);
        return sech(y) * p.iter().rev().fold(0.0, |acc, &c| acc * t + c);
    }
    // Mittag-Leffler: sech^(n)(y) = 2 (-1)^n n! sum_k (-1)^k Im (y - i(k+1/2)pi)^{-n-1}
    let mut factorial = 1.0f64;
    for k in 2..=n {
        factorial *= k as f64;
    }
    let mut sum = 0.0;
    let mut prev = 0.0;
    for k in 0..200_000 {
        let theta = (k as f64 + 0.5) * PI;
        let term = Complex::new(y, -theta).powi(-(n as i32) - 1).im;
        let signed = if k % 2 == 0 { term } else { -term };
        prev = sum;
        sum += signed;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    // averaging consecutive partial sums of an alternating series
    let s = 0.5 * (sum + prev);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    2.0 * sign * factorial * s
}

pub fn amplitude_eval(amp: &Amplitude, z: f64) -> Result<Complex> {
    ensure_finite(amp.value(z), "amplitude evaluation")
}

/// k-th derivative of phi at z: analytic for Gaussian and sech, Richardson
/// central differences otherwise.
pub fn amplitude_derivative(amp: &Amplitude, k: usize, z: f64) -> Result<Complex> {
    if k > amp.max_analytic_derivative.max(FD_DERIVATIVE_CAP) {
        return Err(Error::capacity(format!(
            "derivative order {k} beyond what this amplitude supports"
        )));
    }
    match amp.kind {
        AmplitudeKind::Gaussian { alpha, z0 } => {
            gaussian_derivative(k, alpha, Complex::new(z - z0, 0.0))
        }
        AmplitudeKind::Sech { beta, z0 } => Ok(Complex::new(
            beta.powi(k as i32) * sech_derivative(k, beta * (z - z0)),
            0.0,
        )),
        _ => {
            if k == 0 {
                return amplitude_eval(amp, z);
            }
            Ok(finite_difference(&|u| amp.value(u), k, z))
        }
    }
}

fn finite_difference(f: &dyn Fn(f64) -> Complex, k: usize, z: f64) -> Complex {
    const STEPS: [f64; 9] = [0.0, 1e-3, 4e-3, 1e-2, 2e-2, 3e-2, 5e-2, 7e-2, 1e-1];
    let stencil = |h: f64| {
        let mut acc = Complex::new(0.0, 0.0);
        for j in 0..=k {
            let w = binomial_f64(k as u32, j as u32).unwrap_or(0.0)
                * if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += f(z + (k as f64 / 2.0 - j as f64) * h) * w;
        }
        acc / h.powi(k as i32)
    };
    let h = STEPS[k.min(8)];
    (stencil(h / 2.0) * 4.0 - stencil(h)) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Closed,
    Quadrature,
    HeatSeries,
    ThetaSeries,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(Method::Closed),
            "quadrature" => Ok(Method::Quadrature),
            "heat" | "heat_series" => Ok(Method::HeatSeries),
            "theta" | "theta_series" => Ok(Method::ThetaSeries),
            other => Err(Error::usage(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveValue {
    pub psi: Complex,
    pub method: Method,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiOptions {
    pub quad: QuadOptions,
    pub heat_terms: usize,
    pub theta_terms: usize,
}

impl Default for PsiOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions::mixed(1e-12, 1e-11),
            heat_terms: 30,
            theta_terms: 200,
        }
    }
}

fn from_quadrature(r: QuadratureResult, what: &str) -> Result<WaveValue> {
    let psi = ensure_finite(r.into_value(what)?, what)?;
    Ok(WaveValue {
        psi,
        method: Method::Quadrature,
        error_estimate: r.abs_error_estimate,
    })
}

/// Complete-the-square form for the shifted Gaussian amplitude:
/// sqrt(pi/A) exp(B^2/(4A) - alpha z0^2), A = alpha + i tau, B = 2 alpha z0 + i x.
pub fn gaussian_psi_closed(alpha: Complex, z0: f64, x: Complex, tau: Complex) -> Result<Complex> {
    let a = alpha + I * tau;
    if !(a.re > 0.0) {
        return Err(Error::domain("Gaussian closed form needs Re(alpha + i tau) > 0"));
    }
    let b = alpha * (2.0 * z0) + I * x;
    let v = sqrt_principal(PI / a) * (b * b / (a * 4.0) - alpha * z0 * z0).exp();
    ensure_finite(v, "Gaussian closed form")
}

/// psi in physical units; tau = t hbar / (2 m).
pub fn psi(
    amp: &Amplitude,
    x: f64,
    t: Complex,
    cfg: &PhysicalConfig,
    method: Method,
) -> Result<WaveValue> {
    psi_reduced(amp, Complex::new(x, 0.0), reduced_time(t, cfg), method, &PsiOptions::default())
}

pub fn psi_reduced(
    amp: &Amplitude,
    x: Complex,
    tau: ReducedTime,
    method: Method,
    opts: &PsiOptions,
) -> Result<WaveValue> {
    if !tau.is_admissible() {
        return Err(Error::domain(format!(
            "psi needs Im(tau) <= 0, got tau = {}",
            tau.tau
        )));
    }
    match method {
        Method::Closed => match amp.kind {
            AmplitudeKind::Gaussian { alpha, z0 } => Ok(WaveValue {
                psi: gaussian_psi_closed(alpha, z0, x, tau.tau)?,
                method,
                error_estimate: 1e-15,
            }),
            _ => Err(Error::unsupported("closed form exists only for Gaussian amplitudes")),
        },
        Method::Quadrature => {
            from_quadrature(packet_moment_oracle(amp, 0, x, tau, &opts.quad)?, "psi quadrature")
        }
        Method::HeatSeries | Method::ThetaSeries => {
            if amp.parity != Parity::Even {
                return Err(Error::unsupported("series methods need an even amplitude"));
            }
            if x.im != 0.0 {
                return Err(Error::unsupported("series methods need real x"));
            }
            let sv = if method == Method::HeatSeries {
                asymptotics::heat_series(amp, x.re, tau.tau, opts.heat_terms)?
            } else {
                match amp.kind {
                    AmplitudeKind::Sech { beta, .. } => {
                        asymptotics::sech_theta_series(beta, x.re.abs(), tau.tau, opts.theta_terms)?
                            .times(2.0)
                    }
                    AmplitudeKind::GlaisherKernel => asymptotics::glaisher_large_t_series(
                        x.re.abs(),
                        tau.tau,
                        opts.theta_terms.min(asymptotics::GLAISHER_SERIES_CAP),
                    )?
                    .times(2.0),
                    _ => {
                        return Err(Error::unsupported(
                            "theta series exists for sech and Glaisher amplitudes",
                        ))
                    }
                }
            };
            if sv.diverging {
                return Err(Error::non_convergence("series evaluation", sv.tail_estimate));
            }
            Ok(WaveValue {
                psi: ensure_finite(sv.value, "series evaluation")?,
                method,
                error_estimate: sv.tail_estimate,
            })
        }
    }
}

/// d^n psi / dx^n for even n and an amplitude with parity:
/// i^n times the integral of phi(z) z^n e^{ixz - i tau z^2}.
pub fn psi_x_derivative(
    amp: &Amplitude,
    n: usize,
    x: f64,
    t: Complex,
    cfg: &PhysicalConfig,
) -> Result<WaveValue> {
    psi_x_derivative_reduced(amp, n, x, reduced_time(t, cfg), &QuadOptions::mixed(1e-12, 1e-11))
}

pub fn psi_x_derivative_reduced(
    amp: &Amplitude,
    n: usize,
    x: f64,
    tau: ReducedTime,
    opts: &QuadOptions,
) -> Result<WaveValue> {
    if amp.parity == Parity::None {
        return Err(Error::unsupported("derivative form needs an even or odd amplitude"));
    }
    if n % 2 == 1 {
        return Err(Error::unsupported("only even derivative orders are exposed"));
    }
    if n > 8 {
        return Err(Error::capacity(format!("derivative order {n} exceeds 8")));
    }
    let r = packet_moment_oracle(amp, n, Complex::new(x, 0.0), tau, opts)?;
    let mut v = from_quadrature(r, "psi derivative quadrature")?;
    if (n / 2) % 2 == 1 {
        v.psi = -v.psi;
    }
    Ok(v)
}

/// Bare half-line cosine transform: integral over [0, inf) of phi(z) cos(wz).
pub fn fourier_cosine_transform(amp: &Amplitude, w: f64) -> Result<Complex> {
    if amp.parity != Parity::Even {
        return Err(Error::domain("cosine transform needs an even amplitude"));
    }
    match amp.kind {
        AmplitudeKind::Gaussian { alpha, .. } => {
            Ok(sqrt_principal(PI / alpha) * 0.5 * (-w * w / (alpha * 4.0)).exp())
        }
        AmplitudeKind::Sech { beta, .. } => {
            let s = PI / (2.0 * beta);
            Ok(Complex::new(s * sech(s * w), 0.0))
        }
        _ => half_line_transform(amp, w, false, &QuadOptions::mixed(1e-13, 1e-12)),
    }
}

/// Bare half-line sine transform of an odd amplitude.
pub fn fourier_sine_transform(amp: &Amplitude, w: f64) -> Result<Complex> {
    if amp.parity != Parity::Odd {
        return Err(Error::domain("sine transform needs an odd amplitude"));
    }
    half_line_transform(amp, w, true, &QuadOptions::mixed(1e-13, 1e-12))
}

fn half_line_transform(amp: &Amplitude, w: f64, sine: bool, opts: &QuadOptions) -> Result<Complex> {
    let f = |z: f64| {
        let trig = if sine { (w * z).sin() } else { (w * z).cos() };
        amp.value(z) * trig
    };
    let r = integrate_decaying(
        &Integrand::half_line(&f).decay(amp.decay()).oscillation(w, 0.0),
        opts,
    )?;
    r.into_value("transform quadrature")
}

/// m-th w-derivative of the cosine transform, where known in closed form.
pub fn transform_derivative(amp: &Amplitude, m: usize, w: f64) -> Result<Complex> {
    if amp.parity != Parity::Even {
        return Err(Error::domain("cosine transform needs an even amplitude"));
    }
    match amp.kind {
        AmplitudeKind::Gaussian { alpha, .. } => {
            let a = Complex::new(1.0, 0.0) / (alpha * 4.0);
            Ok(sqrt_principal(PI / alpha) * 0.5 * gaussian_derivative(m, a, Complex::new(w, 0.0))?)
        }
        AmplitudeKind::Sech { beta, .. } => {
            let s = PI / (2.0 * beta);
            Ok(Complex::new(s.powi(m as i32 + 1) * sech_derivative(m, s * w), 0.0))
        }
        AmplitudeKind::GlaisherKernel => {
            if !(w > 0.0) {
                return Err(Error::domain("Glaisher transform series needs w > 0"));
            }
            Ok(Complex::new(asymptotics::glaisher_theta_derivative(m, w), 0.0))
        }
        AmplitudeKind::Custom { .. } => Err(Error::unsupported(
            "transform derivatives are not available for custom amplitudes",
        )),
    }
}

/// Pointwise bound |phi_c(w)| <= envelope, for the outer Parseval integral.
fn transform_decay(amp: &Amplitude) -> Result<DecayBound> {
    match amp.kind {
        AmplitudeKind::Gaussian { alpha, .. } => {
            let rate = (Complex::new(1.0, 0.0) / alpha).re / 4.0;
            Ok(DecayBound::gaussian(0.5 * sqrt_principal(PI / alpha).norm(), rate))
        }
        AmplitudeKind::Sech { beta, .. } => {
            let s = PI / (2.0 * beta);
            Ok(DecayBound::exponential(2.0 * s, s))
        }
        // e^{-w} (1 + 3e^{-8w} + ...) <= 1.1 e^{-w} for w >= 1/2
        AmplitudeKind::GlaisherKernel => Ok(DecayBound::exponential(1.1, 1.0)),
        AmplitudeKind::Custom { .. } => Err(Error::unsupported(
            "Parseval form needs a catalogue amplitude",
        )),
    }
}

/// Normalization in Parseval's relation for bare half-line cosine transforms.
pub const PARSEVAL_CONSTANT: f64 = 2.0 / PI;

/// d^n psi/dx^n recomputed on the transform side: for even amplitudes
/// 2 (-1)^{n/2} c_P times the integral over w of phi_c(w) coscos(n/2, x, w, i tau).
pub fn parseval_transformed_derivative(
    amp: &Amplitude,
    n: usize,
    x: f64,
    t: Complex,
    cfg: &PhysicalConfig,
) -> Result<WaveValue> {
    parseval_reduced(amp, n, x, reduced_time(t, cfg), &QuadOptions::mixed(1e-12, 1e-10))
}

pub fn parseval_reduced(
    amp: &Amplitude,
    n: usize,
    x: f64,
    tau: ReducedTime,
    opts: &QuadOptions,
) -> Result<WaveValue> {
    if amp.parity != Parity::Even {
        return Err(Error::unsupported("Parseval form is implemented for even amplitudes"));
    }
    if n % 2 == 1 || n > 8 {
        return Err(Error::unsupported("Parseval form needs an even order <= 8"));
    }
    if !tau.is_admissible() {
        return Err(Error::domain("Parseval form needs Im(tau) <= 0"));
    }
    let j = n / 2;
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    let base = transform_decay(amp)?;

    let at_damping = |delta: f64| -> Result<QuadratureResult> {
        let gauss = I * tau.tau + delta;
        // |coscos| <= Gamma(j+1/2) / (2 Re(gauss)^{j+1/2})
        let bound = crate::zeta::gamma_half(j as u32)? / (2.0 * gauss.re.powf(j as f64 + 0.5));
        let f = |w: f64| {
            let ft = fourier_cosine_transform(amp, w).unwrap_or(Complex::new(f64::NAN, 0.0));
            let k = closedform::coscos(j, Complex::new(x, 0.0), Complex::new(w, 0.0), gauss)
                .unwrap_or(Complex::new(f64::NAN, 0.0));
            ft * k
        };
        integrate_decaying(
            &Integrand::half_line(&f).decay(base.clone().scaled(bound)).oscillation(x, 0.0),
            opts,
        )
    };

    let r = if tau.is_damped() {
        at_damping(0.0)?
    } else {
        let sched = crate::quadrature::RegularizationSchedule::default();
        let mut values = Vec::new();
        let mut inner = 0.0f64;
        for &d in sched.delta_values() {
            let r = at_damping(d)?;
            if !r.converged {
                return Err(Error::non_convergence("Parseval damped integral", r.abs_error_estimate));
            }
            inner = inner.max(r.abs_error_estimate);
            values.push(r.value);
        }
        let est = crate::quadrature::extrapolate_to_zero(
            sched.delta_values(),
            &values,
            sched.extrapolation_order(),
        );
        let k = est.len();
        let err = (est[k - 1] - est[k - 2]).norm() + inner;
        QuadratureResult {
            value: est[k - 1],
            abs_error_estimate: err,
            evaluations: 1,
            converged: err <= opts.target(est[k - 1]),
        }
    };
    let mut v = from_quadrature(r, "Parseval outer quadrature")?;
    v.psi *= 2.0 * sign * PARSEVAL_CONSTANT;
    v.error_estimate *= 2.0 * PARSEVAL_CONSTANT;
    Ok(v)
}

/// Phase coefficient kappa in exp(i kappa x^2 / tau) of the transformation law.
pub const RECIPROCAL_PHASE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocalCheck {
    pub lhs: Complex,
    pub rhs: Complex,
    pub ratio: Complex,
}

/// lambda = phi_c(0) / phi(0): the eigenvalue of the bare cosine transform
/// for a self-reciprocal amplitude.
pub fn reciprocal_eigenvalue(amp: &Amplitude) -> Result<Complex> {
    Ok(fourier_cosine_transform(amp, 0.0)? / amplitude_eval(amp, 0.0)?)
}

/// Right side of the transformation law without the phase factor:
/// lambda (i pi tau)^{-1/2} psi(x/(2 tau), -1/(4 tau)).
fn reciprocal_partner(amp: &Amplitude, x: f64, tau: Complex, opts: &PsiOptions) -> Result<Complex> {
    let lambda = reciprocal_eigenvalue(amp)?;
    let x2 = Complex::new(x, 0.0) / (tau * 2.0);
    let tau2 = ReducedTime::new(-Complex::new(1.0, 0.0) / (tau * 4.0));
    let inner = psi_reduced(amp, x2, tau2, Method::Quadrature, opts)?.psi;
    Ok(lambda / sqrt_principal(I * PI * tau) * inner)
}

/// psi(x, tau) against lambda (i pi tau)^{-1/2} e^{i kappa x^2/tau} psi(x/(2tau), -1/(4tau)).
pub fn self_reciprocal_check(
    amp: &Amplitude,
    x: f64,
    t: Complex,
    cfg: &PhysicalConfig,
) -> Result<ReciprocalCheck> {
    let tau = reduced_time(t, cfg);
    if !tau.is_damped() {
        return Err(Error::domain("transformation law check needs Im(tau) < 0"));
    }
    let opts = PsiOptions::default();
    let lhs = psi_reduced(amp, Complex::new(x, 0.0), tau, Method::Quadrature, &opts)?.psi;
    let phase = (I * RECIPROCAL_PHASE * x * x / tau.tau).exp();
    let rhs = phase * reciprocal_partner(amp, x, tau.tau, &opts)?;
    Ok(ReciprocalCheck {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Least-squares fit of kappa from psi(x)/partner(x) = exp(i kappa x^2/tau).
pub fn fit_reciprocal_phase(amp: &Amplitude, xs: &[f64], tau: Complex) -> Result<f64> {
    let opts = PsiOptions::default();
    let (mut num, mut den) = (0.0, 0.0);
    for &x in xs {
        let lhs = psi_reduced(amp, Complex::new(x, 0.0), ReducedTime::new(tau), Method::Quadrature, &opts)?
            .psi;
        let partner = reciprocal_partner(amp, x, tau, &opts)?;
        // log(ratio) = i kappa x^2 / tau; regress on u = i x^2 / tau
        let log_ratio = (lhs / partner).ln();
        let u = I * x * x / tau;
        num += (log_ratio * u.conj()).re;
        den += u.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::domain("phase fit needs some x != 0"));
    }
    Ok(num / den)
}

/// Scale s for which sech(s z) has the same shape as its cosine transform,
/// found by golden-section search on a grid mismatch using quadrature
/// transforms.
pub fn calibrate_self_reciprocal_scale() -> Result<f64> {
    let grid: Vec<f64> = (0..=12).map(|i| 0.25 * i as f64).collect();
    let mismatch = |s: f64| -> Result<f64> {
        let amp = Amplitude::sech(s, 0.0)?;
        let f0 = half_line_transform(&amp, 0.0, false, &QuadOptions::mixed(1e-12, 1e-11))?;
        let mut acc = 0.0;
        for &w in &grid {
            let ft = half_line_transform(&amp, w, false, &QuadOptions::mixed(1e-12, 1e-11))?;
            acc += (ft / f0 - amp.value(w)).norm_sqr();
        }
        Ok(acc)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.5, 3.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (mismatch(c)?, mismatch(d)?);
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = mismatch(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = mismatch(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// The Hermite-weighted rearrangement of psi:
/// (i/x)^n times the integral of e^{ixz - i tau z^2}
/// sum_k C(n,k) (-sqrt(i tau))^k H_k(sqrt(i tau) z) phi^(n-k)(z).
pub fn hermite_expansion(
    amp: &Amplitude,
    n: usize,
    x: f64,
    t: Complex,
    cfg: &PhysicalConfig,
) -> Result<WaveValue> {
    hermite_expansion_reduced(amp, n, x, reduced_time(t, cfg), &QuadOptions::mixed(1e-12, 1e-11))
}

pub fn hermite_expansion_reduced(
    amp: &Amplitude,
    n: usize,
    x: f64,
    tau: ReducedTime,
    opts: &QuadOptions,
) -> Result<WaveValue> {
    if x == 0.0 {
        return Err(Error::domain("expansion carries x^{-n}; x must be nonzero"));
    }
    if n > 4 {
        return Err(Error::capacity(format!("expansion order {n} exceeds 4")));
    }
    if !tau.is_admissible() {
        return Err(Error::domain("expansion needs Im(tau) <= 0"));
    }
    if n == 0 {
        return psi_reduced(amp, Complex::new(x, 0.0), tau, Method::Quadrature, &PsiOptions {
            quad: *opts,
            ..PsiOptions::default()
        });
    }
    let root = sqrt_principal(I * tau.tau);
    let t = tau.tau;

    // decay: sum of the per-term bounds sharing the amplitude's base envelope
    let mut scale = 0.0;
    let mut power = 0.0f64;
    for k in 0..=n {
        let d = amp.derivative_decay(n - k).ok_or_else(|| {
            Error::unsupported("expansion needs an amplitude with analytic derivatives")
        })?;
        let env = d.envelopes()[0];
        let (s, p) = match env {
            Envelope::Gaussian { scale, power, .. } | Envelope::Exponential { scale, power, .. } => {
                (scale, power)
            }
            Envelope::Stretched { scale, power, .. } => (scale, power),
        };
        let hk = hermite_growth_constant(k)? * (root.norm().max(1.0)).powi(k as i32);
        scale += binomial_f64(n as u32, k as u32)? * root.norm().powi(k as i32) * hk * s;
        power = power.max(p + k as f64);
    }
    let (env, sup) = match amp.derivative_decay(0).expect("checked above").envelopes()[0] {
        Envelope::Gaussian { scale: s0, rate, shift, .. } => {
            (Envelope::Gaussian { scale: s0 * scale, rate, shift, power }, s0 * scale)
        }
        Envelope::Exponential { scale: s0, rate, shift, .. } => (
            Envelope::Exponential { scale: s0 * scale, rate, shift, power },
            s0 * scale * (rate * shift).exp(),
        ),
        e => (e, f64::INFINITY),
    };
    let mut decay = DecayBound::from(env);
    if tau.is_damped() && sup.is_finite() {
        decay = decay.and(DecayBound::from(Envelope::Gaussian {
            scale: sup,
            rate: -t.im,
            shift: 0.0,
            power,
        }));
    }

    let coeffs: Vec<Complex> = (0..=n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            root.powu(k as u32) * binomial_f64(n as u32, k as u32).unwrap_or(0.0) * sign
        })
        .collect();
    let f = |z: f64| {
        let mut acc = Complex::new(0.0, 0.0);
        for k in 0..=n {
            let h = hermite_eval(k, root * z).unwrap_or(Complex::new(f64::NAN, 0.0));
            let d = amplitude_derivative(amp, n - k, z).unwrap_or(Complex::new(f64::NAN, 0.0));
            acc += coeffs[k] * h * d;
        }
        acc * (I * x * z - I * t * z * z).exp()
    };
    let r = integrate_decaying(
        &Integrand::whole_line(&f).decay(decay).oscillation(x, t.re),
        opts,
    )?;
    let mut v = from_quadrature(r, "Hermite expansion quadrature")?;
    let pre = (I / x).powu(n as u32);
    v.psi *= pre;
    v.error_estimate *= pre.norm();
    Ok(v)
}

/// |i hbar D_t psi + (hbar^2 / 2m) D_xx psi| with central stencils.
pub fn schrodinger_residual(
    amp: &Amplitude,
    x: f64,
    t: Complex,
    cfg: &PhysicalConfig,
    h_x: f64,
    h_t: f64,
) -> Result<f64> {
    let method = match amp.kind {
        AmplitudeKind::Gaussian { .. } => Method::Closed,
        _ => Method::Quadrature,
    };
    let opts = PsiOptions {
        quad: QuadOptions::mixed(1e-14, 1e-14),
        ..PsiOptions::default()
    };
    let field = |x: f64, t: Complex| -> Result<Complex> {
        Ok(psi_reduced(amp, Complex::new(x, 0.0), reduced_time(t, cfg), method, &opts)?.psi)
    };
    schrodinger_residual_of(&field, x, t, cfg, h_x, h_t)
}

/// The residual for an arbitrary field psi(x, t).
pub fn schrodinger_residual_of(
    field: &dyn Fn(f64, Complex) -> Result<Complex>,
    x: f64,
    t: Complex,
    cfg: &PhysicalConfig,
    h_x: f64,
    h_t: f64,
) -> Result<f64> {
    if !(h_x > 0.0 && h_t > 0.0) {
        return Err(Error::domain("stencil steps must be positive"));
    }
    if !reduced_time(t, cfg).is_damped() {
        return Err(Error::domain("residual check needs Im(tau) < 0"));
    }
    let center = field(x, t)?;
    let dt = (field(x, t + h_t)? - field(x, t - h_t)?) / (2.0 * h_t);
    let dxx = (field(x + h_x, t)? - center * 2.0 + field(x - h_x, t)?) / (h_x * h_x);
    let hbar = cfg.hbar();
    let r = I * hbar * dt + dxx * (hbar * hbar / (2.0 * cfg.mass()));
    Ok(ensure_finite(r, "Schrodinger residual")?.norm())
}
