//! Closed forms for Gaussian-weighted trigonometric moments
//! integral over [0, inf) of e^{-x z^2} z^{2n} cos(az) cos(bz) (and sin sin),
//! the Hermite-weighted Gaussian transforms, and the cosine moment F(a).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::foundation::{binomial_f64, ensure_finite, sqrt_principal, Complex};
use crate::hermite::{hermite_eval, hermite_table};

/// Highest half-degree n accepted by the moment formulas.
pub const MOMENT_CAP: usize = 16;

/// Below |b|^2 < SWITCH_EPSILON |x| the product integrals go through F(a +- b).
pub const SWITCH_EPSILON: f64 = 1e-2;

fn check_moment(n: usize, x: Complex) -> Result<()> {
    if n > MOMENT_CAP {
        return Err(Error::capacity(format!("moment order {n} exceeds {MOMENT_CAP}")));
    }
    if !(x.re > 0.0) {
        return Err(Error::domain(format!("Gaussian parameter needs Re(x) > 0, got {x}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnParams {
    pub n: usize,
    pub a: Complex,
    pub b: Complex,
    pub x: Complex,
}

impl GnParams {
    pub fn new(n: usize, a: Complex, b: Complex, x: Complex) -> Result<Self> {
        check_moment(n, x)?;
        if b == Complex::new(0.0, 0.0) {
            return Err(Error::domain(
                "g_n is singular at b = 0; use f_cosine_moment for the b -> 0 limit",
            ));
        }
        Ok(Self { n, a, b, x })
    }
}

/// (ib/2x)^{2n} (1/4) sqrt(pi/x) e^{-(a-b)^2/4x} sum_k C(2n,k) (-sqrt(x)/b)^k H_k(a/sqrt(4x)),
/// with the b^{-k} powers multiplied through so nothing is divided by b.
pub fn g_n(p: GnParams) -> Result<Complex> {
    let GnParams { n, a, b, x } = GnParams::new(p.n, p.a, p.b, p.x)?;
    let root = sqrt_principal(x);
    let order = 2 * n;
    let hs = hermite_table(order, a / (root * 2.0))?;
    let mut sum = Complex::new(0.0, 0.0);
    for (k, h) in hs.iter().enumerate() {
        let c = binomial_f64(order as u32, k as u32)?;
        sum += (-root).powu(k as u32) * b.powu((order - k) as u32) * h * c;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let d = a - b;
    let pre = (x * 2.0).powi(-(order as i32)) * (PI.sqrt() / 4.0) / root * (-d * d / (x * 4.0)).exp();
    ensure_finite(pre * sum * sign, "g_n")
}

/// integral over [0, inf) of e^{-x z^2} z^{2n} cos(az)
pub fn f_cosine_moment(n: usize, a: Complex, x: Complex) -> Result<Complex> {
    Ok(f_cosine_moment_printed(n, a, x)? * 4f64.powi(-(n as i32)))
}

/// The cosine moment without the 4^{-n} factor.
pub fn f_cosine_moment_printed(n: usize, a: Complex, x: Complex) -> Result<Complex> {
    check_moment(n, x)?;
    let root = sqrt_principal(x);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let h = hermite_eval(2 * n, a / (root * 2.0))?;
    let v = root.powi(-(2 * n as i32 + 1)) * (-a * a / (x * 4.0)).exp() * h * (0.5 * sign * PI.sqrt());
    ensure_finite(v, "cosine moment")
}

pub fn coscos(n: usize, a: Complex, b: Complex, x: Complex) -> Result<Complex> {
    coscos_with(n, a, b, x, SWITCH_EPSILON)
}

pub fn sinsin(n: usize, a: Complex, b: Complex, x: Complex) -> Result<Complex> {
    sinsin_with(n, a, b, x, SWITCH_EPSILON)
}

fn small_b(b: Complex, x: Complex, eps: f64) -> bool {
    b.norm_sqr() < eps * x.norm()
}

/// integral over [0, inf) of e^{-x z^2} z^{2n} cos(az) cos(bz), with an explicit switch threshold.
pub fn coscos_with(n: usize, a: Complex, b: Complex, x: Complex, eps: f64) -> Result<Complex> {
    check_moment(n, x)?;
    if small_b(b, x, eps) {
        Ok((f_cosine_moment(n, a + b, x)? + f_cosine_moment(n, a - b, x)?) * 0.5)
    } else {
        Ok(g_n(GnParams::new(n, a, b, x)?)? + g_n(GnParams::new(n, a, -b, x)?)?)
    }
}

/// integral over [0, inf) of e^{-x z^2} z^{2n} sin(az) sin(bz), with an explicit switch threshold.
pub fn sinsin_with(n: usize, a: Complex, b: Complex, x: Complex, eps: f64) -> Result<Complex> {
    check_moment(n, x)?;
    if small_b(b, x, eps) {
        Ok((f_cosine_moment(n, a - b, x)? - f_cosine_moment(n, a + b, x)?) * 0.5)
    } else {
        Ok(g_n(GnParams::new(n, a, b, x)?)? - g_n(GnParams::new(n, a, -b, x)?)?)
    }
}

fn base(a: Complex, b: Complex, x: Complex, sign: f64) -> Result<Complex> {
    check_moment(0, x)?;
    let d = a - b;
    let s = a + b;
    let v = sqrt_principal(PI / x) * 0.25
        * ((-d * d / (x * 4.0)).exp() + (-s * s / (x * 4.0)).exp() * sign);
    ensure_finite(v, "Gaussian product integral")
}

/// (1/4) sqrt(pi/x) [e^{-(a-b)^2/4x} + e^{-(a+b)^2/4x}]
pub fn base_coscos(a: Complex, b: Complex, x: Complex) -> Result<Complex> {
    base(a, b, x, 1.0)
}

/// (1/4) sqrt(pi/x) [e^{-(a-b)^2/4x} - e^{-(a+b)^2/4x}]
pub fn base_sinsin(a: Complex, b: Complex, x: Complex) -> Result<Complex> {
    base(a, b, x, -1.0)
}

fn check_gr(n: usize, a: f64) -> Result<()> {
    if n > MOMENT_CAP {
        return Err(Error::capacity(format!("order {n} exceeds {MOMENT_CAP}")));
    }
    if !(a > 0.0) {
        return Err(Error::domain(format!("a must be positive, got {a}")));
    }
    Ok(())
}

/// integral over [0, inf) of e^{-a z^2} H_2n(sqrt(a) z) cos(sqrt(2) beta z)
pub fn gr_hermite_cos(n: usize, a: f64, beta: f64) -> Result<f64> {
    check_gr(n, a)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let nf = n as f64;
    Ok(sign * 2f64.powf(nf - 1.0) / a.powf(nf + 0.5)
        * PI.sqrt()
        * beta.powi(2 * n as i32)
        * (-beta * beta / (2.0 * a)).exp())
}

/// integral over [0, inf) of e^{-a z^2} H_{2n+1}(sqrt(a) z) sin(sqrt(2) beta z)
pub fn gr_hermite_sin(n: usize, a: f64, beta: f64) -> Result<f64> {
    check_gr(n, a)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let nf = n as f64;
    Ok(sign * 2f64.powf(nf - 0.5) / a.powf(nf + 1.0)
        * PI.sqrt()
        * beta.powi(2 * n as i32 + 1)
        * (-beta * beta / (2.0 * a)).exp())
}
