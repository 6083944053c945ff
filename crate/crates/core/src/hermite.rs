//! Physicists' Hermite polynomials, Gaussian derivatives, and the
//! shifted-argument Hermite identity.

use crate::error::{Error, Result};
use crate::foundation::{binomial_f64, sqrt_principal, Complex};

/// Highest order evaluated by the three-term recurrence.
pub const HERMITE_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HermiteOrder(usize);

impl HermiteOrder {
    pub fn new(n: usize) -> Result<Self> {
        if n > HERMITE_CAP {
            Err(Error::capacity(format!(
                "Hermite order {n} exceeds cap {HERMITE_CAP}"
            )))
        } else {
            Ok(Self(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// H_n(z) via H_{k+1} = 2z H_k - 2k H_{k-1}.
pub fn hermite_eval(n: usize, z: Complex) -> Result<Complex> {
    HermiteOrder::new(n)?;
    let mut prev = Complex::new(1.0, 0.0);
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = z * 2.0;
    for k in 1..n {
        let next = z * cur * 2.0 - prev * (2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

pub fn hermite_real(n: usize, x: f64) -> Result<f64> {
    hermite_eval(n, Complex::new(x, 0.0)).map(|v| v.re)
}

/// H_0(z), ..., H_n(z) in one recurrence pass.
pub fn hermite_table(n: usize, z: Complex) -> Result<Vec<Complex>> {
    HermiteOrder::new(n)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex::new(1.0, 0.0));
    if n >= 1 {
        out.push(z * 2.0);
    }
    for k in 1..n {
        let next = z * out[k] * 2.0 - out[k - 1] * (2.0 * k as f64);
        out.push(next);
    }
    Ok(out)
}

/// Monomial coefficients of H_n, lowest degree first.
pub fn hermite_coefficients(n: usize) -> Result<Vec<f64>> {
    HermiteOrder::new(n)?;
    let mut prev = vec![1.0];
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = vec![0.0, 2.0];
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= 2.0 * k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// A constant C with |H_n(y)| <= C (1 + |y|)^n for every complex y.
pub fn hermite_growth_constant(n: usize) -> Result<f64> {
    Ok(hermite_coefficients(n)?.iter().map(|c| c.abs()).sum())
}

/// d^m/dz^m exp(-a z^2) = a^{m/2} (-1)^m exp(-a z^2) H_m(sqrt(a) z), principal sqrt(a).
pub fn gaussian_derivative(m: usize, a: Complex, z: Complex) -> Result<Complex> {
    let root = sqrt_principal(a);
    let h = hermite_eval(m, root * z)?;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Ok(root.powu(m as u32) * h * (-a * z * z).exp() * sign)
}

/// Both sides of the shifted-argument identity
/// H_2n((a+b)/sqrt(4x)) + e^{ab/x} H_2n((a-b)/sqrt(4x))
///   ~ (b^2/2x)^n sum_k C(2n,k) H_k(a/sqrt(4x)) (sqrt(x)/b)^k [(-1)^k e^{ab/x} + 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedIdentity {
    pub lhs: f64,
    /// The right side with the printed (b^2/2x)^n prefactor.
    pub rhs: f64,
    pub ratio: f64,
}

pub fn shifted_argument_identity(n: usize, a: f64, b: f64, x: f64) -> Result<ShiftedIdentity> {
    if b == 0.0 {
        return Err(Error::domain("shifted-argument identity needs b != 0"));
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    let order = 2 * n;
    let scale = (4.0 * x).sqrt();
    let e = (a * b / x).exp();
    let lhs = hermite_real(order, (a + b) / scale)? + e * hermite_real(order, (a - b) / scale)?;

    let hs = hermite_table(order, Complex::new(a / scale, 0.0))?;
    let ratio_pow = x.sqrt() / b;
    let mut sum = 0.0;
    let mut pow = 1.0;
    for (k, h) in hs.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += binomial_f64(order as u32, k as u32)? * h.re * pow * (sign * e + 1.0);
        pow *= ratio_pow;
    }
    let rhs = (b * b / (2.0 * x)).powi(n as i32) * sum;
    Ok(ShiftedIdentity {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// lhs / rhs of the shifted-argument identity: the true prefactor is (b^2/x)^n,
/// so the printed (b^2/2x)^n leaves a constant 2^n.
pub fn shifted_identity_constant(n: usize) -> f64 {
    2f64.powi(n as i32)
}
