//! Shared scalar plumbing: complex values, the physical-to-reduced time map,
//! binomial coefficients and compensated summation.

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

pub const I: Complex = Complex::new(0.0, 1.0);

/// Largest `n` accepted by [`binomial`].
pub const BINOMIAL_CAP: u32 = 128;

/// Physical constants entering the free Schrödinger equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConfig {
    hbar: f64,
    mass: f64,
}

impl PhysicalConfig {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::domain(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::domain(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// hbar = 1, mass = 1/2, so that hbar / (2 mass) = 1 and tau = t.
    pub fn natural() -> Self {
        Self {
            hbar: 1.0,
            mass: 0.5,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// hbar / (2 mass).
    pub fn diffusion(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }
}

impl Default for PhysicalConfig {
    fn default() -> Self {
        Self::natural()
    }
}

/// Dimensionless time tau = t hbar / (2 m); every quadratic phase carries it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTime {
    pub tau: Complex,
}

impl ReducedTime {
    pub fn new(tau: Complex) -> Self {
        Self { tau }
    }

    /// Im(tau) < 0: the wave-packet integral converges absolutely.
    pub fn is_damped(&self) -> bool {
        self.tau.im < 0.0
    }

    /// Im(tau) <= 0.
    pub fn is_admissible(&self) -> bool {
        self.tau.im <= 0.0
    }

    /// Inverse map back to physical time.
    pub fn physical_time(&self, cfg: &PhysicalConfig) -> Complex {
        self.tau / cfg.diffusion()
    }
}

impl From<Complex> for ReducedTime {
    fn from(tau: Complex) -> Self {
        Self { tau }
    }
}

pub fn reduced_time(t: Complex, cfg: &PhysicalConfig) -> ReducedTime {
    ReducedTime {
        tau: t * cfg.diffusion(),
    }
}

/// Principal square root: Re(w) >= 0, and Im(w) >= 0 when Re(w) = 0.
pub fn sqrt_principal(z: Complex) -> Complex {
    let w = z.sqrt();
    if w.re == 0.0 && w.im < 0.0 {
        -w
    } else if w.re < 0.0 {
        -w
    } else {
        w
    }
}

/// Exact binomial coefficient C(n, k) for n <= 128.
pub fn binomial(n: u32, k: u32) -> Result<u128> {
    if n > BINOMIAL_CAP {
        return Err(Error::capacity(format!(
            "binomial order {n} exceeds cap {BINOMIAL_CAP}"
        )));
    }
    if k > n {
        return Err(Error::domain(format!("binomial({n}, {k}) with k > n")));
    }
    let k = k.min(n - k) as usize;
    // one Pascal row, additions only
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for i in 1..=n as usize {
        let top = k.min(i);
        for j in (1..=top).rev() {
            row[j] = row[j]
                .checked_add(row[j - 1])
                .ok_or_else(|| Error::capacity(format!("binomial({n}, {k}) overflows u128")))?;
        }
    }
    Ok(row[k])
}

/// C(n, k) as a float, for use inside formulas.
pub fn binomial_f64(n: u32, k: u32) -> Result<f64> {
    binomial(n, k).map(|c| c as f64)
}

pub fn ensure_finite(z: Complex, what: &str) -> Result<Complex> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Neumaier compensated accumulator over complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex,
    carry: Complex,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: Complex) {
        self.sum = Complex::new(
            neumaier_step(self.sum.re, v.re, &mut self.carry.re),
            neumaier_step(self.sum.im, v.im, &mut self.carry.im),
        );
    }

    pub fn value(&self) -> Complex {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<Complex> for CompensatedSum {
    fn from_iter<T: IntoIterator<Item = Complex>>(iter: T) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

fn neumaier_step(sum: f64, v: f64, carry: &mut f64) -> f64 {
    let t = sum + v;
    if sum.abs() >= v.abs() {
        *carry += (sum - t) + v;
    } else {
        *carry += (v - t) + sum;
    }
    t
}

/// Compensated sum of real values.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        sum = neumaier_step(sum, v, &mut carry);
    }
    sum + carry
}

/// Relative distance |a - b| / max(|a|, |b|), zero when both vanish.
pub fn rel_diff(a: Complex, b: Complex) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
