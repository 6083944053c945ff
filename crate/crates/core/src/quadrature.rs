//! The numerical oracle every closed form is checked against.
//!
//! Absolutely integrable integrands go through [`integrate_decaying`]: the
//! half-line (or whole line, folded onto the half-line) is truncated where the
//! caller's declared envelope guarantees a tail below a tenth of the tolerance,
//! and the remaining interval is handled by adaptive 7/15-point Gauss-Kronrod
//! bisection. Bounded but non-integrable oscillatory integrands go through
//! [`integrate_oscillatory_regularized`], which damps with `exp(-delta z^2)` and
//! extrapolates the damped values polynomially to `delta = 0`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::foundation::{Complex, CompensatedSum, ReducedTime, I};
use crate::wavepacket::{Amplitude, Parity};

pub const DEFAULT_MAX_EVALS: usize = 2_000_000;

/// Smallest tolerance the engine supports.
pub const MIN_TOLERANCE: f64 = 1e-13;

// Kronrod abscissae on [-1, 1], descending; odd indices are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadratureResult {
    /// The value, or a non-convergence error naming `what`.
    pub fn into_value(self, what: &str) -> Result<Complex> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::non_convergence(what, self.abs_error_estimate))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }

    /// Stop once the error is below `abs` or below `rel * |value|`.
    pub fn mixed(abs: f64, rel: f64) -> Self {
        Self {
            abs_tol: abs,
            rel_tol: rel,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }

    pub fn budget(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn target(&self, value: Complex) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }

    /// Same options with both tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_evals: self.max_evals,
        }
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self::with_tol(1e-12)
    }
}

/// One pointwise bound on |f(z)| valid for |z| beyond the shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// scale (1+|z|)^power exp(-rate (|z| - shift)^2)
    Gaussian {
        scale: f64,
        rate: f64,
        shift: f64,
        power: f64,
    },
    /// scale (1+|z|)^power exp(-rate (|z| - shift))
    Exponential {
        scale: f64,
        rate: f64,
        shift: f64,
        power: f64,
    },
    /// scale (1+|z|)^power exp(-rate sqrt|z|)
    Stretched { scale: f64, rate: f64, power: f64 },
}

impl Envelope {
    /// Upper bound on the integral of the envelope over [l, inf).
    pub fn tail(&self, l: f64) -> f64 {
        match *self {
            Envelope::Gaussian {
                scale,
                rate,
                shift,
                power,
            } => {
                if l <= shift {
                    return f64::INFINITY;
                }
                let denom = 2.0 * rate * (l - shift) - power / (1.0 + l);
                if denom <= 0.0 {
                    return f64::INFINITY;
                }
                scale * (1.0 + l).powf(power) * (-rate * (l - shift).powi(2)).exp() / denom
            }
            Envelope::Exponential {
                scale,
                rate,
                shift,
                power,
            } => {
                if l <= shift {
                    return f64::INFINITY;
                }
                let denom = rate - power / (1.0 + l);
                if denom <= 0.0 {
                    return f64::INFINITY;
                }
                scale * (1.0 + l).powf(power) * (-rate * (l - shift)).exp() / denom
            }
            Envelope::Stretched { scale, rate, power } => {
                // z = u^2, (1+u^2)^p <= (2u^2)^p for u >= 1
                if l < 1.0 {
                    return f64::INFINITY;
                }
                let u = l.sqrt();
                let q = 2.0 * power + 1.0;
                let denom = rate - q / u;
                if denom <= 0.0 {
                    return f64::INFINITY;
                }
                2.0 * scale * 2f64.powf(power) * u.powf(q) * (-rate * u).exp() / denom
            }
        }
    }

    fn scaled(self, c: f64) -> Self {
        match self {
            Envelope::Gaussian {
                scale,
                rate,
                shift,
                power,
            } => Envelope::Gaussian {
                scale: scale * c,
                rate,
                shift,
                power,
            },
            Envelope::Exponential {
                scale,
                rate,
                shift,
                power,
            } => Envelope::Exponential {
                scale: scale * c,
                rate,
                shift,
                power,
            },
            Envelope::Stretched { scale, rate, power } => Envelope::Stretched {
                scale: scale * c,
                rate,
                power,
            },
        }
    }

    fn with_power(self, extra: f64) -> Self {
        match self {
            Envelope::Gaussian {
                scale,
                rate,
                shift,
                power,
            } => Envelope::Gaussian {
                scale,
                rate,
                shift,
                power: power + extra,
            },
            Envelope::Exponential {
                scale,
                rate,
                shift,
                power,
            } => Envelope::Exponential {
                scale,
                rate,
                shift,
                power: power + extra,
            },
            Envelope::Stretched { scale, rate, power } => Envelope::Stretched {
                scale,
                rate,
                power: power + extra,
            },
        }
    }

    /// The envelope times exp(g |z|), if it still decays.
    fn with_linear_growth(self, g: f64) -> Option<Self> {
        if g <= 0.0 {
            return Some(self);
        }
        match self {
            Envelope::Gaussian {
                scale,
                rate,
                shift,
                power,
            } => {
                let ds = g / (2.0 * rate);
                Some(Envelope::Gaussian {
                    scale: scale * (g * shift + g * g / (4.0 * rate)).exp(),
                    rate,
                    shift: shift + ds,
                    power,
                })
            }
            Envelope::Exponential {
                scale,
                rate,
                shift,
                power,
            } => {
                if rate > g {
                    Some(Envelope::Exponential {
                        scale: scale * (g * shift).exp(),
                        rate: rate - g,
                        shift,
                        power,
                    })
                } else {
                    None
                }
            }
            Envelope::Stretched { .. } => None,
        }
    }
}

/// A set of envelopes, each bounding |f|; the tail bound is the smallest.
/// An empty set declares no decay.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecayBound {
    envelopes: Vec<Envelope>,
}

impl DecayBound {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn gaussian(scale: f64, rate: f64) -> Self {
        Self::from(Envelope::Gaussian {
            scale,
            rate,
            shift: 0.0,
            power: 0.0,
        })
    }

    pub fn exponential(scale: f64, rate: f64) -> Self {
        Self::from(Envelope::Exponential {
            scale,
            rate,
            shift: 0.0,
            power: 0.0,
        })
    }

    pub fn stretched(scale: f64, rate: f64) -> Self {
        Self::from(Envelope::Stretched {
            scale,
            rate,
            power: 0.0,
        })
    }

    pub fn is_declared(&self) -> bool {
        !self.envelopes.is_empty()
    }

    pub fn envelopes(&self) -> &[Envelope] {
        &self.envelopes
    }

    pub fn and(mut self, other: DecayBound) -> Self {
        self.envelopes.extend(other.envelopes);
        self
    }

    pub fn scaled(self, c: f64) -> Self {
        self.map(|e| Some(e.scaled(c)))
    }

    /// Multiply every envelope by (1+|z|)^extra.
    pub fn with_power(self, extra: f64) -> Self {
        self.map(|e| Some(e.with_power(extra)))
    }

    /// Multiply by exp(g |z|); envelopes that stop decaying are dropped.
    pub fn with_linear_growth(self, g: f64) -> Self {
        self.map(|e| e.with_linear_growth(g))
    }

    /// Bound on the integral of |f| over [l, inf).
    pub fn tail(&self, l: f64) -> f64 {
        self.envelopes
            .iter()
            .map(|e| e.tail(l))
            .fold(f64::INFINITY, f64::min)
    }

    fn map(self, f: impl Fn(Envelope) -> Option<Envelope>) -> Self {
        Self {
            envelopes: self.envelopes.into_iter().filter_map(f).collect(),
        }
    }
}

impl From<Envelope> for DecayBound {
    fn from(e: Envelope) -> Self {
        Self { envelopes: vec![e] }
    }
}

/// |f(z)| <= scale (1+|z|)^power; needed by the regularized path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub scale: f64,
    pub power: f64,
}

/// Local angular frequency |linear| + 2 |quadratic| |z| of the integrand's
/// phase, used to seed panels with enough nodes per period.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Oscillation {
    pub linear: f64,
    pub quadratic: f64,
}

impl Oscillation {
    pub fn new(linear: f64, quadratic: f64) -> Self {
        Self {
            linear: linear.abs(),
            quadratic: quadratic.abs(),
        }
    }

    pub fn frequency(&self, z: f64) -> f64 {
        self.linear + 2.0 * self.quadratic * z.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    HalfLine,
    WholeLine,
}

/// An integrand over [0, inf) or (-inf, inf) with its declared behaviour.
pub struct Integrand<'a> {
    f: &'a dyn Fn(f64) -> Complex,
    domain: Domain,
    decay: DecayBound,
    growth: Option<Growth>,
    oscillation: Oscillation,
}

impl<'a> Integrand<'a> {
    pub fn half_line(f: &'a dyn Fn(f64) -> Complex) -> Self {
        Self::new(f, Domain::HalfLine)
    }

    pub fn whole_line(f: &'a dyn Fn(f64) -> Complex) -> Self {
        Self::new(f, Domain::WholeLine)
    }

    fn new(f: &'a dyn Fn(f64) -> Complex, domain: Domain) -> Self {
        Self {
            f,
            domain,
            decay: DecayBound::none(),
            growth: None,
            oscillation: Oscillation::default(),
        }
    }

    pub fn decay(mut self, decay: DecayBound) -> Self {
        self.decay = decay;
        self
    }

    pub fn bounded(mut self, scale: f64, power: f64) -> Self {
        self.growth = Some(Growth { scale, power });
        self
    }

    pub fn oscillation(mut self, linear: f64, quadratic: f64) -> Self {
        self.oscillation = Oscillation::new(linear, quadratic);
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex,
    err: f64,
    floor: f64,
}

struct Worst {
    err: f64,
    idx: usize,
}

impl PartialEq for Worst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Worst {}
impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

fn kronrod15(f: &dyn Fn(f64) -> Complex, a: f64, b: f64) -> (Complex, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut fv = [(Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = (f1, f2);
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = (fc - mean).norm() * WGK[7];
    for j in 0..7 {
        resasc += ((fv[j].0 - mean).norm() + (fv[j].1 - mean).norm()) * WGK[j];
    }
    let h = half.abs();
    let value = resk * half;
    let resabs = resabs * h;
    let resasc = resasc * h;
    let mut err = ((resk - resg) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    if !(value.re.is_finite() && value.im.is_finite()) {
        err = f64::INFINITY;
    }
    (value, err, floor)
}

fn seed_panels(edges: &[f64], osc: &Oscillation) -> Vec<(f64, f64)> {
    // split until 15 nodes give at least 8 per period at the midpoint
    let limit = 15.0 * 2.0 * std::f64::consts::PI / 8.0;
    let mut out = Vec::new();
    let mut stack: Vec<(f64, f64)> = edges.windows(2).rev().map(|w| (w[0], w[1])).collect();
    while let Some((a, b)) = stack.pop() {
        let mid = 0.5 * (a + b);
        if (b - a) * osc.frequency(mid) > limit && out.len() + stack.len() < 200_000 {
            stack.push((mid, b));
            stack.push((a, mid));
        } else {
            out.push((a, b));
        }
    }
    out
}

/// Adaptive bisection over the given initial edges. `fixed_err` is added to
/// the error budget (tail truncation); `cost` counts evaluations per node.
fn adaptive(
    f: &dyn Fn(f64) -> Complex,
    edges: &[f64],
    osc: &Oscillation,
    opts: &QuadOptions,
    fixed_err: f64,
    cost: usize,
) -> QuadratureResult {
    let mut panels: Vec<Panel> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    let mut err_sum = 0.0;
    let mut value_sum = Complex::new(0.0, 0.0);
    let mut floor_sum = 0.0;

    for (a, b) in seed_panels(edges, osc) {
        let (value, err, floor) = kronrod15(f, a, b);
        evals += 15 * cost;
        err_sum += err;
        floor_sum += floor;
        value_sum += value;
        heap.push(Worst {
            err,
            idx: panels.len(),
        });
        panels.push(Panel { a, b, value, err, floor });
    }

    let mut best = (err_sum + fixed_err, value_sum);
    let mut steps = 0usize;
    loop {
        let total = err_sum + fixed_err;
        if total < best.0 {
            best = (total, value_sum);
        }
        // below twice the summed roundoff floor nothing more is attainable
        if total <= opts.target(value_sum).max(2.0 * floor_sum) || evals + 30 * cost > opts.max_evals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let p = &panels[worst.idx];
        let (a, b) = (p.a, p.b);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) || (b - a) <= 1e-14 * a.abs().max(b.abs()).max(1.0) {
            // too narrow to split; leave it out of the heap
            continue;
        }
        let (v1, e1, f1) = kronrod15(f, a, mid);
        let (v2, e2, f2) = kronrod15(f, mid, b);
        evals += 30 * cost;
        err_sum += e1 + e2 - p.err;
        floor_sum += f1 + f2 - p.floor;
        value_sum += v1 + v2 - p.value;
        panels[worst.idx] = Panel {
            a,
            b: mid,
            value: v1,
            err: e1,
            floor: f1,
        };
        heap.push(Worst {
            err: e1,
            idx: worst.idx,
        });
        heap.push(Worst {
            err: e2,
            idx: panels.len(),
        });
        panels.push(Panel {
            a: mid,
            b,
            value: v2,
            err: e2,
            floor: f2,
        });
        steps += 1;
        if steps % 64 == 0 {
            err_sum = panels.iter().map(|p| p.err).sum();
            floor_sum = panels.iter().map(|p| p.floor).sum();
        }
    }
    floor_sum = panels.iter().map(|p| p.floor).sum();

    err_sum = panels.iter().map(|p| p.err).sum();
    let total = err_sum + fixed_err;
    let (err, value) = if total <= best.0 {
        // exact resummation in position order
        let mut order: Vec<&Panel> = panels.iter().collect();
        order.sort_by(|p, q| p.a.total_cmp(&q.a));
        let value = order.iter().map(|p| p.value).collect::<CompensatedSum>().value();
        (total, value)
    } else {
        best
    };
    let finite = value.re.is_finite() && value.im.is_finite() && err.is_finite();
    QuadratureResult {
        value,
        abs_error_estimate: err,
        evaluations: evals.max(1),
        converged: finite && err <= opts.target(value).max(2.0 * floor_sum),
    }
}

/// Adaptive integral of f over a finite interval [a, b].
pub fn integrate_finite(
    f: &dyn Fn(f64) -> Complex,
    a: f64,
    b: f64,
    osc: Oscillation,
    opts: &QuadOptions,
) -> QuadratureResult {
    if a == b {
        return QuadratureResult {
            value: Complex::new(0.0, 0.0),
            abs_error_estimate: 0.0,
            evaluations: 1,
            converged: true,
        };
    }
    if b < a {
        let mut r = integrate_finite(f, b, a, osc, opts);
        r.value = -r.value;
        return r;
    }
    let edges: Vec<f64> = (0..=4).map(|i| a + (b - a) * i as f64 / 4.0).collect();
    adaptive(f, &edges, &osc, opts, 0.0, 1)
}

/// Smallest l on a geometric grid with sides * tail(l) below `target`.
fn truncation_point(decay: &DecayBound, target: f64, sides: f64) -> Option<f64> {
    let mut l = 0.5;
    while l < 1e7 {
        if sides * decay.tail(l) <= target {
            return Some(l);
        }
        l *= 1.15;
    }
    None
}

/// Integral of an absolutely integrable integrand over [0, inf) or
/// (-inf, inf), truncated where the declared decay allows.
pub fn integrate_decaying(integrand: &Integrand<'_>, opts: &QuadOptions) -> Result<QuadratureResult> {
    if !integrand.decay.is_declared() {
        return Err(Error::domain(
            "integrate_decaying needs a declared decay bound",
        ));
    }
    let sides = match integrand.domain {
        Domain::HalfLine => 1.0,
        Domain::WholeLine => 2.0,
    };
    let tail_target = opts.abs_tol.max(f64::MIN_POSITIVE) / 10.0;
    let Some(l) = truncation_point(&integrand.decay, tail_target, sides) else {
        return Ok(QuadratureResult {
            value: Complex::new(f64::NAN, f64::NAN),
            abs_error_estimate: f64::INFINITY,
            evaluations: 1,
            converged: false,
        });
    };
    let tail = sides * integrand.decay.tail(l);

    let mut edges = vec![0.0];
    let mut e = 0.5;
    while e < l {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(l);

    let f = integrand.f;
    Ok(match integrand.domain {
        Domain::HalfLine => adaptive(f, &edges, &integrand.oscillation, opts, tail, 1),
        Domain::WholeLine => {
            let folded = |z: f64| f(z) + f(-z);
            adaptive(&folded, &edges, &integrand.oscillation, opts, tail, 2)
        }
    })
}

/// Decreasing Gaussian damping strengths and the polynomial degree used to
/// extrapolate the damped integrals to zero damping.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationSchedule {
    delta_values: Vec<f64>,
    extrapolation_order: usize,
}

impl RegularizationSchedule {
    pub fn new(delta_values: Vec<f64>, extrapolation_order: usize) -> Result<Self> {
        if delta_values.len() < 2 {
            return Err(Error::domain("schedule needs at least two damping values"));
        }
        if delta_values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::domain("damping values must be strictly decreasing"));
        }
        if *delta_values.last().unwrap() < 1e-6 {
            return Err(Error::domain("smallest damping value must be >= 1e-6"));
        }
        if extrapolation_order > delta_values.len() - 1 {
            return Err(Error::domain(
                "extrapolation order exceeds number of damping values - 1",
            ));
        }
        Ok(Self {
            delta_values,
            extrapolation_order,
        })
    }

    pub fn delta_values(&self) -> &[f64] {
        &self.delta_values
    }

    pub fn extrapolation_order(&self) -> usize {
        self.extrapolation_order
    }
}

impl Default for RegularizationSchedule {
    fn default() -> Self {
        Self {
            delta_values: vec![0.01, 0.005, 0.0025, 0.00125, 0.000625],
            extrapolation_order: 4,
        }
    }
}

/// Lagrange weights at 0 for interpolation through the given nodes.
fn weights_at_zero(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &d)| d / (d - nodes[j]))
                .product()
        })
        .collect()
}

/// Polynomial extrapolation of (delta, value) pairs to delta = 0: returns the
/// estimates of order 0..=order, each through the smallest deltas.
pub fn extrapolate_to_zero(deltas: &[f64], values: &[Complex], order: usize) -> Vec<Complex> {
    let n = deltas.len();
    (0..=order.min(n - 1))
        .map(|k| {
            let nodes = &deltas[n - 1 - k..];
            let vals = &values[n - 1 - k..];
            weights_at_zero(nodes)
                .iter()
                .zip(vals)
                .map(|(w, v)| v * *w)
                .collect::<CompensatedSum>()
                .value()
        })
        .collect()
}

/// lim_{delta -> 0} of the integral of f(z) exp(-delta z^2).
pub fn integrate_oscillatory_regularized(
    integrand: &Integrand<'_>,
    sched: &RegularizationSchedule,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let growth = integrand.growth.ok_or_else(|| {
        Error::domain("regularized integration needs a growth bound on the integrand")
    })?;
    let order = sched.extrapolation_order;
    let n = sched.delta_values.len();
    let nodes = &sched.delta_values[n - 1 - order..];
    let amplification: f64 = weights_at_zero(nodes).iter().map(|w| w.abs()).sum();
    let inner = opts.tightened(10.0 * amplification);

    let f = integrand.f;
    let mut values = Vec::with_capacity(n);
    let mut evals = 0;
    let mut inner_err = 0.0f64;
    let mut all_converged = true;
    for &delta in &sched.delta_values {
        let damped = move |z: f64| f(z) * (-delta * z * z).exp();
        let decay = DecayBound::from(Envelope::Gaussian {
            scale: growth.scale,
            rate: delta,
            shift: 0.0,
            power: growth.power,
        })
        .and(integrand.decay.clone());
        let mut damped_integrand = Integrand::new(&damped, integrand.domain).decay(decay);
        damped_integrand.oscillation = integrand.oscillation;
        let r = integrate_decaying(&damped_integrand, &inner)?;
        evals += r.evaluations;
        all_converged &= r.converged;
        inner_err = inner_err.max(r.abs_error_estimate);
        values.push(r.value);
    }

    let estimates = extrapolate_to_zero(&sched.delta_values, &values, order);
    let value = *estimates.last().unwrap();
    let diffs: Vec<f64> = estimates.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let target = opts.target(value);
    let erratic = diffs
        .windows(2)
        .any(|w| w[1] > w[0] && w[1] > target);
    let extrapolation_err = diffs.last().copied().unwrap_or(f64::INFINITY);
    let err = extrapolation_err + amplification * inner_err;
    let finite = value.re.is_finite() && value.im.is_finite();
    Ok(QuadratureResult {
        value,
        abs_error_estimate: err,
        evaluations: evals,
        converged: finite && all_converged && !erratic && err <= target,
    })
}

/// psi(x, tau) = integral of phi(z) exp(i z x - i tau z^2) over the real line.
pub fn psi_oracle(amp: &Amplitude, x: f64, tau: ReducedTime, tol: f64) -> Result<QuadratureResult> {
    psi_oracle_with(amp, Complex::new(x, 0.0), tau, &QuadOptions::with_tol(tol))
}

/// As [`psi_oracle`], with a complex spatial argument and explicit options.
pub fn psi_oracle_with(
    amp: &Amplitude,
    x: Complex,
    tau: ReducedTime,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    packet_moment_oracle(amp, 0, x, tau, opts)
}

/// Integral of phi(z) z^moment exp(i z x - i tau z^2) over the real line,
/// folded onto the half-line when the amplitude has a parity.
pub fn packet_moment_oracle(
    amp: &Amplitude,
    moment: usize,
    x: Complex,
    tau: ReducedTime,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let t = tau.tau;
    if !tau.is_admissible() {
        return Err(Error::domain(format!(
            "wave-packet integral diverges for Im(tau) > 0 (tau = {t})"
        )));
    }
    let m = moment as i32;
    let phase = move |z: f64| (-I * t * z * z).exp() * z.powi(m);
    // even part of z^m phi(z) pairs with cos, odd part with i sin
    let folded_even = match amp.parity() {
        Parity::Even => Some(moment % 2 == 0),
        Parity::Odd => Some(moment % 2 == 1),
        Parity::None => None,
    };
    let cos_part = move |z: f64| amp.value(z) * (x * z).cos() * phase(z) * 2.0;
    let sin_part = move |z: f64| amp.value(z) * (x * z).sin() * phase(z) * (I * 2.0);
    let full = move |z: f64| amp.value(z) * (I * x * z).exp() * phase(z);
    let (f, fold): (&dyn Fn(f64) -> Complex, f64) = match folded_even {
        Some(true) => (&cos_part, 2.0),
        Some(false) => (&sin_part, 2.0),
        None => (&full, 1.0),
    };
    let integrand = match folded_even {
        None => Integrand::whole_line(f),
        Some(_) => Integrand::half_line(f),
    };

    let growth = x.im.abs();
    let mut decay = amp.decay().scaled(fold);
    if tau.is_damped() {
        decay = decay.and(DecayBound::gaussian(fold * amp.sup_bound(), -t.im));
    }
    let decay = decay.with_power(moment as f64).with_linear_growth(growth);
    let integrand = integrand.oscillation(x.re, t.re);
    if decay.is_declared() {
        integrate_decaying(&integrand.decay(decay), opts)
    } else {
        if growth > 0.0 || moment > 0 {
            return Err(Error::domain(
                "this evaluation needs a decaying amplitude or damped time",
            ));
        }
        integrate_oscillatory_regularized(
            &integrand.bounded(fold * amp.sup_bound(), 0.0),
            &RegularizationSchedule::default(),
            opts,
        )
    }
}
