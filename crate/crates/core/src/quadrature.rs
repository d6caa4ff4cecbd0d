//! Gauss–Jacobi and Gauss–Legendre rules.
//!
//! Nodes are found by Newton iteration on the classical Jacobi polynomial
//! `P_n^{(a,b)}` written in the angle variable `x = cos θ`, starting from
//! Szegő's asymptotic guesses. Working in `θ` keeps `1 − x²` accurate for
//! nodes clustered at the endpoints.

use crate::error::{Error, Result};
use crate::special::ln_beta;
use std::f64::consts::PI;

const NEWTON_MAX_ITER: usize = 100;

/// A quadrature rule `Σ w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Integrates over `[lo, hi]`, treating the rule as a rule on `[-1, 1]`
    /// with unit weight function.
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Composite rule: `panels` equal cells on `[lo, hi]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, panels: usize, mut f: F) -> f64 {
        let h = (hi - lo) / panels as f64;
        (0..panels)
            .map(|p| {
                let a = lo + p as f64 * h;
                let b = if p + 1 == panels { hi } else { a + h };
                self.integrate_on(a, b, &mut f)
            })
            .sum()
    }
}

/// Evaluates `P_n^{(a,b)}(1 − u)` and `(1 − x²)·P_n'(x)` at `x = 1 − u` by the
/// classical three-term recurrence. Passing `u` rather than `x` keeps nodes
/// near `x = 1` resolved to relative precision in `θ`.
fn jacobi_p_and_scaled_derivative(n: usize, a: f64, b: f64, u: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let ab = a + b;
    let mut p_prev = 1.0;
    let mut p = a + 1.0 - 0.5 * (ab + 2.0) * u;
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + ab;
        let a1 = 2.0 * k * (k + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c;
        let next = (((a2 + a3) - a3 * u) * p - a4 * p_prev) / a1;
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    let c = 2.0 * nf + ab;
    // (2n+a+b)(1−x²)P_n' = n[(a−b) − (2n+a+b)x]P_n + 2(n+a)(n+b)P_{n−1}
    let dp = (nf * ((a - b - c) + c * u) * p + 2.0 * (nf + a) * (nf + b) * p_prev) / c;
    (p, dp)
}

/// `(P_n(cos θ), (1 − x²)P_n'(x))`, using the reflection
/// `P_n^{(a,b)}(x) = (−1)^n P_n^{(b,a)}(−x)` on the far half.
fn eval_in_angle(n: usize, a: f64, b: f64, theta: f64) -> (f64, f64) {
    let (sh, ch) = (0.5 * theta).sin_cos();
    if theta <= std::f64::consts::FRAC_PI_2 {
        jacobi_p_and_scaled_derivative(n, a, b, 2.0 * sh * sh)
    } else {
        let (p, q) = jacobi_p_and_scaled_derivative(n, b, a, 2.0 * ch * ch);
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        (sign * p, -sign * q)
    }
}

/// Zeros of `P_n^{(a,b)}(cos θ)` in increasing `θ` by Newton from Szegő's
/// asymptotic guesses; `None` if any iteration stalls or the zeros come out
/// unordered.
fn newton_roots(n: usize, a: f64, b: f64) -> Option<Vec<f64>> {
    let denom = n as f64 + 0.5 * (a + b + 1.0);
    let mut roots = Vec::with_capacity(n);
    for j in 1..=n {
        let mut theta = (j as f64 + 0.5 * a - 0.25) * PI / denom;
        let mut polish = 0;
        for _ in 0..NEWTON_MAX_ITER {
            let s = theta.sin();
            let (p, q) = eval_in_angle(n, a, b, theta);
            // d/dθ P(cos θ) = −sin θ P'(x) = −q / sin θ
            let step = p * s / (-q);
            theta -= step;
            if !(theta > 0.0 && theta < PI) {
                return None;
            }
            // roundoff in P bounds the attainable step; polish twice past 1e-11
            if step.abs() <= 1e-11 * theta.min(PI - theta) {
                polish += 1;
                if polish == 2 {
                    break;
                }
            }
        }
        if polish < 2 || roots.last().is_some_and(|&prev| theta <= prev) {
            return None;
        }
        roots.push(theta);
    }
    Some(roots)
}

/// Zeros located by sign changes on a fine `θ` grid, refined by bisection.
fn scan_roots(n: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    let m = 32 * (n + 2) + (8.0 * (a + b)).ceil() as usize;
    let p = |t: f64| eval_in_angle(n, a, b, t).0;
    let mut roots = Vec::with_capacity(n);
    let mut lo = 0.0;
    let mut plo = p(lo);
    for i in 1..=m {
        let hi = PI * i as f64 / m as f64;
        let phi = p(hi);
        if plo == 0.0 {
            roots.push(lo);
        } else if plo * phi < 0.0 {
            let (mut l, mut h, mut pl) = (lo, hi, plo);
            while h - l > 4.0 * f64::EPSILON * h {
                let mid = 0.5 * (l + h);
                let pm = p(mid);
                if pm * pl > 0.0 {
                    l = mid;
                    pl = pm;
                } else {
                    h = mid;
                }
            }
            roots.push(0.5 * (l + h));
        }
        lo = hi;
        plo = phi;
    }
    if roots.len() != n {
        return Err(Error::Quadrature(format!("found {} of {n} zeros for Gauss–Jacobi({n}, {a}, {b})", roots.len())));
    }
    Ok(roots)
}

/// Gauss–Jacobi rule of `n` points for the weight `(1 − x)^a (1 + x)^b` on `[-1, 1]`.
///
/// Weights sum to `2^{a+b+1} B(a+1, b+1)`. Nodes are returned in increasing order.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::Quadrature("rule needs at least one node".into()));
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::InvalidParams(format!("Gauss–Jacobi exponents must exceed -1, got ({a}, {b})")));
    }
    let thetas = match newton_roots(n, a, b) {
        Some(t) => t,
        None => scan_roots(n, a, b)?,
    };
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for theta in thetas {
        let (s, x) = theta.sin_cos();
        let (_, q) = eval_in_angle(n, a, b, theta);
        // w ∝ 1 / ((1−x²) P'²) = sin²θ / q²
        nodes.push(x);
        weights.push(s * s / (q * q));
    }
    nodes.reverse();
    weights.reverse();
    // the closed-form constant involves Γ at large arguments and loses
    // digits; the total mass fixes it exactly
    let scale = jacobi_weight_mass(a, b) / weights.iter().sum::<f64>();
    for w in &mut weights {
        *w *= scale;
    }
    Ok(GaussRule { nodes, weights })
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Result<GaussRule> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Total mass `∫(1 − x)^a (1 + x)^b dx` over `[-1, 1]`.
pub fn jacobi_weight_mass(a: f64, b: f64) -> f64 {
    ((a + b + 1.0) * std::f64::consts::LN_2 + ln_beta(a + 1.0, b + 1.0)).exp()
}
