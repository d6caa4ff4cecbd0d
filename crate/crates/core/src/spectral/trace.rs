//! Integrals of the trace and the limiting constant `S(d) = Σ_{k≥1} 1/(k(k+d−1))`.

use super::HeatKernelModel;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, GaussRule};

const GL_POINTS: usize = 16;
const MAX_PANELS: usize = 1 << 12;

/// `S(d) = Σ_{k≥1} 1/(k(k+d−1))`, summed directly up to a cutoff `K` with the
/// tail from Euler–Maclaurin. `K` grows until the first omitted
/// Euler–Maclaurin term, which bounds the remainder, is below `tol`.
pub fn spectral_constant(d: f64, tol: f64) -> Result<f64> {
    if !(d >= 1.0 && d.is_finite()) {
        return Err(Error::InvalidParams(format!("spectral constant needs d >= 1, got {d}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    let c = d - 1.0;
    let term = |k: f64| 1.0 / (k * (k + c));
    // m-th derivative of f(k) = 1/(k(k+c)) at K
    let deriv = |m: i32, k: f64| -> f64 {
        let fact: f64 = (1..=m).map(f64::from).product();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        if c == 0.0 {
            sign * fact * f64::from(m + 1) * k.powi(-m - 2)
        } else {
            sign * fact * (k.powi(-m - 1) - (k + c).powi(-m - 1)) / c
        }
    };
    // ∫_K^∞ f
    let integral = |k: f64| if c == 0.0 { 1.0 / k } else { (c / k).ln_1p() / c };
    // B_2/2!, B_4/4!, B_6/6!, B_8/8!
    const EM: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];

    let mut cutoff = 64usize;
    loop {
        let k = cutoff as f64;
        let remainder_bound = (EM[3] * deriv(7, k)).abs();
        if remainder_bound < tol || cutoff >= 1 << 24 {
            // Σ_{j>K} f(j) = ∫_K^∞ f − f(K)/2 − Σ_m B_{2m}/(2m)! f^{(2m−1)}(K)
            let tail = integral(k) - 0.5 * term(k) - EM[0] * deriv(1, k) - EM[1] * deriv(3, k) - EM[2] * deriv(5, k);
            // add small terms first
            let head: f64 = (1..=cutoff).rev().map(|j| term(j as f64)).sum();
            return Ok(head + tail);
        }
        cutoff *= 2;
    }
}

/// `∫₀^∞ (trace(s) − 1) ds` against `S(d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn abs_diff(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Composite Gauss–Legendre on `[lo, hi]`, doubling the panel count until two
/// successive estimates agree to `tol`.
fn integrate_adaptive<F>(rule: &GaussRule, lo: f64, hi: f64, start_panels: usize, tol: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let eval = |panels: usize| -> Result<f64> {
        let mut err = None;
        let v = rule.integrate_composite(lo, hi, panels, |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    };
    let mut panels = start_panels.max(1);
    let mut prev = eval(panels)?;
    while panels < MAX_PANELS {
        panels *= 2;
        let cur = eval(panels)?;
        if (cur - prev).abs() <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!("no convergence on [{lo}, {hi}] with {MAX_PANELS} panels")))
}

impl HeatKernelModel {
    /// `∫_from^∞ (trace(s) − 1) ds`.
    ///
    /// Below `s = 1` the integrand blows up like `s^{−k/2}`: one-dimensional
    /// models substitute `s = u²`, products substitute `s = e^v` (and need
    /// `from > 0`). Above `s = 1` the integrand is cut where the spectral-gap
    /// bound `(trace(1) − 1) e^{−λ₁(s−1)}` leaves less than `tol/1000` behind.
    pub fn trace_excess_integral(&self, from: f64, tol: f64) -> Result<f64> {
        if !(from >= 0.0) {
            return Err(Error::Domain(format!("lower limit must be nonnegative, got {from}")));
        }
        if from == 0.0 && self.coords() > 1 {
            return Err(Error::Domain("trace excess is not integrable at 0 for product models".into()));
        }
        let rule = gauss_legendre(GL_POINTS)?;
        let excess = |s: f64| -> Result<f64> { Ok(self.trace(s)? - 1.0) };

        let mut total = 0.0;
        let split = from.max(1.0);
        if from < 1.0 {
            total += if self.coords() == 1 {
                integrate_adaptive(&rule, from.sqrt(), 1.0, 4, tol / 4.0, |u| Ok(2.0 * u * excess(u * u)?))?
            } else {
                integrate_adaptive(&rule, from.ln(), 0.0, 4, tol / 4.0, |v| {
                    let s = v.exp();
                    Ok(s * excess(s)?)
                })?
            };
        }

        let gap = self.spectral_gap();
        let at_split = excess(split)?;
        let target = tol * 1e-3 * gap;
        let mut upper = split;
        if at_split > target {
            upper += (at_split / target).ln() / gap;
        }
        if upper > split {
            let panels = ((upper - split) * gap).ceil().max(1.0) as usize;
            total += integrate_adaptive(&rule, split, upper, panels, tol / 4.0, excess)?;
        }
        Ok(total)
    }

    /// Numerically integrated `∫₀^∞ (trace(s) − 1) ds` next to `S(d)`.
    pub fn trace_integral_identity_check(&self, quad_tol: f64) -> Result<IdentityCheck> {
        let basis = self.basis()?;
        let lhs = self.trace_excess_integral(0.0, quad_tol)?;
        let rhs = spectral_constant(basis.params().dim(), quad_tol.min(1e-14))?;
        Ok(IdentityCheck { lhs, rhs })
    }
}
