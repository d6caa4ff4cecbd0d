//! Dispersion `∬ ρ²(x, y) p_t(x, y) dμ dμ` and the heat-kernel upper bound
//! on `E[W₂²(μ^n, μ)]` for products.

use super::{eigenvalue, HeatKernelModel, JacobiBasis};
use crate::distributions::JacobiParams;
use crate::error::{Error, Result};
use crate::quadrature::gauss_jacobi;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

const DISPERSION_TOL: f64 = 1e-10;
const MAX_ORDER: usize = 8192;

/// Gauss–Jacobi rule in the angle variable `θ = arccos x`:
/// `Σ w_i f(θ_i) ≈ ∫ f(arccos x) dμ(x)`.
///
/// In `θ` the law of a Jacobi variable has density proportional to
/// `sin^{2α−1}(θ/2) cos^{2β−1}(θ/2)`; the endpoint powers go into the
/// Gauss–Jacobi weight and the smooth remainder into the weights. Functions of
/// `θ` such as `ρ²` are then integrated at spectral accuracy.
#[derive(Debug, Clone)]
pub struct AngleRule {
    pub thetas: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn angle_rule(params: &JacobiParams, order: usize) -> Result<AngleRule> {
    let (ea, eb) = (2.0 * params.alpha() - 1.0, 2.0 * params.beta() - 1.0);
    // s ∈ [-1, 1], θ = π(1 + s)/2; θ = 0 ↔ s = −1 carries the sin power
    let gj = gauss_jacobi(order, eb, ea)?;
    let k = params.norm_const() * ((params.dim() - 1.0) * LN_2).exp() * FRAC_PI_2;
    let mut thetas = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for (&s, &w) in gj.nodes.iter().zip(&gj.weights) {
        let g1 = (FRAC_PI_4 * (1.0 + s)).sin() / (1.0 + s);
        let g2 = (FRAC_PI_4 * (1.0 - s)).sin() / (1.0 - s);
        thetas.push(FRAC_PI_2 * (1.0 + s));
        weights.push(w * k * g1.powf(ea) * g2.powf(eb));
    }
    Ok(AngleRule { thetas, weights })
}

fn dispersion_with_order(basis: &JacobiBasis, t: f64, kmax: usize, order: usize) -> Result<f64> {
    let rule = angle_rule(basis.params(), order)?;
    // c_k = ∫θ J_k, m_k = ∫θ² J_k, e_k = ∫J_k, all against μ
    let mut c = vec![0.0; kmax + 1];
    let mut m = vec![0.0; kmax + 1];
    let mut e = vec![0.0; kmax + 1];
    for (&theta, &w) in rule.thetas.iter().zip(&rule.weights) {
        basis.for_each(kmax, theta.cos(), |k, j| {
            c[k] += w * theta * j;
            m[k] += w * theta * theta * j;
            e[k] += w * j;
        });
    }
    // ∬(θ−φ)² p_t = Σ_k e^{−λ_k t} (2 m_k e_k − 2 c_k²)
    Ok((0..=kmax)
        .map(|k| (-eigenvalue(basis.params(), k) * t).exp() * 2.0 * (m[k] * e[k] - c[k] * c[k]))
        .sum())
}

impl HeatKernelModel {
    /// `∬ ρ²(x, y) p_t(x, y) dμ(x) dμ(y)`.
    ///
    /// For products `ρ² = Σ_j ρ_j²` and the kernel tensorizes, so the value is
    /// the sum of the factor dispersions. Each factor is computed by the
    /// tensorized angle rule with the order doubled until two orders agree.
    pub fn dispersion_integral(&self, t: f64) -> Result<f64> {
        if !(t >= self.policy.t_min) {
            return Err(Error::BelowMinTime { t, t_min: self.policy.t_min });
        }
        let mut total = 0.0;
        for basis in &self.factors {
            let kmax = basis.kernel_terms(t, &self.policy)?;
            let mut order = (2 * kmax + 2).next_power_of_two().max(64);
            let mut prev = dispersion_with_order(basis, t, kmax, order)?;
            loop {
                order *= 2;
                if order > MAX_ORDER {
                    return Err(Error::Quadrature(format!("dispersion at t = {t} needs more than {MAX_ORDER} nodes")));
                }
                let cur = dispersion_with_order(basis, t, kmax, order)?;
                if (cur - prev).abs() <= DISPERSION_TOL {
                    total += cur;
                    break;
                }
                prev = cur;
            }
        }
        Ok(total)
    }

    /// `2 ∬ ρ² p_t dμ dμ + (8/n) ∫_{2t}^∞ (trace(s) − 1) ds`, an upper bound on
    /// `E[W₂²(μ^n, μ)]` valid for every `t > 0`.
    pub fn matching_upper_bound(&self, t: f64, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        let dispersion = self.dispersion_integral(t)?;
        let excess = self.trace_excess_integral(2.0 * t, 1e-10)?;
        Ok(2.0 * dispersion + 8.0 / n as f64 * excess)
    }

    /// Minimizes [`matching_upper_bound`](Self::matching_upper_bound) over a
    /// log-spaced grid of `t` in `[t_lo, t_hi]`; returns `(t, bound)`.
    pub fn optimal_matching_upper_bound(&self, n: usize, t_lo: f64, t_hi: f64, points: usize) -> Result<(f64, f64)> {
        if !(t_lo > 0.0 && t_hi > t_lo && points >= 2) {
            return Err(Error::InvalidParams(format!("bad t grid [{t_lo}, {t_hi}] with {points} points")));
        }
        let step = (t_hi / t_lo).ln() / (points - 1) as f64;
        let mut best = (f64::NAN, f64::INFINITY);
        for i in 0..points {
            let t = t_lo * (step * i as f64).exp();
            let b = self.matching_upper_bound(t, n)?;
            if b < best.1 {
                best = (t, b);
            }
        }
        Ok(best)
    }
}
