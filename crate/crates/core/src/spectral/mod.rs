//! Spectral description of the Jacobi semigroup.
//!
//! `−L` has eigenvalues `λ_k = k(k + α + β − 1)` with the orthonormal Jacobi
//! polynomials `J_k` as eigenfunctions, so the heat kernel with respect to `μ`
//! is `p_t(x, y) = Σ_k e^{−λ_k t} J_k(x) J_k(y)` and its trace is
//! `Σ_k e^{−λ_k t}`. Products of Jacobi models tensorize.

mod dispersion;
mod trace;

pub use dispersion::{angle_rule, AngleRule};
pub use trace::{spectral_constant, IdentityCheck};

use crate::distributions::{JacobiParams, Model};
use crate::error::{Error, Result};

/// Coefficients are cached up to this degree and computed on the fly above it.
const COEFF_CACHE: usize = 1 << 16;

/// `λ_k = k(k + α + β − 1)`.
pub fn eigenvalue(params: &JacobiParams, k: usize) -> f64 {
    let k = k as f64;
    k * (k + params.dim() - 1.0)
}

/// When to stop summing spectral series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Always sum at least this many terms.
    pub k_min: usize,
    /// Stop once the bound on the current term drops below this.
    pub term_tol: f64,
    /// Fail rather than sum past this index.
    pub k_max: usize,
    /// Smallest time the heat kernel will be evaluated at.
    pub t_min: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { k_min: 16, term_tol: 1e-14, k_max: 1_000_000, t_min: 1e-8 }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.k_min > self.k_max || !(self.term_tol > 0.0) || !(self.t_min > 0.0) {
            return Err(Error::InvalidParams(format!("inconsistent truncation policy {self:?}")));
        }
        Ok(())
    }
}

/// Orthonormal Jacobi polynomials for one factor, evaluated by the three-term
/// recurrence `x J_k = b_{k+1} J_{k+1} + a_k J_k + b_k J_{k−1}`.
#[derive(Debug, Clone)]
pub struct JacobiBasis {
    params: JacobiParams,
    // weight exponents (α − 1, β − 1) at x = 1 and x = −1
    wa: f64,
    wb: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
    envelope: Vec<f64>,
}

impl JacobiBasis {
    pub fn new(params: JacobiParams) -> Self {
        let wa = params.alpha() - 1.0;
        let wb = params.beta() - 1.0;
        let mut basis = Self { params, wa, wb, diag: Vec::new(), off: Vec::new(), envelope: Vec::new() };
        basis.diag = (0..COEFF_CACHE).map(|k| basis.diag_coeff(k)).collect();
        basis.off = (0..=COEFF_CACHE).map(|k| basis.off_coeff(k)).collect();
        // sup_{[-1,1]} |J_k| is attained at an endpoint when max(α, β) ≥ 1/2
        let (mut p1, mut q1) = (0.0, 1.0);
        let (mut p2, mut q2) = (0.0, 1.0);
        basis.envelope.push(1.0);
        for k in 0..COEFF_CACHE - 1 {
            let (a, b, bn) = (basis.diag[k], basis.off[k], basis.off[k + 1]);
            let r1 = ((1.0 - a) * q1 - b * p1) / bn;
            let r2 = ((-1.0 - a) * q2 - b * p2) / bn;
            p1 = q1;
            q1 = r1;
            p2 = q2;
            q2 = r2;
            basis.envelope.push(q1.abs().max(q2.abs()));
        }
        basis
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    fn diag_coeff(&self, k: usize) -> f64 {
        let (a, b) = (self.wa, self.wb);
        if k == 0 {
            return (b - a) / (a + b + 2.0);
        }
        let c = 2.0 * k as f64 + a + b;
        (b * b - a * a) / (c * (c + 2.0))
    }

    fn off_coeff(&self, k: usize) -> f64 {
        let (a, b) = (self.wa, self.wb);
        match k {
            0 => 0.0,
            1 => (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))).sqrt(),
            _ => {
                let kf = k as f64;
                let c = 2.0 * kf + a + b;
                (4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (c * c * (c + 1.0) * (c - 1.0))).sqrt()
            }
        }
    }

    #[inline]
    fn diag(&self, k: usize) -> f64 {
        self.diag.get(k).copied().unwrap_or_else(|| self.diag_coeff(k))
    }

    #[inline]
    fn off(&self, k: usize) -> f64 {
        self.off.get(k).copied().unwrap_or_else(|| self.off_coeff(k))
    }

    /// `sup |J_k|` over `[-1, 1]`; beyond the cache, the polynomial growth
    /// `k^{max(α,β) − 1/2}` is extrapolated from the last cached value.
    fn envelope(&self, k: usize) -> f64 {
        match self.envelope.get(k) {
            Some(&e) => e,
            None => {
                let last = self.envelope.len() - 1;
                let expo = self.params.alpha().max(self.params.beta()) - 0.5;
                self.envelope[last] * (k as f64 / last as f64).powf(expo) * 1.01
            }
        }
    }

    /// `J_k(x)`.
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        let (mut prev, mut cur) = (0.0, 1.0);
        for j in 0..k {
            let next = ((x - self.diag(j)) * cur - self.off(j) * prev) / self.off(j + 1);
            prev = cur;
            cur = next;
        }
        cur
    }

    /// `[J_0(x), …, J_k(x)]`.
    pub fn eval_all(&self, k: usize, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(k + 1);
        self.for_each(k, x, |_, v| out.push(v));
        out
    }

    #[inline]
    fn for_each<F: FnMut(usize, f64)>(&self, k: usize, x: f64, mut f: F) {
        let (mut prev, mut cur) = (0.0, 1.0);
        f(0, cur);
        for j in 0..k {
            let next = ((x - self.diag(j)) * cur - self.off(j) * prev) / self.off(j + 1);
            prev = cur;
            cur = next;
            f(j + 1, cur);
        }
    }

    /// Last index needed by the heat-kernel series at time `t`.
    pub fn kernel_terms(&self, t: f64, policy: &TruncationPolicy) -> Result<usize> {
        let mut k = policy.k_min;
        loop {
            if k > policy.k_max {
                return Err(Error::Truncation { k_max: policy.k_max });
            }
            let e = self.envelope(k);
            if (-eigenvalue(&self.params, k) * t).exp() * e * e < policy.term_tol {
                return Ok(k);
            }
            k += 1;
        }
    }

    /// Last index needed by the trace series at time `s`.
    pub fn trace_terms(&self, s: f64, policy: &TruncationPolicy) -> Result<usize> {
        // e^{−λ_k s} < tol  ⇔  λ_k > −ln(tol)/s
        let target = -policy.term_tol.ln() / s;
        let d1 = self.params.dim() - 1.0;
        let k = (0.5 * (-d1 + (d1 * d1 + 4.0 * target).sqrt())).ceil().max(0.0) as usize;
        let mut k = k.max(policy.k_min);
        while eigenvalue(&self.params, k) <= target {
            k += 1;
        }
        if k > policy.k_max {
            return Err(Error::Truncation { k_max: policy.k_max });
        }
        Ok(k)
    }

    /// `p_t(x, y)` for this factor.
    pub fn heat_kernel(&self, t: f64, x: f64, y: f64, policy: &TruncationPolicy) -> Result<f64> {
        if !(t >= policy.t_min) {
            return Err(Error::BelowMinTime { t, t_min: policy.t_min });
        }
        let (x, y) = (x.clamp(-1.0, 1.0), y.clamp(-1.0, 1.0));
        let kmax = self.kernel_terms(t, policy)?;
        let (mut px, mut cx) = (0.0, 1.0);
        let (mut py, mut cy) = (0.0, 1.0);
        let mut sum = 1.0;
        for j in 0..kmax {
            let (a, b, bn) = (self.diag(j), self.off(j), self.off(j + 1));
            let nx = ((x - a) * cx - b * px) / bn;
            let ny = ((y - a) * cy - b * py) / bn;
            px = cx;
            cx = nx;
            py = cy;
            cy = ny;
            sum += (-eigenvalue(&self.params, j + 1) * t).exp() * (cx * cy);
        }
        Ok(sum)
    }

    /// `Σ_k e^{−λ_k s}`.
    pub fn trace(&self, s: f64, policy: &TruncationPolicy) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("trace needs s > 0, got {s}")));
        }
        let kmax = self.trace_terms(s, policy)?;
        Ok((0..=kmax).map(|k| (-eigenvalue(&self.params, k) * s).exp()).sum())
    }
}

/// Truncated spectral representation of the heat kernel of a Jacobi model or a
/// product of Jacobi models.
#[derive(Debug, Clone)]
pub struct HeatKernelModel {
    model: Model,
    policy: TruncationPolicy,
    factors: Vec<JacobiBasis>,
}

impl HeatKernelModel {
    pub fn new(model: impl Into<Model>) -> Self {
        Self::with_policy(model, TruncationPolicy::default()).expect("default policy is valid")
    }

    pub fn with_policy(model: impl Into<Model>, policy: TruncationPolicy) -> Result<Self> {
        policy.validate()?;
        let model = model.into();
        let factors = model.factors().iter().map(|&p| JacobiBasis::new(p)).collect();
        Ok(Self { model, policy, factors })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn factors(&self) -> &[JacobiBasis] {
        &self.factors
    }

    /// Number of coordinates.
    pub fn coords(&self) -> usize {
        self.factors.len()
    }

    /// The single factor of a one-dimensional model.
    pub fn basis(&self) -> Result<&JacobiBasis> {
        match self.factors.as_slice() {
            [one] => Ok(one),
            many => Err(Error::DimensionMismatch { expected: 1, got: many.len() }),
        }
    }

    /// `J_k(x)` of a one-dimensional model.
    pub fn basis_eval(&self, k: usize, x: f64) -> Result<f64> {
        Ok(self.basis()?.eval(k, x.clamp(-1.0, 1.0)))
    }

    /// `p_t(x, y)` with respect to `μ`; a product of factor kernels.
    pub fn heat_kernel(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        for v in [x, y] {
            if v.len() != self.coords() {
                return Err(Error::DimensionMismatch { expected: self.coords(), got: v.len() });
            }
        }
        self.factors
            .iter()
            .zip(x.iter().zip(y))
            .try_fold(1.0, |acc, (f, (&xi, &yi))| Ok(acc * f.heat_kernel(t, xi, yi, &self.policy)?))
    }

    /// Convenience for one-dimensional models.
    pub fn heat_kernel_1d(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        self.basis()?.heat_kernel(t, x, y, &self.policy)
    }

    /// `∫ p_s(x, x) dμ(x)`; the product of factor traces.
    pub fn trace(&self, s: f64) -> Result<f64> {
        self.factors.iter().try_fold(1.0, |acc, f| Ok(acc * f.trace(s, &self.policy)?))
    }

    /// `s^{k/2}·trace(s) − (√π/2)^k` for a model with `k` coordinates.
    pub fn trace_asymptotic_deviation(&self, s: f64) -> Result<f64> {
        let k = self.coords() as i32;
        let limit = (std::f64::consts::PI.sqrt() / 2.0).powi(k);
        Ok(s.powf(0.5 * k as f64) * self.trace(s)? - limit)
    }

    /// Smallest nonzero eigenvalue across factors.
    pub fn spectral_gap(&self) -> f64 {
        self.factors.iter().map(|f| eigenvalue(f.params(), 1)).fold(f64::INFINITY, f64::min)
    }
}
