//! Jacobi measures `C_{α,β}(1 − x)^{α−1}(1 + x)^{β−1} dx` on `[-1, 1]`, their
//! products, empirical samples and the intrinsic distance.

use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::special::{beta_reg_pair, ln_beta};
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

const NEWTON_MAX_ITER: usize = 200;

/// Parameters `(α, β)` of a Jacobi measure, both at least `1/2`.
///
/// `α` is the exponent attached to the endpoint `x = 1`, `β` to `x = −1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
    ln_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
}

impl TryFrom<ParamsRepr> for JacobiParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        match (r.alpha, r.beta, r.d) {
            (Some(a), Some(b), None) => JacobiParams::new(a, b),
            (None, None, Some(d)) => JacobiParams::symmetric(d),
            _ => Err(Error::InvalidParams("give either {alpha, beta} or {d}".into())),
        }
    }
}

impl From<JacobiParams> for ParamsRepr {
    fn from(p: JacobiParams) -> Self {
        ParamsRepr { alpha: Some(p.alpha), beta: Some(p.beta), d: None }
    }
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha >= 0.5 && beta >= 0.5) {
            return Err(Error::InvalidParams(format!("need alpha, beta >= 1/2, got ({alpha}, {beta})")));
        }
        let ln_norm = -(alpha + beta - 1.0) * LN_2 - ln_beta(alpha, beta);
        Ok(Self { alpha, beta, ln_norm })
    }

    /// Symmetric model of dimension `d`: `α = β = d/2`.
    pub fn symmetric(d: f64) -> Result<Self> {
        Self::new(0.5 * d, 0.5 * d)
    }

    /// The arcsine law, `d = 1`.
    pub fn arcsine() -> Self {
        Self::new(0.5, 0.5).expect("valid")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `d = α + β`.
    pub fn dim(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha == self.beta
    }

    pub fn is_arcsine(&self) -> bool {
        self.alpha == 0.5 && self.beta == 0.5
    }

    /// Normalization constant `C_{α,β} = 1 / (2^{α+β−1} B(α, β))`.
    pub fn norm_const(&self) -> f64 {
        self.ln_norm.exp()
    }

    /// Lebesgue density. At `x = ±1` returns the finite limit, or a domain
    /// error when the density blows up there.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("pdf evaluated outside [-1, 1] at {x}")));
        }
        let endpoint = |exponent: f64, other: f64| -> Result<f64> {
            if exponent > 1.0 {
                Ok(0.0)
            } else if exponent == 1.0 {
                Ok((self.ln_norm + (other - 1.0) * LN_2).exp())
            } else {
                Err(Error::Domain(format!("density is unbounded at {x}")))
            }
        };
        if x == 1.0 {
            return endpoint(self.alpha, self.beta);
        }
        if x == -1.0 {
            return endpoint(self.beta, self.alpha);
        }
        Ok((self.ln_norm + (self.alpha - 1.0) * (-x).ln_1p() + (self.beta - 1.0) * x.ln_1p()).exp())
    }

    /// `(F(x), 1 − F(x))`, each to full relative precision.
    fn cdf_pair(&self, x: f64) -> (f64, f64) {
        if x <= -1.0 {
            return (0.0, 1.0);
        }
        if x >= 1.0 {
            return (1.0, 0.0);
        }
        // (1 + x)/2 ~ Beta(β, α)
        beta_reg_pair(self.beta, self.alpha, 0.5 * (1.0 + x), 0.5 * (1.0 - x))
    }

    /// Distribution function; clamps outside `[-1, 1]`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_pair(x).0
    }

    /// Survival function `1 − F(x)`.
    pub fn sf(&self, x: f64) -> f64 {
        self.cdf_pair(x).1
    }

    /// Inverse distribution function by bracketed Newton with bisection fallback.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return -1.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        if self.is_symmetric() && u == 0.5 {
            return 0.0;
        }
        let guess = -(PI * u).cos();
        invert_monotone(u, -1.0, 1.0, guess, |x| {
            let f = self.cdf(x);
            let df = self.pdf(x).unwrap_or(f64::INFINITY);
            (f, df)
        })
    }

    /// Density of `θ = arccos X` on `[0, π]`:
    /// `C 2^{α+β−1} sin^{2α−1}(θ/2) cos^{2β−1}(θ/2)`.
    pub fn angle_pdf(&self, theta: f64) -> f64 {
        if !(0.0..=PI).contains(&theta) {
            return 0.0;
        }
        let (s, c) = (0.5 * theta).sin_cos();
        let ln = self.ln_norm + (self.alpha + self.beta - 1.0) * LN_2;
        ln.exp() * s.powf(2.0 * self.alpha - 1.0) * c.powf(2.0 * self.beta - 1.0)
    }

    /// Distribution function of `θ = arccos X`: `G(θ) = I_{sin²(θ/2)}(α, β)`.
    pub fn angle_cdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        if theta >= PI {
            return 1.0;
        }
        let (s, c) = (0.5 * theta).sin_cos();
        beta_reg_pair(self.alpha, self.beta, s * s, c * c).0
    }

    /// Inverse of [`angle_cdf`](Self::angle_cdf).
    pub fn angle_quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return PI;
        }
        invert_monotone(u, 0.0, PI, PI * u, |t| (self.angle_cdf(t), self.angle_pdf(t)))
    }
}

/// Solves `f(x) = target` for nondecreasing `f` on `[lo, hi]`.
fn invert_monotone<F: Fn(f64) -> (f64, f64)>(target: f64, lo: f64, hi: f64, guess: f64, f: F) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..NEWTON_MAX_ITER {
        let (fx, dfx) = f(x);
        let r = fx - target;
        if r == 0.0 {
            return x;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - r / dfx;
        if !(dfx.is_finite() && dfx > 0.0 && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let scale = x.abs().max(1e-300);
        if (next - x).abs() <= 2.0 * f64::EPSILON * scale || hi - lo <= 2.0 * f64::EPSILON * scale {
            return next;
        }
        x = next;
    }
    x
}

/// Product of `k ≥ 2` Jacobi measures on `[-1, 1]^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProductRepr")]
pub struct ProductJacobiParams {
    factors: Vec<JacobiParams>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductRepr {
    factors: Vec<JacobiParams>,
}

impl TryFrom<ProductRepr> for ProductJacobiParams {
    type Error = Error;

    fn try_from(r: ProductRepr) -> Result<Self> {
        Self::new(r.factors)
    }
}

impl ProductJacobiParams {
    pub fn new(factors: Vec<JacobiParams>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::InvalidParams(format!("a product needs at least 2 factors, got {}", factors.len())));
        }
        Ok(Self { factors })
    }

    /// Product of symmetric factors with the given dimensions.
    pub fn symmetric(dims: &[f64]) -> Result<Self> {
        Self::new(dims.iter().map(|&d| JacobiParams::symmetric(d)).collect::<Result<_>>()?)
    }

    pub fn factors(&self) -> &[JacobiParams] {
        &self.factors
    }
}

/// Either a single Jacobi measure or a product of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Model {
    Product(ProductJacobiParams),
    Jacobi(JacobiParams),
}

impl Model {
    pub fn factors(&self) -> &[JacobiParams] {
        match self {
            Model::Jacobi(p) => std::slice::from_ref(p),
            Model::Product(p) => p.factors(),
        }
    }

    /// Number of coordinates.
    pub fn coords(&self) -> usize {
        self.factors().len()
    }

    pub fn label(&self) -> &'static str {
        match self {
            Model::Jacobi(_) => "jacobi",
            Model::Product(_) => "product",
        }
    }
}

impl From<JacobiParams> for Model {
    fn from(p: JacobiParams) -> Self {
        Model::Jacobi(p)
    }
}

impl From<ProductJacobiParams> for Model {
    fn from(p: ProductJacobiParams) -> Self {
        Model::Product(p)
    }
}

/// `n` points of `[-1, 1]^dim` with cached angles `arccos(x)`.
///
/// For one-dimensional samples `angles` is sorted ascending (a stable sort of
/// the draw order); for products it is row-major in draw order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    dim: usize,
    points: Vec<f64>,
    angles: Vec<f64>,
}

impl EmpiricalSample {
    pub fn from_points(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: points.len() });
        }
        if let Some(&bad) = points.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
            return Err(Error::Domain(format!("sample point {bad} outside [-1, 1]")));
        }
        let mut angles: Vec<f64> = points.iter().map(|&x| x.acos()).collect();
        if dim == 1 {
            angles.sort_by(f64::total_cmp);
        }
        Ok(Self { dim, points, angles })
    }

    pub fn from_points_1d(points: Vec<f64>) -> Result<Self> {
        Self::from_points(1, points)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major points in draw order.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Angles of point `i` (draw order), computed on the fly for 1-D samples.
    pub fn point_angles(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.point(i).iter().map(|&x| x.acos())
    }
}

/// Algorithm used for drawing Jacobi variates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaSampler {
    /// `X = (G_β − G_α)/(G_β + G_α)` with independent gamma variates.
    #[default]
    GammaRatio,
    /// `X = −cos(πU)` for arcsine factors; gamma ratio for the rest.
    ArcsineClosedForm,
}

struct FactorSampler {
    closed_form: bool,
    gamma_alpha: Gamma<f64>,
    gamma_beta: Gamma<f64>,
}

impl FactorSampler {
    fn new(p: &JacobiParams, method: BetaSampler) -> Self {
        Self {
            closed_form: method == BetaSampler::ArcsineClosedForm && p.is_arcsine(),
            gamma_alpha: Gamma::new(p.alpha, 1.0).expect("alpha > 0"),
            gamma_beta: Gamma::new(p.beta, 1.0).expect("beta > 0"),
        }
    }

    fn draw(&self, rng: &mut RngState) -> f64 {
        if self.closed_form {
            return -(PI * rng.uniform()).cos();
        }
        loop {
            let gb = self.gamma_beta.sample(rng);
            let ga = self.gamma_alpha.sample(rng);
            let s = ga + gb;
            if s > 0.0 {
                return ((gb - ga) / s).clamp(-1.0, 1.0);
            }
        }
    }
}

/// `n` i.i.d. draws from `model` (factors drawn independently, coordinate by
/// coordinate within each point).
pub fn sample(model: &Model, rng: &mut RngState, n: usize) -> EmpiricalSample {
    sample_with(model, rng, n, BetaSampler::GammaRatio)
}

pub fn sample_with(model: &Model, rng: &mut RngState, n: usize, method: BetaSampler) -> EmpiricalSample {
    let samplers: Vec<FactorSampler> = model.factors().iter().map(|p| FactorSampler::new(p, method)).collect();
    let mut points = Vec::with_capacity(n * samplers.len());
    for _ in 0..n {
        for s in &samplers {
            points.push(s.draw(rng));
        }
    }
    EmpiricalSample::from_points(samplers.len(), points).expect("draws lie in [-1, 1]")
}

/// `ρ(x, y) = |arccos x − arccos y|`, arguments clamped to `[-1, 1]`.
#[inline]
pub fn intrinsic_distance(x: f64, y: f64) -> f64 {
    (x.clamp(-1.0, 1.0).acos() - y.clamp(-1.0, 1.0).acos()).abs()
}

/// Euclidean combination of the per-factor intrinsic distances.
pub fn product_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    Ok(p.iter().zip(q).map(|(&a, &b)| intrinsic_distance(a, b).powi(2)).sum::<f64>().sqrt())
}
