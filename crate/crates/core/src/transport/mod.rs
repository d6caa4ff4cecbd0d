//! Exact `W₂²` under the intrinsic metric.
//!
//! One-dimensional problems are solved by monotone rearrangement of the
//! sorted angles. Multi-dimensional problems go through a dense linear
//! assignment.

mod assignment;

pub use assignment::{brute_force_assignment, solve_assignment, CostMatrix, MatchingResult, BRUTE_FORCE_LIMIT};

use crate::distributions::{EmpiricalSample, JacobiParams};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use std::f64::consts::FRAC_PI_2;

const MAX_CELL_ORDER: usize = 256;

/// Ground metric for cost matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Intrinsic1d,
    IntrinsicProduct,
}

impl Metric {
    /// The intrinsic metric matching a sample's dimension.
    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Metric::Intrinsic1d
        } else {
            Metric::IntrinsicProduct
        }
    }

    fn check(self, a: &EmpiricalSample, b: &EmpiricalSample) -> Result<()> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
        }
        match (self, a.dim()) {
            (Metric::Intrinsic1d, 1) => Ok(()),
            (Metric::IntrinsicProduct, d) if d >= 2 => Ok(()),
            (Metric::Intrinsic1d, d) => Err(Error::DimensionMismatch { expected: 1, got: d }),
            (Metric::IntrinsicProduct, d) => Err(Error::DimensionMismatch { expected: 2, got: d }),
        }
    }
}

/// Per-cell Gauss–Legendre settings for [`w2sq_empirical_vs_measure_1d`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(default = "QuadratureSpec::default_order")]
    pub order: usize,
    /// Double the order until two successive values agree to this tolerance.
    #[serde(default)]
    pub refine_tol: Option<f64>,
}

impl QuadratureSpec {
    fn default_order() -> usize {
        8
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidParams(format!("quadrature order must be >= 2, got {}", self.order)));
        }
        if let Some(tol) = self.refine_tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidParams(format!("refinement tolerance must be positive, got {tol}")));
            }
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { order: Self::default_order(), refine_tol: None }
    }
}

fn check_same_size(a: &EmpiricalSample, b: &EmpiricalSample) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(Error::InvalidParams("samples must be nonempty".into()));
    }
    Ok(())
}

/// `(1/n) Σ_i (θ_a,(i) − θ_b,(i))²` over sorted angles: `W₂²(μ_a^n, μ_b^n)` on the line.
pub fn w2sq_sorted_1d(a: &EmpiricalSample, b: &EmpiricalSample) -> Result<f64> {
    Metric::Intrinsic1d.check(a, b)?;
    check_same_size(a, b)?;
    let sum: f64 = a.angles().iter().zip(b.angles()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// Per-cell moments `∫ θ dγ` and `∫ θ² dγ` of the angle law `γ` over the
/// quantile cells `[G⁻¹((i−1)/n), G⁻¹(i/n)]`, reusable across samples of the
/// same size.
///
/// Integration runs in `θ`. The density behaves like `θ^{2α−1}` and
/// `(π − θ)^{2β−1}` at the ends, so the two end cells use Gauss–Jacobi
/// rules carrying those powers; interior cells use Gauss–Legendre.
#[derive(Debug, Clone)]
pub struct MeasureQuantileGrid {
    n: usize,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl MeasureQuantileGrid {
    pub fn new(params: &JacobiParams, n: usize, order: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("grid needs n >= 1".into()));
        }
        let (ea, eb) = (2.0 * params.alpha() - 1.0, 2.0 * params.beta() - 1.0);
        // angle density is k·sin^{ea}(θ/2)·cos^{eb}(θ/2)
        let k = params.angle_pdf(FRAC_PI_2) * 2f64.powf(0.5 * (ea + eb));
        let legendre = gauss_legendre(order)?;
        let left = gauss_jacobi(order, 0.0, ea)?;
        let right = gauss_jacobi(order, eb, 0.0)?;
        let both = gauss_jacobi(order, eb, ea)?;
        let edges: Vec<f64> = (0..=n).map(|i| params.angle_quantile(i as f64 / n as f64)).collect();
        let mut first = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        for i in 0..n {
            let (lo, hi) = (edges[i], edges[i + 1]);
            let (at_left, at_right) = (i == 0, i + 1 == n);
            let rule = match (at_left, at_right) {
                (true, true) => &both,
                (true, false) => &left,
                (false, true) => &right,
                (false, false) => &legendre,
            };
            let half = 0.5 * (hi - lo);
            let mut scale = half;
            if at_left {
                scale *= half.powf(ea);
            }
            if at_right {
                scale *= half.powf(eb);
            }
            let (mut m1, mut m2) = (0.0, 0.0);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let (from_lo, to_hi) = (half * (1.0 + x), half * (1.0 - x));
                let theta = lo + from_lo;
                let (sh, ch) = (0.5 * theta).sin_cos();
                // density with the endpoint powers already in the rule weight removed
                let mut g = k;
                g *= if at_left { (sh / theta).powf(ea) } else { sh.powf(ea) };
                g *= if at_right { ((0.5 * to_hi).sin() / to_hi).powf(eb) } else { ch.powf(eb) };
                m1 += w * g * theta;
                m2 += w * g * theta * theta;
            }
            first.push(scale * m1);
            second.push(scale * m2);
        }
        Ok(Self { n, first, second })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `Σ_i ∫_cell_i (θ_(i) − θ)² dγ(θ)` for sorted sample angles `θ_(i)`.
    pub fn w2sq(&self, sorted_angles: &[f64]) -> Result<f64> {
        if sorted_angles.len() != self.n {
            return Err(Error::SizeMismatch { left: sorted_angles.len(), right: self.n });
        }
        let h = 1.0 / self.n as f64;
        let total: f64 = sorted_angles
            .iter()
            .zip(self.first.iter().zip(&self.second))
            .map(|(&t, (&m1, &m2))| (t * t * h - 2.0 * t * m1 + m2).max(0.0))
            .sum();
        Ok(total)
    }
}

/// Quantile grids at orders `order, 2·order, …, 256` for one `(params, n)`,
/// built on first use and shared across samples.
#[derive(Debug)]
pub struct QuantileGridLadder {
    params: JacobiParams,
    n: usize,
    quad: QuadratureSpec,
    levels: Vec<OnceLock<MeasureQuantileGrid>>,
}

impl QuantileGridLadder {
    pub fn new(params: JacobiParams, n: usize, quad: QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        if n == 0 {
            return Err(Error::InvalidParams("grid needs n >= 1".into()));
        }
        let mut count = 1;
        if quad.refine_tol.is_some() {
            while quad.order << count <= MAX_CELL_ORDER {
                count += 1;
            }
        }
        Ok(Self { params, n, quad, levels: (0..count).map(|_| OnceLock::new()).collect() })
    }

    fn level(&self, i: usize) -> Result<&MeasureQuantileGrid> {
        if let Some(g) = self.levels[i].get() {
            return Ok(g);
        }
        let g = MeasureQuantileGrid::new(&self.params, self.n, self.quad.order << i)?;
        Ok(self.levels[i].get_or_init(|| g))
    }

    /// `W₂²(μ^n, μ)` for sorted sample angles.
    pub fn w2sq(&self, sorted_angles: &[f64]) -> Result<f64> {
        let mut value = self.level(0)?.w2sq(sorted_angles)?;
        let Some(tol) = self.quad.refine_tol else {
            return Ok(value);
        };
        for i in 1..self.levels.len() {
            let next = self.level(i)?.w2sq(sorted_angles)?;
            if (next - value).abs() <= tol {
                return Ok(next);
            }
            value = next;
        }
        Err(Error::Quadrature(format!("per-cell order exceeded {MAX_CELL_ORDER} before reaching {tol}")))
    }
}

/// `W₂²(μ^n, μ)` for a one-dimensional sample against the Jacobi measure,
/// by per-cell quadrature of the monotone coupling.
pub fn w2sq_empirical_vs_measure_1d(a: &EmpiricalSample, params: &JacobiParams, quad: &QuadratureSpec) -> Result<f64> {
    if a.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: a.dim() });
    }
    QuantileGridLadder::new(*params, a.len(), *quad)?.w2sq(a.angles())
}

/// Matrix of squared intrinsic distances between the points of `a` (rows) and
/// `b` (columns).
pub fn cost_matrix(a: &EmpiricalSample, b: &EmpiricalSample, metric: Metric) -> Result<CostMatrix> {
    metric.check(a, b)?;
    check_same_size(a, b)?;
    Ok(replicated_cost_matrix(b, a, 1).transposed())
}

/// Rows are the points of `rows`; columns are the points of `cols`, each
/// repeated `rep` times consecutively.
fn replicated_cost_matrix(rows: &EmpiricalSample, cols: &EmpiricalSample, rep: usize) -> CostMatrix {
    let dim = rows.dim();
    let row_angles: Vec<f64> = rows.points().iter().map(|&x| x.acos()).collect();
    let col_angles: Vec<f64> = cols.points().iter().map(|&x| x.acos()).collect();
    let n = rows.len();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
        let r = &row_angles[i * dim..(i + 1) * dim];
        for (j, slots) in out.chunks_mut(rep).enumerate() {
            let c = &col_angles[j * dim..(j + 1) * dim];
            let cost: f64 = r.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
            slots.fill(cost);
        }
    });
    CostMatrix::new(n, data).expect("square by construction")
}

impl CostMatrix {
    fn transposed(&self) -> CostMatrix {
        let n = self.size();
        CostMatrix::from_fn(n, |i, j| self.get(j, i))
    }
}

/// `W₂²(μ_a^n, μ_b^n)` through the exact assignment solver.
pub fn w2sq_bipartite(a: &EmpiricalSample, b: &EmpiricalSample, metric: Metric) -> Result<f64> {
    let c = cost_matrix(a, b, metric)?;
    Ok(solve_assignment(&c)?.total_cost / a.len() as f64)
}

/// `W₂²` between a sample and a larger reference sample, a proxy for
/// `W₂²(μ^n, μ)` when `μ` has no one-dimensional quantile coupling.
///
/// The estimate is biased upward; the bias is of the order of
/// `W₂(μ^N, μ)` for the reference size `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceEstimate {
    pub w2sq: f64,
    pub reference_size: usize,
    /// Copies of each sample point in the balanced assignment, `N / n`.
    pub replication: usize,
}

pub fn w2sq_vs_reference(a: &EmpiricalSample, reference: &EmpiricalSample) -> Result<ReferenceEstimate> {
    let (n, big) = (a.len(), reference.len());
    if a.dim() != reference.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: reference.dim() });
    }
    if n == 0 || big < n || big % n != 0 {
        return Err(Error::Divisibility { reference: big, sample: n });
    }
    let rep = big / n;
    let w2sq = if a.dim() == 1 {
        // the monotone coupling stays optimal with replicated atoms
        let sum: f64 = reference
            .angles()
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let s = a.angles()[k / rep];
                (s - r) * (s - r)
            })
            .sum();
        sum / big as f64
    } else {
        let c = replicated_cost_matrix(reference, a, rep);
        solve_assignment(&c)?.total_cost / big as f64
    };
    Ok(ReferenceEstimate { w2sq, reference_size: big, replication: rep })
}

/// `W₂²` between two samples of the same size in any dimension, choosing
/// the sorted path in one dimension.
pub fn w2sq_between(a: &EmpiricalSample, b: &EmpiricalSample) -> Result<f64> {
    if a.dim() == 1 {
        w2sq_sorted_1d(a, b)
    } else {
        w2sq_bipartite(a, b, Metric::IntrinsicProduct)
    }
}
