//! Heat-kernel invariants as functions returning the worst observed error.

use jacobi_match::quadrature::{gauss_jacobi, gauss_legendre};
use jacobi_match::spectral::HeatKernelModel;
use jacobi_match::JacobiParams;

pub const TIMES: [f64; 3] = [1e-3, 0.1, 1.0];
pub const POINTS: [f64; 3] = [-0.9, 0.0, 0.9];
pub const DIMS: [f64; 3] = [1.0, 2.0, 3.5];

fn models() -> Vec<(JacobiParams, HeatKernelModel)> {
    DIMS.iter()
        .map(|&d| {
            let p = JacobiParams::symmetric(d).unwrap();
            (p, HeatKernelModel::new(p))
        })
        .collect()
}

/// Gauss–Jacobi rule for `μ` itself, exact for polynomials of degree below `2·order`.
fn mu_rule(p: &JacobiParams, order: usize) -> (Vec<f64>, Vec<f64>) {
    let r = gauss_jacobi(order, p.alpha() - 1.0, p.beta() - 1.0).unwrap();
    let c = p.norm_const();
    (r.nodes, r.weights.iter().map(|w| w * c).collect())
}

/// `max |∫ p_t(x, y) dμ(y) − 1|` over the standard grid.
pub fn mass_conservation_error() -> f64 {
    let mut worst: f64 = 0.0;
    for (p, m) in models() {
        for &t in &TIMES {
            let k = m.basis().unwrap().kernel_terms(t, m.policy()).unwrap();
            let (nodes, weights) = mu_rule(&p, k / 2 + 2);
            for &x in &POINTS {
                let mass: f64 = nodes.iter().zip(&weights).map(|(&y, w)| w * m.heat_kernel_1d(t, x, y).unwrap()).sum();
                worst = worst.max((mass - 1.0).abs());
            }
        }
    }
    worst
}

/// `max |∫ p_t(x, z) p_t(z, y) dμ(z) − p_{2t}(x, y)|` over the standard grid.
pub fn chapman_kolmogorov_error() -> f64 {
    let mut worst: f64 = 0.0;
    for (p, m) in models() {
        for &t in &TIMES {
            let k = m.basis().unwrap().kernel_terms(t, m.policy()).unwrap();
            let (nodes, weights) = mu_rule(&p, k + 2);
            for &x in &POINTS {
                let px: Vec<f64> = nodes.iter().map(|&z| m.heat_kernel_1d(t, x, z).unwrap()).collect();
                for &y in &POINTS {
                    let lhs: f64 = nodes
                        .iter()
                        .zip(&weights)
                        .zip(&px)
                        .map(|((&z, w), a)| w * a * m.heat_kernel_1d(t, z, y).unwrap())
                        .sum();
                    let rhs = m.heat_kernel_1d(2.0 * t, x, y).unwrap();
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    worst
}

/// Number of grid pairs where `p_t(x, y) ≠ p_t(y, x)` bit for bit.
pub fn symmetry_violations() -> usize {
    let mut bad = 0;
    let grid: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
    for (_, m) in models() {
        for &t in &TIMES {
            for &x in &grid {
                for &y in &grid {
                    if m.heat_kernel_1d(t, x, y).unwrap().to_bits() != m.heat_kernel_1d(t, y, x).unwrap().to_bits() {
                        bad += 1;
                    }
                }
            }
        }
    }
    bad
}

/// `I(s) = ∫₀^∞ e^{−s u(u+d−1)} du` by Gauss–Legendre after `u = v/√s`.
pub fn trace_integral_lower(d: f64, s: f64) -> f64 {
    let rule = gauss_legendre(32).unwrap();
    let c = (d - 1.0) * s.sqrt();
    rule.integrate_composite(0.0, 12.0, 48, |v| (-(v * v) - c * v).exp()) / s.sqrt()
}

/// Largest violation of `I(s) ≤ trace(s) ≤ I(s) + 1` on a log grid of
/// `s ∈ [1e-6, 10]`; zero when the sandwich holds.
pub fn trace_sandwich_violation() -> f64 {
    let mut worst: f64 = 0.0;
    for &d in &[1.0, 2.0, 3.5, 7.0] {
        let m = HeatKernelModel::new(JacobiParams::symmetric(d).unwrap());
        for i in 0..=28 {
            let s = 1e-6 * 10f64.powf(i as f64 / 4.0);
            let tr = m.trace(s).unwrap();
            let lo = trace_integral_lower(d, s);
            worst = worst.max(lo - tr).max(tr - (lo + 1.0));
        }
    }
    worst
}

/// Largest `dispersion(t) − 2t` (nonpositive when the bound holds).
pub fn dispersion_excess() -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for &(a, b) in &[(0.5, 0.5), (1.0, 1.0), (1.75, 1.75), (2.5, 2.5), (0.5, 2.0), (3.0, 1.25)] {
        let m = HeatKernelModel::new(JacobiParams::new(a, b).unwrap());
        for &t in &[0.01, 0.1, 1.0] {
            worst = worst.max(m.dispersion_integral(t).unwrap() - 2.0 * t);
        }
    }
    worst
}

/// `max |∫ J_j J_k dμ − δ_jk|` for `j, k ≤ 20`.
pub fn orthonormality_error() -> f64 {
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(0.5, 0.5), (1.0, 1.0), (1.75, 1.75), (0.5, 3.0), (2.2, 0.6)] {
        let p = JacobiParams::new(a, b).unwrap();
        let m = HeatKernelModel::new(p);
        let (nodes, weights) = mu_rule(&p, 24);
        let values: Vec<Vec<f64>> = nodes.iter().map(|&x| m.basis().unwrap().eval_all(20, x)).collect();
        for j in 0..=20 {
            for k in 0..=20 {
                let g: f64 = values.iter().zip(&weights).map(|(v, w)| w * v[j] * v[k]).sum();
                worst = worst.max((g - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    worst
}

/// Relative residual of `L J_k = −λ_k J_k` with `L f = (1−x²)f″ − d x f′`
/// by central differences on Chebyshev points, over `k ≤ 10`.
pub fn eigen_relation_error() -> f64 {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for &d in &[1.0, 2.0, 3.5, 6.0] {
        let m = HeatKernelModel::new(JacobiParams::symmetric(d).unwrap());
        for k in 1..=10 {
            let f = |x: f64| m.basis_eval(k, x).unwrap();
            let lambda = (k as f64) * (k as f64 + d - 1.0);
            let mut num: f64 = 0.0;
            let mut den: f64 = 0.0;
            for i in 0..64 {
                let x = ((2 * i + 1) as f64 * std::f64::consts::PI / 128.0).cos() * 0.99;
                let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
                let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
                let lf = (1.0 - x * x) * d2 - d * x * d1;
                num = num.max((lf + lambda * f(x)).abs());
                den = den.max(lambda * f(x).abs());
            }
            worst = worst.max(num / den);
        }
    }
    worst
}

/// `min p_t(x, y)` over a 201 × 201 grid, `t ≥ 1e-3`.
pub fn kernel_minimum() -> f64 {
    let grid: Vec<f64> = (0..=200).map(|i| -1.0 + 0.01 * i as f64).collect();
    let mut low = f64::INFINITY;
    for (_, m) in models() {
        for &t in &TIMES {
            for &x in &grid {
                for &y in &grid {
                    low = low.min(m.heat_kernel_1d(t, x, y).unwrap());
                }
            }
        }
    }
    low
}
