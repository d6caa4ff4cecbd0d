//! Fast oracle checks bundled with the library, run by the `selftest` command.

use crate::distributions::{sample, JacobiParams, Model};
use crate::quadrature::gauss_jacobi;
use crate::rng::RngState;
use crate::spectral::{spectral_constant, HeatKernelModel};
use crate::transport::{brute_force_assignment, solve_assignment, w2sq_bipartite, w2sq_sorted_1d, CostMatrix, Metric};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed deviation.
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &'static str, max_error: f64, tolerance: f64) -> Self {
        Self { name, passed: max_error <= tolerance, max_error, tolerance }
    }

    fn failed(name: &'static str, tolerance: f64) -> Self {
        Self { name, passed: false, max_error: f64::INFINITY, tolerance }
    }
}

fn assignment_vs_brute_force() -> Check {
    let mut rng = RngState::new(0x5e1f);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c = CostMatrix::from_fn(8, |_, _| rng.uniform());
        match (solve_assignment(&c), brute_force_assignment(&c)) {
            (Ok(a), Ok(b)) => worst = worst.max((a.total_cost - b.total_cost).abs()),
            _ => return Check::failed("assignment_vs_brute_force", 1e-12),
        }
    }
    Check::new("assignment_vs_brute_force", worst, 1e-12)
}

fn bipartite_vs_sorted() -> Check {
    let model: Model = JacobiParams::new(0.75, 1.5).expect("valid").into();
    let mut rng = RngState::new(0xb1a);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = sample(&model, &mut rng, 64);
        let b = sample(&model, &mut rng, 64);
        match (w2sq_bipartite(&a, &b, Metric::Intrinsic1d), w2sq_sorted_1d(&a, &b)) {
            (Ok(x), Ok(y)) => worst = worst.max((x - y).abs()),
            _ => return Check::failed("bipartite_vs_sorted_1d", 1e-12),
        }
    }
    Check::new("bipartite_vs_sorted_1d", worst, 1e-12)
}

fn cdf_quantile_round_trip() -> Check {
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(0.5, 0.5), (1.0, 1.0), (1.5, 1.5), (0.5, 3.0), (4.0, 0.75)] {
        let p = JacobiParams::new(a, b).expect("valid");
        for i in 1..200 {
            let u = i as f64 / 200.0;
            worst = worst.max((p.cdf(p.quantile(u)) - u).abs());
        }
    }
    Check::new("cdf_quantile_round_trip", worst, 1e-12)
}

/// `∫ p_t(x, y) dμ(y) = 1`, integrated exactly with a Gauss–Jacobi rule in
/// `y` of more than half the truncation degree.
fn mass_conservation() -> Check {
    let mut worst: f64 = 0.0;
    for &d in &[1.0, 2.0, 3.5] {
        let p = JacobiParams::symmetric(d).expect("valid");
        let model = HeatKernelModel::new(p);
        let basis = model.basis().expect("one-dimensional");
        for &t in &[1e-3, 0.1, 1.0] {
            let Ok(k) = basis.kernel_terms(t, model.policy()) else {
                return Check::failed("heat_kernel_mass", 1e-10);
            };
            let Ok(rule) = gauss_jacobi(k / 2 + 2, p.alpha() - 1.0, p.beta() - 1.0) else {
                return Check::failed("heat_kernel_mass", 1e-10);
            };
            for &x in &[-0.9, 0.0, 0.9] {
                let mut mass = 0.0;
                for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
                    match model.heat_kernel_1d(t, x, y) {
                        Ok(v) => mass += w * p.norm_const() * v,
                        Err(_) => return Check::failed("heat_kernel_mass", 1e-10),
                    }
                }
                worst = worst.max((mass - 1.0).abs());
            }
        }
    }
    Check::new("heat_kernel_mass", worst, 1e-10)
}

fn spectral_constants() -> Check {
    let exact = [(2.0, 1.0), (3.0, 0.75), (4.0, 11.0 / 18.0), (5.0, 25.0 / 48.0)];
    let mut worst: f64 = 0.0;
    for (d, s) in exact {
        match spectral_constant(d, 1e-14) {
            Ok(v) => worst = worst.max((v - s).abs()),
            Err(_) => return Check::failed("spectral_constant_closed_form", 1e-12),
        }
    }
    Check::new("spectral_constant_closed_form", worst, 1e-12)
}

/// Runs every bundled check.
pub fn run_selftest() -> Vec<Check> {
    vec![
        assignment_vs_brute_force(),
        bipartite_vs_sorted(),
        cdf_quantile_round_trip(),
        mass_conservation(),
        spectral_constants(),
    ]
}
