//! Special functions: log-beta and the regularized incomplete beta function.

use statrs::function::gamma::ln_gamma;

const CF_TOL: f64 = 1e-15;
const CF_MAX_ITER: usize = 2000;
const TINY: f64 = 1e-300;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta `I_x(a, b)` and its complement `1 − I_x(a, b)`.
///
/// Takes `x` and `y = 1 − x` separately so callers that know `1 − x` to full
/// relative precision (e.g. `(1 − t)/2` near `t = 1`) do not lose it.
/// Returns `(I_x(a, b), I_y(b, a))`; the pair sums to one.
pub fn beta_reg_pair(a: f64, b: f64, x: f64, y: f64) -> (f64, f64) {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if y <= 0.0 {
        return (1.0, 0.0);
    }
    // The continued fraction converges fast for x < (a + 1)/(a + b + 2).
    // Ties break so that swapping (a, x) with (b, y) swaps the outputs.
    let lhs = x * (a + b + 2.0) - (a + 1.0);
    if lhs == 0.0 && a == b {
        return (0.5, 0.5);
    }
    if lhs < 0.0 || (lhs == 0.0 && a < b) {
        let p = prefactor(a, b, x, y) * beta_cf(a, b, x) / a;
        (p, 1.0 - p)
    } else {
        let q = prefactor(b, a, y, x) * beta_cf(b, a, y) / b;
        (1.0 - q, q)
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    beta_reg_pair(a, b, x, 1.0 - x).0
}

fn prefactor(a: f64, b: f64, x: f64, y: f64) -> f64 {
    (a * x.ln() + b * y.ln() - ln_beta(a, b)).exp()
}

/// Continued fraction for `I_x(a, b)` by the modified Lentz method.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_TOL {
            return h;
        }
    }
    h
}
