//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use jacobi_match::transport::CostMatrix;
use statrs::function::gamma::ln_gamma;

/// Double-double number `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let (hi, lo) = quick_two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
        Dd { hi, lo }
    }

    pub fn mul_f(self, x: f64) -> Dd {
        self.mul(Dd::from(x))
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul_f(q2));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from(q3))
    }

    pub fn sqrt(self) -> Dd {
        let x = self.hi.sqrt();
        // one Newton step in double-double
        let xd = Dd::from(x);
        xd.add(self.sub(xd.mul(xd)).div(xd.mul_f(2.0)))
    }

    /// `e^x` by argument reduction `x = k ln 2 + r`, Taylor series on
    /// `r / 2^10`, and ten squarings.
    pub fn exp(self) -> Dd {
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self.sub(Dd::LN2.mul_f(k)).mul_f(1.0 / 1024.0);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for i in 1..30 {
            term = term.mul(r).div(Dd::from(i as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-40 {
                break;
            }
        }
        for _ in 0..10 {
            sum = sum.mul(sum);
        }
        let scale = 2f64.powi(k as i32);
        Dd { hi: sum.hi * scale, lo: sum.lo * scale }
    }
}

/// Hungarian algorithm with row/column potentials, O(n³); an assignment
/// oracle independent of the library's solver.
pub fn hungarian(c: &CostMatrix) -> f64 {
    let n = c.size();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = c.get(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| c.get(p[j] - 1, j - 1)).sum()
}

/// Classical Jacobi polynomial `P_k^{(a,b)}(x)`.
pub fn jacobi_p(k: usize, a: f64, b: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ab = a + b;
    let (mut p0, mut p1) = (1.0, 0.5 * (a - b + (ab + 2.0) * x));
    for m in 2..=k {
        let m = m as f64;
        let c = 2.0 * m + ab;
        let next = ((c - 1.0) * (c * (c - 2.0) * x + a * a - b * b) * p1 - 2.0 * (m + a - 1.0) * (m + b - 1.0) * c * p0)
            / (2.0 * m * (m + ab) * (c - 2.0));
        p0 = p1;
        p1 = next;
    }
    p1
}

/// `J_k` of the probability measure `∝ (1−x)^{α−1}(1+x)^{β−1}` through the
/// closed-form norm of `P_k^{(α−1, β−1)}`.
pub fn orthonormal_by_norm(k: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    let (a, b) = (alpha - 1.0, beta - 1.0);
    let kf = k as f64;
    // ∫P_k² w dx = 2^{a+b+1}/(2k+a+b+1) · Γ(k+a+1)Γ(k+b+1)/(Γ(k+a+b+1) k!)
    // and the probability normalization divides by 2^{a+b+1} B(a+1, b+1)
    let ln_h = if k == 0 {
        0.0
    } else {
        -(2.0 * kf + a + b + 1.0).ln() + ln_gamma(kf + a + 1.0) + ln_gamma(kf + b + 1.0)
            - ln_gamma(kf + a + b + 1.0)
            - ln_gamma(kf + 1.0)
            - (ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0))
    };
    jacobi_p(k, a, b, x) / (0.5 * ln_h).exp()
}

pub mod heat;
