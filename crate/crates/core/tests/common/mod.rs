//! Reference routines for the integration tests, written independently of the
//! library's quadrature and special functions.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Tanh-sinh quadrature of `f(τ, τ - lo, hi - τ)` over `[lo, hi]`.
///
/// The integrand receives both distances to the ends computed without
/// cancellation, so algebraic end singularities are resolved to near full
/// precision.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    for k in -320i32..=320 {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let e = (2.0 * u).exp();
        // 1 + x and 1 - x for x = tanh u
        let (plus, minus) =
            if u < 0.0 { (2.0 * e / (1.0 + e), 2.0 / (1.0 + e)) } else { (2.0 / (1.0 + 1.0 / e), 2.0 / (e + 1.0)) };
        let w = 0.5 * PI * t.cosh() / (u.cosh() * u.cosh());
        let d_lo = half * plus;
        let d_hi = half * minus;
        if d_lo == 0.0 || d_hi == 0.0 || w == 0.0 {
            continue;
        }
        let x = if d_lo < d_hi { lo + d_lo } else { hi - d_hi };
        sum += w * f(x, d_lo, d_hi);
    }
    sum * half * h
}

/// `ln Γ(x)` for `x > 0` from the Stirling series at `x + 12`.
pub fn ln_gamma(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = x;
    while z < 12.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360360.0))))));
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// `(1/Γ(α)) ∫_0^d (d-τ)^{α-1} τ^β dτ` by direct quadrature.
pub fn left_integral_of_power(alpha: f64, beta: f64, d: f64) -> f64 {
    tanh_sinh(|_, dl, dh| dh.powf(alpha - 1.0) * if beta == 0.0 { 1.0 } else { dl.powf(beta) }, 0.0, d) / gamma(alpha)
}

pub fn rel_err(x: f64, want: f64) -> f64 {
    if want == 0.0 {
        x.abs()
    } else {
        (x - want).abs() / want.abs()
    }
}

/// A polynomial in two variables as `(coefficient, i, j)` terms of `c t1^i t2^j`.
#[derive(Debug, Clone)]
pub struct Poly2(pub Vec<(f64, i32, i32)>);

impl Poly2 {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.0.iter().map(|&(c, i, j)| c * x.powi(i) * y.powi(j)).sum()
    }

    pub fn d1(&self) -> Poly2 {
        Poly2(self.0.iter().filter(|t| t.1 > 0).map(|&(c, i, j)| (c * i as f64, i - 1, j)).collect())
    }

    pub fn d2(&self) -> Poly2 {
        Poly2(self.0.iter().filter(|t| t.2 > 0).map(|&(c, i, j)| (c * j as f64, i, j - 1)).collect())
    }

    /// Exact integral over `[a1, b1] × [a2, b2]`.
    pub fn integrate(&self, a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
        let mono = |k: i32, a: f64, b: f64| (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64;
        self.0.iter().map(|&(c, i, j)| c * mono(i, a1, b1) * mono(j, a2, b2)).sum()
    }

    /// Source text in the expression language.
    pub fn source(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let terms: Vec<String> = self.0.iter().map(|&(c, i, j)| format!("({c:e})*t1^{i}*t2^{j}")).collect();
        terms.join(" + ")
    }
}
