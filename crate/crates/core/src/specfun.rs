//! Gamma function and difference kernels, plus closed-form values of the
//! standard Riemann–Liouville and Caputo operators on power functions.

use alloc::format;
use alloc::string::String;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{exp, powf, sin, sqrt};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive real arguments (Lanczos, g = 7, nine terms,
/// with reflection below 1/2).
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("gamma requires a finite positive argument, got {x}")));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x == libm::trunc(x) && x <= 23.0 {
        let mut g = 1.0;
        let mut k = 2.0;
        while k < x {
            g *= k;
            k += 1.0;
        }
        return g;
    }
    if x < 0.5 {
        return PI / (sin(PI * x) * gamma_positive(1.0 - x));
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let w = z + LANCZOS_G + 0.5;
    // Split the power so large arguments do not overflow before exp(-w).
    let half = powf(w, 0.5 * (z + 0.5));
    sqrt(2.0 * PI) * half * (half * exp(-w)) * series
}

/// A difference kernel `k(x)`, `x = |t - τ| > 0`, instantiated at a fixed order.
///
/// `singularity_exponent` is the σ ≥ 0 for which `k(x)·x^σ` stays bounded and
/// continuous as `x → 0`; the singular quadrature folds `x^{-σ}` into its
/// weights and samples only [`regular_part`](Self::regular_part).
pub trait DifferenceKernel {
    /// The order (α, or 1 − α for the derivative operators) this kernel was built at.
    fn order(&self) -> f64;

    fn evaluate(&self, x: f64) -> f64;

    fn singularity_exponent(&self) -> f64;

    /// `k(x)·x^σ`; override when a cancellation-free form exists.
    fn regular_part(&self, x: f64) -> f64 {
        let s = self.singularity_exponent();
        if s == 0.0 {
            self.evaluate(x)
        } else {
            self.evaluate(x) * powf(x, s)
        }
    }

    fn label(&self) -> String;
}

/// A family of difference kernels indexed by order. Operators take a family
/// and instantiate it at α (K-op) or 1 − α (A-op and B-op) themselves.
pub trait KernelFamily {
    type Kernel: DifferenceKernel;

    fn instantiate(&self, order: f64) -> Result<Self::Kernel>;

    fn label(&self) -> String;
}

/// The built-in kernel families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `x^{α-1} / Γ(α)`, which turns the K-op into Riemann–Liouville integrals.
    RiemannLiouville,
    /// `x^{α-1} e^{-λx} / Γ(α)` with `λ ≥ 0`.
    Tempered { lambda: f64 },
}

impl KernelSpec {
    pub fn tempered(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::domain(format!("tempered kernel needs a finite λ ≥ 0, got {lambda}")));
        }
        Ok(KernelSpec::Tempered { lambda })
    }
}

impl core::str::FromStr for KernelSpec {
    type Err = Error;

    /// `rl` or `tempered:λ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "rl" {
            return Ok(KernelSpec::RiemannLiouville);
        }
        match s.strip_prefix("tempered:") {
            Some(l) => {
                let lambda =
                    l.trim().parse::<f64>().map_err(|_| Error::domain(format!("bad tempering rate in `{s}`")))?;
                KernelSpec::tempered(lambda)
            }
            None => Err(Error::domain(format!("unknown kernel `{s}` (use rl or tempered:λ)"))),
        }
    }
}

impl KernelFamily for KernelSpec {
    type Kernel = PowerKernel;

    fn instantiate(&self, order: f64) -> Result<PowerKernel> {
        let base = rl_kernel(order)?;
        Ok(match *self {
            KernelSpec::RiemannLiouville => base,
            KernelSpec::Tempered { lambda } => PowerKernel { lambda, ..base },
        })
    }

    fn label(&self) -> String {
        match self {
            KernelSpec::RiemannLiouville => String::from("rl"),
            KernelSpec::Tempered { lambda } => format!("tempered:{lambda}"),
        }
    }
}

/// `x^{order-1} e^{-λx} / Γ(order)`; λ = 0 is the Riemann–Liouville kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerKernel {
    order: f64,
    lambda: f64,
    inv_gamma: f64,
}

impl PowerKernel {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl DifferenceKernel for PowerKernel {
    fn order(&self) -> f64 {
        self.order
    }

    fn evaluate(&self, x: f64) -> f64 {
        let mut v = self.inv_gamma;
        if self.order != 1.0 {
            v *= powf(x, self.order - 1.0);
        }
        if self.lambda != 0.0 {
            v *= exp(-self.lambda * x);
        }
        v
    }

    fn singularity_exponent(&self) -> f64 {
        1.0 - self.order
    }

    fn regular_part(&self, x: f64) -> f64 {
        if self.lambda == 0.0 {
            self.inv_gamma
        } else {
            self.inv_gamma * exp(-self.lambda * x)
        }
    }

    fn label(&self) -> String {
        if self.lambda == 0.0 {
            format!("rl({})", self.order)
        } else {
            format!("tempered({},{})", self.lambda, self.order)
        }
    }
}

/// The Riemann–Liouville power kernel `x^{α-1}/Γ(α)`, `0 < α ≤ 1`.
pub fn rl_kernel(alpha: f64) -> Result<PowerKernel> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("kernel order must lie in (0, 1], got {alpha}")));
    }
    Ok(PowerKernel { order: alpha, lambda: 0.0, inv_gamma: 1.0 / gamma_positive(alpha) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Integral,
    RlDerivative,
    CaputoDerivative,
}

/// Closed-form value of a standard fractional operator applied to a power.
///
/// Left-sided operators act on `(τ - a)^β` and depend on `t - a`; right-sided
/// ones act on `(b - τ)^β` and depend on `b - t`. Derivatives are the standard
/// (sign-normalized) left/right Riemann–Liouville and Caputo derivatives.
pub fn euler_oracle(side: Side, kind: OracleKind, alpha: f64, beta: f64, a: f64, b: f64, t: f64) -> Result<f64> {
    let alpha_ok = match kind {
        OracleKind::Integral => alpha > 0.0 && alpha <= 1.0,
        _ => alpha > 0.0 && alpha < 1.0,
    };
    if !alpha_ok {
        return Err(Error::domain(format!("order {alpha} out of range for {kind:?}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!("power exponent must be finite and ≥ 0, got {beta}")));
    }
    if !(a < b) || !(a <= t && t <= b) {
        return Err(Error::domain(format!("need a ≤ t ≤ b with a < b, got a={a}, t={t}, b={b}")));
    }
    let d = match side {
        Side::Left => t - a,
        Side::Right => b - t,
    };
    let g1 = gamma_positive(beta + 1.0);
    match kind {
        OracleKind::Integral => Ok(g1 / gamma_positive(beta + alpha + 1.0) * powf(d, beta + alpha)),
        OracleKind::CaputoDerivative if beta == 0.0 => Ok(0.0),
        OracleKind::RlDerivative | OracleKind::CaputoDerivative => {
            if beta - alpha < 0.0 && d == 0.0 {
                return Err(Error::domain("derivative is unbounded at the base point"));
            }
            Ok(g1 / gamma_positive(beta - alpha + 1.0) * powf(d, beta - alpha))
        }
    }
}
