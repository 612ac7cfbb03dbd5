//! One-variable generalized operators.
//!
//! For a p-set `⟨a, b, p, q⟩` and kernel `k`,
//!
//! ```text
//! (K f)(t) = p ∫_a^t k(t-τ) f(τ) dτ + q ∫_t^b k(τ-t) f(τ) dτ
//! (A f)(t) = d/dt (K^{1-α} f)(t)
//! (B f)(t) = (K^{1-α} f')(t)
//! ```
//!
//! With the power kernel and the p-set `⟨a, b, 1, 0⟩` these are the left
//! Riemann–Liouville integral, Riemann–Liouville derivative and Caputo
//! derivative; with `⟨a, b, 0, 1⟩` the right integral and the negated right
//! derivatives.

use alloc::format;

use crate::error::{Error, Result};
use crate::expr::FuncSpec;
use crate::math::cbrt;
use crate::pset::ParameterSet;
use crate::quad::{QuadratureRule, SingularQuadrature};
use crate::specfun::{DifferenceKernel, KernelFamily, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    K,
    A,
    B,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::K => "K",
            OperatorKind::A => "A",
            OperatorKind::B => "B",
        }
    }

    /// Order the kernel is instantiated at for an operator of order `alpha`.
    pub fn kernel_order(&self, alpha: f64) -> f64 {
        match self {
            OperatorKind::K => alpha,
            OperatorKind::A | OperatorKind::B => 1.0 - alpha,
        }
    }

    pub fn check_alpha(&self, alpha: f64) -> Result<()> {
        let ok = match self {
            OperatorKind::K => alpha > 0.0 && alpha <= 1.0,
            OperatorKind::A | OperatorKind::B => alpha > 0.0 && alpha < 1.0,
        };
        if ok {
            Ok(())
        } else {
            let range = if *self == OperatorKind::K { "(0, 1]" } else { "(0, 1)" };
            Err(Error::domain(format!("{}-op order must lie in {range}, got {alpha}", self.name())))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRequest<F = KernelSpec> {
    pub kind: OperatorKind,
    pub alpha: f64,
    pub pset: ParameterSet,
    pub kernel: F,
    pub rule: QuadratureRule,
}

impl<F: KernelFamily> OperatorRequest<F> {
    pub fn new(kind: OperatorKind, alpha: f64, pset: ParameterSet, kernel: F, rule: QuadratureRule) -> Result<Self> {
        kind.check_alpha(alpha)?;
        rule.validated()?;
        Ok(OperatorRequest { kind, alpha, pset, kernel, rule })
    }

    pub fn with_kind(self, kind: OperatorKind) -> Result<Self> {
        Self::new(kind, self.alpha, self.pset, self.kernel, self.rule)
    }

    pub fn with_pset(self, pset: ParameterSet) -> Self {
        OperatorRequest { pset, ..self }
    }

    /// Instantiate the kernel at the order matching the operator kind and
    /// prepare the quadrature nodes.
    pub fn prepare(&self) -> Result<PreparedOperator<F::Kernel>> {
        self.kind.check_alpha(self.alpha)?;
        let kernel = self.kernel.instantiate(self.kind.kernel_order(self.alpha))?;
        PreparedOperator::new(self.kind, self.pset, kernel, &self.rule)
    }
}

/// An operator with its kernel instantiated and quadrature nodes built, for
/// repeated evaluation.
#[derive(Debug, Clone)]
pub struct PreparedOperator<K> {
    kind: OperatorKind,
    pset: ParameterSet,
    kernel: K,
    quad: SingularQuadrature,
    spread: f64,
}

impl<K: DifferenceKernel> PreparedOperator<K> {
    pub fn new(kind: OperatorKind, pset: ParameterSet, kernel: K, rule: &QuadratureRule) -> Result<Self> {
        let quad = SingularQuadrature::new(rule, kernel.singularity_exponent())?;
        let spread = Stencil::spread(rule.panels);
        Ok(PreparedOperator { kind, pset, kernel, quad, spread })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }
    pub fn pset(&self) -> &ParameterSet {
        &self.pset
    }
    pub fn kernel(&self) -> &K {
        &self.kernel
    }

    /// Evaluate the operator on `f` at `t`.
    pub fn apply(&self, f: &FuncSpec, t: f64) -> Result<f64> {
        if f.arity() != 1 {
            return Err(Error::Arity { expected: 1, found: f.arity() });
        }
        let res = match self.kind {
            OperatorKind::K => self.convolve(|x| f.eval1(x), t),
            OperatorKind::A => self.differentiate(|x| f.eval1(x), t),
            OperatorKind::B => {
                let df = f.partial(0)?;
                self.convolve(|x| df.eval1(x), t)
            }
        };
        res.map_err(|e| e.with_label(f.label()))
    }

    /// `(K f)(t)` with the instantiated kernel, for a plain closure.
    pub fn convolve<G: Fn(f64) -> f64>(&self, f: G, t: f64) -> Result<f64> {
        let (a, b) = (self.pset.a(), self.pset.b());
        if !(a <= t && t <= b) {
            return Err(Error::domain(format!("t = {t} lies outside [{a}, {b}]")));
        }
        let (p, q) = (self.pset.p(), self.pset.q());
        let mut total = 0.0;
        if p != 0.0 {
            total += p * self.left_half(&f, t, t - a)?;
        }
        if q != 0.0 {
            total += q * self.right_half(&f, t, b - t)?;
        }
        Ok(total)
    }

    /// `d/dt (K f)(t)` by finite differences of each half in its own
    /// distance variable; refuses `t = a` and `t = b`.
    pub fn differentiate<G: Fn(f64) -> f64>(&self, f: G, t: f64) -> Result<f64> {
        let (a, b) = (self.pset.a(), self.pset.b());
        if !(a < t && t < b) {
            return Err(Error::domain(format!(
                "A-op is evaluated only at interior points; t = {t} is not inside ({a}, {b})"
            )));
        }
        let (d, e) = (t - a, b - t);
        let (p, q) = (self.pset.p(), self.pset.q());
        let len = self.pset.length();
        let mut total = 0.0;
        if p != 0.0 {
            let st = Stencil::for_distances(d, e, len, self.spread);
            let mut acc = 0.0;
            for &(k, c) in st.taps {
                let shift = k * st.h;
                acc += c * self.left_half(&f, t + shift, d + shift)?;
            }
            total += p * acc / st.h;
        }
        if q != 0.0 {
            let st = Stencil::for_distances(e, d, len, self.spread);
            let mut acc = 0.0;
            for &(k, c) in st.taps {
                let shift = k * st.h;
                acc += c * self.right_half(&f, t - shift, e + shift)?;
            }
            total -= q * acc / st.h;
        }
        Ok(total)
    }

    /// `∫_0^{len} k(x) f(t - x) dx`, `len = t - a`.
    fn left_half<G: Fn(f64) -> f64>(&self, f: &G, t: f64, len: f64) -> Result<f64> {
        self.quad.integrate(&self.kernel, len, |x| f(t - x)).map_err(|e| relocate(e, |x| t - x))
    }

    /// `∫_0^{len} k(x) f(t + x) dx`, `len = b - t`.
    fn right_half<G: Fn(f64) -> f64>(&self, f: &G, t: f64, len: f64) -> Result<f64> {
        self.quad.integrate(&self.kernel, len, |x| f(t + x)).map_err(|e| relocate(e, |x| t + x))
    }
}

fn relocate(e: Error, position: impl Fn(f64) -> f64) -> Error {
    match e {
        Error::NonFinite { at, .. } => Error::non_finite("operator integrand", position(at)),
        other => other,
    }
}

const CENTRAL: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
const BACKWARD: [(f64, f64); 5] =
    [(0.0, 25.0 / 12.0), (-1.0, -4.0), (-2.0, 3.0), (-3.0, -16.0 / 12.0), (-4.0, 3.0 / 12.0)];

/// Fourth-order difference stencil for a half-integral viewed as a function
/// of its length `d`, with `e` the room left before the far end of the
/// interval. The derivative is `Σ c·F(d + k·h) / h` over `taps = (k, c)`;
/// the step never exceeds `d / spread`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stencil {
    pub h: f64,
    pub taps: &'static [(f64, f64)],
}

impl Stencil {
    pub fn spread(panels: usize) -> f64 {
        8.0 * panels as f64
    }

    pub fn for_distances(d: f64, e: f64, length: f64, spread: f64) -> Stencil {
        let h0 = (1e-4f64).max(cbrt(f64::EPSILON) * length);
        let h = h0.min(d / spread);
        if e > 2.5 * h {
            Stencil { h, taps: &CENTRAL }
        } else {
            Stencil { h, taps: &BACKWARD }
        }
    }
}

fn check_kind<F>(req: &OperatorRequest<F>, kind: OperatorKind) -> Result<()> {
    if req.kind == kind {
        Ok(())
    } else {
        Err(Error::domain(format!("request is for the {}-op, not the {}-op", req.kind.name(), kind.name())))
    }
}

/// Generalized fractional integral `(K_P^α f)(t)`, `a ≤ t ≤ b`.
pub fn kop<F: KernelFamily>(req: &OperatorRequest<F>, f: &FuncSpec, t: f64) -> Result<f64> {
    check_kind(req, OperatorKind::K)?;
    req.prepare()?.apply(f, t)
}

/// Generalized Riemann–Liouville derivative `(A_P^α f)(t)`, `a < t < b`.
pub fn aop<F: KernelFamily>(req: &OperatorRequest<F>, f: &FuncSpec, t: f64) -> Result<f64> {
    check_kind(req, OperatorKind::A)?;
    req.prepare()?.apply(f, t)
}

/// Generalized Caputo derivative `(B_P^α f)(t)`, `a ≤ t ≤ b`; `f` must have a derivative.
pub fn bop<F: KernelFamily>(req: &OperatorRequest<F>, f: &FuncSpec, t: f64) -> Result<f64> {
    check_kind(req, OperatorKind::B)?;
    req.prepare()?.apply(f, t)
}

/// `∫_0^length |k(x)| dx`.
pub fn kernel_l1_norm<K: DifferenceKernel + ?Sized>(kernel: &K, length: f64, rule: &QuadratureRule) -> Result<f64> {
    let quad = SingularQuadrature::new(rule, kernel.singularity_exponent())?;
    quad.integrate(kernel, length, |x| if kernel.regular_part(x) < 0.0 { -1.0 } else { 1.0 })
}
