//! Quadrature: Gauss rules, weakly singular convolution integrals, tensor
//! products over a rectangle, and the counterclockwise boundary integral.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{cos, expm1, ln1p, powf, sqrt, Accumulator};
use crate::specfun::{gamma, DifferenceKernel};

/// How singular convolution integrals are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleFamily {
    /// Composite Gauss–Legendre applied to `k·f` directly; for bounded kernels.
    GaussLegendre,
    /// Composite Gauss–Legendre with a Gauss–Jacobi panel at the singular
    /// endpoint carrying the factor `x^{-σ}` in its weights.
    GaussJacobi,
    /// Composite Gauss–Legendre on the graded variable `x = L v^q`,
    /// `q ≥ 2/(1-σ)`, which smooths the endpoint singularity away.
    GradedComposite,
}

impl RuleFamily {
    pub fn name(&self) -> &'static str {
        match self {
            RuleFamily::GaussLegendre => "gauss_legendre",
            RuleFamily::GaussJacobi => "gauss_jacobi",
            RuleFamily::GradedComposite => "graded_composite",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "gauss_legendre" | "legendre" => Some(RuleFamily::GaussLegendre),
            "gauss_jacobi" | "jacobi" => Some(RuleFamily::GaussJacobi),
            "graded_composite" | "graded" => Some(RuleFamily::GradedComposite),
            _ => None,
        }
    }
}

impl fmt::Display for RuleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A composite quadrature description: `panels` panels of `order` nodes.
///
/// `grading_strength` is a lower bound on the endpoint grading exponent.
/// Smooth integrals over the rectangle use it as the exponent of the
/// sigmoidal substitution `u ↦ u^s / (u^s + (1-u)^s)` on each axis (1 means
/// uniform panels); graded singular integrals never grade weaker than
/// `2/(1-σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub family: RuleFamily,
    pub order: usize,
    pub panels: usize,
    pub grading_strength: f64,
}

pub const DEFAULT_ORDER: usize = 16;
pub const DEFAULT_PANELS: usize = 8;
const MAX_ORDER: usize = 128;

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            family: RuleFamily::GaussJacobi,
            order: DEFAULT_ORDER,
            panels: DEFAULT_PANELS,
            grading_strength: 1.0,
        }
    }
}

impl QuadratureRule {
    pub fn new(family: RuleFamily, order: usize, panels: usize) -> Result<Self> {
        QuadratureRule { family, order, panels, grading_strength: 1.0 }.validated()
    }

    pub fn with_panels(self, panels: usize) -> Result<Self> {
        QuadratureRule { panels, ..self }.validated()
    }

    pub fn with_grading(self, grading_strength: f64) -> Result<Self> {
        QuadratureRule { grading_strength, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.order == 0 || self.order > MAX_ORDER {
            return Err(Error::domain(format!("order per panel must be in 1..={MAX_ORDER}, got {}", self.order)));
        }
        if self.panels == 0 {
            return Err(Error::domain("panel count must be positive"));
        }
        if !(self.grading_strength >= 1.0 && self.grading_strength.is_finite()) {
            return Err(Error::domain(format!("grading strength must be ≥ 1, got {}", self.grading_strength)));
        }
        Ok(self)
    }

    /// Nodes per dimension.
    pub fn total_nodes(&self) -> usize {
        self.order * self.panels
    }
}

/// `Δ2 = [a1, b1] × [a2, b2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Rectangle {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self> {
        let finite = a1.is_finite() && b1.is_finite() && a2.is_finite() && b2.is_finite();
        if !finite || !(a1 < b1) || !(a2 < b2) {
            return Err(Error::domain(format!("rectangle needs a1 < b1 and a2 < b2, got [{a1},{b1}]×[{a2},{b2}]")));
        }
        Ok(Rectangle { a1, b1, a2, b2 })
    }

    pub fn unit() -> Self {
        Rectangle { a1: 0.0, b1: 1.0, a2: 0.0, b2: 1.0 }
    }

    pub fn area(&self) -> f64 {
        (self.b1 - self.a1) * (self.b2 - self.a2)
    }

    pub fn contains(&self, t1: f64, t2: f64) -> bool {
        self.a1 <= t1 && t1 <= self.b1 && self.a2 <= t2 && t2 <= self.b2
    }

    /// Extent along axis 1 or 2.
    pub fn interval(&self, axis: usize) -> (f64, f64) {
        if axis == 1 {
            (self.a1, self.b1)
        } else {
            (self.a2, self.b2)
        }
    }
}

impl core::str::FromStr for Rectangle {
    type Err = Error;

    /// `a1,b1,a2,b2`
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| Error::domain(format!("bad rectangle `{s}`"))))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(Error::domain(format!("expected `a1,b1,a2,b2`, got `{s}`")));
        }
        Rectangle::new(v[0], v[1], v[2], v[3])
    }
}

/// Nodes and weights on [-1, 1], nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre rule by Newton iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::domain("Gauss–Legendre needs at least one node"));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(GaussRule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` on [-1, 1]
/// (Golub–Welsch on the Jacobi matrix).
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::domain("Gauss–Jacobi needs at least one node"));
    }
    if !(alpha > -1.0 && beta > -1.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::domain(format!("Jacobi exponents must exceed -1, got ({alpha}, {beta})")));
    }
    let ab = alpha + beta;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    diag[0] = (beta - alpha) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        diag[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
        off[k - 1] = if k == 1 {
            sqrt(4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab)))
        } else {
            sqrt(4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0)))
        };
    }
    let mu0 = powf(2.0, ab + 1.0) * gamma(alpha + 1.0)? * gamma(beta + 1.0)? / gamma(ab + 2.0)?;
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first)?;
    let mut pairs: Vec<(f64, f64)> = diag.iter().zip(&first).map(|(&x, &z)| (x, mu0 * z * z)).collect();
    pairs.sort_by(|l, r| l.0.total_cmp(&r.0));
    Ok(GaussRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}

/// Implicit QL on a symmetric tridiagonal matrix, tracking only the first
/// component of each eigenvector. `off[i]` couples rows i and i+1.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::domain("tridiagonal eigensolver did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Barycentric weights for Lagrange interpolation through `nodes`.
pub(crate) fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let mut prod = 1.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j {
                    prod *= xj - xk;
                }
            }
            1.0 / prod
        })
        .collect()
}

/// Fill `out` with the Lagrange basis values at `x`.
pub(crate) fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    if let Some(j) = nodes.iter().position(|&n| n == x) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[j] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for ((o, &n), &w) in out.iter_mut().zip(nodes).zip(bary) {
        *o = w / (x - n);
        denom += *o;
    }
    for o in out.iter_mut() {
        *o /= denom;
    }
}

/// Which end of `[lo, hi]` the kernel is singular at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    SingularAtLo,
    SingularAtHi,
}

/// A rule prepared for one singularity exponent: Gauss–Legendre nodes for
/// the regular panels plus, when needed, Gauss–Jacobi nodes for the panel
/// touching the singular endpoint.
#[derive(Debug, Clone)]
pub struct SingularQuadrature {
    rule: QuadratureRule,
    sigma: f64,
    legendre: GaussRule,
    jacobi: Option<GaussRule>,
}

impl SingularQuadrature {
    pub fn new(rule: &QuadratureRule, sigma: f64) -> Result<Self> {
        let rule = rule.validated()?;
        if !(0.0..1.0).contains(&sigma) {
            return Err(Error::domain(format!("singularity exponent must be in [0, 1), got {sigma}")));
        }
        let legendre = gauss_legendre(rule.order)?;
        let jacobi = if rule.family == RuleFamily::GaussJacobi && sigma > 0.0 {
            // weight (1+ξ)^{-σ}: the singular endpoint sits at ξ = -1, i.e. x = 0
            Some(gauss_jacobi(rule.order, 0.0, -sigma)?)
        } else {
            None
        };
        Ok(SingularQuadrature { rule, sigma, legendre, jacobi })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    fn grading_exponent(&self) -> f64 {
        let canonical = 2.0 / (1.0 - self.sigma);
        self.rule.grading_strength.max(canonical)
    }

    /// `∫_0^length k(x) g(x) dx`, with `x` the distance from the singular endpoint.
    pub fn integrate<K, G>(&self, kernel: &K, length: f64, mut g: G) -> Result<f64>
    where
        K: DifferenceKernel + ?Sized,
        G: FnMut(f64) -> f64,
    {
        if !(length > 0.0) {
            return Ok(0.0);
        }
        let panels = self.rule.panels;
        let mut acc = Accumulator::default();
        let mut sample = |x: f64| -> Result<f64> {
            let v = g(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::non_finite("singular quadrature sample (distance from singular end)", x))
            }
        };
        match self.rule.family {
            RuleFamily::GradedComposite if self.sigma > 0.0 => {
                // x = L v^q; k(x) dx = r(x) q L^{1-σ} v^{q(1-σ)-1} dv
                let q = self.grading_exponent();
                let scale = q * powf(length, 1.0 - self.sigma);
                let expo = q * (1.0 - self.sigma) - 1.0;
                let h = 1.0 / panels as f64;
                for j in 0..panels {
                    for (xi, w) in self.legendre.nodes.iter().zip(&self.legendre.weights) {
                        let v = (j as f64 + 0.5 * (1.0 + xi)) * h;
                        let x = length * powf(v, q);
                        let jac = scale * powf(v, expo) * 0.5 * h;
                        acc.add(w * jac * kernel.regular_part(x) * sample(x)?);
                    }
                }
            }
            _ => {
                let h = length / panels as f64;
                let start = match &self.jacobi {
                    Some(jac) => {
                        let scale = powf(0.5 * h, 1.0 - self.sigma);
                        for (xi, w) in jac.nodes.iter().zip(&jac.weights) {
                            let x = 0.5 * h * (1.0 + xi);
                            acc.add(w * scale * kernel.regular_part(x) * sample(x)?);
                        }
                        1
                    }
                    None => 0,
                };
                for j in start..panels {
                    for (xi, w) in self.legendre.nodes.iter().zip(&self.legendre.weights) {
                        let x = (j as f64 + 0.5 * (1.0 + xi)) * h;
                        acc.add(w * 0.5 * h * kernel.evaluate(x) * sample(x)?);
                    }
                }
            }
        }
        Ok(acc.value())
    }
}

/// `∫_lo^hi f(τ) k(dist(τ)) dτ`, `dist` measured from the singular endpoint.
/// An empty interval integrates to exactly 0.
pub fn integrate_singular<K, F>(
    f: F,
    kernel: &K,
    lo: f64,
    hi: f64,
    orientation: Orientation,
    rule: &QuadratureRule,
) -> Result<f64>
where
    K: DifferenceKernel + ?Sized,
    F: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return Ok(0.0);
    }
    let sq = SingularQuadrature::new(rule, kernel.singularity_exponent())?;
    let position = |x: f64| match orientation {
        Orientation::SingularAtLo => lo + x,
        Orientation::SingularAtHi => hi - x,
    };
    sq.integrate(kernel, hi - lo, |x| f(position(x))).map_err(|e| match e {
        Error::NonFinite { at, .. } => Error::non_finite("integrand", position(at)),
        other => other,
    })
}

/// One node of a [`GradedGrid`]: its position, exact distances to both ends,
/// and its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNode {
    pub t: f64,
    pub from_lo: f64,
    pub from_hi: f64,
    pub weight: f64,
    /// Position in the substitution variable, and `1 - u`, both computed
    /// without cancellation.
    pub u: f64,
    pub u_rev: f64,
}

/// Composite Gauss–Legendre nodes on `[lo, hi]` in the variable `u ∈ [0, 1]`
/// with `t = lo + L φ(u)`, `φ(u) = u^s / (u^s + (1-u)^s)`.
///
/// The substitution clusters nodes at both ends so that integrands behaving
/// like `(t - lo)^γ` or `(hi - t)^γ`, γ > -1, are integrated accurately;
/// `s = 1` is the plain composite rule.
#[derive(Debug, Clone)]
pub struct GradedGrid {
    lo: f64,
    hi: f64,
    strength: f64,
    panels: usize,
    reference: GaussRule,
    nodes: Vec<GridNode>,
}

impl GradedGrid {
    pub fn new(lo: f64, hi: f64, rule: &QuadratureRule, strength: f64) -> Result<Self> {
        let rule = rule.validated()?;
        if !(lo < hi) {
            return Err(Error::domain(format!("grid interval needs lo < hi, got [{lo}, {hi}]")));
        }
        if !(strength >= 1.0 && strength.is_finite()) {
            return Err(Error::domain(format!("grading strength must be ≥ 1, got {strength}")));
        }
        let reference = gauss_legendre(rule.order)?;
        let len = hi - lo;
        let p = rule.panels as f64;
        let mut nodes = Vec::with_capacity(rule.total_nodes());
        for j in 0..rule.panels {
            for (xi, w) in reference.nodes.iter().zip(&reference.weights) {
                let u = (j as f64 + 0.5 * (1.0 + xi)) / p;
                let u_rev = ((rule.panels - j - 1) as f64 + 0.5 * (1.0 - xi)) / p;
                let (from_lo, from_hi, dphi) = substitution(u, u_rev, strength);
                nodes.push(GridNode {
                    t: if from_lo <= from_hi { lo + len * from_lo } else { hi - len * from_hi },
                    from_lo: len * from_lo,
                    from_hi: len * from_hi,
                    weight: 0.5 * w / p * len * dphi,
                    u,
                    u_rev,
                });
            }
        }
        Ok(GradedGrid { lo, hi, strength, panels: rule.panels, reference, nodes })
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn strength(&self) -> f64 {
        self.strength
    }
    pub fn panels(&self) -> usize {
        self.panels
    }
    pub fn order(&self) -> usize {
        self.reference.len()
    }
    pub(crate) fn reference(&self) -> &GaussRule {
        &self.reference
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        let mut acc = Accumulator::default();
        for (n, v) in self.nodes.iter().zip(values) {
            acc.add(n.weight * v);
        }
        acc.value()
    }
}

/// `(φ(u), 1 - φ(u), φ'(u))` for the two-sided substitution, computed from
/// `u` and `1 - u` without cancellation.
pub(crate) fn substitution(u: f64, u_rev: f64, s: f64) -> (f64, f64, f64) {
    if s == 1.0 {
        return (u, u_rev, 1.0);
    }
    let a = powf(u, s);
    let b = powf(u_rev, s);
    let den = a + b;
    let dphi = s * powf(u * u_rev, s - 1.0) / (den * den);
    (a / den, b / den, dphi)
}

/// `φ(v) - φ(u)` for `v = u + δ`, `δ ≥ 0`, with `u_rev = 1 - u` and
/// `v_rev = 1 - v` supplied separately. Accurate to a few ulps relative to
/// the result even when δ is tiny or either point is close to an end.
pub(crate) fn substitution_difference(u: f64, u_rev: f64, v: f64, v_rev: f64, delta: f64, s: f64) -> f64 {
    if s == 1.0 {
        return delta;
    }
    if delta <= 0.5 * u.min(v_rev) {
        let log_ratio = ln1p(delta / u) + ln1p(delta / v_rev);
        let ru = powf(u / u_rev, s);
        let rv = powf(v / v_rev, s);
        return ru * expm1(s * log_ratio) / ((1.0 + ru) * (1.0 + rv));
    }
    let (pu, qu, _) = substitution(u, u_rev, s);
    let (pv, qv, _) = substitution(v, v_rev, s);
    if pu >= 0.5 {
        qu - qv
    } else {
        pv - pu
    }
}

/// Inverse substitution from the two exact end distances `d = φ·L`, `e = (1-φ)·L`.
pub(crate) fn inverse_substitution(d: f64, e: f64, s: f64) -> (f64, f64) {
    let r = powf(d / e, 1.0 / s);
    if r <= 1.0 {
        (r / (1.0 + r), 1.0 / (1.0 + r))
    } else {
        let ir = 1.0 / r;
        (1.0 / (1.0 + ir), ir / (1.0 + ir))
    }
}

/// `∬_R F(t1, t2) dt2 dt1` by the tensor product of two [`GradedGrid`]s
/// built with the rule's grading strength. With strength 1 (the default)
/// this is the plain composite Gauss–Legendre product rule.
pub fn integrate_2d<F>(f: F, rect: &Rectangle, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let g1 = GradedGrid::new(rect.a1, rect.b1, rule, rule.grading_strength)?;
    let g2 = GradedGrid::new(rect.a2, rect.b2, rule, rule.grading_strength)?;
    let mut acc = Accumulator::default();
    for n1 in g1.nodes() {
        let mut inner = Accumulator::default();
        for n2 in g2.nodes() {
            let v = f(n1.t, n2.t);
            if !v.is_finite() {
                return Err(Error::non_finite(format!("2D integrand (t2 = {})", n2.t), n1.t));
            }
            inner.add(n2.weight * v);
        }
        acc.add(n1.weight * inner.value());
    }
    Ok(acc.value())
}

/// `∮_{∂R} (P dt1 + Q dt2)` counterclockwise: bottom (t1: a1→b1),
/// right (t2: a2→b2), top (t1: b1→a1), left (t2: b2→a2).
///
/// Each edge uses the same [`GradedGrid`] nodes as [`integrate_2d`].
pub fn contour_integral<P, Q>(pfun: P, qfun: Q, rect: &Rectangle, rule: &QuadratureRule) -> Result<f64>
where
    P: FnMut(f64, f64) -> Result<f64>,
    Q: FnMut(f64, f64) -> Result<f64>,
{
    let mut total = Accumulator::default();
    for e in contour_edges(pfun, qfun, rect, rule)? {
        total.add(e);
    }
    Ok(total.value())
}

/// The four signed edge contributions of [`contour_integral`], in its order.
pub fn contour_edges<P, Q>(mut pfun: P, mut qfun: Q, rect: &Rectangle, rule: &QuadratureRule) -> Result<[f64; 4]>
where
    P: FnMut(f64, f64) -> Result<f64>,
    Q: FnMut(f64, f64) -> Result<f64>,
{
    let g1 = GradedGrid::new(rect.a1, rect.b1, rule, rule.grading_strength)?;
    let g2 = GradedGrid::new(rect.a2, rect.b2, rule, rule.grading_strength)?;
    let edge = |name: &str, v: f64, at: f64| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_finite(format!("{name} edge of the contour"), at))
        }
    };
    let mut bottom = Accumulator::default();
    let mut top = Accumulator::default();
    for n in g1.nodes() {
        bottom.add(n.weight * edge("bottom", pfun(n.t, rect.a2)?, n.t)?);
        top.add(n.weight * edge("top", pfun(n.t, rect.b2)?, n.t)?);
    }
    let mut right = Accumulator::default();
    let mut left = Accumulator::default();
    for n in g2.nodes() {
        right.add(n.weight * edge("right", qfun(rect.b1, n.t)?, n.t)?);
        left.add(n.weight * edge("left", qfun(rect.a1, n.t)?, n.t)?);
    }
    Ok([bottom.value(), right.value(), -top.value(), -left.value()])
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::specfun::{rl_kernel, KernelFamily, KernelSpec};
    use libm::{exp, sin};

    fn beta_fn(x: f64, y: f64) -> f64 {
        gamma(x).unwrap() * gamma(y).unwrap() / gamma(x + y).unwrap()
    }

    #[test]
    fn legendre_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 40] {
            let r = gauss_legendre(n).unwrap();
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let approx: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * libm::pow(*x, k as f64)).sum();
                assert!((approx - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn jacobi_moments_match_beta_function() {
        // ∫ (1-x)^a (1+x)^b (1+x)^k dx = 2^{a+b+k+1} B(a+1, b+k+1)
        for &(a, b) in &[(0.0, -0.5), (0.0, -0.25), (0.0, -0.75), (-0.3, 0.4), (0.0, 0.0)] {
            for n in [1, 4, 16, 32] {
                let r = gauss_jacobi(n, a, b).unwrap();
                assert!(r.nodes.iter().all(|x| x.abs() < 1.0));
                assert!(r.weights.iter().all(|&w| w > 0.0));
                for k in 0..(2 * n).min(30) {
                    let exact = libm::pow(2.0, a + b + k as f64 + 1.0) * beta_fn(a + 1.0, b + k as f64 + 1.0);
                    let approx: f64 =
                        r.nodes.iter().zip(&r.weights).map(|(x, w)| w * libm::pow(1.0 + x, k as f64)).sum();
                    assert!(((approx - exact) / exact).abs() < 1e-12, "a={a} b={b} n={n} k={k}: {approx} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn singular_constant_mass() {
        let k = rl_kernel(0.5).unwrap();
        let rule = QuadratureRule::default();
        let v = integrate_singular(|_| 1.0, &k, 0.0, 1.0, Orientation::SingularAtHi, &rule).unwrap();
        assert!((v - 1.128_379_167_1).abs() < 1e-10);
        let zero = integrate_singular(|_| 0.0, &k, 0.0, 1.0, Orientation::SingularAtLo, &rule).unwrap();
        assert_eq!(zero, 0.0);
        let k1 = rl_kernel(1.0).unwrap();
        let v = integrate_singular(|t| t, &k1, 0.0, 1.0, Orientation::SingularAtHi, &rule).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(integrate_singular(|t| t, &k, 0.5, 0.5, Orientation::SingularAtHi, &rule).unwrap(), 0.0);
    }

    #[test]
    fn jacobi_engine_is_exact_for_polynomials() {
        // ∫_0^1 (1-τ)^{-σ} τ^m dτ / Γ(α) = B(m+1, α)/Γ(α)
        let rule = QuadratureRule::new(RuleFamily::GaussJacobi, 16, 1).unwrap();
        for &alpha in &[0.25, 0.5, 0.75] {
            let k = rl_kernel(alpha).unwrap();
            for m in 0..16 {
                let v = integrate_singular(|t| libm::pow(t, m as f64), &k, 0.0, 1.0, Orientation::SingularAtHi, &rule)
                    .unwrap();
                let exact = beta_fn(m as f64 + 1.0, alpha) / gamma(alpha).unwrap();
                assert!(((v - exact) / exact).abs() < 1e-12, "alpha={alpha} m={m}");
            }
        }
    }

    #[test]
    fn l1_mass_of_power_kernel() {
        for &alpha in &[0.25, 0.5, 0.75] {
            for fam in [RuleFamily::GaussJacobi, RuleFamily::GradedComposite] {
                let rule = QuadratureRule::new(fam, 16, 8).unwrap();
                let k = rl_kernel(alpha).unwrap();
                let len = 2.5;
                let v = integrate_singular(|_| 1.0, &k, 0.0, len, Orientation::SingularAtLo, &rule).unwrap();
                let exact = libm::pow(len, alpha) / gamma(alpha + 1.0).unwrap();
                assert!(((v - exact) / exact).abs() < 1e-10, "{fam} alpha={alpha}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn tempered_mass_converges_under_refinement() {
        let k = KernelSpec::Tempered { lambda: 1.0 }.instantiate(0.5).unwrap();
        let mut prev: Option<f64> = None;
        for panels in [4, 8, 16, 32] {
            let rule = QuadratureRule::new(RuleFamily::GaussJacobi, 16, panels).unwrap();
            let v = integrate_singular(|_| 1.0, &k, 0.0, 1.0, Orientation::SingularAtHi, &rule).unwrap();
            if let Some(p) = prev {
                assert!(((v - p) / v).abs() < 1e-8);
            }
            prev = Some(v);
        }
        // erf(1): ∫_0^1 x^{-1/2} e^{-x} dx / Γ(1/2)
        assert!((prev.unwrap() - 0.842_700_792_949_714_9).abs() < 1e-13);
    }

    #[test]
    fn non_finite_samples_abort() {
        let k = rl_kernel(0.5).unwrap();
        let err = integrate_singular(
            |t| if t > 0.5 { f64::NAN } else { 1.0 },
            &k,
            0.0,
            1.0,
            Orientation::SingularAtHi,
            &QuadratureRule::default(),
        )
        .unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn integrate_2d_examples() {
        let r = Rectangle::unit();
        let rule = QuadratureRule::default();
        assert!((integrate_2d(|_, _| 1.0, &r, &rule).unwrap() - 1.0).abs() < 1e-14);
        assert!((integrate_2d(|a, b| a * b, &r, &rule).unwrap() - 0.25).abs() < 1e-14);
        let exact = (1.0 - libm::cos(1.0)) * (core::f64::consts::E - 1.0);
        assert!((integrate_2d(|a, b| sin(a) * exp(b), &r, &rule).unwrap() - exact).abs() < 1e-13);
        assert!((exact - 0.789_890_194_4).abs() < 1e-10);
    }

    #[test]
    fn graded_grid_integrates_endpoint_singularities() {
        let rule = QuadratureRule::default();
        for s in [1.0, 4.0, 8.0] {
            let g = GradedGrid::new(-1.0, 2.0, &rule, s).unwrap();
            let total: f64 = g.nodes().iter().map(|n| n.weight).sum();
            assert!((total - 3.0).abs() < 1e-13);
            for n in g.nodes() {
                assert!(n.from_lo > 0.0 && n.from_hi > 0.0);
                assert!(((n.from_lo + n.from_hi) - 3.0).abs() < 1e-14);
            }
        }
        // ∫_0^1 t^{-3/4} dt = 4
        let g = GradedGrid::new(0.0, 1.0, &rule, 4.0).unwrap();
        let v: f64 = g.nodes().iter().map(|n| n.weight * libm::pow(n.from_lo, -0.75)).sum();
        assert!((v - 4.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn substitution_helpers_are_consistent() {
        for s in [1.0, 2.5, 4.0, 8.0] {
            for &(u, d) in &[(0.1, 1e-9), (0.3, 0.2), (0.9, 0.05), (1e-4, 1e-4)] {
                let (p0, _, _) = substitution(u, 1.0 - u, s);
                let (p1, _, _) = substitution(u + d, 1.0 - u - d, s);
                let inc = substitution_difference(u, 1.0 - u, u + d, 1.0 - u - d, d, s);
                assert!((inc - (p1 - p0)).abs() <= 1e-12 * inc.abs().max(1e-300) + 1e-15, "s={s} u={u}");
            }
            let (u, ur) = inverse_substitution(0.3, 0.7, s);
            let (p, q, _) = substitution(u, ur, s);
            assert!((p - 0.3).abs() < 1e-15 && (q - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn contour_examples() {
        let r = Rectangle::unit();
        let rule = QuadratureRule::default();
        let v = contour_integral(|_, t2| Ok(-t2), |t1, _| Ok(t1), &r, &rule).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        assert_eq!(contour_integral(|_, _| Ok(0.0), |_, _| Ok(0.0), &r, &rule).unwrap(), 0.0);
        let v = contour_integral(|_, _| Ok(0.0), |t1, _| Ok(t1), &r, &rule).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lagrange_basis_reproduces_polynomials() {
        let r = gauss_legendre(8).unwrap();
        let bary = barycentric_weights(&r.nodes);
        let mut basis = vec![0.0; 8];
        for &x in &[-0.93, 0.0, 0.41, r.nodes[3]] {
            lagrange_basis(&r.nodes, &bary, x, &mut basis);
            let interp: f64 = basis.iter().zip(&r.nodes).map(|(b, n)| b * n * n * n).sum();
            assert!((interp - x * x * x).abs() < 1e-14);
        }
    }
}
