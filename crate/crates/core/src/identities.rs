//! Numerical checks of the integration-by-parts and Green identities for the
//! generalized operators on a rectangle.
//!
//! Integration by parts:
//!
//! ```text
//! ∬ [g·(K_{P1,t1} η1) + f·(K_{P2,t2} η2)] = ∬ [η1·(K_{P1*,t1} g) + η2·(K_{P2*,t2} f)]
//! ```
//!
//! Green:
//!
//! ```text
//! ∬ [g·(B_{P1,t1} η) + f·(B_{P2,t2} η)]
//!     = -∬ η·[(A_{P1*,t1} g) + (A_{P2*,t2} f)]
//!       + ∮ η·[(K^{1-α}_{P1*,t1} g) dt2 - (K^{1-α}_{P2*,t2} f) dt1]
//! ```
//!
//! The contour runs counterclockwise. Area terms are computed on a tensor
//! grid of [`GradedGrid`]s whose nodes never touch the boundary, with the
//! partial operators applied as product-integration matrices along each axis.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use ndarray::{s, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::expr::{FuncSpec, Smoothness};
use crate::math::{ceil, Accumulator};
use crate::nodal::RowBuilder;
use crate::ops1d::{OperatorKind, PreparedOperator};
use crate::pset::{ParameterSet, PsetShape};
use crate::quad::{contour_edges, GradedGrid, QuadratureRule, Rectangle};
use crate::specfun::{KernelFamily, KernelSpec};

/// Relative residuals are taken against `max(|lhs|, |rhs_area| + |rhs_boundary|, RESIDUAL_FLOOR)`.
pub const RESIDUAL_FLOOR: f64 = 1e-14;
/// Below this every term of an identity counts as zero and the check is vacuous.
pub const VACUOUS_LEVEL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityKind {
    Ibp1d,
    Ibp2d,
    Green,
    GreenRlCorollary,
}

impl IdentityKind {
    pub fn name(&self) -> &'static str {
        match self {
            IdentityKind::Ibp1d => "ibp1d",
            IdentityKind::Ibp2d => "ibp2d",
            IdentityKind::Green => "green",
            IdentityKind::GreenRlCorollary => "green_rl_corollary",
        }
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportInputs {
    pub f: String,
    pub g: String,
    pub eta: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub identity: IdentityKind,
    pub lhs: f64,
    pub rhs_area: f64,
    pub rhs_boundary: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub alpha: f64,
    pub kernel: String,
    pub psets: Vec<String>,
    pub rule: QuadratureRule,
    /// Outer nodes per axis.
    pub nodes: usize,
    pub inputs: ReportInputs,
    /// Largest magnitude among the individual integrals making up the
    /// identity (floored at [`RESIDUAL_FLOOR`]); `rel_residual` is relative to it.
    pub scale: f64,
    /// Every term is below [`VACUOUS_LEVEL`].
    pub vacuous: bool,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        identity: IdentityKind,
        lhs: f64,
        rhs_area: f64,
        rhs_boundary: f64,
        alpha: f64,
        kernel: String,
        psets: Vec<String>,
        rule: QuadratureRule,
        inputs: ReportInputs,
        terms: &[f64],
    ) -> Self {
        let abs_residual = (lhs - (rhs_area + rhs_boundary)).abs();
        let largest = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let scale = lhs.abs().max(rhs_area.abs() + rhs_boundary.abs()).max(largest).max(RESIDUAL_FLOOR);
        let vacuous = lhs.abs().max(rhs_area.abs()).max(rhs_boundary.abs()).max(largest) < VACUOUS_LEVEL;
        VerificationReport {
            identity,
            lhs,
            rhs_area,
            rhs_boundary,
            abs_residual,
            rel_residual: abs_residual / scale,
            alpha,
            kernel,
            psets,
            nodes: rule.total_nodes(),
            rule,
            inputs,
            scale,
            vacuous,
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.rel_residual <= tol
    }

    /// Residual of the identity with the contour term dropped.
    pub fn two_term_rel_residual(&self) -> f64 {
        let abs = (self.lhs - self.rhs_area).abs();
        abs / self.lhs.abs().max(self.rhs_area.abs()).max(RESIDUAL_FLOOR)
    }
}

/// Grading exponent of the outer grids: at least `2/(1-α)` so that the
/// `(t-a)^{-α}` behaviour of A-op values near an end is integrated accurately.
pub fn outer_grading(alpha: f64, rule: &QuadratureRule) -> f64 {
    rule.grading_strength.max(ceil(2.0 / (1.0 - alpha)))
}

fn check_pset(p: &ParameterSet, rect: &Rectangle, axis: usize) -> Result<()> {
    let (lo, hi) = rect.interval(axis);
    if p.a() != lo || p.b() != hi {
        return Err(Error::domain(format!("p-set {p} does not span the rectangle's t{axis} extent [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("identity order must lie in (0, 1), got {alpha}")))
    }
}

fn require_arity2(f: &FuncSpec) -> Result<()> {
    if f.arity() == 2 {
        Ok(())
    } else {
        Err(Error::Arity { expected: 2, found: f.arity() })
    }
}

struct Grids {
    rect: Rectangle,
    /// The caller's rule, as reported.
    user_rule: QuadratureRule,
    /// The same rule with the outer grading applied.
    rule: QuadratureRule,
    g1: GradedGrid,
    g2: GradedGrid,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl Grids {
    fn new(alpha: f64, rect: &Rectangle, rule: &QuadratureRule) -> Result<Self> {
        let user_rule = rule.validated()?;
        let s = outer_grading(alpha, rule);
        let rule = rule.with_grading(s)?;
        let g1 = GradedGrid::new(rect.a1, rect.b1, &rule, s)?;
        let g2 = GradedGrid::new(rect.a2, rect.b2, &rule, s)?;
        let w1 = g1.nodes().iter().map(|n| n.weight).collect();
        let w2 = g2.nodes().iter().map(|n| n.weight).collect();
        Ok(Grids { rect: *rect, user_rule, rule, g1, g2, w1, w2 })
    }

    fn same_axes(&self) -> bool {
        self.rect.a1 == self.rect.a2 && self.rect.b1 == self.rect.b2
    }

    fn sample(&self, f: &FuncSpec) -> Result<Array2<f64>> {
        let (n1, n2) = (self.g1.len(), self.g2.len());
        let mut out = Array2::zeros((n1, n2));
        for (i, a) in self.g1.nodes().iter().enumerate() {
            for (k, b) in self.g2.nodes().iter().enumerate() {
                let v = f.eval2(a.t, b.t);
                if !v.is_finite() {
                    return Err(Error::non_finite(format!("`{}` (t2 = {})", f.label(), b.t), a.t));
                }
                out[[i, k]] = v;
            }
        }
        Ok(out)
    }

    /// `∬ a·b` with the tensor weights, in a fixed order.
    fn integrate_product(&self, a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
        let mut acc = Accumulator::default();
        for (i, w1) in self.w1.iter().enumerate() {
            let mut inner = Accumulator::default();
            for (k, w2) in self.w2.iter().enumerate() {
                inner.add(w2 * a[[i, k]] * b[[i, k]]);
            }
            acc.add(w1 * inner.value());
        }
        acc.value()
    }

    /// Build per-axis data with `build`, sharing it when both axes coincide.
    fn per_axis<T: Clone>(&self, mut build: impl FnMut(&GradedGrid) -> Result<T>) -> Result<(T, T)> {
        let first = build(&self.g1)?;
        let second = if self.same_axes() { first.clone() } else { build(&self.g2)? };
        Ok((first, second))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Along {
    T1,
    T2,
}

impl Grids {
    /// `[∬ a·(L x), ∬ a·(R x)]` for the left-half matrix `L` acting along
    /// one axis, with the right half `R` obtained by reflecting that axis.
    fn halves(&self, m: &Array2<f64>, a: &Array2<f64>, x: &Array2<f64>, along: Along) -> [f64; 2] {
        match along {
            Along::T1 => {
                let (ar, xr) = (a.slice(s![..;-1, ..]), x.slice(s![..;-1, ..]));
                [self.integrate_product(a.view(), m.dot(x).view()), self.integrate_product(ar, m.dot(&xr).view())]
            }
            Along::T2 => {
                let (ar, xr) = (a.slice(s![.., ..;-1]), x.slice(s![.., ..;-1]));
                [
                    self.integrate_product(a.view(), x.dot(&m.t()).view()),
                    self.integrate_product(ar, xr.dot(&m.t()).view()),
                ]
            }
        }
    }
}

/// `p·left + q·right`.
fn mix(h: [f64; 2], p: f64, q: f64) -> f64 {
    p * h[0] + q * h[1]
}

/// Matrices and grids for checking integration by parts at one order,
/// kernel family, rectangle and rule; reusable across input functions and p-sets.
pub struct IbpSetup {
    alpha: f64,
    kernel_label: String,
    grids: Grids,
    k1: Array2<f64>,
    k2: Array2<f64>,
}

impl IbpSetup {
    pub fn new<F: KernelFamily>(alpha: f64, kernel: &F, rect: &Rectangle, rule: &QuadratureRule) -> Result<Self> {
        check_alpha(alpha)?;
        let grids = Grids::new(alpha, rect, rule)?;
        let k = kernel.instantiate(alpha)?;
        let (k1, k2) = grids.per_axis(|g| Ok(RowBuilder::new(g, &k)?.matrix()))?;
        Ok(IbpSetup { alpha, kernel_label: kernel.label(), grids, k1, k2 })
    }

    pub fn verify(
        &self,
        f: &FuncSpec,
        g: &FuncSpec,
        eta1: &FuncSpec,
        eta2: &FuncSpec,
        p1: &ParameterSet,
        p2: &ParameterSet,
    ) -> Result<VerificationReport> {
        for h in [f, g, eta1, eta2] {
            require_arity2(h)?;
        }
        check_pset(p1, &self.grids.rect, 1)?;
        check_pset(p2, &self.grids.rect, 2)?;
        let fs = self.grids.sample(f)?;
        let gs = self.grids.sample(g)?;
        let e1 = self.grids.sample(eta1)?;
        let e2 = self.grids.sample(eta2)?;
        let (d1, d2) = (p1.dual(), p2.dual());
        let grids = &self.grids;
        let l1 = mix(grids.halves(&self.k1, &gs, &e1, Along::T1), p1.p(), p1.q());
        let l2 = mix(grids.halves(&self.k2, &fs, &e2, Along::T2), p2.p(), p2.q());
        let r1 = mix(grids.halves(&self.k1, &e1, &gs, Along::T1), d1.p(), d1.q());
        let r2 = mix(grids.halves(&self.k2, &e2, &fs, Along::T2), d2.p(), d2.q());
        let (lhs, rhs) = (l1 + l2, r1 + r2);
        Ok(VerificationReport::new(
            IdentityKind::Ibp2d,
            lhs,
            rhs,
            0.0,
            self.alpha,
            self.kernel_label.clone(),
            vec![p1.to_string(), p2.to_string()],
            self.grids.user_rule,
            ReportInputs {
                f: f.label().to_string(),
                g: g.label().to_string(),
                eta: format!("{}; {}", eta1.label(), eta2.label()),
            },
            &[l1, l2, r1, r2],
        ))
    }
}

struct GreenParts {
    lhs: [f64; 2],
    /// `∬ η·A g` and `∬ η·A f` with the dual p-sets.
    area: [f64; 2],
    edges: [f64; 4],
}

impl GreenParts {
    fn terms(&self, area_sign: f64) -> ([f64; 3], [f64; 8]) {
        let [l1, l2] = self.lhs;
        let [a1, a2] = self.area;
        let [e1, e2, e3, e4] = self.edges;
        let mut boundary = Accumulator::default();
        for e in self.edges {
            boundary.add(e);
        }
        let sums = [l1 + l2, area_sign * (a1 + a2), boundary.value()];
        (sums, [l1, l2, a1, a2, e1, e2, e3, e4])
    }
}

/// Grid samples of the three Green inputs and of the partials of `η`.
struct GreenSamples {
    f: Array2<f64>,
    g: Array2<f64>,
    eta: Array2<f64>,
    eta_1: Array2<f64>,
    eta_2: Array2<f64>,
}

/// Every integral of the Green identity split into its left- and
/// right-half parts, so that any pair of p-sets is a linear combination.
struct GreenPieces {
    /// `[left, right]` halves of `∬ g·K(∂1 η)` and `∬ f·K(∂2 η)`.
    lhs: [[f64; 2]; 2],
    /// `[left, right]` derivative halves of `∬ η·A g` and `∬ η·A f`.
    area: [[f64; 2]; 2],
    /// Contour edges with unit weights: bottom, right, top, left, signed.
    edges: [f64; 4],
}

impl GreenPieces {
    fn parts(&self, p1: &ParameterSet, p2: &ParameterSet) -> GreenParts {
        // the dual p-set swaps the weights, so A_{P*} = q·∂L - p·∂R
        let [b, r, t, l] = self.edges;
        GreenParts {
            lhs: [mix(self.lhs[0], p1.p(), p1.q()), mix(self.lhs[1], p2.p(), p2.q())],
            area: [mix(self.area[0], p1.q(), -p1.p()), mix(self.area[1], p2.q(), -p2.p())],
            edges: [p2.p() * b, p1.q() * r, p2.q() * t, p1.p() * l],
        }
    }
}

/// Matrices and grids for checking the Green identity; the kernel is used
/// at order `1 - α` throughout.
pub struct GreenSetup {
    alpha: f64,
    kernel_label: String,
    grids: Grids,
    k1: Array2<f64>,
    k2: Array2<f64>,
    d1: Array2<f64>,
    d2: Array2<f64>,
    end1: Vec<f64>,
    end2: Vec<f64>,
}

impl GreenSetup {
    pub fn new<F: KernelFamily>(alpha: f64, kernel: &F, rect: &Rectangle, rule: &QuadratureRule) -> Result<Self> {
        check_alpha(alpha)?;
        let grids = Grids::new(alpha, rect, rule)?;
        let k = kernel.instantiate(1.0 - alpha)?;
        let ((k1, d1, end1), (k2, d2, end2)) = grids.per_axis(|g| {
            let rb = RowBuilder::new(g, &k)?;
            Ok((rb.matrix(), rb.derivative_matrix(), rb.end_row()))
        })?;
        Ok(GreenSetup { alpha, kernel_label: kernel.label(), grids, k1, k2, d1, d2, end1, end2 })
    }

    fn shares_grids(&self, other: &GreenSetup) -> bool {
        self.grids.rect == other.grids.rect && self.grids.rule == other.grids.rule
    }

    fn samples(&self, f: &FuncSpec, g: &FuncSpec, eta: &FuncSpec) -> Result<GreenSamples> {
        for h in [f, g, eta] {
            require_arity2(h)?;
            if h.smoothness() != Smoothness::ContinuouslyDifferentiable {
                return Err(Error::DerivativeUnavailable(format!(
                    "`{}` must be continuously differentiable for the Green identity",
                    h.label()
                )));
            }
        }
        let grids = &self.grids;
        Ok(GreenSamples {
            f: grids.sample(f)?,
            g: grids.sample(g)?,
            eta: grids.sample(eta)?,
            eta_1: grids.sample(&eta.partial(0)?)?,
            eta_2: grids.sample(&eta.partial(1)?)?,
        })
    }

    fn pieces(&self, smp: &GreenSamples, eta: &FuncSpec) -> Result<GreenPieces> {
        let grids = &self.grids;
        let lhs = [
            grids.halves(&self.k1, &smp.g, &smp.eta_1, Along::T1),
            grids.halves(&self.k2, &smp.f, &smp.eta_2, Along::T2),
        ];
        let area =
            [grids.halves(&self.d1, &smp.eta, &smp.g, Along::T1), grids.halves(&self.d2, &smp.eta, &smp.f, Along::T2)];

        // the K^{1-α} traces on each edge, before the p-set weights: the
        // right half at lo is the left half at hi of the reflected lane
        let dot = |a: ArrayView1<f64>, b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let traces = |lane: ArrayView1<f64>, end: &[f64]| (dot(lane.slice(s![..;-1]), end), dot(lane, end));
        let f_edges: Vec<(f64, f64)> = smp.f.rows().into_iter().map(|r| traces(r, &self.end2)).collect();
        let g_edges: Vec<(f64, f64)> = smp.g.columns().into_iter().map(|c| traces(c, &self.end1)).collect();
        let t1: Vec<f64> = grids.g1.nodes().iter().map(|n| n.t).collect();
        let t2: Vec<f64> = grids.g2.nodes().iter().map(|n| n.t).collect();
        let rect = grids.rect;
        let eval_eta = |a: f64, b: f64| -> Result<f64> {
            let v = eta.eval2(a, b);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::non_finite(format!("`{}` on the boundary (t2 = {b})", eta.label()), a))
            }
        };
        let pfun = |a: f64, b: f64| -> Result<f64> {
            let i = locate(&t1, a)?;
            let k = if b == rect.a2 { f_edges[i].0 } else { f_edges[i].1 };
            Ok(-eval_eta(a, b)? * k)
        };
        let qfun = |a: f64, b: f64| -> Result<f64> {
            let j = locate(&t2, b)?;
            let k = if a == rect.a1 { g_edges[j].0 } else { g_edges[j].1 };
            Ok(eval_eta(a, b)? * k)
        };
        let edges = contour_edges(pfun, qfun, &rect, &grids.rule)?;
        Ok(GreenPieces { lhs, area, edges })
    }

    fn report(
        &self,
        identity: IdentityKind,
        parts: &GreenParts,
        area_sign: f64,
        psets: Vec<String>,
        inputs: ReportInputs,
    ) -> VerificationReport {
        let ([lhs, area, boundary], terms) = parts.terms(area_sign);
        VerificationReport::new(
            identity,
            lhs,
            area,
            boundary,
            self.alpha,
            self.kernel_label.clone(),
            psets,
            self.grids.user_rule,
            inputs,
            &terms,
        )
    }

    fn green_report(
        &self,
        pieces: &GreenPieces,
        p1: &ParameterSet,
        p2: &ParameterSet,
        inputs: ReportInputs,
    ) -> VerificationReport {
        self.report(IdentityKind::Green, &pieces.parts(p1, p2), -1.0, vec![p1.to_string(), p2.to_string()], inputs)
    }

    fn corollary_report(&self, pieces: &GreenPieces, inputs: ReportInputs) -> Result<VerificationReport> {
        if self.kernel_label != KernelSpec::RiemannLiouville.label() {
            return Err(Error::domain("the corollary form needs the Riemann–Liouville kernel"));
        }
        let rect = self.grids.rect;
        let p1 = ParameterSet::standard_left(rect.a1, rect.b1)?;
        let p2 = ParameterSet::standard_left(rect.a2, rect.b2)?;
        let mut parts = pieces.parts(&p1, &p2);
        // right RL derivative = -(A-op with the right p-set)
        parts.area = parts.area.map(|v| -v);
        Ok(self.report(IdentityKind::GreenRlCorollary, &parts, 1.0, vec![p1.to_string(), p2.to_string()], inputs))
    }

    pub fn verify(
        &self,
        f: &FuncSpec,
        g: &FuncSpec,
        eta: &FuncSpec,
        p1: &ParameterSet,
        p2: &ParameterSet,
    ) -> Result<VerificationReport> {
        check_pset(p1, &self.grids.rect, 1)?;
        check_pset(p2, &self.grids.rect, 2)?;
        let pieces = self.pieces(&self.samples(f, g, eta)?, eta)?;
        Ok(self.green_report(&pieces, p1, p2, inputs3(f, g, eta)))
    }

    /// The Green identity written with left Caputo derivatives on the left
    /// and right Riemann–Liouville derivatives and integrals on the right;
    /// requires this setup to use the power kernel.
    pub fn verify_corollary(&self, f: &FuncSpec, g: &FuncSpec, eta: &FuncSpec) -> Result<VerificationReport> {
        if self.kernel_label != KernelSpec::RiemannLiouville.label() {
            return Err(Error::domain("the corollary form needs the Riemann–Liouville kernel"));
        }
        let pieces = self.pieces(&self.samples(f, g, eta)?, eta)?;
        self.corollary_report(&pieces, inputs3(f, g, eta))
    }
}

fn inputs3(f: &FuncSpec, g: &FuncSpec, eta: &FuncSpec) -> ReportInputs {
    ReportInputs { f: f.label().to_string(), g: g.label().to_string(), eta: eta.label().to_string() }
}

fn locate(nodes: &[f64], t: f64) -> Result<usize> {
    nodes
        .binary_search_by(|n| n.total_cmp(&t))
        .map_err(|_| Error::domain(format!("contour node {t} is not on the identity grid")))
}

#[allow(clippy::too_many_arguments)]
pub fn verify_ibp_2d<F: KernelFamily>(
    f: &FuncSpec,
    g: &FuncSpec,
    eta1: &FuncSpec,
    eta2: &FuncSpec,
    alpha: f64,
    p1: &ParameterSet,
    p2: &ParameterSet,
    kernel: &F,
    rect: &Rectangle,
    rule: &QuadratureRule,
) -> Result<VerificationReport> {
    IbpSetup::new(alpha, kernel, rect, rule)?.verify(f, g, eta1, eta2, p1, p2)
}

#[allow(clippy::too_many_arguments)]
pub fn verify_green<F: KernelFamily>(
    f: &FuncSpec,
    g: &FuncSpec,
    eta: &FuncSpec,
    alpha: f64,
    p1: &ParameterSet,
    p2: &ParameterSet,
    kernel: &F,
    rect: &Rectangle,
    rule: &QuadratureRule,
) -> Result<VerificationReport> {
    GreenSetup::new(alpha, kernel, rect, rule)?.verify(f, g, eta, p1, p2)
}

pub fn verify_green_rl_corollary(
    f: &FuncSpec,
    g: &FuncSpec,
    eta: &FuncSpec,
    alpha: f64,
    rect: &Rectangle,
    rule: &QuadratureRule,
) -> Result<VerificationReport> {
    GreenSetup::new(alpha, &KernelSpec::RiemannLiouville, rect, rule)?.verify_corollary(f, g, eta)
}

/// `∫ g·(K_P η) = ∫ η·(K_{P*} g)` on `[a, b]`, by pointwise operator
/// evaluation at the nodes of a graded grid.
pub fn verify_ibp_1d<F: KernelFamily>(
    g: &FuncSpec,
    eta: &FuncSpec,
    alpha: f64,
    pset: &ParameterSet,
    kernel: &F,
    rule: &QuadratureRule,
) -> Result<VerificationReport> {
    OperatorKind::K.check_alpha(alpha)?;
    for h in [g, eta] {
        if h.arity() != 1 {
            return Err(Error::Arity { expected: 1, found: h.arity() });
        }
    }
    let s = outer_grading(alpha.min(0.999), rule);
    let grid = GradedGrid::new(pset.a(), pset.b(), rule, s)?;
    let k = kernel.instantiate(alpha)?;
    let op = PreparedOperator::new(OperatorKind::K, *pset, k, rule)?;
    let dual = PreparedOperator::new(OperatorKind::K, pset.dual(), kernel.instantiate(alpha)?, rule)?;
    let mut lhs = Accumulator::default();
    let mut rhs = Accumulator::default();
    for n in grid.nodes() {
        lhs.add(n.weight * g.eval1(n.t) * op.apply(eta, n.t)?);
        rhs.add(n.weight * eta.eval1(n.t) * dual.apply(g, n.t)?);
    }
    Ok(VerificationReport::new(
        IdentityKind::Ibp1d,
        lhs.value(),
        rhs.value(),
        0.0,
        alpha,
        kernel.label(),
        vec![pset.to_string()],
        *rule,
        ReportInputs { f: String::new(), g: g.label().to_string(), eta: eta.label().to_string() },
        &[],
    ))
}

/// A fully specified identity check, minus the quadrature rule.
#[derive(Debug, Clone)]
pub struct IdentityCase<F = KernelSpec> {
    pub kind: IdentityKind,
    pub f: FuncSpec,
    pub g: FuncSpec,
    pub eta1: FuncSpec,
    /// Ignored by the Green variants.
    pub eta2: FuncSpec,
    pub alpha: f64,
    pub p1: ParameterSet,
    pub p2: ParameterSet,
    pub kernel: F,
    pub rect: Rectangle,
}

impl<F: KernelFamily> IdentityCase<F> {
    pub fn verify(&self, rule: &QuadratureRule) -> Result<VerificationReport> {
        match self.kind {
            IdentityKind::Ibp2d => IbpSetup::new(self.alpha, &self.kernel, &self.rect, rule)?
                .verify(&self.f, &self.g, &self.eta1, &self.eta2, &self.p1, &self.p2),
            IdentityKind::Green => GreenSetup::new(self.alpha, &self.kernel, &self.rect, rule)?
                .verify(&self.f, &self.g, &self.eta1, &self.p1, &self.p2),
            IdentityKind::GreenRlCorollary => {
                verify_green_rl_corollary(&self.f, &self.g, &self.eta1, self.alpha, &self.rect, rule)
            }
            IdentityKind::Ibp1d => Err(Error::domain("one-variable integration by parts is not a rectangle identity")),
        }
    }
}

/// One report per rule; node counts must increase strictly.
pub fn convergence_study<F: KernelFamily>(
    case: &IdentityCase<F>,
    rules: &[QuadratureRule],
) -> Result<Vec<VerificationReport>> {
    if rules.windows(2).any(|w| w[1].total_nodes() <= w[0].total_nodes()) {
        return Err(Error::domain("rule sequence must be strictly increasing in node count"));
    }
    rules.iter().map(|r| case.verify(r)).collect()
}

/// One function quadruple of the fixed corpus and the rectangle it lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusFunctions {
    pub f: &'static str,
    pub g: &'static str,
    pub eta1: &'static str,
    pub eta2: &'static str,
    pub rect: [f64; 4],
}

pub const CORPUS_FUNCTIONS: [CorpusFunctions; 8] = [
    CorpusFunctions { f: "t1 + t2", g: "t1*t2", eta1: "sin(t1)*t2", eta2: "t1^2", rect: [0.0, 1.0, 0.0, 1.0] },
    CorpusFunctions { f: "1", g: "1", eta1: "1", eta2: "1", rect: [0.0, 1.0, 0.0, 1.0] },
    CorpusFunctions { f: "t1^2 - t2", g: "t2^3 + t1", eta1: "t1*t2^2", eta2: "t1 - t2", rect: [0.0, 1.0, 0.0, 1.0] },
    CorpusFunctions {
        f: "exp(t1)*cos(t2)",
        g: "sin(t1 + t2)",
        eta1: "cos(t1)*exp(-t2)",
        eta2: "t1*t2",
        rect: [0.0, 1.0, 0.0, 1.0],
    },
    CorpusFunctions {
        f: "t1^3 - 2*t1*t2",
        g: "1 + t2^2",
        eta1: "t1^2*t2",
        eta2: "t2 - t1^2",
        rect: [-1.0, 0.5, 0.25, 2.0],
    },
    CorpusFunctions {
        f: "sin(2*t1)*t2",
        g: "cos(t1 - t2)",
        eta1: "exp(t1*t2/2)",
        eta2: "sin(t2)",
        rect: [0.5, 2.0, -0.5, 1.0],
    },
    CorpusFunctions {
        f: "exp(t2) + t1",
        g: "t1^2*t2",
        eta1: "t1*(1 - t1)*t2*(1 - t2)",
        eta2: "t1*(1 - t1)",
        rect: [0.0, 1.0, 0.0, 1.0],
    },
    CorpusFunctions {
        f: "t1^4 + t2^4",
        g: "exp(-t1^2 - t2^2)",
        eta1: "1 + t1 + t2",
        eta2: "(t1 + 1)*(t2 + 2)",
        rect: [1.0, 3.0, 0.0, 1.5],
    },
];

pub const CORPUS_ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];

pub const CORPUS_SHAPES: [PsetShape; 3] = [PsetShape::Left, PsetShape::Right, PsetShape::Mixed { p: 0.5, q: 0.5 }];

pub const CORPUS_KERNELS: [KernelSpec; 2] = [KernelSpec::RiemannLiouville, KernelSpec::Tempered { lambda: 1.0 }];

/// One entry of the corpus: a quadruple, an order, a p-set shape used on
/// both axes and a kernel family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusEntry {
    pub functions: CorpusFunctions,
    pub alpha: f64,
    pub shape: PsetShape,
    pub kernel: KernelSpec,
}

impl CorpusEntry {
    pub fn rect(&self) -> Rectangle {
        let [a1, b1, a2, b2] = self.functions.rect;
        Rectangle { a1, b1, a2, b2 }
    }

    /// The identity case for `kind`; Green variants use `η = η1`.
    pub fn case(&self, kind: IdentityKind) -> Result<IdentityCase> {
        let r = self.rect();
        let fs = &self.functions;
        Ok(IdentityCase {
            kind,
            f: FuncSpec::parse(fs.f, 2)?,
            g: FuncSpec::parse(fs.g, 2)?,
            eta1: FuncSpec::parse(fs.eta1, 2)?,
            eta2: FuncSpec::parse(fs.eta2, 2)?,
            alpha: self.alpha,
            p1: self.shape.on(r.a1, r.b1)?,
            p2: self.shape.on(r.a2, r.b2)?,
            kernel: self.kernel,
            rect: r,
        })
    }
}

/// The full corpus in its fixed order: quadruple, then order, then p-set
/// shape, then kernel.
pub fn corpus() -> Vec<CorpusEntry> {
    let mut out = Vec::with_capacity(CORPUS_FUNCTIONS.len() * 18);
    for functions in CORPUS_FUNCTIONS {
        for alpha in CORPUS_ALPHAS {
            for shape in CORPUS_SHAPES {
                for kernel in CORPUS_KERNELS {
                    out.push(CorpusEntry { functions, alpha, shape, kernel });
                }
            }
        }
    }
    out
}

/// Run `kind` over `entries` with one rule. Grid matrices are built once per
/// (order, rectangle, kernel) and grid samples once per function quadruple;
/// reports come back in the order of `entries`.
pub fn run_corpus(
    entries: &[CorpusEntry],
    kind: IdentityKind,
    rule: &QuadratureRule,
) -> Result<Vec<VerificationReport>> {
    let mut slots: Vec<Option<VerificationReport>> = vec![None; entries.len()];
    let mut done = vec![false; entries.len()];
    let grid_key = |e: &CorpusEntry| (e.alpha.to_bits(), e.functions.rect.map(f64::to_bits));
    for i in 0..entries.len() {
        if done[i] {
            continue;
        }
        let k0 = grid_key(&entries[i]);
        let group: Vec<usize> = (i..entries.len()).filter(|&j| !done[j] && grid_key(&entries[j]) == k0).collect();
        match kind {
            IdentityKind::Ibp2d => run_ibp_group(entries, &group, rule, &mut slots)?,
            IdentityKind::Green | IdentityKind::GreenRlCorollary => {
                run_green_group(entries, &group, kind, rule, &mut slots)?
            }
            IdentityKind::Ibp1d => return Err(Error::domain("the corpus holds rectangle identities only")),
        }
        for j in group {
            done[j] = true;
        }
    }
    Ok(slots.into_iter().map(|r| r.expect("every corpus slot is filled")).collect())
}

/// Distinct values of `key` over `group`, in first-seen order.
fn distinct<T: PartialEq>(entries: &[CorpusEntry], group: &[usize], key: impl Fn(&CorpusEntry) -> T) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for &j in group {
        let k = key(&entries[j]);
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

fn run_ibp_group(
    entries: &[CorpusEntry],
    group: &[usize],
    rule: &QuadratureRule,
    slots: &mut [Option<VerificationReport>],
) -> Result<()> {
    let e0 = &entries[group[0]];
    for kernel in distinct(entries, group, |e| e.kernel) {
        let setup = IbpSetup::new(e0.alpha, &kernel, &e0.rect(), rule)?;
        for &j in group.iter().filter(|&&j| entries[j].kernel == kernel) {
            let c = entries[j].case(IdentityKind::Ibp2d)?;
            slots[j] = Some(setup.verify(&c.f, &c.g, &c.eta1, &c.eta2, &c.p1, &c.p2)?);
        }
    }
    Ok(())
}

fn run_green_group(
    entries: &[CorpusEntry],
    group: &[usize],
    kind: IdentityKind,
    rule: &QuadratureRule,
    slots: &mut [Option<VerificationReport>],
) -> Result<()> {
    let e0 = &entries[group[0]];
    let kernels = distinct(entries, group, |e| e.kernel);
    let setups = kernels.iter().map(|k| GreenSetup::new(e0.alpha, k, &e0.rect(), rule)).collect::<Result<Vec<_>>>()?;
    for functions in distinct(entries, group, |e| e.functions) {
        let members: Vec<usize> = group.iter().copied().filter(|&j| entries[j].functions == functions).collect();
        let c0 = entries[members[0]].case(kind)?;
        let samples = setups[0].samples(&c0.f, &c0.g, &c0.eta1)?;
        for (kernel, setup) in kernels.iter().zip(&setups) {
            debug_assert!(setup.shares_grids(&setups[0]));
            let pieces = setup.pieces(&samples, &c0.eta1)?;
            for &j in members.iter().filter(|&&j| entries[j].kernel == *kernel) {
                let c = entries[j].case(kind)?;
                let inputs = inputs3(&c.f, &c.g, &c.eta1);
                slots[j] = Some(if kind == IdentityKind::Green {
                    setup.green_report(&pieces, &c.p1, &c.p2, inputs)
                } else {
                    setup.corollary_report(&pieces, inputs)?
                });
            }
        }
    }
    Ok(())
}
