//! Partial operators on a rectangle, computed by freezing the inactive
//! coordinate and applying the one-variable operator to the slice.

use alloc::format;

use crate::error::{Error, Result};
use crate::expr::FuncSpec;
use crate::ops1d::{OperatorKind, OperatorRequest};
use crate::quad::Rectangle;
use crate::specfun::{KernelFamily, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    T1,
    T2,
}

impl Axis {
    /// 0 for `t1`, 1 for `t2`.
    pub fn index(&self) -> usize {
        match self {
            Axis::T1 => 0,
            Axis::T2 => 1,
        }
    }

    pub fn from_number(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Axis::T1),
            2 => Ok(Axis::T2),
            _ => Err(Error::domain(format!("axis must be 1 or 2, got {n}"))),
        }
    }
}

/// An operator acting along one axis of a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialRequest<F = KernelSpec> {
    pub axis: Axis,
    pub base: OperatorRequest<F>,
    pub rect: Rectangle,
}

impl<F: KernelFamily> PartialRequest<F> {
    pub fn new(axis: Axis, base: OperatorRequest<F>, rect: Rectangle) -> Result<Self> {
        let (lo, hi) = rect.interval(axis.index() + 1);
        if base.pset.a() != lo || base.pset.b() != hi {
            return Err(Error::domain(format!(
                "p-set interval [{}, {}] does not match the rectangle extent [{lo}, {hi}] along t{}",
                base.pset.a(),
                base.pset.b(),
                axis.index() + 1
            )));
        }
        Ok(PartialRequest { axis, base, rect })
    }

    fn evaluate(&self, kind: OperatorKind, f: &FuncSpec, t1: f64, t2: f64) -> Result<f64> {
        if self.base.kind != kind {
            return Err(Error::domain(format!(
                "request is for the partial {}-op, not the partial {}-op",
                self.base.kind.name(),
                kind.name()
            )));
        }
        if f.arity() != 2 {
            return Err(Error::Arity { expected: 2, found: f.arity() });
        }
        if !self.rect.contains(t1, t2) {
            return Err(Error::domain(format!("point ({t1}, {t2}) lies outside the rectangle")));
        }
        let (active, frozen) = match self.axis {
            Axis::T1 => (t1, t2),
            Axis::T2 => (t2, t1),
        };
        let slice = f.slice(self.axis.index(), frozen)?;
        self.base.prepare()?.apply(&slice, active)
    }
}

/// `(K^α_{P_{t_i}} f)(t1, t2)`.
pub fn partial_kop<F: KernelFamily>(req: &PartialRequest<F>, f: &FuncSpec, t1: f64, t2: f64) -> Result<f64> {
    req.evaluate(OperatorKind::K, f, t1, t2)
}

/// `(A^α_{P_{t_i}} f)(t1, t2)`; the active coordinate must be interior.
pub fn partial_aop<F: KernelFamily>(req: &PartialRequest<F>, f: &FuncSpec, t1: f64, t2: f64) -> Result<f64> {
    req.evaluate(OperatorKind::A, f, t1, t2)
}

/// `(B^α_{P_{t_i}} f)(t1, t2)` using `∂f/∂t_i`.
pub fn partial_bop<F: KernelFamily>(req: &PartialRequest<F>, f: &FuncSpec, t1: f64, t2: f64) -> Result<f64> {
    req.evaluate(OperatorKind::B, f, t1, t2)
}
