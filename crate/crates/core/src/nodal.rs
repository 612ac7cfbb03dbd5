//! Product-integration matrices for the left convolution half on a
//! [`GradedGrid`].
//!
//! A row for a target point expresses `∫_0^d k(x) f(t - x) dx` as a
//! combination of the samples of `f` at the grid nodes, with `f`
//! represented by its piecewise Lagrange interpolant in the substitution
//! variable `u`. Panels far from the target use the grid's own Gauss
//! weights; the panel containing it carries the singularity in Gauss–Jacobi
//! weights, and panels that are close but not touching are split
//! geometrically toward the target.
//!
//! The grid is mirror symmetric, so the right half `∫_0^e k(x) f(t + x) dx`
//! at node `i` is the left half of the reflected samples at node `N-1-i`;
//! no separate right-half rows are built.

use alloc::vec;
use alloc::vec::Vec;
use ndarray::Array2;

use crate::error::Result;
use crate::math::powf;
use crate::ops1d::Stencil;
use crate::quad::{
    barycentric_weights, gauss_jacobi, inverse_substitution, lagrange_basis, substitution, substitution_difference,
    GaussRule, GradedGrid,
};
use crate::specfun::DifferenceKernel;

pub(crate) struct RowBuilder<'a, K: ?Sized> {
    grid: &'a GradedGrid,
    kernel: &'a K,
    sigma: f64,
    jacobi: GaussRule,
    end_jacobi: GaussRule,
    end_exponent: f64,
    bary: Vec<f64>,
}

impl<'a, K: DifferenceKernel + ?Sized> RowBuilder<'a, K> {
    pub fn new(grid: &'a GradedGrid, kernel: &'a K) -> Result<Self> {
        let sigma = kernel.singularity_exponent();
        // weight (1-ξ)^{-σ}: singular at the right end of the segment
        let jacobi = gauss_jacobi(grid.order(), -sigma, 0.0)?;
        // at an end of the interval φ' vanishes and the distance grows like (1-u)^s
        let end_exponent = grid.strength() * (1.0 - sigma) - 1.0;
        let end_jacobi = gauss_jacobi(grid.order(), end_exponent, 0.0)?;
        let bary = barycentric_weights(&grid.reference().nodes);
        Ok(RowBuilder { grid, kernel, sigma, jacobi, end_jacobi, end_exponent, bary })
    }

    /// Add `scale ×` the row for the target at distance `d` from `lo` and
    /// `e` from `hi`.
    pub fn add_left(&self, d: f64, e: f64, scale: f64, out: &mut [f64]) {
        if !(d > 0.0) || scale == 0.0 {
            return;
        }
        let n = self.grid.order();
        let panels = self.grid.panels();
        let pf = panels as f64;
        let width = 1.0 / pf;
        let s = self.grid.strength();
        let (vs, ws) = if e > 0.0 { inverse_substitution(d, e, s) } else { (1.0, 0.0) };
        let target = Target { vs, ws, scale, pf };
        let jstar = ((vs * pf) as usize).min(panels - 1);
        let mut basis = vec![0.0; n];

        let c = jstar as f64 * width;
        let ell = vs - c;
        if e == 0.0 {
            self.end_segment(&target, jstar, ell, &mut basis, out);
        } else if ell > 0.0 {
            self.jacobi_segment(&target, jstar, ell, 0.0, &mut basis, out);
        }

        let gl = self.grid.reference();
        for j in 0..jstar {
            let ej = (j + 1) as f64 * width;
            let gap = vs - ej;
            if gap >= width {
                for (m, node) in self.grid.nodes().iter().enumerate().skip(j * n).take(n) {
                    let dist = if d <= e { d - node.from_lo } else { node.from_hi - e };
                    out[m] += scale * node.weight * self.kernel.evaluate(dist);
                }
            } else if gap <= 1e-12 * width {
                self.jacobi_segment(&target, j, width, gap, &mut basis, out);
            } else {
                // pieces [ej - (ob + piece), ej - ob], each as long as its distance to the target
                let cj = j as f64 * width;
                let mut ob = 0.0;
                while ob < width {
                    let piece = (gap + ob).min(width - ob);
                    for (xi, w) in gl.nodes.iter().zip(&gl.weights) {
                        let o = ob + 0.5 * piece * (1.0 - xi);
                        let local = width - o;
                        let delta = gap + o;
                        let pt = Point {
                            panel: j,
                            xloc: 2.0 * local * pf - 1.0,
                            u: cj + local,
                            u_rev: ws + delta,
                            delta,
                            omega: 0.5 * piece * w,
                            singular: Singular::None,
                        };
                        self.emit(&target, &pt, &mut basis, out);
                    }
                    ob += piece;
                }
            }
        }
    }

    fn emit(&self, target: &Target, pt: &Point, basis: &mut [f64], out: &mut [f64]) {
        let s = self.grid.strength();
        let len = self.grid.length();
        let dist = len * substitution_difference(pt.u, pt.u_rev, target.vs, target.ws, pt.delta, s);
        let (_, _, dphi) = substitution(pt.u, pt.u_rev, s);
        let kern = match pt.singular {
            Singular::Interior(db) if self.sigma > 0.0 => self.kernel.regular_part(dist) * powf(dist / db, -self.sigma),
            Singular::End(db) => self.kernel.evaluate(dist) * powf(db, -self.end_exponent),
            _ => self.kernel.evaluate(dist),
        };
        let factor = target.scale * pt.omega * kern * len * dphi;
        lagrange_basis(&self.grid.reference().nodes, &self.bary, pt.xloc, basis);
        let n = basis.len();
        for (o, b) in out[pt.panel * n..(pt.panel + 1) * n].iter_mut().zip(basis.iter()) {
            *o += factor * b;
        }
    }

    /// Jacobi rule on `[c_j, c_j + ell]`, singular at its right end, which
    /// sits `gap` before the target.
    fn jacobi_segment(&self, target: &Target, j: usize, ell: f64, gap: f64, basis: &mut [f64], out: &mut [f64]) {
        let c = j as f64 / target.pf;
        let scale = powf(0.5 * ell, 1.0 - self.sigma);
        for (xi, w) in self.jacobi.nodes.iter().zip(&self.jacobi.weights) {
            let local = 0.5 * ell * (1.0 + xi);
            let db = 0.5 * ell * (1.0 - xi);
            let delta = db + gap;
            let pt = Point {
                panel: j,
                xloc: 2.0 * local * target.pf - 1.0,
                u: c + local,
                u_rev: target.ws + delta,
                delta,
                omega: scale * w,
                singular: Singular::Interior(db),
            };
            self.emit(target, &pt, basis, out);
        }
    }

    /// The last panel when the target is the end `u = 1` itself.
    fn end_segment(&self, target: &Target, j: usize, ell: f64, basis: &mut [f64], out: &mut [f64]) {
        let c = j as f64 / target.pf;
        let scale = powf(0.5 * ell, 1.0 + self.end_exponent);
        for (xi, w) in self.end_jacobi.nodes.iter().zip(&self.end_jacobi.weights) {
            let local = 0.5 * ell * (1.0 + xi);
            let db = 0.5 * ell * (1.0 - xi);
            let pt = Point {
                panel: j,
                xloc: 2.0 * local * target.pf - 1.0,
                u: c + local,
                u_rev: db,
                delta: db,
                omega: scale * w,
                singular: Singular::End(db),
            };
            self.emit(target, &pt, basis, out);
        }
    }

    /// The left half with the grid nodes as targets.
    pub fn matrix(&self) -> Array2<f64> {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let mut m = Array2::zeros((n, n));
        for (i, node) in nodes.iter().enumerate() {
            self.add_left(node.from_lo, node.from_hi, 1.0, m.row_mut(i).into_slice().unwrap());
        }
        m
    }

    /// `d/dd` of the left half at the grid nodes, by the same difference
    /// stencils as the pointwise A-op.
    pub fn derivative_matrix(&self) -> Array2<f64> {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        let len = self.grid.length();
        let spread = Stencil::spread(self.grid.panels());
        let mut m = Array2::zeros((n, n));
        for (i, node) in nodes.iter().enumerate() {
            let (d, e) = (node.from_lo, node.from_hi);
            let st = Stencil::for_distances(d, e, len, spread);
            let row = m.row_mut(i).into_slice().unwrap();
            for &(k, c) in st.taps {
                self.add_left(d + k * st.h, e - k * st.h, c / st.h, row);
            }
        }
        m
    }

    /// The left half over the whole interval, evaluated at `t = hi`.
    pub fn end_row(&self) -> Vec<f64> {
        let mut row = vec![0.0; self.grid.len()];
        self.add_left(self.grid.length(), 0.0, 1.0, &mut row);
        row
    }
}

struct Target {
    vs: f64,
    ws: f64,
    scale: f64,
    pf: f64,
}

/// A quadrature point in `u` inside panel `panel`, `delta` before the target.
struct Point {
    panel: usize,
    xloc: f64,
    u: f64,
    u_rev: f64,
    delta: f64,
    omega: f64,
    singular: Singular,
}

#[derive(Clone, Copy)]
enum Singular {
    None,
    Interior(f64),
    End(f64),
}
