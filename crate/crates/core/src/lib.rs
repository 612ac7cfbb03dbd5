//! Generalized fractional operators over difference kernels.
//!
//! The operators are indexed by a parameter set `⟨a, b, p, q⟩` and a
//! difference kernel `k`:
//!
//! * the K-op `p ∫_a^t k(t-τ) f(τ) dτ + q ∫_t^b k(τ-t) f(τ) dτ`,
//! * the A-op `d/dt ∘ K` (Riemann–Liouville type),
//! * the B-op `K ∘ d/dt` (Caputo type),
//!
//! with the kernel of the derivative operators instantiated at order `1 - α`.
//! Partial operators on a rectangle act slice by slice through the 1D ones.
//! The [`identities`] module checks the two-variable integration-by-parts
//! formula and the generalized Green formula numerically and reports residuals.
//!
//! ## no_std
//!
//! The crate is `no_std` and needs only `alloc`. Enable the `std` feature to
//! get runtime CPU feature detection in the dense matrix products.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod expr;
pub mod identities;
mod math;
mod nodal;
pub mod ops1d;
pub mod ops2d;
pub mod pset;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use expr::{parse_expression, Expr, FuncSpec, Smoothness};
pub use identities::{IdentityKind, VerificationReport};
pub use ops1d::{aop, bop, kop, OperatorKind, OperatorRequest};
pub use ops2d::{partial_aop, partial_bop, partial_kop, Axis, PartialRequest};
pub use pset::ParameterSet;
pub use quad::{QuadratureRule, Rectangle, RuleFamily};
pub use specfun::{gamma, rl_kernel, DifferenceKernel, KernelFamily, KernelSpec};
