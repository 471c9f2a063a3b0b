//! Numerical toolkit for variational truncated Hilbert transforms along the
//! moment curve `γ(t) = (t, t², …, t^d)` and their sparse domination.
//!
//! * [`curve`]: the curve, anisotropic dilations and the gauge.
//! * [`grid`]: shifted dyadic γ-grids with exact containment.
//! * [`lattice`]: nonnegative functions sampled on a uniform lattice.
//! * [`operators`]: truncated transforms, the `r`-variation and `T`.
//! * [`tail`]: the localized maximal operator and the pointwise bound.
//! * [`cells`]: lattice cells of a cube, used for exact measure counts.
//! * [`sparse`]: stopping times, sparse families and the domination check.
//! * [`spectral`]: transforms of the single-scale measures.

pub mod cells;
pub mod curve;
mod error;
pub mod grid;
pub mod lattice;
pub mod operators;
pub mod quadrature;
pub mod sparse;
pub mod spectral;
pub mod tail;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/curves-and-grids.md")]
mod book_curves_and_grids {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/lattice.md")]
mod book_lattice {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/variation.md")]
mod book_variation {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/tail-maximal.md")]
mod book_tail_maximal {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sparse-families.md")]
mod book_sparse_families {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fourier.md")]
mod book_fourier {}
