//! Mutually unbiased bases (MUBs) through their projectors.
//!
//! Two orthonormal bases of `C^d` are unbiased when every cross overlap
//! satisfies `|<a alpha|b beta>|^2 = 1/d`. Writing each basis vector as its
//! projector `M = |a alpha><a alpha|` and flattening the matrix into a
//! vector `w` of `C^{d^2}` turns that condition into the modulus-free
//! `w(a alpha) . w(b beta) = 1/d`. This crate builds on that correspondence:
//!
//! - [`algebra`]: projectors, w-vectors and their inner products.
//! - [`construct`]: the closed-form complete family (`d + 1` bases) for prime `d`.
//! - [`gauss`]: generalized quadratic Gauss sums backing that construction.
//! - [`verify`]: certificates on w-vectors and, independently, on state vectors.
//! - [`reconstruct`]: Hermitian Jacobi eigensolver; states from projectors.
//! - [`search`]: penalty-method search for families in any dimension.
//! - [`io`] and [`cli`]: JSON documents and the `mub` command line.
//!
//! ```
//! use mub_core::construct::{build_family, ConstructionRequest};
//! use mub_core::verify::verify_family;
//!
//! let family = build_family(&ConstructionRequest::complete(5)).unwrap();
//! assert_eq!(family.num_bases(), 6);
//! assert!(verify_family(&family, 1e-10).unwrap().passed);
//! ```

pub mod algebra;
pub mod cli;
pub mod construct;
pub mod error;
pub mod gauss;
pub mod io;
pub mod reconstruct;
pub mod search;
pub mod verify;

pub use algebra::{MubFamily, ProjectorMatrix, StateVector, WVector, C64};
pub use error::{MubError, Result};
