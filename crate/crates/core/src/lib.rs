//! Odd Chern character degrees of matrix-valued maps on spheres and product
//! spheres, super-connection Chern forms on boundary models, and the
//! localization identities relating them.
//!
//! The crate is organised bottom-up:
//!
//! - [`forms`]: graded exterior algebra of matrix-valued forms at a point.
//! - [`geometry`]: charted spheres, quadrature, smooth maps, exterior
//!   derivative, integration and the collapse map.
//! - [`oddchern`]: Maurer-Cartan forms, the odd Chern character, Chern-Simons
//!   forms, transgression and the degree functionals.
//! - [`superconn`]: super-connection forms, the transgression form γ and the
//!   localization formulas.

pub mod error;
pub mod forms;
pub mod geometry;
pub mod linalg;
pub mod oddchern;
pub mod superconn;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
