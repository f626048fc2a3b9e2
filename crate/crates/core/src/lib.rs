//! Virtual element and Voronoi-cell lattice solvers for two-dimensional,
//! linear-elastic multiphase composites.
//!
//! Both discretizations are built from the same clipped Voronoi
//! tessellation: the Voronoi cells become first-order virtual elements, and
//! the dual graph of generator points becomes a rigid-body-spring lattice.
//!
//! Strain and stress vectors use Voigt order with engineering shear,
//! `(εxx, εyy, γxy)` and `(σxx, σyy, τxy)`, where `γxy = 2 εxy`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod materials;
pub mod mesh;
pub mod system;
pub mod vclm;
pub mod vem;

pub use error::{Error, Result};

/// Planar position.
pub type Point = nalgebra::Point2<f64>;
/// Planar vector (displacement, normal, force).
pub type Vec2 = nalgebra::Vector2<f64>;
