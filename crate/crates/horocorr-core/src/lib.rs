//! Geometry kernel for the `horocorr` toolkit.
//!
//! The crate implements a correspondence between conformal metrics
//! `e^{2ρ} g_{S^n}` on domains of the round sphere and hypersurfaces of
//! hyperbolic space `H^{n+1}`, realized in the Minkowski hyperboloid model:
//!
//! * [`lorentz`] — Minkowski linear algebra, model membership, Poincaré-ball
//!   conversion;
//! * [`sphere`] — calculus on `S^n`: charts, fields, gradients, covariant
//!   Hessians, parameter grids;
//! * [`conformal`] — the curvature 2-tensor of a conformal factor, its
//!   eigenvalues, boundary-divergence and completeness diagnostics, and the
//!   gradient-bound constant construction;
//! * [`correspondence`] — metric → hypersurface mesh and back, the λ–κ
//!   dictionary, finite-difference principal curvatures, convexity
//!   classification;
//! * [`flow`] — geodesic normal flow, Riccati curvature evolution,
//!   flow-invariance checks, embedding-time search;
//! * [`embed`] — triangle-mesh self-intersection detection in the ball model;
//! * [`catalog`] — named analytic example metrics and reference meshes with
//!   machine-checkable expectations;
//! * [`report`] — serializable result types (`report/v1`, `config/v1`);
//! * [`acceptance`] — the verification suite behind `horocorr verify`.
//!
//! Dimension `n` (the sphere dimension; hypersurfaces live in `H^{n+1}`) is a
//! runtime parameter, `n ≥ 2`.

pub mod acceptance;
pub mod catalog;
pub mod conformal;
pub mod correspondence;
pub mod eigen;
pub mod embed;
mod error;
pub mod flow;
pub mod lorentz;
pub mod mesh_io;
pub mod report;
pub mod sphere;
pub mod tolerances;

pub use error::{Error, Result};
