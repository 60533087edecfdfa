//! Central registry of the numerical tolerances used across the crate.
//!
//! Every threshold that a verdict or an invariant check depends on lives
//! here, so reports can quote the exact values and tests pin them in one
//! place. The rationale for each default is noted next to it; the CLI can
//! override the ones exposed through run configuration.

/// Membership tolerance for the hyperboloid / de Sitter / null-cone models.
///
/// Mesh nodes come from closed-form double-precision expressions whose model
/// residuals are exact in exact arithmetic; 1e-9 absorbs accumulated roundoff
/// with several orders of magnitude to spare.
pub const MODEL_TOL: f64 = 1e-9;

/// Unit-norm defect allowed on a sphere point after normalization.
pub const SPHERE_UNIT_TOL: f64 = 1e-12;

/// Tangency defect allowed for tangent vectors (`v · base`).
pub const TANGENT_TOL: f64 = 1e-10;

/// Default finite-difference step (radians) for first derivatives on the
/// sphere. Central differences: truncation ~ step², roundoff ~ ε/step;
/// 1e-4 balances the two in double precision.
pub const FD_GRADIENT_STEP: f64 = 1e-4;

/// Default finite-difference step (radians) for second derivatives, where
/// roundoff grows like ε/step².
pub const FD_HESSIAN_STEP: f64 = 1e-3;

/// Window around the dictionary pole κ = −1 inside which convexity
/// classification refuses to take a side.
pub const KAPPA_POLE_WINDOW: f64 = 1e-9;

/// Default threshold a boundary β-scan must exceed (with a strictly
/// increasing tail) to report divergence.
pub const BETA_DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Default bound for realizability scans of the curvature 2-tensor
/// eigenvalues.
pub const REALIZABILITY_BOUND: f64 = 1.0;

/// Relative search tolerance for the admissible constant `A` in
/// [`crate::conformal::gradient_bound_constants`].
pub const GRADIENT_BOUND_SEARCH_RTOL: f64 = 1e-6;

/// Hard cap on the constant `A`; the search reports failure beyond it
/// instead of silently clamping.
pub const GRADIENT_BOUND_SEARCH_CAP: f64 = 1e300;

/// Spacing of the time lattice on which minimal flow times are reported.
pub const FLOW_TIME_LATTICE: f64 = 1e-3;

/// Window around `1 + κ·tanh t = 0` treated as a focal-point crossing by the
/// curvature evolution (the Möbius law has a pole there).
pub const RICCATI_POLE_WINDOW: f64 = 1e-12;

/// Eigenvalue headroom below 1/2 required of the minimal flow time used by
/// the embedding-time search.
pub const FLOW_SEARCH_MARGIN: f64 = 0.05;

/// Node-wise Gauss-map displacement allowed under the normal flow (the flow
/// fixes the Gauss map exactly; this absorbs representation roundoff).
pub const GAUSS_FLOW_TOL: f64 = 1e-12;

/// Relative error allowed on the `e^t` scaling of horospherical edge lengths
/// under the normal flow.
pub const EDGE_SCALE_TOL: f64 = 1e-9;

/// Agreement required between finite-difference curvatures of a flowed mesh
/// and the Möbius-evolved curvatures of its base mesh.
pub const CURVATURE_FLOW_TOL: f64 = 1e-3;

/// Gauss-map collision radius for the injectivity probe.
pub const GAUSS_COLLISION_EPS: f64 = 1e-6;

/// Triangles with area below this fraction of the largest mesh triangle are
/// excluded from intersection testing (and counted in the verdict metadata).
pub const DEGENERATE_TRIANGLE_AREA_FRACTION: f64 = 1e-14;

/// Default margin (radians) kept between grid nodes and the domain boundary.
pub const DEFAULT_GRID_MARGIN: f64 = 0.05;

/// Margin (radians) for the flat punctured-sphere factor, whose conformal
/// scale `e^ρ = 1/(1 − cos θ)` blows up quadratically at the puncture —
/// much faster than the cylindric `1/sin θ`. At θ = 0.2 the scale is ≈ 50,
/// which keeps the hyperboloid coordinates of meshes at flow time 3 small
/// enough (~5e2) that the quadratic model invariants stay verifiable to
/// 1e−9 in double precision; at θ = 0.05 the scale is 800 and rounding of
/// coordinates ~8e3 alone perturbs ⟨φ,φ⟩ by ~3e−8.
pub const FLAT_PUNCTURED_MARGIN: f64 = 0.2;

/// Half-width (radians) of the seam band where the two stereographic atlas
/// charts hand off, centered on the equator of the atlas axis.
pub const ATLAS_SEAM_HALF_WIDTH: f64 = 0.2;

/// Polar-angle trim (radians) applied at a coordinate singularity of a polar
/// grid chart that is *not* a domain boundary (e.g. the antipode of a single
/// puncture): the point is in the domain but the chart degenerates there.
pub const POLAR_CHART_TRIM: f64 = 0.05;
