//! The two-way correspondence between conformal metrics on sphere domains and
//! immersed hypersurfaces of hyperbolic space, sampled over a parameter grid:
//!
//! * `metric_to_hypersurface` builds the immersion `φ`, its unit normal `η`,
//!   and the light-cone map `ψ = φ − η` from the log conformal factor;
//! * `hypersurface_to_metric` reads the Gauss map and support function back
//!   off a mesh;
//! * the `λ ↔ κ` dictionary converts between eigenvalues of the metric's
//!   tensor `P` and principal curvatures;
//! * `principal_curvatures_fd` is an independent finite-difference curvature
//!   oracle (first/second fundamental forms, then a generalized symmetric
//!   eigenproblem);
//! * convexity classification, horospherical edge lengths, and a Gauss-map
//!   injectivity probe round out the mesh diagnostics.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::conformal::{p_tensor, ConformalMetric};
use crate::lorentz::MinkowskiVector;
use crate::sphere::grid::ParameterGrid;
use crate::sphere::{spherical_distance, SpherePoint};
use crate::tolerances::{FLOW_TIME_LATTICE, GAUSS_COLLISION_EPS, KAPPA_POLE_WINDOW};
use crate::{Error, Result};

/// Sign convention of the finite-difference shape operator.
///
/// With `η` the outward normal (the one produced by `φ − ψ` with
/// `ψ = e^{σ}(1, x)`), the raw generalized eigenproblem
/// `⟨η, ∂²φ⟩·v = κ·⟨∂φ, ∂φ⟩·v` already yields `κ = +coth t` on the geodesic
/// sphere of radius `t` about the base point — the calibration surface — so
/// no flip is applied. The constant exists so the calibration is explicit,
/// tested, and in one place.
pub const SHAPE_OPERATOR_SIGN: f64 = 1.0;

/// A hypersurface sampled over a parameter grid: per node the immersion point
/// `φ` (on the hyperboloid), outward unit normal `η` (de Sitter), light-cone
/// map `ψ = φ − η` (future null cone), horospherical support `σ` with
/// `ψ₀ = e^{σ}`, and Gauss map (the null direction of `ψ` on the sphere).
/// Principal curvatures are absent until populated; boundary nodes stay
/// absent because no complete stencil exists there.
#[derive(Clone, Debug)]
pub struct HypersurfaceMesh {
    pub grid: ParameterGrid,
    pub phi: Vec<MinkowskiVector>,
    pub eta: Vec<MinkowskiVector>,
    pub psi: Vec<MinkowskiVector>,
    pub support: Vec<f64>,
    pub gauss: Vec<SpherePoint>,
    pub kappas: Vec<Option<Vec<f64>>>,
    pub flow_time: f64,
    pub label: String,
}

impl HypersurfaceMesh {
    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    /// Checks the model invariants at every node:
    /// `⟨φ,φ⟩ = −1`, `⟨η,η⟩ = 1`, `⟨φ,η⟩ = 0`, `⟨φ,ψ⟩ = −1`, `ψ = φ − η`,
    /// `ψ₀ = e^{support} > 0`, and the Gauss map is `ψ`'s null direction —
    /// all within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for idx in 0..self.node_count() {
            let phi = &self.phi[idx];
            let eta = &self.eta[idx];
            let psi = &self.psi[idx];
            let checks = [
                ("⟨φ,φ⟩ + 1", mink(phi.coords(), phi.coords()) + 1.0),
                ("⟨η,η⟩ − 1", mink(eta.coords(), eta.coords()) - 1.0),
                ("⟨φ,η⟩", mink(phi.coords(), eta.coords())),
                ("⟨φ,ψ⟩ + 1", mink(phi.coords(), psi.coords()) + 1.0),
            ];
            for (name, residual) in checks {
                if residual.abs() > tol {
                    return Err(Error::OffModel {
                        model: format!("{name} at node {idx}"),
                        residual: residual.abs(),
                        tol,
                    });
                }
            }
            for ((p, e), s) in phi.coords().iter().zip(eta.coords()).zip(psi.coords()) {
                if (p - e - s).abs() > tol {
                    return Err(Error::OffModel {
                        model: format!("ψ = φ − η at node {idx}"),
                        residual: (p - e - s).abs(),
                        tol,
                    });
                }
            }
            let p0 = psi.time();
            if p0 <= 0.0 {
                return Err(Error::OffModel {
                    model: format!("ψ₀ > 0 at node {idx}"),
                    residual: p0,
                    tol,
                });
            }
            if (p0.ln() - self.support[idx]).abs() > tol {
                return Err(Error::OffModel {
                    model: format!("ψ₀ = e^support at node {idx}"),
                    residual: (p0.ln() - self.support[idx]).abs(),
                    tol,
                });
            }
            for (g, s) in self.gauss[idx].coords().iter().zip(psi.spatial()) {
                if (g - s / p0).abs() > tol {
                    return Err(Error::OffModel {
                        model: format!("gauss = ψ_spatial/ψ₀ at node {idx}"),
                        residual: (g - s / p0).abs(),
                        tol,
                    });
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn mink(u: &[f64], v: &[f64]) -> f64 {
    -u[0] * v[0]
        + u[1..]
            .iter()
            .zip(&v[1..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
}

/// Immerse the grid at flow time `t`: per node `x`, with `σ = ρ(x) + t` and
/// `g = ∇ρ(x)`,
///
/// ```text
/// φ = (e^σ/2)·(1 + e^{−2σ}(1 + |g|²))·(1, x) + e^{−σ}·(0, −x + g)
/// ψ = e^σ·(1, x),      η = φ − ψ,      support = σ,      gauss = x.
/// ```
pub fn metric_to_hypersurface(
    metric: &ConformalMetric,
    t: f64,
    grid: &ParameterGrid,
) -> Result<HypersurfaceMesh> {
    if grid.nodes.is_empty() {
        return Err(Error::EmptyGrid("cannot immerse an empty grid".into()));
    }
    let per_node: Vec<(MinkowskiVector, MinkowskiVector, MinkowskiVector, f64)> = grid
        .nodes
        .par_iter()
        .map(|node| {
            let x = &node.point;
            if !metric.domain().contains(x) {
                return Err(Error::OutsideDomain(format!(
                    "grid node {:?} lies outside {}",
                    x.coords(),
                    metric.domain().describe()
                )));
            }
            let rho = metric.rho().value(x);
            let grad = metric.rho().gradient(x)?;
            let g = grad.components();
            let g2: f64 = g.iter().map(|v| v * v).sum();
            let sigma = rho + t;
            let es = sigma.exp();
            let ems = (-sigma).exp();
            let a = 0.5 * es * (1.0 + ems * ems * (1.0 + g2));
            let spatial: Vec<f64> = x
                .coords()
                .iter()
                .zip(g)
                .map(|(xc, gc)| a * xc + ems * (gc - xc))
                .collect();
            let phi = MinkowskiVector::from_parts(a, &spatial)?;
            let psi_spatial: Vec<f64> = x.coords().iter().map(|xc| es * xc).collect();
            let psi = MinkowskiVector::from_parts(es, &psi_spatial)?;
            let eta = phi.axpy(-1.0, &psi)?;
            Ok((phi, eta, psi, sigma))
        })
        .collect::<Result<_>>()?;
    let mut phi = Vec::with_capacity(per_node.len());
    let mut eta = Vec::with_capacity(per_node.len());
    let mut psi = Vec::with_capacity(per_node.len());
    let mut support = Vec::with_capacity(per_node.len());
    for (p, e, s, sig) in per_node {
        phi.push(p);
        eta.push(e);
        psi.push(s);
        support.push(sig);
    }
    let gauss: Vec<SpherePoint> = grid.nodes.iter().map(|n| n.point.clone()).collect();
    let kappas = vec![None; grid.node_count()];
    Ok(HypersurfaceMesh {
        grid: grid.clone(),
        phi,
        eta,
        psi,
        support,
        gauss,
        kappas,
        flow_time: t,
        label: metric.label().to_string(),
    })
}

/// Smallest `t ≥ 0` on the `1e−3` lattice with
/// `e^{−2t}·λ_max ≤ 1/2 − margin`, where `λ_max` is the largest eigenvalue of
/// `P` against the metric over the grid. Always exists because the rescaling
/// decays; returns `0` when the bound already holds.
pub fn min_flow_time(metric: &ConformalMetric, grid: &ParameterGrid, margin: f64) -> Result<f64> {
    if !(margin > 0.0 && margin < 0.5) {
        return Err(Error::InvalidInput(format!(
            "margin must lie in (0, 1/2), got {margin}"
        )));
    }
    if grid.nodes.is_empty() {
        return Err(Error::EmptyGrid("min_flow_time needs grid nodes".into()));
    }
    let lambda_max = grid
        .nodes
        .par_iter()
        .map(|node| {
            p_tensor(metric, &node.point)
                .map(|s| *s.metric_eigenvalues.last().expect("n ≥ 1 eigenvalues"))
        })
        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?;
    let target = 0.5 - margin;
    if lambda_max <= target {
        return Ok(0.0);
    }
    let t_star = 0.5 * (lambda_max / target).ln();
    Ok((t_star / FLOW_TIME_LATTICE).ceil() * FLOW_TIME_LATTICE)
}

/// Recover per-node `(gauss, support)` from `φ` and `η` alone:
/// `ψ = φ − η`, `support = ln ψ₀`, `gauss = ψ_spatial/ψ₀`. Applied to
/// [`metric_to_hypersurface`] output this returns `(x, ρ(x) + t)` per node.
pub fn hypersurface_to_metric(mesh: &HypersurfaceMesh) -> Result<Vec<(SpherePoint, f64)>> {
    mesh.phi
        .iter()
        .zip(&mesh.eta)
        .enumerate()
        .map(|(idx, (phi, eta))| {
            let psi = phi.axpy(-1.0, eta)?;
            let p0 = psi.time();
            if p0 <= 0.0 {
                return Err(Error::MathDomain(format!(
                    "ψ₀ = {p0:.6e} ≤ 0 at node {idx}: ψ is not future-pointing \
                     (orientation violation)"
                )));
            }
            let gauss = SpherePoint::new(psi.spatial().iter().map(|c| c / p0).collect())?;
            Ok((gauss, p0.ln()))
        })
        .collect()
}

/// Dictionary direction eigenvalue → curvature: `λ = 1/2 − 1/(1 + κ)`.
/// Monotone increasing on `κ > −1` with image `(−∞, 1/2)`.
pub fn lambda_from_kappa(kappa: f64) -> Result<f64> {
    if (kappa + 1.0).abs() < 1e-12 {
        return Err(Error::MathDomain(format!(
            "curvature dictionary has a pole at κ = −1 (got κ = {kappa})"
        )));
    }
    Ok(0.5 - 1.0 / (1.0 + kappa))
}

/// Dictionary direction curvature ← eigenvalue:
/// `κ = (1/2 + λ)/(1/2 − λ)`, the inverse of [`lambda_from_kappa`] on
/// `κ > −1`; always returns a value `> −1`.
pub fn kappa_from_lambda(lambda: f64) -> Result<f64> {
    if lambda >= 0.5 {
        return Err(Error::MathDomain(format!(
            "λ = {lambda} ≥ 1/2 lies outside the immersion range of the dictionary"
        )));
    }
    Ok((0.5 + lambda) / (0.5 - lambda))
}

const D1_OFFSETS: [isize; 4] = [-2, -1, 1, 2];
const D1_WEIGHTS: [f64; 4] = [1.0, -8.0, 8.0, -1.0];
const D2_OFFSETS: [isize; 5] = [-2, -1, 0, 1, 2];
const D2_WEIGHTS: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

fn add_scaled(acc: &mut [f64], v: &[f64], w: f64) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += w * b;
    }
}

/// Principal curvatures at one node by pure finite differences — independent
/// of the analytic evaluators that built the mesh. Fourth-order centered
/// stencils produce the chart-coordinate derivative vectors `∂ᵢφ` and
/// `∂ᵢ∂ⱼφ`; the fundamental forms are `I_ij = ⟨∂ᵢφ, ∂ⱼφ⟩` and
/// `II_ij = ⟨η, ∂ᵢ∂ⱼφ⟩` (the pairing with `η` kills tangential and `φ`
/// components of the raw second derivative, so no connection correction is
/// needed); the curvatures solve `II·v = κ·I·v`, ascending. See
/// [`SHAPE_OPERATOR_SIGN`] for the orientation calibration.
pub fn principal_curvatures_fd(mesh: &HypersurfaceMesh, node: usize) -> Result<Vec<f64>> {
    let grid = &mesh.grid;
    if node >= grid.node_count() {
        return Err(Error::InvalidInput(format!(
            "node {node} out of range (mesh has {})",
            grid.node_count()
        )));
    }
    if !grid.has_full_box_stencil(node, 2) {
        return Err(Error::InvalidInput(format!(
            "node {node} has no complete radius-2 stencil (boundary node); \
             curvature is not computed there"
        )));
    }
    let chart = &grid.charts[grid.nodes[node].chart];
    let n = chart.dims.len();
    let m = mesh.phi[node].coords().len();
    let mut offsets = vec![0isize; n];

    let mut dphi: Vec<Vec<f64>> = vec![vec![0.0; m]; n];
    for (ax, d) in dphi.iter_mut().enumerate() {
        let h = chart.step[ax];
        for (off, w) in D1_OFFSETS.iter().zip(D1_WEIGHTS) {
            offsets.fill(0);
            offsets[ax] = *off;
            let nb = grid.neighbor(node, &offsets).expect("stencil checked complete");
            add_scaled(d, mesh.phi[nb].coords(), w / (12.0 * h));
        }
    }

    let mut first = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            first[(i, j)] = mink(&dphi[i], &dphi[j]);
        }
    }

    let eta = mesh.eta[node].coords();
    let mut second = DMatrix::zeros(n, n);
    for i in 0..n {
        let h = chart.step[i];
        let mut d2 = vec![0.0; m];
        for (off, w) in D2_OFFSETS.iter().zip(D2_WEIGHTS) {
            offsets.fill(0);
            offsets[i] = *off;
            let nb = grid.neighbor(node, &offsets).expect("stencil checked complete");
            add_scaled(&mut d2, mesh.phi[nb].coords(), w / (12.0 * h * h));
        }
        second[(i, i)] = mink(eta, &d2);
        for j in (i + 1)..n {
            let hj = chart.step[j];
            let mut d2 = vec![0.0; m];
            for (oi, wi) in D1_OFFSETS.iter().zip(D1_WEIGHTS) {
                for (oj, wj) in D1_OFFSETS.iter().zip(D1_WEIGHTS) {
                    offsets.fill(0);
                    offsets[i] = *oi;
                    offsets[j] = *oj;
                    let nb = grid.neighbor(node, &offsets).expect("stencil checked complete");
                    add_scaled(&mut d2, mesh.phi[nb].coords(), wi * wj / (144.0 * h * hj));
                }
            }
            let v = mink(eta, &d2);
            second[(i, j)] = v;
            second[(j, i)] = v;
        }
    }

    let mut kappas: Vec<f64> = crate::eigen::generalized_symmetric_eigenvalues(&second, &first)
        .map_err(|_| {
            Error::MathDomain(format!(
                "first fundamental form is not positive definite at node {node}; \
                 the immersion degenerates there"
            ))
        })?
        .iter()
        .map(|k| SHAPE_OPERATOR_SIGN * k)
        .collect();
    kappas.sort_by(|a, b| a.partial_cmp(b).expect("finite curvatures"));
    Ok(kappas)
}

/// New mesh with principal curvatures populated at every node that has a
/// complete radius-2 stencil (others stay absent). Fails on the first node
/// where the immersion degenerates.
pub fn with_principal_curvatures(mesh: &HypersurfaceMesh) -> Result<HypersurfaceMesh> {
    let kappas: Vec<Option<Vec<f64>>> = (0..mesh.node_count())
        .into_par_iter()
        .map(|idx| {
            if mesh.grid.has_full_box_stencil(idx, 2) {
                principal_curvatures_fd(mesh, idx).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    Ok(HypersurfaceMesh {
        kappas,
        ..mesh.clone()
    })
}

/// Classification of a mesh by where its principal curvatures sit relative
/// to the dictionary pole at `κ = −1`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum ConvexityVerdict {
    /// Every curvature at every node is at least `kappa0 > −1`.
    UniformlyWeaklyHC { kappa0: f64 },
    /// Each node keeps all curvatures on one side of `−1`, but at least one
    /// node sits entirely on the `κ < −1` side.
    WeaklyHCOnly,
    /// Some node mixes sides of `−1` (or touches the pole window); `witness`
    /// is its node index.
    NotWeaklyHC { witness: usize },
}

/// Classify populated curvatures. A curvature within [`KAPPA_POLE_WINDOW`] of
/// `−1` immediately disqualifies the node: the dictionary has a pole there.
pub fn convexity_check(mesh: &HypersurfaceMesh) -> Result<ConvexityVerdict> {
    let mut seen = false;
    let mut global_min = f64::INFINITY;
    let mut any_all_below = false;
    for (idx, ks) in mesh.kappas.iter().enumerate() {
        let Some(ks) = ks else { continue };
        seen = true;
        let near_pole = ks.iter().any(|&k| (k + 1.0).abs() < KAPPA_POLE_WINDOW);
        let above = ks.iter().any(|&k| k > -1.0);
        let below = ks.iter().any(|&k| k < -1.0);
        if near_pole || (above && below) {
            return Ok(ConvexityVerdict::NotWeaklyHC { witness: idx });
        }
        if below {
            any_all_below = true;
        } else {
            global_min = global_min.min(ks[0]);
        }
    }
    if !seen {
        return Err(Error::InvalidInput(
            "convexity check needs populated principal curvatures".into(),
        ));
    }
    if any_all_below {
        return Ok(ConvexityVerdict::WeaklyHCOnly);
    }
    Ok(ConvexityVerdict::UniformlyWeaklyHC { kappa0: global_min })
}

/// Per-node curvature data of a mesh: ascending principal curvatures, their
/// dictionary images, the mean curvature, and the global convexity class.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub kappas: Vec<Option<Vec<f64>>>,
    pub lambdas: Vec<Option<Vec<f64>>>,
    pub mean_curvature: Vec<Option<f64>>,
    pub convexity: ConvexityVerdict,
}

/// Assemble the curvature report from a mesh with populated curvatures.
pub fn curvature_report(mesh: &HypersurfaceMesh) -> Result<CurvatureReport> {
    let convexity = convexity_check(mesh)?;
    let mut lambdas = Vec::with_capacity(mesh.kappas.len());
    let mut mean = Vec::with_capacity(mesh.kappas.len());
    for ks in &mesh.kappas {
        match ks {
            None => {
                lambdas.push(None);
                mean.push(None);
            }
            Some(ks) => {
                let ls: Vec<f64> = ks
                    .iter()
                    .map(|&k| lambda_from_kappa(k))
                    .collect::<Result<_>>()?;
                lambdas.push(Some(ls));
                mean.push(Some(ks.iter().sum::<f64>() / ks.len() as f64));
            }
        }
    }
    Ok(CurvatureReport {
        kappas: mesh.kappas.clone(),
        lambdas,
        mean_curvature: mean,
        convexity,
    })
}

/// Edge lengths of the horospherical metric `e^{2σ}·(Gauss pullback of the
/// round metric)`, sampled two ways per grid edge: the conformal midpoint
/// rule `e^{(σ_a+σ_b)/2}·d_sphere(G_a, G_b)` and the chord length
/// `√⟨ψ_b − ψ_a, ψ_b − ψ_a⟩` of the light-cone map. The two agree to second
/// order in edge size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeLengthSample {
    pub edge: (usize, usize),
    pub conformal_length: f64,
    pub pullback_length: f64,
}

/// Sample both horospherical edge-length formulas over all grid edges.
pub fn horospherical_metric_samples(mesh: &HypersurfaceMesh) -> Result<Vec<EdgeLengthSample>> {
    mesh.grid
        .edges()
        .par_iter()
        .map(|&(a, b)| {
            let conformal_length = ((mesh.support[a] + mesh.support[b]) / 2.0).exp()
                * spherical_distance(&mesh.gauss[a], &mesh.gauss[b]);
            let diff = mesh.psi[b].axpy(-1.0, &mesh.psi[a])?;
            let q = mink(diff.coords(), diff.coords());
            if q < 0.0 {
                return Err(Error::MathDomain(format!(
                    "ψ-pullback of edge ({a}, {b}) has timelike chord: ⟨Δψ,Δψ⟩ = {q:.3e}"
                )));
            }
            Ok(EdgeLengthSample {
                edge: (a, b),
                conformal_length,
                pullback_length: q.sqrt(),
            })
        })
        .collect()
}

/// Result of the Gauss-map injectivity probe.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub enum GaussInjectivityVerdict {
    NoCollision,
    /// Two parameter-distant nodes share a Gauss image (within the probe
    /// tolerance); `(a, b)` is the lexicographically smallest such pair.
    Collision { a: usize, b: usize },
}

/// Whether two nodes are far apart in parameter space: same-chart pairs by
/// lattice Chebyshev distance (two full stencil widths), cross-chart pairs by
/// a conservative sphere-distance proxy.
fn far_in_parameter(grid: &ParameterGrid, a: usize, b: usize) -> bool {
    let na = &grid.nodes[a];
    let nb = &grid.nodes[b];
    if na.chart == nb.chart {
        let chart = &grid.charts[na.chart];
        let mut cheb = 0usize;
        for ax in 0..na.site.len() {
            let d = na.site[ax].abs_diff(nb.site[ax]);
            let d = if chart.periodic[ax] {
                d.min(chart.dims[ax] - d)
            } else {
                d
            };
            cheb = cheb.max(d);
        }
        cheb > 4
    } else {
        let h = grid
            .charts
            .iter()
            .flat_map(|c| c.step.iter().copied())
            .fold(0.0f64, f64::max);
        // Chart maps stretch chart distance to sphere distance by at most 2,
        // so sphere distance > 8h forces chart distance > 4 steps.
        spherical_distance(&na.point, &nb.point) > 8.0 * h
    }
}

/// Probe with the default tolerance [`GAUSS_COLLISION_EPS`].
pub fn gauss_injectivity_probe(mesh: &HypersurfaceMesh) -> GaussInjectivityVerdict {
    gauss_injectivity_probe_with_eps(mesh, GAUSS_COLLISION_EPS)
}

/// Search for node pairs whose Gauss images are within `eps` on the sphere
/// while the nodes are far apart in parameter space. Seam halos of two-chart
/// grids duplicate parameter points and are correctly ignored (they are not
/// parameter-distant). Deterministic: returns the lexicographically smallest
/// colliding pair regardless of hash iteration order.
pub fn gauss_injectivity_probe_with_eps(
    mesh: &HypersurfaceMesh,
    eps: f64,
) -> GaussInjectivityVerdict {
    let cell = (2.0 * eps).max(1e-12);
    let key_of = |p: &SpherePoint| -> Vec<i64> {
        p.coords()
            .iter()
            .map(|c| (c / cell).floor() as i64)
            .collect()
    };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (idx, g) in mesh.gauss.iter().enumerate() {
        buckets.entry(key_of(g)).or_default().push(idx);
    }
    let dim = mesh
        .gauss
        .first()
        .map(|g| g.coords().len())
        .unwrap_or(0);
    let mut candidates: Vec<usize> = Vec::new();
    for a in 0..mesh.gauss.len() {
        candidates.clear();
        let base = key_of(&mesh.gauss[a]);
        // Gather bucket contents over the 3^dim neighborhood of a's cell.
        let mut shift = vec![-1i64; dim];
        'cells: loop {
            let key: Vec<i64> = base.iter().zip(&shift).map(|(k, s)| k + s).collect();
            if let Some(list) = buckets.get(&key) {
                candidates.extend(list.iter().copied().filter(|&b| b > a));
            }
            let mut axis = 0;
            loop {
                if axis == dim {
                    break 'cells;
                }
                shift[axis] += 1;
                if shift[axis] <= 1 {
                    break;
                }
                shift[axis] = -1;
                axis += 1;
            }
        }
        candidates.sort_unstable();
        for &b in candidates.iter() {
            if spherical_distance(&mesh.gauss[a], &mesh.gauss[b]) < eps
                && far_in_parameter(&mesh.grid, a, b)
            {
                return GaussInjectivityVerdict::Collision { a, b };
            }
        }
    }
    GaussInjectivityVerdict::NoCollision
}
