//! Named analytic example metrics and reference meshes, each carrying
//! machine-checkable expectations.
//!
//! The catalog is the test bed the rest of the toolkit is verified against:
//!
//! * constant factors — geodesic spheres under the flow;
//! * the flat punctured metric — the complete flat factor on the sphere
//!   minus a point, immersing as a horosphere;
//! * the cylindric metric — the flat cylinder factor on the twice-punctured
//!   sphere, immersing as rotationally symmetric surfaces;
//! * a direct horosphere mesh (constant Gauss map — the degenerate case);
//! * a self-intersecting figure-eight tube fixture (negative control for the
//!   embeddedness check).
//!
//! Expectations are data, serialized with the entry, so the CLI can print
//! them and the verification harness can check them uniformly.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::conformal::{
    boundary_divergence_scan, default_divergence_threshold, p_tensor, ConformalMetric,
    DivergenceVerdict,
};
use crate::correspondence::{
    metric_to_hypersurface, principal_curvatures_fd, HypersurfaceMesh,
};
use crate::embed::TriMesh3;
use crate::lorentz::MinkowskiVector;
use crate::sphere::grid::push_lattice_quads;
use crate::sphere::{
    build_grid, canonical_frame, spherical_distance, ChartMap, DomainKind, DomainSpec,
    GridChart, GridNode, ParameterGrid, ScalarFieldOnSphere, SpherePoint, StereographicChart,
};
use crate::tolerances::{DEFAULT_GRID_MARGIN, FLAT_PUNCTURED_MARGIN, MODEL_TOL};
use crate::{Error, Result};

/// Grid resolution the expectation checker uses for mesh-based expectations.
const CHECK_RESOLUTION: [usize; 2] = [48, 48];
/// Number of random domain samples for pointwise expectations.
const CHECK_SAMPLES: usize = 200;

/// A machine-checkable property a catalog metric promises.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Expectation {
    /// Every eigenvalue of the curvature 2-tensor in the round orthonormal
    /// frame equals `value` at every point (e.g. the tensor is `value·Id`).
    AllPEigenvaluesEqual { value: f64, tol: f64 },
    /// The sorted eigenvalues of the curvature 2-tensor, measured against
    /// the conformal metric itself, equal `values` at every point.
    PEigenvaluesAre { values: Vec<f64>, tol: f64 },
    /// Surfaces at flow time `t` are geodesic spheres of radius
    /// `radius_offset + t`: all principal curvatures equal
    /// `coth(radius_offset + t)`.
    GeodesicSphereFamily { radius_offset: f64, tol: f64 },
    /// All principal curvatures equal `kappa` at flow time `t`.
    ConstantCurvature { t: f64, kappa: f64, tol: f64 },
    /// `⟨φ, (1, axis)⟩` is constant over the mesh at every flow time.
    HorosphericalAbout { axis: SpherePoint, tol: f64 },
    /// Meshes are rotationally symmetric about `axis`: rotating by a lattice
    /// angle permutes the vertex set.
    RotationalSymmetry { axis: SpherePoint, tol: f64 },
    /// β = e^{2ρ} + |∇ρ|² diverges along a meridian approach to `boundary`.
    BetaDivergesToward { boundary: SpherePoint },
    /// The conformal length of every latitude circle about `axis` equals
    /// `girth`.
    LatitudeGirth { axis: SpherePoint, girth: f64, tol: f64 },
}

/// Result of checking one expectation.
#[derive(Clone, Debug, Serialize)]
pub struct ExpectationOutcome {
    pub expectation: Expectation,
    pub passed: bool,
    pub details: String,
}

/// A named metric with analytic evaluators and its promised properties.
#[derive(Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub metric: ConformalMetric,
    pub expected: Vec<Expectation>,
}

/// Serializable face of an entry for `catalog list` / `catalog show`.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogCard {
    pub id: String,
    pub domain: String,
    pub expectations: Vec<Expectation>,
}

impl CatalogEntry {
    pub fn card(&self) -> CatalogCard {
        CatalogCard {
            id: self.id.clone(),
            domain: self.metric.domain().describe(),
            expectations: self.expected.clone(),
        }
    }
}

/// Constant conformal factor `ρ ≡ c` on the full sphere: surfaces at flow
/// time `t` are geodesic spheres of radius `c + t` about the model origin.
pub fn make_constant(c: f64) -> CatalogEntry {
    CatalogEntry {
        id: format!("constant:{c}"),
        metric: ConformalMetric::new(
            DomainSpec::full_sphere(),
            ScalarFieldOnSphere::constant(c),
            format!("constant:{c}"),
        ),
        expected: vec![
            Expectation::AllPEigenvaluesEqual {
                value: 0.5,
                tol: 1e-12,
            },
            Expectation::GeodesicSphereFamily {
                radius_offset: c,
                tol: 1e-3,
            },
        ],
    }
}

/// The complete flat factor on the sphere minus the puncture `p`:
/// `e^ρ = 1/(1 − x·p)`, i.e. `ρ = ln((1 + |u|²)/2)` in the stereographic
/// chart at `p`. Its curvature 2-tensor vanishes identically and the
/// immersed surfaces are horospheres about `p`.
pub fn make_flat_punctured(p: &SpherePoint) -> CatalogEntry {
    let domain = DomainSpec::new(
        DomainKind::PuncturedAtPoints(vec![p.clone()]),
        FLAT_PUNCTURED_MARGIN,
    )
    .expect("one-point puncture domain is valid");
    let rho = ScalarFieldOnSphere::from_axial_profile(
        p.clone(),
        Arc::new(|c: f64| {
            let d = 1.0 - c;
            (-d.ln(), 1.0 / d, 1.0 / (d * d))
        }),
    );
    CatalogEntry {
        id: "flat-punctured".to_string(),
        metric: ConformalMetric::new(domain, rho, "flat-punctured"),
        expected: vec![
            Expectation::AllPEigenvaluesEqual {
                value: 0.0,
                tol: 1e-9,
            },
            Expectation::ConstantCurvature {
                t: 0.0,
                kappa: 1.0,
                tol: 1e-3,
            },
            Expectation::HorosphericalAbout {
                axis: p.clone(),
                tol: 1e-9,
            },
            Expectation::BetaDivergesToward {
                boundary: p.clone(),
            },
        ],
    }
}

/// The cylinder factor on the sphere punctured at the antipodal pair
/// `{p, q}`: with `θ` the polar angle from `p`, `e^ρ = 1/sin θ`, making
/// `e^{2ρ}·g_round` the flat cylinder metric (every latitude circle has
/// conformal girth 2π). Surfaces are rotationally symmetric about the
/// `p`–`q` axis.
pub fn make_cylindric(p: &SpherePoint, q: &SpherePoint) -> Result<CatalogEntry> {
    let gap = spherical_distance(q, &p.antipode());
    if gap > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "cylindric metric needs antipodal punctures; q is {gap:.3e} away from −p"
        )));
    }
    let domain = DomainSpec::new(
        DomainKind::PuncturedAtPoints(vec![p.clone(), p.antipode()]),
        DEFAULT_GRID_MARGIN,
    )?;
    let rho = ScalarFieldOnSphere::from_axial_profile(
        p.clone(),
        Arc::new(|c: f64| {
            let s2 = 1.0 - c * c;
            (-0.5 * s2.ln(), c / s2, (1.0 + c * c) / (s2 * s2))
        }),
    );
    Ok(CatalogEntry {
        id: "cylindric".to_string(),
        metric: ConformalMetric::new(domain, rho, "cylindric"),
        expected: vec![
            Expectation::PEigenvaluesAre {
                values: vec![-0.5, 0.5],
                tol: 1e-9,
            },
            Expectation::RotationalSymmetry {
                axis: p.clone(),
                tol: 1e-9,
            },
            Expectation::LatitudeGirth {
                axis: p.clone(),
                girth: 2.0 * PI,
                tol: 1e-12,
            },
            Expectation::BetaDivergesToward {
                boundary: p.clone(),
            },
            Expectation::BetaDivergesToward {
                boundary: p.antipode(),
            },
        ],
    })
}

/// The built-in entries: `constant:0`, `flat-punctured` (puncture at the
/// north pole of S²), `cylindric` (poles of S²).
pub fn registry() -> Vec<CatalogEntry> {
    let p = SpherePoint::north(2);
    vec![
        make_constant(0.0),
        make_flat_punctured(&p),
        make_cylindric(&p, &p.antipode()).expect("poles are antipodal"),
    ]
}

/// Look an entry up by id on `S²`. `constant:<c>` accepts any real `c`; the
/// other ids are fixed.
pub fn lookup(id: &str) -> Result<CatalogEntry> {
    lookup_at(id, 2)
}

/// Look an entry up by id on `S^n`. Punctured entries place their punctures
/// on the polar axis; every other position is congruent under rotation, so
/// the axis choice loses no generality.
pub fn lookup_at(id: &str, sphere_dim: usize) -> Result<CatalogEntry> {
    if sphere_dim < 2 {
        return Err(Error::InvalidInput(format!(
            "catalog metrics need sphere dimension at least 2, got {sphere_dim}"
        )));
    }
    if let Some(c) = id.strip_prefix("constant:") {
        let c: f64 = c.parse().map_err(|_| {
            Error::InvalidInput(format!("cannot parse the constant in metric id '{id}'"))
        })?;
        if !c.is_finite() {
            return Err(Error::InvalidInput(format!(
                "constant metric needs a finite value, got {c}"
            )));
        }
        return Ok(make_constant(c));
    }
    let p = SpherePoint::north(sphere_dim);
    match id {
        "flat-punctured" => Ok(make_flat_punctured(&p)),
        "cylindric" => make_cylindric(&p, &p.antipode()),
        _ => Err(Error::InvalidInput(format!(
            "unknown metric id '{id}' (available: constant:<c>, flat-punctured, cylindric)"
        ))),
    }
}

/// Random points of the metric's domain at least `cushion` away from its
/// boundary, reproducible by seed.
fn sample_domain_points(
    domain: &DomainSpec,
    sphere_dim: usize,
    count: usize,
    seed: u64,
    cushion: f64,
) -> Vec<SpherePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(count);
    while pts.len() < count {
        let v: Vec<f64> = (0..=sphere_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < 1e-4 {
            continue;
        }
        let x = SpherePoint::new(v).expect("non-degenerate sample");
        if domain.contains(&x) && domain.boundary_distance(&x) > cushion {
            pts.push(x);
        }
    }
    pts
}

/// Dyadic meridian approach to a boundary point: polar angles
/// `0.15·2^{−j}` from `boundary`, heading along a fixed orthonormal
/// direction.
pub fn meridian_approach(boundary: &SpherePoint, steps: usize) -> Vec<SpherePoint> {
    let frame = canonical_frame(boundary);
    let u = &frame.vectors()[0];
    (0..steps)
        .map(|j| {
            let theta = 0.15 * 0.5_f64.powi(j as i32);
            let coords: Vec<f64> = boundary
                .coords()
                .iter()
                .zip(u)
                .map(|(b, e)| theta.cos() * b + theta.sin() * e)
                .collect();
            SpherePoint::new(coords).expect("meridian point is unit")
        })
        .collect()
}

fn outcome(expectation: &Expectation, passed: bool, details: String) -> ExpectationOutcome {
    ExpectationOutcome {
        expectation: expectation.clone(),
        passed,
        details,
    }
}

/// Check one expectation against the entry's metric.
pub fn check_expectation(
    entry: &CatalogEntry,
    expectation: &Expectation,
) -> Result<ExpectationOutcome> {
    let metric = &entry.metric;
    match expectation {
        Expectation::AllPEigenvaluesEqual { value, tol } => {
            let dim = metric.domain().sphere_dim().unwrap_or(2);
            let pts = sample_domain_points(metric.domain(), dim, CHECK_SAMPLES, 1001, 0.05);
            let mut worst = 0.0_f64;
            for x in &pts {
                let sample = p_tensor(metric, x)?;
                for lam in &sample.eigenvalues {
                    worst = worst.max((lam - value).abs());
                }
            }
            Ok(outcome(
                expectation,
                worst <= *tol,
                format!("max |λ − {value}| = {worst:.3e} over {} points", pts.len()),
            ))
        }
        Expectation::PEigenvaluesAre { values, tol } => {
            let dim = metric.domain().sphere_dim().unwrap_or(2);
            let pts = sample_domain_points(metric.domain(), dim, CHECK_SAMPLES, 1002, 0.05);
            let mut expected = values.clone();
            expected.sort_by(f64::total_cmp);
            let mut worst = 0.0_f64;
            for x in &pts {
                let sample = p_tensor(metric, x)?;
                if sample.metric_eigenvalues.len() != expected.len() {
                    return Ok(outcome(
                        expectation,
                        false,
                        format!(
                            "eigenvalue count {} differs from expected {}",
                            sample.metric_eigenvalues.len(),
                            expected.len()
                        ),
                    ));
                }
                for (lam, want) in sample.metric_eigenvalues.iter().zip(&expected) {
                    worst = worst.max((lam - want).abs());
                }
            }
            Ok(outcome(
                expectation,
                worst <= *tol,
                format!("max eigenvalue deviation {worst:.3e} over {} points", pts.len()),
            ))
        }
        Expectation::GeodesicSphereFamily { radius_offset, tol } => {
            let grid = build_grid(metric.domain(), &CHECK_RESOLUTION, 0.0)?;
            let mut worst = 0.0_f64;
            let mut nodes = 0usize;
            let base = (-radius_offset).max(0.0);
            for t in [base + 0.5, base + 1.0] {
                let mesh = metric_to_hypersurface(metric, t, &grid)?;
                let want = 1.0 / (radius_offset + t).tanh();
                for node in mesh.grid.interior_nodes() {
                    let Ok(kappas) = principal_curvatures_fd(&mesh, node) else {
                        continue;
                    };
                    for k in kappas {
                        worst = worst.max((k - want).abs());
                    }
                    nodes += 1;
                }
            }
            Ok(outcome(
                expectation,
                nodes > 0 && worst <= *tol,
                format!("max |κ − coth(r)| = {worst:.3e} over {nodes} node checks"),
            ))
        }
        Expectation::ConstantCurvature { t, kappa, tol } => {
            let grid = build_grid(metric.domain(), &CHECK_RESOLUTION, 0.0)?;
            let mesh = metric_to_hypersurface(metric, *t, &grid)?;
            let mut worst = 0.0_f64;
            let mut nodes = 0usize;
            for node in mesh.grid.interior_nodes() {
                let Ok(kappas) = principal_curvatures_fd(&mesh, node) else {
                    continue;
                };
                for k in kappas {
                    worst = worst.max((k - kappa).abs());
                }
                nodes += 1;
            }
            Ok(outcome(
                expectation,
                nodes > 0 && worst <= *tol,
                format!("max |κ − {kappa}| = {worst:.3e} over {nodes} interior nodes at t = {t}"),
            ))
        }
        Expectation::HorosphericalAbout { axis, tol } => {
            let grid = build_grid(metric.domain(), &CHECK_RESOLUTION, 0.0)?;
            let mut v = vec![1.0];
            v.extend_from_slice(axis.coords());
            let mut worst = 0.0_f64;
            for t in [0.0, 1.0] {
                let mesh = metric_to_hypersurface(metric, t, &grid)?;
                let vals: Vec<f64> = mesh
                    .phi
                    .iter()
                    .map(|phi| crate::correspondence::mink(phi.coords(), &v))
                    .collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                for val in vals {
                    worst = worst.max((val - mean).abs());
                }
            }
            Ok(outcome(
                expectation,
                worst <= *tol,
                format!("max spread of ⟨φ,(1,axis)⟩ = {worst:.3e} at t ∈ {{0, 1}}"),
            ))
        }
        Expectation::RotationalSymmetry { axis, tol } => {
            let grid = build_grid(metric.domain(), &CHECK_RESOLUTION, 0.0)?;
            let mesh = metric_to_hypersurface(metric, 1.0, &grid)?;
            match rotation_symmetry_defect(&mesh, axis) {
                Ok(worst) => Ok(outcome(
                    expectation,
                    worst <= *tol,
                    format!("max node mismatch after lattice rotation = {worst:.3e}"),
                )),
                Err(e) => Ok(outcome(expectation, false, e.to_string())),
            }
        }
        Expectation::BetaDivergesToward { boundary } => {
            let approach = meridian_approach(boundary, 13);
            let scan = boundary_divergence_scan(
                metric,
                boundary,
                &approach,
                default_divergence_threshold(),
            )?;
            let passed = matches!(scan.verdict, DivergenceVerdict::Diverging { .. });
            let last = scan.beta_values.last().copied().unwrap_or(f64::NAN);
            Ok(outcome(
                expectation,
                passed,
                format!("verdict {:?}, final β = {last:.3e}", scan.verdict),
            ))
        }
        Expectation::LatitudeGirth { axis, girth, tol } => {
            let frame = canonical_frame(axis);
            let u = &frame.vectors()[0];
            let mut worst = 0.0_f64;
            for theta in [0.3, 1.0, PI / 2.0, 2.0, 2.8] {
                let coords: Vec<f64> = axis
                    .coords()
                    .iter()
                    .zip(u)
                    .map(|(a, e)| theta.cos() * a + theta.sin() * e)
                    .collect();
                let x = SpherePoint::new(coords)?;
                let circumference = metric.scale(&x) * 2.0 * PI * theta.sin();
                worst = worst.max((circumference - girth).abs());
            }
            Ok(outcome(
                expectation,
                worst <= *tol,
                format!("max |girth − {girth}| = {worst:.3e} over sampled latitudes"),
            ))
        }
    }
}

/// Check every expectation an entry declares.
pub fn check_entry(entry: &CatalogEntry) -> Result<Vec<ExpectationOutcome>> {
    entry
        .expected
        .iter()
        .map(|e| check_expectation(entry, e))
        .collect()
}

/// Worst node mismatch when the mesh is rotated about `axis` by one third of
/// the grid's periodic circumference: the rotation must map the vertex set
/// to itself, with the matching node known from the lattice shift.
fn rotation_symmetry_defect(mesh: &HypersurfaceMesh, axis: &SpherePoint) -> Result<f64> {
    if mesh.grid.sphere_dim != 2 {
        return Err(Error::InvalidInput(
            "rotation-symmetry check is implemented for n = 2".into(),
        ));
    }
    let a = nalgebra::Vector3::new(axis.coords()[0], axis.coords()[1], axis.coords()[2]);
    let mut worst = 0.0_f64;
    for (chart_idx, chart) in mesh.grid.charts.iter().enumerate() {
        let Some(az_axis) = chart.periodic.iter().position(|&p| p) else {
            return Err(Error::InvalidInput(
                "grid has no periodic axis to rotate along".into(),
            ));
        };
        let n_az = chart.dims[az_axis];
        let k = (n_az / 3).max(1) as isize;
        let angle = chart.step[az_axis] * k as f64;
        // A lattice shift of k azimuth sites corresponds to the ambient
        // rotation by ±k·step; the sign depends on the chart basis
        // handedness, so try both and keep the matching one.
        let defect_for = |angle: f64| -> f64 {
            let rot = nalgebra::Rotation3::from_axis_angle(
                &nalgebra::Unit::new_normalize(a),
                angle,
            );
            let mut chart_worst = 0.0_f64;
            for (idx, node) in mesh.grid.nodes.iter().enumerate() {
                if node.chart != chart_idx {
                    continue;
                }
                let mut offsets = vec![0isize; chart.dims.len()];
                offsets[az_axis] = k;
                let Some(target) = chart.node_at_offset(&node.site, &offsets) else {
                    continue;
                };
                let phi = &mesh.phi[idx];
                let spatial = phi.spatial();
                let rotated =
                    rot * nalgebra::Vector3::new(spatial[0], spatial[1], spatial[2]);
                let target_phi = &mesh.phi[target];
                let mut d = (phi.time() - target_phi.time()).abs();
                for (r, t) in rotated.iter().zip(target_phi.spatial()) {
                    d = d.max((r - t).abs());
                }
                chart_worst = chart_worst.max(d);
            }
            chart_worst
        };
        worst = worst.max(defect_for(angle).min(defect_for(-angle)));
    }
    Ok(worst)
}

/// Direct mesh of the horosphere with point at infinity `p` and signed
/// distance `s`, parametrized over a disk in the stereographic chart at `p`
/// (so `w = 0` is the point antipodal to `p`):
///
/// ```text
/// φ(w) = e^s·(1+|w|²)/2·(1, p) + e^{−s}/2·(1, −p) + (0, Σ wᵢ·eᵢ)
/// ψ    = e^s·(1, p),   η = φ − ψ,   support ≡ s,   gauss ≡ p.
/// ```
///
/// The Gauss map is constant — the degenerate, non-injective case. Note the
/// constant-Gauss orientation sits at the curvature value κ ≡ −1 exactly
/// (the pole of the λ–κ dictionary): its second fundamental form equals
/// minus the first.
pub fn make_horosphere_reference(
    p: &SpherePoint,
    s: f64,
    resolution: &[usize],
) -> Result<HypersurfaceMesh> {
    let n = p.sphere_dim();
    if resolution.len() != n {
        return Err(Error::InvalidInput(format!(
            "horosphere reference needs {n} resolution axes, got {}",
            resolution.len()
        )));
    }
    if resolution.iter().any(|&d| d < 4) {
        return Err(Error::InvalidInput(
            "horosphere reference needs at least 4 sites per axis".into(),
        ));
    }
    if !s.is_finite() {
        return Err(Error::InvalidInput(format!(
            "signed distance must be finite, got {s}"
        )));
    }
    let domain = DomainSpec::new(
        DomainKind::PuncturedAtPoints(vec![p.clone()]),
        DEFAULT_GRID_MARGIN,
    )?;
    let chart_map = StereographicChart::new(p.clone());
    let dims = resolution.to_vec();
    let step: Vec<f64> = dims.iter().map(|&d| 2.0 / (d - 1) as f64).collect();
    let origin = vec![-1.0; n];
    let mut chart = GridChart {
        map: ChartMap::Stereographic(chart_map),
        dims: dims.clone(),
        origin,
        step,
        periodic: vec![false; n],
        site_to_node: Vec::new(),
    };
    let site_count: usize = dims.iter().product();
    let mut nodes = Vec::with_capacity(site_count);
    let mut site_to_node = vec![None; site_count];
    let mut site = vec![0usize; n];
    loop {
        let u = chart.coord_of(&site);
        let point = chart.map.to_sphere(&u);
        let idx = nodes.len();
        site_to_node[chart.site_index(&site)] = Some(idx);
        nodes.push(GridNode {
            point,
            chart: 0,
            site: site.clone(),
            owned: true,
        });
        // Odometer advance over the lattice.
        let mut axis = n;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            site[axis] += 1;
            if site[axis] < dims[axis] {
                break;
            }
            site[axis] = 0;
        }
        if site.iter().all(|&s| s == 0) {
            break;
        }
    }
    chart.site_to_node = site_to_node;
    let mut quads = Vec::new();
    if n == 2 {
        push_lattice_quads(&chart, &mut quads, |_| true);
    }
    let grid = ParameterGrid {
        sphere_dim: n,
        domain,
        charts: vec![chart],
        nodes,
        quads,
    };

    let basis = canonical_frame(p).vectors().to_vec();
    let es = s.exp();
    let ems = (-s).exp();
    let ambient = n + 2;
    let mut phi_v = Vec::with_capacity(grid.node_count());
    let mut eta_v = Vec::with_capacity(grid.node_count());
    let mut psi_v = Vec::with_capacity(grid.node_count());
    let mut psi_coords = vec![es];
    for c in p.coords() {
        psi_coords.push(es * c);
    }
    let psi = MinkowskiVector::new(psi_coords)?;
    for node in &grid.nodes {
        let w = grid.charts[0].coord_of(&node.site);
        let w2: f64 = w.iter().map(|x| x * x).sum();
        let a = es * (1.0 + w2) / 2.0;
        let b = ems / 2.0;
        let mut coords = vec![a + b];
        for k in 0..=n {
            let mut c = (a - b) * p.coords()[k];
            for (wi, e) in w.iter().zip(&basis) {
                c += wi * e[k];
            }
            coords.push(c);
        }
        debug_assert_eq!(coords.len(), ambient);
        let phi = MinkowskiVector::new(coords)?;
        let eta = phi.axpy(-1.0, &psi)?;
        phi_v.push(phi);
        eta_v.push(eta);
        psi_v.push(psi.clone());
    }
    let node_count = grid.node_count();
    let mesh = HypersurfaceMesh {
        grid,
        phi: phi_v,
        eta: eta_v,
        psi: psi_v,
        support: vec![s; node_count],
        gauss: vec![p.clone(); node_count],
        kappas: vec![None; node_count],
        flow_time: 0.0,
        label: format!("horosphere-reference:{s}"),
    };
    mesh.validate(MODEL_TOL)?;
    Ok(mesh)
}

/// Figure-eight tube fixture with one designed transversal crossing.
#[derive(Clone, Debug)]
pub struct SelfIntersectingFixture {
    pub mesh: TriMesh3,
    /// Ball coordinates of the designed crossing the checker must report.
    pub designed_crossing: [f64; 3],
    /// Triangle indices of the crossing segment of the tube.
    pub crossing_segment: Vec<usize>,
}

impl SelfIntersectingFixture {
    /// The same tube with the crossing segment removed: embedded.
    pub fn without_crossing_segment(&self) -> TriMesh3 {
        let mut mesh = TriMesh3 {
            vertices: self.mesh.vertices.clone(),
            triangles: Vec::new(),
        };
        for (idx, tri) in self.mesh.triangles.iter().enumerate() {
            if !self.crossing_segment.contains(&idx) {
                mesh.triangles.push(*tri);
            }
        }
        mesh
    }
}

/// Append an open tube (4 walls, no caps) from `start` to `end` whose
/// cross-section corners are the `section` offsets; adjacent walls share
/// vertex indices. Returns the 8 triangle indices.
fn push_tube_segment(
    mesh: &mut TriMesh3,
    start: [f64; 3],
    end: [f64; 3],
    section: &[[f64; 3]; 4],
) -> Vec<usize> {
    let base = mesh.vertices.len();
    for corner in section {
        mesh.vertices
            .push([start[0] + corner[0], start[1] + corner[1], start[2] + corner[2]]);
    }
    for corner in section {
        mesh.vertices
            .push([end[0] + corner[0], end[1] + corner[1], end[2] + corner[2]]);
    }
    let mut tris = Vec::with_capacity(8);
    for i in 0..4 {
        let j = (i + 1) % 4;
        let (s_i, s_j) = (base + i, base + j);
        let (e_i, e_j) = (base + 4 + i, base + 4 + j);
        tris.push(mesh.triangles.len());
        mesh.triangles.push([s_i, e_i, e_j]);
        tris.push(mesh.triangles.len());
        mesh.triangles.push([s_i, e_j, s_j]);
    }
    tris
}

/// Build the figure-eight tube: an axis-aligned closed centerline
/// `(−a,0) → (a,0) → (a,−b) → (0,−b) → (0,b) → (−a,b) → (−a,0)` in the
/// z = 0 plane, traversed by a square-section tube, except the vertical
/// `(0,−b) → (0,b)` run which carries a diamond section so it pierces the
/// horizontal run transversally at the origin — the crossing of the eight.
/// Segments are trimmed at the corners (the tube is open there), which
/// keeps every non-designed pair of walls strictly separated.
pub fn make_selfintersecting_fixture() -> SelfIntersectingFixture {
    let a = 0.5; // lobe half-length in x
    let b = 0.35; // lobe extent in y
    let w = 0.05; // square section half-width
    let d = 0.08; // diamond section half-diagonal
    let trim = 0.07; // corner trim per segment end

    let x_len = a - trim; // horizontal run spans [−x_len, x_len]
    let y_len = b - trim; // crossing run spans [−y_len, y_len]

    // Square section for runs along x: corners ordered so wall 0 is the top
    // (z = +w), the designed partner of the crossing.
    let sq_x = [
        [0.0, -w, w],
        [0.0, w, w],
        [0.0, w, -w],
        [0.0, -w, -w],
    ];
    // Square section for runs along y.
    let sq_y = [
        [-w, 0.0, w],
        [w, 0.0, w],
        [w, 0.0, -w],
        [-w, 0.0, -w],
    ];
    // Diamond section for the crossing run (along y): wall 0 spans the
    // (+x, +z) face x + z = d.
    let diamond = [
        [d, 0.0, 0.0],
        [0.0, 0.0, d],
        [-d, 0.0, 0.0],
        [0.0, 0.0, -d],
    ];

    let mut mesh = TriMesh3 {
        vertices: Vec::new(),
        triangles: Vec::new(),
    };
    // Horizontal run first: its top wall provides triangle 0.
    push_tube_segment(&mut mesh, [-x_len, 0.0, 0.0], [x_len, 0.0, 0.0], &sq_x);
    // Crossing run second: its (+x, +z) wall provides the designed partner.
    let crossing_segment =
        push_tube_segment(&mut mesh, [0.0, -y_len, 0.0], [0.0, y_len, 0.0], &diamond);
    // Remaining runs of the eight.
    push_tube_segment(&mut mesh, [a, -trim, 0.0], [a, -b + trim, 0.0], &sq_y);
    push_tube_segment(&mut mesh, [a - trim, -b, 0.0], [trim, -b, 0.0], &sq_x);
    push_tube_segment(&mut mesh, [-trim, b, 0.0], [-a + trim, b, 0.0], &sq_x);
    push_tube_segment(&mut mesh, [-a, b - trim, 0.0], [-a, trim, 0.0], &sq_y);

    // Designed crossing: the z = +w top wall meets the x + z = d diamond
    // wall along the line x = d − w; the first top-wall triangle covers
    // y ∈ [−w, w·x/x_len] there, and that interval lies inside the diamond
    // wall triangle, so the reported point is its midpoint.
    let x_cross = d - w;
    let y_hi = w * x_cross / x_len;
    let designed_crossing = [x_cross, (-w + y_hi) / 2.0, w];

    SelfIntersectingFixture {
        mesh,
        designed_crossing,
        crossing_segment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::{
        gauss_injectivity_probe, hypersurface_to_metric, GaussInjectivityVerdict,
    };
    use crate::embed::{embeddedness_check_tri, Embeddedness};

    #[test]
    fn constant_entry_declares_geodesic_spheres() {
        let entry = make_constant(0.0);
        assert_eq!(entry.id, "constant:0");
        for exp in &entry.expected {
            let out = check_expectation(&entry, exp).unwrap();
            assert!(out.passed, "{:?}: {}", out.expectation, out.details);
        }
    }

    #[test]
    fn constant_p_eigenvalues_are_exactly_one_half() {
        let entry = make_constant(1.7);
        let pts = sample_domain_points(entry.metric.domain(), 2, 50, 7, 0.05);
        for x in pts {
            let sample = p_tensor(&entry.metric, &x).unwrap();
            for lam in sample.eigenvalues {
                assert!((lam - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn only_the_sum_of_constant_and_flow_time_matters() {
        // ρ ≡ 0.5 at t = 0.5 and ρ ≡ 0 at t = 1 produce the same radius-1
        // sphere node for node.
        let grid = build_grid(&DomainSpec::full_sphere(), &[24, 24], 0.0).unwrap();
        let mesh_a =
            metric_to_hypersurface(&make_constant(0.5).metric, 0.5, &grid).unwrap();
        let mesh_b =
            metric_to_hypersurface(&make_constant(0.0).metric, 1.0, &grid).unwrap();
        for (pa, pb) in mesh_a.phi.iter().zip(&mesh_b.phi) {
            for (x, y) in pa.coords().iter().zip(pb.coords()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn flat_punctured_value_at_the_antipode() {
        let p = SpherePoint::north(2);
        let entry = make_flat_punctured(&p);
        let rho = entry.metric.rho().value(&p.antipode());
        assert!((rho - 0.5_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn flat_punctured_analytic_derivatives_match_finite_differences() {
        let p = SpherePoint::north(2);
        let entry = make_flat_punctured(&p);
        let analytic = entry.metric.rho();
        // The factor steepens without bound toward the puncture (fourth
        // derivative ~ 12/θ⁴), so a 1e−6 comparison needs probes a fixed
        // distance away and a Hessian step tuned for that regime.
        let value = analytic.clone();
        let fd = ScalarFieldOnSphere::finite_difference_with_steps(
            Arc::new(move |x: &SpherePoint| value.value(x)),
            1e-4,
            3e-4,
        );
        let pts = sample_domain_points(entry.metric.domain(), 2, 20, 42, 0.9);
        for x in pts {
            let ga = analytic.gradient(&x).unwrap();
            let gf = fd.gradient(&x).unwrap();
            for (u, v) in ga.components().iter().zip(gf.components()) {
                assert!((u - v).abs() < 1e-6);
            }
            let frame = canonical_frame(&x);
            let ha = analytic.hessian_in_frame(&x, &frame).unwrap();
            let hf = fd.hessian_in_frame(&x, &frame).unwrap();
            for (u, v) in ha.iter().zip(hf.iter()) {
                assert!((u - v).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn flat_punctured_entry_passes_its_expectations() {
        let entry = make_flat_punctured(&SpherePoint::north(2));
        for exp in &entry.expected {
            let out = check_expectation(&entry, exp).unwrap();
            assert!(out.passed, "{:?}: {}", out.expectation, out.details);
        }
    }

    #[test]
    fn flat_punctured_p_vanishes_at_many_samples() {
        let entry = make_flat_punctured(&SpherePoint::north(2));
        let pts = sample_domain_points(entry.metric.domain(), 2, 500, 99, 0.3);
        let mut worst_analytic = 0.0_f64;
        for x in &pts {
            let sample = p_tensor(&entry.metric, x).unwrap();
            for v in sample.matrix.iter() {
                worst_analytic = worst_analytic.max(v.abs());
            }
        }
        assert!(worst_analytic < 1e-9, "analytic max |P| = {worst_analytic:.3e}");

        let fd_metric = entry.metric.with_finite_difference();
        let mut worst_fd = 0.0_f64;
        for x in &pts {
            let sample = p_tensor(&fd_metric, x).unwrap();
            for v in sample.matrix.iter() {
                worst_fd = worst_fd.max(v.abs());
            }
        }
        assert!(worst_fd < 1e-3, "FD max |P| = {worst_fd:.3e}");
    }

    #[test]
    fn cylindric_requires_antipodal_punctures() {
        let p = SpherePoint::north(2);
        let q = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            make_cylindric(&p, &q),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn cylindric_factor_vanishes_on_the_equator() {
        let p = SpherePoint::north(2);
        let entry = make_cylindric(&p, &p.antipode()).unwrap();
        let x = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(entry.metric.rho().value(&x).abs() < 1e-15);
    }

    #[test]
    fn cylindric_entry_passes_its_expectations() {
        let p = SpherePoint::north(2);
        let entry = make_cylindric(&p, &p.antipode()).unwrap();
        for exp in &entry.expected {
            let out = check_expectation(&entry, exp).unwrap();
            assert!(out.passed, "{:?}: {}", out.expectation, out.details);
        }
    }

    #[test]
    fn cylindric_p_eigenvalues_reflect_about_the_equator() {
        let p = SpherePoint::north(2);
        let entry = make_cylindric(&p, &p.antipode()).unwrap();
        let frame = canonical_frame(&p);
        let u = &frame.vectors()[0];
        let at_theta = |theta: f64| {
            let coords: Vec<f64> = p
                .coords()
                .iter()
                .zip(u)
                .map(|(a, e)| theta.cos() * a + theta.sin() * e)
                .collect();
            let x = SpherePoint::new(coords).unwrap();
            p_tensor(&entry.metric, &x).unwrap().metric_eigenvalues
        };
        let lo = at_theta(1.0);
        let hi = at_theta(2.1416);
        for (a, b) in lo.iter().zip(&hi) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn registry_ids_and_lookup_round_trip() {
        let ids: Vec<String> = registry().into_iter().map(|e| e.id).collect();
        assert_eq!(ids, ["constant:0", "flat-punctured", "cylindric"]);
        for id in ids {
            assert_eq!(lookup(&id).unwrap().id, id);
        }
        assert_eq!(lookup("constant:0.5").unwrap().id, "constant:0.5");
        assert!(lookup("nope").is_err());
        assert!(lookup("constant:abc").is_err());
    }

    #[test]
    fn catalog_cards_serialize() {
        for entry in registry() {
            let card = entry.card();
            let json = serde_json::to_string(&card).unwrap();
            assert!(json.contains(&entry.id));
        }
    }

    #[test]
    fn horosphere_reference_is_constant_in_every_sense() {
        let p = SpherePoint::north(2);
        let s = 0.3;
        let mesh = make_horosphere_reference(&p, s, &[16, 16]).unwrap();
        mesh.validate(MODEL_TOL).unwrap();

        // ⟨φ, (1,p)⟩ ≡ −e^{−s}, forced exactly by ⟨φ,ψ⟩ = −1 with
        // ψ = e^s(1,p).
        let mut v = vec![1.0];
        v.extend_from_slice(p.coords());
        for phi in &mesh.phi {
            let val = crate::correspondence::mink(phi.coords(), &v);
            assert!((val + (-s).exp()).abs() < 1e-12, "⟨φ,(1,p)⟩ = {val}");
        }
        for (sup, g) in mesh.support.iter().zip(&mesh.gauss) {
            assert_eq!(*sup, s);
            assert_eq!(g.coords(), p.coords());
        }
    }

    #[test]
    fn horosphere_reference_curvature_sits_at_the_dictionary_pole() {
        // The constant-Gauss orientation has second fundamental form equal
        // to minus the first: κ ≡ −1 exactly, the degenerate value where
        // λ(κ) blows up.
        let p = SpherePoint::north(2);
        let mesh = make_horosphere_reference(&p, 0.0, &[24, 24]).unwrap();
        let mut checked = 0;
        for node in mesh.grid.interior_nodes() {
            let Ok(kappas) = principal_curvatures_fd(&mesh, node) else {
                continue;
            };
            for k in kappas {
                assert!((k + 1.0).abs() < 1e-3, "node {node}: κ = {k}");
            }
            checked += 1;
        }
        assert!(checked > 50);
    }

    #[test]
    fn horosphere_reference_gauss_map_collides() {
        let p = SpherePoint::north(2);
        let mesh = make_horosphere_reference(&p, 0.5, &[12, 12]).unwrap();
        assert!(matches!(
            gauss_injectivity_probe(&mesh),
            GaussInjectivityVerdict::Collision { .. }
        ));
        let pairs = hypersurface_to_metric(&mesh).unwrap();
        for (g, sup) in pairs {
            assert!(spherical_distance(&g, &p) < 1e-9);
            assert!((sup - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn fixture_reports_the_designed_crossing() {
        let fixture = make_selfintersecting_fixture();
        let verdict = embeddedness_check_tri(&fixture.mesh).unwrap();
        match verdict.verdict {
            Embeddedness::SelfIntersecting { triangles, point } => {
                assert_eq!(triangles.0, 0, "witness pair {triangles:?}");
                for (got, want) in point.iter().zip(&fixture.designed_crossing) {
                    assert!(
                        (got - want).abs() < 1e-9,
                        "witness {point:?} vs designed {:?}",
                        fixture.designed_crossing
                    );
                }
            }
            Embeddedness::Embedded => panic!("fixture crossing not detected"),
        }
    }

    #[test]
    fn fixture_without_crossing_segment_is_embedded() {
        let fixture = make_selfintersecting_fixture();
        let verdict = embeddedness_check_tri(&fixture.without_crossing_segment()).unwrap();
        assert!(
            verdict.is_embedded(),
            "verdict: {:?}",
            verdict.verdict
        );
    }

    #[test]
    fn fixture_fits_in_the_unit_ball() {
        let fixture = make_selfintersecting_fixture();
        for v in &fixture.mesh.vertices {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!(norm < 1.0, "vertex {v:?} outside the ball");
        }
    }
}
