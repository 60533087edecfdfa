//! Parameter grids over sphere domains.
//!
//! A [`ParameterGrid`] is a list of sphere nodes organized in per-chart
//! lattices, plus quad connectivity for `n = 2`. Charts come in two flavors:
//!
//! * **Stereographic lattices** (two of them) for the full sphere. Each chart
//!   keeps its complete square lattice — including a halo past the seam — so
//!   finite-difference stencils are complete everywhere; a node is *owned* by
//!   chart 0 on the closed hemisphere of the atlas axis' antipode and by
//!   chart 1 on the open opposite hemisphere, which partitions the sphere and
//!   deduplicates seam nodes semantically.
//! * **Polar lattices** for punctured / cap-complement / band domains:
//!   latitudes are spaced uniformly in the Mercator coordinate
//!   `s = ln tan(θ/2)` (so lattice steps track the exponential growth of the
//!   catalog's conformal factors near punctures), longitudes uniformly with
//!   periodic wraparound.
//!
//! Faces are emitted per chart; on the full sphere, chart 1 faces stop three
//! lattice steps short of the equator so the two face sets never overlap
//! (they would otherwise produce coplanar intersecting triangles and false
//! self-intersection positives).

use super::chart::StereographicChart;
use super::domain::{DomainKind, DomainSpec};
use super::{canonical_frame, spherical_distance, SpherePoint};
use crate::tolerances::{ATLAS_SEAM_HALF_WIDTH, POLAR_CHART_TRIM};
use crate::{Error, Result};

/// Chart coordinate systems a grid lattice can live in.
#[derive(Clone, Debug)]
pub enum ChartMap {
    /// Coordinates `u ∈ R^n` of a stereographic chart.
    Stereographic(StereographicChart),
    /// Geodesic-polar coordinates about `axis`. For `n = 2` the coordinates
    /// are `(s, azimuth)` with `θ = 2·atan(e^s)`; for `n = 3` they are
    /// `(s, α, azimuth)` with the fiber direction
    /// `sin α (cos az·b₁ + sin az·b₂) + cos α·b₃` in the orthonormal basis
    /// `b₁, …, bₙ` of `axis^⊥`.
    Polar {
        axis: SpherePoint,
        basis: Vec<Vec<f64>>,
    },
}

impl ChartMap {
    pub fn polar(axis: SpherePoint) -> Self {
        let basis = canonical_frame(&axis).vectors().to_vec();
        ChartMap::Polar { axis, basis }
    }

    /// Maps chart coordinates to the sphere.
    pub fn to_sphere(&self, coords: &[f64]) -> SpherePoint {
        match self {
            ChartMap::Stereographic(chart) => chart.inverse(coords),
            ChartMap::Polar { axis, basis } => {
                let theta = 2.0 * coords[0].exp().atan();
                let (st, ct) = (theta.sin(), theta.cos());
                let dim = axis.coords().len();
                let mut dir = vec![0.0; dim];
                match basis.len() {
                    2 => {
                        let az = coords[1];
                        for k in 0..dim {
                            dir[k] = az.cos() * basis[0][k] + az.sin() * basis[1][k];
                        }
                    }
                    3 => {
                        let (alpha, az) = (coords[1], coords[2]);
                        for k in 0..dim {
                            dir[k] = alpha.sin() * (az.cos() * basis[0][k] + az.sin() * basis[1][k])
                                + alpha.cos() * basis[2][k];
                        }
                    }
                    _ => unreachable!("polar charts are built for n = 2 or 3"),
                }
                let coords: Vec<f64> = axis
                    .coords()
                    .iter()
                    .zip(&dir)
                    .map(|(a, d)| ct * a + st * d)
                    .collect();
                SpherePoint::new(coords).expect("polar chart point is unit")
            }
        }
    }
}

/// One lattice of grid sites in a single chart.
#[derive(Clone, Debug)]
pub struct GridChart {
    pub map: ChartMap,
    /// Sites per axis.
    pub dims: Vec<usize>,
    /// Chart coordinate of site index 0 per axis.
    pub origin: Vec<f64>,
    /// Lattice step per axis.
    pub step: Vec<f64>,
    /// Periodic axes wrap around (azimuths).
    pub periodic: Vec<bool>,
    /// Row-major site → global node index (None for filtered-out sites).
    pub site_to_node: Vec<Option<usize>>,
}

impl GridChart {
    pub fn coord_of(&self, site: &[usize]) -> Vec<f64> {
        site.iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + self.step[a] * i as f64)
            .collect()
    }

    pub fn site_index(&self, site: &[usize]) -> usize {
        let mut idx = 0;
        for (a, &s) in site.iter().enumerate() {
            idx = idx * self.dims[a] + s;
        }
        idx
    }

    /// Node at `site + offsets`, honoring periodic axes; `None` if the offset
    /// leaves the lattice or hits a filtered site.
    pub fn node_at_offset(&self, site: &[usize], offsets: &[isize]) -> Option<usize> {
        let mut target = Vec::with_capacity(site.len());
        for a in 0..site.len() {
            let raw = site[a] as isize + offsets[a];
            let dim = self.dims[a] as isize;
            let idx = if self.periodic[a] {
                raw.rem_euclid(dim)
            } else if raw < 0 || raw >= dim {
                return None;
            } else {
                raw
            };
            target.push(idx as usize);
        }
        self.site_to_node[self.site_index(&target)]
    }
}

/// One grid node: its sphere position and lattice address.
#[derive(Clone, Debug)]
pub struct GridNode {
    pub point: SpherePoint,
    pub chart: usize,
    pub site: Vec<usize>,
    /// Whether this chart owns the node (false only in full-sphere seam
    /// halos, where the other chart owns the region).
    pub owned: bool,
}

/// A sampled parametrization domain: nodes, charts, and (for `n = 2`) quad
/// connectivity.
#[derive(Clone, Debug)]
pub struct ParameterGrid {
    pub sphere_dim: usize,
    pub domain: DomainSpec,
    pub charts: Vec<GridChart>,
    pub nodes: Vec<GridNode>,
    pub quads: Vec<[usize; 4]>,
}

impl ParameterGrid {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn owned_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.owned).count()
    }

    /// Node at lattice offset `offsets` from `node`, staying in its chart.
    pub fn neighbor(&self, node: usize, offsets: &[isize]) -> Option<usize> {
        let n = &self.nodes[node];
        self.charts[n.chart].node_at_offset(&n.site, offsets)
    }

    /// Whether every site of the centered box of the given radius around the
    /// node is present, i.e. all finite-difference stencils up to that radius
    /// are complete.
    pub fn has_full_box_stencil(&self, node: usize, radius: usize) -> bool {
        let dim = self.charts[self.nodes[node].chart].dims.len();
        let r = radius as isize;
        let mut offsets = vec![-r; dim];
        loop {
            if self.neighbor(node, &offsets).is_none() {
                return false;
            }
            // Advance the odometer.
            let mut axis = 0;
            loop {
                if axis == dim {
                    return true;
                }
                offsets[axis] += 1;
                if offsets[axis] <= r {
                    break;
                }
                offsets[axis] = -r;
                axis += 1;
            }
        }
    }

    /// Indices of nodes with complete radius-2 box stencils.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.has_full_box_stencil(i, 2))
            .collect()
    }

    /// Unique undirected lattice edges, derived from the quads.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(self.quads.len() * 4);
        for q in &self.quads {
            for k in 0..4 {
                let (a, b) = (q[k], q[(k + 1) % 4]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Triangles from splitting each quad along its first diagonal.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut tris = Vec::with_capacity(self.quads.len() * 2);
        for q in &self.quads {
            tris.push([q[0], q[1], q[2]]);
            tris.push([q[0], q[2], q[3]]);
        }
        tris
    }
}

fn check_resolution(resolution: &[usize], axes: usize) -> Result<()> {
    if resolution.len() != axes {
        return Err(Error::InvalidInput(format!(
            "expected {axes} resolution entries, got {}",
            resolution.len()
        )));
    }
    if resolution.iter().any(|&r| r < 4) {
        return Err(Error::InvalidInput(
            "resolution must be ≥ 4 per direction".into(),
        ));
    }
    Ok(())
}

/// Builds the grid for a domain. `resolution` has `n` entries (per-chart for
/// the full sphere); `margin` is the distance kept from `∂Ω`, combined with
/// the domain's own default by maximum.
pub fn build_grid(domain: &DomainSpec, resolution: &[usize], margin: f64) -> Result<ParameterGrid> {
    let eff_margin = domain.margin.max(margin);
    match &domain.kind {
        DomainKind::FullSphere => build_full_sphere(domain, resolution),
        DomainKind::PuncturedAtPoints(points) => {
            let axis = points[0].clone();
            let n = axis.sphere_dim();
            check_resolution(resolution, n)?;
            if eff_margin <= 0.0 {
                return Err(Error::InvalidInput(
                    "punctured domains need a positive margin".into(),
                ));
            }
            let antipodal_puncture = points
                .iter()
                .skip(1)
                .any(|q| spherical_distance(q, &axis.antipode()) < 1e-9);
            let theta_max = if antipodal_puncture {
                std::f64::consts::PI - eff_margin
            } else {
                // The antipode is interior but the polar chart degenerates
                // there; trim the chart, not the domain.
                std::f64::consts::PI - POLAR_CHART_TRIM.max(eff_margin)
            };
            build_polar(domain, resolution, axis, eff_margin, theta_max, true)
        }
        DomainKind::CapComplement {
            center,
            angular_radius,
        } => {
            let n = center.sphere_dim();
            check_resolution(resolution, n)?;
            build_polar(
                domain,
                resolution,
                center.clone(),
                angular_radius + eff_margin,
                std::f64::consts::PI - POLAR_CHART_TRIM.max(eff_margin),
                false,
            )
        }
        DomainKind::LatitudeBand {
            axis,
            theta_min,
            theta_max,
        } => {
            let n = axis.sphere_dim();
            check_resolution(resolution, n)?;
            build_polar(
                domain,
                resolution,
                axis.clone(),
                theta_min + eff_margin,
                theta_max - eff_margin,
                false,
            )
        }
    }
}

fn build_full_sphere(domain: &DomainSpec, resolution: &[usize]) -> Result<ParameterGrid> {
    let n = resolution.len();
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "full-sphere grids support n ∈ {{2, 3}}, got resolution with {n} axes"
        )));
    }
    check_resolution(resolution, n)?;
    let axis = SpherePoint::north(n);
    // Chart radius covering the opposite hemisphere plus the seam band:
    // |u| = cot(θ_pole/2) at θ_pole = π/2 − seam half-width.
    let r_seam = 1.0 / ((std::f64::consts::FRAC_PI_4 - ATLAS_SEAM_HALF_WIDTH / 2.0).tan());
    let charts_maps = [
        StereographicChart::new(axis.clone()),
        StereographicChart::new(axis.antipode()),
    ];

    let mut nodes: Vec<GridNode> = Vec::new();
    let mut charts: Vec<GridChart> = Vec::new();
    for (ci, chart) in charts_maps.into_iter().enumerate() {
        let dims = resolution.to_vec();
        let step: Vec<f64> = dims.iter().map(|&d| 2.0 * r_seam / (d - 1) as f64).collect();
        let origin = vec![-r_seam; n];
        let site_count: usize = dims.iter().product();
        let mut site_to_node = vec![None; site_count];
        let mut site = vec![0usize; n];
        let gc_tmp = GridChart {
            map: ChartMap::Stereographic(chart),
            dims: dims.clone(),
            origin: origin.clone(),
            step: step.clone(),
            periodic: vec![false; n],
            site_to_node: Vec::new(),
        };
        loop {
            let u = gc_tmp.coord_of(&site);
            let r2: f64 = u.iter().map(|c| c * c).sum();
            let point = gc_tmp.map.to_sphere(&u);
            // Chart 0 owns the closed far hemisphere, chart 1 the open one:
            // a partition, so seam nodes are never double-counted.
            let owned = if ci == 0 {
                r2 <= 1.0
            } else {
                r2 < 1.0 - 1e-12
            };
            let idx = nodes.len();
            site_to_node[gc_tmp.site_index(&site)] = Some(idx);
            nodes.push(GridNode {
                point,
                chart: ci,
                site: site.clone(),
                owned,
            });
            if !advance(&mut site, &dims) {
                break;
            }
        }
        charts.push(GridChart {
            site_to_node,
            ..gc_tmp
        });
    }

    // Faces (n = 2 only): chart 0 up to the equator, chart 1 stopping three
    // steps short so the face sets never overlap.
    let mut quads = Vec::new();
    if n == 2 {
        for (ci, gc) in charts.iter().enumerate() {
            let hmax = gc.step.iter().cloned().fold(0.0, f64::max);
            let rlim = if ci == 0 { 1.0 } else { 1.0 - 3.0 * hmax };
            push_lattice_quads(gc, &mut quads, |u: &[f64]| {
                u.iter().map(|c| c * c).sum::<f64>().sqrt() <= rlim
            });
        }
    }

    Ok(ParameterGrid {
        sphere_dim: n,
        domain: domain.clone(),
        charts,
        nodes,
        quads,
    })
}

fn build_polar(
    domain: &DomainSpec,
    resolution: &[usize],
    axis: SpherePoint,
    theta_min: f64,
    theta_max: f64,
    filter_by_domain: bool,
) -> Result<ParameterGrid> {
    let n = axis.sphere_dim();
    if theta_min <= 0.0 || theta_max >= std::f64::consts::PI || theta_min >= theta_max {
        return Err(Error::EmptyGrid(format!(
            "polar angle range [{theta_min}, {theta_max}] is empty or invalid for {}",
            domain.describe()
        )));
    }
    let s_min = (theta_min / 2.0).tan().ln();
    let s_max = (theta_max / 2.0).tan().ln();
    let map = ChartMap::polar(axis);

    let (dims, origin, step, periodic) = match n {
        2 => {
            let (ns, naz) = (resolution[0], resolution[1]);
            let ds = (s_max - s_min) / (ns - 1) as f64;
            let daz = std::f64::consts::TAU / naz as f64;
            (
                vec![ns, naz],
                vec![s_min, 0.0],
                vec![ds, daz],
                vec![false, true],
            )
        }
        3 => {
            let (ns, nal, naz) = (resolution[0], resolution[1], resolution[2]);
            let ds = (s_max - s_min) / (ns - 1) as f64;
            // Fiber polar angle is cell-centered to avoid its coordinate
            // poles at α ∈ {0, π}.
            let dal = std::f64::consts::PI / nal as f64;
            let daz = std::f64::consts::TAU / naz as f64;
            (
                vec![ns, nal, naz],
                vec![s_min, dal / 2.0, 0.0],
                vec![ds, dal, daz],
                vec![false, false, true],
            )
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "polar grids support n ∈ {{2, 3}}, got n = {other}"
            )))
        }
    };

    let site_count: usize = dims.iter().product();
    let mut gc = GridChart {
        map,
        dims: dims.clone(),
        origin,
        step,
        periodic,
        site_to_node: vec![None; site_count],
    };
    let mut nodes = Vec::new();
    let mut site = vec![0usize; n];
    loop {
        let coords = gc.coord_of(&site);
        let point = gc.map.to_sphere(&coords);
        // Non-axis punctures (general position) are excluded by distance.
        let keep = !filter_by_domain
            || domain.boundary_distance(&point) >= domain.margin.max(0.0) - 1e-12;
        if keep {
            let idx = nodes.len();
            let si = gc.site_index(&site);
            gc.site_to_node[si] = Some(idx);
            nodes.push(GridNode {
                point,
                chart: 0,
                site: site.clone(),
                owned: true,
            });
        }
        if !advance(&mut site, &dims) {
            break;
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyGrid(domain.describe()));
    }

    let mut quads = Vec::new();
    if n == 2 {
        push_lattice_quads(&gc, &mut quads, |_| true);
    }

    Ok(ParameterGrid {
        sphere_dim: n,
        domain: domain.clone(),
        charts: vec![gc],
        nodes,
        quads,
    })
}

/// Row-major odometer; returns false when the sweep is done.
fn advance(site: &mut [usize], dims: &[usize]) -> bool {
    for a in (0..site.len()).rev() {
        site[a] += 1;
        if site[a] < dims[a] {
            return true;
        }
        site[a] = 0;
    }
    false
}

/// Emits quads for every 2D lattice cell whose four corners exist and whose
/// chart coordinates all satisfy `keep`.
pub(crate) fn push_lattice_quads<F: Fn(&[f64]) -> bool>(
    gc: &GridChart,
    quads: &mut Vec<[usize; 4]>,
    keep: F,
) {
    let (ni, nj) = (gc.dims[0], gc.dims[1]);
    let i_cells = ni - 1;
    let j_cells = if gc.periodic[1] { nj } else { nj - 1 };
    for i in 0..i_cells {
        for j in 0..j_cells {
            let corners_sites = [
                [i, j],
                [i + 1, j],
                [i + 1, (j + 1) % nj],
                [i, (j + 1) % nj],
            ];
            let mut idx = [0usize; 4];
            let mut ok = true;
            for (k, s) in corners_sites.iter().enumerate() {
                match gc.site_to_node[gc.site_index(s)] {
                    Some(node) if keep(&gc.coord_of(s)) => idx[k] = node,
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                quads.push(idx);
            }
        }
    }
}
