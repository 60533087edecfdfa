//! Self-intersection detection for triangulated meshes in the Poincaré ball.
//!
//! A hypersurface mesh is mapped to ball coordinates and triangulated from
//! its grid faces; every geometrically close, combinatorially unrelated
//! triangle pair is then tested for exact (double-precision) intersection.
//! Pairs sharing a vertex index are the mesh's own fans and creases — they
//! touch by construction and are excluded. The scan is deterministic for a
//! fixed mesh regardless of thread count: candidate pairs are generated in
//! sorted order and the reported witness is the index-smallest intersecting
//! pair.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::correspondence::HypersurfaceMesh;
use crate::lorentz::to_poincare_ball_default;
use crate::tolerances::DEGENERATE_TRIANGLE_AREA_FRACTION;
use crate::{Error, Result};

/// Geometric tolerance of the intersection predicates, scaled by the local
/// magnitudes they compare (ball coordinates are O(1)).
const TRI_EPS: f64 = 1e-12;

/// A triangle soup in ball coordinates: shared vertices, indexed triangles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriMesh3 {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

/// Outcome of the self-intersection scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Embeddedness {
    Embedded,
    SelfIntersecting {
        /// Index-smallest intersecting triangle pair.
        triangles: (usize, usize),
        /// A point common to both triangles, in ball coordinates.
        point: [f64; 3],
    },
}

/// Verdict plus the resolution metadata needed to judge how thorough the
/// scan was.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingVerdict {
    pub verdict: Embeddedness,
    /// Total triangles in the mesh.
    pub triangle_count: usize,
    /// Triangles excluded for near-zero area (below
    /// [`DEGENERATE_TRIANGLE_AREA_FRACTION`] of the largest triangle).
    pub degenerate_triangles: usize,
    /// Occupied spatial-hash cells examined.
    pub cells_checked: usize,
    /// Deduplicated non-adjacent pairs that reached the exact test.
    pub candidate_pairs: usize,
}

impl EmbeddingVerdict {
    pub fn is_embedded(&self) -> bool {
        matches!(self.verdict, Embeddedness::Embedded)
    }
}

/// Check a hypersurface mesh for self-intersection in the Poincaré ball.
///
/// Only surfaces (`n = 2`) triangulate into a 3-ball; higher-dimensional
/// meshes are rejected. The mesh must carry grid faces.
pub fn embeddedness_check(mesh: &HypersurfaceMesh) -> Result<EmbeddingVerdict> {
    if mesh.grid.sphere_dim != 2 {
        return Err(Error::InvalidInput(format!(
            "embeddedness check needs a surface mesh in the 3-ball (n = 2), got n = {}",
            mesh.grid.sphere_dim
        )));
    }
    let triangles = mesh.grid.triangles();
    if triangles.is_empty() {
        return Err(Error::EmptyGrid(
            "mesh has no faces to run the embeddedness check on".into(),
        ));
    }
    let vertices = mesh
        .phi
        .iter()
        .map(|p| {
            let b = to_poincare_ball_default(p)?;
            let c = b.coords();
            Ok([c[0], c[1], c[2]])
        })
        .collect::<Result<Vec<_>>>()?;
    embeddedness_check_tri(&TriMesh3 {
        vertices,
        triangles,
    })
}

/// Check a raw triangle soup for self-intersection.
///
/// Pairs sharing a vertex index are excluded; near-degenerate triangles are
/// excluded and counted. The witness, when one exists, is the lexicographically
/// smallest intersecting pair together with a point both triangles contain.
pub fn embeddedness_check_tri(mesh: &TriMesh3) -> Result<EmbeddingVerdict> {
    let nv = mesh.vertices.len();
    for (ti, tri) in mesh.triangles.iter().enumerate() {
        for &v in tri {
            if v >= nv {
                return Err(Error::InvalidInput(format!(
                    "triangle {ti} references vertex {v}, but the mesh has {nv} vertices"
                )));
            }
        }
    }
    let verts: Vec<Vector3<f64>> = mesh
        .vertices
        .iter()
        .map(|v| Vector3::new(v[0], v[1], v[2]))
        .collect();
    let corners = |t: &[usize; 3]| [verts[t[0]], verts[t[1]], verts[t[2]]];

    // Degeneracy filter: area relative to the largest triangle.
    let areas: Vec<f64> = mesh
        .triangles
        .iter()
        .map(|t| {
            let [a, b, c] = corners(t);
            (b - a).cross(&(c - a)).norm() / 2.0
        })
        .collect();
    let max_area = areas.iter().cloned().fold(0.0, f64::max);
    let degenerate: Vec<bool> = areas
        .iter()
        .map(|&a| a < DEGENERATE_TRIANGLE_AREA_FRACTION * max_area)
        .collect();
    let degenerate_triangles = degenerate.iter().filter(|&&d| d).count();

    // Cell size: twice the largest triangle diameter, so any intersecting
    // pair shares at least one cell through its bounding box.
    let max_diam = mesh
        .triangles
        .iter()
        .zip(&degenerate)
        .filter(|(_, &d)| !d)
        .map(|(t, _)| {
            let [a, b, c] = corners(t);
            (b - a).norm().max((c - b).norm()).max((a - c).norm())
        })
        .fold(0.0, f64::max);
    if max_diam == 0.0 {
        return Ok(EmbeddingVerdict {
            verdict: Embeddedness::Embedded,
            triangle_count: mesh.triangles.len(),
            degenerate_triangles,
            cells_checked: 0,
            candidate_pairs: 0,
        });
    }
    let cell = 2.0 * max_diam;

    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (ti, tri) in mesh.triangles.iter().enumerate() {
        if degenerate[ti] {
            continue;
        }
        let cs = corners(tri);
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for v in &cs {
            for k in 0..3 {
                let idx = (v[k] / cell).floor() as i64;
                lo[k] = lo[k].min(idx);
                hi[k] = hi[k].max(idx);
            }
        }
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    buckets.entry([i, j, k]).or_default().push(ti);
                }
            }
        }
    }
    let cells_checked = buckets.len();

    // Candidate pairs, order-independent of the hash-map iteration order:
    // collect, sort, dedup.
    let shares_vertex = |a: &[usize; 3], b: &[usize; 3]| {
        a.iter().any(|va| b.contains(va))
    };
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for list in buckets.values() {
        for (pos, &i) in list.iter().enumerate() {
            for &j in &list[pos + 1..] {
                if !shares_vertex(&mesh.triangles[i], &mesh.triangles[j]) {
                    candidates.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let candidate_pairs = candidates.len();

    let hit = candidates
        .par_iter()
        .filter_map(|&(i, j)| {
            tri_tri_intersection(&corners(&mesh.triangles[i]), &corners(&mesh.triangles[j]))
                .map(|p| (i, j, p))
        })
        .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

    let verdict = match hit {
        Some((i, j, p)) => Embeddedness::SelfIntersecting {
            triangles: (i, j),
            point: [p[0], p[1], p[2]],
        },
        None => Embeddedness::Embedded,
    };
    Ok(EmbeddingVerdict {
        verdict,
        triangle_count: mesh.triangles.len(),
        degenerate_triangles,
        cells_checked,
        candidate_pairs,
    })
}

/// Exact triangle–triangle intersection; returns a common point when one
/// exists. Interval method: early out on one-sided plane separation, then
/// overlap the two intersection segments on the plane-intersection line;
/// coplanar pairs fall through to a 2D overlap test.
fn tri_tri_intersection(
    a: &[Vector3<f64>; 3],
    b: &[Vector3<f64>; 3],
) -> Option<Vector3<f64>> {
    let nb = (b[1] - b[0]).cross(&(b[2] - b[0]));
    let na = (a[1] - a[0]).cross(&(a[2] - a[0]));
    if na.norm() == 0.0 || nb.norm() == 0.0 {
        return None;
    }

    let da = plane_distances(a, &nb, &b[0]);
    let sa = signs(&da, TRI_EPS * nb.norm());
    if sa.iter().all(|&s| s > 0) || sa.iter().all(|&s| s < 0) {
        return None;
    }
    let db = plane_distances(b, &na, &a[0]);
    let sb = signs(&db, TRI_EPS * na.norm());
    if sb.iter().all(|&s| s > 0) || sb.iter().all(|&s| s < 0) {
        return None;
    }

    if sa.iter().all(|&s| s == 0) {
        // A lies in B's plane; as both are non-degenerate the planes
        // coincide, so the pair is coplanar.
        return coplanar_intersection(a, b, &nb);
    }

    let dir = na.cross(&nb);
    let pts_a = plane_crossings(a, &da, &sa);
    let pts_b = plane_crossings(b, &db, &sb);
    let ia = line_interval(&pts_a, &dir)?;
    let ib = line_interval(&pts_b, &dir)?;
    let (lo_t, lo_p) = if ia.0 .0 >= ib.0 .0 { ia.0 } else { ib.0 };
    let (hi_t, hi_p) = if ia.1 .0 <= ib.1 .0 { ia.1 } else { ib.1 };
    if lo_t > hi_t + TRI_EPS * dir.norm() {
        return None;
    }
    Some((lo_p + hi_p) / 2.0)
}

fn plane_distances(
    tri: &[Vector3<f64>; 3],
    normal: &Vector3<f64>,
    on_plane: &Vector3<f64>,
) -> [f64; 3] {
    let d = -normal.dot(on_plane);
    [
        normal.dot(&tri[0]) + d,
        normal.dot(&tri[1]) + d,
        normal.dot(&tri[2]) + d,
    ]
}

fn signs(d: &[f64; 3], eps: f64) -> [i8; 3] {
    let cls = |x: f64| {
        if x > eps {
            1
        } else if x < -eps {
            -1
        } else {
            0
        }
    };
    [cls(d[0]), cls(d[1]), cls(d[2])]
}

/// Points where a triangle meets the plane that produced the signed
/// distances `d`: vertices lying on the plane plus edge crossings between
/// strictly opposite sides. One point for a vertex touch, two generically.
fn plane_crossings(
    tri: &[Vector3<f64>; 3],
    d: &[f64; 3],
    s: &[i8; 3],
) -> Vec<Vector3<f64>> {
    let mut pts = Vec::with_capacity(2);
    for i in 0..3 {
        if s[i] == 0 {
            pts.push(tri[i]);
        }
        let j = (i + 1) % 3;
        if i32::from(s[i]) * i32::from(s[j]) == -1 {
            let t = d[i] / (d[i] - d[j]);
            pts.push(tri[i] + (tri[j] - tri[i]) * t);
        }
    }
    pts
}

type IntervalEnd = (f64, Vector3<f64>);

/// Project crossing points onto the line direction; return the (min, max)
/// ends with their 3D points.
fn line_interval(
    pts: &[Vector3<f64>],
    dir: &Vector3<f64>,
) -> Option<(IntervalEnd, IntervalEnd)> {
    let mut lo: Option<IntervalEnd> = None;
    let mut hi: Option<IntervalEnd> = None;
    for &p in pts {
        let t = dir.dot(&p);
        if lo.is_none() || t < lo.unwrap().0 {
            lo = Some((t, p));
        }
        if hi.is_none() || t > hi.unwrap().0 {
            hi = Some((t, p));
        }
    }
    Some((lo?, hi?))
}

/// Coplanar overlap test: project to the dominant plane of the normal, look
/// for a proper edge–edge crossing, then for full containment.
fn coplanar_intersection(
    a: &[Vector3<f64>; 3],
    b: &[Vector3<f64>; 3],
    normal: &Vector3<f64>,
) -> Option<Vector3<f64>> {
    let k = normal.iamax(); // dominant axis to drop
    let (u, v) = ((k + 1) % 3, (k + 2) % 3);
    let proj = |p: &Vector3<f64>| (p[u], p[v]);
    let a2 = [proj(&a[0]), proj(&a[1]), proj(&a[2])];
    let b2 = [proj(&b[0]), proj(&b[1]), proj(&b[2])];
    let scale = a2
        .iter()
        .chain(&b2)
        .map(|&(x, y)| x.abs().max(y.abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    let eps = TRI_EPS * scale * scale;

    for i in 0..3 {
        let (p1, p2) = (a2[i], a2[(i + 1) % 3]);
        for j in 0..3 {
            let (q1, q2) = (b2[j], b2[(j + 1) % 3]);
            if let Some(t) = seg_seg_param(p1, p2, q1, q2, eps) {
                let p3 = a[i] + (a[(i + 1) % 3] - a[i]) * t;
                return Some(p3);
            }
        }
    }
    if point_in_tri_2d(a2[0], &b2, eps) {
        return Some(a[0]);
    }
    if point_in_tri_2d(b2[0], &a2, eps) {
        return Some(b[0]);
    }
    None
}

fn orient2d(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Parameter on segment `p1→p2` of a proper crossing with `q1→q2`, if any.
fn seg_seg_param(
    p1: (f64, f64),
    p2: (f64, f64),
    q1: (f64, f64),
    q2: (f64, f64),
    eps: f64,
) -> Option<f64> {
    let d1 = orient2d(q1, q2, p1);
    let d2 = orient2d(q1, q2, p2);
    let d3 = orient2d(p1, p2, q1);
    let d4 = orient2d(p1, p2, q2);
    let straddle =
        |x: f64, y: f64| (x > eps && y < -eps) || (x < -eps && y > eps);
    if straddle(d1, d2) && straddle(d3, d4) {
        Some(d1 / (d1 - d2))
    } else {
        None
    }
}

fn point_in_tri_2d(p: (f64, f64), tri: &[(f64, f64); 3], eps: f64) -> bool {
    let d0 = orient2d(tri[0], tri[1], p);
    let d1 = orient2d(tri[1], tri[2], p);
    let d2 = orient2d(tri[2], tri[0], p);
    let all_nonneg = d0 >= -eps && d1 >= -eps && d2 >= -eps;
    let all_nonpos = d0 <= eps && d1 <= eps && d2 <= eps;
    all_nonneg || all_nonpos
}
