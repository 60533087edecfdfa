//! Calculus on the round sphere `S^n ⊂ R^{n+1}`.
//!
//! Submodules provide the stereographic atlas ([`chart`]), scalar fields with
//! analytic or finite-difference derivative evaluators ([`field`]), domain
//! specifications ([`domain`]) and parameter grids ([`grid`]). This module
//! holds the point/vector types, deterministic tangent frames, geodesics and
//! distances.

pub mod chart;
pub mod domain;
pub mod field;
pub mod grid;

use crate::tolerances::{SPHERE_UNIT_TOL, TANGENT_TOL};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub use chart::StereographicChart;
pub use domain::{DomainKind, DomainSpec};
pub use field::{FieldMode, ScalarFieldOnSphere};
pub use grid::{build_grid, ChartMap, GridChart, GridNode, ParameterGrid};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A unit vector of `R^{n+1}`, i.e. a point of `S^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Normalizes the input to unit length. Errors on near-zero input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "sphere point needs at least 3 coordinates (n ≥ 2), got {}",
                coords.len()
            )));
        }
        let n = norm(&coords);
        if !n.is_finite() || n < 1e-14 {
            return Err(Error::InvalidInput(
                "cannot normalize a near-zero vector to the sphere".into(),
            ));
        }
        let coords: Vec<f64> = coords.into_iter().map(|c| c / n).collect();
        debug_assert!((norm(&coords) - 1.0).abs() <= SPHERE_UNIT_TOL);
        Ok(Self { coords })
    }

    /// `i`-th standard basis point `e_i` of `R^{n+1}` (so `axis(n, n)` is the
    /// "north pole" `e_{n+1}` in 1-based language).
    pub fn axis(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[i] = 1.0;
        Self { coords }
    }

    /// North pole `e_{n+1}` of `S^n`.
    pub fn north(n: usize) -> Self {
        Self::axis(n, n)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Sphere dimension `n` (ambient `R^{n+1}`).
    pub fn sphere_dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn antipode(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    /// Cosine of the angle to another point.
    pub fn cos_angle(&self, other: &Self) -> f64 {
        dot(&self.coords, &other.coords).clamp(-1.0, 1.0)
    }
}

/// Great-circle distance (the angle between the points).
pub fn spherical_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    // 2*atan2(|a-b|, |a+b|) resolves tiny and near-antipodal angles to full
    // precision, unlike acos of the dot product which loses half its digits
    // at both ends of [0, pi].
    let mut diff2 = 0.0;
    let mut sum2 = 0.0;
    for (x, y) in a.coords().iter().zip(b.coords()) {
        diff2 += (x - y) * (x - y);
        sum2 += (x + y) * (x + y);
    }
    2.0 * diff2.sqrt().atan2(sum2.sqrt())
}

/// An ambient vector tangent to the sphere at `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    base: SpherePoint,
    vec: Vec<f64>,
}

impl TangentVector {
    /// Projects out any radial component, then checks the tangency defect.
    pub fn new(base: SpherePoint, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.coords.len() {
            return Err(Error::DimensionMismatch(vec.len(), base.coords.len()));
        }
        let radial = dot(&vec, &base.coords);
        let vec: Vec<f64> = vec
            .iter()
            .zip(&base.coords)
            .map(|(v, x)| v - radial * x)
            .collect();
        let defect = dot(&vec, &base.coords).abs();
        if defect > TANGENT_TOL {
            return Err(Error::InvalidInput(format!(
                "tangency defect {defect:e} exceeds {TANGENT_TOL:e}"
            )));
        }
        Ok(Self { base, vec })
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        norm(&self.vec)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(Error::InvalidInput(
                "cannot normalize a zero tangent vector".into(),
            ));
        }
        Ok(Self {
            base: self.base.clone(),
            vec: self.vec.iter().map(|c| c / n).collect(),
        })
    }
}

/// An orthonormal basis of the tangent space at `base`, stored as `n` ambient
/// vectors.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    base: SpherePoint,
    vectors: Vec<Vec<f64>>,
}

impl TangentFrame {
    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Components of an ambient vector in this frame (the vector is assumed
    /// tangent at the same base point).
    pub fn components_of(&self, ambient: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|e| dot(e, ambient)).collect()
    }

    /// Builds from explicit vectors; validates orthonormality and tangency.
    pub fn from_vectors(base: SpherePoint, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let n = base.sphere_dim();
        if vectors.len() != n {
            return Err(Error::DimensionMismatch(vectors.len(), n));
        }
        for (i, v) in vectors.iter().enumerate() {
            if dot(v, base.coords()).abs() > TANGENT_TOL {
                return Err(Error::InvalidInput(format!("frame vector {i} not tangent")));
            }
            for (j, w) in vectors.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot(v, w) - expect).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "frame vectors {i},{j} not orthonormal"
                    )));
                }
            }
        }
        Ok(Self { base, vectors })
    }
}

/// Deterministic orthonormal tangent frame at `x`: Gram–Schmidt over the
/// standard basis of `R^{n+1}`, skipping directions that project onto the
/// tangent space with norm below 1e-6.
pub fn canonical_frame(x: &SpherePoint) -> TangentFrame {
    let n = x.sphere_dim();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..=n {
        if vectors.len() == n {
            break;
        }
        // Project e_i onto the tangent space, then against collected vectors.
        let mut v: Vec<f64> = (0..=n)
            .map(|k| (if k == i { 1.0 } else { 0.0 }) - x.coords[i] * x.coords[k])
            .collect();
        for w in &vectors {
            let c = dot(&v, w);
            v.iter_mut().zip(w).for_each(|(vk, wk)| *vk -= c * wk);
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            v.iter_mut().for_each(|c| *c /= nv);
            vectors.push(v);
        }
    }
    debug_assert_eq!(vectors.len(), n);
    TangentFrame {
        base: x.clone(),
        vectors,
    }
}

/// Unit-speed great-circle geodesic `cos(t)·x + sin(t)·v`, renormalized.
pub fn sphere_geodesic(x: &SpherePoint, v: &TangentVector, t: f64) -> Result<SpherePoint> {
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "geodesic direction must be unit, |v| = {}",
            v.norm()
        )));
    }
    let coords: Vec<f64> = x
        .coords
        .iter()
        .zip(&v.vec)
        .map(|(xc, vc)| t.cos() * xc + t.sin() * vc)
        .collect();
    SpherePoint::new(coords)
}

/// Geodesic midpoint of two non-antipodal points (slerp at 1/2).
pub fn geodesic_midpoint(a: &SpherePoint, b: &SpherePoint) -> Result<SpherePoint> {
    let sum: Vec<f64> = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
    SpherePoint::new(sum)
}
