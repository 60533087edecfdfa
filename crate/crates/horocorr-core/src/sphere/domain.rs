//! Domain specifications `Ω ⊂ S^n`.
//!
//! A [`DomainSpec`] is the *open* region a conformal factor lives on, plus a
//! default `margin` that grid builders keep between nodes and `∂Ω`. Membership
//! tests are purely kind-level (the margin never shrinks `Ω` itself): boundary
//! approach sequences and probes may get arbitrarily close to `∂Ω` while mesh
//! nodes stay `margin` away.

use super::{spherical_distance, SpherePoint};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum DomainKind {
    /// The whole sphere; no boundary.
    FullSphere,
    /// The sphere minus finitely many points.
    PuncturedAtPoints(Vec<SpherePoint>),
    /// Complement of the closed geodesic cap of the given angular radius.
    CapComplement {
        center: SpherePoint,
        angular_radius: f64,
    },
    /// Points whose polar angle from `axis` lies in `(theta_min, theta_max)`.
    LatitudeBand {
        axis: SpherePoint,
        theta_min: f64,
        theta_max: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// Default distance grid builders keep from `∂Ω` (radians, ≥ 0).
    pub margin: f64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) {
            return Err(Error::InvalidInput(format!("margin must be ≥ 0, got {margin}")));
        }
        match &kind {
            DomainKind::FullSphere => {}
            DomainKind::PuncturedAtPoints(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidInput("no punctures given".into()));
                }
                for (i, p) in points.iter().enumerate() {
                    for q in points.iter().skip(i + 1) {
                        if spherical_distance(p, q) < 1e-9 {
                            return Err(Error::InvalidInput("punctures must be distinct".into()));
                        }
                    }
                }
            }
            DomainKind::CapComplement { angular_radius, .. } => {
                if !(*angular_radius > 0.0 && *angular_radius < std::f64::consts::PI) {
                    return Err(Error::InvalidInput(format!(
                        "cap radius must lie in (0, π), got {angular_radius}"
                    )));
                }
            }
            DomainKind::LatitudeBand {
                theta_min,
                theta_max,
                ..
            } => {
                if !(theta_min < theta_max) {
                    return Err(Error::InvalidInput(format!(
                        "band needs theta_min < theta_max, got [{theta_min}, {theta_max}]"
                    )));
                }
            }
        }
        Ok(Self { kind, margin })
    }

    pub fn full_sphere() -> Self {
        Self {
            kind: DomainKind::FullSphere,
            margin: 0.0,
        }
    }

    /// Sphere dimension, if the kind pins one down.
    pub fn sphere_dim(&self) -> Option<usize> {
        match &self.kind {
            DomainKind::FullSphere => None,
            DomainKind::PuncturedAtPoints(p) => Some(p[0].sphere_dim()),
            DomainKind::CapComplement { center, .. } => Some(center.sphere_dim()),
            DomainKind::LatitudeBand { axis, .. } => Some(axis.sphere_dim()),
        }
    }

    /// Kind-level membership in the open domain.
    pub fn contains(&self, x: &SpherePoint) -> bool {
        match &self.kind {
            DomainKind::FullSphere => true,
            DomainKind::PuncturedAtPoints(points) => points
                .iter()
                .all(|p| spherical_distance(p, x) > 1e-12),
            DomainKind::CapComplement {
                center,
                angular_radius,
            } => spherical_distance(center, x) > *angular_radius,
            DomainKind::LatitudeBand {
                axis,
                theta_min,
                theta_max,
            } => {
                let theta = spherical_distance(axis, x);
                theta > *theta_min && theta < *theta_max
            }
        }
    }

    /// Distance from `x` to `∂Ω`; infinite when there is no boundary.
    pub fn boundary_distance(&self, x: &SpherePoint) -> f64 {
        match &self.kind {
            DomainKind::FullSphere => f64::INFINITY,
            DomainKind::PuncturedAtPoints(points) => points
                .iter()
                .map(|p| spherical_distance(p, x))
                .fold(f64::INFINITY, f64::min),
            DomainKind::CapComplement {
                center,
                angular_radius,
            } => spherical_distance(center, x) - angular_radius,
            DomainKind::LatitudeBand {
                axis,
                theta_min,
                theta_max,
            } => {
                let theta = spherical_distance(axis, x);
                (theta - theta_min).min(theta_max - theta)
            }
        }
    }

    /// Whether the domain has a boundary at all.
    pub fn has_boundary(&self) -> bool {
        !matches!(self.kind, DomainKind::FullSphere)
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            DomainKind::FullSphere => "full sphere".into(),
            DomainKind::PuncturedAtPoints(p) => format!("sphere with {} puncture(s)", p.len()),
            DomainKind::CapComplement { angular_radius, .. } => {
                format!("complement of a cap of radius {angular_radius}")
            }
            DomainKind::LatitudeBand {
                theta_min,
                theta_max,
                ..
            } => format!("latitude band θ ∈ ({theta_min}, {theta_max})"),
        }
    }
}
