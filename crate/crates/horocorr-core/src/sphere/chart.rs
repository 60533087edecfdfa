//! Stereographic charts and the two-chart atlas.
//!
//! The chart with pole `p` maps `S^n ∖ {p}` onto `R^n`: the antipode of `p`
//! goes to the origin and the equator of `p` to the unit sphere of `R^n`.
//! The round metric pulls back to `(4/(1+|u|²)²)·(Euclidean)`, so
//! [`StereographicChart::conformal_factor`] returns `2/(1+|u|²)` and the
//! coordinate frame `∂/∂uₐ` divided by that factor is orthonormal.

use super::{canonical_frame, dot, SpherePoint, TangentFrame};
#[cfg(test)]
use super::norm;
use crate::{Error, Result};

/// Stereographic projection from `pole`, with a deterministic orthonormal
/// basis `b₁, …, bₙ` of the hyperplane `pole^⊥` fixing the chart axes.
#[derive(Clone, Debug)]
pub struct StereographicChart {
    pole: SpherePoint,
    basis: Vec<Vec<f64>>,
}

impl StereographicChart {
    pub fn new(pole: SpherePoint) -> Self {
        let basis = canonical_frame(&pole).vectors().to_vec();
        Self { pole, basis }
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Chart coordinates of `x`: `uₐ = (x·bₐ)/(1 − x·p)`. Errors at the pole.
    pub fn forward(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        let c = dot(x.coords(), self.pole.coords());
        let denom = 1.0 - c;
        if denom.abs() < 1e-14 {
            return Err(Error::MathDomain(
                "stereographic forward evaluated at the chart pole".into(),
            ));
        }
        Ok(self
            .basis
            .iter()
            .map(|b| dot(x.coords(), b) / denom)
            .collect())
    }

    /// Inverse chart map: `(2u·b + (|u|²−1)p) / (1+|u|²)`.
    pub fn inverse(&self, u: &[f64]) -> SpherePoint {
        let s = 1.0 + dot(u, u);
        let n_amb = self.pole.coords().len();
        let mut coords = vec![0.0; n_amb];
        for (ua, b) in u.iter().zip(&self.basis) {
            for k in 0..n_amb {
                coords[k] += 2.0 * ua * b[k] / s;
            }
        }
        let pc = (dot(u, u) - 1.0) / s;
        for k in 0..n_amb {
            coords[k] += pc * self.pole.coords()[k];
        }
        SpherePoint::new(coords).expect("inverse chart point is unit by construction")
    }

    /// Conformal factor `λ(u) = 2/(1+|u|²)`: the round metric is `λ²·δ` in
    /// chart coordinates.
    pub fn conformal_factor(&self, u: &[f64]) -> f64 {
        2.0 / (1.0 + dot(u, u))
    }

    /// The orthonormal coordinate frame `êₐ = (∂x/∂uₐ)/λ` at chart position
    /// `u`, in ambient coordinates: `êₐ = bₐ + uₐ·p − uₐ·x`.
    pub fn orthonormal_frame(&self, u: &[f64]) -> TangentFrame {
        let x = self.inverse(u);
        let n_amb = self.pole.coords().len();
        let vectors: Vec<Vec<f64>> = u
            .iter()
            .zip(&self.basis)
            .map(|(ua, b)| {
                (0..n_amb)
                    .map(|k| b[k] + ua * self.pole.coords()[k] - ua * x.coords()[k])
                    .collect()
            })
            .collect();
        TangentFrame::from_vectors(x, vectors).expect("chart frame is orthonormal")
    }

    /// Gradient of `w = ln λ` in chart coordinates: `∂ₐw = −λ·uₐ`. This is
    /// the only ingredient of the conformal Christoffel symbols
    /// `Γᵏₐᵦ = δₖₐ∂ᵦw + δₖᵦ∂ₐw − δₐᵦ∂ₖw`.
    pub fn log_factor_gradient(&self, u: &[f64]) -> Vec<f64> {
        let lam = self.conformal_factor(u);
        u.iter().map(|ua| -lam * ua).collect()
    }
}

/// The two-chart atlas used for full-sphere work: charts at `axis` and its
/// antipode. Points are assigned to the chart whose pole is *farther*, so the
/// chart coordinates stay within the unit disk plus seam band.
#[derive(Clone, Debug)]
pub struct Atlas {
    charts: [StereographicChart; 2],
}

impl Atlas {
    pub fn new(axis: SpherePoint) -> Self {
        let anti = axis.antipode();
        Self {
            charts: [
                StereographicChart::new(axis.clone()),
                StereographicChart::new(anti),
            ],
        }
    }

    pub fn charts(&self) -> &[StereographicChart; 2] {
        &self.charts
    }

    /// Index of the chart covering `x` best (the pole farther from `x`).
    pub fn chart_for(&self, x: &SpherePoint) -> usize {
        let c0 = dot(x.coords(), self.charts[0].pole().coords());
        // Chart 0 has pole `axis`; use it when x is closer to the antipode.
        if c0 <= 0.0 {
            0
        } else {
            1
        }
    }
}

/// Verifies that `v` has unit norm within `tol` (helper shared by tests).
#[cfg(test)]
pub(crate) fn assert_unit(v: &[f64], tol: f64) -> bool {
    (norm(v) - 1.0).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::spherical_distance;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_sphere_point(rng: &mut impl Rng, n: usize) -> SpherePoint {
        loop {
            let coords: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if norm(&coords) > 0.1 {
                return SpherePoint::new(coords).unwrap();
            }
        }
    }

    #[test]
    fn south_pole_maps_to_origin() {
        let chart = StereographicChart::new(SpherePoint::north(2));
        let south = SpherePoint::north(2).antipode();
        let u = chart.forward(&south).unwrap();
        assert!(norm(&u) < 1e-15);
        assert!((chart.conformal_factor(&[0.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn equator_maps_to_unit_circle() {
        let chart = StereographicChart::new(SpherePoint::north(2));
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = SpherePoint::new(vec![phi.cos(), phi.sin(), 0.0]).unwrap();
            let u = chart.forward(&x).unwrap();
            assert!((norm(&u) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_forward_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for n in [2usize, 3] {
            let chart = StereographicChart::new(random_sphere_point(&mut rng, n));
            for _ in 0..100 {
                let x = random_sphere_point(&mut rng, n);
                // Within 0.1 of the pole |u| = cot(theta/2) exceeds ~20 and the
                // round trip amplifies rounding by |u|^2; stay clear of that.
                if spherical_distance(&x, chart.pole()) < 0.1 {
                    continue;
                }
                let u = chart.forward(&x).unwrap();
                let y = chart.inverse(&u);
                assert!(spherical_distance(&x, &y) < 1e-12);
            }
        }
    }

    #[test]
    fn forward_at_pole_errors() {
        let chart = StereographicChart::new(SpherePoint::north(2));
        assert!(chart.forward(&SpherePoint::north(2)).is_err());
    }

    #[test]
    fn pullback_metric_is_conformal() {
        // Finite-difference the inverse map and compare ⟨∂ₐx, ∂ᵦx⟩ with λ²δₐᵦ.
        let chart = StereographicChart::new(SpherePoint::new(vec![0.3, -0.4, 0.86]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h = 1e-5;
        for _ in 0..50 {
            let u: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let lam = chart.conformal_factor(&u);
            for a in 0..2 {
                for b in 0..2 {
                    let mut up = u.clone();
                    let mut um = u.clone();
                    up[a] += h;
                    um[a] -= h;
                    let da: Vec<f64> = chart
                        .inverse(&up)
                        .coords()
                        .iter()
                        .zip(chart.inverse(&um).coords())
                        .map(|(p, m)| (p - m) / (2.0 * h))
                        .collect();
                    up = u.clone();
                    um = u.clone();
                    up[b] += h;
                    um[b] -= h;
                    let db: Vec<f64> = chart
                        .inverse(&up)
                        .coords()
                        .iter()
                        .zip(chart.inverse(&um).coords())
                        .map(|(p, m)| (p - m) / (2.0 * h))
                        .collect();
                    let expect = if a == b { lam * lam } else { 0.0 };
                    assert!((dot(&da, &db) - expect).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn chart_frame_matches_scaled_coordinate_frame() {
        let chart = StereographicChart::new(SpherePoint::north(3));
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let h = 1e-6;
        for _ in 0..20 {
            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.2..1.2)).collect();
            let frame = chart.orthonormal_frame(&u);
            let lam = chart.conformal_factor(&u);
            for a in 0..3 {
                let mut up = u.clone();
                let mut um = u.clone();
                up[a] += h;
                um[a] -= h;
                let fd: Vec<f64> = chart
                    .inverse(&up)
                    .coords()
                    .iter()
                    .zip(chart.inverse(&um).coords())
                    .map(|(p, m)| (p - m) / (2.0 * h))
                    .collect();
                for k in 0..4 {
                    assert!((frame.vectors()[a][k] * lam - fd[k]).abs() < 1e-8);
                }
                assert!(assert_unit(&frame.vectors()[a], 1e-12));
            }
        }
    }
}
