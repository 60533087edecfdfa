//! Minkowski-spacetime linear algebra and the hyperboloid model.
//!
//! Vectors live in `R^{1,n+1}` with coordinates `(x₀, x₁, …, x_{n+1})` and
//! inner product `⟨u,v⟩ = −u₀v₀ + Σ_{i≥1} uᵢvᵢ`. Three level sets matter:
//! the hyperboloid `⟨x,x⟩ = −1, x₀ > 0` (hyperbolic space `H^{n+1}`), the de
//! Sitter sphere `⟨x,x⟩ = 1` (unit normals), and the positive null cone
//! `⟨x,x⟩ = 0, x₀ > 0` (light-cone data). Conversion to the Poincaré ball is
//! provided for rendering and for intersection tests, which are run in ball
//! coordinates.

use crate::tolerances::MODEL_TOL;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point or vector of Minkowski space `R^{1,n+1}`, stored as
/// `(x₀, x₁, …, x_{n+1})`. The sphere dimension is `n = coords.len() - 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiVector {
    coords: Vec<f64>,
}

impl MinkowskiVector {
    /// Wraps raw coordinates `(x₀, …, x_{n+1})`; requires `n ≥ 2` and finite
    /// entries.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "Minkowski vector needs at least 4 coordinates (n ≥ 2), got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(
                "Minkowski vector has non-finite coordinates".into(),
            ));
        }
        Ok(Self { coords })
    }

    /// Sphere dimension `n` (the ambient space is `R^{1,n+1}`).
    pub fn sphere_dim(&self) -> usize {
        self.coords.len() - 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Time component `x₀`.
    pub fn time(&self) -> f64 {
        self.coords[0]
    }

    /// Spatial components `(x₁, …, x_{n+1})`.
    pub fn spatial(&self) -> &[f64] {
        &self.coords[1..]
    }

    /// The hyperboloid base point `𝒪 = (1, 0, …, 0)` for sphere dimension `n`.
    pub fn base_point(n: usize) -> Self {
        let mut coords = vec![0.0; n + 2];
        coords[0] = 1.0;
        Self { coords }
    }

    /// Builds `(x₀, spatial)` from parts.
    pub fn from_parts(time: f64, spatial: &[f64]) -> Result<Self> {
        let mut coords = Vec::with_capacity(spatial.len() + 1);
        coords.push(time);
        coords.extend_from_slice(spatial);
        Self::new(coords)
    }

    /// Componentwise `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch(
                self.coords.len(),
                other.coords.len(),
            ));
        }
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + s * b)
            .collect();
        Ok(Self { coords })
    }

    /// Componentwise scaling.
    pub fn scale(&self, s: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }
}

/// Minkowski inner product `−u₀v₀ + Σ_{i≥1} uᵢvᵢ`.
pub fn mink_inner(u: &MinkowskiVector, v: &MinkowskiVector) -> Result<f64> {
    if u.coords.len() != v.coords.len() {
        return Err(Error::DimensionMismatch(u.coords.len(), v.coords.len()));
    }
    let mut acc = -u.coords[0] * v.coords[0];
    for i in 1..u.coords.len() {
        acc += u.coords[i] * v.coords[i];
    }
    Ok(acc)
}

/// The model level sets distinguished by [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelClass {
    /// `⟨v,v⟩ = −1`, `v₀ > 0`: hyperbolic space.
    Hyperboloid,
    /// `⟨v,v⟩ = 1`: unit spacelike vectors.
    DeSitter,
    /// `⟨v,v⟩ = 0`, `v₀ > 0`: future-pointing null vectors.
    NullConePlus,
    Other,
}

/// Classifies a vector against the three model sets, tested in the order
/// hyperboloid, de Sitter, positive null cone.
pub fn classify(v: &MinkowskiVector, tol: f64) -> ModelClass {
    let q = mink_inner(v, v).expect("self inner product");
    if (q + 1.0).abs() <= tol && v.time() > 0.0 {
        ModelClass::Hyperboloid
    } else if (q - 1.0).abs() <= tol {
        ModelClass::DeSitter
    } else if q.abs() <= tol && v.time() > 0.0 {
        ModelClass::NullConePlus
    } else {
        ModelClass::Other
    }
}

/// A point of the open unit ball of `R^{n+1}` (Poincaré ball model).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    coords: Vec<f64>,
}

impl BallPoint {
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

fn require_hyperboloid(p: &MinkowskiVector, tol: f64) -> Result<()> {
    let q = mink_inner(p, p)?;
    if (q + 1.0).abs() > tol || p.time() <= 0.0 {
        return Err(Error::OffModel {
            model: "hyperboloid".to_string(),
            residual: (q + 1.0).abs(),
            tol,
        });
    }
    Ok(())
}

/// Projects a hyperboloid point to the Poincaré ball:
/// `(x₁, …, x_{n+1}) / (1 + x₀)`.
pub fn to_poincare_ball(p: &MinkowskiVector, tol: f64) -> Result<BallPoint> {
    require_hyperboloid(p, tol)?;
    let denom = 1.0 + p.time();
    Ok(BallPoint {
        coords: p.spatial().iter().map(|c| c / denom).collect(),
    })
}

/// Hyperbolic distance `arccosh(−⟨p,q⟩)` between hyperboloid points. The
/// arccosh argument is clamped to `[1, ∞)`: near-coincident points produce
/// arguments like `1 − 1e−16`.
pub fn hyperbolic_distance(p: &MinkowskiVector, q: &MinkowskiVector, tol: f64) -> Result<f64> {
    require_hyperboloid(p, tol)?;
    require_hyperboloid(q, tol)?;
    let arg = (-mink_inner(p, q)?).max(1.0);
    Ok(arg.acosh())
}

/// Convenience wrappers using [`MODEL_TOL`].
pub fn to_poincare_ball_default(p: &MinkowskiVector) -> Result<BallPoint> {
    to_poincare_ball(p, MODEL_TOL)
}

pub fn hyperbolic_distance_default(p: &MinkowskiVector, q: &MinkowskiVector) -> Result<f64> {
    hyperbolic_distance(p, q, MODEL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mv(coords: &[f64]) -> MinkowskiVector {
        MinkowskiVector::new(coords.to_vec()).unwrap()
    }

    /// Random hyperboloid point: normalize a random timelike direction.
    fn random_hyperboloid(rng: &mut impl Rng, n: usize) -> MinkowskiVector {
        let spatial: Vec<f64> = (0..n + 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s2: f64 = spatial.iter().map(|c| c * c).sum();
        let time = (1.0 + s2).sqrt();
        MinkowskiVector::from_parts(time, &spatial).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let o = mv(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(mink_inner(&o, &o).unwrap(), -1.0);
        let null = mv(&[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(mink_inner(&null, &null).unwrap(), 0.0);
        let e1 = mv(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(mink_inner(&o, &e1).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_is_bilinear_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u = random_hyperboloid(&mut rng, 2);
            let v = random_hyperboloid(&mut rng, 2);
            let w = random_hyperboloid(&mut rng, 2);
            let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let uv = mink_inner(&u, &v).unwrap();
            let vu = mink_inner(&v, &u).unwrap();
            assert!((uv - vu).abs() < 1e-12);
            // ⟨a·u + b·v, w⟩ = a⟨u,w⟩ + b⟨v,w⟩
            let lin = u.scale(a).axpy(b, &v).unwrap();
            let lhs = mink_inner(&lin, &w).unwrap();
            let rhs = a * mink_inner(&u, &w).unwrap() + b * mink_inner(&v, &w).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let u = mv(&[1.0, 0.0, 0.0, 0.0]);
        let v = mv(&[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            mink_inner(&u, &v),
            Err(Error::DimensionMismatch(4, 5))
        ));
    }

    #[test]
    fn classify_examples() {
        let tol = 1e-12;
        assert_eq!(
            classify(&mv(&[1.0, 0.0, 0.0, 0.0]), tol),
            ModelClass::Hyperboloid
        );
        assert_eq!(
            classify(&mv(&[0.0, 1.0, 0.0, 0.0]), tol),
            ModelClass::DeSitter
        );
        assert_eq!(
            classify(&mv(&[2.0, 2.0, 0.0, 0.0]), tol),
            ModelClass::NullConePlus
        );
        // Past-pointing null vector falls through to Other.
        assert_eq!(classify(&mv(&[-2.0, 2.0, 0.0, 0.0]), tol), ModelClass::Other);
    }

    #[test]
    fn classify_random_normalized_timelike() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = random_hyperboloid(&mut rng, 3);
            assert_eq!(classify(&p, 1e-9), ModelClass::Hyperboloid);
        }
    }

    #[test]
    fn ball_projection_examples() {
        let tol = 1e-9;
        let center = to_poincare_ball(&mv(&[1.0, 0.0, 0.0, 0.0]), tol).unwrap();
        assert_eq!(center.coords(), &[0.0, 0.0, 0.0]);

        let p = to_poincare_ball(&mv(&[1f64.cosh(), 1f64.sinh(), 0.0, 0.0]), tol).unwrap();
        // sinh t / (1 + cosh t) = tanh(t/2)
        assert!((p.coords()[0] - 0.5f64.tanh()).abs() < 1e-15);
        assert_eq!(&p.coords()[1..], &[0.0, 0.0]);

        let q = to_poincare_ball(&mv(&[2f64.cosh(), 0.0, 2f64.sinh(), 0.0]), tol).unwrap();
        assert!((q.coords()[1] - 1f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn ball_projection_radius_is_tanh_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let t: f64 = rng.gen_range(0.0..5.0);
            // Random unit direction ω.
            let mut w: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm: f64 = w.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm < 1e-3 {
                continue;
            }
            w.iter_mut().for_each(|c| *c /= norm);
            let spatial: Vec<f64> = w.iter().map(|c| c * t.sinh()).collect();
            let p = MinkowskiVector::from_parts(t.cosh(), &spatial).unwrap();
            let b = to_poincare_ball(&p, 1e-9).unwrap();
            assert!(b.norm() < 1.0);
            assert!((b.norm() - (t / 2.0).tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn off_model_input_is_rejected() {
        let v = mv(&[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            to_poincare_ball(&v, 1e-9),
            Err(Error::OffModel { .. })
        ));
        let o = mv(&[1.0, 0.0, 0.0, 0.0]);
        assert!(hyperbolic_distance(&v, &o, 1e-9).is_err());
    }

    #[test]
    fn distance_examples() {
        let tol = 1e-9;
        let o = mv(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(hyperbolic_distance(&o, &o, tol).unwrap(), 0.0);
        let p = mv(&[1f64.cosh(), 1f64.sinh(), 0.0, 0.0]);
        assert!((hyperbolic_distance(&o, &p, tol).unwrap() - 1.0).abs() < 1e-12);
        let q = mv(&[1f64.cosh(), -(1f64.sinh()), 0.0, 0.0]);
        // −⟨p,q⟩ = cosh²1 + sinh²1 = cosh 2
        assert!((hyperbolic_distance(&p, &q, tol).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distance_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let a = random_hyperboloid(&mut rng, 2);
            let b = random_hyperboloid(&mut rng, 2);
            let c = random_hyperboloid(&mut rng, 2);
            let ab = hyperbolic_distance(&a, &b, 1e-9).unwrap();
            let bc = hyperbolic_distance(&b, &c, 1e-9).unwrap();
            let ac = hyperbolic_distance(&a, &c, 1e-9).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }
    }
}
