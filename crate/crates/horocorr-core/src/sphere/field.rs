//! Scalar fields on the sphere with analytic or finite-difference
//! derivative evaluators.
//!
//! Derivatives are *intrinsic*: gradients are ambient vectors tangent to the
//! sphere and Hessians are the covariant bilinear form `∇²f` expressed in an
//! orthonormal tangent frame. Finite differencing happens in a stereographic
//! chart; because the chart is conformal, the covariant correction reduces to
//! the conformal Christoffel symbols `Γᵏₐᵦ = δₖₐ∂ᵦw + δₖᵦ∂ₐw − δₐᵦ∂ₖw` with
//! `w = ln λ`. Skipping that correction is *not* an option: it is exactly
//! what makes the flat example's curvature tensor vanish.

use super::chart::{Atlas, StereographicChart};
use super::{canonical_frame, dot, SpherePoint, TangentFrame, TangentVector};
use crate::tolerances::{FD_GRADIENT_STEP, FD_HESSIAN_STEP};
use crate::Result;
use nalgebra::DMatrix;
use std::sync::Arc;

pub type ValueFn = Arc<dyn Fn(&SpherePoint) -> f64 + Send + Sync>;
/// Analytic gradient: ambient components of the tangent vector ∇f(x).
pub type GradientFn = Arc<dyn Fn(&SpherePoint) -> Vec<f64> + Send + Sync>;
/// Analytic Hessian: the bilinear form in the supplied orthonormal frame.
pub type HessianFn = Arc<dyn Fn(&SpherePoint, &TangentFrame) -> DMatrix<f64> + Send + Sync>;

/// How derivatives of a field are produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldMode {
    Analytic,
    FiniteDifference {
        gradient_step: f64,
        hessian_step: f64,
    },
}

/// A scalar field on `S^n` with value/gradient/Hessian evaluators.
#[derive(Clone)]
pub struct ScalarFieldOnSphere {
    value: ValueFn,
    analytic: Option<(GradientFn, HessianFn)>,
    gradient_step: f64,
    hessian_step: f64,
}

impl std::fmt::Debug for ScalarFieldOnSphere {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarFieldOnSphere")
            .field("mode", &self.mode())
            .finish()
    }
}

impl ScalarFieldOnSphere {
    pub fn analytic(value: ValueFn, gradient: GradientFn, hessian: HessianFn) -> Self {
        Self {
            value,
            analytic: Some((gradient, hessian)),
            gradient_step: FD_GRADIENT_STEP,
            hessian_step: FD_HESSIAN_STEP,
        }
    }

    /// Field with derivatives by central differences at the default steps.
    pub fn finite_difference(value: ValueFn) -> Self {
        Self::finite_difference_with_steps(value, FD_GRADIENT_STEP, FD_HESSIAN_STEP)
    }

    pub fn finite_difference_with_steps(
        value: ValueFn,
        gradient_step: f64,
        hessian_step: f64,
    ) -> Self {
        Self {
            value,
            analytic: None,
            gradient_step,
            hessian_step,
        }
    }

    /// The constant field `ρ ≡ c`.
    pub fn constant(c: f64) -> Self {
        Self::analytic(
            Arc::new(move |_| c),
            Arc::new(|x: &SpherePoint| vec![0.0; x.coords().len()]),
            Arc::new(|x: &SpherePoint, _f: &TangentFrame| {
                DMatrix::zeros(x.sphere_dim(), x.sphere_dim())
            }),
        )
    }

    /// Rotationally symmetric field `f(x) = F(x·axis)` from the profile `F`
    /// and its first two derivatives. Gradient and covariant Hessian follow
    /// in closed form:
    /// `∇f = F′(c)·(axis − c·x)` and, in an orthonormal frame `êᵢ`,
    /// `(∇²f)ᵢⱼ = −c·F′(c)·δᵢⱼ + F″(c)·(axis·êᵢ)(axis·êⱼ)` with `c = x·axis`.
    pub fn from_axial_profile(
        axis: SpherePoint,
        profile: Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>,
    ) -> Self {
        let ax_v = axis.clone();
        let ax_g = axis.clone();
        let ax_h = axis;
        let p_v = profile.clone();
        let p_g = profile.clone();
        let p_h = profile;
        Self::analytic(
            Arc::new(move |x: &SpherePoint| p_v(dot(x.coords(), ax_v.coords())).0),
            Arc::new(move |x: &SpherePoint| {
                let c = dot(x.coords(), ax_g.coords());
                let (_, f1, _) = p_g(c);
                ax_g.coords()
                    .iter()
                    .zip(x.coords())
                    .map(|(p, xc)| f1 * (p - c * xc))
                    .collect()
            }),
            Arc::new(move |x: &SpherePoint, frame: &TangentFrame| {
                let c = dot(x.coords(), ax_h.coords());
                let (_, f1, f2) = p_h(c);
                let n = x.sphere_dim();
                let w: Vec<f64> = frame
                    .vectors()
                    .iter()
                    .map(|e| dot(e, ax_h.coords()))
                    .collect();
                DMatrix::from_fn(n, n, |i, j| {
                    let diag = if i == j { -c * f1 } else { 0.0 };
                    diag + f2 * w[i] * w[j]
                })
            }),
        )
    }

    pub fn mode(&self) -> FieldMode {
        if self.analytic.is_some() {
            FieldMode::Analytic
        } else {
            FieldMode::FiniteDifference {
                gradient_step: self.gradient_step,
                hessian_step: self.hessian_step,
            }
        }
    }

    /// A finite-difference view of the same values (drops analytic
    /// evaluators); used for analytic-vs-FD cross checks.
    pub fn as_finite_difference(&self) -> Self {
        Self {
            value: self.value.clone(),
            analytic: None,
            gradient_step: self.gradient_step,
            hessian_step: self.hessian_step,
        }
    }

    pub fn value(&self, x: &SpherePoint) -> f64 {
        (self.value)(x)
    }

    /// Intrinsic gradient at `x`.
    pub fn gradient(&self, x: &SpherePoint) -> Result<TangentVector> {
        match &self.analytic {
            Some((g, _)) => TangentVector::new(x.clone(), g(x)),
            None => sph_gradient(self.value.as_ref(), x, self.gradient_step),
        }
    }

    /// Covariant Hessian at `x` as a symmetric matrix in `frame`.
    pub fn hessian_in_frame(&self, x: &SpherePoint, frame: &TangentFrame) -> Result<DMatrix<f64>> {
        match &self.analytic {
            Some((_, h)) => Ok(h(x, frame)),
            None => sph_hessian_in_frame(self.value.as_ref(), x, frame, self.hessian_step),
        }
    }

    /// Covariant Hessian in the canonical frame at `x`.
    pub fn hessian(&self, x: &SpherePoint) -> Result<DMatrix<f64>> {
        self.hessian_in_frame(x, &canonical_frame(x))
    }
}

fn default_chart_for(x: &SpherePoint) -> StereographicChart {
    let atlas = Atlas::new(SpherePoint::north(x.sphere_dim()));
    atlas.charts()[atlas.chart_for(x)].clone()
}

/// Finite-difference intrinsic gradient in the default atlas chart for `x`.
pub fn sph_gradient(
    f: &dyn Fn(&SpherePoint) -> f64,
    x: &SpherePoint,
    step: f64,
) -> Result<TangentVector> {
    sph_gradient_in_chart(f, x, step, &default_chart_for(x))
}

/// Finite-difference intrinsic gradient computed in a caller-specified chart.
/// Central differences in chart coordinates, converted to an ambient tangent
/// vector through the chart's orthonormal coordinate frame; the result is
/// chart-independent up to `O(step²)`.
pub fn sph_gradient_in_chart(
    f: &dyn Fn(&SpherePoint) -> f64,
    x: &SpherePoint,
    step: f64,
    chart: &StereographicChart,
) -> Result<TangentVector> {
    let u = chart.forward(x)?;
    let n = u.len();
    let lam = chart.conformal_factor(&u);
    let frame = chart.orthonormal_frame(&u);
    let mut ambient = vec![0.0; x.coords().len()];
    for a in 0..n {
        let mut up = u.clone();
        let mut um = u.clone();
        up[a] += step;
        um[a] -= step;
        let df = (f(&chart.inverse(&up)) - f(&chart.inverse(&um))) / (2.0 * step);
        // Orthonormal-frame component of the gradient is ∂ₐF/λ.
        let comp = df / lam;
        for k in 0..ambient.len() {
            ambient[k] += comp * frame.vectors()[a][k];
        }
    }
    TangentVector::new(x.clone(), ambient)
}

/// Finite-difference covariant Hessian in the canonical frame at `x`.
pub fn sph_hessian(
    f: &dyn Fn(&SpherePoint) -> f64,
    x: &SpherePoint,
    step: f64,
) -> Result<DMatrix<f64>> {
    sph_hessian_in_frame(f, x, &canonical_frame(x), step)
}

/// Finite-difference covariant Hessian in a caller-supplied orthonormal
/// frame, using the default atlas chart for `x`.
pub fn sph_hessian_in_frame(
    f: &dyn Fn(&SpherePoint) -> f64,
    x: &SpherePoint,
    frame: &TangentFrame,
    step: f64,
) -> Result<DMatrix<f64>> {
    sph_hessian_in_chart_frame(f, x, frame, step, &default_chart_for(x))
}

/// Finite-difference covariant Hessian in `frame`, differencing in `chart`.
pub fn sph_hessian_in_chart_frame(
    f: &dyn Fn(&SpherePoint) -> f64,
    x: &SpherePoint,
    frame: &TangentFrame,
    step: f64,
    chart: &StereographicChart,
) -> Result<DMatrix<f64>> {
    let u = chart.forward(x)?;
    let n = u.len();
    let h = step;
    let eval = |v: &[f64]| f(&chart.inverse(v));
    let f0 = eval(&u);

    // First and second coordinate partials of F(u) = f(inverse(u)).
    let mut d1 = vec![0.0; n];
    let mut d2 = DMatrix::zeros(n, n);
    for a in 0..n {
        let mut up = u.clone();
        let mut um = u.clone();
        up[a] += h;
        um[a] -= h;
        let fp = eval(&up);
        let fm = eval(&um);
        d1[a] = (fp - fm) / (2.0 * h);
        d2[(a, a)] = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let mut upp = u.clone();
            upp[a] += h;
            upp[b] += h;
            let mut upm = u.clone();
            upm[a] += h;
            upm[b] -= h;
            let mut ump = u.clone();
            ump[a] -= h;
            ump[b] += h;
            let mut umm = u.clone();
            umm[a] -= h;
            umm[b] -= h;
            let mixed = (eval(&upp) - eval(&upm) - eval(&ump) + eval(&umm)) / (4.0 * h * h);
            d2[(a, b)] = mixed;
            d2[(b, a)] = mixed;
        }
    }

    // Covariant correction: H_ab = ∂²_ab F − Γᵏ_ab ∂_k F with the conformal
    // Christoffels Γᵏ_ab = δ_ka w_b + δ_kb w_a − δ_ab w_k, w = ln λ.
    let w = chart.log_factor_gradient(&u);
    let mut cov = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut gamma_term = d1[a] * w[b] + d1[b] * w[a];
            if a == b {
                gamma_term -= dot(&w, &d1);
            }
            cov[(a, b)] = d2[(a, b)] - gamma_term;
        }
    }

    // Orthonormalize: coordinate frame has length λ, so divide by λ².
    let lam = chart.conformal_factor(&u);
    cov /= lam * lam;

    // Rotate from the chart's orthonormal frame into the requested frame.
    let chart_frame = chart.orthonormal_frame(&u);
    let r = DMatrix::from_fn(n, n, |a, j| {
        dot(&chart_frame.vectors()[a], &frame.vectors()[j])
    });
    Ok(r.transpose() * cov * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::chart::Atlas;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_sphere_point(rng: &mut impl Rng, n: usize) -> SpherePoint {
        loop {
            let coords: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if super::super::norm(&coords) > 0.1 {
                return SpherePoint::new(coords).unwrap();
            }
        }
    }

    /// Height field x ↦ x·e₁ as an axial profile: F(c) = c.
    fn height_field(n: usize) -> ScalarFieldOnSphere {
        ScalarFieldOnSphere::from_axial_profile(
            SpherePoint::axis(n, 0),
            Arc::new(|c| (c, 1.0, 0.0)),
        )
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let f = ScalarFieldOnSphere::constant(3.5);
        let x = SpherePoint::new(vec![0.5, -0.5, 0.7]).unwrap();
        assert_eq!(f.value(&x), 3.5);
        assert!(f.gradient(&x).unwrap().norm() < 1e-15);
        assert!(f.hessian(&x).unwrap().amax() < 1e-15);

        // Same through the FD path.
        let fd = f.as_finite_difference();
        assert!(fd.gradient(&x).unwrap().norm() < 1e-9);
        assert!(fd.hessian(&x).unwrap().amax() < 1e-7);
    }

    #[test]
    fn height_field_gradient_at_equator_is_unit() {
        // ∇(cos θ) = −sin θ ∂θ has norm 1 at θ = π/2, pointing toward e.
        let f = height_field(2);
        let x = SpherePoint::new(vec![0.0, 1.0, 0.0]).unwrap();
        let g = f.gradient(&x).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-12);
        assert!((g.components()[0] - 1.0).abs() < 1e-12);

        let fd = sph_gradient(&|p: &SpherePoint| p.coords()[0], &x, 1e-4).unwrap();
        for k in 0..3 {
            assert!((fd.components()[k] - g.components()[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn height_field_hessian_is_minus_c_identity() {
        let f = height_field(2);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..30 {
            let x = random_sphere_point(&mut rng, 2);
            let c = x.coords()[0];
            let h = f.hessian(&x).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let expect = if i == j { -c } else { 0.0 };
                    assert!((h[(i, j)] - expect).abs() < 1e-12);
                }
            }
            // FD agrees to O(step²).
            let hf = sph_hessian(&|p: &SpherePoint| p.coords()[0], &x, 1e-3).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((hf[(i, j)] - h[(i, j)]).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn hessian_is_tensorial_under_frame_rotation() {
        let f = height_field(2);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let x = random_sphere_point(&mut rng, 2);
            let frame = canonical_frame(&x);
            // Rotate the frame by a random angle in the tangent plane.
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let (c, s) = (a.cos(), a.sin());
            let e0: Vec<f64> = (0..3)
                .map(|k| c * frame.vectors()[0][k] + s * frame.vectors()[1][k])
                .collect();
            let e1: Vec<f64> = (0..3)
                .map(|k| -s * frame.vectors()[0][k] + c * frame.vectors()[1][k])
                .collect();
            let rotated = TangentFrame::from_vectors(x.clone(), vec![e0, e1]).unwrap();
            let h = f.hessian_in_frame(&x, &frame).unwrap();
            let hr = f.hessian_in_frame(&x, &rotated).unwrap();
            let r = nalgebra::Matrix2::new(c, -s, s, c);
            let expected = r.transpose() * nalgebra::Matrix2::new(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]) * r;
            for i in 0..2 {
                for j in 0..2 {
                    assert!((hr[(i, j)] - expected[(i, j)]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn chart_independence_of_fd_derivatives() {
        // North- and south-pole charts must agree within 10·step² away from
        // both poles.
        let atlas = Atlas::new(SpherePoint::north(2));
        let f = |p: &SpherePoint| (2.0 * p.coords()[0] + 0.3).sin() + p.coords()[1];
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let gstep = 1e-4;
        let hstep = 1e-3;
        for _ in 0..20 {
            let mut x = random_sphere_point(&mut rng, 2);
            while x.coords()[2].abs() > 0.7 {
                x = random_sphere_point(&mut rng, 2);
            }
            let g0 = sph_gradient_in_chart(&f, &x, gstep, &atlas.charts()[0]).unwrap();
            let g1 = sph_gradient_in_chart(&f, &x, gstep, &atlas.charts()[1]).unwrap();
            for k in 0..3 {
                assert!((g0.components()[k] - g1.components()[k]).abs() < 10.0 * gstep * gstep);
            }
            let frame = canonical_frame(&x);
            let h0 = sph_hessian_in_chart_frame(&f, &x, &frame, hstep, &atlas.charts()[0]).unwrap();
            let h1 = sph_hessian_in_chart_frame(&f, &x, &frame, hstep, &atlas.charts()[1]).unwrap();
            assert!((&h0 - &h1).amax() < 10.0 * hstep * hstep);
            // Symmetry defect stays well inside the FD tolerance.
            assert!((h0[(0, 1)] - h0[(1, 0)]).abs() < 1e-6);
        }
    }

    #[test]
    fn fd_converges_at_second_order() {
        // Halving the step twice should shrink the error ~4× each time.
        let f = height_field(2);
        let value = |p: &SpherePoint| p.coords()[0];
        let x = SpherePoint::new(vec![0.4, -0.7, 0.59]).unwrap();
        let exact = f.hessian(&x).unwrap();
        let mut errors = Vec::new();
        for step in [4e-2, 2e-2, 1e-2] {
            let h = sph_hessian(&value, &x, step).unwrap();
            errors.push((&h - &exact).amax());
        }
        assert!(errors[0] / errors[1] > 3.0);
        assert!(errors[1] / errors[2] > 3.0);
    }
}
