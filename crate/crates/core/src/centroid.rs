//! L_p-sine and L_p-cosine centroid bodies, evaluated through their
//! spherical (polar-coordinate) form.
//!
//! For a star body `K` and `p >= 1`,
//!
//! ```text
//! h_{Lambda_p K}(x)^p = n w_n / ((n+p) c~_{n,p} V(K)) * int [x,u]^p rho_K(u)^{n+p} du
//! h_{Gamma_p K}(x)^p  = n w_n / ((n+p) c_{n,p}  V(K)) * int |x.u|^p rho_K(u)^{n+p} du
//! ```
//!
//! and the polar bodies have `rho = 1 / h`. Sums are formed with the
//! exponent shifted by the largest node mass, so large `p` neither overflows
//! nor underflows. When `p` is not an even integer the kernel has a
//! non-smooth zero (at `u = +-x` for the sine kernel, at `u = +-psi x` for the
//! cosine kernel in the plane); there the integrand is split as
//! `k^p (rho^{n+p} - rho_0^{n+p}) + k^p rho_0^{n+p}` with the second part
//! integrated exactly, which removes the leading quadrature error.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::body::{check_dim, BodyRef, GridCache, StarBody};
use crate::error::{Error, Result};
use crate::geometry::{self, dot, CompensatedSum};
use crate::quadrature::{self, check_rule, SphericalRule};
use crate::search::{maximize, SearchSettings};

/// Kernel of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// `[x, u]^p`: the L_p-sine centroid body `Lambda_p K`.
    Sine,
    /// `|x . u|^p`: the classical L_p centroid body `Gamma_p K`.
    Cosine,
}

/// Whether a [`CentroidBody`] represents the centroid body or its polar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Body,
    Polar,
}

/// Above this `p` the kernel is smooth enough that the singular split is
/// skipped (it would also overflow for very elongated bodies).
const SPLIT_MAX_P: f64 = 16.0;

/// `Lambda_p K`, `Lambda_p° K`, `Gamma_p K` or `Gamma_p° K` built on a fixed
/// quadrature rule.
pub struct CentroidBody {
    parent: BodyRef,
    p: f64,
    flavor: Flavor,
    polarity: Polarity,
    rule: Arc<SphericalRule>,
    parent_volume: f64,
    /// `w_i rho_i^{n+p} / e^shift`
    mass: Vec<f64>,
    shift: f64,
    /// `ln(n w_n / ((n+p) c V(K)))`
    ln_norm: f64,
    /// Exact integral of the kernel `int k(e, u)^p du` over the sphere.
    kernel_mean: f64,
    split: bool,
    node_rho: OnceBox<Vec<f64>>,
    grid: GridCache,
    polar_grid: GridCache,
}

impl core::fmt::Debug for CentroidBody {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CentroidBody")
            .field("parent", &self.parent.label())
            .field("p", &self.p)
            .field("flavor", &self.flavor)
            .field("polarity", &self.polarity)
            .field("rule", &self.rule.id())
            .field("parent_volume", &self.parent_volume)
            .finish()
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

use crate::geometry::is_even_integer;

/// `t^k` for a non-negative integer `k` by repeated squaring.
fn powi(mut t: f64, mut k: u64) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= t;
        }
        t *= t;
        k >>= 1;
    }
    acc
}

impl CentroidBody {
    /// Builds the transform of `parent` on `rule`.
    pub fn new(
        parent: BodyRef,
        p: f64,
        flavor: Flavor,
        polarity: Polarity,
        rule: Arc<SphericalRule>,
    ) -> Result<Self> {
        check_p(p)?;
        check_rule(parent.as_ref(), &rule)?;
        let n = parent.dim();
        let nf = n as f64;
        let parent_rho = parent.rho_on(&rule);
        for (i, r) in parent_rho.iter().enumerate() {
            if !(r.is_finite() && *r > 0.0) {
                return Err(Error::NonFinite { node: i, value: *r });
            }
        }
        let powers: Vec<f64> = parent_rho.iter().map(|r| libm::pow(*r, nf)).collect();
        let parent_volume = geometry::omega(nf) * rule.integrate_values(&powers)?;
        if !(parent_volume > 0.0) {
            return Err(Error::ZeroVolume);
        }
        let log_mass: Vec<f64> = parent_rho
            .iter()
            .zip(rule.weights())
            .map(|(r, w)| libm::log(*w) + (nf + p) * libm::log(*r))
            .collect();
        let shift = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mass = log_mass.iter().map(|a| libm::exp(a - shift)).collect();
        let (ln_c, kernel_mean) = match flavor {
            Flavor::Sine => (
                geometry::ln_c_tilde(n, p),
                libm::exp(geometry::ln_projection_moment(n, n - 1, p)),
            ),
            Flavor::Cosine => (
                geometry::ln_c_np(n, p),
                libm::exp(geometry::ln_projection_moment(n, 1, p)),
            ),
        };
        let ln_norm = libm::log(nf) + geometry::ln_omega(nf)
            - libm::log(nf + p)
            - ln_c
            - libm::log(parent_volume);
        let split = !is_even_integer(p)
            && p < SPLIT_MAX_P
            && (flavor == Flavor::Sine || n == 2);
        Ok(Self {
            parent,
            p,
            flavor,
            polarity,
            rule,
            parent_volume,
            mass,
            shift,
            ln_norm,
            kernel_mean,
            split,
            node_rho: OnceBox::new(),
            grid: GridCache::default(),
            polar_grid: GridCache::default(),
        })
    }

    /// `Lambda_p K` on `rule`.
    pub fn sine(parent: BodyRef, p: f64, rule: Arc<SphericalRule>) -> Result<Self> {
        Self::new(parent, p, Flavor::Sine, Polarity::Body, rule)
    }

    /// `Lambda_p° K` on `rule`.
    pub fn sine_polar(parent: BodyRef, p: f64, rule: Arc<SphericalRule>) -> Result<Self> {
        Self::new(parent, p, Flavor::Sine, Polarity::Polar, rule)
    }

    /// `Gamma_p K` on `rule`.
    pub fn cosine(parent: BodyRef, p: f64, rule: Arc<SphericalRule>) -> Result<Self> {
        Self::new(parent, p, Flavor::Cosine, Polarity::Body, rule)
    }

    /// `Gamma_p° K` on `rule`.
    pub fn cosine_polar(parent: BodyRef, p: f64, rule: Arc<SphericalRule>) -> Result<Self> {
        Self::new(parent, p, Flavor::Cosine, Polarity::Polar, rule)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn parent(&self) -> &BodyRef {
        &self.parent
    }

    pub fn rule(&self) -> &Arc<SphericalRule> {
        &self.rule
    }

    /// `V(K)` of the parent on the construction rule.
    pub fn parent_volume(&self) -> f64 {
        self.parent_volume
    }

    /// `k(e, u)^2` for unit `e`, `u`.
    #[inline]
    fn kernel_sq(&self, e: &[f64], u: &[f64]) -> f64 {
        let d = dot(e, u);
        match self.flavor {
            Flavor::Sine => (1.0 - d * d).max(0.0),
            Flavor::Cosine => d * d,
        }
    }

    /// Natural log of `int k(e, u)^p rho_K(u)^{n+p} du` for unit `e`.
    pub(crate) fn ln_transform_unit(&self, e: &[f64]) -> f64 {
        let half = 0.5 * self.p;
        let even = is_even_integer(self.p);
        let kp = |t: f64| if even { powi(t, half as u64) } else { libm::pow(t, half) };
        let mut acc = CompensatedSum::default();
        if self.split {
            let rho0 = match self.flavor {
                Flavor::Sine => self.parent.rho(e),
                Flavor::Cosine => self.parent.rho(&[-e[1], e[0]]),
            };
            let nf = self.parent.dim() as f64;
            let m0 = libm::exp((nf + self.p) * libm::log(rho0) - self.shift);
            for ((u, m), w) in self.rule.nodes().zip(&self.mass).zip(self.rule.weights()) {
                acc.add(kp(self.kernel_sq(e, u)) * (m - w * m0));
            }
            acc.add(self.kernel_mean * m0);
        } else {
            for (u, m) in self.rule.nodes().zip(&self.mass) {
                acc.add(kp(self.kernel_sq(e, u)) * m);
            }
        }
        self.shift + libm::log(acc.value())
    }

    /// `ln h(e)` of the (non-polar) centroid body at a unit vector.
    fn ln_support_unit(&self, e: &[f64]) -> f64 {
        (self.ln_norm + self.ln_transform_unit(e)) / self.p
    }

    /// Support function of the centroid body (not its polar) at any `x`.
    pub fn centroid_support(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match geometry::normalized(x) {
            None => 0.0,
            Some(e) => geometry::norm(x) * libm::exp(self.ln_support_unit(&e)),
        })
    }

    /// The transform `int k(x, u)^p rho_K(u)^{n+p} du` at any `x`.
    pub fn transform(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match geometry::normalized(x) {
            None => 0.0,
            Some(e) => libm::exp(self.p * libm::log(geometry::norm(x)) + self.ln_transform_unit(&e)),
        })
    }

    fn polar_rho_unit(&self, e: &[f64]) -> f64 {
        libm::exp(-self.ln_support_unit(e))
    }

    fn node_values(&self) -> &[f64] {
        self.node_rho.get_or_init(|| {
            Box::new(self.rule.nodes().map(|u| self.rho(u)).collect())
        })
    }
}

impl StarBody for CentroidBody {
    fn dim(&self) -> usize {
        self.parent.dim()
    }

    fn rho(&self, u: &[f64]) -> f64 {
        match self.polarity {
            Polarity::Polar => self.polar_rho_unit(u),
            Polarity::Body => {
                // rho_{Lambda K}(u) = 1 / h_{Lambda° K}(u)
                let n = self.dim();
                let grid: Option<Vec<f64>> = Some(
                    crate::search::default_grid(n)
                        .nodes()
                        .zip(self.polar_grid.get_with(n, |v| self.polar_rho_unit(v)))
                        .map(|(v, r)| r * dot(u, v))
                        .collect(),
                );
                let (h, _) = maximize(
                    n,
                    |v| self.polar_rho_unit(v) * dot(u, v),
                    grid.as_deref(),
                    &[],
                    &SearchSettings::default(),
                );
                1.0 / h
            }
        }
    }

    fn label(&self) -> String {
        let name = match (self.flavor, self.polarity) {
            (Flavor::Sine, Polarity::Body) => "sine_centroid",
            (Flavor::Sine, Polarity::Polar) => "sine_centroid_polar",
            (Flavor::Cosine, Polarity::Body) => "centroid",
            (Flavor::Cosine, Polarity::Polar) => "centroid_polar",
        };
        format!("{name}[p={}]({})", self.p, self.parent.label())
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn is_smooth(&self) -> bool {
        self.parent.is_smooth()
    }

    fn exact_support(&self, u: &[f64]) -> Option<f64> {
        match self.polarity {
            Polarity::Body => Some(libm::exp(self.ln_support_unit(u))),
            Polarity::Polar => None,
        }
    }

    fn rule_id(&self) -> Option<String> {
        Some(self.rule.id())
    }

    fn rho_on(&self, rule: &SphericalRule) -> Vec<f64> {
        if rule.id() == self.rule.id() {
            self.node_values().to_vec()
        } else {
            rule.nodes().map(|u| self.rho(u)).collect()
        }
    }

    fn grid_rho(&self) -> Option<&[f64]> {
        Some(self.grid.get(self))
    }
}

/// `int [x,u]^p rho_K(u)^{n+p} du`.
pub fn lp_sine_transform(k: BodyRef, p: f64, x: &[f64], rule: Arc<SphericalRule>) -> Result<f64> {
    CentroidBody::sine(k, p, rule)?.transform(x)
}

/// `h_{Lambda_p K}(x)`.
pub fn sine_centroid_support(k: BodyRef, p: f64, x: &[f64], rule: Arc<SphericalRule>) -> Result<f64> {
    CentroidBody::sine(k, p, rule)?.centroid_support(x)
}

/// `rho_{Lambda_p° K}(u)` for a unit `u`.
pub fn sine_centroid_polar_radial(
    k: BodyRef,
    p: f64,
    u: &[f64],
    rule: Arc<SphericalRule>,
) -> Result<f64> {
    check_dim(k.dim(), u.len())?;
    geometry::check_unit(u)?;
    Ok(CentroidBody::sine_polar(k, p, rule)?.rho(u))
}

/// `h_{Gamma_p K}(x)`.
pub fn cosine_centroid_support(k: BodyRef, p: f64, x: &[f64], rule: Arc<SphericalRule>) -> Result<f64> {
    CentroidBody::cosine(k, p, rule)?.centroid_support(x)
}

/// Relative difference between `V~_{-p}(K, Lambda_p° L) / V(K)` and
/// `V~_{-p}(L, Lambda_p° K) / V(L)`, which agree exactly in theory.
pub fn fubini_symmetry_gap(k: BodyRef, l: BodyRef, p: f64, rule: Arc<SphericalRule>) -> Result<f64> {
    let lam_k = CentroidBody::sine_polar(k.clone(), p, rule.clone())?;
    let lam_l = CentroidBody::sine_polar(l.clone(), p, rule.clone())?;
    let a = quadrature::dual_mixed_volume(k.as_ref(), &lam_l, p, &rule)? / lam_k.parent_volume();
    let b = quadrature::dual_mixed_volume(l.as_ref(), &lam_k, p, &rule)? / lam_l.parent_volume();
    Ok((a - b).abs() / a.abs().max(b.abs()))
}

/// `(V(Lambda_p° Lambda_p° K), V(K))`.
pub fn iterated_polar_volume_check(k: BodyRef, p: f64, rule: Arc<SphericalRule>) -> Result<(f64, f64)> {
    let once = CentroidBody::sine_polar(k, p, rule.clone())?;
    let base_volume = once.parent_volume();
    let twice = CentroidBody::sine_polar(Arc::new(once), p, rule.clone())?;
    Ok((quadrature::volume(&twice, &rule)?, base_volume))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{BodyDescriptor, BodyExt};
    use crate::quadrature::RuleSpec;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn rule(dim: usize) -> Arc<SphericalRule> {
        Arc::new(RuleSpec::default_for(dim).build(dim).unwrap())
    }

    fn ball(dim: usize, r: f64) -> BodyRef {
        Arc::new(BodyDescriptor::ball(dim, r).unwrap())
    }

    #[test]
    fn transform_of_ball_matches_projection_moment() {
        // int [e1, u]^2 du over S^2 equals int |P u|^2 du for a plane: 2/3
        let t = lp_sine_transform(ball(3, 1.0), 2.0, &[1.0, 0.0, 0.0], rule(3)).unwrap();
        assert_relative_eq!(t, 2.0 / 3.0, max_relative = 1e-13);
        let t2 = lp_sine_transform(ball(3, 1.0), 2.0, &[2.0, 0.0, 0.0], rule(3)).unwrap();
        assert_relative_eq!(t2, 4.0 * t, max_relative = 1e-13);
        assert_eq!(lp_sine_transform(ball(3, 1.0), 2.0, &[0.0; 3], rule(3)).unwrap(), 0.0);
    }

    #[test]
    fn ball_is_fixed() {
        for dim in [2, 3] {
            for p in [1.0, 2.0, 3.5, 4.0, 8.0, 40.0] {
                let body = CentroidBody::sine(ball(dim, 1.0), p, rule(dim)).unwrap();
                let mut x = alloc::vec![0.0; dim];
                x[0] = 0.6;
                x[1] = -0.8;
                assert_relative_eq!(body.centroid_support(&x).unwrap(), 1.0, max_relative = 1e-12);
            }
        }
        let h = sine_centroid_support(ball(3, 2.0), 2.0, &[1.0, 0.0, 0.0], rule(3)).unwrap();
        assert_relative_eq!(h, 2.0, max_relative = 1e-12);
        let r = sine_centroid_polar_radial(ball(3, 2.0), 2.0, &[0.0, 1.0, 0.0], rule(3)).unwrap();
        assert_relative_eq!(r, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn cosine_normalization() {
        // in R^3 the cosine kernel is non-smooth along a great circle, so only
        // even p are integrated to rounding accuracy
        let h = cosine_centroid_support(ball(3, 1.0), 2.0, &[0.0, 0.0, 1.0], rule(3)).unwrap();
        assert_relative_eq!(h, 1.0, max_relative = 1e-12);
        let h = cosine_centroid_support(ball(3, 1.0), 1.0, &[0.0, 0.0, 1.0], rule(3)).unwrap();
        assert_relative_eq!(h, 1.0, max_relative = 1e-3);
        for p in [1.0, 2.0, 5.0] {
            let h = cosine_centroid_support(ball(2, 1.0), p, &[0.0, 1.0], rule(2)).unwrap();
            assert_relative_eq!(h, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn planar_rotation_relation() {
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[1.0, 2.0]).unwrap());
        for p in [1.0, 2.0, 3.0] {
            let s = CentroidBody::sine(e.clone(), p, rule(2)).unwrap();
            let c = CentroidBody::cosine(e.clone(), p, rule(2)).unwrap();
            for k in 0..7 {
                let t = 0.37 * k as f64;
                let x = [libm::cos(t), libm::sin(t)];
                // psi^t x
                let y = [x[1], -x[0]];
                assert_relative_eq!(
                    s.centroid_support(&x).unwrap(),
                    c.centroid_support(&y).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn split_improves_non_even_p() {
        // the singular split must agree with a much finer plain sum
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[1.0, 1.5, 2.0]).unwrap());
        let u = geometry::normalized(&[0.2, 0.5, -0.7]).unwrap();
        let coarse = CentroidBody::sine(e.clone(), 1.0, rule(3)).unwrap();
        let fine_rule = Arc::new(
            RuleSpec::Gauss {
                polar: 256,
                azimuth: 512,
            }
            .build(3)
            .unwrap(),
        );
        let fine = CentroidBody::sine(e, 1.0, fine_rule).unwrap();
        assert_relative_eq!(
            coarse.centroid_support(&u).unwrap(),
            fine.centroid_support(&u).unwrap(),
            max_relative = 2e-7
        );
    }

    #[test]
    fn polar_radial_inverts_support() {
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[1.0, 1.0, 2.0]).unwrap());
        let body = CentroidBody::sine(e.clone(), 2.0, rule(3)).unwrap();
        let polar = CentroidBody::sine_polar(e, 2.0, rule(3)).unwrap();
        for u in [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.6, 0.0, 0.8]] {
            let prod = body.centroid_support(&u).unwrap() * polar.radial(&u).unwrap();
            assert_relative_eq!(prod, 1.0, max_relative = 1e-14);
        }
        // the spheroid produces an anisotropic polar body
        let a = polar.radial(&[0.0, 0.0, 1.0]).unwrap();
        let b = polar.radial(&[1.0, 0.0, 0.0]).unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn scaling_of_polar() {
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[1.0, 2.0, 1.5]).unwrap());
        let e3: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[3.0, 6.0, 4.5]).unwrap());
        let a = CentroidBody::sine_polar(e, 3.0, rule(3)).unwrap();
        let b = CentroidBody::sine_polar(e3, 3.0, rule(3)).unwrap();
        let u = geometry::normalized(&[1.0, -2.0, 0.5]).unwrap();
        assert_relative_eq!(b.rho(&u), a.rho(&u) / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn centroid_body_radial_is_inverse_polar_support() {
        let b = CentroidBody::sine(ball(3, 1.0), 2.0, rule(3)).unwrap();
        assert_relative_eq!(b.radial(&[0.0, 1.0, 0.0]).unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn fubini_and_iterated_for_balls() {
        let gap = fubini_symmetry_gap(ball(3, 1.0), ball(3, 1.0), 2.0, rule(3)).unwrap();
        assert!(gap < 1e-10);
        let r = Arc::new(RuleSpec::Gauss { polar: 16, azimuth: 32 }.build(3).unwrap());
        let (v2, v) = iterated_polar_volume_check(ball(3, 2.0), 2.0, r).unwrap();
        assert_relative_eq!(v, 32.0 * PI / 3.0, max_relative = 1e-12);
        assert_relative_eq!(v2, v, max_relative = 1e-10);
    }

    #[test]
    fn rule_mixing_is_refused() {
        let a: BodyRef = Arc::new(CentroidBody::sine_polar(ball(3, 1.0), 2.0, rule(3)).unwrap());
        let other = Arc::new(RuleSpec::Gauss { polar: 8, azimuth: 16 }.build(3).unwrap());
        assert!(matches!(
            CentroidBody::sine_polar(a.clone(), 2.0, other.clone()),
            Err(Error::MixedRules { .. })
        ));
        assert!(matches!(quadrature::volume(a.as_ref(), &other), Err(Error::MixedRules { .. })));
    }

    #[test]
    fn invalid_p() {
        assert!(CentroidBody::sine(ball(2, 1.0), 0.5, rule(2)).is_err());
        assert!(CentroidBody::sine(ball(2, 1.0), f64::NAN, rule(2)).is_err());
    }
}
