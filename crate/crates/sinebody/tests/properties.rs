use std::sync::Arc;

use proptest::prelude::*;
use sinebody_core::centroid::CentroidBody;
use sinebody_core::geometry::{self, dot, norm, sine_bracket};
use sinebody_core::harness::{self, CheckOptions};
use sinebody_core::sine_polar::{self, node_intersection_radial, supporting_cylinders};
use sinebody_core::{
    linear_image, polar, quadrature, BodyDescriptor, BodyExt, BodyRef, LinearMap, RuleSpec, SphericalRule, StarBody,
};

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 3).prop_filter("nonzero", |v| norm(v) > 1e-3)
}

fn vecn(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n).prop_filter("nonzero", |v| norm(v) > 1e-3)
}

fn unit3() -> impl Strategy<Value = Vec<f64>> {
    vec3().prop_map(|v| geometry::normalized(&v).unwrap())
}

fn spheroid(a: f64, b: f64) -> BodyRef {
    Arc::new(BodyDescriptor::ellipsoid(&[a, a, b]).unwrap())
}

fn rule(spec: &str, dim: usize) -> Arc<SphericalRule> {
    Arc::new(spec.parse::<RuleSpec>().unwrap().build(dim).unwrap())
}

fn scaled(x: &[f64], c: f64) -> Vec<f64> {
    x.iter().map(|v| v * c).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_symmetric_and_bounded(x in vec3(), y in vec3()) {
        let a = sine_bracket(&x, &y).unwrap();
        let b = sine_bracket(&y, &x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        prop_assert!(a >= 0.0);
        prop_assert!(a <= norm(&x) * norm(&y) * (1.0 + 1e-12));
    }

    #[test]
    fn bracket_extremes(x in vec3(), t in -4.0f64..4.0) {
        prop_assume!(t.abs() > 1e-3);
        let parallel = scaled(&x, t);
        prop_assert!(sine_bracket(&x, &parallel).unwrap() <= 1e-6 * norm(&x) * norm(&parallel));
        let mut orth = geometry::proj_perp(&[0.3, -0.7, 1.1], &geometry::normalized(&x).unwrap()).unwrap();
        if norm(&orth) < 1e-6 {
            orth = geometry::proj_perp(&[1.0, 0.2, 0.0], &geometry::normalized(&x).unwrap()).unwrap();
        }
        let s = sine_bracket(&x, &orth).unwrap();
        prop_assert!((s - norm(&x) * norm(&orth)).abs() <= 1e-10 * (1.0 + s));
    }

    #[test]
    fn bracket_homogeneous(x in vec3(), y in vec3(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let lhs = sine_bracket(&scaled(&x, a), &scaled(&y, b)).unwrap();
        let rhs = a.abs() * b.abs() * sine_bracket(&x, &y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()) * norm(&x) * norm(&y));
    }

    #[test]
    fn bracket_rotation_invariant(x in vecn(5), y in vecn(5), seed in 0u64..1000) {
        let o = LinearMap::random_orthogonal(5, seed);
        let a = sine_bracket(&o.apply(&x), &o.apply(&y)).unwrap();
        let b = sine_bracket(&x, &y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + norm(&x) * norm(&y)));
    }

    #[test]
    fn bracket_convex_in_first_argument(x in vec3(), x2 in vec3(), y in vec3(), k in 0usize..4) {
        let tau = [0.0, 0.25, 0.5, 1.0][k];
        let mix: Vec<f64> = x.iter().zip(&x2).map(|(a, b)| tau * a + (1.0 - tau) * b).collect();
        let lhs = sine_bracket(&mix, &y).unwrap();
        let rhs = tau * sine_bracket(&x, &y).unwrap() + (1.0 - tau) * sine_bracket(&x2, &y).unwrap();
        prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs));
    }

    #[test]
    fn quarter_rotation_gives_bracket(x in vecn(2), y in vecn(2)) {
        let r = geometry::rotate_quarter_2d(&x).unwrap();
        let s = sine_bracket(&x, &y).unwrap();
        prop_assert!((dot(&r, &y).abs() - s).abs() <= 1e-12 * (1.0 + norm(&x) * norm(&y)));
    }

    #[test]
    fn rules_normalized_unit_antipodal(k in 2usize..40, m in 4usize..24, seed in 0u64..1000) {
        let specs = [
            (RuleSpec::Uniform { points: 2 * k }, 2usize),
            (RuleSpec::Gauss { polar: m, azimuth: 2 * m }, 3),
            (RuleSpec::MonteCarlo { points: 100 + k, seed }, 4),
        ];
        for (spec, dim) in specs {
            let r = spec.build(dim).unwrap();
            let total: f64 = r.weights().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-13, "{spec}: {total}");
            for u in r.nodes() {
                prop_assert!((norm(u) - 1.0).abs() <= 1e-12);
                let minus: Vec<f64> = u.iter().map(|c| -c).collect();
                prop_assert!(r.nodes().any(|v| v.iter().zip(&minus).all(|(a, b)| (a - b).abs() < 1e-12)));
            }
        }
    }

    #[test]
    fn rule_integration_rotation_invariant(seed in 0u64..1000) {
        let r = rule("gauss:16x32", 3);
        let o = LinearMap::random_orthogonal(3, seed);
        let f = |u: &[f64]| (1.0 + u[0] * u[1] + 0.5 * u[2] * u[2]).powi(2);
        let a = r.integrate(f).unwrap();
        let b = r.integrate(|u| f(&o.apply(u))).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn cylinder_set_radial_homogeneous(x in vec3(), t in 0.1f64..10.0) {
        let k = BodyDescriptor::steinmetz(3).unwrap();
        let a = k.radial_at(&scaled(&x, t)).unwrap();
        let b = k.radial_at(&x).unwrap() / t;
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn cyl_support_even_homogeneous_convex(x in vec3(), y in vec3(), t in 0.1f64..5.0, tau in 0.0f64..1.0) {
        let bodies: Vec<BodyRef> = vec![
            Arc::new(BodyDescriptor::steinmetz(2).unwrap()),
            Arc::new(BodyDescriptor::steinmetz(3).unwrap()),
            spheroid(1.0, 2.0),
            Arc::new(BodyDescriptor::rectangular_box(&[1.0, 0.5, 2.0]).unwrap()),
        ];
        for k in bodies {
            let c = |v: &[f64]| k.cyl_support(v).unwrap();
            let cx = c(&x);
            prop_assert!((c(&scaled(&x, -1.0)) - cx).abs() <= 1e-10 * (1.0 + cx));
            prop_assert!((c(&scaled(&x, t)) - t * cx).abs() <= 1e-10 * (1.0 + t * cx));
            let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| tau * a + (1.0 - tau) * b).collect();
            let rhs = tau * cx + (1.0 - tau) * c(&y);
            prop_assert!(c(&mix) <= rhs + 1e-9 * (1.0 + rhs), "{}", k.label());
        }
    }

    #[test]
    fn sine_polar_times_cyl_support_is_one(u in unit3()) {
        let k: BodyRef = Arc::new(BodyDescriptor::steinmetz(3).unwrap());
        let d = sine_polar::sine_polar(k.clone()).unwrap();
        prop_assert!((d.rho(&u) * k.cyl_support(&u).unwrap() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn spheroid_diamond_inside_inverted_spheroid(a in 0.3f64..2.0, ratio in 1.05f64..4.0) {
        let b = a * ratio;
        let d = sine_polar::sine_polar(spheroid(a, b)).unwrap();
        let e0 = BodyDescriptor::ellipsoid(&[1.0 / b, 1.0 / b, 1.0 / a]).unwrap();
        for u in rule("gauss:8x16", 3).nodes() {
            prop_assert!(d.rho(u) <= e0.rho(u) + 1e-8);
        }
    }

    #[test]
    fn sine_polar_reverses_order(r1 in 0.2f64..2.0, grow in 1.0f64..3.0, b in 1.0f64..3.0) {
        let small: BodyRef = Arc::new(BodyDescriptor::ball(3, r1).unwrap());
        let big: BodyRef = Arc::new(BodyDescriptor::ball(3, r1 * grow).unwrap());
        let sph = spheroid(r1, r1 * b);
        let ds = sine_polar::sine_polar(small).unwrap();
        let db = sine_polar::sine_polar(big).unwrap();
        let dsph = sine_polar::sine_polar(sph).unwrap();
        for u in rule("gauss:6x12", 3).nodes() {
            prop_assert!(db.rho(u) <= ds.rho(u) * (1.0 + 1e-12));
            prop_assert!(dsph.rho(u) <= ds.rho(u) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn polar_scaling_and_duality(a in 0.3f64..3.0, b in 0.3f64..3.0, c in 0.2f64..5.0, u in unit3()) {
        let e = BodyDescriptor::ellipsoid(&[a, b, 1.0]).unwrap();
        let ce = BodyDescriptor::ellipsoid(&[c * a, c * b, c]).unwrap();
        let pe = polar(Arc::new(e.clone())).unwrap();
        let pce = polar(Arc::new(ce)).unwrap();
        prop_assert!((pce.rho(&u) - pe.rho(&u) / c).abs() <= 1e-10 * pe.rho(&u) / c);
        prop_assert!((pe.rho(&u) * e.support(&u).unwrap() - 1.0).abs() <= 1e-12);
        let ppe = polar(Arc::new(pe)).unwrap();
        prop_assert!((ppe.rho(&u) - e.rho(&u)).abs() <= 1e-10);
    }

    #[test]
    fn polar_of_linear_image(seed in 0u64..1000, s in 0.3f64..3.0, u in unit3()) {
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[1.0, 2.0, 0.5]).unwrap());
        let map = LinearMap::random_orthogonal(3, seed).compose(&LinearMap::diagonal(&[s, 1.0, 1.0 / s]).unwrap());
        let lhs = polar(Arc::new(linear_image(e.clone(), map.clone()).unwrap())).unwrap();
        let rhs = linear_image(Arc::new(polar(e).unwrap()), map.inverse().transpose()).unwrap();
        let (a, b) = (lhs.rho(&u), rhs.rho(&u));
        prop_assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn centroid_support_homogeneous_even(x in vec3(), t in 0.1f64..5.0, p in 1.0f64..6.0) {
        let r = rule("gauss:12x24", 3);
        let lam = CentroidBody::sine(spheroid(1.0, 2.0), p, r).unwrap();
        let h = lam.centroid_support(&x).unwrap();
        prop_assert!(h > 0.0);
        prop_assert!((lam.centroid_support(&scaled(&x, -t)).unwrap() - t * h).abs() <= 1e-12 * t * h);
    }

    #[test]
    fn centroid_polar_scaling(c in 0.2f64..5.0, p in 1.0f64..8.0, u in unit3()) {
        let r = rule("gauss:12x24", 3);
        let a = CentroidBody::sine_polar(spheroid(1.0, 2.0), p, r.clone()).unwrap();
        let b = CentroidBody::sine_polar(spheroid(c, 2.0 * c), p, r).unwrap();
        prop_assert!((b.rho(&u) - a.rho(&u) / c).abs() <= 1e-10 * a.rho(&u) / c);
        let h = a.centroid_support(&u).unwrap();
        prop_assert!((a.rho(&u) * h - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn planar_volume_product_is_affine_invariant(
        p in 1.0f64..6.0, s in -1.5f64..1.5, d in 0.4f64..2.5, seed in 0u64..1000,
    ) {
        let r = rule("uniform:512", 2);
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[1.0, 2.0]).unwrap());
        let shear = LinearMap::from_rows(&[vec![d, s], vec![0.0, 1.0]]).unwrap()
            .compose(&LinearMap::random_orthogonal(2, seed));
        let image: BodyRef = Arc::new(linear_image(e.clone(), shear).unwrap());
        let base = harness::verify_lp_sine_bs(e, p, r.clone(), &CheckOptions::default()).unwrap();
        let moved = harness::verify_lp_sine_bs(image, p, r, &CheckOptions::default()).unwrap();
        prop_assert!((base.ratio - moved.ratio).abs() <= 1e-4, "{} vs {}", base.ratio, moved.ratio);
    }

    #[test]
    fn planar_sine_polar_of_linear_image(a in 0.5f64..2.0, s in -1.0f64..1.0, theta in 0.0f64..std::f64::consts::TAU) {
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[a, 1.0]).unwrap());
        let map = LinearMap::from_rows(&[vec![1.0, s], vec![0.2, 1.5]]).unwrap();
        let lhs = sine_polar::sine_polar(Arc::new(linear_image(e.clone(), map.clone()).unwrap())).unwrap();
        let base: BodyRef = Arc::new(sine_polar::sine_polar(e).unwrap());
        let scale = LinearMap::scaling(2, 1.0 / map.det().abs()).compose(&map);
        let rhs = linear_image(base, scale).unwrap();
        let u = [theta.cos(), theta.sin()];
        let (x, y) = (lhs.rho(&u), rhs.rho(&u));
        prop_assert!((x - y).abs() <= 1e-6 * y, "{x} vs {y}");
    }

    #[test]
    fn sine_polar_rotation_equivariant(seed in 0u64..1000, u in unit3()) {
        let k: BodyRef = Arc::new(BodyDescriptor::rectangular_box(&[1.0, 0.6, 1.4]).unwrap());
        let o = LinearMap::random_orthogonal(3, seed);
        let turned = sine_polar::sine_polar(Arc::new(linear_image(k.clone(), o.clone()).unwrap())).unwrap();
        let base = sine_polar::sine_polar(k).unwrap();
        let (a, b) = (turned.rho(&u), base.rho(&o.apply_transpose(&u)));
        prop_assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
    }

    #[test]
    fn cylinder_sets_are_their_own_bipolar(u in unit3(), tilt in 0.2f64..1.2, r2 in 0.5f64..2.0) {
        let k: BodyRef = Arc::new(
            BodyDescriptor::cylinders(3, &[(vec![1.0, 0.0, 0.0], 1.0), (vec![tilt.cos(), tilt.sin(), 0.0], r2)]).unwrap(),
        );
        let d: BodyRef = Arc::new(sine_polar::sine_polar(k.clone()).unwrap());
        // c of the sine polar body, found by searching over its radial function
        let c = d.cyl_support(&u).unwrap();
        prop_assert!((k.rho(&u) * c - 1.0).abs() <= 2e-6, "{}", k.rho(&u) * c);
    }

    #[test]
    fn dual_minkowski_inequality(a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0, p in 1.0f64..5.0) {
        let r = rule("gauss:24x48", 3);
        let k = BodyDescriptor::ellipsoid(&[a, b, 1.0]).unwrap();
        let l = BodyDescriptor::rectangular_box(&[1.0, c, 0.8]).unwrap();
        let n = 3.0;
        let vk = quadrature::volume(&k, &r).unwrap();
        let vl = quadrature::volume(&l, &r).unwrap();
        let mixed = quadrature::dual_mixed_volume(&k, &l, p, &r).unwrap();
        prop_assert!(mixed.powf(n) >= vk.powf(n + p) * vl.powf(-p) * (1.0 - 1e-12));
        let scaled_k = BodyDescriptor::ellipsoid(&[c * a, c * b, c]).unwrap();
        let eq = quadrature::dual_mixed_volume(&k, &scaled_k, p, &r).unwrap();
        let vs = quadrature::volume(&scaled_k, &r).unwrap();
        prop_assert!((eq.powf(n) / (vk.powf(n + p) * vs.powf(-p)) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn reports_pass_iff_ratio_within_tol(p in 1.0f64..4.0, a in 0.5f64..2.0, tol in 0.0f64..0.1) {
        let r = rule("uniform:256", 2);
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[a, 1.0]).unwrap());
        let opts = CheckOptions { tol: Some(tol), ..CheckOptions::default() };
        let rep = harness::verify_lp_sine_bs(e, p, r, &opts).unwrap();
        prop_assert!(rep.ratio.is_finite());
        prop_assert_eq!(rep.pass, rep.ratio <= 1.0 + tol);
    }
}

#[test]
fn supporting_cylinder_reconstruction_refines_monotonically() {
    let k = BodyDescriptor::rectangular_box(&[1.0, 1.0, 1.0]).unwrap();
    let probes = harness::random_directions(3, 40, 5);
    let truth: Vec<f64> = probes.iter().map(|u| k.rho(u)).collect();
    let mut last = f64::INFINITY;
    for spec in ["gauss:4x8", "gauss:8x16", "gauss:16x32"] {
        let cyl = supporting_cylinders(&k, &rule(spec, 3)).unwrap();
        let rec = node_intersection_radial(&cyl, &probes).unwrap();
        let gap = rec
            .iter()
            .zip(&truth)
            .map(|(r, t)| {
                assert!(*r >= t * (1.0 - 1e-12));
                r - t
            })
            .fold(0.0, f64::max);
        assert!(gap < last, "{spec}: {gap} !< {last}");
        last = gap;
    }
}
