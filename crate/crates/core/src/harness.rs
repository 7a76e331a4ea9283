//! Named numerical checks of the sine-polarity inequalities, each producing a
//! [`VerificationReport`].
//!
//! Every report is oriented so that the check passes exactly when
//! `ratio <= 1 + tol`: for upper bounds `ratio = lhs / rhs`, for lower bounds
//! `ratio = rhs / lhs`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::body::{polar, search_radial, BodyDescriptor, BodyKind, BodyRef, StarBody};
use crate::centroid::{self, CentroidBody};
use crate::error::{Error, Result};
use crate::geometry::{self, bracket, bracket_unit, CompensatedSum};
use crate::quadrature::{self, RuleSpec, SphericalRule};
use crate::search::SearchSettings;
use crate::sine_polar::{self, SinePolarBody};

/// Pass tolerance for smooth operands on deterministic rules.
pub const SMOOTH_TOL: f64 = 1e-6;
/// Pass tolerance when an operand has a non-smooth boundary or the value
/// comes from a sphere search.
pub const NONSMOOTH_TOL: f64 = 1e-3;
/// Pass tolerance for quadrature on Monte Carlo rules.
pub const MC_RULE_TOL: f64 = 5e-3;
/// Window around ratio 1 in which a report is flagged as an equality case.
pub const EQUALITY_TOL: f64 = 1e-4;
/// Minimum sample count of the Monte Carlo double-integral check.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub name: String,
    pub n: usize,
    pub p: Option<f64>,
    pub body_k: String,
    pub body_l: Option<String>,
    pub rule: String,
    pub seed: Option<u64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tol: f64,
    pub pass: bool,
    pub equality: bool,
    /// Standard error of `lhs` for sampled checks.
    pub stderr: Option<f64>,
    /// Wall time in milliseconds; left at zero by the checks themselves.
    pub wall_ms: f64,
}

/// Overrides of the default tolerance policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Pass tolerance; `None` selects the tier from the operands.
    pub tol: Option<f64>,
    pub eq_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            tol: None,
            eq_tol: EQUALITY_TOL,
        }
    }
}

impl CheckOptions {
    fn tier(&self, smooth: bool, rule: &SphericalRule) -> f64 {
        self.tol.unwrap_or(if !rule.spec().is_deterministic() {
            MC_RULE_TOL
        } else if smooth {
            SMOOTH_TOL
        } else {
            NONSMOOTH_TOL
        })
    }
}

/// Direction of an inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    /// `lhs <= rhs`
    Upper,
    /// `lhs >= rhs`
    Lower,
}

struct Draft {
    name: &'static str,
    n: usize,
    p: Option<f64>,
    body_k: String,
    body_l: Option<String>,
    rule: String,
    seed: Option<u64>,
}

fn oriented_ratio(bound: Bound, lhs: f64, rhs: f64) -> f64 {
    let (num, den) = match bound {
        Bound::Upper => (lhs, rhs),
        Bound::Lower => (rhs, lhs),
    };
    if num == 0.0 && den == 0.0 {
        1.0
    } else if den == 0.0 {
        f64::MAX
    } else {
        num / den
    }
}

impl Draft {
    fn finish(self, bound: Bound, lhs: f64, rhs: f64, tol: f64, eq_tol: f64) -> VerificationReport {
        let ratio = oriented_ratio(bound, lhs, rhs);
        VerificationReport {
            name: self.name.to_string(),
            n: self.n,
            p: self.p,
            body_k: self.body_k,
            body_l: self.body_l,
            rule: self.rule,
            seed: self.seed,
            lhs,
            rhs,
            ratio,
            tol,
            pass: ratio.is_finite() && ratio <= 1.0 + tol,
            equality: (ratio - 1.0).abs() <= eq_tol,
            stderr: None,
            wall_ms: 0.0,
        }
    }
}

fn draft(name: &'static str, k: &dyn StarBody, l: Option<&dyn StarBody>, p: Option<f64>, rule: &SphericalRule) -> Draft {
    Draft {
        name,
        n: k.dim(),
        p,
        body_k: k.label(),
        body_l: l.map(|b| b.label()),
        rule: rule.id(),
        seed: rule.spec().seed(),
    }
}

/// `V(K) V(Lambda_p° K) <= w_n^2`.
pub fn verify_lp_sine_bs(
    k: BodyRef,
    p: f64,
    rule: Arc<SphericalRule>,
    opts: &CheckOptions,
) -> Result<VerificationReport> {
    let d = draft("lp_sine_bs", k.as_ref(), None, Some(p), &rule);
    let tol = opts.tier(k.is_smooth(), &rule);
    let lam = CentroidBody::sine_polar(k.clone(), p, rule.clone())?;
    let lhs = lam.parent_volume() * quadrature::volume(&lam, &rule)?;
    let rhs = sq(geometry::omega(k.dim() as f64));
    Ok(d.finish(Bound::Upper, lhs, rhs, tol, opts.eq_tol))
}

/// `V(K) V(K^◇) <= w_n^2`.
pub fn verify_sine_bs(k: BodyRef, rule: &SphericalRule, opts: &CheckOptions) -> Result<VerificationReport> {
    let d = draft("sine_bs", k.as_ref(), None, None, rule);
    let tol = opts.tier(k.is_smooth(), rule);
    let diamond = sine_polar::sine_polar(k.clone())?;
    let lhs = quadrature::volume(k.as_ref(), rule)? * quadrature::volume(&diamond, rule)?;
    let rhs = sq(geometry::omega(k.dim() as f64));
    Ok(d.finish(Bound::Upper, lhs, rhs, tol, opts.eq_tol))
}

/// `V(K^◇) <= V(K°)` for an intersection of cylinders (or a ball, the
/// limiting case).
pub fn verify_polar_dominates_diamond(
    k: &BodyDescriptor,
    rule: &SphericalRule,
    opts: &CheckOptions,
) -> Result<VerificationReport> {
    if !matches!(k.kind(), BodyKind::CylinderSet { .. } | BodyKind::Ball { .. }) {
        return Err(Error::NotCylindrical(k.label()));
    }
    let d = draft("polar_dominates_diamond", k, None, None, rule);
    let tol = opts.tier(k.is_smooth(), rule);
    let shared: BodyRef = Arc::new(k.clone());
    let lhs = quadrature::volume(&sine_polar::sine_polar(shared.clone())?, rule)?;
    let rhs = quadrature::volume(&polar(shared)?, rule)?;
    Ok(d.finish(Bound::Upper, lhs, rhs, tol, opts.eq_tol))
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Uniform samples from a star body by rejection from a bounding ball.
struct BodySampler<'a> {
    body: &'a dyn StarBody,
    radius: f64,
}

const MAX_REJECTION_ATTEMPTS: usize = 1_000_000;

impl<'a> BodySampler<'a> {
    fn new(body: &'a dyn StarBody) -> Self {
        // largest radial value over the search grid, refined, with 1% slack
        let (r, _) = search_radial(body, |_, r| r, &SearchSettings::default());
        Self {
            body,
            radius: 1.01 * r,
        }
    }

    /// Draws `count` points; errors when the acceptance rate collapses.
    fn sample(&self, rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.body.dim();
        let mut out = Vec::with_capacity(count);
        let mut tried = 0usize;
        let mut u = alloc::vec![0.0; n];
        while out.len() < count {
            tried += 1;
            if tried > MIN_MC_SAMPLES && (out.len() as f64) < 1e-3 * tried as f64 {
                return Err(Error::LowAcceptance {
                    rate: out.len() as f64 / tried as f64,
                });
            }
            if tried > MAX_REJECTION_ATTEMPTS.max(10 * count) * 100 {
                return Err(Error::LowAcceptance {
                    rate: out.len() as f64 / tried as f64,
                });
            }
            loop {
                for ui in u.iter_mut() {
                    *ui = StandardNormal.sample(rng);
                }
                let r = geometry::norm(&u);
                if r > 1e-12 {
                    u.iter_mut().for_each(|x| *x /= r);
                    break;
                }
            }
            let t: f64 = rng.random::<f64>();
            let r = self.radius * libm::pow(t, 1.0 / n as f64);
            if r <= self.body.rho(&u) {
                out.push(u.iter().map(|x| r * x).collect());
            }
        }
        Ok(out)
    }
}

/// `int_K int_L [x,y]^p dx dy >= C [V(K) V(L)]^{(n+p)/n}`, with the left
/// side estimated from `samples` pairs of uniform points.
pub fn verify_double_integral_ineq(
    k: BodyRef,
    l: BodyRef,
    p: f64,
    samples: usize,
    seed: u64,
    opts: &CheckOptions,
) -> Result<VerificationReport> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be finite and >= 1, got {p}")));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_MC_SAMPLES} samples are required, got {samples}"
        )));
    }
    crate::body::check_dim(k.dim(), l.dim())?;
    let n = k.dim();
    let nf = n as f64;
    let rule = RuleSpec::default_for(n).build(n)?;
    let vk = quadrature::volume(k.as_ref(), &rule)?;
    let vl = quadrature::volume(l.as_ref(), &rule)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = BodySampler::new(k.as_ref()).sample(&mut rng, samples)?;
    let ys = BodySampler::new(l.as_ref()).sample(&mut rng, samples)?;
    let mut sum = CompensatedSum::default();
    let mut sum_sq = CompensatedSum::default();
    for (x, y) in xs.iter().zip(&ys) {
        let v = libm::pow(bracket(x, y), p);
        sum.add(v);
        sum_sq.add(v * v);
    }
    let m = samples as f64;
    let mean = sum.value() / m;
    let var = ((sum_sq.value() / m - mean * mean) * m / (m - 1.0)).max(0.0);
    let scale = vk * vl;
    let lhs = scale * mean;
    let stderr = scale * libm::sqrt(var / m);

    let o = geometry::omega;
    let c = nf * (nf - 1.0) * o(nf - 1.0) * o(nf + p - 2.0)
        / ((nf + p) * (nf + p) * o(nf + p - 3.0) * libm::pow(o(nf), 1.0 + 2.0 * p / nf));
    let rhs = c * libm::pow(scale, (nf + p) / nf);

    let tol = opts.tol.unwrap_or(3.0 * stderr / lhs);
    let ratio = oriented_ratio(Bound::Lower, lhs, rhs);
    Ok(VerificationReport {
        name: "double_integral".to_string(),
        n,
        p: Some(p),
        body_k: k.label(),
        body_l: Some(l.label()),
        rule: format!("mc-pairs:{samples}"),
        seed: Some(seed),
        lhs,
        rhs,
        ratio,
        tol,
        pass: ratio.is_finite() && ratio <= 1.0 + tol,
        equality: (lhs - rhs).abs() <= 3.0 * stderr,
        stderr: Some(stderr),
        wall_ms: 0.0,
    })
}

/// `int int [u,v]^p f(u) g(v) du dv >= C ||f||_{n/(n+p)} ||g||_{n/(n+p)}`
/// by double quadrature.
pub fn verify_spherical_function_ineq<F, G>(
    f: F,
    g: G,
    p: f64,
    rule: &SphericalRule,
    opts: &CheckOptions,
) -> Result<VerificationReport>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be finite and >= 1, got {p}")));
    }
    let n = rule.dim();
    let nf = n as f64;
    let fv: Vec<f64> = rule.nodes().map(&f).collect();
    let gv: Vec<f64> = rule.nodes().map(&g).collect();
    for (i, v) in fv.iter().chain(&gv).enumerate() {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(Error::NonFinite {
                node: i % rule.len(),
                value: *v,
            });
        }
    }
    let kernel_mean = geometry::projection_moment(n, n - 1, p)?;
    let even = geometry::is_even_integer(p);
    let w = rule.weights();
    let mut lhs = CompensatedSum::default();
    for (i, ui) in rule.nodes().enumerate() {
        if fv[i] == 0.0 {
            continue;
        }
        // inner integral of g against the kernel; for non-even p the kernel
        // zero at u_j = +-u_i is split off and integrated exactly
        let mut inner = CompensatedSum::default();
        for (j, uj) in rule.nodes().enumerate() {
            let kp = libm::pow(bracket_unit(ui, uj), p);
            inner.add(w[j] * kp * if even { gv[j] } else { gv[j] - gv[i] });
        }
        let mut inner = inner.value();
        if !even {
            inner += kernel_mean * gv[i];
        }
        lhs.add(w[i] * fv[i] * inner);
    }
    let quasi_norm = |vals: &[f64]| -> Result<f64> {
        let q = nf / (nf + p);
        let pw: Vec<f64> = vals.iter().map(|v| libm::pow(*v, q)).collect();
        Ok(libm::pow(rule.integrate_values(&pw)?, 1.0 / q))
    };
    let rhs = kernel_mean * quasi_norm(&fv)? * quasi_norm(&gv)?;
    let d = Draft {
        name: "spherical_function",
        n,
        p: Some(p),
        body_k: "f".to_string(),
        body_l: Some("g".to_string()),
        rule: rule.id(),
        seed: rule.spec().seed(),
    };
    let tol = opts.tier(true, rule);
    Ok(d.finish(Bound::Lower, lhs.value(), rhs, tol, opts.eq_tol))
}

/// `sup_{x in K, y in L} [x,y] >= w_n^{-2/n} [V(K) V(L)]^{1/n}`; the
/// supremum is `max_v rho_L(v) c_K(v)` found by a sphere search.
pub fn verify_sup_bracket_ineq(
    k: BodyRef,
    l: BodyRef,
    rule: &SphericalRule,
    opts: &CheckOptions,
) -> Result<VerificationReport> {
    crate::body::check_dim(k.dim(), l.dim())?;
    let n = k.dim();
    let d = draft("sup_bracket", k.as_ref(), Some(l.as_ref()), None, rule);
    let vk = quadrature::volume(k.as_ref(), rule)?;
    let vl = quadrature::volume(l.as_ref(), rule)?;
    // the supremum is symmetric in K and L; search over the radial function
    // of the body whose partner has the cheaper cylindrical support
    let probe = {
        let mut e = alloc::vec![0.0; n];
        e[0] = 1.0;
        e
    };
    let (outer, inner) = if k.exact_cyl_support(&probe).is_none() && l.exact_cyl_support(&probe).is_some() {
        (k.clone(), l.clone())
    } else {
        (l.clone(), k.clone())
    };
    let (lhs, _) = search_radial(
        outer.as_ref(),
        |v, r| r * crate::body::cyl_support_unit(inner.as_ref(), v),
        &SearchSettings::default(),
    );
    let rhs = libm::pow(geometry::omega(n as f64), -2.0 / n as f64) * libm::pow(vk * vl, 1.0 / n as f64);
    let tol = opts.tol.unwrap_or(NONSMOOTH_TOL.min(opts.tier(k.is_smooth() && l.is_smooth(), rule)));
    Ok(d.finish(Bound::Lower, lhs, rhs, tol, opts.eq_tol))
}

/// One step of the large-`p` comparison between `Lambda_p° K` and `K^◇`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargePStep {
    pub p: f64,
    /// `max |rho_{Lambda_p° K}(u) - rho_{K^◇}(u)|` over the test directions.
    pub max_gap: f64,
    /// `V(K) V(Lambda_p° K) / w_n^2`.
    pub product: f64,
}

/// Compares `Lambda_p° K` with `K^◇` along a sequence of exponents.
pub fn large_p_sequence(
    k: BodyRef,
    ps: &[f64],
    directions: &[Vec<f64>],
    rule: Arc<SphericalRule>,
) -> Result<(Vec<LargePStep>, f64)> {
    let n = k.dim();
    let w2 = sq(geometry::omega(n as f64));
    let diamond = SinePolarBody::new(k.clone(), SearchSettings::default());
    let target: Vec<f64> = directions.iter().map(|u| diamond.rho(u)).collect();
    let vk = quadrature::volume(k.as_ref(), &rule)?;
    let sine_product = vk * quadrature::volume(&diamond, &rule)? / w2;
    let mut steps = Vec::with_capacity(ps.len());
    for &p in ps {
        let lam = CentroidBody::sine_polar(k.clone(), p, rule.clone())?;
        let max_gap = directions
            .iter()
            .zip(&target)
            .map(|(u, t)| (lam.rho(u) - t).abs())
            .fold(0.0, f64::max);
        let product = lam.parent_volume() * quadrature::volume(&lam, &rule)? / w2;
        steps.push(LargePStep { p, max_gap, product });
    }
    Ok((steps, sine_product))
}

/// Report wrapper around [`centroid::fubini_symmetry_gap`]: passes when the
/// relative gap is within tolerance.
pub fn verify_fubini_symmetry(
    k: BodyRef,
    l: BodyRef,
    p: f64,
    rule: Arc<SphericalRule>,
    opts: &CheckOptions,
) -> Result<VerificationReport> {
    let d = draft("fubini_symmetry", k.as_ref(), Some(l.as_ref()), Some(p), &rule);
    let smooth = k.is_smooth() && l.is_smooth();
    let tol = opts.tol.unwrap_or(if smooth && rule.spec().is_deterministic() { 1e-8 } else { NONSMOOTH_TOL });
    let gap = centroid::fubini_symmetry_gap(k, l, p, rule)?;
    Ok(d.finish(Bound::Upper, 1.0 + gap, 1.0, tol, opts.eq_tol))
}

/// Report wrapper around [`centroid::iterated_polar_volume_check`]:
/// `V(Lambda_p° Lambda_p° K) >= V(K)`.
pub fn verify_iterated_polar(
    k: BodyRef,
    p: f64,
    rule: Arc<SphericalRule>,
    opts: &CheckOptions,
) -> Result<VerificationReport> {
    let d = draft("iterated_polar", k.as_ref(), None, Some(p), &rule);
    let tol = opts.tier(k.is_smooth(), &rule);
    let (twice, base) = centroid::iterated_polar_volume_check(k, p, rule)?;
    Ok(d.finish(Bound::Lower, twice, base, tol, opts.eq_tol))
}

/// Draws `count` seeded uniform directions on `S^{n-1}`.
pub fn random_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            if let Some(u) = geometry::normalized(&g) {
                break u;
            }
        })
        .collect()
}
