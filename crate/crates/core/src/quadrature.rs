//! Probability-normalized quadrature on `S^{n-1}` and the volume functionals
//! built on it.
//!
//! Every rule integrates the constant `1` to exactly `1` (up to rounding):
//! `du` is the rotation-invariant probability measure throughout, so the
//! polar-coordinate volume reads `V(K) = w_n * int rho_K^n du`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::body::StarBody;
use crate::error::{Error, Result};
use crate::geometry::{self, CompensatedSum};

/// Family of a spherical rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// Equally spaced angles on the circle (`n = 2`).
    UniformAngle,
    /// Gauss-Legendre in `cos(theta)` times uniform azimuth (`n = 3`).
    GaussProduct,
    /// Seeded Gaussian directions, antipodally symmetrized (`n >= 2`).
    MonteCarlo { seed: u64 },
}

impl RuleKind {
    fn name(&self) -> &'static str {
        match self {
            RuleKind::UniformAngle => "uniform",
            RuleKind::GaussProduct => "gauss",
            RuleKind::MonteCarlo { .. } => "mc",
        }
    }
}

/// Textual rule description: `uniform:N`, `gauss:N` / `gauss:NxM`, or
/// `mc:N:seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleSpec {
    Uniform { points: usize },
    Gauss { polar: usize, azimuth: usize },
    MonteCarlo { points: usize, seed: u64 },
}

impl RuleSpec {
    /// The rule used when nothing else is requested.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            2 => RuleSpec::Uniform { points: 512 },
            3 => RuleSpec::Gauss {
                polar: 64,
                azimuth: 128,
            },
            _ => RuleSpec::MonteCarlo {
                points: 200_000,
                seed: 42,
            },
        }
    }

    /// Same family at twice the resolution in every direction.
    pub fn doubled(&self) -> Self {
        match *self {
            RuleSpec::Uniform { points } => RuleSpec::Uniform { points: 2 * points },
            RuleSpec::Gauss { polar, azimuth } => RuleSpec::Gauss {
                polar: 2 * polar,
                azimuth: 2 * azimuth,
            },
            RuleSpec::MonteCarlo { points, seed } => RuleSpec::MonteCarlo {
                points: 2 * points,
                seed,
            },
        }
    }

    /// Replaces the seed of a Monte Carlo spec; other specs are unchanged.
    pub fn with_seed(&self, seed: u64) -> Self {
        match *self {
            RuleSpec::MonteCarlo { points, .. } => RuleSpec::MonteCarlo { points, seed },
            other => other,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            RuleSpec::MonteCarlo { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, RuleSpec::MonteCarlo { .. })
    }

    pub fn build(&self, dim: usize) -> Result<SphericalRule> {
        SphericalRule::from_spec(dim, *self)
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::Uniform { points } => write!(f, "uniform:{points}"),
            RuleSpec::Gauss { polar, azimuth } => write!(f, "gauss:{polar}x{azimuth}"),
            RuleSpec::MonteCarlo { points, seed } => write!(f, "mc:{points}:{seed}"),
        }
    }
}

impl FromStr for RuleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::RuleSpec(s.to_string());
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let mut parts = s.trim().split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let spec = match kind {
            "uniform" => RuleSpec::Uniform {
                points: num(parts.next().ok_or_else(bad)?)?,
            },
            "gauss" => {
                let size = parts.next().ok_or_else(bad)?;
                match size.split_once('x') {
                    Some((a, b)) => RuleSpec::Gauss {
                        polar: num(a)?,
                        azimuth: num(b)?,
                    },
                    None => {
                        let polar = num(size)?;
                        RuleSpec::Gauss {
                            polar,
                            azimuth: 2 * polar,
                        }
                    }
                }
            }
            "mc" => {
                let points = num(parts.next().ok_or_else(bad)?)?;
                let seed = parts
                    .next()
                    .ok_or_else(bad)?
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| bad())?;
                RuleSpec::MonteCarlo { points, seed }
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(spec)
    }
}

/// Nodes and weights on the unit sphere with `sum(weights) == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalRule {
    dim: usize,
    spec: RuleSpec,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Builds a rule of the given family. `resolution` is the number of angles
/// (uniform), Gauss points in `cos(theta)` with twice as many azimuths
/// (gauss), or the number of nodes (Monte Carlo).
pub fn build_rule(dim: usize, resolution: usize, kind: RuleKind) -> Result<SphericalRule> {
    let spec = match kind {
        RuleKind::UniformAngle => RuleSpec::Uniform { points: resolution },
        RuleKind::GaussProduct => RuleSpec::Gauss {
            polar: resolution,
            azimuth: 2 * resolution,
        },
        RuleKind::MonteCarlo { seed } => RuleSpec::MonteCarlo {
            points: resolution,
            seed,
        },
    };
    SphericalRule::from_spec(dim, spec)
}

impl SphericalRule {
    pub fn from_spec(dim: usize, spec: RuleSpec) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "spherical rules need dimension >= 2, got {dim}"
            )));
        }
        let too_small = |what: &str, v: usize| {
            Error::InvalidArgument(alloc::format!("{what} must be >= 4, got {v}"))
        };
        let (nodes, weights) = match spec {
            RuleSpec::Uniform { points } => {
                if dim != 2 {
                    return Err(Error::UnsupportedRule {
                        kind: RuleKind::UniformAngle.name(),
                        dim,
                    });
                }
                if points < 4 {
                    return Err(too_small("resolution", points));
                }
                if points % 2 != 0 {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "uniform rules need an even point count for antipodal symmetry, got {points}"
                    )));
                }
                uniform_circle(points)
            }
            RuleSpec::Gauss { polar, azimuth } => {
                if dim != 3 {
                    return Err(Error::UnsupportedRule {
                        kind: RuleKind::GaussProduct.name(),
                        dim,
                    });
                }
                if polar < 4 {
                    return Err(too_small("resolution", polar));
                }
                if azimuth < 4 || azimuth % 2 != 0 {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "azimuth count must be even and >= 4, got {azimuth}"
                    )));
                }
                gauss_product(polar, azimuth)
            }
            RuleSpec::MonteCarlo { points, seed } => {
                if points < 4 {
                    return Err(too_small("resolution", points));
                }
                monte_carlo(dim, points, seed)
            }
        };
        Ok(Self {
            dim,
            spec,
            nodes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> RuleSpec {
        self.spec
    }

    pub fn kind(&self) -> RuleKind {
        match self.spec {
            RuleSpec::Uniform { .. } => RuleKind::UniformAngle,
            RuleSpec::Gauss { .. } => RuleKind::GaussProduct,
            RuleSpec::MonteCarlo { seed, .. } => RuleKind::MonteCarlo { seed },
        }
    }

    /// Identity used to refuse mixing bodies built on different rules.
    pub fn id(&self) -> String {
        self.spec.to_string()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Typical angular distance between neighbouring nodes.
    pub fn spacing(&self) -> f64 {
        match self.spec {
            RuleSpec::Uniform { points } => 2.0 * PI / points as f64,
            RuleSpec::Gauss { polar, azimuth } => {
                (PI / polar as f64).max(2.0 * PI / azimuth as f64)
            }
            RuleSpec::MonteCarlo { points, .. } => {
                let d = self.dim as f64;
                let area = d * geometry::omega(d);
                libm::pow(area / points as f64, 1.0 / (d - 1.0))
            }
        }
    }

    /// `sum_i w_i f(u_i)` in node order with compensated accumulation.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut acc = CompensatedSum::default();
        for (i, (u, w)) in self.nodes().zip(&self.weights).enumerate() {
            let v = f(u);
            if !v.is_finite() {
                return Err(Error::NonFinite { node: i, value: v });
            }
            acc.add(w * v);
        }
        Ok(acc.value())
    }

    /// Integrates precomputed node values.
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: values.len(),
            });
        }
        let mut acc = CompensatedSum::default();
        for (i, (v, w)) in values.iter().zip(&self.weights).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { node: i, value: *v });
            }
            acc.add(w * v);
        }
        Ok(acc.value())
    }
}

fn normalize_weights(weights: &mut [f64]) {
    let mut acc = CompensatedSum::default();
    for w in weights.iter() {
        acc.add(*w);
    }
    let total = acc.value();
    for w in weights.iter_mut() {
        *w /= total;
    }
}

fn uniform_circle(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(2 * points);
    for k in 0..points {
        let (s, c) = libm::sincos(2.0 * PI * k as f64 / points as f64);
        nodes.push(c);
        nodes.push(s);
    }
    (nodes, alloc::vec![1.0 / points as f64; points])
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; order];
    let mut w = alloc::vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and its derivative
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 0 { 1.0 } else { p1 };
            let pn1 = if order == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = wi;
        w[order - 1 - i] = wi;
    }
    (x, w)
}

fn gauss_product(polar: usize, azimuth: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, wt) = gauss_legendre(polar);
    let mut nodes = Vec::with_capacity(3 * polar * azimuth);
    let mut weights = Vec::with_capacity(polar * azimuth);
    let trig: Vec<(f64, f64)> = (0..azimuth)
        .map(|j| libm::sincos(2.0 * PI * j as f64 / azimuth as f64))
        .collect();
    for (ti, wi) in t.iter().zip(&wt) {
        let s = libm::sqrt((1.0 - ti * ti).max(0.0));
        for &(sp, cp) in &trig {
            nodes.extend_from_slice(&[s * cp, s * sp, *ti]);
            weights.push(0.5 * wi / azimuth as f64);
        }
    }
    normalize_weights(&mut weights);
    (nodes, weights)
}

fn monte_carlo(dim: usize, points: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let half = points.div_ceil(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(2 * half * dim);
    let mut g = alloc::vec![0.0; dim];
    for _ in 0..half {
        loop {
            for gi in g.iter_mut() {
                *gi = StandardNormal.sample(&mut rng);
            }
            let r = geometry::norm(&g);
            if r > 1e-12 {
                g.iter_mut().for_each(|v| *v /= r);
                break;
            }
        }
        nodes.extend_from_slice(&g);
        nodes.extend(g.iter().map(|v| -v));
    }
    (nodes, alloc::vec![1.0 / (2 * half) as f64; 2 * half])
}

pub(crate) fn check_rule(body: &dyn StarBody, rule: &SphericalRule) -> Result<()> {
    if body.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            found: rule.dim(),
        });
    }
    if let Some(built) = body.rule_id() {
        if built != rule.id() {
            return Err(Error::MixedRules {
                body: body.label(),
                built,
                requested: rule.id(),
            });
        }
    }
    Ok(())
}

/// `V(K) = w_n * int rho_K(u)^n du`.
pub fn volume(body: &dyn StarBody, rule: &SphericalRule) -> Result<f64> {
    check_rule(body, rule)?;
    let n = body.dim() as i32;
    let radii = body.rho_on(rule);
    let powers: Vec<f64> = radii.iter().map(|r| libm::pow(*r, n as f64)).collect();
    Ok(geometry::omega(n as f64) * rule.integrate_values(&powers)?)
}

/// Dual mixed volume `w_n * int rho_K^{n+p} rho_L^{-p} du`.
pub fn dual_mixed_volume(
    k: &dyn StarBody,
    l: &dyn StarBody,
    p: f64,
    rule: &SphericalRule,
) -> Result<f64> {
    check_rule(k, rule)?;
    check_rule(l, rule)?;
    let n = k.dim() as f64;
    let rk = k.rho_on(rule);
    let rl = l.rho_on(rule);
    let mut values = Vec::with_capacity(rule.len());
    for (i, (a, b)) in rk.iter().zip(&rl).enumerate() {
        if !(*b >= 1e-12) {
            return Err(Error::DivisionBlowUp { node: i, value: *b });
        }
        values.push(libm::pow(*a, n + p) * libm::pow(*b, -p));
    }
    Ok(geometry::omega(n) * rule.integrate_values(&values)?)
}

/// Both sides of the slicing identity
/// `int f du = int ( int_{S^2 cap v^perp} f dzeta ) dv` on `S^2`; the inner
/// circle integral uses the angles of `circle` mapped into `v^perp`.
pub fn slice_integral_check<F: Fn(&[f64]) -> f64>(
    f: F,
    outer: &SphericalRule,
    circle: &SphericalRule,
) -> Result<(f64, f64)> {
    if outer.dim() != 3 {
        return Err(Error::UnsupportedRule {
            kind: "slice outer rule",
            dim: outer.dim(),
        });
    }
    if circle.dim() != 2 {
        return Err(Error::UnsupportedRule {
            kind: "slice circle rule",
            dim: circle.dim(),
        });
    }
    let lhs = outer.integrate(&f)?;
    let mut zeta = [0.0; 3];
    let rhs = outer.integrate(|v| {
        let basis = geometry::perp_basis(v);
        let inner = circle.integrate(|c| {
            for (k, z) in zeta.iter_mut().enumerate() {
                *z = c[0] * basis[0][k] + c[1] * basis[1][k];
            }
            f(&zeta)
        });
        inner.unwrap_or(f64::NAN)
    })?;
    Ok((lhs, rhs))
}
