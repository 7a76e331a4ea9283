//! Origin-symmetric star bodies: the evaluator contract shared by every body,
//! the primitive descriptors, and the polar / linear-image constructions.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use once_cell::race::OnceBox;

use crate::cylinders::CylinderGeometry;
use crate::error::{Error, Result};
use crate::geometry::{self, bracket_unit, dot, norm};
use crate::linalg::{top_eigenvalue, LinearMap};
use crate::quadrature::SphericalRule;
use crate::search::{self, default_grid, maximize, SearchSettings};

/// Shared handle to a body.
pub type BodyRef = Arc<dyn StarBody>;

/// Evaluator contract of an origin-symmetric star body in `R^n`.
///
/// Implementors provide the radial function on unit vectors; every other
/// quantity has a generic fallback. Direction arguments of the required
/// methods are trusted to be unit vectors of the right dimension; the
/// checked entry points live in [`BodyExt`].
pub trait StarBody: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Radial function at a unit vector.
    fn rho(&self, u: &[f64]) -> f64;

    /// Human-readable description used in reports.
    fn label(&self) -> String;

    /// Whether the body is known to be convex.
    fn is_convex(&self) -> bool;

    /// Whether the boundary is known to be smooth (selects tolerance tiers).
    fn is_smooth(&self) -> bool {
        false
    }

    /// Support function at a unit vector, when known without a search.
    fn exact_support(&self, _u: &[f64]) -> Option<f64> {
        None
    }

    /// Cylindrical support function `max_{y in K} [u, y]` at a unit vector,
    /// when known without a search.
    fn exact_cyl_support(&self, _u: &[f64]) -> Option<f64> {
        None
    }

    /// Directions worth adding as starting points of sphere searches.
    fn seeds(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }

    /// Identity of the quadrature rule the body was built on, if any.
    fn rule_id(&self) -> Option<String> {
        None
    }

    /// Radial values on the nodes of `rule`.
    fn rho_on(&self, rule: &SphericalRule) -> Vec<f64> {
        rule.nodes().map(|u| self.rho(u)).collect()
    }

    /// Cached radial values on the search grid of this dimension, for bodies
    /// whose radial function is expensive.
    fn grid_rho(&self) -> Option<&[f64]> {
        None
    }
}

/// Checked, homogeneous evaluation available on every body.
pub trait BodyExt: StarBody {
    /// `rho_K(u)` for a unit vector `u`.
    fn radial(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        geometry::check_unit(u)?;
        Ok(self.rho(u))
    }

    /// `rho_K(x) = rho_K(x/|x|) / |x|` for any nonzero `x`.
    fn radial_at(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let r = norm(x);
        let u = geometry::normalized(x)
            .ok_or_else(|| Error::InvalidArgument("radial function at the origin".to_string()))?;
        Ok(self.rho(&u) / r)
    }

    /// `h_K(x) = max_{y in K} x . y`.
    fn support(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(homogeneous(x, |u| support_unit(self.as_dyn(), u)))
    }

    /// `c_K(x) = max_{y in K} [x, y]`.
    fn cyl_support(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(homogeneous(x, |u| cyl_support_unit(self.as_dyn(), u)))
    }

    /// Membership test `|x| <= rho_K(x/|x|)`.
    fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        let r = norm(x);
        Ok(match geometry::normalized(x) {
            None => true,
            Some(u) => r <= self.rho(&u) * (1.0 + 1e-12),
        })
    }

    fn as_dyn(&self) -> &dyn StarBody;

    /// Wraps the body in a shared handle.
    fn into_ref(self) -> BodyRef
    where
        Self: Sized + 'static,
    {
        Arc::new(self)
    }
}

impl<T: StarBody> BodyExt for T {
    fn as_dyn(&self) -> &dyn StarBody {
        self
    }
}

impl BodyExt for dyn StarBody + '_ {
    fn as_dyn(&self) -> &dyn StarBody {
        self
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn homogeneous<F: FnOnce(&[f64]) -> f64>(x: &[f64], f: F) -> f64 {
    match geometry::normalized(x) {
        None => 0.0,
        Some(u) => norm(x) * f(&u),
    }
}

/// Maximizes `g(v, rho_K(v))` over the sphere, reusing cached grid radii.
pub(crate) fn search_radial<G: Fn(&[f64], f64) -> f64>(
    body: &dyn StarBody,
    g: G,
    settings: &SearchSettings,
) -> (f64, Vec<f64>) {
    let n = body.dim();
    let grid_values: Option<Vec<f64>> = body.grid_rho().map(|radii| {
        default_grid(n)
            .nodes()
            .zip(radii)
            .map(|(v, r)| g(v, *r))
            .collect()
    });
    maximize(
        n,
        |v| g(v, body.rho(v)),
        grid_values.as_deref(),
        &body.seeds(),
        settings,
    )
}

/// Support function at a unit vector.
pub(crate) fn support_unit(body: &dyn StarBody, u: &[f64]) -> f64 {
    if let Some(h) = body.exact_support(u) {
        return h;
    }
    search_radial(body, |v, r| r * dot(u, v), &SearchSettings::default()).0
}

const CIRCLE_SAMPLES: usize = 120;

/// Cylindrical support function at a unit vector.
pub(crate) fn cyl_support_unit(body: &dyn StarBody, u: &[f64]) -> f64 {
    cyl_support_with(body, u, &SearchSettings::default())
}

/// Cylindrical support function at a unit vector with explicit search
/// settings for the generic path.
pub(crate) fn cyl_support_with(body: &dyn StarBody, u: &[f64], settings: &SearchSettings) -> f64 {
    if let Some(c) = body.exact_cyl_support(u) {
        return c;
    }
    match body.dim() {
        // [u, y] = |psi u . y| in the plane
        2 => support_unit(body, &[-u[1], u[0]]),
        // [u, y] = max over unit w in u^perp of w . y, so c_K(u) is the
        // largest support value on the great circle u^perp
        3 if body.exact_support(u).is_some() => {
            let basis = geometry::perp_basis(u);
            let mut w = [0.0; 3];
            search::maximize_periodic(
                |t| {
                    let (s, c) = libm::sincos(t);
                    for (k, wk) in w.iter_mut().enumerate() {
                        *wk = c * basis[0][k] + s * basis[1][k];
                    }
                    support_unit(body, &w)
                },
                CIRCLE_SAMPLES,
                3,
                60,
            )
            .0
        }
        _ => search_radial(body, |v, r| r * bracket_unit(u, v), settings).0,
    }
}

/// Lazily filled radial values on the search grid.
#[derive(Default)]
pub(crate) struct GridCache(OnceBox<Vec<f64>>);

impl GridCache {
    pub(crate) fn get(&self, body: &dyn StarBody) -> &[f64] {
        self.get_with(body.dim(), |u| body.rho(u))
    }

    pub(crate) fn get_with<F: Fn(&[f64]) -> f64>(&self, dim: usize, f: F) -> &[f64] {
        self.0
            .get_or_init(|| Box::new(default_grid(dim).nodes().map(f).collect()))
    }
}

impl fmt::Debug for GridCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0.get().is_some() { "GridCache(filled)" } else { "GridCache(empty)" })
    }
}

/// One origin-symmetric solid cylinder `{y : [y, axis] <= radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub axis: Vec<f64>,
    pub radius: f64,
}

/// Primitive body families.
#[derive(Debug, Clone, PartialEq)]
pub enum BodyKind {
    Ball {
        radius: f64,
    },
    /// Axis-aligned ellipsoid with the given semi-axes.
    Ellipsoid {
        semiaxes: Vec<f64>,
    },
    /// Axis-aligned box `prod [-a_i, a_i]`.
    Box {
        half_widths: Vec<f64>,
    },
    /// Intersection of origin-symmetric solid cylinders (strips when `n = 2`).
    CylinderSet {
        cylinders: Vec<Cylinder>,
    },
    /// Radial function sampled at directions; node values are mirrored to
    /// the antipodes. In the plane the radial function is interpolated
    /// linearly in angle, in higher dimensions the nearest node is used.
    RadialTable {
        nodes: Vec<Vec<f64>>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
enum Evaluator {
    Plain,
    Cylinders(CylinderGeometry),
    Circle(Vec<(f64, f64)>),
    Nearest,
}

/// A validated primitive body.
#[derive(Debug, Clone)]
pub struct BodyDescriptor {
    dim: usize,
    kind: BodyKind,
    name: Option<String>,
    eval: Evaluator,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidBody {
        field: field.into(),
        reason: reason.into(),
    }
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(field, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_direction(field: &str, dim: usize, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != dim {
        return Err(invalid(field, format!("expected {dim} coordinates, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "coordinates must be finite"));
    }
    geometry::normalized(v).ok_or_else(|| invalid(field, "zero vector"))
}

impl BodyDescriptor {
    /// Validates `kind` in dimension `dim` and prepares its evaluator.
    pub fn new(dim: usize, kind: BodyKind) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dim", format!("must be at least 2, got {dim}")));
        }
        let (kind, eval) = match kind {
            BodyKind::Ball { radius } => {
                check_positive("radius", radius)?;
                (BodyKind::Ball { radius }, Evaluator::Plain)
            }
            BodyKind::Ellipsoid { semiaxes } => {
                check_len("semiaxes", dim, semiaxes.len())?;
                for (i, a) in semiaxes.iter().enumerate() {
                    check_positive(&format!("semiaxes[{i}]"), *a)?;
                }
                (BodyKind::Ellipsoid { semiaxes }, Evaluator::Plain)
            }
            BodyKind::Box { half_widths } => {
                check_len("half_widths", dim, half_widths.len())?;
                for (i, a) in half_widths.iter().enumerate() {
                    check_positive(&format!("half_widths[{i}]"), *a)?;
                }
                (BodyKind::Box { half_widths }, Evaluator::Plain)
            }
            BodyKind::CylinderSet { cylinders } => {
                if cylinders.is_empty() {
                    return Err(invalid("cylinders", "at least one cylinder is required"));
                }
                let mut clean = Vec::with_capacity(cylinders.len());
                for (i, c) in cylinders.iter().enumerate() {
                    let axis = check_direction(&format!("cylinders[{i}].axis"), dim, &c.axis)?;
                    check_positive(&format!("cylinders[{i}].radius"), c.radius)?;
                    clean.push(Cylinder {
                        axis,
                        radius: c.radius,
                    });
                }
                if dim > 2 && clean.len() < dim - 1 {
                    return Err(invalid(
                        "cylinders",
                        format!("{} cylinders cannot bound a body in dimension {dim}", clean.len()),
                    ));
                }
                let bounded = if dim == 2 {
                    (0..clean.len()).any(|i| {
                        (i + 1..clean.len())
                            .any(|j| geometry::bracket(&clean[i].axis, &clean[j].axis) > 1e-9)
                    })
                } else {
                    axes_rank(&clean) >= 2
                };
                if !bounded {
                    return Err(invalid("cylinders", "all axes are parallel; the body is unbounded"));
                }
                let geo = CylinderGeometry::new(
                    dim,
                    clean.iter().map(|c| c.axis.clone()).collect(),
                    clean.iter().map(|c| c.radius).collect(),
                );
                (BodyKind::CylinderSet { cylinders: clean }, Evaluator::Cylinders(geo))
            }
            BodyKind::RadialTable { nodes, values } => {
                if nodes.is_empty() {
                    return Err(invalid("nodes", "at least one node is required"));
                }
                if nodes.len() != values.len() {
                    return Err(invalid(
                        "values",
                        format!("{} values for {} nodes", values.len(), nodes.len()),
                    ));
                }
                let mut clean = Vec::with_capacity(nodes.len());
                for (i, (u, v)) in nodes.iter().zip(&values).enumerate() {
                    clean.push(check_direction(&format!("nodes[{i}]"), dim, u)?);
                    if !(v.is_finite() && *v > 1e-12 && *v < 1e12) {
                        return Err(invalid(
                            format!("values[{i}]"),
                            format!("radial values must lie in (1e-12, 1e12), got {v}"),
                        ));
                    }
                }
                let eval = if dim == 2 {
                    let mut table: Vec<(f64, f64)> = Vec::with_capacity(2 * clean.len());
                    for (u, v) in clean.iter().zip(&values) {
                        let t = geometry::wrap_angle(libm::atan2(u[1], u[0]));
                        table.push((t, *v));
                        table.push((geometry::wrap_angle(t + PI), *v));
                    }
                    table.sort_by(|a, b| a.0.total_cmp(&b.0));
                    table.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14);
                    Evaluator::Circle(table)
                } else {
                    Evaluator::Nearest
                };
                (
                    BodyKind::RadialTable {
                        nodes: clean,
                        values,
                    },
                    eval,
                )
            }
        };
        Ok(Self {
            dim,
            kind,
            name: None,
            eval,
        })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(dim, BodyKind::Ball { radius })
    }

    pub fn ellipsoid(semiaxes: &[f64]) -> Result<Self> {
        Self::new(
            semiaxes.len(),
            BodyKind::Ellipsoid {
                semiaxes: semiaxes.to_vec(),
            },
        )
    }

    pub fn rectangular_box(half_widths: &[f64]) -> Result<Self> {
        Self::new(
            half_widths.len(),
            BodyKind::Box {
                half_widths: half_widths.to_vec(),
            },
        )
    }

    /// Intersection of cylinders given as `(axis, radius)` pairs.
    pub fn cylinders(dim: usize, cylinders: &[(Vec<f64>, f64)]) -> Result<Self> {
        Self::new(
            dim,
            BodyKind::CylinderSet {
                cylinders: cylinders
                    .iter()
                    .map(|(axis, radius)| Cylinder {
                        axis: axis.clone(),
                        radius: *radius,
                    })
                    .collect(),
            },
        )
    }

    /// Intersection of the unit cylinders around the first `k` coordinate
    /// axes of `R^3` (`k = 2`: bicylinder, `k = 3`: tricylinder).
    pub fn steinmetz(k: usize) -> Result<Self> {
        let axes: Vec<(Vec<f64>, f64)> = (0..k.min(3))
            .map(|i| {
                let mut a = alloc::vec![0.0; 3];
                a[i] = 1.0;
                (a, 1.0)
            })
            .collect();
        Self::cylinders(3, &axes)
    }

    pub fn radial_table(dim: usize, nodes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        Self::new(dim, BodyKind::RadialTable { nodes, values })
    }

    /// Attaches a display name used by [`StarBody::label`].
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    fn table_rho(&self, u: &[f64]) -> f64 {
        let BodyKind::RadialTable { nodes, values } = &self.kind else {
            return f64::NAN;
        };
        match &self.eval {
            Evaluator::Circle(table) => {
                let t = geometry::wrap_angle(libm::atan2(u[1], u[0]));
                let k = table.partition_point(|(a, _)| *a <= t);
                let (t0, v0) = if k == 0 {
                    let (a, v) = table[table.len() - 1];
                    (a - 2.0 * PI, v)
                } else {
                    table[k - 1]
                };
                let (t1, v1) = if k == table.len() {
                    let (a, v) = table[0];
                    (a + 2.0 * PI, v)
                } else {
                    table[k]
                };
                if t1 - t0 <= 0.0 {
                    return v0;
                }
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
            _ => {
                let mut best = (f64::NEG_INFINITY, 0.0);
                for (n, v) in nodes.iter().zip(values) {
                    let c = dot(n, u).abs();
                    if c > best.0 {
                        best = (c, *v);
                    }
                }
                best.1
            }
        }
    }
}

fn check_len(field: &str, dim: usize, len: usize) -> Result<()> {
    if len != dim {
        return Err(invalid(field, format!("expected {dim} entries, got {len}")));
    }
    Ok(())
}

/// Rank of the axis set, capped at 2 (enough to decide boundedness).
fn axes_rank(cylinders: &[Cylinder]) -> usize {
    let first = &cylinders[0].axis;
    if cylinders[1..]
        .iter()
        .any(|c| geometry::bracket(first, &c.axis) > 1e-9)
    {
        2
    } else {
        1
    }
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
    parts.join(",")
}

impl StarBody for BodyDescriptor {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rho(&self, u: &[f64]) -> f64 {
        match &self.kind {
            BodyKind::Ball { radius } => *radius,
            BodyKind::Ellipsoid { semiaxes } => {
                let q: f64 = u.iter().zip(semiaxes).map(|(x, a)| (x / a) * (x / a)).sum();
                1.0 / libm::sqrt(q)
            }
            BodyKind::Box { half_widths } => u
                .iter()
                .zip(half_widths)
                .filter(|(x, _)| **x != 0.0)
                .map(|(x, a)| a / x.abs())
                .fold(f64::INFINITY, f64::min),
            BodyKind::CylinderSet { .. } => match &self.eval {
                Evaluator::Cylinders(g) => g.rho(u),
                _ => f64::NAN,
            },
            BodyKind::RadialTable { .. } => self.table_rho(u),
        }
    }

    fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match &self.kind {
            BodyKind::Ball { radius } => format!("ball{}(r={radius})", self.dim),
            BodyKind::Ellipsoid { semiaxes } => format!("ellipsoid({})", fmt_list(semiaxes)),
            BodyKind::Box { half_widths } => format!("box({})", fmt_list(half_widths)),
            BodyKind::CylinderSet { cylinders } => {
                format!("cylinders{}[{}]", self.dim, cylinders.len())
            }
            BodyKind::RadialTable { nodes, .. } => {
                format!("radial_table{}[{}]", self.dim, nodes.len())
            }
        }
    }

    fn is_convex(&self) -> bool {
        !matches!(self.kind, BodyKind::RadialTable { .. })
    }

    fn is_smooth(&self) -> bool {
        matches!(self.kind, BodyKind::Ball { .. } | BodyKind::Ellipsoid { .. })
    }

    fn exact_support(&self, u: &[f64]) -> Option<f64> {
        match &self.kind {
            BodyKind::Ball { radius } => Some(*radius),
            BodyKind::Ellipsoid { semiaxes } => {
                let q: f64 = u.iter().zip(semiaxes).map(|(x, a)| (x * a) * (x * a)).sum();
                Some(libm::sqrt(q))
            }
            BodyKind::Box { half_widths } => {
                Some(u.iter().zip(half_widths).map(|(x, a)| x.abs() * a).sum())
            }
            BodyKind::CylinderSet { .. } => match &self.eval {
                Evaluator::Cylinders(g) => g.support(u),
                _ => None,
            },
            BodyKind::RadialTable { .. } => None,
        }
    }

    fn exact_cyl_support(&self, u: &[f64]) -> Option<f64> {
        match &self.kind {
            BodyKind::Ball { radius } => Some(*radius),
            BodyKind::Ellipsoid { semiaxes } => {
                // sqrt of the top eigenvalue of Q^T A^2 Q over a basis Q of u^perp
                let basis = geometry::perp_basis(u);
                let m = basis.len();
                let mut entries = alloc::vec![0.0; m * m];
                for i in 0..m {
                    for j in i..m {
                        let s: f64 = (0..self.dim)
                            .map(|k| basis[i][k] * semiaxes[k] * semiaxes[k] * basis[j][k])
                            .sum();
                        entries[i * m + j] = s;
                        entries[j * m + i] = s;
                    }
                }
                Some(libm::sqrt(top_eigenvalue(m, &entries).max(0.0)))
            }
            BodyKind::Box { half_widths } => {
                // the maximum of the convex function [u, .] sits at a vertex
                let n = self.dim;
                if n > 20 {
                    return None;
                }
                let mut best: f64 = 0.0;
                let mut y = alloc::vec![0.0; n];
                for mask in 0u64..(1u64 << (n - 1)) {
                    for k in 0..n {
                        let sign = if k + 1 < n && mask & (1 << k) != 0 { -1.0 } else { 1.0 };
                        y[k] = sign * half_widths[k];
                    }
                    best = best.max(geometry::bracket(u, &y));
                }
                Some(best)
            }
            BodyKind::CylinderSet { .. } => match &self.eval {
                Evaluator::Cylinders(g) => g.cyl_support(u),
                _ => None,
            },
            BodyKind::RadialTable { .. } => None,
        }
    }

    fn seeds(&self) -> Vec<Vec<f64>> {
        match &self.kind {
            BodyKind::CylinderSet { cylinders } => cylinders.iter().map(|c| c.axis.clone()).collect(),
            BodyKind::Box { half_widths } => {
                let r = norm(half_widths);
                alloc::vec![half_widths.iter().map(|a| a / r).collect()]
            }
            _ => Vec::new(),
        }
    }
}

/// The polar body `K° = {x : x . y <= 1 for all y in K}`, with
/// `rho_{K°} = 1 / h_K`.
#[derive(Debug)]
pub struct PolarBody {
    parent: BodyRef,
    cache: GridCache,
}

/// Polar body of a convex body.
pub fn polar(body: BodyRef) -> Result<PolarBody> {
    if !body.is_convex() {
        return Err(Error::NotConvex(body.label()));
    }
    Ok(PolarBody {
        parent: body,
        cache: GridCache::default(),
    })
}

impl PolarBody {
    pub fn parent(&self) -> &BodyRef {
        &self.parent
    }
}

impl StarBody for PolarBody {
    fn dim(&self) -> usize {
        self.parent.dim()
    }

    fn rho(&self, u: &[f64]) -> f64 {
        1.0 / support_unit(self.parent.as_ref(), u)
    }

    fn label(&self) -> String {
        format!("polar({})", self.parent.label())
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn is_smooth(&self) -> bool {
        // polars of balls and ellipsoids are ellipsoids
        self.parent.is_smooth() && self.parent.exact_support(&unit_e1(self.dim())).is_some()
    }

    fn exact_support(&self, u: &[f64]) -> Option<f64> {
        Some(1.0 / self.parent.rho(u))
    }

    fn grid_rho(&self) -> Option<&[f64]> {
        let probe = unit_e1(self.dim());
        if self.parent.exact_support(&probe).is_some() {
            None
        } else {
            Some(self.cache.get(self))
        }
    }
}

fn unit_e1(n: usize) -> Vec<f64> {
    let mut e = alloc::vec![0.0; n];
    e[0] = 1.0;
    e
}

/// The image `phi K` of a body under an invertible linear map.
#[derive(Debug)]
pub struct LinearImage {
    parent: BodyRef,
    map: LinearMap,
}

/// `phi K` for invertible `phi` of matching dimension.
pub fn linear_image(body: BodyRef, map: LinearMap) -> Result<LinearImage> {
    check_dim(body.dim(), map.dim())?;
    if !(map.det().abs() > 1e-12) {
        return Err(Error::SingularMap { det: map.det() });
    }
    Ok(LinearImage { parent: body, map })
}

impl LinearImage {
    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    pub fn parent(&self) -> &BodyRef {
        &self.parent
    }
}

impl StarBody for LinearImage {
    fn dim(&self) -> usize {
        self.parent.dim()
    }

    fn rho(&self, u: &[f64]) -> f64 {
        let w = self.map.apply_inverse(u);
        let r = norm(&w);
        let wu: Vec<f64> = w.iter().map(|x| x / r).collect();
        self.parent.rho(&wu) / r
    }

    fn label(&self) -> String {
        format!("linear_image({})", self.parent.label())
    }

    fn is_convex(&self) -> bool {
        self.parent.is_convex()
    }

    fn is_smooth(&self) -> bool {
        self.parent.is_smooth()
    }

    fn exact_support(&self, u: &[f64]) -> Option<f64> {
        let w = self.map.apply_transpose(u);
        let r = norm(&w);
        let wu: Vec<f64> = w.iter().map(|x| x / r).collect();
        self.parent.exact_support(&wu).map(|h| r * h)
    }

    fn seeds(&self) -> Vec<Vec<f64>> {
        self.parent
            .seeds()
            .iter()
            .filter_map(|s| geometry::normalized(&self.map.apply(s)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    #[test]
    fn primitive_radial_and_support() {
        let e = BodyDescriptor::ellipsoid(&[1.0, 1.0, 2.0]).unwrap();
        assert_relative_eq!(e.radial(&[0.0, 0.0, 1.0]).unwrap(), 2.0);
        assert_relative_eq!(e.support(&[0.0, 0.0, 3.0]).unwrap(), 6.0);
        let b = BodyDescriptor::rectangular_box(&[1.0, 1.0]).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(b.radial(&[s, s]).unwrap(), 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(b.support(&[1.0, 1.0]).unwrap(), 2.0);
        assert!(b.contains(&[0.99, -0.99]).unwrap());
        assert!(!b.contains(&[1.01, 0.0]).unwrap());
        assert!(b.radial(&[1.0, 1.0]).is_err());
        assert!(matches!(
            b.radial(&[1.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cyl_support_closed_forms() {
        let e = BodyDescriptor::ellipsoid(&[1.0, 1.0, 2.0]).unwrap();
        assert_relative_eq!(e.cyl_support(&[0.0, 0.0, 1.0]).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(e.cyl_support(&[1.0, 0.0, 0.0]).unwrap(), 2.0, max_relative = 1e-13);
        let ball = BodyDescriptor::ball(4, 1.5).unwrap();
        assert_relative_eq!(ball.cyl_support(&[0.0, 2.0, 0.0, 0.0]).unwrap(), 3.0);
        // unit cube: [e3, y] is maximized at a vertex, sqrt(2)
        let cube = BodyDescriptor::rectangular_box(&[1.0, 1.0, 1.0]).unwrap();
        assert_relative_eq!(cube.cyl_support(&[0.0, 0.0, 1.0]).unwrap(), 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn generic_paths_agree_with_closed_forms() {
        // an ellipsoid seen through a linear image has no closed-form c_K,
        // so the circle search runs; compare against the direct ellipsoid
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[1.0, 2.0, 3.0]).unwrap());
        let rot = LinearMap::random_orthogonal(3, 5);
        let img = linear_image(e.clone(), rot.clone()).unwrap();
        let u = geometry::normalized(&[0.3, -0.4, 0.5]).unwrap();
        let back = rot.apply_transpose(&u);
        assert_relative_eq!(
            img.cyl_support(&u).unwrap(),
            e.cyl_support(&back).unwrap(),
            max_relative = 1e-10
        );
        assert_relative_eq!(img.radial(&u).unwrap(), e.rho(&back), max_relative = 1e-13);
        // numeric support of a star body without a closed form
        let table = BodyDescriptor::radial_table(
            2,
            (0..64)
                .map(|k| {
                    let t = PI * k as f64 / 64.0;
                    vec![libm::cos(t), libm::sin(t)]
                })
                .collect(),
            vec![1.0; 64],
        )
        .unwrap();
        assert_relative_eq!(table.support(&[1.0, 0.0]).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn polar_of_ellipsoid_and_scaling() {
        let e: BodyRef = Arc::new(BodyDescriptor::ellipsoid(&[1.0, 2.0]).unwrap());
        let p = polar(e.clone()).unwrap();
        assert_relative_eq!(p.radial(&[0.0, 1.0]).unwrap(), 0.5);
        let scaled = linear_image(e, LinearMap::scaling(2, 3.0)).unwrap();
        let ps = polar(Arc::new(scaled)).unwrap();
        let u = geometry::normalized(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(ps.radial(&u).unwrap(), p.radial(&u).unwrap() / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn polar_rejects_star_tables() {
        let t = BodyDescriptor::radial_table(2, vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        assert!(matches!(polar(Arc::new(t)), Err(Error::NotConvex(_))));
    }

    #[test]
    fn table_interpolates_in_angle() {
        let t = BodyDescriptor::radial_table(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 3.0]).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(t.rho(&[s, s]), 2.0, max_relative = 1e-14);
        assert_relative_eq!(t.rho(&[-s, -s]), 2.0, max_relative = 1e-14);
        assert_relative_eq!(t.rho(&[-1.0, 0.0]), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn descriptor_validation() {
        assert!(matches!(BodyDescriptor::ball(3, -1.0), Err(Error::InvalidBody { .. })));
        assert!(BodyDescriptor::ball(1, 1.0).is_err());
        let err = BodyDescriptor::cylinders(3, &[(vec![1.0, 0.0, 0.0], 1.0), (vec![0.0, 0.0, 0.0], 1.0)])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidBody { ref field, .. } if field == "cylinders[1].axis"));
        let err = BodyDescriptor::cylinders(3, &[(vec![1.0, 0.0, 0.0], 1.0), (vec![2.0, 0.0, 0.0], 1.0)])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidBody { ref field, .. } if field == "cylinders"));
        assert!(BodyDescriptor::radial_table(2, vec![vec![1.0, 0.0]], vec![0.0]).is_err());
        assert!(BodyDescriptor::ellipsoid(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn homogeneity() {
        let b = BodyDescriptor::rectangular_box(&[1.0, 2.0, 0.5]).unwrap();
        let x = [0.3, -0.7, 1.1];
        let x2: Vec<f64> = x.iter().map(|v| 2.5 * v).collect();
        assert_relative_eq!(b.support(&x2).unwrap(), 2.5 * b.support(&x).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(b.radial_at(&x2).unwrap(), b.radial_at(&x).unwrap() / 2.5, max_relative = 1e-14);
        assert_eq!(b.support(&[0.0; 3]).unwrap(), 0.0);
    }
}
