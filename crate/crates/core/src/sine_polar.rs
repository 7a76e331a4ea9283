//! Sine polar bodies `K^◇ = {x : [x, y] <= 1 for all y in K}`, the
//! cylindrical support function, supporting cylinders, the cylindrical Gauss
//! image and the cylindrical hull `K^◇◇`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::body::{check_dim, cyl_support_with, BodyExt, BodyRef, Cylinder, GridCache, StarBody};
use crate::error::{Error, Result};
use crate::geometry::{self, bracket, bracket_unit, dot};
use crate::quadrature::{self, SphericalRule};
use crate::search::{default_grid, refine_from, SearchSettings};

/// `K^◇`, with `rho_{K^◇}(u) = 1 / c_K(u)`.
#[derive(Debug)]
pub struct SinePolarBody {
    parent: BodyRef,
    settings: SearchSettings,
    grid: GridCache,
}

impl SinePolarBody {
    pub fn new(parent: BodyRef, settings: SearchSettings) -> Self {
        Self {
            parent,
            settings,
            grid: GridCache::default(),
        }
    }

    pub fn parent(&self) -> &BodyRef {
        &self.parent
    }

    pub fn settings(&self) -> &SearchSettings {
        &self.settings
    }

    /// `c_K(u)` at a unit vector.
    pub fn parent_cyl_support(&self, u: &[f64]) -> f64 {
        cyl_support_with(self.parent.as_ref(), u, &self.settings)
    }
}

impl StarBody for SinePolarBody {
    fn dim(&self) -> usize {
        self.parent.dim()
    }

    fn rho(&self, u: &[f64]) -> f64 {
        1.0 / self.parent_cyl_support(u)
    }

    fn label(&self) -> String {
        format!("sine_polar({})", self.parent.label())
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn seeds(&self) -> Vec<Vec<f64>> {
        self.parent.seeds()
    }

    fn rule_id(&self) -> Option<String> {
        self.parent.rule_id()
    }

    fn grid_rho(&self) -> Option<&[f64]> {
        Some(self.grid.get(self))
    }
}

/// `c_K(x) = max_{y in K} [x, y]`.
pub fn cyl_support(k: &dyn StarBody, x: &[f64]) -> Result<f64> {
    k.cyl_support(x)
}

/// `K^◇` with default search settings.
pub fn sine_polar(k: BodyRef) -> Result<SinePolarBody> {
    sine_polar_with(k, SearchSettings::default())
}

/// `K^◇` with explicit search settings.
pub fn sine_polar_with(k: BodyRef, settings: SearchSettings) -> Result<SinePolarBody> {
    if k.dim() < 2 {
        return Err(Error::InvalidArgument(format!(
            "sine polarity needs dimension >= 2, got {}",
            k.dim()
        )));
    }
    Ok(SinePolarBody::new(k, settings))
}

/// `K^◇◇`, the cylindrical hull of `K`.
pub fn cylindrical_hull(k: BodyRef) -> Result<SinePolarBody> {
    let once: BodyRef = Arc::new(sine_polar(k)?);
    sine_polar(once)
}

/// `V(K^◇) = w_n int c_K(u)^{-n} du`.
pub fn sine_polar_volume(k: BodyRef, rule: &SphericalRule) -> Result<f64> {
    quadrature::volume(&sine_polar(k)?, rule)
}

/// The supporting cylinder of `K` with axis `u`: radius `c_K(u)`.
pub fn supporting_cylinder(k: &dyn StarBody, u: &[f64]) -> Result<Cylinder> {
    check_dim(k.dim(), u.len())?;
    geometry::check_unit(u)?;
    Ok(Cylinder {
        axis: u.to_vec(),
        radius: k.cyl_support(u)?,
    })
}

/// Supporting cylinders of `K` at every node of `rule`.
pub fn supporting_cylinders(k: &dyn StarBody, rule: &SphericalRule) -> Result<Vec<Cylinder>> {
    check_dim(k.dim(), rule.dim())?;
    rule.nodes().map(|u| supporting_cylinder(k, u)).collect()
}

/// Radial function, at each of `directions`, of the intersection of the
/// given cylinders; an outer approximation of the body they support.
pub fn node_intersection_radial(cylinders: &[Cylinder], directions: &[Vec<f64>]) -> Result<Vec<f64>> {
    directions
        .iter()
        .map(|v| {
            geometry::check_unit(v)?;
            let mut best = f64::INFINITY;
            for c in cylinders {
                check_dim(c.axis.len(), v.len())?;
                let b = bracket_unit(v, &c.axis);
                if b > 0.0 {
                    best = best.min(c.radius / b);
                }
            }
            Ok(best)
        })
        .collect()
}

/// A direction of the cylindrical Gauss image with its residual
/// `c_K(u) - [x, u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussImagePoint {
    pub direction: Vec<f64>,
    pub residual: f64,
}

/// Default residual tolerance of [`cyl_gauss_image`].
pub const GAUSS_IMAGE_TOL: f64 = 1e-6;

const BOUNDARY_TOL: f64 = 1e-8;
const GAUSS_IMAGE_STARTS: usize = 24;

/// Directions `u` with `[x, u] = c_K(u)` for a boundary point `x`, found
/// among refined candidates and returned with their residuals. The set is
/// not claimed to be complete.
pub fn cyl_gauss_image(k: &dyn StarBody, x: &[f64], tol: f64) -> Result<Vec<GaussImagePoint>> {
    check_dim(k.dim(), x.len())?;
    let n = k.dim();
    let r = geometry::norm(x);
    let e = geometry::normalized(x).ok_or(Error::NotOnBoundary { distance: k.rho(&unit(n)) })?;
    let distance = (r - k.rho(&e)).abs();
    if distance > BOUNDARY_TOL * r.max(1.0) {
        return Err(Error::NotOnBoundary { distance });
    }
    let settings = SearchSettings::default();
    let objective = |u: &[f64]| bracket(x, u) - cyl_support_with(k, u, &settings);

    let grid = default_grid(n);
    let values: Vec<f64> = grid.nodes().map(&objective).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|a, b| values[*b].total_cmp(&values[*a]));
    let min_cos = libm::cos(2.0 * grid.spacing());
    let mut starts: Vec<Vec<f64>> = k.seeds();
    for &i in &order {
        if starts.len() >= GAUSS_IMAGE_STARTS + k.seeds().len() {
            break;
        }
        let u = grid.node(i);
        if starts.iter().all(|s| dot(s, u).abs() < min_cos) {
            starts.push(u.to_vec());
        }
    }

    let mut found: Vec<GaussImagePoint> = Vec::new();
    for s in starts {
        let (val, u) = refine_from(&objective, s, grid.spacing(), &settings);
        let residual = (-val).max(0.0);
        if residual > tol {
            continue;
        }
        // antipodal directions describe the same cylinder
        let duplicate = found
            .iter()
            .any(|g| dot(&g.direction, &u).abs() > 1.0 - 1e-9);
        if !duplicate {
            found.push(GaussImagePoint {
                direction: u,
                residual,
            });
        }
    }
    Ok(found)
}

fn unit(n: usize) -> Vec<f64> {
    let mut e = alloc::vec![0.0; n];
    e[0] = 1.0;
    e
}
