//! Boundary structure of finite intersections of origin-symmetric solid
//! cylinders (strips in the plane).
//!
//! Extreme points of such an intersection lie where at least two cylinders
//! are simultaneously active. In the plane these are finitely many vertices;
//! in `R^3` they lie on ridge curves where two radial constraints agree, and
//! each ridge curve is the intersection of the sphere with a quadratic cone,
//! which admits an explicit one-angle parametrization. Maximizing a convex
//! function over the body therefore reduces to a vertex scan (`n = 2`) or a
//! family of one-dimensional searches (`n = 3`).

use alloc::vec::Vec;

use crate::geometry::{self, bracket_unit, dot};
use crate::linalg::symmetric_eigen3;
use crate::search::golden_max;

/// Pairs whose axes are closer to parallel than this are skipped when
/// building ridges: their ridge degenerates and carries no extreme points of
/// its own.
const PARALLEL_TOL: f64 = 1e-9;
const RIDGE_SAMPLES: usize = 64;
const RIDGE_KEEP: usize = 3;
const RIDGE_ITERS: usize = 44;

#[derive(Debug, Clone)]
struct Ridge {
    frame: [[f64; 3]; 3],
    alpha: f64,
    beta: f64,
    /// Boundary points at `RIDGE_SAMPLES` equally spaced angles.
    samples: Vec<[f64; 3]>,
}

impl Ridge {
    fn direction(&self, phi: f64) -> [f64; 3] {
        let (s, c) = libm::sincos(phi);
        let h = libm::sqrt((self.alpha * c * c + self.beta * s * s).max(0.0));
        let [a, b, e] = &self.frame;
        let mut v = [0.0; 3];
        for k in 0..3 {
            v[k] = c * a[k] + s * b[k] + h * e[k];
        }
        let r = geometry::norm(&v);
        v.iter_mut().for_each(|x| *x /= r);
        v
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CylinderGeometry {
    dim: usize,
    axes: Vec<Vec<f64>>,
    radii: Vec<f64>,
    vertices: Vec<[f64; 2]>,
    ridges: Vec<Ridge>,
}

impl CylinderGeometry {
    /// `axes` must be unit vectors and `radii` positive; not all axes may be
    /// parallel.
    pub(crate) fn new(dim: usize, axes: Vec<Vec<f64>>, radii: Vec<f64>) -> Self {
        let mut g = Self {
            dim,
            axes,
            radii,
            vertices: Vec::new(),
            ridges: Vec::new(),
        };
        match dim {
            2 => g.vertices = g.strip_vertices(),
            3 => {
                let mut ridges = g.ridge_curves();
                let h = 2.0 * core::f64::consts::PI / RIDGE_SAMPLES as f64;
                for ridge in &mut ridges {
                    ridge.samples = (0..RIDGE_SAMPLES)
                        .map(|k| g.boundary_point(ridge, h * k as f64))
                        .collect();
                }
                g.ridges = ridges;
            }
            _ => {}
        }
        g
    }

    /// Whether extreme points can be enumerated exactly (`n <= 3`).
    pub(crate) fn has_extremes(&self) -> bool {
        self.dim <= 3
    }

    /// `min_i r_i / [u, u_i]` for a unit `u`.
    pub(crate) fn rho(&self, u: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for (a, r) in self.axes.iter().zip(&self.radii) {
            let b = bracket_unit(u, a);
            if b > 0.0 {
                best = best.min(r / b);
            }
        }
        best
    }

    fn strip_vertices(&self) -> Vec<[f64; 2]> {
        // strip i is |n_i . y| <= r_i with n_i the quarter rotation of u_i
        let normals: Vec<[f64; 2]> = self.axes.iter().map(|a| [-a[1], a[0]]).collect();
        let mut out = Vec::new();
        for i in 0..normals.len() {
            for j in (i + 1)..normals.len() {
                let (a, b) = (normals[i], normals[j]);
                let det = a[0] * b[1] - a[1] * b[0];
                if det.abs() < PARALLEL_TOL {
                    continue;
                }
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let (ri, rj) = (si * self.radii[i], sj * self.radii[j]);
                    let y = [(ri * b[1] - rj * a[1]) / det, (a[0] * rj - b[0] * ri) / det];
                    let inside = normals
                        .iter()
                        .zip(&self.radii)
                        .all(|(nk, rk)| (nk[0] * y[0] + nk[1] * y[1]).abs() <= rk * (1.0 + 1e-9));
                    if inside {
                        out.push(y);
                    }
                }
            }
        }
        out
    }

    fn ridge_curves(&self) -> Vec<Ridge> {
        let mut out = Vec::new();
        for i in 0..self.axes.len() {
            for j in (i + 1)..self.axes.len() {
                let (ui, uj) = (&self.axes[i], &self.axes[j]);
                if geometry::bracket(ui, uj) < PARALLEL_TOL {
                    continue;
                }
                let (ri2, rj2) = (self.radii[i] * self.radii[i], self.radii[j] * self.radii[j]);
                // r_i^2 (I - u_j u_j^T) - r_j^2 (I - u_i u_i^T)
                let mut m = [0.0; 9];
                for r in 0..3 {
                    for c in 0..3 {
                        let id = if r == c { 1.0 } else { 0.0 };
                        m[3 * r + c] = ri2 * (id - uj[r] * uj[c]) - rj2 * (id - ui[r] * ui[c]);
                    }
                }
                let (lam, vecs) = symmetric_eigen3(&m);
                let scale = lam[0].abs().max(lam[2].abs());
                if !(lam[0] > 1e-14 * scale && lam[2] < -1e-14 * scale) {
                    continue;
                }
                let ridge = if lam[1] >= 0.0 {
                    Ridge {
                        frame: [vecs[0], vecs[1], vecs[2]],
                        alpha: lam[0] / -lam[2],
                        beta: lam[1] / -lam[2],
                        samples: Vec::new(),
                    }
                } else {
                    Ridge {
                        frame: [vecs[1], vecs[2], vecs[0]],
                        alpha: -lam[1] / lam[0],
                        beta: -lam[2] / lam[0],
                        samples: Vec::new(),
                    }
                };
                out.push(ridge);
            }
        }
        out
    }

    fn boundary_point(&self, ridge: &Ridge, phi: f64) -> [f64; 3] {
        let v = ridge.direction(phi);
        let r = self.rho(&v);
        [r * v[0], r * v[1], r * v[2]]
    }

    /// Maximum of an even convex function `f` over the body, evaluated on
    /// boundary points only. Requires [`has_extremes`](Self::has_extremes).
    pub(crate) fn max_over_extremes<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let mut best = f64::NEG_INFINITY;
        match self.dim {
            2 => {
                for y in &self.vertices {
                    best = best.max(f(y));
                }
            }
            3 => {
                let h = 2.0 * core::f64::consts::PI / RIDGE_SAMPLES as f64;
                let mut vals = [0.0; RIDGE_SAMPLES];
                for ridge in &self.ridges {
                    for (v, y) in vals.iter_mut().zip(&ridge.samples) {
                        *v = f(y);
                    }
                    let mut peaks: Vec<usize> = (0..RIDGE_SAMPLES)
                        .filter(|&k| {
                            vals[k] >= vals[(k + RIDGE_SAMPLES - 1) % RIDGE_SAMPLES]
                                && vals[k] >= vals[(k + 1) % RIDGE_SAMPLES]
                        })
                        .collect();
                    peaks.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
                    for &k in peaks.iter().take(RIDGE_KEEP) {
                        best = best.max(vals[k]);
                        let t = h * k as f64;
                        let (_, val) =
                            golden_max(|phi| f(&self.boundary_point(ridge, phi)), t - h, t + h, RIDGE_ITERS);
                        best = best.max(val);
                    }
                }
            }
            _ => {}
        }
        best
    }

    /// Exact support function for `n <= 3`.
    pub(crate) fn support(&self, u: &[f64]) -> Option<f64> {
        self.has_extremes()
            .then(|| self.max_over_extremes(|y| dot(u, y).abs()))
    }

    /// Exact cylindrical support function for `n <= 3` (unit `u`).
    pub(crate) fn cyl_support(&self, u: &[f64]) -> Option<f64> {
        self.has_extremes()
            .then(|| self.max_over_extremes(|y| geometry::bracket(u, y)))
    }

    /// Circumradius for `n <= 3`.
    #[cfg(test)]
    pub(crate) fn circumradius(&self) -> Option<f64> {
        self.has_extremes()
            .then(|| self.max_over_extremes(geometry::norm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> Vec<f64> {
        let mut v = alloc::vec![0.0; 3];
        v[i] = 1.0;
        v
    }

    #[test]
    fn square_from_two_strips() {
        let g = CylinderGeometry::new(2, alloc::vec![alloc::vec![1.0, 0.0], alloc::vec![0.0, 1.0]], alloc::vec![1.0, 1.0]);
        assert_eq!(g.vertices.len(), 4);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((g.support(&[s, s]).unwrap() - 2.0 * s).abs() < 1e-14);
        assert!((g.circumradius().unwrap() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bicylinder_extremes() {
        let g = CylinderGeometry::new(3, alloc::vec![e(0), e(1)], alloc::vec![1.0, 1.0]);
        assert_eq!(g.ridges.len(), 1);
        // ridge points satisfy x^2 + z^2 = y^2 + z^2 = 1 on the boundary
        for k in 0..20 {
            let v = g.ridges[0].direction(0.3 * k as f64);
            let r = g.rho(&v);
            let y = [r * v[0], r * v[1], r * v[2]];
            assert!((y[1] * y[1] + y[2] * y[2] - 1.0).abs() < 1e-12);
            assert!((y[0] * y[0] + y[2] * y[2] - 1.0).abs() < 1e-12);
        }
        assert!((g.support(&e(2)).unwrap() - 1.0).abs() < 1e-12);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((g.support(&[s, s, 0.0]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        // farthest points are (+-1, +-1, 0)
        assert!((g.circumradius().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unequal_radii_ridge() {
        let g = CylinderGeometry::new(3, alloc::vec![e(0), e(1)], alloc::vec![1.0, 3.0]);
        assert_eq!(g.ridges.len(), 1);
        for k in 0..20 {
            let v = g.ridges[0].direction(0.3 * k as f64);
            let a = 1.0 / bracket_unit(&v, &e(0));
            let b = 3.0 / bracket_unit(&v, &e(1));
            assert!((a - b).abs() < 1e-10 * a);
        }
    }
}
