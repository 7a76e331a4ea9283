//! Vector primitives on `&[f64]`, the sine bracket and the dimension
//! constants shared by every transform.
//!
//! Vectors are plain slices. Functions with a `Result` return validate
//! their inputs; the crate-internal helpers assume well-formed data.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Tolerance on `|u| - 1` for arguments that must be unit vectors.
pub const UNIT_TOL: f64 = 1e-12;

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    libm::sqrt(norm_sq(x))
}

/// Returns `x / |x|`, or `None` for the zero vector.
pub fn normalized(x: &[f64]) -> Option<Vec<f64>> {
    let r = norm(x);
    if r == 0.0 || !r.is_finite() {
        return None;
    }
    Some(x.iter().map(|v| v / r).collect())
}

pub(crate) fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "vectors must have dimension >= 2, got {}",
            x.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_unit(u: &[f64]) -> Result<()> {
    let r = norm(u);
    if (r - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnit { norm: r });
    }
    Ok(())
}

/// Unchecked sine bracket.
#[inline]
pub(crate) fn bracket(x: &[f64], y: &[f64]) -> f64 {
    let d = dot(x, y);
    let r = norm_sq(x) * norm_sq(y) - d * d;
    if r > 0.0 {
        libm::sqrt(r)
    } else {
        0.0
    }
}

/// Bracket of two unit vectors, `sqrt(1 - (u.v)^2)`.
#[inline]
pub(crate) fn bracket_unit(u: &[f64], v: &[f64]) -> f64 {
    let d = dot(u, v);
    let r = 1.0 - d * d;
    if r > 0.0 {
        libm::sqrt(r)
    } else {
        0.0
    }
}

/// The sine bracket `[x, y] = sqrt(|x|^2 |y|^2 - (x.y)^2)`: the area of the
/// parallelogram spanned by `x` and `y`.
///
/// The radicand is clamped at zero, so nearly parallel arguments lose about
/// half of their significant digits.
pub fn sine_bracket(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    Ok(bracket(x, y))
}

/// Orthogonal projection of `x` onto the hyperplane `u^perp`.
pub fn proj_perp(x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    check_dims(x, u)?;
    check_unit(u)?;
    let d = dot(x, u);
    Ok(x.iter().zip(u).map(|(a, b)| a - d * b).collect())
}

/// `ln omega_s` for real `s >= 0`.
pub(crate) fn ln_omega(s: f64) -> f64 {
    0.5 * s * libm::log(PI) - libm::lgamma(1.0 + 0.5 * s)
}

/// Volume of the unit ball, `pi^(s/2) / Gamma(1 + s/2)`, for real `s >= 0`.
pub fn unit_ball_volume(s: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "unit ball volume needs a finite index >= 0, got {s}"
        )));
    }
    Ok(omega(s))
}

pub(crate) fn omega(s: f64) -> f64 {
    if s <= 100.0 {
        libm::pow(PI, 0.5 * s) / libm::tgamma(1.0 + 0.5 * s)
    } else {
        libm::exp(ln_omega(s))
    }
}

fn check_np(n: usize, p: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "dimension must be >= 2, got {n}"
        )));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!(
            "exponent must be finite and >= 1, got {p}"
        )));
    }
    Ok(())
}

/// Normalization of the L_p-sine centroid body:
/// `(n-1) w_{n-1} w_{n+p-2} / ((n+p) w_n w_{n+p-3})`.
pub fn c_tilde(n: usize, p: f64) -> Result<f64> {
    check_np(n, p)?;
    Ok(libm::exp(ln_c_tilde(n, p)))
}

pub(crate) fn ln_c_tilde(n: usize, p: f64) -> f64 {
    let n = n as f64;
    libm::log(n - 1.0) + ln_omega(n - 1.0) + ln_omega(n + p - 2.0)
        - libm::log(n + p)
        - ln_omega(n)
        - ln_omega(n + p - 3.0)
}

/// Normalization of the classical L_p centroid body:
/// `w_{n+p} / (w_2 w_n w_{p-1})`.
pub fn c_np(n: usize, p: f64) -> Result<f64> {
    check_np(n, p)?;
    Ok(libm::exp(ln_c_np(n, p)))
}

pub(crate) fn ln_c_np(n: usize, p: f64) -> f64 {
    let n = n as f64;
    ln_omega(n + p) - ln_omega(2.0) - ln_omega(n) - ln_omega(p - 1.0)
}

/// `int_{S^{n-1}} |P_V u|^p du` for an `m`-dimensional subspace `V`, with
/// `du` the uniform probability measure.
pub fn projection_moment(n: usize, m: usize, p: f64) -> Result<f64> {
    if n < 2 || m == 0 || m > n {
        return Err(Error::InvalidArgument(alloc::format!(
            "projection moment needs 1 <= m <= n, n >= 2 (got n={n}, m={m})"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "projection moment needs p > 0, got {p}"
        )));
    }
    Ok(libm::exp(ln_projection_moment(n, m, p)))
}

pub(crate) fn ln_projection_moment(n: usize, m: usize, p: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    libm::log(m) + ln_omega(m) + ln_omega(n + p - 2.0)
        - libm::log(n)
        - ln_omega(n)
        - ln_omega(m + p - 2.0)
}

/// Quarter turn in the plane, `(x1, x2) -> (-x2, x1)`.
pub fn rotate_quarter_2d(x: &[f64]) -> Result<[f64; 2]> {
    if x.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.len(),
        });
    }
    Ok([-x[1], x[0]])
}

/// Orthonormal basis of `u^perp` for a unit vector `u` (Gram-Schmidt on the
/// standard basis, skipping the coordinate most aligned with `u`).
pub(crate) fn perp_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let skip = (0..n)
        .max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for k in (0..n).filter(|&k| k != skip) {
        let mut v = alloc::vec![0.0; n];
        v[k] = 1.0;
        let d = dot(&v, u);
        for (vi, ui) in v.iter_mut().zip(u) {
            *vi -= d * ui;
        }
        for b in &basis {
            let d = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
        let r = norm(&v);
        for vi in v.iter_mut() {
            *vi /= r;
        }
        basis.push(v);
    }
    basis
}

/// `cos(s) v + sin(s) d`, a step of length `s` along the great circle
/// through unit `v` with unit tangent `d`.
#[inline]
pub(crate) fn rotate_towards(v: &[f64], d: &[f64], s: f64, out: &mut [f64]) {
    let (sn, cs) = libm::sincos(s);
    for ((o, a), b) in out.iter_mut().zip(v).zip(d) {
        *o = cs * a + sn * b;
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Whether `p` is an even integer.
pub(crate) fn is_even_integer(p: f64) -> bool {
    libm::trunc(p) == p && libm::trunc(p / 2.0) == p / 2.0
}

/// Angle reduced to `[0, 2 pi)`.
pub(crate) fn wrap_angle(t: f64) -> f64 {
    let r = libm::fmod(t, 2.0 * core::f64::consts::PI);
    if r < 0.0 {
        r + 2.0 * core::f64::consts::PI
    } else {
        r
    }
}
