//! Maximization of a function on the unit sphere: a scan over a fixed grid,
//! then multi-start golden-section refinement along great circles.

use alloc::boxed::Box;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::geometry::{self, dot};
use crate::quadrature::{RuleSpec, SphericalRule};

/// Tuning of the sphere maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    /// Number of well-separated grid maxima refined (in addition to seeds).
    pub starts: usize,
    /// Upper bound on golden-section iterations per line search.
    pub line_iters: usize,
    /// Upper bound on refinement rounds per start.
    pub rounds: usize,
    /// Angular step below which refinement stops.
    pub angle_tol: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            starts: 3,
            line_iters: 40,
            rounds: 40,
            angle_tol: 1e-10,
        }
    }
}

/// Golden-section iterations per line search: the bracket shrinks to about
/// 2% of the current step, after which the step itself is reduced.
const LINE_ITERS_PER_ROUND: usize = 10;

static GRID2: OnceBox<SphericalRule> = OnceBox::new();
static GRID3: OnceBox<SphericalRule> = OnceBox::new();
const CACHED_DIMS: usize = 64;
static GRID_HIGH: OnceBox<Vec<OnceBox<SphericalRule>>> = OnceBox::new();

/// Spec of the coarse scan grid used in dimension `dim`.
pub fn default_grid_spec(dim: usize) -> RuleSpec {
    match dim {
        2 => RuleSpec::Uniform { points: 720 },
        3 => RuleSpec::Gauss {
            polar: 24,
            azimuth: 48,
        },
        _ => RuleSpec::MonteCarlo {
            points: 4096,
            seed: 7,
        },
    }
}

/// The coarse scan grid used in dimension `dim`, built once per process
/// (grids above dimension 64 are built once per call and kept alive).
pub fn default_grid(dim: usize) -> &'static SphericalRule {
    let build = |d| {
        SphericalRule::from_spec(d, default_grid_spec(d)).expect("scan grid parameters are valid")
    };
    match dim {
        2 => GRID2.get_or_init(|| Box::new(build(2))),
        3 => GRID3.get_or_init(|| Box::new(build(3))),
        _ => {
            let slots = GRID_HIGH
                .get_or_init(|| Box::new((0..=CACHED_DIMS).map(|_| OnceBox::new()).collect()));
            match slots.get(dim) {
                Some(slot) => slot.get_or_init(|| Box::new(build(dim))),
                None => Box::leak(Box::new(build(dim))),
            }
        }
    }
}

/// Maximizes `f` over the unit sphere. `grid_values`, when given, must hold
/// `f` on the nodes of [`default_grid`]; `seeds` are extra (unit) starting
/// directions. Returns the maximum and a maximizer.
pub(crate) fn maximize<F: Fn(&[f64]) -> f64>(
    dim: usize,
    f: F,
    grid_values: Option<&[f64]>,
    seeds: &[Vec<f64>],
    settings: &SearchSettings,
) -> (f64, Vec<f64>) {
    let grid = default_grid(dim);
    let computed;
    let values = match grid_values {
        Some(v) if v.len() == grid.len() => v,
        _ => {
            computed = grid.nodes().map(&f).collect::<Vec<f64>>();
            &computed
        }
    };
    let mut order: Vec<usize> = (0..grid.len()).filter(|i| values[*i].is_finite()).collect();
    order.sort_by(|a, b| values[*b].total_cmp(&values[*a]));

    // seeds first, then well-separated grid maxima (antipodes count as the
    // same direction)
    let min_cos = libm::cos(3.0 * grid.spacing());
    let mut starts: Vec<Vec<f64>> = seeds.iter().filter(|s| s.len() == dim).cloned().collect();
    for &i in order.iter().take(settings.starts) {
        let u = grid.node(i);
        // a grid maximum next to a seed is covered by that seed's refinement
        if starts.iter().all(|s| dot(s, u).abs() < min_cos) {
            starts.push(u.to_vec());
        }
    }

    let mut best = (f64::NEG_INFINITY, alloc::vec![0.0; dim]);
    if let Some(&i) = order.first() {
        best = (values[i], grid.node(i).to_vec());
    }
    for s in starts {
        let fs = f(&s);
        let (val, arg) = refine(&f, s, fs, 2.0 * grid.spacing(), settings);
        if val > best.0 {
            best = (val, arg);
        }
    }
    best
}

fn tangent_directions(v: &[f64]) -> Vec<Vec<f64>> {
    let mut dirs = geometry::perp_basis(v);
    if dirs.len() >= 2 {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = (dirs[0].clone(), dirs[1].clone());
        dirs.push(a.iter().zip(&b).map(|(x, y)| s * (x + y)).collect());
        dirs.push(a.iter().zip(&b).map(|(x, y)| s * (x - y)).collect());
    }
    dirs
}

/// Local maximization of `f` from a unit starting direction.
pub(crate) fn refine_from<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: Vec<f64>,
    step: f64,
    settings: &SearchSettings,
) -> (f64, Vec<f64>) {
    let val = f(&start);
    refine(f, start, val, step, settings)
}

fn refine<F: Fn(&[f64]) -> f64>(
    f: &F,
    mut v: Vec<f64>,
    mut val: f64,
    mut step: f64,
    settings: &SearchSettings,
) -> (f64, Vec<f64>) {
    if !val.is_finite() {
        return (val, v);
    }
    let mut trial = alloc::vec![0.0; v.len()];
    for _ in 0..settings.rounds {
        // each line search narrows its bracket to a few percent of the step
        // and the next round shrinks the step accordingly
        let iters = settings.line_iters.min(LINE_ITERS_PER_ROUND);
        let mut moved: f64 = 0.0;
        let count = tangent_directions(&v).len();
        for k in 0..count {
            // re-derive the frame so that each direction is tangent at the current point
            let d = tangent_directions(&v).swap_remove(k);
            let g = |s: f64| {
                geometry::rotate_towards(&v, &d, s, &mut trial);
                f(&trial)
            };
            let (s, gs) = golden_max(g, -step, step, iters);
            if gs > val {
                geometry::rotate_towards(&v.clone(), &d, s, &mut v);
                let r = geometry::norm(&v);
                v.iter_mut().for_each(|x| *x /= r);
                val = gs;
                moved = moved.max(s.abs());
            }
        }
        if step <= settings.angle_tol {
            break;
        }
        step = if moved > 0.5 * step {
            step * 1.5
        } else {
            (2.0 * moved).max(step / 8.0).max(settings.angle_tol)
        };
    }
    (val, v)
}

/// Golden-section search for a maximum of `g` on `[a, b]`; returns the best
/// abscissa seen and its value.
pub(crate) fn golden_max<G: FnMut(f64) -> f64>(
    mut g: G,
    mut a: f64,
    mut b: f64,
    iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximizes a `2*pi`-periodic function of one angle: `samples` equally
/// spaced evaluations, then golden-section refinement around the `keep`
/// largest local maxima. Returns the maximum and its angle.
pub(crate) fn maximize_periodic<F: FnMut(f64) -> f64>(
    mut f: F,
    samples: usize,
    keep: usize,
    iters: usize,
) -> (f64, f64) {
    let h = 2.0 * core::f64::consts::PI / samples as f64;
    let vals: Vec<f64> = (0..samples).map(|k| f(h * k as f64)).collect();
    let mut peaks: Vec<usize> = (0..samples)
        .filter(|&k| {
            let prev = vals[(k + samples - 1) % samples];
            let next = vals[(k + 1) % samples];
            vals[k] >= prev && vals[k] >= next
        })
        .collect();
    peaks.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (k, v) in vals.iter().enumerate() {
        if *v > best.0 {
            best = (*v, h * k as f64);
        }
    }
    for &k in peaks.iter().take(keep) {
        let t = h * k as f64;
        let (arg, val) = golden_max(&mut f, t - h, t + h, iters);
        if val > best.0 {
            best = (val, arg);
        }
    }
    best
}
