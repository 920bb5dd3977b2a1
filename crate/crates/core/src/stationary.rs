//! Stationary points of `phi_x` restricted to graph segments.
//!
//! For a segment `z2 = Gamma(z1)` the restricted phase is
//!
//! ```text
//! g(z1)   = (x1 - z1)^2 - (x2 - Gamma)^2
//! g'(z1)  = -2 (x1 - z1) + 2 (x2 - Gamma) Gamma'
//! g''(z1) = 2 - 2 Gamma'^2 + 2 (x2 - Gamma) Gamma''
//! ```
//!
//! Order-two points occur exactly when `x = G(z1)` with
//! `G = (z1 + (Gamma'^3 - Gamma') / Gamma'', Gamma + (Gamma'^2 - 1) / Gamma'')`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Axis, GraphSegment, SubDomain};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, lattice_roots};

pub const DEGENERACY_THRESHOLD: f64 = 0.05;
pub const SCAN_LATTICE: usize = 2048;
pub const DEFAULT_ROOT_TOL: f64 = 1e-9;
pub const MAX_OSC_POINTS: usize = 10_000_000;

/// `phi_x` restricted to a segment, as a function of the segment parameter.
#[derive(Clone, Debug)]
pub struct RestrictedPhase<'a> {
    pub x: [f64; 2],
    pub seg: &'a GraphSegment,
}

pub fn phase_on_curve(x: [f64; 2], seg: &GraphSegment) -> RestrictedPhase<'_> {
    RestrictedPhase { x, seg }
}

impl RestrictedPhase<'_> {
    /// `[g, g', g'']` at parameter `p`.
    pub fn eval(&self, p: f64) -> [f64; 3] {
        let [f, d1, d2] = self.seg.eval(p);
        let [x1, x2] = self.x;
        match self.seg.orientation {
            Axis::Z1 => {
                let (a, b) = (x1 - p, x2 - f);
                [a * a - b * b, -2.0 * a + 2.0 * b * d1, 2.0 - 2.0 * d1 * d1 + 2.0 * b * d2]
            }
            Axis::Z2 => {
                let (a, b) = (x1 - f, x2 - p);
                [a * a - b * b, -2.0 * a * d1 + 2.0 * b, 2.0 * d1 * d1 - 2.0 * a * d2 - 2.0]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    One,
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct StationaryPoint {
    pub param: f64,
    pub location: [f64; 2],
    pub g2: f64,
    pub order: Order,
}

#[derive(Clone, Debug, Default)]
pub struct StationaryScan {
    pub points: Vec<StationaryPoint>,
    /// The restricted phase is constant on the whole segment.
    pub flat: bool,
}

impl StationaryScan {
    pub fn min_g2(&self) -> f64 {
        self.points.iter().map(|p| p.g2.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_degenerate(&self, threshold: f64) -> bool {
        self.flat || self.points.iter().any(|p| p.g2.abs() < threshold)
    }
}

pub fn find_stationary(x: [f64; 2], seg: &GraphSegment, tol: f64) -> StationaryScan {
    find_stationary_with(x, seg, tol, DEGENERACY_THRESHOLD)
}

pub fn find_stationary_with(x: [f64; 2], seg: &GraphSegment, tol: f64, threshold: f64) -> StationaryScan {
    let ph = phase_on_curve(x, seg);
    let [a, b] = seg.interval;
    let m = SCAN_LATTICE;
    let flat = (0..=m).all(|k| ph.eval(a + (b - a) * k as f64 / m as f64)[1].abs() <= tol);
    if flat {
        return StationaryScan { points: Vec::new(), flat: true };
    }
    let dg = |p: f64| {
        let v = ph.eval(p);
        [v[1], v[2]]
    };
    let points = lattice_roots(&dg, a, b, m, tol)
        .into_iter()
        .map(|p| {
            let g2 = ph.eval(p)[2];
            StationaryPoint {
                param: p,
                location: seg.point(p),
                g2,
                order: if g2.abs() < threshold { Order::Degenerate } else { Order::One },
            }
        })
        .collect();
    StationaryScan { points, flat: false }
}

#[derive(Clone, Debug, Default)]
pub struct DegenerateLocus {
    pub points: Vec<[f64; 2]>,
    pub source_params: Vec<f64>,
    /// Parameters with `|Gamma''| <= delta`, handled by the tangent-family branch.
    pub flat_params: Vec<f64>,
    /// `(param, curve point, slope 1/Gamma')` for flat parameters with `Gamma'^2` in `[1 - d*, 1 + d*]`.
    pub tangent_family: Vec<(f64, [f64; 2], f64)>,
}

fn swap(p: [f64; 2]) -> [f64; 2] {
    [p[1], p[0]]
}

/// Residuals of the stationarity system for the point `x` generated at parameter `p`.
///
/// ```text
/// r5 = x1 - z1 - Gamma' (x2 - Gamma)
/// r6 = Gamma'' (x2 - Gamma) - (Gamma'^2 - 1)
/// ```
pub fn locus_residuals(seg: &GraphSegment, p: f64, x: [f64; 2]) -> [f64; 2] {
    let [f, d1, d2] = seg.eval(p);
    let x = if seg.orientation == Axis::Z1 { x } else { swap(x) };
    [x[0] - p - d1 * (x[1] - f), d2 * (x[1] - f) - (d1 * d1 - 1.0)]
}

pub fn degenerate_locus(seg: &GraphSegment, n_samples: usize, delta: f64, diam: f64) -> DegenerateLocus {
    let mut out = DegenerateLocus::default();
    let dstar = delta * diam;
    for p in seg.probe_params(n_samples.max(1)) {
        let [f, d1, d2] = seg.eval(p);
        if d2.abs() > delta {
            let g = [p + (d1 * d1 * d1 - d1) / d2, f + (d1 * d1 - 1.0) / d2];
            let g = if seg.orientation == Axis::Z1 { g } else { swap(g) };
            out.points.push(g);
            out.source_params.push(p);
        } else {
            out.flat_params.push(p);
            if (d1 * d1 - 1.0).abs() <= dstar {
                out.tangent_family.push((p, seg.point(p), 1.0 / d1));
            }
        }
    }
    out
}

/// Monte Carlo area of the union of lines with slope `slope` through curve points whose
/// tangent slope is within `eps` of `slope`, intersected with `omega`.
///
/// A sample belongs to the union when its perpendicular distance to the line family is at
/// most `halfwidth` (zero gives the exact measure-zero lines).
pub fn tangent_set_area(
    seg: &GraphSegment,
    slope: f64,
    eps: f64,
    omega: &SubDomain,
    n_mc: usize,
    seed: u64,
    halfwidth: f64,
) -> f64 {
    const LATTICE: usize = 20_000;
    let params = seg.probe_params(LATTICE);
    let mut ranges: Vec<(f64, f64)> = Vec::new();
    let mut current: Option<(f64, f64)> = None;
    for &p in &params {
        let [_, d1, _] = seg.eval(p);
        let tangent = match seg.orientation {
            Axis::Z1 => d1,
            Axis::Z2 => 1.0 / d1,
        };
        if (tangent - slope).abs() < eps {
            let q = seg.point(p);
            let c = q[1] - slope * q[0];
            current = Some(match current {
                Some((lo, hi)) => (lo.min(c), hi.max(c)),
                None => (c, c),
            });
        } else if let Some(r) = current.take() {
            ranges.push(r);
        }
    }
    if let Some(r) = current {
        ranges.push(r);
    }
    if ranges.is_empty() && halfwidth == 0.0 {
        return 0.0;
    }
    let pad = halfwidth * (1.0 + slope * slope).sqrt();
    let (lo, hi) = omega.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut inside, mut hits) = (0usize, 0usize);
    for _ in 0..n_mc {
        let z = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        if !omega.contains(z) {
            continue;
        }
        inside += 1;
        let c = z[1] - slope * z[0];
        if ranges.iter().any(|&(a, b)| c >= a - pad && c <= b + pad) {
            hits += 1;
        }
    }
    if inside == 0 {
        return 0.0;
    }
    omega.area * hits as f64 / inside as f64
}

/// `int_a^b exp(i lam g) h` by composite 20-point Gauss-Legendre panels, each panel
/// spanning at most one oscillation of `lam g`.
pub fn osc_integral_1d(
    g: &dyn Fn(f64) -> [f64; 3],
    h: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    lambda: f64,
) -> Result<Complex64> {
    const ORDER: usize = 20;
    const MIN_PANELS: usize = 16;
    let two_pi = 2.0 * std::f64::consts::PI;
    let oscillations = |lo: f64, hi: f64| {
        let len = hi - lo;
        let mut dmax: f64 = 0.0;
        let mut d2max: f64 = 0.0;
        for k in 0..=4 {
            let v = g(lo + len * k as f64 / 4.0);
            dmax = dmax.max(v[1].abs());
            d2max = d2max.max(v[2].abs());
        }
        lambda * (dmax * len + 0.125 * d2max * len * len) / two_pi
    };
    let mut stack: Vec<(f64, f64)> =
        (0..MIN_PANELS).map(|k| (a + (b - a) * k as f64 / MIN_PANELS as f64, a + (b - a) * (k + 1) as f64 / MIN_PANELS as f64)).collect();
    stack.reverse();
    let mut panels = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        if oscillations(lo, hi) > 1.0 {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi));
            stack.push((lo, mid));
        } else {
            panels.push((lo, hi));
        }
        if (panels.len() + stack.len()) * ORDER > MAX_OSC_POINTS {
            let required = estimate_points(&oscillations, a, b, ORDER);
            return Err(Error::ResolutionExceeded { required, limit: MAX_OSC_POINTS });
        }
    }
    let (x, w) = gauss_legendre(ORDER);
    let mut acc = Complex64::new(0.0, 0.0);
    for (lo, hi) in panels {
        let half = 0.5 * (hi - lo);
        for k in 0..ORDER {
            let t = lo + half * (x[k] + 1.0);
            acc += h(t) * Complex64::from_polar(half * w[k], lambda * g(t)[0]);
        }
    }
    Ok(acc)
}

fn estimate_points(osc: &dyn Fn(f64, f64) -> f64, a: f64, b: f64, order: usize) -> usize {
    let total = osc(a, b).max(1.0);
    (total * order as f64).min(usize::MAX as f64 / 2.0) as usize
}

#[derive(Clone, Debug)]
pub struct RootTracking {
    /// `(root of f, matched root of g)`.
    pub pairs: Vec<(f64, f64)>,
    pub delta: f64,
    pub c1_distance: f64,
    pub eta: f64,
    pub radius: f64,
    pub a_min: f64,
}

/// Matches each simple root of `f` with the unique nearby root of `g`, following the
/// perturbation argument with `delta = min{a/2, eta/4, eps eta/4}`.
pub fn track_roots(
    f: &dyn Fn(f64) -> [f64; 2],
    g: &dyn Fn(f64) -> [f64; 2],
    interval: [f64; 2],
    eps: f64,
) -> Result<RootTracking> {
    let [lo, hi] = interval;
    let m = 4 * SCAN_LATTICE;
    let xs: Vec<f64> = (0..=m).map(|k| lo + (hi - lo) * k as f64 / m as f64).collect();
    let roots = lattice_roots(f, lo, hi, SCAN_LATTICE, 1e-12);
    let eta = roots.iter().map(|&r| f(r)[1].abs()).fold(f64::INFINITY, f64::min);
    if roots.iter().any(|&r| f(r)[1] == 0.0) {
        return Err(Error::Invalid("f has a multiple root".into()));
    }
    // Largest ball radius with |f'| > eta/2, capped so that the balls stay disjoint.
    let mut radius = hi - lo;
    for w in roots.windows(2) {
        radius = radius.min(0.5 * (w[1] - w[0]));
    }
    for &r in &roots {
        for &x in &xs {
            if (x - r).abs() < radius && f(x)[1].abs() <= eta / 2.0 {
                radius = radius.min((x - r).abs());
            }
        }
    }
    let outside = |x: f64| roots.iter().all(|&r| (x - r).abs() >= radius);
    let a_min = xs.iter().filter(|&&x| outside(x)).map(|&x| f(x)[0].abs()).fold(f64::INFINITY, f64::min);
    let eta_eff = if roots.is_empty() { f64::INFINITY } else { eta };
    let delta = (a_min / 2.0).min(eta_eff / 4.0).min(eps * eta_eff / 4.0);
    let c1_distance = xs
        .iter()
        .map(|&x| {
            let (u, v) = (f(x), g(x));
            (u[0] - v[0]).abs().max((u[1] - v[1]).abs())
        })
        .fold(0.0, f64::max);
    if c1_distance >= delta {
        return Err(Error::PerturbationTooLarge { distance: c1_distance, delta });
    }
    let mut pairs = Vec::with_capacity(roots.len());
    for &r in &roots {
        let (a, b) = ((r - radius).max(lo), (r + radius).min(hi));
        let gr = lattice_roots(g, a, b, 256, 1e-10);
        match gr.as_slice() {
            [one] => pairs.push((r, *one)),
            _ => return Err(Error::Invalid(format!("expected one root of g near {r}, found {}", gr.len()))),
        }
    }
    Ok(RootTracking { pairs, delta, c1_distance, eta, radius, a_min })
}
