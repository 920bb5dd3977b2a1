//! Piecewise C2 discontinuity curves, subdomains and piecewise smooth potentials.
//!
//! A boundary is an ordered list of graph segments, each either `z2 = f(z1)` or
//! `z1 = f(z2)` over a parameter interval. The potential is
//!
//! ```text
//! V(z) = sum_j q_j(z) chi_{Omega_j}(z)
//! ```
//!
//! and its `D^{s,r}` size is bounded above by evaluating
//! `sum_j ||q_j||_{W^{s,1}} (1 + ||chi_{Omega_j}||_{H^r})` for the given decomposition.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, FourierGrid};
use crate::spline::ClampedSpline;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Graph over `z1`: points `(p, f(p))`.
    Z1,
    /// Graph over `z2`: points `(f(p), p)`.
    Z2,
}

/// Scalar curve functions with closed-form first and second derivatives.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveFn {
    Constant { value: f64 },
    /// `sum_k coeffs[k] p^k`.
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude * exp(-(p - center)^2 / (2 width^2))`.
    GaussianBump { amplitude: f64, center: f64, width: f64 },
    /// `amplitude * (1 - u^2)^4` for `|u| < 1`, `u = (p - center) / width`; C3 with compact support.
    CompactBump { amplitude: f64, center: f64, width: f64 },
    /// `offset + sign * sqrt(radius^2 - (p - center)^2)`.
    CircleArc { center: f64, offset: f64, radius: f64, sign: f64 },
    Spline { spline: ClampedSpline },
    Sum { terms: Vec<CurveFn> },
}

impl CurveFn {
    pub fn eval(&self, p: f64) -> [f64; 3] {
        match self {
            CurveFn::Constant { value } => [*value, 0.0, 0.0],
            CurveFn::Polynomial { coeffs } => {
                let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    d2 = d2 * p + 2.0 * d1;
                    d1 = d1 * p + f;
                    f = f * p + c;
                }
                [f, d1, d2]
            }
            CurveFn::GaussianBump { amplitude, center, width } => {
                let u = (p - center) / width;
                let e = amplitude * (-0.5 * u * u).exp();
                [e, -e * u / width, e * (u * u - 1.0) / (width * width)]
            }
            CurveFn::CompactBump { amplitude, center, width } => {
                let u = (p - center) / width;
                if u.abs() >= 1.0 {
                    return [0.0, 0.0, 0.0];
                }
                let v = 1.0 - u * u;
                let f = amplitude * v.powi(4);
                let d1 = amplitude * 4.0 * v.powi(3) * (-2.0 * u) / width;
                let d2 = amplitude * (48.0 * u * u * v * v - 8.0 * v.powi(3)) / (width * width);
                [f, d1, d2]
            }
            CurveFn::CircleArc { center, offset, radius, sign } => {
                let d = p - center;
                let s2 = (radius * radius - d * d).max(0.0);
                let s = s2.sqrt();
                [offset + sign * s, -sign * d / s, -sign * radius * radius / (s2 * s)]
            }
            CurveFn::Spline { spline } => spline.eval(p),
            CurveFn::Sum { terms } => terms.iter().fold([0.0; 3], |acc, t| {
                let v = t.eval(p);
                [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]
            }),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphSegment {
    pub orientation: Axis,
    pub interval: [f64; 2],
    /// Traversal from `interval[0]` to `interval[1]` when true.
    #[serde(default = "default_true")]
    pub forward: bool,
    pub function: CurveFn,
    /// Declared Holder exponent of `f''`; metadata only.
    #[serde(default)]
    pub holder_alpha: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl GraphSegment {
    pub fn new(orientation: Axis, interval: [f64; 2], forward: bool, function: CurveFn) -> Self {
        Self { orientation, interval, forward, function, holder_alpha: Some(1.0) }
    }

    pub fn eval(&self, p: f64) -> [f64; 3] {
        self.function.eval(p)
    }

    pub fn point(&self, p: f64) -> [f64; 2] {
        let f = self.function.eval(p)[0];
        match self.orientation {
            Axis::Z1 => [p, f],
            Axis::Z2 => [f, p],
        }
    }

    pub fn start(&self) -> [f64; 2] {
        self.point(if self.forward { self.interval[0] } else { self.interval[1] })
    }

    pub fn end(&self) -> [f64; 2] {
        self.point(if self.forward { self.interval[1] } else { self.interval[0] })
    }

    /// `m + 1` points in traversal order.
    pub fn polyline(&self, m: usize) -> Vec<[f64; 2]> {
        let [a, b] = self.interval;
        (0..=m)
            .map(|k| {
                let t = k as f64 / m as f64;
                let p = if self.forward { a + t * (b - a) } else { b - t * (b - a) };
                self.point(p)
            })
            .collect()
    }

    pub fn probe_params(&self, m: usize) -> Vec<f64> {
        let [a, b] = self.interval;
        (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect()
    }

    /// Central-difference check of `f'` against `f` and `f''` against `f'`.
    pub fn check_consistency(&self) -> Result<()> {
        let [a, b] = self.interval;
        let step = 1e-5 * (b - a);
        let m = 200;
        let mut worst: f64 = 0.0;
        let mut scale1: f64 = 1.0;
        let mut scale2: f64 = 1.0;
        for k in 1..m {
            let p = a + (b - a) * k as f64 / m as f64;
            let lo = self.eval(p - step);
            let hi = self.eval(p + step);
            let mid = self.eval(p);
            let fd1 = (hi[0] - lo[0]) / (2.0 * step);
            let fd2 = (hi[1] - lo[1]) / (2.0 * step);
            scale1 = scale1.max(mid[1].abs());
            scale2 = scale2.max(mid[2].abs());
            worst = worst.max((fd1 - mid[1]).abs() / scale1).max((fd2 - mid[2]).abs() / scale2);
        }
        if worst > 1e-4 {
            return Err(Error::Invalid(format!("segment derivatives inconsistent (relative error {worst:e})")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PiecewiseBoundary {
    pub segments: Vec<GraphSegment>,
    pub closed: bool,
}

impl PiecewiseBoundary {
    pub fn new(segments: Vec<GraphSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Invalid("boundary without segments".into()));
        }
        for s in &segments {
            s.check_consistency()?;
        }
        let m = segments.len();
        for k in 0..m {
            let e = segments[k].end();
            let s = segments[(k + 1) % m].start();
            if dist(e, s) > 1e-10 {
                return Err(Error::Invalid(format!("segment {k} does not meet segment {}", (k + 1) % m)));
            }
        }
        let b = Self { segments, closed: true };
        if !b.is_simple(64) {
            return Err(Error::Invalid("boundary curve self-intersects".into()));
        }
        Ok(b)
    }

    /// Closed polyline with `m` points per segment (the closing point is not repeated).
    pub fn polyline(&self, m: usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(self.segments.len() * m);
        for s in &self.segments {
            let mut p = s.polyline(m);
            p.pop();
            pts.extend(p);
        }
        pts
    }

    pub fn is_simple(&self, m: usize) -> bool {
        let pts = self.polyline(m);
        let n = pts.len();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (pts[j], pts[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        bbox(&self.polyline(256))
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Closed-segment intersection, touching included.
fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let within = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    (o1 == 0.0 && within(a, b, c))
        || (o2 == 0.0 && within(a, b, d))
        || (o3 == 0.0 && within(c, d, a))
        || (o4 == 0.0 && within(c, d, b))
}

fn bbox(pts: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Even-odd membership for a closed polygon.
pub fn point_in_polygon(poly: &[[f64; 2]], z: [f64; 2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > z[1]) != (b[1] > z[1]) {
            let x = a[0] + (z[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if z[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Winding number of a closed polyline around `z`.
pub fn winding_number(poly: &[[f64; 2]], z: [f64; 2]) -> i32 {
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a[1] <= z[1] {
            if b[1] > z[1] && orient(a, b, z) > 0.0 {
                w += 1;
            }
        } else if b[1] <= z[1] && orient(a, b, z) < 0.0 {
            w -= 1;
        }
    }
    w
}

#[derive(Clone, Debug)]
enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Polygon(Vec<[f64; 2]>),
    Traced,
}

#[derive(Clone, Debug)]
pub struct SubDomain {
    pub boundary: PiecewiseBoundary,
    shape: Shape,
    polygon: Vec<[f64; 2]>,
    pub area: f64,
    lo: [f64; 2],
    hi: [f64; 2],
}

const TRACE_POINTS: usize = 4096;

impl SubDomain {
    /// Membership from a dense polyline trace of the boundary.
    pub fn from_boundary(boundary: PiecewiseBoundary) -> Self {
        Self::with_shape(boundary, Shape::Traced)
    }

    fn with_shape(boundary: PiecewiseBoundary, shape: Shape) -> Self {
        let polygon = boundary.polyline(TRACE_POINTS);
        let area = match &shape {
            Shape::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Shape::Polygon(v) => shoelace(v).abs(),
            Shape::Traced => shoelace(&polygon).abs(),
        };
        let (lo, hi) = bbox(&polygon);
        Self { boundary, shape, polygon, area, lo, hi }
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Invalid("disk radius must be positive".into()));
        }
        let h = radius * FRAC_1_SQRT_2;
        let (c1, c2) = (center[0], center[1]);
        let arc = |center: f64, offset: f64, sign: f64| CurveFn::CircleArc { center, offset, radius, sign };
        let segs = vec![
            GraphSegment::new(Axis::Z1, [c1 - h, c1 + h], false, arc(c1, c2, 1.0)),
            GraphSegment::new(Axis::Z2, [c2 - h, c2 + h], false, arc(c2, c1, -1.0)),
            GraphSegment::new(Axis::Z1, [c1 - h, c1 + h], true, arc(c1, c2, -1.0)),
            GraphSegment::new(Axis::Z2, [c2 - h, c2 + h], true, arc(c2, c1, 1.0)),
        ];
        Ok(Self::with_shape(PiecewiseBoundary::new(segs)?, Shape::Disk { center, radius }))
    }

    /// Polygon whose edges are graph segments; vertices in traversal order.
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Invalid("polygon needs at least three vertices".into()));
        }
        let mut segs = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (vertices[k], vertices[(k + 1) % n]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let seg = if dx.abs() >= dy.abs() {
                let m = dy / dx;
                let f = CurveFn::Polynomial { coeffs: vec![a[1] - m * a[0], m] };
                GraphSegment::new(Axis::Z1, [a[0].min(b[0]), a[0].max(b[0])], dx > 0.0, f)
            } else {
                let m = dx / dy;
                let f = CurveFn::Polynomial { coeffs: vec![a[0] - m * a[1], m] };
                GraphSegment::new(Axis::Z2, [a[1].min(b[1]), a[1].max(b[1])], dy > 0.0, f)
            };
            segs.push(seg);
        }
        Ok(Self::with_shape(PiecewiseBoundary::new(segs)?, Shape::Polygon(vertices.to_vec())))
    }

    pub fn contains(&self, z: [f64; 2]) -> bool {
        if z[0] < self.lo[0] || z[0] > self.hi[0] || z[1] < self.lo[1] || z[1] > self.hi[1] {
            return false;
        }
        match &self.shape {
            Shape::Disk { center, radius } => dist(z, *center) < *radius,
            Shape::Polygon(v) => point_in_polygon(v, z),
            Shape::Traced => point_in_polygon(&self.polygon, z),
        }
    }

    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        (self.lo, self.hi)
    }

    /// Winding number of the traced boundary; used to cross-check `contains`.
    pub fn winding(&self, z: [f64; 2]) -> i32 {
        winding_number(&self.polygon, z)
    }

    /// Distance from `z` to the traced boundary.
    pub fn boundary_distance(&self, z: [f64; 2]) -> f64 {
        let n = self.polygon.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            best = best.min(point_segment_distance(z, self.polygon[i], self.polygon[(i + 1) % n]));
        }
        best
    }

    /// Node membership mask on a grid.
    pub fn mask(&self, g: &FourierGrid) -> Vec<bool> {
        let n = g.n();
        let mut out = vec![false; g.len()];
        match &self.shape {
            Shape::Traced => {
                // Scanline fill with the even-odd rule.
                let poly = &self.polygon;
                let np = poly.len();
                for j in 0..n {
                    let y = g.node(0, j)[1];
                    if y < self.lo[1] || y > self.hi[1] {
                        continue;
                    }
                    let mut xs = Vec::new();
                    let mut k = np - 1;
                    for i in 0..np {
                        let (a, b) = (poly[i], poly[k]);
                        if (a[1] > y) != (b[1] > y) {
                            xs.push(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
                        }
                        k = i;
                    }
                    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    for i in 0..n {
                        let x = g.node(i, j)[0];
                        let crossings = xs.iter().filter(|&&c| x < c).count();
                        out[j * n + i] = crossings % 2 == 1;
                    }
                }
            }
            _ => {
                for (k, m) in out.iter_mut().enumerate() {
                    *m = self.contains(g.node_at(k));
                }
            }
        }
        out
    }

    pub fn indicator(&self, g: &FourierGrid) -> ComplexField {
        let values = self.mask(g).into_iter().map(|b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0)).collect();
        ComplexField { grid: g.clone(), values }
    }
}

fn point_segment_distance(z: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((z[0] - a[0]) * dx + (z[1] - a[1]) * dy) / l2).clamp(0.0, 1.0) };
    dist(z, [a[0] + t * dx, a[1] + t * dy])
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>() / 2.0
}

/// Smooth complex amplitudes `q_j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SmoothFn {
    Constant { value: [f64; 2] },
    /// `amplitude * exp(-|z - center|^2 / (2 sigma^2))`.
    GaussianBump { amplitude: [f64; 2], center: [f64; 2], sigma: f64 },
    /// `sum c * z1^i * z2^j` over `(i, j, [re, im])` terms.
    Polynomial { terms: Vec<(u32, u32, [f64; 2])> },
}

impl SmoothFn {
    pub fn eval(&self, z: [f64; 2]) -> Complex64 {
        match self {
            SmoothFn::Constant { value } => Complex64::new(value[0], value[1]),
            SmoothFn::GaussianBump { amplitude, center, sigma } => {
                let r2 = (z[0] - center[0]).powi(2) + (z[1] - center[1]).powi(2);
                Complex64::new(amplitude[0], amplitude[1]) * (-r2 / (2.0 * sigma * sigma)).exp()
            }
            SmoothFn::Polynomial { terms } => terms
                .iter()
                .map(|&(i, j, c)| Complex64::new(c[0], c[1]) * z[0].powi(i as i32) * z[1].powi(j as i32))
                .sum(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mul = |v: [f64; 2]| {
            let r = Complex64::new(v[0], v[1]) * c;
            [r.re, r.im]
        };
        match self {
            SmoothFn::Constant { value } => SmoothFn::Constant { value: mul(*value) },
            SmoothFn::GaussianBump { amplitude, center, sigma } => {
                SmoothFn::GaussianBump { amplitude: mul(*amplitude), center: *center, sigma: *sigma }
            }
            SmoothFn::Polynomial { terms } => {
                SmoothFn::Polynomial { terms: terms.iter().map(|&(i, j, v)| (i, j, mul(v))).collect() }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Piece {
    pub q: SmoothFn,
    pub domain: SubDomain,
}

#[derive(Clone, Debug)]
pub struct PiecewisePotential {
    pub pieces: Vec<Piece>,
    pub s: f64,
    pub r: f64,
}

impl PiecewisePotential {
    pub fn new(pieces: Vec<Piece>, s: f64, r: f64) -> Result<Self> {
        if !(2.0..3.0).contains(&s) {
            return Err(Error::Invalid(format!("s = {s} outside [2, 3)")));
        }
        if !(r > 0.0 && r < 0.5) {
            return Err(Error::Invalid(format!("r = {r} outside (0, 1/2)")));
        }
        if s > 2.0 && !(s - 2.0 < 2.0 * r && 2.0 * r < 1.0) {
            return Err(Error::Invalid(format!("need 0 < s - 2 < 2r < 1, got s = {s}, r = {r}")));
        }
        Ok(Self { pieces, s, r })
    }

    pub fn zero() -> Self {
        Self { pieces: Vec::new(), s: 2.5, r: 0.3 }
    }

    pub fn eval(&self, z: [f64; 2]) -> Complex64 {
        self.pieces.iter().filter(|p| p.domain.contains(z)).map(|p| p.q.eval(z)).sum()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let pieces = self.pieces.iter().map(|p| Piece { q: p.q.scaled(c), domain: p.domain.clone() }).collect();
        Self { pieces, s: self.s, r: self.r }
    }

    /// Smallest distance from `z` to any piece boundary.
    pub fn discontinuity_distance(&self, z: [f64; 2]) -> f64 {
        self.pieces.iter().map(|p| p.domain.boundary_distance(z)).fold(f64::INFINITY, f64::min)
    }

    pub fn bbox(&self) -> Option<([f64; 2], [f64; 2])> {
        let mut it = self.pieces.iter().map(|p| p.domain.bbox());
        let first = it.next()?;
        Some(it.fold(first, |(lo, hi), (l, h)| {
            ([lo[0].min(l[0]), lo[1].min(l[1])], [hi[0].max(h[0]), hi[1].max(h[1])])
        }))
    }
}

/// Samples `V` at grid nodes; membership is decided by each subdomain predicate.
pub fn rasterize(v: &PiecewisePotential, g: &FourierGrid) -> Result<ComplexField> {
    let mut out = ComplexField::zeros(g);
    for piece in &v.pieces {
        let (lo, hi) = piece.domain.bbox();
        if !g.inner_contains_box(lo, hi) {
            return Err(Error::SupportViolation { band_max: f64::NAN, field_max: f64::NAN });
        }
        for (k, inside) in piece.domain.mask(g).into_iter().enumerate() {
            if inside {
                out.values[k] += piece.q.eval(g.node_at(k));
            }
        }
    }
    Ok(out)
}

fn weighted_l2(f: &ComplexField, weight: impl Fn(f64, f64) -> f64) -> f64 {
    let g = &f.grid;
    let n = g.n();
    let fr = g.freqs();
    let spec = f.spectrum();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let w = weight(fr[i], fr[j]);
            acc += w * w * spec[j * n + i].norm_sqr();
        }
    }
    (acc * g.cell_area() / (n * n) as f64).sqrt()
}

/// Inhomogeneous `H^r` norm with weights `(1 + |xi|^2)^{r/2}`.
pub fn hr_norm(f: &ComplexField, r: f64) -> f64 {
    weighted_l2(f, |a, b| (1.0 + a * a + b * b).powf(r / 2.0))
}

pub fn chi_hr_norm(domain: &SubDomain, r: f64, g: &FourierGrid) -> f64 {
    hr_norm(&domain.indicator(g), r)
}

/// Bessel-potential `W^{s,1}` norm `||(1 - Laplacian)^{s/2} q||_{L1}` over the grid window.
pub fn w_s1_norm(q: &ComplexField, s: f64) -> f64 {
    let lifted = q.multiplier(|a, b| Complex64::new((1.0 + a * a + b * b).powf(s / 2.0), 0.0));
    lifted.values.iter().map(|v| v.norm()).sum::<f64>() * q.grid.cell_area()
}

pub fn dsr_norm_upper(v: &PiecewisePotential, g: &FourierGrid) -> f64 {
    v.pieces
        .iter()
        .map(|p| {
            let q = ComplexField::from_fn(g, |z| p.q.eval(z));
            w_s1_norm(&q, v.s) * (1.0 + chi_hr_norm(&p.domain, v.r, g))
        })
        .sum()
}

/// C2 distance over the declared common cover; infinity when no common cover exists.
pub fn curve_distance_c2(c1: &PiecewiseBoundary, c2: &PiecewiseBoundary) -> f64 {
    if c1.segments.len() != c2.segments.len() {
        return f64::INFINITY;
    }
    let mut d: f64 = 0.0;
    for (s1, s2) in c1.segments.iter().zip(&c2.segments) {
        if s1.orientation != s2.orientation || s1.interval != s2.interval {
            return f64::INFINITY;
        }
        for p in s1.probe_params(2000) {
            let (a, b) = (s1.eval(p), s2.eval(p));
            for k in 0..3 {
                d = d.max((a[k] - b[k]).abs());
            }
        }
    }
    d
}

pub const RHOMBUS_VERTICES: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [1.0, -1.0]];

/// Rhombus with sides `l1 = (s, s)`, `l2 = (1 + s, 1 - s)`, `l3 = (2 - s, -s)`, `l4 = (1 - s, s - 1)`.
pub fn make_rhombus() -> SubDomain {
    SubDomain::polygon(&RHOMBUS_VERTICES).expect("rhombus is a valid polygon")
}

/// Perturbs one segment by `delta * bump`.
pub fn perturb_segment(b: &PiecewiseBoundary, seg: usize, bump: &CurveFn) -> Result<PiecewiseBoundary> {
    let mut segments = b.segments.clone();
    let s = segments
        .get_mut(seg)
        .ok_or_else(|| Error::Invalid(format!("no segment {seg}")))?;
    s.function = CurveFn::Sum { terms: vec![s.function.clone(), bump.clone()] };
    PiecewiseBoundary::new(segments)
}
