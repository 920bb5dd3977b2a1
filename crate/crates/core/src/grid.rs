//! Uniform periodic grids on an axis-parallel square and complex samples on them.
//!
//! Node `(i, j)` sits at `center - side/2 + (i, j) * h` with `h = side / n`, so the
//! center of the square is itself a node. Storage is row-major with `z1` varying
//! fastest: `index = j * n + i`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct FourierGrid {
    n: usize,
    side: f64,
    center: [f64; 2],
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid")
            .field("n", &self.n)
            .field("side", &self.side)
            .field("center", &self.center)
            .finish()
    }
}

impl PartialEq for FourierGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.side == other.side && self.center == other.center
    }
}

impl FourierGrid {
    pub fn new(n: usize, side: f64, center: [f64; 2]) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Invalid(format!("n_per_side = {n} is not a power of two >= 4")));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::Invalid(format!("side_len = {side} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self { n, side, center, fwd, inv })
    }

    /// Smallest grid whose inner square (side/2) contains the box `[lo, hi]`.
    pub fn enclosing(n: usize, lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        let w = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let c = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        Self::new(n, 2.0 * w, c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn h(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.side / 2.0 + i as f64 * self.h()
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.center[0] + self.coord(i), self.center[1] + self.coord(j)]
    }

    pub fn node_at(&self, idx: usize) -> [f64; 2] {
        self.node(idx % self.n, idx / self.n)
    }

    /// Half side of the cutoff square Q (the inner square left after the padding band).
    pub fn inner_half(&self) -> f64 {
        self.side / 4.0
    }

    /// Membership in the closed cutoff square Q.
    pub fn in_inner(&self, z: [f64; 2]) -> bool {
        let r = self.inner_half() * (1.0 + 1e-12);
        (z[0] - self.center[0]).abs() <= r && (z[1] - self.center[1]).abs() <= r
    }

    /// True when the box `[lo, hi]` lies in Q up to a tolerance of one cell.
    pub fn inner_contains_box(&self, lo: [f64; 2], hi: [f64; 2]) -> bool {
        let r = self.inner_half() + self.h();
        lo[0] >= self.center[0] - r
            && lo[1] >= self.center[1] - r
            && hi[0] <= self.center[0] + r
            && hi[1] <= self.center[1] + r
    }

    /// Angular frequency of FFT bin `k`; bin `n/2` maps to the negative Nyquist frequency.
    pub fn freq(&self, k: usize) -> f64 {
        let n = self.n as isize;
        let kk = if (k as isize) < n / 2 { k as isize } else { k as isize - n };
        2.0 * PI * kk as f64 / self.side
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.freq(k)).collect()
    }

    /// In-place 2D DFT (unnormalised forward, `1/n^2`-normalised inverse).
    pub fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        let mut t = vec![Complex64::new(0.0, 0.0); n * n];
        transpose(data, &mut t, n);
        plan.process_with_scratch(&mut t, &mut scratch);
        transpose(&t, data, n);
        if inverse {
            let s = 1.0 / (n * n) as f64;
            data.iter_mut().for_each(|v| *v *= s);
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for jb in (0..n).step_by(B) {
        for ib in (0..n).step_by(B) {
            for j in jb..(jb + B).min(n) {
                for i in ib..(ib + B).min(n) {
                    dst[i * n + j] = src[j * n + i];
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComplexField {
    pub grid: FourierGrid,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &FourierGrid) -> Self {
        Self { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: &FourierGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Invalid(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Invalid("field contains non-finite values".into()));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &FourierGrid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.node_at(k))).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn from_real_fn(grid: &FourierGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(grid, |z| Complex64::new(f(z), 0.0))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Trapezoid (equivalently midpoint) rule over the whole periodic grid.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut s = self.values.clone();
        self.grid.fft2(&mut s, false);
        s
    }

    pub fn from_spectrum(grid: &FourierGrid, mut spec: Vec<Complex64>) -> Self {
        grid.fft2(&mut spec, true);
        Self { grid: grid.clone(), values: spec }
    }

    /// Applies a Fourier multiplier `m(xi1, xi2)`.
    pub fn multiplier(&self, m: impl Fn(f64, f64) -> Complex64) -> Self {
        let g = &self.grid;
        let n = g.n();
        let fr = g.freqs();
        let mut s = self.spectrum();
        for j in 0..n {
            for i in 0..n {
                s[j * n + i] *= m(fr[i], fr[j]);
            }
        }
        Self::from_spectrum(g, s)
    }

    /// Bilinear interpolation, periodic in both directions.
    pub fn interpolate(&self, z: [f64; 2]) -> Complex64 {
        let g = &self.grid;
        let n = g.n();
        let h = g.h();
        let u = (z[0] - g.center()[0] + g.side() / 2.0) / h;
        let v = (z[1] - g.center()[1] + g.side() / 2.0) / h;
        let (i0, fu) = (u.floor(), u - u.floor());
        let (j0, fv) = (v.floor(), v - v.floor());
        let wrap = |k: f64| (k as i64).rem_euclid(n as i64) as usize;
        let (i0, i1) = (wrap(i0), wrap(i0 + 1.0));
        let (j0, j1) = (wrap(j0), wrap(j0 + 1.0));
        let a = self.values[j0 * n + i0];
        let b = self.values[j0 * n + i1];
        let c = self.values[j1 * n + i0];
        let d = self.values[j1 * n + i1];
        a * ((1.0 - fu) * (1.0 - fv)) + b * (fu * (1.0 - fv)) + c * ((1.0 - fu) * fv) + d * (fu * fv)
    }

    fn zip(&self, o: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, o.grid, "fields live on different grids");
        let values = self.values.iter().zip(&o.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), values }
    }
}

impl Add for &ComplexField {
    type Output = ComplexField;
    fn add(self, o: &ComplexField) -> ComplexField {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for &ComplexField {
    type Output = ComplexField;
    fn sub(self, o: &ComplexField) -> ComplexField {
        self.zip(o, |a, b| a - b)
    }
}

impl Mul for &ComplexField {
    type Output = ComplexField;
    fn mul(self, o: &ComplexField) -> ComplexField {
        self.zip(o, |a, b| a * b)
    }
}
