//! Bukhgeim complex geometrical optics fields on a periodic grid.
//!
//! ```text
//! psi_x(z) = 1/2 (z1 - x1 + i (z2 - x2))^2
//! phi_x(z) = psi + conj(psi) = (z1 - x1)^2 - (z2 - x2)^2
//! u        = exp(i lam psi) (1 + w)
//! w        = S1[V (1 + w)],   S1 = 1/4 dzbar^-1 . M^-lam . dz^-1 . M^lam
//! ```
//!
//! The inverse Wirtinger derivatives are periodic Fourier multipliers with the
//! zero mode removed. The cutoff `chi_Q` is the inner square of half the grid
//! side, which leaves a padding band of a quarter side on every edge.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, FourierGrid};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative magnitude above which a sample in the padding band counts as support.
pub const SUPPORT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseParams {
    pub lambda: f64,
    pub x: [f64; 2],
}

impl PhaseParams {
    pub fn new(lambda: f64, x: [f64; 2]) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Invalid(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self { lambda, x })
    }

    pub fn psi(&self, z: [f64; 2]) -> Complex64 {
        let d = Complex64::new(z[0] - self.x[0], z[1] - self.x[1]);
        0.5 * d * d
    }

    pub fn phi(&self, z: [f64; 2]) -> f64 {
        let (a, b) = (z[0] - self.x[0], z[1] - self.x[1]);
        a * a - b * b
    }

    /// `exp(i lam psi_x(z))`.
    pub fn cgo_factor(&self, z: [f64; 2]) -> Complex64 {
        (I * self.lambda * self.psi(z)).exp()
    }

    /// `exp(i lam conj(psi_x(z)))`.
    pub fn cgo_factor_conj(&self, z: [f64; 2]) -> Complex64 {
        (I * self.lambda * self.psi(z).conj()).exp()
    }
}

/// Largest lambda for which `exp(i lam phi_x)` stays below half the Nyquist rate
/// on a support whose farthest coordinate offset from `x` is `rho`.
pub fn resolved_lambda_max(grid: &FourierGrid, rho: f64) -> f64 {
    PI / (2.0 * grid.h() * rho)
}

/// Farthest coordinate offset between `x` and an axis-parallel box.
pub fn support_reach(x: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let r1 = (x[0] - lo[0]).abs().max((hi[0] - x[0]).abs());
    let r2 = (x[1] - lo[1]).abs().max((hi[1] - x[1]).abs());
    r1.max(r2)
}

fn check_support(f: &ComplexField) -> Result<()> {
    let g = &f.grid;
    let mut band = 0.0f64;
    let mut all = 0.0f64;
    for (k, v) in f.values.iter().enumerate() {
        let a = v.norm();
        all = all.max(a);
        if !g.in_inner(g.node_at(k)) {
            band = band.max(a);
        }
    }
    if band > SUPPORT_TOL * all {
        return Err(Error::SupportViolation { band_max: band, field_max: all });
    }
    Ok(())
}

/// Spectral `d/dz = (d1 - i d2)/2`.
pub fn dz(f: &ComplexField) -> ComplexField {
    f.multiplier(|x1, x2| 0.5 * I * Complex64::new(x1, -x2))
}

/// Spectral `d/dzbar = (d1 + i d2)/2`.
pub fn dzbar(f: &ComplexField) -> ComplexField {
    f.multiplier(|x1, x2| 0.5 * I * Complex64::new(x1, x2))
}

fn inverse_symbol(x1: f64, x2: f64, conj: bool) -> Complex64 {
    if x1 == 0.0 && x2 == 0.0 {
        return ZERO;
    }
    let d = if conj { Complex64::new(x1, x2) } else { Complex64::new(x1, -x2) };
    2.0 / (I * d)
}

fn dz_inv_unchecked(f: &ComplexField) -> ComplexField {
    f.multiplier(|x1, x2| inverse_symbol(x1, x2, false))
}

fn dzbar_inv_unchecked(f: &ComplexField) -> ComplexField {
    f.multiplier(|x1, x2| inverse_symbol(x1, x2, true))
}

/// Periodic inverse of `d/dz`; the result has zero mean.
pub fn dz_inv(f: &ComplexField) -> Result<ComplexField> {
    check_support(f)?;
    Ok(dz_inv_unchecked(f))
}

/// Periodic inverse of `d/dzbar`; the result has zero mean.
pub fn dzbar_inv(f: &ComplexField) -> Result<ComplexField> {
    check_support(f)?;
    Ok(dzbar_inv_unchecked(f))
}

/// `M^{sign lam}[F] = exp(sign i lam phi_x) chi_Q F`.
pub fn phase_mul(f: &ComplexField, p: &PhaseParams, sign: i32) -> ComplexField {
    let g = &f.grid;
    let s = if sign >= 0 { 1.0 } else { -1.0 };
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let z = g.node_at(k);
            if g.in_inner(z) {
                v * Complex64::from_polar(1.0, s * p.lambda * p.phi(z))
            } else {
                ZERO
            }
        })
        .collect();
    ComplexField { grid: g.clone(), values }
}

/// `S1[F] = 1/4 dzbar^-1 M^-lam dz^-1 M^lam F`.
pub fn s1_apply(f: &ComplexField, p: &PhaseParams) -> Result<ComplexField> {
    check_support(f)?;
    let inner = dz_inv_unchecked(&phase_mul(f, p, 1));
    let outer = dzbar_inv_unchecked(&phase_mul(&inner, p, -1));
    Ok(outer.scale(Complex64::new(0.25, 0.0)))
}

/// `S1` with the zero modes dropped by the periodic inverses added back as
/// `m (z - z_c)` and `m (zbar - zbar_c)`, so that `dz` of the inner stage and
/// `dzbar` of the result are exact inside `Q`. `exp(i lam psi)(1 + w)` then solves
/// `Delta u = V u` on `Q` rather than up to a mean residual.
pub fn s1_apply_restored(f: &ComplexField, p: &PhaseParams) -> Result<ComplexField> {
    s1_restored(f, p, false)
}

/// Complex conjugate of `s1_apply_restored` acting on `conj(F)`:
/// `1/4 dz^-1 M^lam dzbar^-1 M^-lam`, used by the conjugate-phase functional.
pub fn s1_conjugate_restored(f: &ComplexField, p: &PhaseParams) -> Result<ComplexField> {
    s1_restored(f, p, true)
}

fn s1_restored(f: &ComplexField, p: &PhaseParams, conjugate: bool) -> Result<ComplexField> {
    check_support(f)?;
    let sign = if conjugate { -1 } else { 1 };
    let inner = restored_inverse(&phase_mul(f, p, sign), conjugate);
    let outer = restored_inverse(&phase_mul(&inner, p, -sign), !conjugate);
    Ok(outer.scale(Complex64::new(0.25, 0.0)))
}

fn restored_inverse(f: &ComplexField, conj: bool) -> ComplexField {
    let g = &f.grid;
    let c = g.center();
    let m = f.mean();
    let mut out = if conj { dzbar_inv_unchecked(f) } else { dz_inv_unchecked(f) };
    for (k, v) in out.values.iter_mut().enumerate() {
        let z = g.node_at(k);
        let d = Complex64::new(z[0] - c[0], if conj { c[1] - z[1] } else { z[1] - c[1] });
        *v += m * d;
    }
    out
}

/// Adjoint of `s1_apply` in the grid L2 pairing.
pub fn s1_adjoint(f: &ComplexField, p: &PhaseParams) -> ComplexField {
    let inner = dzbar_inv_unchecked(&phase_mul(&dz_inv_unchecked(f), p, 1));
    phase_mul(&inner, p, -1).scale(Complex64::new(0.25, 0.0))
}

#[derive(Clone, Debug)]
pub struct WSolution {
    pub w: ComplexField,
    pub iterations: usize,
    pub residual: f64,
}

/// Picard iteration for `w = S1[V (1 + w)]`.
pub fn solve_w(v: &ComplexField, p: &PhaseParams, tol: f64, max_iter: usize) -> Result<WSolution> {
    picard(v, p, tol, max_iter, false)
}

/// Picard iteration for the conjugate-phase amplitude `w = conj(S1)[V (1 + w)]`.
pub fn solve_w_conjugate(v: &ComplexField, p: &PhaseParams, tol: f64, max_iter: usize) -> Result<WSolution> {
    picard(v, p, tol, max_iter, true)
}

fn picard(v: &ComplexField, p: &PhaseParams, tol: f64, max_iter: usize, conjugate: bool) -> Result<WSolution> {
    check_support(v)?;
    let one = Complex64::new(1.0, 0.0);
    let mut w = ComplexField::zeros(&v.grid);
    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    for it in 1..=max_iter.max(1) {
        let rhs = ComplexField {
            grid: v.grid.clone(),
            values: v.values.iter().zip(&w.values).map(|(&a, &b)| a * (one + b)).collect(),
        };
        let next = s1_restored(&rhs, p, conjugate)?;
        let residual = (&next - &w).l2_norm();
        if residual <= tol {
            return Ok(WSolution { w, iterations: it, residual });
        }
        if !residual.is_finite() {
            return Err(Error::NonConvergence { iterations: it, residual });
        }
        if residual < best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 8 {
                return Err(Error::NonConvergence { iterations: it, residual });
            }
        }
        w = next;
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: best })
}

/// `(lam/pi) * sum h^2 exp(i lam phi_x) F w` over the grid.
pub fn t_w_lambda(f: &ComplexField, w: &ComplexField, p: &PhaseParams) -> Complex64 {
    assert_eq!(f.grid, w.grid, "fields live on different grids");
    let g = &f.grid;
    let mut acc = ZERO;
    for (k, (&a, &b)) in f.values.iter().zip(&w.values).enumerate() {
        if a == ZERO || b == ZERO {
            continue;
        }
        acc += a * b * Complex64::from_polar(1.0, p.lambda * p.phi(g.node_at(k)));
    }
    acc * g.cell_area() * p.lambda / PI
}

/// Homogeneous Sobolev weight `|xi|^s`; the zero mode gets weight 0 except at `s = 0`.
pub fn hs_weight(x1: f64, x2: f64, s: f64) -> f64 {
    let r = x1.hypot(x2);
    if r == 0.0 {
        if s == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        r.powf(s)
    }
}

/// Discrete `||F||_{H^s}` (homogeneous) via FFT weights `|xi|^s`.
pub fn hs_norm(f: &ComplexField, s: f64) -> f64 {
    let g = &f.grid;
    let n = g.n();
    let fr = g.freqs();
    let spec = f.spectrum();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let w = hs_weight(fr[i], fr[j], s);
            acc += w * w * spec[j * n + i].norm_sqr();
        }
    }
    (acc * g.cell_area() / (n * n) as f64).sqrt()
}

/// Applies the homogeneous multiplier `|xi|^s` (zero mode dropped for `s != 0`).
pub fn hs_apply(f: &ComplexField, s: f64) -> ComplexField {
    f.multiplier(|a, b| Complex64::new(hs_weight(a, b, s), 0.0))
}
