//! Fixed-energy scattering: the Lippmann-Schwinger equation
//!
//! ```text
//! u(x, theta) = exp(i k x.theta) - int G0(x, y) V(y) u(y, theta) dy,   G0 = (i/4) H0(k |x - y|)
//! A_V(eta, theta) = int exp(-i k eta.y) V(y) u(y, theta) dy
//! ```
//!
//! discretized by Nystrom on the Fourier grid, the convolution applied through a
//! zero-padded FFT and the system solved by restarted GMRES.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexField, FourierGrid};
use crate::persist::{read_blob, write_blob};
use crate::quad::gauss_legendre;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const HANKEL_CROSSOVER: f64 = 8.0;
pub const DEFAULT_K_CUTOFF: usize = 32;

/// `H0^(1)(x) = J0(x) + i Y0(x)` for `x > 0`.
pub fn hankel0(x: f64) -> Complex64 {
    if x < HANKEL_CROSSOVER {
        hankel0_series(x)
    } else {
        hankel0_asymptotic(x)
    }
}

fn hankel0_series(x: f64) -> Complex64 {
    let q = 0.25 * x * x;
    let (mut j0, mut ysum) = (0.0, 0.0);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    for m in 0..200 {
        if m > 0 {
            term *= -q / (m * m) as f64;
            harmonic += 1.0 / m as f64;
        }
        j0 += term;
        ysum -= harmonic * term;
        if m > 2 && term.abs() < 1e-18 * j0.abs().max(1e-300) {
            break;
        }
    }
    let y0 = (2.0 / PI) * (((0.5 * x).ln() + EULER_GAMMA) * j0 + ysum);
    Complex64::new(j0, y0)
}

/// Hankel expansion truncated at its smallest term.
fn hankel0_asymptotic(x: f64) -> Complex64 {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = 1.0;
    for k in 1..100 {
        let f = -((2 * k - 1) as f64).powi(2) / (8.0 * k as f64 * x);
        let next = term * I * f;
        if next.norm() >= last {
            break;
        }
        last = next.norm();
        term = next;
        sum += term;
    }
    (2.0 / (PI * x)).sqrt() * Complex64::from_polar(1.0, x - 0.25 * PI) * sum
}

/// Outgoing fundamental solution of `-Delta - k^2`.
pub fn green0(dist: f64, k: f64) -> Result<Complex64> {
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(Error::DomainError(format!("green0 needs a positive distance, got {dist}")));
    }
    if !(k > 0.0) {
        return Err(Error::DomainError(format!("wave number must be positive, got {k}")));
    }
    Ok(0.25 * I * hankel0(k * dist))
}

/// `int_{[-h/2,h/2]^2} G0(|y|) dy` in polar coordinates over the eight triangles.
fn self_cell(h: f64, k: f64) -> Complex64 {
    let (x, w) = gauss_legendre(24);
    let mut acc = ZERO;
    for a in 0..24 {
        let t = 0.125 * PI * (x[a] + 1.0);
        let rmax = 0.5 * h / t.cos();
        for b in 0..24 {
            let r = 0.5 * rmax * (x[b] + 1.0);
            acc += 0.25 * I * hankel0(k * r) * r * (0.5 * rmax * w[b]) * (0.125 * PI * w[a]);
        }
    }
    acc * 8.0
}

/// Nystrom operator `u -> u + K[V u]` on a Fourier grid.
pub struct LsOperator {
    pub grid: FourierGrid,
    pub k: f64,
    pub potential: ComplexField,
    pad: FourierGrid,
    kernel_hat: Vec<Complex64>,
}

impl LsOperator {
    pub fn new(v: &ComplexField, k: f64) -> Result<Self> {
        if !(k > 0.0) {
            return Err(Error::DomainError(format!("wave number must be positive, got {k}")));
        }
        let g = &v.grid;
        let all = v.max_abs();
        let band = (0..g.len()).filter(|&i| !g.in_inner(g.node_at(i))).map(|i| v.values[i].norm()).fold(0.0, f64::max);
        if band > 0.0 {
            return Err(Error::SupportViolation { band_max: band, field_max: all });
        }
        let n = g.n();
        let m = 2 * n;
        let h = g.h();
        let pad = FourierGrid::new(m, 2.0 * g.side(), [0.0, 0.0])?;
        let mut kernel = vec![ZERO; m * m];
        let diag = self_cell(h, k);
        for b in 0..m {
            let dj = if b < n { b as f64 } else { b as f64 - m as f64 };
            for a in 0..m {
                let di = if a < n { a as f64 } else { a as f64 - m as f64 };
                kernel[b * m + a] = if a == 0 && b == 0 { diag } else { h * h * 0.25 * I * hankel0(k * h * di.hypot(dj)) };
            }
        }
        pad.fft2(&mut kernel, false);
        Ok(Self { grid: g.clone(), k, potential: v.clone(), pad, kernel_hat: kernel })
    }

    /// `K[f]_i = sum_j W_ij f_j` (aperiodic convolution).
    pub fn convolve(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let m = 2 * n;
        let mut buf = vec![ZERO; m * m];
        for j in 0..n {
            buf[j * m..j * m + n].copy_from_slice(&f[j * n..(j + 1) * n]);
        }
        self.pad.fft2(&mut buf, false);
        for (a, b) in buf.iter_mut().zip(&self.kernel_hat) {
            *a *= b;
        }
        self.pad.fft2(&mut buf, true);
        let mut out = vec![ZERO; n * n];
        for j in 0..n {
            out[j * n..(j + 1) * n].copy_from_slice(&buf[j * m..j * m + n]);
        }
        out
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let vu: Vec<Complex64> = u.iter().zip(&self.potential.values).map(|(a, b)| a * b).collect();
        let k = self.convolve(&vu);
        u.iter().zip(k).map(|(a, b)| a + b).collect()
    }

    pub fn plane_wave(&self, theta: [f64; 2]) -> Vec<Complex64> {
        (0..self.grid.len())
            .map(|i| {
                let z = self.grid.node_at(i);
                Complex64::from_polar(1.0, self.k * (z[0] * theta[0] + z[1] * theta[1]))
            })
            .collect()
    }

    pub fn solve(&self, theta: [f64; 2]) -> Result<LsSolution> {
        let rhs = self.plane_wave(theta);
        let (u, iterations, cond) = gmres(&|x| self.apply(x), &rhs, 1e-12, 60, 40)?;
        let residual = rel_residual(&self.apply(&u), &rhs);
        if !(residual <= 1e-8) {
            return Err(Error::NearSingular { cond });
        }
        Ok(LsSolution { u: ComplexField { grid: self.grid.clone(), values: u }, iterations, residual })
    }

    pub fn amplitude(&self, u: &ComplexField, eta: [f64; 2]) -> Complex64 {
        let g = &self.grid;
        let mut acc = ZERO;
        for (i, (&v, &w)) in self.potential.values.iter().zip(&u.values).enumerate() {
            if v == ZERO {
                continue;
            }
            let z = g.node_at(i);
            acc += Complex64::from_polar(1.0, -self.k * (eta[0] * z[0] + eta[1] * z[1])) * v * w;
        }
        acc * g.cell_area()
    }
}

fn rel_residual(au: &[Complex64], rhs: &[Complex64]) -> f64 {
    let r: f64 = au.iter().zip(rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let b: f64 = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    r / b
}

#[derive(Clone, Debug)]
pub struct LsSolution {
    pub u: ComplexField,
    pub iterations: usize,
    /// `||u + K[V u] - u_inc|| / ||u_inc||`.
    pub residual: f64,
}

/// Restarted GMRES with modified Gram-Schmidt. Returns the solution, the total
/// iteration count and an estimate of the condition number from the last Hessenberg.
fn gmres(
    op: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    tol: f64,
    restart: usize,
    max_cycles: usize,
) -> Result<(Vec<Complex64>, usize, f64)> {
    let n = b.len();
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 { x.iter().zip(y).map(|(a, c)| a.conj() * c).sum() };
    let nrm = |x: &[Complex64]| dot(x, x).re.sqrt();
    let bnorm = nrm(b);
    let mut x = vec![ZERO; n];
    if bnorm == 0.0 {
        return Ok((x, 0, 1.0));
    }
    let mut total = 0;
    let mut cond = 1.0;
    for _ in 0..max_cycles {
        let ax = op(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = nrm(&r);
        if beta <= tol * bnorm {
            return Ok((x, total, cond));
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<(Complex64, Complex64)> = Vec::new();
        let mut g = vec![Complex64::new(beta, 0.0)];
        let mut hmax: f64 = 0.0;
        let mut hmin = f64::INFINITY;
        for j in 0..restart {
            total += 1;
            let mut w = op(&basis[j]);
            let mut col = vec![ZERO; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                col[i] = hij;
                for (a, c) in w.iter_mut().zip(v) {
                    *a -= hij * c;
                }
            }
            let hn = nrm(&w);
            col[j + 1] = Complex64::new(hn, 0.0);
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a, d) = (col[i], col[i + 1]);
                col[i] = c.conj() * a + s.conj() * d;
                col[i + 1] = -s * a + c * d;
            }
            let (a, d) = (col[j], col[j + 1]);
            let rho = (a.norm_sqr() + d.norm_sqr()).sqrt();
            let (c, s) = if rho == 0.0 { (Complex64::new(1.0, 0.0), ZERO) } else { (a / rho, d / rho) };
            col[j] = Complex64::new(rho, 0.0);
            col[j + 1] = ZERO;
            let gj = g[j];
            g[j] = c.conj() * gj;
            g.push(-s * gj);
            cs.push((c, s));
            hmax = hmax.max(rho);
            hmin = hmin.min(rho);
            hess.push(col);
            let done = g[j + 1].norm() <= tol * bnorm || hn == 0.0;
            if !done {
                basis.push(w.iter().map(|v| v / hn).collect());
            }
            if done || j + 1 == restart {
                let m = hess.len();
                let mut y = vec![ZERO; m];
                for i in (0..m).rev() {
                    let mut s = g[i];
                    for l in i + 1..m {
                        s -= hess[l][i] * y[l];
                    }
                    y[i] = s / hess[i][i];
                }
                for (l, yl) in y.iter().enumerate() {
                    for (a, v) in x.iter_mut().zip(&basis[l]) {
                        *a += yl * v;
                    }
                }
                cond = hmax / hmin;
                break;
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NearSingular { cond: f64::INFINITY });
        }
    }
    let ax = op(&x);
    if rel_residual(&ax, b) <= tol.max(1e-10) {
        Ok((x, total, cond))
    } else {
        Err(Error::NearSingular { cond })
    }
}

pub fn solve_lippmann_schwinger(v: &ComplexField, k: f64, theta: [f64; 2]) -> Result<LsSolution> {
    LsOperator::new(v, k)?.solve(theta)
}

pub fn far_field(v: &ComplexField, k: f64, eta: [f64; 2], theta: [f64; 2]) -> Result<Complex64> {
    let op = LsOperator::new(v, k)?;
    let sol = op.solve(theta)?;
    Ok(op.amplitude(&sol.u, eta))
}

pub fn unit(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FarFieldData {
    pub k: f64,
    pub n_eta: usize,
    pub n_theta: usize,
    /// Row-major `A(eta_i, theta_j)`, `eta_i = 2 pi i / n_eta`.
    pub samples: Vec<Complex64>,
    /// Row-major `a^(n,m)` in FFT ordering.
    pub coeffs: Vec<Complex64>,
}

fn check_size(n: usize) -> Result<()> {
    if n < 64 || !n.is_power_of_two() {
        return Err(Error::Invalid(format!("angle grid size {n} must be a power of two >= 64")));
    }
    Ok(())
}

fn dft2(data: &mut [Complex64], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (fr, fc) = if inverse {
        (planner.plan_fft_inverse(cols), planner.plan_fft_inverse(rows))
    } else {
        (planner.plan_fft_forward(cols), planner.plan_fft_forward(rows))
    };
    for r in data.chunks_exact_mut(cols) {
        fr.process(r);
    }
    let mut col = vec![ZERO; rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = data[r * cols + c];
        }
        fc.process(&mut col);
        for r in 0..rows {
            data[r * cols + c] = col[r];
        }
    }
}

impl FarFieldData {
    /// `a^(n,m) = 1/(N_eta N_theta) sum A(eta_i, theta_j) exp(-i n eta_i - i m theta_j)`.
    pub fn from_samples(k: f64, n_eta: usize, n_theta: usize, samples: Vec<Complex64>) -> Result<Self> {
        check_size(n_eta)?;
        check_size(n_theta)?;
        if samples.len() != n_eta * n_theta {
            return Err(Error::Invalid("sample count does not match the angle grid".into()));
        }
        let mut coeffs = samples.clone();
        dft2(&mut coeffs, n_eta, n_theta, false);
        let s = 1.0 / (n_eta * n_theta) as f64;
        coeffs.iter_mut().for_each(|c| *c *= s);
        Ok(Self { k, n_eta, n_theta, samples, coeffs })
    }

    pub fn from_coeffs(k: f64, n_eta: usize, n_theta: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        check_size(n_eta)?;
        check_size(n_theta)?;
        if coeffs.len() != n_eta * n_theta {
            return Err(Error::Invalid("coefficient count does not match the angle grid".into()));
        }
        let mut samples = coeffs.clone();
        dft2(&mut samples, n_eta, n_theta, true);
        Ok(Self { k, n_eta, n_theta, samples, coeffs })
    }

    /// Solves one Lippmann-Schwinger problem per incident direction. `V` must be
    /// supported in the closed unit disk.
    pub fn compute(v: &ComplexField, k: f64, n_eta: usize, n_theta: usize) -> Result<Self> {
        check_size(n_eta)?;
        check_size(n_theta)?;
        let g = &v.grid;
        for (i, val) in v.values.iter().enumerate() {
            let z = g.node_at(i);
            if *val != ZERO && z[0].hypot(z[1]) > 1.0 + 1e-12 {
                return Err(Error::DomainError("far-field norm needs a potential supported in the unit disk".into()));
            }
        }
        let op = LsOperator::new(v, k)?;
        let mut samples = vec![ZERO; n_eta * n_theta];
        for j in 0..n_theta {
            let sol = op.solve(unit(2.0 * PI * j as f64 / n_theta as f64))?;
            for i in 0..n_eta {
                samples[i * n_theta + j] = op.amplitude(&sol.u, unit(2.0 * PI * i as f64 / n_eta as f64));
            }
        }
        Self::from_samples(k, n_eta, n_theta, samples)
    }

    pub fn signed(index: usize, n: usize) -> i64 {
        if index < n / 2 {
            index as i64
        } else {
            index as i64 - n as i64
        }
    }

    pub fn coeff(&self, n: i64, m: i64) -> Complex64 {
        let i = n.rem_euclid(self.n_eta as i64) as usize;
        let j = m.rem_euclid(self.n_theta as i64) as usize;
        self.coeffs[i * self.n_theta + j]
    }

    /// Largest difference between the samples and the inverse transform of the coefficients.
    pub fn consistency_error(&self) -> f64 {
        let mut back = self.coeffs.clone();
        dft2(&mut back, self.n_eta, self.n_theta, true);
        back.iter().zip(&self.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let head = FarFieldHeader { k: self.k, n_eta: self.n_eta, n_theta: self.n_theta };
        write_blob(path, &head, self.coeffs.iter().copied())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (h, coeffs): (FarFieldHeader, _) = read_blob(path)?;
        Self::from_coeffs(h.k, h.n_eta, h.n_theta, coeffs)
    }

    pub fn samples_csv(&self) -> String {
        let mut s = String::from("eta,theta,re,im\n");
        for i in 0..self.n_eta {
            for j in 0..self.n_theta {
                let a = self.samples[i * self.n_theta + j];
                let eta = 2.0 * PI * i as f64 / self.n_eta as f64;
                let th = 2.0 * PI * j as f64 / self.n_theta as f64;
                s.push_str(&format!("{eta},{th},{},{}\n", a.re, a.im));
            }
        }
        s
    }
}

#[derive(Serialize, Deserialize)]
struct FarFieldHeader {
    k: f64,
    n_eta: usize,
    n_theta: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KNorm {
    pub norm: f64,
    /// Unweighted l2 magnitude of the coefficients with `|n|` or `|m|` above the cutoff.
    pub tail: f64,
}

/// `((3 + 3|n|)/k)^{2|n|}`.
pub fn k_weight(n: i64, k: f64) -> f64 {
    let a = n.unsigned_abs() as f64;
    ((3.0 + 3.0 * a) / k).powf(2.0 * a)
}

pub fn k_norm(f: &FarFieldData, cutoff: usize) -> Result<KNorm> {
    let nyquist = f.n_eta.min(f.n_theta) / 2;
    if cutoff > nyquist {
        return Err(Error::CutoffExceedsNyquist { cutoff, nyquist });
    }
    let c = cutoff as i64;
    let (mut acc, mut tail) = (0.0, 0.0);
    for i in 0..f.n_eta {
        let n = FarFieldData::signed(i, f.n_eta);
        for j in 0..f.n_theta {
            let m = FarFieldData::signed(j, f.n_theta);
            let a2 = f.coeffs[i * f.n_theta + j].norm_sqr();
            if n.abs() <= c && m.abs() <= c {
                acc += k_weight(n, f.k) * k_weight(m, f.k) * a2;
            } else {
                tail += a2;
            }
        }
    }
    Ok(KNorm { norm: acc.sqrt(), tail: tail.sqrt() })
}
