//! Rhombus counterexample: recovery fails at points whose phase is flat along a side.

use std::f64::consts::{PI, SQRT_2};

use anyhow::{bail, Result};
use bukhgeim::cgo::PhaseParams;
use bukhgeim::domain::{rasterize, RHOMBUS_VERTICES};
use bukhgeim::quad::composite_gl;
use bukhgeim::recon::{lambda_sweep_with, tail_mean};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::description::DomainSpec;
use crate::output::Output;

/// Number of largest-lambda samples averaged into a limit.
pub const TAIL: usize = 3;
const ORACLE_ORDER: usize = 20;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub lambda: f64,
    pub re: f64,
    pub im: f64,
    pub oracle_re: f64,
    pub oracle_im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TReport {
    pub t: f64,
    /// Largest deviation of the four side phases from their closed forms.
    pub side_phase_error: f64,
    pub line_integral: f64,
    pub line_integral_exact: f64,
    pub limit: [f64; 2],
    pub dispersion: f64,
    pub oracle_limit: [f64; 2],
    /// `|limit - oracle| / |oracle|`.
    pub oracle_rel_error: f64,
    /// `Im(limit) / ln(1 + 1/t)`.
    pub log_ratio: f64,
    /// Limit at the off-diagonal point `(-t sqrt 2, 0)`, where the truth is also 0.
    pub off_diagonal_limit: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub lambdas: Vec<f64>,
    pub per_t: Vec<TReport>,
    /// Mean of `log_ratio` over `t`.
    pub constant: f64,
    /// `max / min - 1` of `log_ratio` over `t`.
    pub ratio_spread: f64,
    pub candidate_jacobian: f64,
    pub candidate_printed: f64,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
}

/// `phi_x` along the four sides minus its closed form, maximized over `s`.
pub fn side_phase_error(t: f64) -> Result<f64> {
    let p = PhaseParams::new(1.0, [-t, -t])?;
    let mut err: f64 = 0.0;
    for k in 0..=64 {
        let s = k as f64 / 64.0;
        let sides: [([f64; 2], f64); 4] = [
            ([s, s], 0.0),
            ([1.0 + s, 1.0 - s], 4.0 * s * (t + 1.0)),
            ([2.0 - s, -s], 4.0 * (t - s + 1.0)),
            ([1.0 - s, s - 1.0], 4.0 * t * (1.0 - s)),
        ];
        for (z, exact) in sides {
            err = err.max((p.phi(z) - exact).abs());
        }
    }
    Ok(err)
}

/// `int_0^1 -sqrt 2 / (4 (s + t)) ds` by Gauss-Legendre and in closed form.
pub fn line_integral(t: f64) -> (f64, f64) {
    let (x, w) = composite_gl(0.0, 1.0, 8, ORACLE_ORDER);
    let q = x.iter().zip(&w).map(|(s, w)| -w * SQRT_2 / (4.0 * (s + t))).sum();
    (q, SQRT_2 / 4.0 * (t.ln() - (t + 1.0).ln()))
}

/// `(lam/pi) int_rhombus exp(i lam phi_x) dz` at `x = (-t, -t)` by tensor Gauss-Legendre
/// in the coordinates `z = (u + v, u - v)`, where `phi_x = 4 v (u + t)`.
pub fn rhombus_oracle(t: f64, lambda: f64, panels_per_lambda: f64) -> Complex64 {
    let panels = ((panels_per_lambda * lambda).ceil() as usize).max(8);
    let (nodes, weights) = composite_gl(0.0, 1.0, panels, ORACLE_ORDER);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&u, &wu) in nodes.iter().zip(&weights) {
        for (&v, &wv) in nodes.iter().zip(&weights) {
            acc += Complex64::from_polar(wu * wv, 4.0 * lambda * v * (u + t));
        }
    }
    2.0 * acc * lambda / PI
}

/// Large-lambda limit `(i / 2 pi) ln(1 + 1/t)` of the oracle.
pub fn rhombus_limit(t: f64) -> Complex64 {
    Complex64::new(0.0, (1.0 + 1.0 / t).ln() / (2.0 * PI))
}

pub fn run_counterexample(cfg: &ExperimentConfig, out: Option<&Output>) -> Result<CounterexampleReport> {
    let params = cfg.counterexample.clone().unwrap_or_default();
    let spec = cfg.potential_spec()?;
    let is_rhombus = spec.pieces.len() == 1
        && match &spec.pieces[0].domain {
            DomainSpec::Rhombus => true,
            DomainSpec::Polygon { vertices } => vertices == &RHOMBUS_VERTICES.to_vec(),
            _ => false,
        };
    if !is_rhombus {
        bail!("counterexample needs the rhombus domain");
    }
    if params.t_values.iter().any(|t| !(*t > 0.0 && *t < 2.0)) {
        bail!("t values must lie in (0, 2)");
    }
    if cfg.lambdas.len() < TAIL {
        bail!("counterexample needs at least {TAIL} lambdas");
    }
    let v = spec.build()?;
    let grid = cfg.grid.build()?;
    let field = rasterize(&v, &grid)?;
    let tol = &cfg.tolerances;

    let mut points = Vec::new();
    for &t in &params.t_values {
        points.push((t, [-t, -t]));
        points.push((t, [-t * SQRT_2, 0.0]));
    }
    let sweeps = points
        .par_iter()
        .map(|&(_, x)| {
            lambda_sweep_with(&field, x, &cfg.lambdas, Complex64::new(0.0, 0.0), None, tol.picard_tol, tol.picard_max_iter)
        })
        .collect::<bukhgeim::Result<Vec<_>>>()?;
    for s in &sweeps {
        if let Some((l, e)) = s.failures.first() {
            bail!("Picard iteration failed at lambda {l}: {e}");
        }
    }

    let mut rows = Vec::new();
    let mut per_t = Vec::new();
    for (k, &t) in params.t_values.iter().enumerate() {
        let diag = &sweeps[2 * k];
        let off = &sweeps[2 * k + 1];
        let oracle: Vec<Complex64> =
            cfg.lambdas.par_iter().map(|&l| rhombus_oracle(t, l, params.oracle_panels_per_lambda)).collect();
        for (sample, o) in diag.samples.iter().flatten().zip(&oracle) {
            rows.push(SweepRow {
                t,
                x1: sample.x[0],
                x2: sample.x[1],
                lambda: sample.lambda,
                re: sample.value_interior.re,
                im: sample.value_interior.im,
                oracle_re: o.re,
                oracle_im: o.im,
            });
        }
        for sample in off.samples.iter().flatten() {
            rows.push(SweepRow {
                t,
                x1: sample.x[0],
                x2: sample.x[1],
                lambda: sample.lambda,
                re: sample.value_interior.re,
                im: sample.value_interior.im,
                oracle_re: f64::NAN,
                oracle_im: f64::NAN,
            });
        }
        let limit = diag.limit.expect("sweep has samples");
        let oracle_limit = tail_mean(&oracle, TAIL).0.expect("oracle has samples");
        let off_limit = off.limit.expect("sweep has samples");
        let (q, exact) = line_integral(t);
        per_t.push(TReport {
            t,
            side_phase_error: side_phase_error(t)?,
            line_integral: q,
            line_integral_exact: exact,
            limit: [limit.re, limit.im],
            dispersion: diag.dispersion.unwrap_or(0.0),
            oracle_limit: [oracle_limit.re, oracle_limit.im],
            oracle_rel_error: (limit - oracle_limit).norm() / oracle_limit.norm(),
            log_ratio: limit.im / (1.0 + 1.0 / t).ln(),
            off_diagonal_limit: [off_limit.re, off_limit.im],
        });
    }
    let ratios: Vec<f64> = per_t.iter().map(|r| r.log_ratio).collect();
    let constant = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let report = CounterexampleReport {
        lambdas: cfg.lambdas.clone(),
        per_t,
        constant,
        ratio_spread: max / min - 1.0,
        candidate_jacobian: 1.0 / (2.0 * PI),
        candidate_printed: SQRT_2 / (4.0 * PI),
        rows,
    };
    if let Some(out) = out {
        out.csv("counterexample_sweep.csv", &report.rows)?;
        out.json("counterexample.json", &report)?;
    }
    Ok(report)
}
