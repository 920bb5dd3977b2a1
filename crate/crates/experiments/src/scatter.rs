//! Far-field data, its weighted norm and the Born-regime check.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use bukhgeim::domain::{rasterize, SmoothFn};
use bukhgeim::scattering::{k_norm, unit, FarFieldData, KNorm, LsOperator};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::output::Output;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BornRow {
    pub eps: f64,
    pub re: f64,
    pub im: f64,
    /// `|A_{eps V} / eps - V^(k (eta - theta))| / |V^|`.
    pub rel_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatterReport {
    pub k: f64,
    pub n_eta: usize,
    pub n_theta: usize,
    pub k_norm: KNorm,
    pub consistency_error: f64,
    pub ls_residual: f64,
    pub ls_iterations: usize,
    pub born: Vec<BornRow>,
    /// Consecutive error ratios under halving of `eps`.
    pub born_ratios: Vec<f64>,
}

/// `int e^{-i xi.y} a e^{-|y - c|^2 / (2 sigma^2)} dy`.
pub fn gaussian_transform(amplitude: Complex64, center: [f64; 2], sigma: f64, xi: [f64; 2]) -> Complex64 {
    let q = xi[0] * xi[0] + xi[1] * xi[1];
    amplitude * 2.0 * PI * sigma * sigma * (-0.5 * sigma * sigma * q).exp()
        * Complex64::from_polar(1.0, -(xi[0] * center[0] + xi[1] * center[1]))
}

pub fn run_scatter(cfg: &ExperimentConfig, out: Option<&Output>) -> Result<ScatterReport> {
    let p = cfg.scatter.clone().unwrap_or_default();
    let spec = cfg.potential_spec()?;
    let v = spec.build()?;
    let grid = cfg.grid.build()?;
    let field = rasterize(&v, &grid)?;

    let data = FarFieldData::compute(&field, p.k, p.n_eta, p.n_theta)?;
    let norm = k_norm(&data, p.cutoff)?;
    let op = LsOperator::new(&field, p.k)?;
    let sol = op.solve(unit(p.born_theta))?;

    let mut born = Vec::new();
    if !p.born_eps.is_empty() {
        let [piece] = spec.pieces.as_slice() else { bail!("the Born check needs a single Gaussian piece") };
        let SmoothFn::GaussianBump { amplitude, center, sigma } = &piece.q else {
            bail!("the Born check needs a single Gaussian piece")
        };
        let (eta, theta) = (unit(p.born_eta), unit(p.born_theta));
        let xi = [p.k * (eta[0] - theta[0]), p.k * (eta[1] - theta[1])];
        let exact = gaussian_transform(Complex64::new(amplitude[0], amplitude[1]), *center, *sigma, xi);
        for &eps in &p.born_eps {
            let scaled = field.scale(Complex64::new(eps, 0.0));
            let op = LsOperator::new(&scaled, p.k)?;
            let a = op.amplitude(&op.solve(theta)?.u, eta);
            born.push(BornRow { eps, re: a.re, im: a.im, rel_error: (a / eps - exact).norm() / exact.norm() });
        }
    }
    let born_ratios = born.windows(2).map(|w| w[0].rel_error / w[1].rel_error).collect();
    let report = ScatterReport {
        k: p.k,
        n_eta: p.n_eta,
        n_theta: p.n_theta,
        k_norm: norm,
        consistency_error: data.consistency_error(),
        ls_residual: sol.residual,
        ls_iterations: sol.iterations,
        born,
        born_ratios,
    };
    if let Some(out) = out {
        data.save(&out.path("far_field.bin"))?;
        out.text("far_field.csv", &data.samples_csv())?;
        out.csv("born.csv", &report.born)?;
        out.json("scatter.json", &report)?;
    }
    Ok(report)
}
