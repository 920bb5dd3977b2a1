//! Reconstruction error against lambda at probe points, by both routes.

use anyhow::{bail, Result};
use bukhgeim::cgo::{resolved_lambda_max, support_reach};
use bukhgeim::domain::rasterize;
use bukhgeim::recon::{lambda_sweep_with, tail_mean, BoundaryRoute, ErrorWeightMap, Exclusion, EXCLUSION_CELLS};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{dtn_for, DtnCache};
use crate::config::ExperimentConfig;
use crate::counterexample::TAIL;
use crate::description::PotentialSpec;
use crate::fit::loglog_fit;
use crate::output::Output;

/// Margin added to the rate budget `-(s/2 - 1)` before a slope is flagged.
pub const SLOPE_MARGIN: f64 = 0.15;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub x1: f64,
    pub x2: f64,
    pub lambda: f64,
    pub boundary_re: Option<f64>,
    pub boundary_im: Option<f64>,
    pub interior_re: f64,
    pub interior_im: f64,
    pub truth_re: f64,
    pub truth_im: f64,
    pub error_interior: f64,
    pub error_boundary: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointReport {
    pub x: [f64; 2],
    pub excluded: Option<Exclusion>,
    pub weight: f64,
    pub curve_distance: f64,
    /// Largest lambda resolvable on the grid for this point.
    pub lambda_resolved: f64,
    pub slope_interior: Option<f64>,
    pub slope_boundary: Option<f64>,
    /// Errors at the largest lambda.
    pub error_interior: Option<f64>,
    pub error_boundary: Option<f64>,
    /// `|mean of the last values - truth|` for the interior route.
    pub limit_error: Option<f64>,
    /// `|boundary - interior| / |interior|` at the largest lambda.
    pub route_disagreement: Option<f64>,
    pub flagged: bool,
    pub failures: Vec<(f64, String)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub lambdas: Vec<f64>,
    pub max_abs_potential: f64,
    pub slope_budget: f64,
    /// Fraction of probes on the degenerate mask.
    pub masked_fraction: f64,
    /// Fraction of probes excluded for any reason, including the band around the curves.
    pub excluded_fraction: f64,
    pub points: Vec<PointReport>,
    pub cache_hits: usize,
    #[serde(skip)]
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn evaluated(&self) -> impl Iterator<Item = &PointReport> {
        self.points.iter().filter(|p| p.excluded.is_none())
    }
}

pub fn run_convergence(cfg: &ExperimentConfig, out: Option<&Output>) -> Result<ConvergenceReport> {
    let Some(params) = &cfg.convergence else { bail!("experiment {} has no convergence section", cfg.name) };
    if cfg.lambdas.is_empty() {
        bail!("convergence needs a lambda schedule");
    }
    let spec = cfg.potential_spec()?;
    let v = spec.build()?;
    let grid = cfg.grid.build()?;
    let field = rasterize(&v, &grid)?;
    let points = params.probes.points();
    let weights = ErrorWeightMap::for_potential(&v, &points, cfg.tolerances.degeneracy_threshold);
    let band = EXCLUSION_CELLS * grid.h();
    let cache = cfg.cache_dir.as_deref().map(DtnCache::new).transpose()?;

    let dtn = match &params.boundary {
        Some(mesh) => {
            let zero = PotentialSpec { pieces: Vec::new(), s: spec.s, r: spec.r };
            Some((dtn_for(&spec, mesh, cache.as_ref())?, dtn_for(&zero, mesh, cache.as_ref())?))
        }
        None => None,
    };
    let route = dtn.as_ref().map(|(a_v, a_0)| BoundaryRoute { a_v, a_0 });
    let (lo, hi) = v.bbox().unwrap_or(([0.0; 2], [0.0; 2]));
    let max_abs_potential = field.max_abs();
    let slope_budget = -(spec.s / 2.0 - 1.0) + SLOPE_MARGIN;
    let tol = &cfg.tolerances;

    let results = (0..points.len())
        .into_par_iter()
        .map(|k| -> Result<(PointReport, Vec<ConvergenceRow>)> {
            let x = points[k];
            let excluded = if weights.degenerate_mask[k] {
                Some(Exclusion::Degenerate)
            } else if weights.curve_distance[k] < band {
                Some(Exclusion::NearCurve)
            } else {
                None
            };
            let mut report = PointReport {
                x,
                excluded,
                weight: weights.weight[k],
                curve_distance: weights.curve_distance[k],
                lambda_resolved: resolved_lambda_max(&grid, support_reach(x, lo, hi)),
                slope_interior: None,
                slope_boundary: None,
                error_interior: None,
                error_boundary: None,
                limit_error: None,
                route_disagreement: None,
                flagged: false,
                failures: Vec::new(),
            };
            if excluded.is_some() {
                return Ok((report, Vec::new()));
            }
            let truth = v.eval(x);
            let sweep =
                lambda_sweep_with(&field, x, &cfg.lambdas, truth, route.as_ref(), tol.picard_tol, tol.picard_max_iter)?;
            let samples: Vec<_> = sweep.samples.iter().flatten().collect();
            let rows = samples
                .iter()
                .map(|s| ConvergenceRow {
                    x1: x[0],
                    x2: x[1],
                    lambda: s.lambda,
                    boundary_re: s.value_boundary.map(|b| b.re),
                    boundary_im: s.value_boundary.map(|b| b.im),
                    interior_re: s.value_interior.re,
                    interior_im: s.value_interior.im,
                    truth_re: truth.re,
                    truth_im: truth.im,
                    error_interior: s.error(),
                    error_boundary: s.boundary_error(),
                })
                .collect();
            let ls: Vec<f64> = samples.iter().map(|s| s.lambda).collect();
            let ei: Vec<f64> = samples.iter().map(|s| s.error()).collect();
            report.slope_interior = loglog_fit(&ls, &ei).map(|f| f.slope);
            if route.is_some() {
                let eb: Vec<f64> = samples.iter().filter_map(|s| s.boundary_error()).collect();
                report.slope_boundary = loglog_fit(&ls, &eb).map(|f| f.slope);
            }
            if let Some(last) = samples.last().filter(|s| s.lambda == *cfg.lambdas.last().expect("nonempty")) {
                report.error_interior = Some(last.error());
                report.error_boundary = last.boundary_error();
                report.route_disagreement =
                    last.value_boundary.map(|b| (b - last.value_interior).norm() / last.value_interior.norm());
            }
            let values: Vec<Complex64> = samples.iter().map(|s| s.value_interior).collect();
            report.limit_error = tail_mean(&values, TAIL).0.map(|m| (m - truth).norm());
            report.flagged = !sweep.failures.is_empty()
                || report.slope_interior.is_some_and(|s| s > slope_budget)
                || report.slope_boundary.is_some_and(|s| s > slope_budget);
            report.failures = sweep.failures;
            Ok((report, rows))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::with_capacity(results.len());
    let mut rows = Vec::new();
    for (r, mut rs) in results {
        reports.push(r);
        rows.append(&mut rs);
    }
    let masked = reports.iter().filter(|r| r.excluded == Some(Exclusion::Degenerate)).count();
    let excluded = reports.iter().filter(|r| r.excluded.is_some()).count();
    let frac = |m: usize| if points.is_empty() { 0.0 } else { m as f64 / points.len() as f64 };
    let report = ConvergenceReport {
        lambdas: cfg.lambdas.clone(),
        max_abs_potential,
        slope_budget,
        masked_fraction: frac(masked),
        excluded_fraction: frac(excluded),
        points: reports,
        cache_hits: cache.as_ref().map_or(0, |c| c.hits()),
        rows,
    };
    if let Some(out) = out {
        out.csv("convergence.csv", &report.rows)?;
        out.json("convergence.json", &report)?;
        out.json("error_weight_map.json", &weights)?;
    }
    Ok(report)
}
