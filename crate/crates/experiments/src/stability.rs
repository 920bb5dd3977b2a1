//! Stability under perturbations of the discontinuity curves.

use std::fmt;

use anyhow::{bail, Result};
use bukhgeim::cgo::PhaseParams;
use bukhgeim::domain::{curve_distance_c2, dsr_norm_upper, rasterize, SubDomain};
use bukhgeim::dtn::{dtn_opnorm_diff, DtnMatrix};
use bukhgeim::recon::{interior_functional, reconstruct_boundary_trace, trace_from_w, ErrorWeightMap, EXCLUSION_CELLS};
use bukhgeim::{cgo::solve_w, ComplexField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{dtn_for, DtnCache};
use crate::config::ExperimentConfig;
use crate::description::PotentialSpec;
use crate::output::Output;

#[derive(Clone, Debug, PartialEq)]
pub enum StabilityError {
    /// The perturbed curves have no common cover with the reference or leave the C2 budget.
    PerturbationTooLarge { delta: f64, distance: f64, limit: f64 },
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityError::PerturbationTooLarge { delta, distance, limit } => {
                write!(f, "perturbation too large at delta {delta}: C2 distance {distance:e} exceeds {limit:e}")
            }
        }
    }
}

impl std::error::Error for StabilityError {}

/// `lambda = -ln(gap) / (6 d^2)`.
pub fn schedule_lambda(gap: f64, diameter: f64) -> f64 {
    -gap.ln() / (6.0 * diameter * diameter)
}

/// Largest lambda with `lambda side^2 / n^2 <= 1/4`.
pub fn lambda_clamp(n: usize, side: f64) -> f64 {
    0.25 * (n * n) as f64 / (side * side)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityRow {
    pub delta: f64,
    pub c2_distance: f64,
    pub dtn_gap: f64,
    /// Schedule value before clamping; infinite when the gap vanishes.
    pub lambda_raw: f64,
    pub lambda: f64,
    pub clamped: bool,
    /// `|ln gap|^{1 - s/2}`.
    pub modulus: f64,
    pub kappa: f64,
    /// Sup over unmasked probes of `|V1~ - V2~|` by the boundary route.
    pub sup_error: f64,
    pub sup_error_interior: f64,
    /// Largest error-weight surrogate for the pointwise constant over the evaluated probes.
    pub cx_surrogate: f64,
    pub evaluated_probes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityRun {
    pub deltas: Vec<f64>,
    pub diameter: f64,
    pub s: f64,
    pub lambda_clamp: f64,
    pub rows: Vec<StabilityRow>,
}

impl StabilityRun {
    /// Rows ordered by decreasing gap, the order in which errors should not increase.
    pub fn by_gap(&self) -> Vec<&StabilityRow> {
        let mut r: Vec<&StabilityRow> = self.rows.iter().collect();
        r.sort_by(|a, b| b.dtn_gap.total_cmp(&a.dtn_gap));
        r
    }
}

struct Reference {
    dtn: DtnMatrix,
    zero: DtnMatrix,
    field: ComplexField,
    domains: Vec<SubDomain>,
    kappa: f64,
}

pub fn run_stability(cfg: &ExperimentConfig, out: Option<&Output>) -> Result<StabilityRun> {
    let Some(params) = &cfg.stability else { bail!("experiment {} has no stability section", cfg.name) };
    let base = cfg.potential_spec()?.as_boundaries()?;
    let grid = cfg.grid.build()?;
    let cache = cfg.cache_dir.as_deref().map(DtnCache::new).transpose()?;
    let clamp = lambda_clamp(grid.n(), grid.side());
    let probes = params.probes.points();
    let band = EXCLUSION_CELLS * grid.h();
    let tol = &cfg.tolerances;

    let v1 = base.build()?;
    let zero = PotentialSpec { pieces: Vec::new(), s: base.s, r: base.r };
    let reference = Reference {
        dtn: dtn_for(&base, &params.mesh, cache.as_ref())?,
        zero: dtn_for(&zero, &params.mesh, cache.as_ref())?,
        field: rasterize(&v1, &grid)?,
        domains: v1.pieces.iter().map(|p| p.domain.clone()).collect(),
        kappa: dsr_norm_upper(&v1, &grid),
    };

    let perturbed = params
        .deltas
        .iter()
        .map(|&delta| {
            let spec = base.perturbed(params.piece, params.segment, &params.bump, delta)?;
            let v2 = spec.build()?;
            let distance = curve_distance_c2(&v1.pieces[params.piece].domain.boundary, &v2.pieces[params.piece].domain.boundary);
            if !(distance <= params.max_c2_distance) {
                return Err(StabilityError::PerturbationTooLarge { delta, distance, limit: params.max_c2_distance }.into());
            }
            Ok((delta, spec, v2, distance))
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = perturbed
        .par_iter()
        .map(|(delta, spec, v2, distance)| -> Result<StabilityRow> {
            let dtn2 = dtn_for(spec, &params.mesh, cache.as_ref())?;
            let gap = dtn_opnorm_diff(&reference.dtn, &dtn2)?;
            let lambda_raw = schedule_lambda(gap, params.diameter);
            if !(lambda_raw > 0.0) {
                bail!("DtN gap {gap:e} at delta {delta} gives a nonpositive lambda");
            }
            let lambda = lambda_raw.min(clamp);
            let field2 = rasterize(v2, &grid)?;
            let mut domains: Vec<&SubDomain> = reference.domains.iter().collect();
            domains.extend(v2.pieces.iter().map(|p| &p.domain));
            let weights = ErrorWeightMap::build(&domains, &probes, tol.degeneracy_threshold);
            let mut row = StabilityRow {
                delta: *delta,
                c2_distance: *distance,
                dtn_gap: gap,
                lambda_raw,
                lambda,
                clamped: lambda < lambda_raw,
                modulus: gap.ln().abs().powf(1.0 - base.s / 2.0),
                kappa: reference.kappa.max(dsr_norm_upper(v2, &grid)),
                sup_error: 0.0,
                sup_error_interior: 0.0,
                cx_surrogate: 0.0,
                evaluated_probes: 0,
            };
            for (k, &x) in probes.iter().enumerate() {
                if weights.degenerate_mask[k] || weights.curve_distance[k] < band {
                    continue;
                }
                row.evaluated_probes += 1;
                row.cx_surrogate = row.cx_surrogate.max(weights.weight[k]);
                if gap == 0.0 {
                    // Identical data give identical reconstructions.
                    continue;
                }
                let p = PhaseParams::new(lambda, x)?;
                let w1 = solve_w(&reference.field, &p, tol.picard_tol, tol.picard_max_iter)?.w;
                let w2 = solve_w(&field2, &p, tol.picard_tol, tol.picard_max_iter)?.w;
                let i1 = interior_functional(&reference.field, &w1, &p, 1.0);
                let i2 = interior_functional(&field2, &w2, &p, 1.0);
                let b1 = reconstruct_boundary_trace(&reference.dtn, &reference.zero, &trace_from_w(&w1, &p, &reference.dtn.mesh), &p)?;
                let b2 = reconstruct_boundary_trace(&dtn2, &reference.zero, &trace_from_w(&w2, &p, &dtn2.mesh), &p)?;
                row.sup_error = row.sup_error.max((b1 - b2).norm());
                row.sup_error_interior = row.sup_error_interior.max((i1 - i2).norm());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let run = StabilityRun {
        deltas: params.deltas.clone(),
        diameter: params.diameter,
        s: base.s,
        lambda_clamp: clamp,
        rows,
    };
    if let Some(out) = out {
        out.csv("stability.csv", &run.rows)?;
        out.json("stability.json", &run)?;
    }
    Ok(run)
}
