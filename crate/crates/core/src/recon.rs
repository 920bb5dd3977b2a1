//! The reconstruction functional
//!
//! ```text
//! V~(x) = (lam/pi) int_{dOmega} exp(i lam conj(psi_x)) (Lambda_V - Lambda_0)[u_{lam,x}]
//!       = (lam/pi) int_Omega exp(i lam phi_x) V (1 + w)
//! ```
//!
//! evaluated by the boundary route (DtN matrices and a CGO trace) and by the interior
//! route, which serves as its oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cgo::{solve_w, solve_w_conjugate, PhaseParams};
use crate::domain::{PiecewisePotential, SubDomain};
use crate::dtn::{BoundaryMesh, DtnMatrix};
use crate::error::{Error, Result};
use crate::grid::ComplexField;
use crate::stationary::{find_stationary_with, DEFAULT_ROOT_TOL};

pub const PICARD_TOL: f64 = 1e-9;
pub const PICARD_MAX_ITER: usize = 200;
pub const EXCLUSION_CELLS: f64 = 2.0;

/// `exp(i lam psi_x)(1 + w)` at the mesh nodes, `w` interpolated bilinearly.
pub fn trace_from_w(w: &ComplexField, p: &PhaseParams, mesh: &BoundaryMesh) -> Vec<Complex64> {
    mesh.nodes.iter().map(|&z| p.cgo_factor(z) * (1.0 + w.interpolate(z))).collect()
}

pub fn bukhgeim_trace(v: &ComplexField, p: &PhaseParams, mesh: &BoundaryMesh) -> Result<Vec<Complex64>> {
    let ws = solve_w(v, p, PICARD_TOL, PICARD_MAX_ITER)?;
    Ok(trace_from_w(&ws.w, p, mesh))
}

/// `(lam/pi) sum_j arc_j exp(i lam conj(psi_x)(z_j)) ((A_V - A_0) trace)_j`.
pub fn reconstruct_boundary_trace(a_v: &DtnMatrix, a_0: &DtnMatrix, trace: &[Complex64], p: &PhaseParams) -> Result<Complex64> {
    let d = a_v.sub(a_0)?;
    let mesh = &a_v.mesh;
    if trace.len() != mesh.len() {
        return Err(Error::MeshMismatch);
    }
    let n = mesh.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let row: Complex64 = (0..n).map(|k| d[(j, k)] * trace[k]).sum();
        acc += p.cgo_factor_conj(mesh.nodes[j]) * row * mesh.arc_weights[j];
    }
    Ok(acc * p.lambda / PI)
}

pub fn reconstruct_boundary(a_v: &DtnMatrix, a_0: &DtnMatrix, v: &ComplexField, p: &PhaseParams) -> Result<Complex64> {
    let trace = bukhgeim_trace(v, p, &a_v.mesh)?;
    reconstruct_boundary_trace(a_v, a_0, &trace, p)
}

/// `(lam/pi) h^2 sum exp(i lam phi_x) V (1 + w)`.
pub fn interior_functional(v: &ComplexField, w: &ComplexField, p: &PhaseParams, sign: f64) -> Complex64 {
    let g = &v.grid;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, (&a, &b)) in v.values.iter().zip(&w.values).enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        acc += a * (1.0 + b) * Complex64::from_polar(1.0, sign * p.lambda * p.phi(g.node_at(k)));
    }
    acc * g.cell_area() * p.lambda / PI
}

pub fn reconstruct_interior(v: &ComplexField, p: &PhaseParams) -> Result<Complex64> {
    let ws = solve_w(v, p, PICARD_TOL, PICARD_MAX_ITER)?;
    Ok(interior_functional(v, &ws.w, p, 1.0))
}

/// Conjugate-phase functional `(lam/pi) int exp(-i lam phi_x) V (1 + w~)`; its conjugate
/// equals `reconstruct_interior(conj V)`.
pub fn reconstruct_interior_conjugate(v: &ComplexField, p: &PhaseParams) -> Result<Complex64> {
    let ws = solve_w_conjugate(v, p, PICARD_TOL, PICARD_MAX_ITER)?;
    Ok(interior_functional(v, &ws.w, p, -1.0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconSample {
    pub x: [f64; 2],
    pub lambda: f64,
    pub value_boundary: Option<Complex64>,
    pub value_interior: Complex64,
    pub truth: Complex64,
}

impl ReconSample {
    pub fn error(&self) -> f64 {
        (self.value_interior - self.truth).norm()
    }

    pub fn boundary_error(&self) -> Option<f64> {
        self.value_boundary.map(|b| (b - self.truth).norm())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    /// One entry per requested lambda; `None` marks a Picard failure.
    pub samples: Vec<Option<ReconSample>>,
    pub failures: Vec<(f64, String)>,
    pub limit: Option<Complex64>,
    /// Largest distance of the averaged samples from their mean.
    pub dispersion: Option<f64>,
}

/// DtN pair enabling the boundary route in a sweep.
pub struct BoundaryRoute<'a> {
    pub a_v: &'a DtnMatrix,
    pub a_0: &'a DtnMatrix,
}

pub fn lambda_sweep(
    v: &ComplexField,
    x: [f64; 2],
    lambdas: &[f64],
    truth: Complex64,
    boundary: Option<&BoundaryRoute<'_>>,
) -> Result<SweepResult> {
    lambda_sweep_with(v, x, lambdas, truth, boundary, PICARD_TOL, PICARD_MAX_ITER)
}

/// `lambda_sweep` with explicit Picard tolerance and iteration cap.
pub fn lambda_sweep_with(
    v: &ComplexField,
    x: [f64; 2],
    lambdas: &[f64],
    truth: Complex64,
    boundary: Option<&BoundaryRoute<'_>>,
    tol: f64,
    max_iter: usize,
) -> Result<SweepResult> {
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("lambdas must increase".into()));
    }
    let mut samples = Vec::with_capacity(lambdas.len());
    let mut failures = Vec::new();
    for &lambda in lambdas {
        let p = PhaseParams::new(lambda, x)?;
        match solve_w(v, &p, tol, max_iter) {
            Ok(ws) => {
                let value_interior = interior_functional(v, &ws.w, &p, 1.0);
                let value_boundary = match boundary {
                    Some(b) => Some(reconstruct_boundary_trace(b.a_v, b.a_0, &trace_from_w(&ws.w, &p, &b.a_v.mesh), &p)?),
                    None => None,
                };
                samples.push(Some(ReconSample { x, lambda, value_boundary, value_interior, truth }));
            }
            Err(e @ Error::NonConvergence { .. }) => {
                failures.push((lambda, e.to_string()));
                samples.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let values: Vec<Complex64> = samples.iter().flatten().map(|s| s.value_interior).collect();
    let (limit, dispersion) = tail_mean(&values, 3);
    Ok(SweepResult { samples, failures, limit, dispersion })
}

/// Mean of the last `k` values and their largest deviation from it.
pub fn tail_mean(values: &[Complex64], k: usize) -> (Option<Complex64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let tail = &values[values.len().saturating_sub(k)..];
    let mean = tail.iter().sum::<Complex64>() / tail.len() as f64;
    let disp = tail.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
    (Some(mean), Some(disp))
}

/// Per-point stationary-phase conditioning data for a piecewise potential.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorWeightMap {
    pub points: Vec<[f64; 2]>,
    /// `sum |g''|^{-1/2}` over stationary points on all discontinuity curves plus
    /// `1 / d(x, curves)`; infinite on flat segments.
    pub weight: Vec<f64>,
    pub degenerate_mask: Vec<bool>,
    /// Distance from `x` to the union of discontinuity curves.
    pub curve_distance: Vec<f64>,
    pub threshold: f64,
}

impl ErrorWeightMap {
    pub fn build(domains: &[&SubDomain], points: &[[f64; 2]], threshold: f64) -> Self {
        let mut weight = Vec::with_capacity(points.len());
        let mut degenerate_mask = Vec::with_capacity(points.len());
        let mut curve_distance = Vec::with_capacity(points.len());
        for &x in points {
            let mut w = 0.0;
            let mut degenerate = false;
            for d in domains {
                for seg in &d.boundary.segments {
                    let scan = find_stationary_with(x, seg, DEFAULT_ROOT_TOL, threshold);
                    if scan.flat {
                        degenerate = true;
                        w = f64::INFINITY;
                    }
                    for sp in &scan.points {
                        degenerate |= sp.g2.abs() < threshold;
                        w += sp.g2.abs().powf(-0.5);
                    }
                }
            }
            let dist = domains.iter().map(|d| d.boundary_distance(x)).fold(f64::INFINITY, f64::min);
            weight.push(w + 1.0 / dist);
            degenerate_mask.push(degenerate);
            curve_distance.push(dist);
        }
        Self { points: points.to_vec(), weight, degenerate_mask, curve_distance, threshold }
    }

    pub fn for_potential(v: &PiecewisePotential, points: &[[f64; 2]], threshold: f64) -> Self {
        let domains: Vec<&SubDomain> = v.pieces.iter().map(|p| &p.domain).collect();
        Self::build(&domains, points, threshold)
    }

    /// Radius `d(x, curves)/2` of the bump separating the local piece from the rest.
    pub fn mask_radius(&self, k: usize) -> f64 {
        0.5 * self.curve_distance[k]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exclusion {
    Degenerate,
    NearCurve,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorMapEntry {
    pub x: [f64; 2],
    pub error: Option<f64>,
    pub value: Option<Complex64>,
    pub excluded: Option<Exclusion>,
}

/// `|V~(x) - V(x)|` by the interior route at unmasked points at least two grid cells
/// away from every discontinuity curve.
pub fn error_map(
    v: &ComplexField,
    truth: &dyn Fn([f64; 2]) -> Complex64,
    lambda: f64,
    weights: &ErrorWeightMap,
) -> Result<Vec<ErrorMapEntry>> {
    let band = EXCLUSION_CELLS * v.grid.h();
    let mut out = Vec::with_capacity(weights.points.len());
    for (k, &x) in weights.points.iter().enumerate() {
        let excluded = if weights.degenerate_mask[k] {
            Some(Exclusion::Degenerate)
        } else if weights.curve_distance[k] < band {
            Some(Exclusion::NearCurve)
        } else {
            None
        };
        if excluded.is_some() {
            out.push(ErrorMapEntry { x, error: None, value: None, excluded });
            continue;
        }
        let value = reconstruct_interior(v, &PhaseParams::new(lambda, x)?)?;
        out.push(ErrorMapEntry { x, error: Some((value - truth(x)).norm()), value: Some(value), excluded: None });
    }
    Ok(out)
}
