//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bukhgeim::domain::CurveFn;
use bukhgeim::recon::{PICARD_MAX_ITER, PICARD_TOL};
use bukhgeim::stationary::DEGENERACY_THRESHOLD;
use bukhgeim::FourierGrid;
use serde::{Deserialize, Serialize};

use crate::description::{PotentialRef, PotentialSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub side: f64,
    #[serde(default)]
    pub center: [f64; 2],
}

impl GridSpec {
    pub fn build(&self) -> Result<FourierGrid> {
        Ok(FourierGrid::new(self.n, self.side, self.center)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub degeneracy_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { picard_tol: PICARD_TOL, picard_max_iter: PICARD_MAX_ITER, degeneracy_threshold: DEGENERACY_THRESHOLD }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct CounterexampleParams {
    pub t_values: Vec<f64>,
    /// Gauss-Legendre panels per unit length of the 2D oracle, per unit of `lambda`.
    pub oracle_panels_per_lambda: f64,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        Self { t_values: vec![0.5, 1.0, 1.5], oracle_panels_per_lambda: 2.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProbeSpec {
    Points { points: Vec<[f64; 2]> },
    /// `m x m` cell-centered lattice on the square `center +- half`, kept where `|x - center| < half`.
    DiskLattice { center: [f64; 2], half: f64, m: usize },
}

impl ProbeSpec {
    pub fn points(&self) -> Vec<[f64; 2]> {
        match self {
            ProbeSpec::Points { points } => points.clone(),
            ProbeSpec::DiskLattice { center, half, m } => {
                let mut out = Vec::new();
                for i in 0..*m {
                    for j in 0..*m {
                        let x = [
                            center[0] - half + 2.0 * half * (i as f64 + 0.5) / *m as f64,
                            center[1] - half + 2.0 * half * (j as f64 + 0.5) / *m as f64,
                        ];
                        if (x[0] - center[0]).hypot(x[1] - center[1]) < *half {
                            out.push(x);
                        }
                    }
                }
                out
            }
        }
    }
}

/// Boundary data on a circle: mesh nodes and polar rings of the forward solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshSpec {
    #[serde(default)]
    pub center: [f64; 2],
    pub radius: f64,
    pub nodes: usize,
    pub rings: usize,
    /// Sub-samples per direction when averaging the potential over control volumes; 0 samples at nodes.
    #[serde(default)]
    pub average: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceParams {
    pub probes: ProbeSpec,
    /// Enables the boundary route.
    #[serde(default)]
    pub boundary: Option<MeshSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityParams {
    pub deltas: Vec<f64>,
    pub piece: usize,
    pub segment: usize,
    pub bump: CurveFn,
    pub mesh: MeshSpec,
    pub probes: ProbeSpec,
    /// Diameter `d` entering `lambda = -ln(gap) / (6 d^2)`.
    pub diameter: f64,
    /// Largest admissible C2 distance between the two discontinuity sets.
    #[serde(default = "default_max_c2")]
    pub max_c2_distance: f64,
}

fn default_max_c2() -> f64 {
    10.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct LemmaParams {
    pub s: f64,
    pub x: [f64; 2],
    /// Multiplies every test field and potential; 0 gives the all-zero suite.
    pub amplitude: f64,
    pub lambdas_multiplier: Vec<f64>,
    pub lambdas_s1: Vec<f64>,
    pub lambdas_functional: Vec<f64>,
    pub lambdas_oscillatory: Vec<f64>,
    pub lambdas_growth: Vec<f64>,
    pub power_iterations: usize,
    /// Width of the Gaussian test potential.
    pub sigma: f64,
    pub growth_mesh: MeshSpec,
}

impl Default for LemmaParams {
    fn default() -> Self {
        Self {
            s: 0.25,
            x: [0.0, 0.0],
            amplitude: 1.0,
            lambdas_multiplier: vec![64.0, 128.0, 256.0, 512.0],
            lambdas_s1: vec![16.0, 32.0, 64.0, 128.0, 256.0],
            lambdas_functional: vec![64.0, 128.0, 256.0, 512.0],
            lambdas_oscillatory: vec![1e2, 1e3, 1e4],
            lambdas_growth: vec![4.0, 8.0, 16.0, 32.0],
            power_iterations: 40,
            sigma: 0.06,
            growth_mesh: MeshSpec { center: [0.0, 0.0], radius: 1.0, nodes: 128, rings: 64, average: 0 },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ScatterParams {
    pub k: f64,
    pub n_eta: usize,
    pub n_theta: usize,
    pub cutoff: usize,
    /// Born-regime scalings of the potential; empty skips the check.
    pub born_eps: Vec<f64>,
    pub born_eta: f64,
    pub born_theta: f64,
}

impl Default for ScatterParams {
    fn default() -> Self {
        Self {
            k: 3.0,
            n_eta: 64,
            n_theta: 64,
            cutoff: bukhgeim::scattering::DEFAULT_K_CUTOFF,
            born_eps: vec![0.2, 0.1, 0.05],
            born_eta: 0.7,
            born_theta: 2.1,
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub potential: Option<PotentialRef>,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub counterexample: Option<CounterexampleParams>,
    #[serde(default)]
    pub convergence: Option<ConvergenceParams>,
    #[serde(default)]
    pub stability: Option<StabilityParams>,
    #[serde(default)]
    pub lemmas: Option<LemmaParams>,
    #[serde(default)]
    pub scatter: Option<ScatterParams>,
    /// Directory relative references are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.iter().any(|l| !(*l > 0.0)) {
            bail!("lambda schedule must be positive");
        }
        if self.lambdas.windows(2).any(|w| !(w[1] > w[0])) {
            bail!("lambda schedule must increase");
        }
        self.grid.build()?;
        if let Some(PotentialRef::File(p)) = &self.potential {
            let path = if p.is_absolute() { p.clone() } else { self.base_dir.join(p) };
            if !path.is_file() {
                bail!("potential description {} does not exist", path.display());
            }
        }
        if let Some(st) = &self.stability {
            if st.deltas.iter().any(|d| !(*d >= 0.0)) {
                bail!("perturbation sizes must be nonnegative");
            }
        }
        Ok(())
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        match &self.potential {
            Some(r) => r.resolve(&self.base_dir),
            None => bail!("experiment {} needs a potential description", self.name),
        }
    }
}
