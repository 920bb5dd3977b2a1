//! JSON descriptions of piecewise potentials.
//!
//! ```json
//! { "pieces": [ { "q": { "kind": "constant", "value": [1.0, 0.0] },
//!                 "domain": { "kind": "disk", "center": [0.0, 0.0], "radius": 0.4 } } ],
//!   "s": 2.5, "r": 0.3 }
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bukhgeim::domain::{
    make_rhombus, CurveFn, GraphSegment, Piece, PiecewiseBoundary, PiecewisePotential, SmoothFn, SubDomain,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Rhombus,
    /// Closed chain of graph segments; membership from the traced boundary.
    Boundary { segments: Vec<GraphSegment> },
}

impl DomainSpec {
    pub fn build(&self) -> Result<SubDomain> {
        Ok(match self {
            DomainSpec::Disk { center, radius } => SubDomain::disk(*center, *radius)?,
            DomainSpec::Polygon { vertices } => SubDomain::polygon(vertices)?,
            DomainSpec::Rhombus => make_rhombus(),
            DomainSpec::Boundary { segments } => {
                for s in segments {
                    s.check_consistency()?;
                }
                SubDomain::from_boundary(PiecewiseBoundary::new(segments.clone())?)
            }
        })
    }

    /// The same curve as an explicit segment chain.
    pub fn to_boundary(&self) -> Result<DomainSpec> {
        Ok(DomainSpec::Boundary { segments: self.build()?.boundary.segments })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceSpec {
    pub q: SmoothFn,
    pub domain: DomainSpec,
}

fn default_s() -> f64 {
    2.5
}

fn default_r() -> f64 {
    0.3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub pieces: Vec<PieceSpec>,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_r")]
    pub r: f64,
}

impl PotentialSpec {
    pub fn build(&self) -> Result<PiecewisePotential> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Ok(Piece { q: p.q.clone(), domain: p.domain.build()? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(PiecewisePotential::new(pieces, self.s, self.r)?)
    }

    /// Content hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("potential spec serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Copy whose piece `piece` has segment `segment` displaced by `delta * bump`.
    /// Every piece is converted to an explicit segment chain so that `delta = 0`
    /// reproduces the traced membership of the unperturbed description.
    pub fn perturbed(&self, piece: usize, segment: usize, bump: &CurveFn, delta: f64) -> Result<PotentialSpec> {
        let mut out = self.as_boundaries()?;
        let p = out.pieces.get_mut(piece).with_context(|| format!("no piece {piece}"))?;
        let DomainSpec::Boundary { segments } = &mut p.domain else { unreachable!() };
        let seg = segments.get_mut(segment).with_context(|| format!("no segment {segment}"))?;
        if delta != 0.0 {
            seg.function = CurveFn::Sum { terms: vec![seg.function.clone(), scale_curve(bump, delta)?] };
        }
        Ok(out)
    }

    pub fn as_boundaries(&self) -> Result<PotentialSpec> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Ok(PieceSpec { q: p.q.clone(), domain: p.domain.to_boundary()? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(PotentialSpec { pieces, s: self.s, r: self.r })
    }
}

fn scale_curve(c: &CurveFn, delta: f64) -> Result<CurveFn> {
    Ok(match c {
        CurveFn::CompactBump { amplitude, center, width } => {
            CurveFn::CompactBump { amplitude: amplitude * delta, center: *center, width: *width }
        }
        CurveFn::GaussianBump { amplitude, center, width } => {
            CurveFn::GaussianBump { amplitude: amplitude * delta, center: *center, width: *width }
        }
        CurveFn::Polynomial { coeffs } => CurveFn::Polynomial { coeffs: coeffs.iter().map(|c| c * delta).collect() },
        CurveFn::Constant { value } => CurveFn::Constant { value: value * delta },
        other => bail!("perturbation shape {other:?} cannot be scaled"),
    })
}

/// Inline description or a path to a JSON file holding one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialRef {
    File(PathBuf),
    Inline(PotentialSpec),
}

impl PotentialRef {
    pub fn resolve(&self, base: &Path) -> Result<PotentialSpec> {
        match self {
            PotentialRef::Inline(s) => Ok(s.clone()),
            PotentialRef::File(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
            }
        }
    }
}
