//! TOML experiment configuration.
//!
//! ```toml
//! version = 1
//! mode = "evaluate-recovery"
//!
//! [geometry]
//! dim = 2
//! lengths = [1.0, 1.0]
//! crack = { level = 0.5 }
//!
//! [target]
//! kind = "jump"
//! below = [0.0, 0.0]
//! above = [0.0, 1.0]
//!
//! [params]
//! lambda = 1.0
//! theta = 1.0
//!
//! [schedule]
//! eps = [0.1, 0.07, 0.05]
//! preset = "subcritical"
//! ```

use crate::energy::{Displacement, EnergyParams, GriffithReference, Variant};
use crate::error::{Error, Result};
use crate::lattice::{build_extended_domain, DirichletRegion, Face, Kernel, LatticeDomain, VectorField};
use crate::recovery::{CrackGeometry, GammaRule, RecoveryOptions};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    EvaluateRecovery,
    Minimize,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Amplitude of the seeded downward perturbation of `v₀` in solver runs.
    #[serde(default)]
    pub init_noise: f64,
    pub geometry: Geometry,
    #[serde(default)]
    pub target: Target,
    pub params: ParamsConfig,
    pub schedule: Schedule,
    #[serde(default)]
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub dim: usize,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    pub lengths: Vec<f64>,
    /// `"none"`, `"full"`, or a list of faces such as `["low0", "high0"]`.
    #[serde(default)]
    pub dirichlet: DirichletSpec,
    /// Extra node layers outside every Dirichlet side.
    #[serde(default)]
    pub collar: usize,
    #[serde(default)]
    pub crack: Option<CrackSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirichletSpec {
    Named(String),
    Faces(Vec<String>),
}

impl Default for DirichletSpec {
    fn default() -> Self {
        DirichletSpec::Named("none".into())
    }
}

impl DirichletSpec {
    pub fn region(&self, dim: usize) -> Result<DirichletRegion> {
        match self {
            DirichletSpec::Named(s) => match s.as_str() {
                "none" => Ok(DirichletRegion::None),
                "full" => Ok(DirichletRegion::FullBoundary),
                other => Err(Error::Config(format!(
                    "geometry.dirichlet: expected \"none\", \"full\" or a face list, got \"{other}\""
                ))),
            },
            DirichletSpec::Faces(list) => list
                .iter()
                .map(|f| parse_face(f, dim))
                .collect::<Result<Vec<_>>>()
                .map(DirichletRegion::Faces),
        }
    }
}

fn parse_face(s: &str, dim: usize) -> Result<Face> {
    let bad = || Error::Config(format!("geometry.dirichlet: bad face \"{s}\" (use low<k> / high<k>)"));
    let (side, axis) = if let Some(k) = s.strip_prefix("low") {
        (false, k)
    } else if let Some(k) = s.strip_prefix("high") {
        (true, k)
    } else {
        return Err(bad());
    };
    let k: usize = axis.parse().map_err(|_| bad())?;
    if k >= dim {
        return Err(bad());
    }
    Ok(if side { Face::High(k) } else { Face::Low(k) })
}

/// Planar crack `{x_d = level}` over the tangential box `[lo, hi]`
/// (the full box width when omitted).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackSpec {
    pub level: f64,
    #[serde(default)]
    pub lo: Option<Vec<f64>>,
    #[serde(default)]
    pub hi: Option<Vec<f64>>,
}

/// Target displacement for recovery sweeps and boundary data for solver runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
#[derive(Default)]
pub enum Target {
    #[default]
    Zero,
    /// Constant on either side of the crack plane.
    Jump { below: Vec<f64>, above: Vec<f64> },
    /// `u(x) = grad · x + offset`.
    Affine {
        grad: Vec<Vec<f64>>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
    },
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub lambda: f64,
    pub theta: f64,
    #[serde(default = "plain")]
    pub variant: Variant,
    #[serde(default)]
    pub max_norm: Option<f64>,
    #[serde(default)]
    pub kernel: Option<Kernel>,
}

fn plain() -> Variant {
    Variant::Plain
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `p = 2`.
    Subcritical,
    /// `p = 1`.
    Critical,
    /// `p = 3`.
    NiUpper,
}

impl Preset {
    pub fn exponent(self) -> f64 {
        match self {
            Preset::Subcritical => 2.0,
            Preset::Critical => 1.0,
            Preset::NiUpper => 3.0,
        }
    }
}

/// `δ = c·ε^p`, with `p` given directly or through a preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub eps: Vec<f64>,
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
}

impl Schedule {
    pub fn exponent(&self) -> Result<f64> {
        match (self.preset, self.p) {
            (Some(_), Some(_)) => Err(Error::Config("schedule: give either `preset` or `p`, not both".into())),
            (Some(pr), None) => Ok(pr.exponent()),
            (None, Some(p)) => Ok(p),
            (None, None) => Err(Error::Config("schedule: one of `preset` or `p` is required".into())),
        }
    }

    pub fn coefficient(&self) -> f64 {
        self.c.unwrap_or(1.0)
    }

    pub fn delta(&self, eps: f64) -> Result<f64> {
        Ok(self.coefficient() * eps.powf(self.exponent()?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryConfig {
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub gamma: GammaRule,
    #[serde(default)]
    pub allow_boundary_crack: bool,
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
}

fn default_eta() -> f64 {
    0.1
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig { eta: default_eta(), gamma: GammaRule::default(), allow_boundary_crack: false, shift: None }
    }
}

impl RecoveryConfig {
    pub fn options(&self) -> RecoveryOptions {
        RecoveryOptions {
            eta: self.eta,
            gamma: self.gamma,
            allow_boundary_crack: self.allow_boundary_crack,
            shift: self.shift.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; the CLI `--out` flag takes precedence.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Sweep table file name inside the output directory.
    #[serde(default)]
    pub csv: Option<String>,
    /// Also write `u`/`v` field files for every ε.
    #[serde(default)]
    pub fields: bool,
}

impl OutputConfig {
    pub fn csv_name(&self) -> &str {
        self.csv.as_deref().unwrap_or("sweep.csv")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Suite selectors; empty means all.
    #[serde(default)]
    pub suites: Vec<String>,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "version: expected {CONFIG_VERSION}, got {}",
                self.version
            )));
        }
        let g = &self.geometry;
        let d = g.dim;
        if d != 2 && d != 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        if g.lengths.len() != d || g.origin.as_ref().is_some_and(|o| o.len() != d) {
            return Err(Error::Config("geometry: origin and lengths need `dim` entries".into()));
        }
        if g.lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Config("geometry.lengths: entries must be positive".into()));
        }
        g.dirichlet.region(d)?;
        if let Some(c) = &g.crack {
            for (name, v) in [("lo", &c.lo), ("hi", &c.hi)] {
                if v.as_ref().is_some_and(|v| v.len() != d - 1) {
                    return Err(Error::Config(format!("geometry.crack.{name}: needs dim − 1 entries")));
                }
            }
        }
        match &self.target {
            Target::Zero => {}
            Target::Jump { below, above } => {
                if below.len() != d || above.len() != d {
                    return Err(Error::Config("target: below/above need `dim` entries".into()));
                }
                if g.crack.is_none() {
                    return Err(Error::Config("target: a jump target needs geometry.crack".into()));
                }
            }
            Target::Affine { grad, offset } => {
                if grad.len() != d || grad.iter().any(|r| r.len() != d) || offset.as_ref().is_some_and(|o| o.len() != d) {
                    return Err(Error::Config("target: grad must be dim × dim and offset dim".into()));
                }
            }
        }
        self.energy_params(1.0)?.validate().map_err(|e| Error::Config(format!("params: {e}")))?;
        let s = &self.schedule;
        if s.eps.is_empty() {
            return Err(Error::Config("schedule.eps: the ε list is empty".into()));
        }
        if s.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("schedule.eps: entries must be positive".into()));
        }
        if s.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("schedule.eps: must be strictly decreasing".into()));
        }
        if !(s.exponent()? > 0.0) {
            return Err(Error::Config("schedule.p: must be positive".into()));
        }
        if !(s.coefficient() > 0.0) {
            return Err(Error::Config("schedule.c: must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.init_noise) {
            return Err(Error::Config("init_noise: must lie in [0, 1]".into()));
        }
        self.solver.validate().map_err(|e| Error::Config(format!("solver: {e}")))?;
        Ok(())
    }

    pub fn origin(&self) -> Vec<f64> {
        self.geometry.origin.clone().unwrap_or_else(|| vec![0.0; self.geometry.dim])
    }

    pub fn energy_params(&self, eps: f64) -> Result<EnergyParams> {
        let p = &self.params;
        let mut out = EnergyParams::new(p.lambda, p.theta, eps).with_variant(p.variant);
        out.max_norm = p.max_norm;
        out.kernel = p.kernel;
        Ok(out)
    }

    pub fn domain(&self, delta: f64) -> Result<LatticeDomain> {
        let g = &self.geometry;
        build_extended_domain(g.dim, &self.origin(), &g.lengths, delta, &g.dirichlet.region(g.dim)?, g.collar)
    }

    pub fn crack(&self) -> Result<Option<CrackGeometry>> {
        let g = &self.geometry;
        let Some(c) = &g.crack else { return Ok(None) };
        let origin = self.origin();
        let d = g.dim;
        let lo = c.lo.clone().unwrap_or_else(|| origin[..d - 1].to_vec());
        let hi = c
            .hi
            .clone()
            .unwrap_or_else(|| (0..d - 1).map(|k| origin[k] + g.lengths[k]).collect());
        CrackGeometry::new(c.level, lo, hi).map(Some)
    }

    /// The continuum target as a Griffith reference.
    pub fn reference(&self) -> Result<GriffithReference> {
        let g = &self.geometry;
        let d = g.dim;
        let origin = self.origin();
        let pad = |v: &[f64]| {
            let mut out = [0.0; 3];
            out[..v.len()].copy_from_slice(v);
            out
        };
        Ok(match &self.target {
            Target::Zero => GriffithReference::uniform(d, &origin, &g.lengths, Displacement::constant([0.0; 3])),
            Target::Affine { grad, offset } => {
                let mut m = [[0.0; 3]; 3];
                for (i, row) in grad.iter().enumerate() {
                    m[i][..d].copy_from_slice(row);
                }
                let off = offset.as_deref().map(pad).unwrap_or([0.0; 3]);
                let disp = Displacement::affine(m, off);
                match self.crack()? {
                    Some(c) => GriffithReference::split(d, &origin, &g.lengths, c, disp.clone(), disp),
                    None => GriffithReference::uniform(d, &origin, &g.lengths, disp),
                }
            }
            Target::Jump { below, above } => {
                let crack = self.crack()?.expect("validated");
                GriffithReference::split(
                    d,
                    &origin,
                    &g.lengths,
                    crack,
                    Displacement::constant(pad(below)),
                    Displacement::constant(pad(above)),
                )
            }
        })
    }

    /// The target sampled at the nodes, used as boundary datum. Nodes outside
    /// the box (extended-domain collar) get the natural extension of the target.
    pub fn datum(&self, domain: &LatticeDomain) -> Result<VectorField> {
        let d = self.geometry.dim;
        let level = self.geometry.crack.as_ref().map(|c| c.level);
        let target = self.target.clone();
        Ok(VectorField::from_fn(domain, |x| {
            let mut out = [0.0; 3];
            match &target {
                Target::Zero => {}
                Target::Jump { below, above } => {
                    let side = if x[d - 1] >= level.expect("validated") { above } else { below };
                    out[..d].copy_from_slice(side);
                }
                Target::Affine { grad, offset } => {
                    for i in 0..d {
                        out[i] = offset.as_ref().map_or(0.0, |o| o[i]) + (0..d).map(|j| grad[i][j] * x[j]).sum::<f64>();
                    }
                }
            }
            out
        }))
    }
}
