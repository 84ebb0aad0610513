//! JSON configuration schemas, one per subcommand.

use anyhow::{bail, Context, Result};
use entroflow::flow::{FlowSystem, Phi, State};
use entroflow::markov::{Grid, Potential};
use entroflow::means::Density;
use rand::Rng;
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Quadratic { gamma: f64 },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        Ok(match self {
            PotentialSpec::Zero => Potential::Zero,
            PotentialSpec::Quadratic { gamma } => Potential::quadratic(*gamma)?,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiSpec {
    Identity,
    Power { alpha: f64 },
}

impl PhiSpec {
    pub fn build(&self) -> Result<Phi> {
        Ok(match self {
            PhiSpec::Identity => Phi::Identity,
            PhiSpec::Power { alpha } => Phi::power(*alpha)?,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensitySpec {
    Boltzmann,
    Power { alpha: f64 },
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density> {
        Ok(match self {
            DensitySpec::Boltzmann => Density::Boltzmann,
            DensitySpec::Power { alpha } => Density::power(*alpha)?,
        })
    }
}

fn default_center() -> f64 {
    0.5
}
fn default_width() -> f64 {
    0.1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Uniform,
    GaussianBump {
        #[serde(default = "default_center")]
        center: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
    /// Uniform sample of the simplex, drawn from the command seed.
    Random,
}

impl StateSpec {
    pub fn build(&self, grid: &Grid, rng: &mut impl Rng) -> Result<State> {
        Ok(match self {
            StateSpec::Uniform => State::uniform(grid.node_count()),
            StateSpec::GaussianBump { center, width } => {
                State::gaussian_bump(grid, *center, *width)?
            }
            StateSpec::Explicit { values } => State::new(values.clone())?,
            StateSpec::Random => State::sample(grid.node_count(), rng),
        })
    }
}

/// Which gradient-flow family a convexity/geodesic run uses.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Heat,
    FokkerPlanck,
}

/// Shared system block: grid size plus the family-specific pieces.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub n: usize,
    pub path: PathKind,
    /// Entropy density for the heat path.
    #[serde(default)]
    pub f: Option<DensitySpec>,
    /// Nonlinearity for the Fokker-Planck path.
    #[serde(default)]
    pub phi: Option<PhiSpec>,
    /// Potential for the Fokker-Planck path (defaults to zero).
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<FlowSystem> {
        let grid = Grid::new(self.n)?;
        match self.path {
            PathKind::Heat => {
                if self.phi.is_some() || self.potential.is_some() {
                    bail!("the heat path takes `f`, not `phi`/`potential`");
                }
                let density = self
                    .f
                    .as_ref()
                    .context("heat path needs an entropy density `f`")?
                    .build()?;
                Ok(FlowSystem::heat(grid, density)?)
            }
            PathKind::FokkerPlanck => {
                if self.f.is_some() {
                    bail!("the fokker-planck path takes `phi`/`potential`, not `f`");
                }
                let phi = self
                    .phi
                    .as_ref()
                    .context("fokker-planck path needs `phi`")?
                    .build()?;
                let potential = match &self.potential {
                    Some(p) => p.build()?,
                    None => Potential::Zero,
                };
                Ok(FlowSystem::fokker_planck(grid, potential, phi)?)
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub potential: PotentialSpec,
    pub phi: PhiSpec,
    pub rho0: StateSpec,
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

pub fn default_tol() -> f64 {
    1e-9
}

/// Where the states fed to the convexity certificates come from.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSource {
    Uniform,
    GaussianBump {
        #[serde(default = "default_center")]
        center: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
    Random {
        #[serde(default = "default_one")]
        count: usize,
    },
    /// Sample states along a fresh simulation.
    Simulate {
        rho0: Box<StateSpec>,
        t_end: f64,
        #[serde(default = "default_tol")]
        tol: f64,
        samples: usize,
    },
}

fn default_one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexityConfig {
    #[serde(flatten)]
    pub system: SystemSpec,
    pub state: StateSource,
    /// Convexity constant to certify at. Default: λ_h per state on the
    /// Fokker-Planck path with a quadratic potential, 0 otherwise.
    #[serde(default)]
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    #[serde(flatten)]
    pub system: SystemSpec,
    pub rho0: StateSpec,
    pub rho1: StateSpec,
    #[serde(default = "default_geodesic_tol")]
    pub tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Convexity constant for the chord check. Default: 0 on the heat path
    /// and for zero potentials, the minimum of λ_h along the path otherwise.
    #[serde(default)]
    pub lambda: Option<f64>,
}

fn default_geodesic_tol() -> f64 {
    1e-8
}
fn default_samples() -> usize {
    256
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    pub n: usize,
    pub potential: PotentialSpec,
    pub phi: PhiSpec,
    pub state: StateSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    #[serde(default = "default_draws")]
    pub draws: usize,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            draws: default_draws(),
        }
    }
}

fn default_draws() -> usize {
    100_000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyMeansConfig {
    #[serde(default = "default_mean_samples")]
    pub samples: usize,
}

impl Default for VerifyMeansConfig {
    fn default() -> Self {
        VerifyMeansConfig {
            samples: default_mean_samples(),
        }
    }
}

fn default_mean_samples() -> usize {
    10_000
}
