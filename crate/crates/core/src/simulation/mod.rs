//! Finite-population Monte Carlo experiments under misspecified working models.

mod boxplot;
mod config;
mod monte_carlo;
mod population;
mod sweep;

pub use boxplot::{summarize_boxplot, BoxplotSummary};
pub use config::{GammaConvention, LognormalConvention, ScenarioConfig, TrueModel};
pub use monte_carlo::{run_custom, run_scenario, EstimatorReport, MCReport, ReplicateDraw};
pub use population::{draw_survey, generate_population};
pub use sweep::{bias_sweep, SweepMode, SweepPoint, DEFAULT_DELTAS};

/// Phase component of replicate stream labels.
pub(crate) const PHASE_POPULATION: u64 = 0;
pub(crate) const PHASE_SAMPLING: u64 = 1;
