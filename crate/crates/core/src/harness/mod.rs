//! Scenario files, the simulation driver, ε sweeps, random opinions and
//! CSV/SVG output.

mod assets;
pub mod cli;
mod config;
mod output;
mod sampling;
mod sim;

pub use assets::{asset_text, list_assets, ASSETS_ENV};
pub use config::{
    load_config, load_scenario, AgentConfig, EngineChoice, ErSpec, GraphSpec, LoadedConfig,
    PopulationConfig, RunSettings, Scenario, ScenarioConfig, Tolerances,
};
pub use output::{emit_bifurcation_svg, emit_csv, CSV_HEADER};
pub use sampling::{sample_boe, Sampler, SamplingKind, SamplingSpec};
pub use sim::{
    epsilon_grid, run_simulation, run_sweep, verify_report, BifurcationResult, RunOptions,
    RunResult, SweepPoint, TraceStep,
};

use crate::dynamics::DynamicsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("{origin}: parse error at `{path}`: {message}")]
    Parse {
        origin: String,
        path: String,
        message: String,
    },
    #[error("invalid scenario at `{path}`: {message}")]
    InvalidScenario { path: String, message: String },
    #[error("unknown scenario {0:?} (not a file or built-in asset)")]
    UnknownScenario(String),
    #[error("engine mismatch: {0}")]
    EngineMismatch(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    /// Process exit code: 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. }
            | HarnessError::InvalidScenario { .. }
            | HarnessError::UnknownScenario(_)
            | HarnessError::EngineMismatch(_)
            | HarnessError::InvalidSweep(_) => 1,
            HarnessError::Io { .. } | HarnessError::Dynamics(_) | HarnessError::Runtime(_) => 2,
        }
    }
}
