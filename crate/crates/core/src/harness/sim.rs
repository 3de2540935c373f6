use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    classify_odc, detect_clusters, max_step_delta, verify_theorem1, verify_theorem2, ClusterReport,
    ConvergenceMonitor, VerifierInput,
};
use crate::dst::{BodyOfEvidence, Proposition};
use crate::dynamics::{step_with, Engine, NetworkState};

use super::config::Scenario;
use super::HarnessError;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Keep opinions and pruned edges per step.
    pub trace: bool,
    /// Keep every `thin`-th traced step (0 or 1 keeps all).
    pub thin: usize,
    /// Keep the confidence matrices of the matrix engines.
    pub record_matrices: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub opinions: Vec<BodyOfEvidence>,
    /// Retained `(receiver, sender)` pairs, 0-based, used for this step.
    pub pruned_edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub epsilon: f64,
    pub engine: Engine,
    pub initial: Vec<BodyOfEvidence>,
    pub final_opinions: Vec<BodyOfEvidence>,
    pub report: ClusterReport,
    pub trace: Vec<TraceStep>,
    pub matrices: Vec<DMatrix<f64>>,
}

/// Iterate the scenario's engine until the opinions settle or the
/// iteration budget runs out. `epsilon` overrides every agent's bound.
pub fn run_simulation(
    scenario: &Scenario,
    epsilon: Option<f64>,
    options: &RunOptions,
) -> Result<RunResult, HarnessError> {
    if let Some(e) = epsilon {
        if !(0.0..=1.0).contains(&e) {
            return Err(HarnessError::InvalidScenario {
                path: "epsilon".into(),
                message: format!("{e} outside [0, 1]"),
            });
        }
    }
    let mut state = NetworkState::new(scenario.graph.clone(), scenario.agents.clone())?;
    if let Some(e) = epsilon {
        state = state.with_epsilon(e);
    }
    let reported_eps = epsilon.unwrap_or_else(|| scenario.agents[0].epsilon);
    let settings = &scenario.settings;
    let mut monitor = ConvergenceMonitor::new(settings.step_tol, settings.persistence);
    let initial = state.opinions().to_vec();
    let thin = options.thin.max(1);
    let mut trace = Vec::new();
    let mut matrices = Vec::new();
    let mut iterations = 0;
    while iterations < settings.max_iterations {
        let outcome = step_with(scenario.engine, &state, options.record_matrices)?;
        if options.trace && iterations % thin == 0 {
            trace.push(TraceStep {
                step: iterations,
                opinions: state.opinions().to_vec(),
                pruned_edges: outcome.pruned.edges().collect(),
            });
        }
        if options.record_matrices {
            if let Some(w) = outcome.matrix {
                matrices.push(w.matrix);
            }
        }
        let delta = max_step_delta(state.opinions(), outcome.state.opinions());
        state = outcome.state;
        iterations += 1;
        if monitor.observe(delta) {
            break;
        }
    }
    let final_opinions = state.opinions().to_vec();
    if options.trace {
        trace.push(TraceStep {
            step: iterations,
            opinions: final_opinions.clone(),
            pruned_edges: state.prune().edges().collect(),
        });
    }
    let mut report = detect_clusters(&final_opinions, settings.cluster_tol);
    report.converged = monitor.converged();
    report.iterations = iterations;
    Ok(RunResult {
        epsilon: reported_eps,
        engine: scenario.engine,
        initial,
        final_opinions,
        report,
        trace,
        matrices,
    })
}

/// Limits at one grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    /// Limit mass of the designated proposition, per agent.
    pub limit_mass: Vec<f64>,
    /// Cluster index per agent.
    pub cluster_ids: Vec<usize>,
    pub cluster_count: usize,
    pub consensus: bool,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BifurcationResult {
    pub scenario: String,
    /// Designated proposition in `"1,3"` notation.
    pub proposition: String,
    pub points: Vec<SweepPoint>,
}

impl BifurcationResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.epsilon).collect()
    }

    /// First grid value with a single cluster.
    pub fn smallest_consensus_epsilon(&self) -> Option<f64> {
        self.points.iter().find(|p| p.consensus).map(|p| p.epsilon)
    }

    pub fn min_cluster_count(&self) -> Option<usize> {
        self.points.iter().map(|p| p.cluster_count).min()
    }
}

/// `eps_min, eps_min + step, …` up to `eps_max`, each rounded to 1e-12 so
/// the values print cleanly.
pub fn epsilon_grid(eps_min: f64, eps_max: f64, eps_step: f64) -> Result<Vec<f64>, HarnessError> {
    let ok = (0.0..=1.0).contains(&eps_min)
        && (0.0..=1.0).contains(&eps_max)
        && eps_min <= eps_max
        && eps_step > 0.0
        && eps_step.is_finite();
    if !ok {
        return Err(HarnessError::InvalidSweep(format!(
            "need 0 <= eps-min <= eps-max <= 1 and eps-step > 0, got {eps_min}, {eps_max}, {eps_step}"
        )));
    }
    let count = ((eps_max - eps_min) / eps_step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((eps_min + k as f64 * eps_step) * 1e12).round() / 1e12)
        .collect())
}

/// Run the scenario at every grid point. Points are independent and run
/// on `workers` threads (all cores when `None`); results keep grid order.
pub fn run_sweep(
    scenario: &Scenario,
    grid: &[f64],
    proposition: Proposition,
    workers: Option<usize>,
) -> Result<BifurcationResult, HarnessError> {
    if !scenario.frame.contains(proposition) {
        return Err(HarnessError::InvalidSweep(format!(
            "proposition {proposition} outside the frame"
        )));
    }
    let point = |&eps: &f64| -> Result<SweepPoint, HarnessError> {
        let run = run_simulation(scenario, Some(eps), &RunOptions::default())?;
        Ok(SweepPoint {
            epsilon: eps,
            limit_mass: run
                .final_opinions
                .iter()
                .map(|o| o.mass(proposition))
                .collect(),
            cluster_ids: run.report.labels.clone(),
            cluster_count: run.report.cluster_count(),
            consensus: run.report.consensus,
            converged: run.report.converged,
            iterations: run.report.iterations,
        })
    };
    let points: Result<Vec<SweepPoint>, HarnessError> = match workers {
        Some(1) => grid.iter().map(point).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Runtime(e.to_string()))?
            .install(|| grid.par_iter().map(point).collect()),
        None => grid.par_iter().map(point).collect(),
    };
    Ok(BifurcationResult {
        scenario: scenario.name.clone(),
        proposition: scenario.frame.format_proposition(proposition),
        points: points?,
    })
}

/// Run the scenario with matrices recorded and check the one- or
/// two-group chain conditions against it. `groups` are 0-based central
/// node sets; the JSON report lists them 1-based.
pub fn verify_report(
    scenario: &Scenario,
    epsilon: Option<f64>,
    groups: &[Vec<usize>],
) -> Result<serde_json::Value, HarnessError> {
    if scenario.engine == Engine::General {
        return Err(HarnessError::EngineMismatch(
            "verify needs the pmf or dirichlet engine".into(),
        ));
    }
    if !(1..=2).contains(&groups.len()) {
        return Err(HarnessError::InvalidScenario {
            path: "central".into(),
            message: format!(
                "verify needs one or two central groups, found {}",
                groups.len()
            ),
        });
    }
    let options = RunOptions {
        record_matrices: true,
        ..RunOptions::default()
    };
    let run = run_simulation(scenario, epsilon, &options)?;
    let input = VerifierInput {
        matrices: &run.matrices,
        initial: &run.initial,
        observed: &run.final_opinions,
        cluster_tol: scenario.settings.cluster_tol,
    };
    let initial_split = run.matrices.first().map(|w| {
        classify_odc(w, groups)
            .map(|p| p.kind)
            .map_err(|e| e.to_string())
    });
    let one_based: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| g.iter().map(|v| v + 1).collect())
        .collect();
    let mut report = json!({
        "scenario": scenario.name,
        "engine": run.engine,
        "epsilon": run.epsilon,
        "central": one_based,
        "iterations": run.report.iterations,
        "converged": run.report.converged,
        "initial_classification": match initial_split {
            Some(Ok(kind)) => json!(kind),
            Some(Err(e)) => json!({ "error": e }),
            None => json!(null),
        },
    });
    if groups.len() == 1 {
        report["theorem1"] = json!(verify_theorem1(&groups[0], &input));
    } else {
        report["theorem2"] = json!(verify_theorem2([&groups[0], &groups[1]], &input));
    }
    Ok(report)
}
