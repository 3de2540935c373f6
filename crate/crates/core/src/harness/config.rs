use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{CLUSTER_TOL, MAX_ITERATIONS, PERSISTENCE, STEP_TOL};
use crate::dst::{validate, BodyOfEvidence, BoeJson, FrameOfDiscernment};
use crate::dynamics::{AgentSpec, Engine, Strategy};
use crate::graph::{erdos_renyi_connected, DirectedGraph, GraphJson};

use super::sampling::SamplingSpec;
use super::{assets, HarnessError};

/// Scenario file schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub frame_size: usize,
    pub graph: GraphSpec,
    /// Explicit agents, one per node.
    #[serde(default)]
    pub agents: Vec<AgentConfig>,
    /// Alternative to `agents`: every node draws its opinion from one spec.
    #[serde(default)]
    pub population: Option<PopulationConfig>,
    #[serde(default)]
    pub engine: EngineChoice,
    /// Default self-weight.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Default bound of confidence.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_epsilon() -> f64 {
    0.5
}

fn default_max_iterations() -> usize {
    MAX_ITERATIONS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_persistence")]
    pub persistence: usize,
    #[serde(default = "default_cluster")]
    pub cluster: f64,
}

fn default_step() -> f64 {
    STEP_TOL
}

fn default_persistence() -> usize {
    PERSISTENCE
}

fn default_cluster() -> f64 {
    CLUSTER_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            step: STEP_TOL,
            persistence: PERSISTENCE,
            cluster: CLUSTER_TOL,
        }
    }
}

/// Exactly one of: inline `n` + `edges`, a `file`, or an `er` spec.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub er: Option<ErSpec>,
    /// Where the edge list comes from; informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErSpec {
    pub n: usize,
    pub p: f64,
    /// Defaults to the scenario seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Masses keyed by proposition (`"1"`, `"2,3"`, `"*"`).
    #[serde(default)]
    pub opinion: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub sample: Option<SamplingSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub sample: SamplingSpec,
    /// 1-based nodes that update cautiously.
    #[serde(default)]
    pub leaders: Vec<usize>,
    /// Additional cautious nodes drawn uniformly with the scenario seed.
    #[serde(default)]
    pub random_leaders: usize,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    General,
    Pmf,
    Dirichlet,
    #[default]
    Auto,
}

/// Iteration limits and tolerances for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub max_iterations: usize,
    pub step_tol: f64,
    pub persistence: usize,
    pub cluster_tol: f64,
}

/// A fully materialized scenario: graph generated, opinions drawn.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub frame: FrameOfDiscernment,
    pub graph: DirectedGraph,
    pub agents: Vec<AgentSpec>,
    pub engine: Engine,
    pub settings: RunSettings,
    /// 0-based cautious agents.
    pub leaders: Vec<usize>,
    /// Seed that produced the ER graph, when there is one.
    pub graph_seed: Option<u64>,
    pub seed: u64,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> HarnessError {
    HarnessError::InvalidScenario {
        path: path.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Parse {
            origin: origin.to_string(),
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    /// Build the scenario. Relative graph files resolve against `base_dir`.
    pub fn materialize(&self, base_dir: Option<&Path>) -> Result<Scenario, HarnessError> {
        let frame = FrameOfDiscernment::new(self.frame_size)
            .map_err(|e| invalid("frame_size", e.to_string()))?;
        check_unit("alpha", self.alpha)?;
        check_unit("epsilon", self.epsilon)?;
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be positive"));
        }
        let t = &self.tolerances;
        let positive = |x: f64| x > 0.0;
        if !positive(t.step) || !positive(t.cluster) || t.persistence == 0 {
            return Err(invalid("tolerances", "tolerances must be positive"));
        }
        let (graph, graph_seed) = self.build_graph(base_dir)?;
        let n = graph.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        let mut agents = Vec::with_capacity(n);
        let mut leaders = Vec::new();
        match (&self.population, self.agents.is_empty()) {
            (Some(_), false) => {
                return Err(invalid(
                    "population",
                    "give either `agents` or `population`, not both",
                ))
            }
            (None, true) => return Err(invalid("agents", "no agents given")),
            (None, false) => {
                if self.agents.len() != n {
                    return Err(invalid(
                        "agents",
                        format!("{} agents for a graph with {n} nodes", self.agents.len()),
                    ));
                }
                for (i, a) in self.agents.iter().enumerate() {
                    let path = format!("agents[{i}]");
                    let initial = match (&a.opinion, &a.sample) {
                        (Some(masses), None) => BoeJson {
                            frame_size: self.frame_size,
                            masses: masses.clone(),
                        }
                        .into_boe()
                        .map_err(|e| invalid(format!("{path}.opinion"), e.to_string()))?,
                        (None, Some(spec)) => spec
                            .sampler(&frame)
                            .map_err(|e| invalid(format!("{path}.sample"), e.to_string()))?
                            .sample(&mut rng),
                        _ => {
                            return Err(invalid(path, "needs exactly one of `opinion` or `sample`"))
                        }
                    };
                    let alpha = a.alpha.unwrap_or(self.alpha);
                    let epsilon = a.epsilon.unwrap_or(self.epsilon);
                    check_unit(&format!("{path}.alpha"), alpha)?;
                    check_unit(&format!("{path}.epsilon"), epsilon)?;
                    check_opinion(&format!("{path}.opinion"), &initial)?;
                    if a.strategy == Strategy::Cautious {
                        leaders.push(i);
                    }
                    agents.push(AgentSpec::new(a.strategy, alpha, epsilon, initial));
                }
            }
            (Some(pop), true) => {
                let sampler = pop
                    .sample
                    .sampler(&frame)
                    .map_err(|e| invalid("population.sample", e.to_string()))?;
                for _ in 0..n {
                    let initial = sampler.sample(&mut rng);
                    agents.push(AgentSpec::new(
                        Strategy::Receptive,
                        self.alpha,
                        self.epsilon,
                        initial,
                    ));
                }
                for (k, &l) in pop.leaders.iter().enumerate() {
                    if l == 0 || l > n || leaders.contains(&(l - 1)) {
                        return Err(invalid(
                            format!("population.leaders[{k}]"),
                            format!("bad node {l}"),
                        ));
                    }
                    leaders.push(l - 1);
                }
                let free: Vec<usize> = (0..n).filter(|v| !leaders.contains(v)).collect();
                if pop.random_leaders > free.len() {
                    return Err(invalid(
                        "population.random_leaders",
                        "more leaders than agents",
                    ));
                }
                let picked = sample(&mut rng, free.len(), pop.random_leaders);
                let mut extra: Vec<usize> = picked.iter().map(|k| free[k]).collect();
                extra.sort_unstable();
                leaders.extend(extra);
                leaders.sort_unstable();
                for &l in &leaders {
                    agents[l].strategy = Strategy::Cautious;
                }
            }
        }
        let engine = choose_engine(self.engine, &agents)?;
        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "scenario".into()),
            frame,
            graph,
            agents,
            engine,
            settings: RunSettings {
                max_iterations: self.max_iterations,
                step_tol: t.step,
                persistence: t.persistence,
                cluster_tol: t.cluster,
            },
            leaders,
            graph_seed,
            seed: self.seed,
        })
    }

    fn build_graph(
        &self,
        base_dir: Option<&Path>,
    ) -> Result<(DirectedGraph, Option<u64>), HarnessError> {
        let g = &self.graph;
        match (g.n, &g.edges, &g.file, &g.er) {
            (Some(n), edges, None, None) => {
                let json = GraphJson {
                    n,
                    edges: edges.clone().unwrap_or_default(),
                };
                let graph = json
                    .to_graph()
                    .map_err(|e| invalid("graph.edges", e.to_string()))?;
                Ok((graph, None))
            }
            (None, None, Some(file), None) => {
                let path = match base_dir {
                    Some(dir) if file.is_relative() => dir.join(file),
                    _ => file.clone(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                let de = &mut serde_json::Deserializer::from_str(&text);
                let json: GraphJson =
                    serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Parse {
                        origin: path.display().to_string(),
                        path: e.path().to_string(),
                        message: e.inner().to_string(),
                    })?;
                let graph = json
                    .to_graph()
                    .map_err(|e| invalid("graph.file", e.to_string()))?;
                Ok((graph, None))
            }
            (None, None, None, Some(er)) => {
                let seed = er.seed.unwrap_or(self.seed);
                let (graph, used) = erdos_renyi_connected(er.n, er.p, seed)
                    .map_err(|e| invalid("graph.er", e.to_string()))?;
                Ok((graph, Some(used)))
            }
            _ => Err(invalid(
                "graph",
                "give exactly one of `n`/`edges`, `file` or `er`",
            )),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn check_unit(path: &str, x: f64) -> Result<(), HarnessError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(path, format!("{x} outside [0, 1]")))
    }
}

fn check_opinion(path: &str, boe: &BodyOfEvidence) -> Result<(), HarnessError> {
    let r = validate(boe);
    if r.valid {
        Ok(())
    } else {
        Err(invalid(
            path,
            format!(
                "not a mass function (total {}, empty-set mass zero: {}, non-negative: {})",
                r.total_mass, r.empty_set_zero, r.non_negative
            ),
        ))
    }
}

fn choose_engine(choice: EngineChoice, agents: &[AgentSpec]) -> Result<Engine, HarnessError> {
    let reports: Vec<_> = agents.iter().map(|a| validate(&a.initial)).collect();
    let bayesian = reports.iter().all(|r| r.bayesian);
    let dirichlet = reports.iter().all(|r| r.dirichlet);
    match choice {
        EngineChoice::Auto if bayesian => Ok(Engine::Pmf),
        EngineChoice::Auto if dirichlet => Ok(Engine::Dirichlet),
        EngineChoice::Auto | EngineChoice::General => Ok(Engine::General),
        EngineChoice::Pmf if bayesian => Ok(Engine::Pmf),
        EngineChoice::Dirichlet if dirichlet => Ok(Engine::Dirichlet),
        EngineChoice::Pmf => Err(HarnessError::EngineMismatch(
            "pmf engine needs Bayesian opinions".into(),
        )),
        EngineChoice::Dirichlet => Err(HarnessError::EngineMismatch(
            "dirichlet engine needs Dirichlet opinions".into(),
        )),
    }
}

/// Load a scenario by file path or built-in asset name.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario, HarnessError> {
    load_config(name_or_path)?.materialize_from()
}

/// A parsed config together with the directory its relative paths use.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub base_dir: Option<PathBuf>,
}

impl LoadedConfig {
    pub fn materialize_from(&self) -> Result<Scenario, HarnessError> {
        self.config.materialize(self.base_dir.as_deref())
    }
}

pub fn load_config(name_or_path: &str) -> Result<LoadedConfig, HarnessError> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: name_or_path.into(),
            message: e.to_string(),
        })?;
        let mut config = ScenarioConfig::from_json(&text, name_or_path)?;
        if config.name.is_none() {
            config.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        return Ok(LoadedConfig {
            config,
            base_dir: path.parent().map(Path::to_path_buf),
        });
    }
    let (text, base_dir) = assets::asset_text(name_or_path)?;
    let mut config = ScenarioConfig::from_json(&text, name_or_path)?;
    if config.name.is_none() {
        config.name = Some(name_or_path.to_string());
    }
    Ok(LoadedConfig { config, base_dir })
}
