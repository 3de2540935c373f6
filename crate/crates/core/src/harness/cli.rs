//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::analysis::ClusterReport;
use crate::graph::{erdos_renyi, erdos_renyi_connected, GraphJson};

use super::{
    asset_text, emit_bifurcation_svg, emit_csv, epsilon_grid, list_assets, load_scenario,
    run_simulation, run_sweep, verify_report, HarnessError, RunOptions,
};

#[derive(Parser, Debug)]
#[command(
    name = "ds-consensus",
    version,
    about = "Bounded-confidence consensus among Dempster-Shafer agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and print the cluster report.
    Run {
        /// Scenario file or built-in asset name.
        #[arg(long)]
        scenario: String,
        /// Bound of confidence for every agent (defaults to the scenario's).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Directory for report.json (and trace.json with --trace).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record per-step opinions and retained edges.
        #[arg(long)]
        trace: bool,
    },
    /// Sweep the bound of confidence and write a bifurcation CSV and SVG.
    Sweep {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eps_min: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        eps_max: f64,
        #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
        eps_step: f64,
        /// Proposition to record, e.g. "1" or "2,3".
        #[arg(long, default_value = "1")]
        prop: String,
        /// Worker threads (default: all cores).
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the leader-chain consensus conditions on a run and print a JSON report.
    Verify {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Central groups as 1-based lists, e.g. "1" or "1;7" (default: the cautious agents).
        #[arg(long)]
        central: Option<String>,
    },
    /// Write an Erdős–Rényi graph with mutual links.
    GenGraph {
        /// Node count, edge probability and seed.
        #[arg(long, num_args = 3, value_names = ["N", "P", "SEED"], required = true)]
        er: Vec<String>,
        /// Regenerate with seed + 1, + 2, … until connected.
        #[arg(long)]
        connected: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in scenarios.
    Assets {
        #[command(subcommand)]
        action: AssetsAction,
    },
}

#[derive(Subcommand, Debug)]
enum AssetsAction {
    /// List scenario names.
    List,
    /// Print a scenario's JSON.
    Show { name: String },
}

/// Parse `argv` (including the program name), execute, and return the exit code.
pub fn run<I, T, O, E>(argv: I, out: &mut O, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_json<O: Write>(out: &mut O, value: &serde_json::Value) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    writeln!(out, "{text}").map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn execute<O: Write>(command: Command, out: &mut O) -> Result<(), HarnessError> {
    match command {
        Command::Run {
            scenario,
            epsilon,
            out: dir,
            trace,
        } => {
            let sc = load_scenario(&scenario)?;
            let options = RunOptions {
                trace,
                ..RunOptions::default()
            };
            let run = run_simulation(&sc, epsilon, &options)?;
            let report = json!({
                "scenario": sc.name,
                "engine": run.engine,
                "epsilon": run.epsilon,
                "leaders": sc.leaders.iter().map(|l| l + 1).collect::<Vec<_>>(),
                "cluster_count": run.report.cluster_count(),
                "report": one_based_report(&run.report),
            });
            if let Some(dir) = dir {
                create_dir(&dir)?;
                let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
                write_file(&dir.join("report.json"), text.as_bytes())?;
                if trace {
                    let text = serde_json::to_string(&run.trace).expect("serializable") + "\n";
                    write_file(&dir.join("trace.json"), text.as_bytes())?;
                }
            }
            write_json(out, &report)
        }
        Command::Sweep {
            scenario,
            eps_min,
            eps_max,
            eps_step,
            prop,
            parallel,
            out: dir,
        } => {
            let grid = epsilon_grid(eps_min, eps_max, eps_step)?;
            if parallel == Some(0) {
                return Err(HarnessError::InvalidSweep(
                    "--parallel must be at least 1".into(),
                ));
            }
            let sc = load_scenario(&scenario)?;
            let proposition = sc
                .frame
                .parse_proposition(&prop)
                .map_err(|e| HarnessError::InvalidSweep(e.to_string()))?;
            let result = run_sweep(&sc, &grid, proposition, parallel)?;
            create_dir(&dir)?;
            let csv_path = dir.join("sweep.csv");
            let svg_path = dir.join("sweep.svg");
            let mut csv = Vec::new();
            emit_csv(&result, &mut csv)?;
            write_file(&csv_path, &csv)?;
            let mut svg = Vec::new();
            emit_bifurcation_svg(&result, &mut svg)?;
            write_file(&svg_path, &svg)?;
            write_json(
                out,
                &json!({
                    "scenario": sc.name,
                    "points": result.points.len(),
                    "smallest_consensus_epsilon": result.smallest_consensus_epsilon(),
                    "min_cluster_count": result.min_cluster_count(),
                    "leaders": sc.leaders.iter().map(|l| l + 1).collect::<Vec<_>>(),
                    "csv": csv_path,
                    "svg": svg_path,
                }),
            )
        }
        Command::Verify {
            scenario,
            epsilon,
            central,
        } => {
            let sc = load_scenario(&scenario)?;
            let groups: Vec<Vec<usize>> = match central {
                Some(text) => parse_groups(&text, sc.agents.len())?,
                None => sc.leaders.iter().map(|&l| vec![l]).collect(),
            };
            let report = verify_report(&sc, epsilon, &groups)?;
            write_json(out, &report)
        }
        Command::GenGraph {
            er,
            connected,
            out: path,
        } => {
            let bad = |what: &str, v: &str| HarnessError::InvalidScenario {
                path: "er".into(),
                message: format!("bad {what} {v:?}"),
            };
            let n: usize = er[0].parse().map_err(|_| bad("node count", &er[0]))?;
            let p: f64 = er[1].parse().map_err(|_| bad("probability", &er[1]))?;
            let seed: u64 = er[2].parse().map_err(|_| bad("seed", &er[2]))?;
            let invalid = |e: crate::graph::GraphError| HarnessError::InvalidScenario {
                path: "er".into(),
                message: e.to_string(),
            };
            let graph = if connected {
                erdos_renyi_connected(n, p, seed).map_err(invalid)?.0
            } else {
                erdos_renyi(n, p, seed).map_err(invalid)?
            };
            let text =
                serde_json::to_string(&GraphJson::from(&graph)).expect("serializable") + "\n";
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                create_dir(parent)?;
            }
            write_file(&path, text.as_bytes())
        }
        Command::Assets { action } => match action {
            AssetsAction::List => {
                for name in list_assets() {
                    writeln!(out, "{name}").map_err(|e| io_err(Path::new("<stdout>"), e))?;
                }
                Ok(())
            }
            AssetsAction::Show { name } => {
                let (text, _) = asset_text(&name)?;
                out.write_all(text.as_bytes())
                    .map_err(|e| io_err(Path::new("<stdout>"), e))
            }
        },
    }
}

/// The cluster report with agent and cluster ids shifted to 1-based.
fn one_based_report(report: &ClusterReport) -> serde_json::Value {
    let mut value = json!(report);
    value["clusters"] = json!(report
        .clusters
        .iter()
        .map(|c| c.iter().map(|v| v + 1).collect::<Vec<_>>())
        .collect::<Vec<_>>());
    value["labels"] = json!(report.labels.iter().map(|l| l + 1).collect::<Vec<_>>());
    value
}

fn parse_groups(text: &str, n: usize) -> Result<Vec<Vec<usize>>, HarnessError> {
    let bad = |m: String| HarnessError::InvalidScenario {
        path: "central".into(),
        message: m,
    };
    text.split(';')
        .map(|group| {
            group
                .split(',')
                .map(|v| {
                    let v: usize = v
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad node {v:?}")))?;
                    if v == 0 || v > n {
                        return Err(bad(format!("node {v} outside 1..={n}")));
                    }
                    Ok(v - 1)
                })
                .collect()
        })
        .collect()
}
