use std::path::PathBuf;

use super::HarnessError;

/// Overrides the built-in scenario directory.
pub const ASSETS_ENV: &str = "DS_CONSENSUS_ASSETS";

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../assets/", $name, ".json")))),*]
    };
}

const BUILTIN: &[(&str, &str)] = builtin!(
    "fig3a-pmf",
    "fig4a-pmf",
    "fig5a-pmf",
    "fig6a-pmf",
    "fig3a-dirichlet",
    "fig4a-dirichlet",
    "fig5a-dirichlet",
    "fig6a-dirichlet",
    "er100-pmf",
    "er100-pmf-1leader",
    "er100-pmf-2leaders",
    "dst7",
    "dst7-1leader",
    "dst7-2leaders",
    "table1-dst",
);

const ALIASES: &[(&str, &str)] = &[("dirichlet-7", "fig3a-dirichlet")];

fn resolve(name: &str) -> &str {
    let name = name.strip_suffix(".json").unwrap_or(name);
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == name)
        .map_or(name, |(_, target)| target)
}

/// Scenario JSON for an asset name, and the directory it lives in when it
/// came from the override directory.
pub fn asset_text(name: &str) -> Result<(String, Option<PathBuf>), HarnessError> {
    let name = resolve(name);
    if let Some(dir) = std::env::var_os(ASSETS_ENV) {
        let dir = PathBuf::from(dir);
        let path = dir.join(format!("{name}.json"));
        if path.is_file() {
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            return Ok((text, Some(dir)));
        }
    }
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| (text.to_string(), None))
        .ok_or_else(|| HarnessError::UnknownScenario(name.to_string()))
}

/// Built-in names plus any `*.json` in the override directory.
pub fn list_assets() -> Vec<String> {
    let mut names: Vec<String> = BUILTIN.iter().map(|(n, _)| n.to_string()).collect();
    names.extend(ALIASES.iter().map(|(a, _)| a.to_string()));
    if let Some(dir) = std::env::var_os(ASSETS_ENV) {
        if let Ok(entries) = std::fs::read_dir(dir) {
            for e in entries.flatten() {
                let p = e.path();
                if p.extension().is_some_and(|x| x == "json") {
                    if let Some(stem) = p.file_stem() {
                        names.push(stem.to_string_lossy().into_owned());
                    }
                }
            }
        }
    }
    names.sort();
    names.dedup();
    names
}
