//! Batch runner: TOML experiment configurations in, JSON reports, CSV tables
//! and plot series out, one directory per configuration hash.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, run_dir, Command};
pub use config::{load_config, parse_config, ExperimentConfig, LoadedConfig};
pub use error::{CliError, Result, Stage};
pub use output::RunManifest;

/// Loads the configuration, runs `cmd`, and on a failure after loading also
/// leaves `error-<cmd>.json` in the run directory.
pub fn execute(cmd: Command, config: &std::path::Path, overrides: &[String]) -> Result<(LoadedConfig, RunManifest)> {
    let loaded = load_config(config, overrides)?;
    match run(cmd, &loaded) {
        Ok(m) => Ok((loaded, m)),
        Err(e) => {
            let dir = run_dir(&loaded);
            if dir.is_dir() {
                let mut text = serde_json::to_string_pretty(&e.to_json()).unwrap_or_default();
                text.push('\n');
                let _ = std::fs::write(dir.join(format!("error-{}.json", cmd.name())), text);
            }
            Err(e)
        }
    }
}
