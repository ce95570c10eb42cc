use clap::{Parser, Subcommand};
use fraclap::{execute, run_dir, Command};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "fraclap", version, about = "Spectral fractional Laplacian experiments with mixed boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set domain.cells=[32]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Discrete mixed eigenpairs.
    Eig(Common),
    /// Apply the fractional operator to a combination of eigenmodes.
    FracApply(Common),
    /// Check the extension realization against the spectral one.
    ExtendCheck(Common),
    /// Minimize the critical quotient at one lambda.
    Minimize(Common),
    /// Minimize over a grid of lambdas.
    SweepLambda(Common),
    /// Shrink the Dirichlet part and track the first eigenvalue.
    MoveBoundary(Common),
    /// Sobolev constants, extension constant and concentration threshold.
    Constants(Common),
    /// Pohozaev identity audit under mesh refinement.
    Pohozaev(Common),
}

fn main() {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Sub::Eig(c) => (Command::Eig, c),
        Sub::FracApply(c) => (Command::FracApply, c),
        Sub::ExtendCheck(c) => (Command::ExtendCheck, c),
        Sub::Minimize(c) => (Command::Minimize, c),
        Sub::SweepLambda(c) => (Command::SweepLambda, c),
        Sub::MoveBoundary(c) => (Command::MoveBoundary, c),
        Sub::Constants(c) => (Command::Constants, c),
        Sub::Pohozaev(c) => (Command::Pohozaev, c),
    };
    match execute(cmd, &common.config, &common.set) {
        Ok((loaded, manifest)) => {
            let out = json!({
                "status": "ok",
                "subcommand": manifest.subcommand,
                "run_dir": run_dir(&loaded).display().to_string(),
                "manifest": format!("manifest-{}.json", cmd.name()),
                "artifacts": manifest.artifacts.iter().map(|a| &a.file).collect::<Vec<_>>(),
            });
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&out).expect("status serializes"));
        }
        Err(e) => {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&e.to_json()).expect("error serializes"));
            eprintln!("fraclap: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
