//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage, configuration or validation
//! errors, 2 when the scenario (or the requested design) is infeasible.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{IsacError, Result};
use crate::harness::experiments::{run_experiment, ExperimentKind, RunConfig};
use crate::opt::ga::GaConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "haps-isac",
    version,
    about = "UAV/HAPS integrated sensing and communication optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run config, or a result envelope to rerun from its config echo
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// GA seed (overrides the config)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// GA preset
    #[arg(long, global = true, value_parser = ["desk", "paper"])]
    preset: Option<String>,

    /// Pareto weight for solve, trajectory and the proposed K-sweep mode
    #[arg(long, global = true)]
    mu: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Draw placements and write the resolved config
    Generate,
    /// Solve one problem instance
    Solve,
    /// Sweep the Pareto weight
    Pareto,
    /// Sweep the UAV power budget
    SweepPmax,
    /// Sweep the beampattern gain threshold
    SweepGamma,
    /// Sweep the number of CUs against the UAV-only baseline
    SweepK,
    /// Per-slot placement under a speed limit
    Trajectory,
    /// Run the model cross-checks
    Validate,
}

impl Command {
    fn kind(self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Generate => return None,
            Command::Solve => ExperimentKind::Single,
            Command::Pareto => ExperimentKind::Pareto,
            Command::SweepPmax => ExperimentKind::PmaxSweep,
            Command::SweepGamma => ExperimentKind::GammaSweep,
            Command::SweepK => ExperimentKind::KSweep,
            Command::Trajectory => ExperimentKind::Trajectory,
            Command::Validate => ExperimentKind::Validate,
        })
    }
}

fn exit_code(e: &IsacError) -> i32 {
    match e {
        IsacError::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_ERROR,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut run = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                IsacError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            RunConfig::from_json_or_envelope(&text)
                .map_err(|e| IsacError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.preset {
        run.ga = GaConfig::preset(p)?.with_seed(run.ga.seed);
    }
    if let Some(s) = cli.seed {
        run.ga.seed = s;
    }
    if let Some(mu) = cli.mu {
        if !(0.0..=1.0).contains(&mu) {
            return Err(IsacError::Config(format!("--mu must lie in [0, 1], got {mu}")));
        }
        run.sweep.mu = mu;
    }
    run.validate()?;
    Ok(run)
}

fn execute(cli: &Cli) -> Result<i32> {
    let run = load_config(cli)?;
    let Some(kind) = cli.command.kind() else {
        let resolved = run.resolved()?;
        std::fs::create_dir_all(&cli.out)?;
        let path = cli.out.join("scenario.json");
        std::fs::write(&path, serde_json::to_string_pretty(&resolved)?)?;
        println!("wrote {}", path.display());
        return Ok(EXIT_OK);
    };
    let result = run_experiment(kind, &run)?;
    let (csv, json) = result.write_to(&cli.out)?;
    println!(
        "{kind}: {} rows in {:.1} s, wrote {} and {}",
        result.rows.len(),
        result.wall_time,
        csv.display(),
        json.display()
    );
    let code = match kind {
        ExperimentKind::Validate if !result.all_passed() => {
            eprintln!("validation failed; see {}", csv.display());
            EXIT_ERROR
        }
        ExperimentKind::Single | ExperimentKind::Trajectory if !result.all_feasible() => {
            eprintln!("best design violates constraints");
            EXIT_INFEASIBLE
        }
        _ => EXIT_OK,
    };
    Ok(code)
}

/// Parse `args` (including the program name) and run. Returns the process
/// exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(cli_main(["haps-isac", "solve", "--bogus"]), EXIT_ERROR);
        assert_eq!(cli_main(["haps-isac"]), EXIT_ERROR);
        assert_eq!(cli_main(["haps-isac", "--help"]), EXIT_OK);
    }

    #[test]
    fn bad_mu_and_preset_are_rejected() {
        assert_eq!(cli_main(["haps-isac", "solve", "--mu", "1.5"]), EXIT_ERROR);
        assert_eq!(cli_main(["haps-isac", "solve", "--preset", "huge"]), EXIT_ERROR);
    }
}
