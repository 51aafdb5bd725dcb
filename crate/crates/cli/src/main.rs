use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use energy_pile_cli::commands::{self, SolverChoice};
use energy_pile_cli::scenario::{Model, Scenario};
use energy_pile_cli::{cases, observations, CliError, Result};

/// Thermo-mechanical response of a single energy pile.
#[derive(Debug, Parser)]
#[command(name = "energy-pile", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Load case name from the scenario.
    #[arg(long, global = true)]
    case: Option<String>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `k_b_mpa_per_m=VALUE|rigid` or `k_s_mpa_per_m.LAYER=VALUE`; repeatable.
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
    /// Which analytic solver to use.
    #[arg(long, global = true, value_enum, default_value_t)]
    solver: SolverChoice,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Export the response profile as CSV.
    Solve {
        /// Samples per layer, ends included; defaults to the scenario's.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Print a shipped scenario.
    Cases {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(cases::NAMES))]
        name: String,
    },
    /// Report the thermal null point and the zeros under the full load.
    NullPoint,
    /// Head displacement for a list of temperature changes.
    Sweep {
        /// Comma-separated temperature changes in degrees C.
        #[arg(long = "delta-t", value_delimiter = ',', allow_hyphen_values = true, required = true)]
        delta_t: Vec<f64>,
    },
    /// Compare the analytic solution with the finite-difference oracle.
    OracleCheck {
        /// Grid nodes.
        #[arg(long, default_value_t = 8192)]
        n: usize,
        /// Largest accepted relative discrepancy.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Fit spring stiffnesses to observations.
    Calibrate {
        /// CSV with columns kind,x_m,value_si,weight,case_tag.
        #[arg(long)]
        observations: PathBuf,
        /// `k_b=LO:HI` or `k_s.LAYER=LO:HI` in MPa/m; repeatable.
        #[arg(long = "free", required = true)]
        free: Vec<String>,
        /// Parameter tolerance in MPa/m.
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long, default_value_t = 500)]
        max_evals: usize,
        /// Write every evaluation to this CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

impl Global {
    fn model(&self) -> Result<Model> {
        let path = self
            .scenario
            .as_ref()
            .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
        let mut scenario = Scenario::read(path)?;
        for o in &self.overrides {
            scenario.apply_override(o)?;
        }
        scenario.model(&path.display().to_string())
    }

    fn scenario(&self) -> Result<Scenario> {
        let path = self
            .scenario
            .as_ref()
            .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
        Scenario::read(path)
    }

    fn case(&self) -> Result<&str> {
        self.case
            .as_deref()
            .ok_or_else(|| CliError::Usage("--case is required".into()))
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => commands::write_file(path, text),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                }),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Solve { samples } => {
            let model = g.model()?;
            let per_layer = samples.unwrap_or(g.scenario()?.output.samples_per_layer);
            g.emit(&commands::solve(&model, g.case()?, g.solver, per_layer)?)
        }
        Command::Cases { name } => g.emit(cases::shipped(&name).expect("validated by clap")),
        Command::NullPoint => g.emit(&commands::null_point(&g.model()?, g.case()?, g.solver)?),
        Command::Sweep { delta_t } => g.emit(&commands::sweep(&g.model()?, g.case()?, g.solver, &delta_t)?),
        Command::OracleCheck { n, tolerance } => {
            let report = commands::oracle_check(&g.model()?, g.case()?, g.solver, n, tolerance)?;
            g.emit(&report.text)?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Verification(format!(
                    "discrepancy {:e} exceeds {tolerance:e}",
                    report.discrepancy.max()
                )))
            }
        }
        Command::Calibrate {
            observations,
            free,
            tolerance,
            max_evals,
            trace,
        } => {
            let model = g.model()?;
            let obs = observations::read(&observations)?;
            let free = free
                .iter()
                .map(|f| commands::parse_free(f, &model))
                .collect::<Result<Vec<_>>>()?;
            let result = commands::calibrate(&model, obs, free.clone(), tolerance, max_evals)?;
            if let Some(path) = trace {
                commands::write_file(&path, &commands::trace_csv(&result, &free, &model)?)?;
            }
            g.emit(&commands::fit_report(&result, &free, &model))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
