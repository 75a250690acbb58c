use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tomo_cli::report::{CovarianceChoice, SPathChoice};
use tomo_cli::simulate::{named_state, state_from_report, STATE_NAMES};
use tomo_cli::{
    analyze, emit, emit_validation, ingest, validate, write_counts, AnalysisOptions, Format,
    IngestError, ValidationOptions,
};
use tomo_core::synthetic::generate_counts;
use tomo_core::{GeneratorConfig, NoiseMode, OptimizerOptions, TomographySet};

/// Two-qubit polarization tomography from coincidence counts
#[derive(Parser)]
#[command(name = "tomo-kit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct a state from a counts file and report measures with error bars
    Reconstruct(ReconstructArgs),
    /// Write a synthetic counts file drawn from a known state
    Simulate(SimulateArgs),
    /// Check the analytic error bars of a dataset against Monte Carlo spreads
    Validate(ValidateArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Skip the maximum-likelihood fit
    #[arg(long)]
    linear_only: bool,
    /// RMS waveplate setting error in degrees [default: 0.25]
    #[arg(long)]
    delta_theta_deg: Option<f64>,
    #[arg(long, default_value_t = OptimizerOptions::default().max_evals)]
    max_evals: usize,
    #[arg(long, default_value_t = OptimizerOptions::default().rel_tol)]
    rel_tol: f64,
    #[arg(long, default_value_t = OptimizerOptions::default().param_tol)]
    param_tol: f64,
    /// Include the covariance introduced by normalizing with measured counts
    #[arg(long)]
    exact_covariance: bool,
    /// Source of the s parameters entering the error bars
    #[arg(long, value_enum, default_value_t = SPathArg::Estimated)]
    s_path: SPathArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SPathArg {
    Estimated,
    Counts,
}

#[derive(Args)]
struct ReconstructArgs {
    /// CSV with columns nu,label,h1_deg,q1_deg,h2_deg,q2_deg,count
    input: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
    /// Append a Monte Carlo error-bar check with this many trials
    #[arg(long, value_name = "N")]
    mc_validate: Option<u64>,
    #[arg(long, default_value_t = 0.15)]
    mc_tolerance: f64,
}

#[derive(Args)]
struct ValidateArgs {
    input: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
    /// Number of simulated datasets
    #[arg(
        long = "mc-validate",
        visible_alias = "trials",
        value_name = "N",
        default_value_t = 1000
    )]
    trials: u64,
    /// Allowed relative deviation of each spread from its prediction
    #[arg(long, default_value_t = 0.15)]
    tolerance: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Noiseless,
    Poisson,
    Jitter,
}

#[derive(Args)]
struct SimulateArgs {
    /// One of: hh, vv, dd, phi-plus, phi-minus, psi-plus, psi-minus, mixed, werner:P
    #[arg(
        long,
        conflicts_with = "from_report",
        required_unless_present = "from_report"
    )]
    state: Option<String>,
    /// Use the estimate saved in a JSON report
    #[arg(long)]
    from_report: Option<PathBuf>,
    /// Expected counts summed over a complete basis
    #[arg(long, default_value_t = 10_000.0)]
    flux: f64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Poisson)]
    noise: NoiseArg,
    #[arg(long, default_value_t = 0.25)]
    delta_theta_deg: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl FitArgs {
    fn options(&self, mc_validate: Option<u64>, mc_tolerance: f64) -> AnalysisOptions {
        AnalysisOptions {
            linear_only: self.linear_only,
            delta_theta_deg: self.delta_theta_deg,
            max_evals: self.max_evals,
            rel_tol: self.rel_tol,
            param_tol: self.param_tol,
            s_path: match self.s_path {
                SPathArg::Estimated => SPathChoice::Estimated,
                SPathArg::Counts => SPathChoice::Counts,
            },
            covariance: if self.exact_covariance {
                CovarianceChoice::Exact
            } else {
                CovarianceChoice::Approximate
            },
            mc_validate,
            seed: self.seed,
            mc_tolerance,
        }
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn reconstruct(args: &ReconstructArgs) -> anyhow::Result<ExitCode> {
    let data = ingest(&args.input)?;
    let opts = args.fit.options(args.mc_validate, args.mc_tolerance);
    let report = analyze(&data, &opts)?;
    write_out(
        args.fit.output.as_deref(),
        emit(&report, args.fit.format).as_bytes(),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn run_validate(args: &ValidateArgs) -> anyhow::Result<ExitCode> {
    let data = ingest(&args.input)?;
    let mut opts = args.fit.options(None, args.tolerance);
    opts.mc_validate = None;
    let report = analyze(&data, &opts)?;
    let est = match &report.mle {
        Some(m) => m.rho.to_complex_matrix(),
        None => report.linear.rho.to_complex_matrix(),
    }
    .context("estimate has inconsistent dimensions")?;
    let rho = tomo_core::DensityMatrix::new(est.hermitian_part())?;
    if !rho.is_physical() {
        anyhow::bail!(
            "the estimate is not physical (min eigenvalue {:.3e}); drop --linear-only",
            rho.min_eigenvalue()
        );
    }
    let mut record = data.record.clone();
    if let Some(deg) = args.fit.delta_theta_deg {
        record = record.with_delta_theta(deg.to_radians())?;
    }
    let vopts = ValidationOptions {
        trials: args.trials,
        seed: args.fit.seed,
        covariance: opts.covariance.into(),
        tolerance: args.tolerance,
        mle: !args.fit.linear_only,
        optimizer: opts.optimizer(),
    };
    let v = validate(&rho, &record, &data, &vopts)?;
    write_out(
        args.fit.output.as_deref(),
        emit_validation(&v, args.fit.format).as_bytes(),
    )?;
    Ok(if v.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<ExitCode> {
    let rho = match (&args.state, &args.from_report) {
        (_, Some(path)) => state_from_report(path)?,
        (Some(name), None) => named_state(name)?,
        (None, None) => anyhow::bail!("give --state ({STATE_NAMES}) or --from-report"),
    };
    let set = TomographySet::table1();
    let cfg = GeneratorConfig {
        rho_true: rho,
        total_flux: args.flux,
        delta_theta: args.delta_theta_deg.to_radians(),
        noise_mode: match args.noise {
            NoiseArg::Noiseless => NoiseMode::Noiseless,
            NoiseArg::Poisson => NoiseMode::Poisson,
            NoiseArg::Jitter => NoiseMode::PoissonPlusJitter,
        },
        seed: args.seed,
    };
    let record = generate_counts(&cfg, &set)?;
    let labels: Vec<String> = set.states.iter().map(|s| s.label.clone()).collect();
    let mut buf = Vec::new();
    write_counts(&mut buf, &record, &labels)?;
    write_out(args.output.as_deref(), &buf)?;
    Ok(ExitCode::SUCCESS)
}

fn format_of(cli: &Cli) -> Format {
    match &cli.command {
        Command::Reconstruct(a) => a.fit.format,
        Command::Validate(a) => a.fit.format,
        Command::Simulate(_) => Format::Text,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Reconstruct(a) => reconstruct(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => run_validate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if format_of(&cli) == Format::Json {
                let (line, column) = e
                    .downcast_ref::<IngestError>()
                    .map_or((None, None), |ie| ie.location());
                let doc = json!({
                    "schema": "tomo-error/1",
                    "error": format!("{e:#}"),
                    "line": line,
                    "column": column,
                });
                println!("{doc:#}");
            }
            ExitCode::FAILURE
        }
    }
}
