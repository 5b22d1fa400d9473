use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use bohmsim_cli::{check_regime, emit_plot_data, exit_code, run_scenario, Mode, RunManifest};
use bohmsim_core::oracles::screen_oracles;
use bohmsim_core::{derive_kinematics, Error, Result, Scenario, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "bohmsim", about = "Two-particle double-slit simulator: trajectories and quadrature predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trajectory ensemble.
    Simulate(RunArgs),
    /// Compute quadrature predictions only.
    Predict(RunArgs),
    /// Run both and report divergences.
    Compare(RunArgs),
    /// Check the scenario's regime conditions.
    Validate(RunArgs),
    /// Print closed-form reference values.
    Oracles(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "fig1-entangled", value_parser = parse_scenario)]
    scenario: Scenario,
    /// JSON file overriding preset parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble size.
    #[arg(long)]
    n: Option<usize>,
    /// Keep only pairs detected on opposite sides of the axis.
    #[arg(long, value_enum)]
    selective: Option<OnOff>,
    /// Fail when a regime condition is not met.
    #[arg(long)]
    strict_regime: bool,
    #[arg(long, env = "BOHMSIM_OUT", default_value = "bohmsim-out")]
    out: PathBuf,
    /// Integrator tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Histogram bin width (defaults to the detector width).
    #[arg(long)]
    bin_width: Option<f64>,
    /// Write full paths of the first N trajectories.
    #[arg(long, default_value_t = 0)]
    dump_trajectories: usize,
}

fn parse_scenario(s: &str) -> std::result::Result<Scenario, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunArgs {
    fn manifest(&self) -> Result<RunManifest> {
        let mut m = RunManifest::preset(self.scenario);
        if let Some(path) = &self.config {
            m.apply_config_file(path)?;
        }
        if let Some(seed) = self.seed {
            m.source.rng_seed = seed;
        }
        if let Some(n) = self.n {
            m.n = n;
        }
        if let Some(s) = self.selective {
            m.selective = matches!(s, OnOff::On);
        }
        if let Some(tol) = self.tol {
            m.tol = tol;
        }
        m.strict_regime = self.strict_regime;
        m.out = self.out.clone();
        m.workers = self.workers;
        m.bin_width = self.bin_width;
        m.dump_trajectories = self.dump_trajectories;
        Ok(m)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => execute(&a, Mode::Simulate),
        Command::Predict(a) => execute(&a, Mode::Predict),
        Command::Compare(a) => execute(&a, Mode::Compare),
        Command::Validate(a) => {
            let m = a.manifest()?;
            m.validate()?;
            let findings = m.regime()?;
            for f in &findings {
                println!(
                    "{:<5} {:<28} ratio {:<12.6e} {}",
                    if f.satisfied { "ok" } else { "FAIL" },
                    f.name,
                    f.ratio,
                    f.condition
                );
            }
            check_regime(&m)?;
            Ok(())
        }
        Command::Oracles(a) => {
            let m = a.manifest()?;
            m.config.validate()?;
            let kin = derive_kinematics(&m.config)?;
            let reports = screen_oracles(&m.config, &kin, m.source.y0_mean);
            println!("{}", serde_json::to_string_pretty(&reports)?);
            Ok(())
        }
    }
}

fn execute(args: &RunArgs, mode: Mode) -> Result<()> {
    let manifest = args.manifest()?;
    let report = run_scenario(&manifest, mode)?;
    for f in report.summary.metadata.get("regime").and_then(|v| v.as_array()).into_iter().flatten() {
        if f["satisfied"] == false {
            eprintln!("warning: regime condition {} not met ({})", f["name"], f["condition"]);
        }
    }
    let files = emit_plot_data(&report, &manifest.out)?;
    let c = &report.summary.counts;
    if let Some(done) = c.get("completed") {
        eprintln!(
            "{} trajectories: {done} completed, {} aborted, {} selected",
            manifest.n,
            c.get("aborted").copied().unwrap_or(0),
            c.get("selected_pairs").copied().unwrap_or(0)
        );
    }
    for (name, d) in &report.summary.divergences {
        eprintln!("{name}: KS {:.4}, TV {:.4}, chi2 p {:.3e}", d.ks, d.total_variation, d.chi2_p_value);
    }
    eprintln!("wrote {} to {}", files.join(", "), manifest.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let version = format!("{} (output schema {SCHEMA_VERSION})", env!("CARGO_PKG_VERSION"));
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
