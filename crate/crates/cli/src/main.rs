//! `movant`: run sum-rate sweeps and export layouts or channel drops.
//!
//! Exit codes: 0 success, 2 bad configuration or arguments, 3 runtime failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use movant_core::channel::format_paths;
use movant_core::experiment::{self, ExperimentSpec, Profile, ResultTable, Strategy};
use movant_core::geometry::format_layout;
use movant_core::scenario::{generate_drop, ScenarioKind};
use movant_core::Error;

#[derive(Parser)]
#[command(name = "movant", version, about = "Wideband multi-user MIMO with movable antennas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sum rate versus number of subcarriers.
    Subcarriers(SweepArgs),
    /// Sum rate versus EVM at fixed total power.
    Evm(SweepArgs),
    /// Sum rate versus total transmit power at fixed EVM.
    Power(SweepArgs),
    /// Write an antenna layout (fixed baselines or the optimised array of one drop).
    Layout(LayoutArgs),
    /// Write the multipath table of one drop.
    Scenario(ScenarioArgs),
    /// Print the effective configuration of a sweep as TOML.
    Config(ConfigArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Full,
    Smoke,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Los,
    Nlos,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Subcarriers,
    Evm,
    Power,
}

#[derive(Args)]
struct Common {
    /// TOML file whose keys override the built-in preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for drops and swarm.
    #[arg(long)]
    seed: Option<u64>,
    /// Swarm size preset.
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
    /// Propagation environment.
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated strategies (movable, sparse_upa, sparse_ula, compact_upa, interference_free).
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    /// Number of drops.
    #[arg(long)]
    drops: Option<usize>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
}

#[derive(Args)]
struct LayoutArgs {
    #[command(flatten)]
    common: Common,
    /// Array to export.
    #[arg(long, default_value = "sparse_upa")]
    strategy: String,
    /// Drop whose channel the movable array is optimised for.
    #[arg(long, default_value_t = 0)]
    drop: usize,
    /// Index into the sweep grid selecting S, EVM or power for the optimisation.
    #[arg(long, default_value_t = 0)]
    point: usize,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    drop: usize,
}

#[derive(Args)]
struct ConfigArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "subcarriers")]
    sweep: SweepKind,
}

fn load_spec(preset: ExperimentSpec, common: &Common) -> Result<ExperimentSpec, Error> {
    let mut spec = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            ExperimentSpec::from_toml_over(&preset, &text)?
        }
        None => preset,
    };
    if let Some(s) = common.scenario {
        let kind = match s {
            ScenarioArg::Los => ScenarioKind::LosDominant,
            ScenarioArg::Nlos => ScenarioKind::RichNlos,
        };
        let seed = spec.scenario.seed;
        spec.scenario =
            movant_core::scenario::ScenarioConfig { seed, ..movant_core::scenario::ScenarioConfig::for_kind(kind) };
    }
    if let Some(seed) = common.seed {
        spec = spec.with_seed(seed);
    }
    if let Some(p) = common.profile {
        spec = spec.with_profile(match p {
            ProfileArg::Full => Profile::Full,
            ProfileArg::Smoke => Profile::Smoke,
        });
    }
    Ok(spec)
}

fn sweep_spec(kind: SweepKind, args: &SweepArgs) -> Result<ExperimentSpec, Error> {
    let mut spec = load_spec(preset(kind), &args.common)?;
    if let Some(names) = &args.strategies {
        spec.strategies = names.iter().map(|n| Strategy::parse(n)).collect::<Result<_, _>>()?;
    }
    if let Some(d) = args.drops {
        spec.drops = d;
    }
    if let Some(v) = &args.values {
        spec.sweep.values = v.clone();
    }
    Ok(spec)
}

fn preset(kind: SweepKind) -> ExperimentSpec {
    match kind {
        SweepKind::Subcarriers => ExperimentSpec::subcarrier_sweep(ScenarioKind::LosDominant),
        SweepKind::Evm => ExperimentSpec::evm_sweep(),
        SweepKind::Power => ExperimentSpec::power_sweep(),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn run_sweep(kind: SweepKind, args: &SweepArgs) -> Result<(), Error> {
    let spec = sweep_spec(kind, args)?;
    let table: ResultTable = match kind {
        SweepKind::Subcarriers => experiment::sweep_subcarriers(&spec)?,
        SweepKind::Evm => experiment::sweep_evm(&spec)?,
        SweepKind::Power => experiment::sweep_power(&spec)?,
    };
    emit(args.common.out.as_deref(), &table.to_csv())?;
    if let Some(path) = &args.common.out {
        eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
    }
    Ok(())
}

fn run_layout(args: &LayoutArgs) -> Result<(), Error> {
    let spec = load_spec(preset(SweepKind::Subcarriers), &args.common)?;
    spec.validate()?;
    let layout = match Strategy::parse(&args.strategy)? {
        Strategy::Movable | Strategy::InterferenceFree => {
            let result = experiment::optimize_drop(&spec, args.drop, args.point)?;
            eprintln!("optimised sum rate {:.4} bit/s/Hz", result.trace.best_value);
            result.layout
        }
        fixed => spec.system.baseline(fixed)?.expect("fixed strategies have a layout"),
    };
    emit(args.common.out.as_deref(), &format_layout(&layout))
}

fn run_scenario(args: &ScenarioArgs) -> Result<(), Error> {
    let spec = load_spec(preset(SweepKind::Subcarriers), &args.common)?;
    spec.scenario.validate()?;
    let (_, paths) = generate_drop(&spec.scenario, args.drop as u64)?;
    emit(args.common.out.as_deref(), &format_paths(&paths))
}

fn run_config(args: &ConfigArgs) -> Result<(), Error> {
    let spec = load_spec(preset(args.sweep), &args.common)?;
    spec.validate()?;
    emit(args.common.out.as_deref(), &spec.to_toml())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Subcarriers(a) => run_sweep(SweepKind::Subcarriers, a),
        Command::Evm(a) => run_sweep(SweepKind::Evm, a),
        Command::Power(a) => run_sweep(SweepKind::Power, a),
        Command::Layout(a) => run_layout(a),
        Command::Scenario(a) => run_scenario(a),
        Command::Config(a) => run_config(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
