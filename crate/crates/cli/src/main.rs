use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xy_magnon::experiments::{
    run_concurrence_timing, run_delta_heatmap, run_gaussian_heatmap, run_open_chain_concurrence,
    run_truncation_scan, simulate, ConcurrenceTimingParams, DeltaHeatmapParams, Dynamics, ExperimentReport,
    ExperimentSpec, GaussianHeatmapParams, InitialState, Observable, OpenChainParams, OutputFormat, TimeGrid,
    TruncationScanParams,
};
use xy_magnon::lattice::{build_couplings, HoppingSign, Topology, TopologyKind, Truncation};
use xy_magnon::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_CROSSCHECK: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

#[derive(Parser)]
#[command(name = "xy-magnon", version, about = "Single-magnon dynamics on 1/r^2 XY rings and chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the coupling profile as JSON.
    Profile(ProfileArgs),
    /// Evolve one initial state and record observables.
    Simulate(Box<SimulateArgs>),
    /// Re-run a named experiment and print PASS/FAIL per check.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(short = 'N', long = "sites")]
    sites: usize,
    #[arg(long, default_value = "full")]
    r0: Truncation,
    #[arg(long, default_value = "exact-linear")]
    sign: HoppingSign,
    #[arg(long, default_value = "ring")]
    topology: TopologyKind,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory; defaults to $XY_MAGNON_OUT, then ./xy-magnon-out.
    #[arg(long, env = "XY_MAGNON_OUT", default_value = "xy-magnon-out")]
    output: PathBuf,
    #[arg(long, default_value = "csv")]
    format: FormatArg,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Replay the spec stored in a manifest.json; other spec flags are ignored.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    #[arg(long, default_value = "ring")]
    topology: TopologyKind,
    #[arg(short = 'N', long = "sites", required_unless_present = "from_manifest")]
    sites: Option<usize>,
    /// Truncation distances, comma separated ("full" allowed).
    #[arg(long, value_delimiter = ',', default_value = "full")]
    r0: Vec<Truncation>,
    #[arg(long, default_value = "exact-linear")]
    sign: HoppingSign,
    #[arg(long, default_value = "couplings")]
    dynamics: Dynamics,
    /// delta:S | gaussian:S:ALPHA | symmetric:C:even|odd:F0,F1,...
    #[arg(long, required_unless_present = "from_manifest")]
    initial: Option<InitialState>,
    /// start:stop:step
    #[arg(long, default_value = "0:6.283185307179586:0.015707963267948967")]
    times: TimeGrid,
    /// probability | autocorrelation | concurrence:I:J | profile:C (repeatable).
    #[arg(long = "observe", required_unless_present = "from_manifest")]
    observe: Vec<Observable>,
    #[arg(long, default_value = "simulate")]
    name: String,
    #[arg(long)]
    no_crosscheck: bool,
    /// Recorded in the manifest but unused: the dynamics are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Timing,
}

#[derive(Args)]
struct ReproduceArgs {
    target: Target,
    /// System size(s); fig5 accepts several.
    #[arg(short = 'N', long = "sites", value_delimiter = ',')]
    sites: Vec<usize>,
    /// Mirror-pair offsets for `timing`.
    #[arg(short = 'j', value_delimiter = ',')]
    offsets: Vec<usize>,
    /// Add the N = 1500 and 2000 points to fig5.
    #[arg(long)]
    extended: bool,
    #[command(flatten)]
    out: OutputArgs,
}

enum Failure {
    Usage(String),
    CrossCheck(String),
    Acceptance,
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CrossCheck { .. } => Failure::CrossCheck(e.to_string()),
            Error::Io(msg) => Failure::Other(msg),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

/// Stdout writer that tolerates a closed pipe (`| head`).
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn cmd_profile(args: &ProfileArgs) -> Result<(), Failure> {
    let topology = Topology::new(args.topology, args.sites)?;
    let profile = build_couplings(topology, args.r0, args.sign)?;
    let json = profile.to_json();
    match &args.output {
        Some(path) => fs::write(path, json + "\n")?,
        None => emit(&(json + "\n")),
    }
    Ok(())
}

fn load_manifest_spec(path: &Path) -> Result<ExperimentSpec, Failure> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let spec = value.get("spec").cloned().unwrap_or(value);
    serde_json::from_value(spec).map_err(|e| Failure::Usage(format!("{}: not a simulate manifest: {e}", path.display())))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let mut spec = match &args.from_manifest {
        Some(path) => load_manifest_spec(path)?,
        None => ExperimentSpec {
            name: args.name.clone(),
            topology: args.topology,
            sites: args.sites.expect("clap enforces -N"),
            truncations: args.r0.clone(),
            sign: args.sign,
            dynamics: args.dynamics,
            initial: args.initial.clone().expect("clap enforces --initial"),
            times: args.times,
            observables: args.observe.clone(),
            seed: args.seed,
            crosscheck: !args.no_crosscheck,
            output_dir: None,
        },
    };
    if args.no_crosscheck {
        spec.crosscheck = false;
    }
    spec.output_dir = Some(args.out.output.clone());
    let report = simulate(&spec, args.out.workers)?;
    for check in &report.checks {
        eprintln!("{}", check.line());
    }
    let dir = report.write(&args.out.output, args.out.format.into())?;
    emit(&format!("{}\n", dir.display()));
    Ok(())
}

fn print_table(report: &ExperimentReport, table: &str) {
    let series = if table == "data" {
        Some(&report.data)
    } else {
        report.extra.iter().find(|(n, _)| n == table).map(|(_, s)| s)
    };
    if let Some(s) = series {
        emit(&s.to_csv_string());
    }
}

fn single_size(sites: &[usize], default: usize) -> Result<usize, Failure> {
    match sites {
        [] => Ok(default),
        [n] => Ok(*n),
        _ => Err(Failure::Usage("this target takes a single -N".into())),
    }
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<(), Failure> {
    let workers = args.out.workers;
    let report = match args.target {
        Target::Fig3 => {
            let d = DeltaHeatmapParams::default();
            let sites = single_size(&args.sites, d.sites)?;
            run_delta_heatmap(&DeltaHeatmapParams { sites, origin: sites / 2, ..d }, workers)?
        }
        Target::Fig4 => {
            let d = GaussianHeatmapParams::default();
            let sites = single_size(&args.sites, d.sites)?;
            run_gaussian_heatmap(&GaussianHeatmapParams { sites, center: sites / 2, ..d }, workers)?
        }
        Target::Fig5 => {
            let mut params = TruncationScanParams::default();
            if !args.sites.is_empty() {
                params.sizes = args.sites.clone();
            }
            if args.extended {
                params.sizes.extend([1500, 2000]);
            }
            let report = run_truncation_scan(&params, workers)?;
            print_table(&report, "data");
            report
        }
        Target::Fig6 => {
            let d = OpenChainParams::default();
            let sites = single_size(&args.sites, d.sites)?;
            let params = if sites == d.sites {
                d
            } else {
                // keep the reference geometry: pair at 2N/5 from the centre,
                // reference truncation N/2
                let reference = Truncation::Distance(sites / 2);
                let mut truncations: Vec<Truncation> = d
                    .truncations
                    .iter()
                    .copied()
                    .filter(|t| *t != d.reference)
                    .collect();
                truncations.push(reference);
                OpenChainParams {
                    sites,
                    half_separation: 2 * sites / 5,
                    launch: sites / 2,
                    truncations,
                    reference,
                    ..d
                }
            };
            let report = run_open_chain_concurrence(&params, workers)?;
            print_table(&report, "peaks");
            report
        }
        Target::Timing => {
            let d = ConcurrenceTimingParams::default();
            let sites = single_size(&args.sites, d.sites)?;
            let offsets = if args.offsets.is_empty() { d.offsets.clone() } else { args.offsets.clone() };
            let report = run_concurrence_timing(
                &ConcurrenceTimingParams {
                    sites,
                    offsets,
                    center: sites / 2,
                    ..d
                },
                workers,
            )?;
            print_table(&report, "peaks");
            report
        }
    };
    for check in &report.checks {
        emit(&format!("{}\n", check.line()));
    }
    let dir = report.write(&args.out.output, args.out.format.into())?;
    emit(&format!("artifacts: {}\n", dir.display()));
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Acceptance)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Profile(a) => cmd_profile(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::CrossCheck(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CROSSCHECK)
        }
        Err(Failure::Acceptance) => {
            eprintln!("one or more checks failed");
            ExitCode::from(EXIT_ACCEPTANCE)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
