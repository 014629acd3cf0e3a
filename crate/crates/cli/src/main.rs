//! Batch front-end: run cavity simulations, parameter sweeps, band diagrams
//! and far-field re-analysis from TOML configurations or named presets.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use clap::{Args, Parser, Subcommand};
use phcavity::bandstructure::{compute_bands, hexagonal_path, write_bands_csv, BandError, UnitCell};
use phcavity::config::{preset, ConfigError, RunConfig, PRESETS};
use phcavity::farfield::write_pattern_csv;
use phcavity::fdtd::SolverError;
use phcavity::geometry::write_raw_grid;
use phcavity::pipeline::{
    intensity_slice, reanalyze_farfield, simulate, write_report_csv, ModeReport, PipelineError,
    REPORT_HEADER,
};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_ANALYSIS: u8 = 4;

#[derive(Parser)]
#[command(name = "phcavity", version, about = "Photonic-crystal slab microcavity design toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one cavity and write its mode report.
    Simulate(RunArgs),
    /// Run the pipeline once per parameter value and aggregate the reports.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// One of p, r_def_over_a, r_over_a, d_over_a, num_layers, n_defect.
        /// Defaults to the sweep in the configuration.
        #[arg(long)]
        parameter: Option<String>,
        /// Comma-separated values; an empty string gives an empty sweep.
        #[arg(long)]
        values: Option<String>,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Compute the TE-like band diagram of the host crystal.
    Bands(RunArgs),
    /// Recompute the far-field Q from a checkpoint written by `simulate`.
    Farfield {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Inspect the shipped presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Print preset names and descriptions.
    List,
    /// Print a preset as a TOML configuration.
    Show { name: String },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset instead of a configuration file.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, env = "PHCAVITY_OUT", default_value = "phcavity-out")]
    out: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Rescales the structure to this many cells per lattice constant.
    #[arg(long)]
    resolution: Option<usize>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_CONFIG, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_OTHER, format!("io: {e}"))
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = exit_code(&e);
        Failure::new(code, e.to_string())
    }
}

fn exit_code(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Config(_) | PipelineError::Geometry(_) => EXIT_CONFIG,
        PipelineError::Solver(SolverError::Unstable { .. } | SolverError::Courant(_)) => EXIT_UNSTABLE,
        PipelineError::Solver(_) | PipelineError::Io(_) => EXIT_OTHER,
        PipelineError::Analysis(_) | PipelineError::FarField(_) => EXIT_ANALYSIS,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Sweep {
            run,
            parameter,
            values,
            workers,
        } => cmd_sweep(&run, parameter, values, workers),
        Command::Bands(args) => cmd_bands(&args),
        Command::Farfield { run, checkpoint } => cmd_farfield(&run, &checkpoint),
        Command::Presets { action } => {
            match action {
                PresetAction::List => {
                    for (name, what) in PRESETS {
                        println!("{name:<28}{what}");
                    }
                }
                PresetAction::Show { name } => print!("{}", preset(&name)?.to_toml()),
            }
            Ok(())
        }
    }
}

fn load(args: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(Failure::new(EXIT_CONFIG, "either --config or --preset is required")),
    };
    if let Some(a) = args.resolution {
        cfg = cfg.at_resolution(a);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        cfg.bands.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_dir(args: &RunArgs, cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = args.out.join(&cfg.name);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_simulate(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let dir = run_dir(args, &cfg)?;
    let checkpoint = cfg.outputs.checkpoint.then(|| dir.join("checkpoint"));
    let out = simulate(&cfg, checkpoint.as_deref())?;
    if cfg.outputs.report {
        write_report_csv(create(&dir.join("report.csv"))?, std::slice::from_ref(&out.report))?;
    }
    fs::write(dir.join("summary.txt"), out.report.summary())?;
    for s in &cfg.outputs.slices {
        let (dims, data) = intensity_slice(&out.profile, s.axis.index(), s.position_cells);
        let name = format!("slice_{:?}_{}.raw", s.axis, s.position_cells).to_lowercase();
        write_raw_grid(create(&dir.join(name))?, dims, 1.0, data)?;
    }
    if let Some(p) = &out.pattern {
        write_pattern_csv(create(&dir.join("pattern.csv"))?, p)?;
    }
    print!("{}", out.report.summary());
    Ok(())
}

fn parse_values(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Failure::new(EXIT_CONFIG, format!("sweep value `{v}` is not a number")))
        })
        .collect()
}

fn cmd_sweep(
    args: &RunArgs,
    parameter: Option<String>,
    values: Option<String>,
    workers: usize,
) -> Result<(), Failure> {
    let cfg = load(args)?;
    let (parameter, values) = match (parameter, values, &cfg.sweep) {
        (Some(p), Some(v), _) => (p, parse_values(&v)?),
        (Some(p), None, _) => return Err(Failure::new(EXIT_CONFIG, format!("--values is required to sweep `{p}`"))),
        (None, v, Some(s)) => (s.parameter.clone(), v.map_or(Ok(s.values.clone()), |v| parse_values(&v))?),
        (None, _, None) => {
            return Err(Failure::new(EXIT_CONFIG, "no sweep in the configuration; pass --parameter and --values"))
        }
    };
    // every point is validated before anything runs
    let points = values
        .iter()
        .map(|v| cfg.with_parameter(&parameter, *v))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = run_dir(args, &cfg)?;

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<ModeReport, PipelineError>)>();
    let mut results: Vec<Option<Result<ModeReport, PipelineError>>> = (0..points.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, points.len().max(1)) {
            let tx = tx.clone();
            let next = &next;
            let points = &points;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(point) = points.get(i) else { break };
                let res = simulate(point, None).map(|o| o.report);
                if tx.send((i, res)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, res) in rx {
            match &res {
                Ok(r) => eprintln!("{parameter} = {}: a/lambda {:.4}, Q_perp {:.0}", values[i], r.a_over_lambda, r.q_perp),
                Err(e) => eprintln!("{parameter} = {}: failed: {e}", values[i]),
            }
            results[i] = Some(res);
        }
    });

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
    let mut w = create(&dir.join("sweep.csv"))?;
    writeln!(w, "parameter,value,status,{REPORT_HEADER}")?;
    let blank = ",".repeat(REPORT_HEADER.split(',').count() - 1);
    for i in order {
        match results[i].take().expect("every point reports") {
            Ok(r) => writeln!(w, "{parameter},{},ok,{}", values[i], r.csv_row())?,
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                writeln!(w, "{parameter},{},error: {msg},{blank}", values[i])?
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_bands(args: &RunArgs) -> Result<(), Failure> {
    let cfg = load(args)?;
    let dir = run_dir(args, &cfg)?;
    let spec = &cfg.structure.crystal;
    let band_failure = |e: BandError| match e {
        BandError::Solver(SolverError::Unstable { .. }) => Failure::new(EXIT_UNSTABLE, e.to_string()),
        BandError::Geometry(_) | BandError::InvalidOptions(_) => Failure::new(EXIT_CONFIG, e.to_string()),
        _ => Failure::new(EXIT_OTHER, e.to_string()),
    };
    let cell = UnitCell::hexagonal(spec).map_err(band_failure)?;
    let path = hexagonal_path(&cell, cfg.bands.points_per_edge);
    let d = compute_bands(spec, &path, &cfg.bands).map_err(band_failure)?;
    let mut w = create(&dir.join("bands.csv"))?;
    write_bands_csv(&mut w, &d)?;
    w.flush()?;
    match d.gap {
        Some((lo, hi)) => println!("gap {lo:.4} {hi:.4}"),
        None => println!("gap none"),
    }
    Ok(())
}

fn cmd_farfield(args: &RunArgs, checkpoint: &Path) -> Result<(), Failure> {
    let cfg = load(args)?;
    let dir = run_dir(args, &cfg)?;
    let (s, pattern) = reanalyze_farfield(&cfg, checkpoint, true)?;
    let line = format!(
        "omega {:.6e} W {:.6e} P {:.6e} Q_farfield {:.1} light_cone_fraction {:.4}\n",
        s.omega, s.energy, s.power, s.q, s.light_cone_fraction
    );
    fs::write(dir.join("farfield.txt"), &line)?;
    if let Some(p) = &pattern {
        write_pattern_csv(create(&dir.join("pattern.csv"))?, p)?;
    }
    print!("{line}");
    Ok(())
}
