use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mint_uwb::estimation::{estimate_klos, jbsf_range, ml_range};
use mint_uwb::geometry::{generate_vas, read_plan};
use mint_uwb::harness::{crlb_at, write_reports, RunFilter, Scenario, ScenarioConfig, Tracker};
use mint_uwb::tracking::extract_with_threshold;
use mint_uwb::waveform::{band_extract, read_frequency_response, write_frame};
use mint_uwb::{MintError, Result, SPEED_OF_LIGHT};

#[derive(Parser)]
#[command(name = "mint", version, about = "Multipath-assisted UWB indoor tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tracker sweep and write summary.csv, trace.csv and ranging_cdf.csv.
    Run(RunArgs),
    /// Dump the virtual anchors of every base station.
    Vas(VasArgs),
    /// Position error bound along the trajectory.
    Crlb(CrlbArgs),
    /// Extract paths and ranges from a single frame.
    RangeTest(RangeTestArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario TOML file; built-in defaults when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Obstruction {
    On,
    Off,
    Both,
}

impl Obstruction {
    fn states(self) -> Vec<bool> {
        match self {
            Obstruction::On => vec![true],
            Obstruction::Off => vec![false],
            Obstruction::Both => vec![false, true],
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long, short, default_value = "mint-out")]
    out: PathBuf,
    /// Trackers to run (mint-da, mint-gada, ekf-ml, ekf-jbsf); all when omitted.
    #[arg(long, value_delimiter = ',')]
    tracker: Vec<Tracker>,
    /// Pulse durations in ns; all configured when omitted.
    #[arg(long, value_delimiter = ',')]
    pulse: Vec<f64>,
    #[arg(long, value_enum, default_value = "both")]
    obstruction: Obstruction,
}

#[derive(Args)]
struct VasArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Plan file with `bs` records; replaces the config plan and base stations.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    max_order: Option<usize>,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CrlbArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Pulse duration in ns.
    #[arg(long, default_value_t = 0.5)]
    pulse: f64,
    /// Apply the obstruction to the path SINRs.
    #[arg(long)]
    obstructed: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RangeTestArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Pulse duration in ns.
    #[arg(long, default_value_t = 0.5)]
    pulse: f64,
    /// Trajectory index of the synthetic frame.
    #[arg(long, default_value_t = 0)]
    position: usize,
    #[arg(long, default_value_t = 0)]
    bs: usize,
    #[arg(long)]
    obstructed: bool,
    /// Measured transfer function to use instead of a synthetic frame.
    #[arg(long)]
    frequency_response: Option<PathBuf>,
    /// Also write the processed frame.
    #[arg(long)]
    frame_out: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| MintError::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn pulse_index(config: &ScenarioConfig, ns: f64) -> Result<usize> {
    config
        .pulse_index(ns * 1e-9)
        .ok_or_else(|| MintError::Config(format!("pulse duration {ns} ns not configured")))
}

fn io_err(e: io::Error) -> MintError {
    MintError::io(Path::new("<output>"), e)
}

fn run(args: &RunArgs) -> Result<()> {
    let config = args.config.load()?;
    let filter = RunFilter {
        trackers: args.tracker.clone(),
        pulses: args.pulse.iter().map(|ns| ns * 1e-9).collect(),
        obstruction: args.obstruction.states(),
    };
    let results = Scenario::new(config)?.run(&filter)?;
    write_reports(&args.out, &results)?;
    for r in &results {
        println!(
            "{:9} Tp={:>3} ns obstruction={:3} rmse={:.4} m hdop={}",
            r.tracker.name(),
            r.pulse * 1e9,
            if r.obstructed { "on" } else { "off" },
            r.metrics.rms_error,
            r.metrics.mean_hdop.map_or("-".into(), |h| format!("{h:.3}")),
        );
    }
    Ok(())
}

fn vas(args: &VasArgs) -> Result<()> {
    let config = args.config.load()?;
    let (plan, base_stations) = match &args.plan {
        Some(path) => {
            let file = read_plan(path)?;
            if file.base_stations.is_empty() {
                return Err(MintError::Config(format!("{}: no `bs` records", path.display())));
            }
            (file.plan, file.base_stations)
        }
        None => (config.floor_plan()?, config.base_stations.clone()),
    };
    let max_order = args.max_order.unwrap_or(config.max_order);
    let mut w = output(args.out.as_deref())?;
    writeln!(w, "# mint-vas v1").map_err(io_err)?;
    writeln!(w, "bs_id,va_id,order,x,y,mirror_walls").map_err(io_err)?;
    for (i, &bs) in base_stations.iter().enumerate() {
        for va in generate_vas(&plan, bs, i, max_order) {
            let walls = va.mirror_walls.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(";");
            writeln!(w, "{},{},{},{},{},{}", i, va.id, va.order, va.position.x, va.position.y, walls)
                .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

fn crlb(args: &CrlbArgs) -> Result<()> {
    let config = args.config.load()?;
    let p = pulse_index(&config, args.pulse)?;
    let pulse = config.pulse(p)?;
    let s = Scenario::new(config)?;
    let c = &s.config;
    let obstruction = args.obstructed.then_some(&c.obstruction);
    let mut w = output(args.out.as_deref())?;
    writeln!(w, "# mint-crlb v1").map_err(io_err)?;
    writeln!(w, "index,x,y,paths,crlb_m2,crlb_rms_m").map_err(io_err)?;
    for (l, &pos) in s.trajectory.iter().enumerate() {
        let bound = crlb_at(pos, &s.vas, &s.plan, &c.amplitude, &c.diffuse, c.noise_psd, &pulse, obstruction);
        let (trace, rms, paths) = match bound {
            Ok((b, n)) => (b.trace.to_string(), b.rms().to_string(), n),
            Err(MintError::SingularFim { .. }) => (String::new(), String::new(), 0),
            Err(e) => return Err(e),
        };
        writeln!(w, "{l},{},{},{paths},{trace},{rms}", pos.x, pos.y).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn range_test(args: &RangeTestArgs) -> Result<()> {
    let config = args.config.load()?;
    let p = pulse_index(&config, args.pulse)?;
    let pulse = config.pulse(p)?;
    let est_config = config.estimator(p);
    let s = Scenario::new(config)?;
    let c = &s.config;
    let (frame, truth) = match &args.frequency_response {
        Some(path) => (band_extract(&read_frequency_response(path)?, &pulse)?, None),
        None => {
            if args.position >= s.trajectory.len() || args.bs >= s.bs_count() {
                return Err(MintError::Config(format!(
                    "position {} / bs {} out of range ({} positions, {} base stations)",
                    args.position,
                    args.bs,
                    s.trajectory.len(),
                    s.bs_count()
                )));
            }
            let specs = s.frame_specs(args.obstructed)?;
            let spec = &specs[args.position * s.bs_count() + args.bs];
            let frame = spec.synthesize(&pulse, c.noise_psd, c.layout(&pulse), c.seed)?;
            (frame, Some(c.base_stations[args.bs].distance(spec.agent)))
        }
    };
    if let Some(path) = &args.frame_out {
        write_frame(path, &frame)?;
    }
    let est = extract_with_threshold(&frame, &pulse, &est_config)?;
    let ml = ml_range(&est).ok().map(|r| r.distance);
    let jbsf = jbsf_range(&frame, est_config.xi, est_config.searchback, est_config.prelos_window)
        .ok()
        .map(|r| r.distance);
    let klos = estimate_klos(&frame, &pulse, est_config.prelos_window)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());

    let mut w = output(args.out.as_deref())?;
    writeln!(w, "# mint-range-test v1").map_err(io_err)?;
    writeln!(w, "# true_distance_m={}", opt(truth)).map_err(io_err)?;
    writeln!(w, "# ml_distance_m={}", opt(ml)).map_err(io_err)?;
    writeln!(w, "# jbsf_distance_m={}", opt(jbsf)).map_err(io_err)?;
    writeln!(w, "# klos_db={klos}").map_err(io_err)?;
    writeln!(w, "k,delay_s,distance_m,re,im,magnitude").map_err(io_err)?;
    for (k, (tau, a)) in est.delays.iter().zip(&est.amplitudes).enumerate() {
        writeln!(w, "{k},{tau},{},{},{},{}", tau * SPEED_OF_LIGHT, a.re, a.im, a.norm()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Vas(a) => vas(a),
        Command::Crlb(a) => crlb(a),
        Command::RangeTest(a) => range_test(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(MintError::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mint: error: {e}");
            ExitCode::from(2)
        }
    }
}
