use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use entroseg::entropy::entropy_transform;
use entroseg::experiments::{
    beam_detection_rate, calibrate_severity, make_beam_fixture, noise_sweep, run_beam_study,
    tangent_vs_hurst, BeamReport, DEFAULT_BEAM_NOISE,
};
use entroseg::fbm::{
    box_counting_dimension, gen_fbm, gen_piecewise_fbm, FbmSpec, FractalScan, HurstSchedule,
    Normalization,
};
use entroseg::plot;
use entroseg::rng::RngSeed;
use entroseg::segmentation::{
    classify, segment, to_hough, SegmentLabel, SegmentationConfig, SegmentationReport, Traversal,
    DEFAULT_MAX_LINES, DEFAULT_SHORT_FRAC,
};
use entroseg::signal::{piecewise_test_fixture, write_columns, Signal};
use entroseg::Error;

#[derive(Parser)]
#[command(
    name = "entroseg",
    version,
    about = "Entropy-of-curve segmentation of 1D signals"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format (each subcommand has its own default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG figure.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Running sum of absolute increments of an `x,y` CSV signal.
    Entropy { input: PathBuf },
    /// Detect line segments and label them.
    Segment(SegmentArgs),
    /// Synthesize fractional Brownian motion.
    Fbm(FbmArgs),
    /// Box-counting dimension of an `x,y` CSV signal.
    Fracdim {
        input: PathBuf,
        /// Box sizes in samples (comma separated); dyadic by default.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<usize>>,
    },
    /// Optimal R² threshold against additive noise.
    Sweep(SweepArgs),
    /// Dominant entropy slope of fBm against the Hurst exponent.
    TangentStudy(TangentArgs),
    /// Damage localization on a cantilever mode shape.
    Beam(BeamArgs),
}

#[derive(Args)]
struct SegmentArgs {
    /// `x,y` CSV signal; the built-in piecewise test signal when omitted.
    input: Option<PathBuf>,
    /// Minimum R² of an accepted line.
    #[arg(long = "r2", default_value_t = 0.998)]
    r2: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_LINES)]
    max_lines: usize,
    #[arg(long, default_value_t = 2)]
    min_len: usize,
    /// Segment the entropy curve instead of the signal.
    #[arg(long)]
    entropy: bool,
    #[arg(long, default_value_t = DEFAULT_SHORT_FRAC)]
    short_frac: f64,
    /// Anchor windows on the right and shrink their left end.
    #[arg(long)]
    right_anchored: bool,
}

#[derive(Args)]
struct FbmArgs {
    #[arg(
        long,
        conflicts_with = "schedule",
        required_unless_present = "schedule"
    )]
    hurst: Option<f64>,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Piecewise schedule `H:len,H:len,...`.
    #[arg(long)]
    schedule: Option<HurstSchedule>,
    /// Increment variance scale v.
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
    /// Sample on t = k instead of t = k/n.
    #[arg(long, conflicts_with = "schedule")]
    unit_step: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// `x,y` CSV base signal; the built-in piecewise test signal when omitted.
    input: Option<PathBuf>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.01,0.02,0.05,0.1,0.2,0.3,0.5"
    )]
    stds: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.9,0.95,0.97,0.98,0.985,0.99,0.995,0.998,0.999"
    )]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    target_lines: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
}

#[derive(Args)]
struct TangentArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.3,0.4,0.5,0.6,0.7,0.8,0.9"
    )]
    hurst: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    block_len: usize,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long = "r2", default_value_t = 0.988)]
    r2: f64,
}

#[derive(Args)]
struct BeamArgs {
    /// Relative slope discontinuity at the damage, in [0, 1).
    #[arg(long, default_value_t = 0.05)]
    severity: f64,
    /// Measurement noise std (peak deflection is 1).
    #[arg(long, default_value_t = DEFAULT_BEAM_NOISE)]
    noise: f64,
    /// Noisy fixtures used for the detection rate.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long = "r2", default_value_t = 0.999)]
    r2: f64,
    /// Also search the smallest reliably localized severity on this grid.
    #[arg(long, value_delimiter = ',')]
    calibrate: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let g = &cli.global;
    let seed = RngSeed(g.seed);
    match cli.command {
        Command::Entropy { input } => {
            let s = read_signal(&input)?;
            let e = entropy_transform(&s);
            if let Some(p) = &g.svg {
                write_svg(p, &plot::entropy_figure(&s, &e))?;
            }
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => with_output(g, |w| write_columns(w, &["x", "h"], &[&e.x, &e.h]))?,
                Format::Json => write_json(g, &e.summary())?,
            }
            note(
                g,
                &serde_json::to_string(&e.summary()).expect("serializable"),
            );
        }
        Command::Segment(a) => {
            let s = match &a.input {
                Some(p) => read_signal(p)?,
                None => piecewise_test_fixture(),
            };
            let analysed = if a.entropy {
                entropy_transform(&s).to_signal()
            } else {
                s
            };
            let cfg = SegmentationConfig::new(a.r2)
                .with_max_lines(a.max_lines)
                .with_min_len(a.min_len)
                .with_traversal(if a.right_anchored {
                    Traversal::RightAnchored
                } else {
                    Traversal::LeftAnchored
                });
            let segments = segment(analysed.x(), analysed.y(), &cfg)?;
            let labels = classify(&to_hough(&segments)?, a.short_frac)?;
            let report = SegmentationReport::new(&segments, &labels, &cfg, a.short_frac, a.entropy);
            if let Some(p) = &g.svg {
                let l: Vec<SegmentLabel> = labels.iter().map(|p| p.1).collect();
                write_svg(p, &plot::segmentation_figure(&analysed, &segments, &l))?;
            }
            match g.format.unwrap_or(Format::Json) {
                Format::Csv => with_output(g, |w| report.write_csv(w))?,
                Format::Json => write_json(g, &report)?,
            }
            let singular = labels
                .iter()
                .filter(|p| p.1 == SegmentLabel::Singularity)
                .count();
            note(
                g,
                &format!("{} segments, {singular} singular", segments.len()),
            );
        }
        Command::Fbm(a) => {
            let s = match (&a.schedule, a.hurst) {
                (Some(sched), _) => gen_piecewise_fbm(sched, seed)?,
                (None, Some(h)) => {
                    let norm = if a.unit_step {
                        Normalization::UnitStep
                    } else {
                        Normalization::UnitInterval
                    };
                    let spec = FbmSpec::new(h, a.n, seed)
                        .with_variance_scale(a.variance)
                        .with_normalization(norm);
                    gen_fbm(&spec)?
                }
                (None, None) => unreachable!("clap requires one of --hurst, --schedule"),
            };
            if let Some(p) = &g.svg {
                write_svg(p, &plot::entropy_figure(&s, &entropy_transform(&s)))?;
            }
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => with_output(g, |w| s.write_csv(w))?,
                Format::Json => write_json(g, &s)?,
            }
            note(g, &format!("{} samples", s.len()));
        }
        Command::Fracdim { input, scales } => {
            let s = read_signal(&input)?;
            let scan = box_counting_dimension(&s, scales.as_deref())?;
            match g.format.unwrap_or(Format::Json) {
                Format::Csv => with_output(g, |w| {
                    let r: Vec<f64> = scan.scales.iter().map(|&r| r as f64).collect();
                    write_columns(w, &["r", "count"], &[&r, &scan.counts])
                })?,
                Format::Json => write_json::<FractalScan>(g, &scan)?,
            }
            note(
                g,
                &format!("D = {:.4}, H = {:.4}", scan.dimension, scan.hurst_est),
            );
        }
        Command::Sweep(a) => {
            let base = match &a.input {
                Some(p) => read_signal(p)?,
                None => piecewise_test_fixture(),
            };
            let r = noise_sweep(&base, &a.stds, &a.grid, a.target_lines, a.trials, seed)?;
            if let Some(p) = &g.svg {
                write_svg(p, &plot::sweep_figure(&r))?;
            }
            match g.format.unwrap_or(Format::Json) {
                Format::Csv => with_output(g, |w| {
                    let std: Vec<f64> = r.rows.iter().map(|row| row.noise_std).collect();
                    let opt: Vec<f64> = r
                        .rows
                        .iter()
                        .map(|row| row.optimal_rm2.unwrap_or(f64::NAN))
                        .collect();
                    let lines: Vec<f64> = r.rows.iter().map(|row| row.lines_found as f64).collect();
                    let err: Vec<f64> = r
                        .rows
                        .iter()
                        .map(|row| row.max_slope_err.unwrap_or(f64::NAN))
                        .collect();
                    write_columns(
                        w,
                        &["noise_std", "optimal_rm2", "lines_found", "max_slope_err"],
                        &[&std, &opt, &lines, &err],
                    )
                })?,
                Format::Json => write_json(g, &r)?,
            }
            for row in &r.rows {
                let opt = row
                    .optimal_rm2
                    .map_or("none".to_string(), |v| v.to_string());
                note(g, &format!("std {}: optimal rm2 {opt}", row.noise_std));
            }
        }
        Command::TangentStudy(a) => {
            let study = tangent_vs_hurst(
                &a.hurst,
                a.block_len,
                a.trials,
                &SegmentationConfig::new(a.r2),
                seed,
            )?;
            if let Some(p) = &g.svg {
                write_svg(p, &plot::tangent_figure(&study))?;
            }
            match g.format.unwrap_or(Format::Json) {
                Format::Csv => with_output(g, |w| {
                    let h: Vec<f64> = study.samples.iter().map(|s| s.hurst).collect();
                    let t: Vec<f64> = study.samples.iter().map(|s| s.tangent).collect();
                    write_columns(w, &["hurst", "tangent"], &[&h, &t])
                })?,
                Format::Json => write_json(g, &study)?,
            }
            note(
                g,
                &format!(
                    "tangent = {:.4}·exp({:.4}·H), r2 = {:.4}",
                    study.fit.a, study.fit.b, study.fit.r2
                ),
            );
        }
        Command::Beam(a) => {
            let cfg = SegmentationConfig::new(a.r2);
            let fx = make_beam_fixture(a.severity, a.noise, Some(seed))?;
            let report = run_beam_study(&fx, &cfg)?;
            let detection_rate = beam_detection_rate(a.severity, a.noise, a.trials, &cfg, seed)?;
            let calibrated_severity = match &a.calibrate {
                Some(grid) => calibrate_severity(grid, a.noise, a.trials, &cfg, seed)?,
                None => None,
            };
            if let Some(p) = &g.svg {
                write_svg(p, &plot::beam_figure(&fx, &report))?;
            }
            match g.format.unwrap_or(Format::Json) {
                Format::Csv => with_output(g, |w| report.segmentation.write_csv(w))?,
                Format::Json => write_json(
                    g,
                    &BeamOutput {
                        report: &report,
                        trials: a.trials,
                        detection_rate,
                        calibration_grid: a.calibrate.as_deref(),
                        calibrated_severity,
                    },
                )?,
            }
            note(
                g,
                &format!(
                    "damage distance {:?}, localized in {:.0}% of {} noisy fixtures",
                    report.damage_distance,
                    detection_rate * 100.0,
                    a.trials
                ),
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BeamOutput<'a> {
    #[serde(flatten)]
    report: &'a BeamReport,
    trials: usize,
    detection_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration_grid: Option<&'a [f64]>,
    calibrated_severity: Option<f64>,
}

fn read_signal(path: &Path) -> Result<Signal, Error> {
    let file = File::open(path)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Signal::read_csv(BufReader::new(file))
}

fn with_output(
    g: &Global,
    f: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
) -> Result<(), Error> {
    match &g.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(g: &Global, value: &T) -> Result<(), Error> {
    with_output(g, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.into()))?;
        writeln!(w)?;
        Ok(())
    })
}

fn write_svg(path: &Path, svg: &str) -> Result<(), Error> {
    std::fs::write(path, svg)?;
    Ok(())
}

fn note(g: &Global, msg: &str) {
    if !g.quiet {
        eprintln!("{msg}");
    }
}
