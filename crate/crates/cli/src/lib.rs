//! Command-line front end for `ccdgf`.
//!
//! Every subcommand prints a single-line JSON report on stdout (shape in
//! `docs/report.schema.json`). Exit codes: 0 success, 2 usage error,
//! 3 I/O or image parse error.
//!
//! Color inputs are filtered channel by channel. Forward filters steer every
//! channel with the luma of the guidance; images that play the role of a
//! second track or an anchor are matched channel to channel (a gray image is
//! broadcast).

pub mod args;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ccdgf::imgio::{read_pnm_file, write_pnm_file, PnmError, PnmImage};
use ccdgf::metrics::{mse_channels, psnr_from_mse, ssim_channels};
use ccdgf::synth::SynthKind;
use ccdgf::{boxops, cgf, gf, igf, rfnf, rmsf, synth, tvgf, Image, WindowSpec};
use clap::Parser;
use thiserror::Error;

use crate::args::*;
pub use crate::report::{ImageInfo, MetricsReport, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl From<ccdgf::Error> for CliError {
    fn from(e: ccdgf::Error) -> Self {
        match e {
            // mismatched files are a problem with the data, not the flags
            ccdgf::Error::ShapeMismatch { .. } | ccdgf::Error::DataLength { .. } => Self::Io(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(cli) {
        Ok(report) => {
            let _ = writeln!(stdout, "{}", serde_json::to_string(&report).expect("report serializes"));
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "ccdgf: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<Report, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Gf(a) => cmd_gf(a),
        Command::Tvgf(a) => cmd_tvgf(a),
        Command::Cgf(a) => cmd_cgf(a),
        Command::Igf(a) => cmd_igf(a),
        Command::Icgf(a) => cmd_icgf(a),
        Command::RmsfGf(a) => cmd_rmsf(a),
        Command::RmsfCgf(a) => {
            let anchors = Some((a.lambda, a.beta));
            let params = serde_json::to_value(&a).expect("args serialize");
            cmd_rmsf_with(a.rmsf, anchors, "rmsf-cgf", params)
        }
        Command::Roll37(a) => cmd_roll37(a),
        Command::RfnfSeo(a) => cmd_rfnf_seo(a),
        Command::RfnfGen(a) => cmd_rfnf_gen(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

// ------------------------------------------------------------------ images

fn load(path: &Path) -> Result<PnmImage, CliError> {
    read_pnm_file(path).map_err(|e| match e {
        PnmError::Io(msg) => CliError::Io(msg),
        other => CliError::Io(format!("{}: {} ({})", path.display(), other, other.code())),
    })
}

fn save(path: &Path, channels: &[Image], maxval: u16) -> Result<(), CliError> {
    write_pnm_file(path, channels, maxval).map_err(|e| io_err(path, e))
}

/// Single guidance plane: the image itself, or its luma.
fn guidance_plane(img: &PnmImage) -> Result<Image, CliError> {
    match img.channels.len() {
        1 => Ok(img.channels[0].clone()),
        _ => Ok(Image::luma(&img.channels)?),
    }
}

/// `n` planes matched to the input's channels.
fn matched_planes(img: &PnmImage, n: usize) -> Result<Vec<Image>, CliError> {
    match (img.channels.len(), n) {
        (a, b) if a == b => Ok(img.channels.clone()),
        (1, _) => Ok(vec![img.channels[0].clone(); n]),
        (_, 1) => Ok(vec![Image::luma(&img.channels)?]),
        (a, b) => Err(CliError::Io(format!("cannot match {a} channels to {b}"))),
    }
}

fn load_or(path: Option<&PathBuf>, fallback: &PnmImage) -> Result<PnmImage, CliError> {
    match path {
        Some(p) => load(p),
        None => Ok(fallback.clone()),
    }
}

/// `out.pgm` -> `out.iter003.pgm`.
fn iterate_path(output: &Path, n: usize) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match output.extension() {
        Some(ext) => format!("{stem}.iter{n:03}.{}", ext.to_string_lossy()),
        None => format!("{stem}.iter{n:03}"),
    };
    output.with_file_name(name)
}

/// Per-channel traces `[channel][iterate]` -> files and report.
struct Run {
    command: &'static str,
    params: serde_json::Value,
    input: PnmImage,
    traces: Vec<Vec<Image>>,
    /// Optional second track, `[channel]`, with its destination.
    second: Option<(PathBuf, Vec<Image>)>,
    started: Instant,
}

fn finish(run: Run, io: &Io) -> Result<Report, CliError> {
    let Run {
        command,
        params,
        input,
        traces,
        second,
        started,
    } = run;
    let iterations = traces[0].len();
    let finals: Vec<Image> = traces
        .iter()
        .map(|t| t.last().expect("non-empty trace").clone())
        .collect();
    if finals.iter().any(|c| !c.is_finite()) {
        return Err(CliError::Usage(
            "filter produced non-finite values; check eps / lambda".into(),
        ));
    }
    let mut outputs = vec![io.output.display().to_string()];
    save(&io.output, &finals, input.maxval)?;
    if io.dump_iterates {
        for n in 0..iterations {
            let frame: Vec<Image> = traces.iter().map(|t| t[n].clone()).collect();
            let path = iterate_path(&io.output, n + 1);
            save(&path, &frame, 65535)?;
            outputs.push(path.display().to_string());
        }
    }
    if let Some((path, planes)) = second {
        save(&path, &planes, input.maxval)?;
        outputs.push(path.display().to_string());
    }
    let metrics = match &io.metrics_against {
        Some(reference) => Some(compare(&finals, &load(reference)?)?),
        None => None,
    };
    Ok(Report {
        command,
        version: env!("CARGO_PKG_VERSION"),
        params,
        input: Some(ImageInfo::of(&input)),
        outputs,
        iterations: Some(iterations),
        wall_time_s: started.elapsed().as_secs_f64(),
        metrics,
        bench: None,
    })
}

fn compare(x: &[Image], reference: &PnmImage) -> Result<MetricsReport, CliError> {
    if x.len() != reference.channels.len() {
        return Err(CliError::Io(format!(
            "reference has {} channels, image has {}",
            reference.channels.len(),
            x.len()
        )));
    }
    let mse = mse_channels(x, &reference.channels)?;
    let ssim = match ssim_channels(x, &reference.channels) {
        Ok(s) => Some(s),
        Err(ccdgf::Error::TooSmall { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(MetricsReport {
        mse,
        psnr_db: psnr_from_mse(mse, 1.0),
        ssim,
    })
}

fn params_of(a: &impl serde::Serialize) -> serde_json::Value {
    serde_json::to_value(a).expect("args serialize")
}

fn per_channel(
    input: &PnmImage,
    mut f: impl FnMut(usize, &Image) -> Result<Vec<Image>, CliError>,
) -> Result<Vec<Vec<Image>>, CliError> {
    input.channels.iter().enumerate().map(|(c, p)| f(c, p)).collect()
}

// ---------------------------------------------------------------- filters

fn cmd_gf(a: GfArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let guide = guidance_plane(&load_or(a.guidance.as_ref(), &input)?)?;
    let w = WindowSpec::new(a.radius, a.boundary.into());
    let traces = per_channel(&input, |_, p| Ok(gf::gf_roll(p, &guide, w, a.eps, a.iters)?))?;
    let run = Run {
        command: "gf",
        params: params_of(&a),
        input,
        traces,
        second: None,
        started,
    };
    finish(run, &a.io)
}

fn cmd_tvgf(a: TvgfArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let guide = guidance_plane(&load_or(a.guidance.as_ref(), &input)?)?;
    let w = WindowSpec::periodic(a.radius);
    let traces = per_channel(&input, |_, p| {
        Ok(tvgf::tvgf_roll(p, &guide, w, a.eps, a.lambda, a.iters)?)
    })?;
    let run = Run {
        command: "tvgf",
        params: params_of(&a),
        input,
        traces,
        second: None,
        started,
    };
    finish(run, &a.io)
}

fn cmd_cgf(a: CgfArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let guide = guidance_plane(&load_or(a.guidance.as_ref(), &input)?)?;
    let anchors = matched_planes(&load_or(a.anchor.as_ref(), &input)?, input.channels.len())?;
    let w = WindowSpec::new(a.radius, a.boundary.into());
    let traces = per_channel(&input, |c, p| {
        Ok(cgf::cgf_roll(p, &guide, &anchors[c], w, a.eps, a.lambda, a.iters)?)
    })?;
    let run = Run {
        command: "cgf",
        params: params_of(&a),
        input,
        traces,
        second: None,
        started,
    };
    finish(run, &a.io)
}

fn cmd_igf(a: IgfArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let priors = matched_planes(&load_or(a.guidance.as_ref(), &input)?, input.channels.len())?;
    let w = WindowSpec::new(a.radius, a.boundary.into());
    let traces = per_channel(&input, |c, p| Ok(vec![igf::igf(p, &priors[c], w, a.eps)?]))?;
    let run = Run {
        command: "igf",
        params: params_of(&a),
        input,
        traces,
        second: None,
        started,
    };
    finish(run, &a.io)
}

fn cmd_icgf(a: IcgfArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let n = input.channels.len();
    let prior_img = load_or(a.guidance.as_ref(), &input)?;
    let priors = matched_planes(&prior_img, n)?;
    let anchors = matched_planes(&load_or(a.anchor.as_ref(), &prior_img)?, n)?;
    let w = WindowSpec::new(a.radius, a.boundary.into());
    let traces = per_channel(&input, |c, p| {
        Ok(vec![igf::icgf(p, &priors[c], &anchors[c], w, a.eps, a.lambda)?])
    })?;
    let run = Run {
        command: "icgf",
        params: params_of(&a),
        input,
        traces,
        second: None,
        started,
    };
    finish(run, &a.io)
}

fn cmd_rmsf(a: RmsfArgs) -> Result<Report, CliError> {
    let params = params_of(&a);
    cmd_rmsf_with(a, None, "rmsf-gf", params)
}

fn cmd_rmsf_with(
    a: RmsfArgs,
    anchors: Option<(f64, f64)>,
    command: &'static str,
    params: serde_json::Value,
) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let guides = matched_planes(&load_or(a.guidance.as_ref(), &input)?, input.channels.len())?;
    let w = WindowSpec::new(a.radius, a.boundary.into());
    let mut second = Vec::new();
    let traces = per_channel(&input, |c, p| {
        let states = match anchors {
            None => rmsf::gf_rmsf_trace(p, &guides[c], a.eps, a.eps2, w, a.iters)?,
            Some((lambda, beta)) => rmsf::cgf_rmsf_trace(p, &guides[c], a.eps, a.eps2, lambda, beta, w, a.iters)?,
        };
        second.push(states.last().expect("non-empty trace").guide.clone());
        Ok(states.into_iter().map(|s| s.q).collect())
    })?;
    let run = Run {
        command,
        params,
        input,
        traces,
        second: a.guidance_output.clone().map(|p| (p, second)),
        started,
    };
    finish(run, &a.io)
}

fn cmd_roll37(a: Roll37Args) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let guides = matched_planes(&load_or(a.guidance.as_ref(), &input)?, input.channels.len())?;
    let w = WindowSpec::new(a.radius, a.boundary.into());
    let mut second = Vec::new();
    let traces = per_channel(&input, |c, p| {
        let states = rmsf::naive_roll37_trace(p, &guides[c], a.eps, w, a.iters)?;
        second.push(states.last().expect("non-empty trace").guide.clone());
        Ok(states.into_iter().map(|s| s.q).collect())
    })?;
    let run = Run {
        command: "roll37",
        params: params_of(&a),
        input,
        traces,
        second: a.guidance_output.clone().map(|p| (p, second)),
        started,
    };
    finish(run, &a.io)
}

fn cmd_rfnf_seo(a: RfnfSeoArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let flash = matched_planes(&load(&a.guidance)?, input.channels.len())?;
    let w = WindowSpec::new(a.radius, a.boundary.into());
    let traces = per_channel(&input, |c, p| {
        Ok(rfnf::rfnf_seo_trace(p, &flash[c], w, a.eps, a.lambda, a.iters)?)
    })?;
    let run = Run {
        command: "rfnf-seo",
        params: params_of(&a),
        input,
        traces,
        second: None,
        started,
    };
    finish(run, &a.io)
}

fn cmd_rfnf_gen(a: RfnfGenArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.io.input)?;
    let flash = matched_planes(&load(&a.guidance)?, input.channels.len())?;
    let w = WindowSpec::new(a.radius, a.boundary.into());
    let traces = per_channel(&input, |c, p| {
        Ok(rfnf::rfnf_gen_trace(p, &flash[c], w, a.eps, a.lambda, a.tau, a.iters)?)
    })?;
    let run = Run {
        command: "rfnf-gen",
        params: params_of(&a),
        input,
        traces,
        second: None,
        started,
    };
    finish(run, &a.io)
}

// ------------------------------------------------------ metrics / bench

fn cmd_metrics(a: MetricsArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    let input = load(&a.input)?;
    let metrics = compare(&input.channels, &load(&a.metrics_against)?)?;
    let mut outputs = Vec::new();
    if let Some(path) = &a.csv {
        report::write_metrics_csv(path, &a.input, &a.metrics_against, &metrics).map_err(|e| io_err(path, e))?;
        outputs.push(path.display().to_string());
    }
    Ok(Report {
        command: "metrics",
        version: env!("CARGO_PKG_VERSION"),
        params: params_of(&a),
        input: Some(ImageInfo::of(&input)),
        outputs,
        iterations: None,
        wall_time_s: started.elapsed().as_secs_f64(),
        metrics: Some(metrics),
        bench: None,
    })
}

fn cmd_bench(a: BenchArgs) -> Result<Report, CliError> {
    if a.repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".into()));
    }
    if a.width == 0 || a.height == 0 {
        return Err(CliError::Usage("--width and --height must be positive".into()));
    }
    let started = Instant::now();
    let x = synth::uniform(a.width, a.height, a.seed);
    let wt = WindowSpec::truncate(a.radius);
    let run_once = || -> Result<Image, CliError> {
        Ok(match a.filter {
            BenchFilter::Box => boxops::box_sum(&x, wt)?,
            BenchFilter::Gf => gf::gf(&x, &x, wt, 0.1)?,
            BenchFilter::Tvgf => tvgf::tvgf(&x, &x, WindowSpec::periodic(a.radius), 0.01, 45.0)?,
            BenchFilter::Cgf => cgf::cgf(&x, &x, &x, wt, 0.001, 0.01)?,
        })
    };
    let mut times = Vec::with_capacity(a.repeat);
    for _ in 0..a.repeat {
        let t = Instant::now();
        std::hint::black_box(run_once()?);
        times.push(t.elapsed().as_secs_f64());
    }
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    Ok(Report {
        command: "bench",
        version: env!("CARGO_PKG_VERSION"),
        params: params_of(&a),
        input: None,
        outputs: Vec::new(),
        iterations: None,
        wall_time_s: started.elapsed().as_secs_f64(),
        metrics: None,
        bench: Some(report::BenchReport {
            megapixels: (a.width * a.height) as f64 / 1e6,
            times_s: times,
            median_s: median,
        }),
    })
}

fn cmd_synth(a: SynthArgs) -> Result<Report, CliError> {
    let started = Instant::now();
    if a.maxval != 255 && a.maxval != 65535 {
        return Err(CliError::Usage(format!(
            "--maxval must be 255 or 65535, got {}",
            a.maxval
        )));
    }
    if a.width == 0 || a.height == 0 {
        return Err(CliError::Usage("--width and --height must be positive".into()));
    }
    if a.kind == SynthKind::Piecewise && a.companion.is_some() {
        return Err(CliError::Usage(
            "--companion is not available for the piecewise kind".into(),
        ));
    }
    let (main, companion) = match a.kind {
        SynthKind::Noise => {
            let (noisy, clean) = synth::noisy_piecewise(a.width, a.height, a.seed, a.sigma);
            (noisy, Some(clean))
        }
        SynthKind::Piecewise => (synth::piecewise(a.width, a.height, a.seed), None),
        SynthKind::Texture => {
            let (tex, structure) = synth::texture(a.width, a.height, a.seed);
            (tex, Some(structure))
        }
        SynthKind::FlashPair => {
            let pair = synth::flash_pair(a.width, a.height, a.seed);
            (pair.no_flash, Some(pair.flash))
        }
    };
    let mut outputs = vec![a.output.display().to_string()];
    save(&a.output, &[main], a.maxval)?;
    if let (Some(path), Some(img)) = (&a.companion, companion) {
        save(path, &[img], a.maxval)?;
        outputs.push(path.display().to_string());
    }
    Ok(Report {
        command: "synth",
        version: env!("CARGO_PKG_VERSION"),
        params: params_of(&a),
        input: None,
        outputs,
        iterations: None,
        wall_time_s: started.elapsed().as_secs_f64(),
        metrics: None,
        bench: None,
    })
}
