//! Command-line front end for `bikebf`.

pub mod settings;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bikebf::calibration::{self, CalibrationConfig, DEFAULT_SAMPLES};
use bikebf::cost::{CostComparison, CostReport, LAYERED_LOGIC_XORS, NON_LAYERED_LOGIC_XORS};
use bikebf::dfr::{self, FitMethod, EXTRAPOLATION_HEADER};
use bikebf::fixture::{format_key, format_vector, Fixture};
use bikebf::gf2::keygen_counted;
use bikebf::rng::trial_rng;
use bikebf::threshold::{format_binary, format_exact, ThresholdCoefficients};
use bikebf::{decode, Schedule};

use settings::{parse_list, parse_range, Settings};

/// Process exit status of a decode that did not reach a zero syndrome.
pub const EXIT_DECODING_FAILURE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "bikebf", version, about = "Layered bit-flipping decoding for QC-MDPC codes")]
pub struct Cli {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Parameter preset: bike-l1-layered or bike-l1-nonlayered.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a private key fixture.
    Keygen(KeygenArgs),
    /// Decode a syndrome or error fixture and print the iteration trace.
    Decode(DecodeArgs),
    /// Estimate decoding failure rates over a list of r values.
    Dfr(DfrArgs),
    /// Fit threshold coefficients from best first-iteration thresholds.
    Calibrate(CalibrateArgs),
    /// Show fixed-point truncations of threshold coefficients.
    Quantize(QuantizeArgs),
    /// Memory, area and latency of L-parallel decoder hardware.
    Cost(CostArgs),
    /// Extrapolate DFR points to 2^-lambda.
    Extrapolate(ExtrapolateArgs),
}

#[derive(Debug, Args, Default)]
pub struct CodeArgs {
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub delta: Option<u32>,
    #[arg(long = "i-max")]
    pub i_max: Option<usize>,
}

impl CodeArgs {
    fn apply(&self, s: &mut Settings) {
        s.set("r", self.r);
        s.set("w", self.w);
        s.set("t", self.t);
        s.set("lambda", self.lambda);
        s.set("delta", self.delta);
        s.set("i_max", self.i_max);
    }
}

#[derive(Debug, Args, Default)]
pub struct ThresholdArgs {
    /// Slope of the affine threshold, as a decimal.
    #[arg(long)]
    pub a: Option<String>,
    /// Intercept of the affine threshold, as a decimal.
    #[arg(long)]
    pub b: Option<String>,
    /// `full` or the number of fractional bits kept.
    #[arg(long)]
    pub precision: Option<String>,
    /// Columns per layer block: `full` (non-layered) or a positive integer.
    #[arg(long)]
    pub block: Option<String>,
    /// Maintain |s| incrementally as |s| + d - 2 sigma per flip.
    #[arg(long)]
    pub track_weight: Option<bool>,
    /// Truncate the /3 schedule terms to this many fractional bits.
    #[arg(long = "trunc-thirds")]
    pub thirds_bits: Option<u32>,
}

impl ThresholdArgs {
    fn apply(&self, s: &mut Settings) {
        s.set("a", self.a.as_ref());
        s.set("b", self.b.as_ref());
        s.set("precision", self.precision.as_ref());
        s.set("block", self.block.as_ref());
        s.set("track_weight", self.track_weight);
        s.set("thirds_bits", self.thirds_bits);
    }
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub r: Option<usize>,
    /// Column weight; defaults to w / 2.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Key fixture (`r`, `h0`, `h1`).
    #[arg(long)]
    pub key: PathBuf,
    /// Fixture with an error vector `e` or a syndrome `s`; defaults to the key file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct DfrArgs {
    #[arg(long = "r-list")]
    pub r_list: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV output (`r,trials,failures,dfr,ci_low,ci_high`); stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Extrapolation summary output.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Plot data file; a gnuplot script is written next to it.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Fit every nonzero point instead of the two lowest.
    #[arg(long)]
    pub fit_all: bool,
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long = "r-prime")]
    pub r_prime: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Candidate thresholds as `lo:hi`.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Per-sample CSV (`syndrome_weight,best_threshold`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fit summary CSV (`r_prime,a,b,n`).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Scatter plus fitted line, for plotting tools.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub block: Option<String>,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    /// Fractional bit budgets; repeat or comma-separate.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long)]
    pub r: u64,
    #[arg(long, default_value_t = 142)]
    pub w: u64,
    /// Parallelism: columns processed per clock cycle.
    #[arg(long = "L", visible_alias = "l", default_value_t = 32)]
    pub l: u64,
    #[arg(long, conflicts_with = "non_layered")]
    pub layered: bool,
    #[arg(long)]
    pub non_layered: bool,
    /// Logic cost in XOR equivalents; defaults to the design's tabulated value.
    #[arg(long)]
    pub logic_xors: Option<u64>,
    /// Multiply latency by this many iterations.
    #[arg(long)]
    pub latency_iterations: Option<u64>,
    /// Also report the other design at this r, normalised against it.
    #[arg(long)]
    pub compare_r: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExtrapolateArgs {
    /// Points as `r:dfr,r:dfr,...`.
    #[arg(long, conflicts_with = "csv")]
    pub points: Option<String>,
    /// A CSV written by `dfr`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub lambda: u32,
    #[arg(long)]
    pub fit_all: bool,
}

/// Runs a parsed command, writing reports to `out`. Returns the exit status.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    let mut settings = Settings::load(cli.preset.as_deref(), cli.config.as_deref())?;
    match cli.command {
        Command::Keygen(args) => cmd_keygen(args, &mut settings, out),
        Command::Decode(args) => cmd_decode(args, &mut settings, out),
        Command::Dfr(args) => cmd_dfr(args, &mut settings, out),
        Command::Calibrate(args) => cmd_calibrate(args, &mut settings, out),
        Command::Quantize(args) => cmd_quantize(args, out),
        Command::Cost(args) => cmd_cost(args, out),
        Command::Extrapolate(args) => cmd_extrapolate(args, out),
    }
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(Into::into),
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        bail!("workers must be at least 1");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}

fn cmd_keygen(args: KeygenArgs, s: &mut Settings, out: &mut dyn Write) -> Result<u8> {
    s.set("r", args.r);
    s.set("w", args.w);
    s.set("seed", args.seed);
    let r: usize = s.require("r")?;
    let d = match args.d {
        Some(d) => d,
        None => s.require::<usize>("w")? / 2,
    };
    if d == 0 || d >= r {
        bail!("need 0 < d < r (got d = {d}, r = {r})");
    }
    let mut rng = trial_rng(s.seed()?, 0);
    let generated = keygen_counted(r, d, &mut rng)?;
    write_output(args.out.as_deref(), &format_key(&generated.key), out)?;
    eprintln!("h0 resamples: {}", generated.h0_resamples);
    Ok(0)
}

fn cmd_decode(args: DecodeArgs, s: &mut Settings, out: &mut dyn Write) -> Result<u8> {
    let read = |p: &Path| -> Result<Fixture> {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        Fixture::parse(&text).with_context(|| format!("parsing {}", p.display()))
    };
    let key = read(&args.key)?.key().context("loading key")?;
    let input = match &args.input {
        Some(p) => read(p)?,
        None => read(&args.key)?,
    };
    let e_true = input.error()?;
    let s0 = match (&e_true, input.syndrome()?) {
        (_, Some(s0)) => s0,
        (Some(e), None) => key.syndrome(e)?,
        (None, None) => bail!("input fixture has neither `e` nor `s`"),
    };
    if s0.len() != key.r() {
        bail!("syndrome length {} does not match key r = {}", s0.len(), key.r());
    }
    s.set("r", Some(key.r()));
    s.set("w", Some(key.w()));
    s.set("t", Some(e_true.as_ref().map_or(0, |e| e.weight())));
    args.code.apply(s);
    args.threshold.apply(s);
    let cfg = s.decoder_config()?;
    let outcome = decode(&key, &s0, &cfg)?;
    let mut text = String::new();
    for line in &outcome.trace {
        text.push_str(&format!("{line}\n"));
    }
    text.push_str(&format!("converged: {}\n", outcome.converged));
    if let Some(e) = &e_true {
        text.push_str(&format!("matches_error: {}\n", &outcome.error_estimate == e));
    }
    text.push_str(&format_vector("e", &outcome.error_estimate));
    out.write_all(text.as_bytes())?;
    Ok(if outcome.converged { 0 } else { EXIT_DECODING_FAILURE })
}

fn cmd_dfr(args: DfrArgs, s: &mut Settings, out: &mut dyn Write) -> Result<u8> {
    args.code.apply(s);
    args.threshold.apply(s);
    s.set("r_list", args.r_list.as_ref());
    s.set("trials", args.trials);
    s.set("seed", args.seed);
    s.set("workers", args.workers);
    let r_list: Vec<usize> = match s.raw("r_list") {
        Some(list) => parse_list(list)?,
        None => vec![s.require("r")?],
    };
    let first = *r_list.first().ok_or_else(|| anyhow!("empty r list"))?;
    s.set("r", Some(first));
    let cfg = s.decoder_config()?;
    let trials: u64 = s.get("trials")?.unwrap_or(10_000);
    let seed = s.seed()?;
    let fit = if args.fit_all { FitMethod::All } else { FitMethod::TwoLowest };
    let report = with_workers(s.require("workers")?, || dfr::sweep(&cfg, &r_list, trials, seed, fit))??;

    let mut csv = Vec::new();
    dfr::write_csv(&mut csv, &report.estimates)?;
    let csv = String::from_utf8(csv)?;
    let summary = report
        .extrapolation
        .map(|x| format!("{EXTRAPOLATION_HEADER}\n{}\n", x.csv_line()));
    if let Some(w) = &report.warning {
        eprintln!("warning: {w}");
    }
    match &args.out {
        Some(p) => {
            write_output(Some(p), &csv, out)?;
            if args.summary.is_none() {
                if let Some(sm) = &summary {
                    out.write_all(sm.as_bytes())?;
                }
            }
        }
        None => {
            out.write_all(csv.as_bytes())?;
            if let (Some(sm), None) = (&summary, &args.summary) {
                writeln!(out)?;
                out.write_all(sm.as_bytes())?;
            }
        }
    }
    if let Some(p) = &args.summary {
        // header only when the sweep admits no extrapolation
        let text = summary.unwrap_or_else(|| format!("{EXTRAPOLATION_HEADER}\n"));
        write_output(Some(p), &text, out)?;
    }
    if let Some(p) = &args.plot {
        fs::write(p, dfr::plot_data(&report.estimates, report.extrapolation.as_ref()))?;
        let script = p.with_extension("gp");
        fs::write(&script, dfr::gnuplot_script(&p.display().to_string()))?;
    }
    Ok(0)
}

fn cmd_calibrate(args: CalibrateArgs, s: &mut Settings, out: &mut dyn Write) -> Result<u8> {
    s.set("r_prime", args.r_prime);
    s.set("samples", args.samples);
    s.set("range", args.range.as_ref());
    s.set("seed", args.seed);
    s.set("workers", args.workers);
    s.set("w", args.w);
    s.set("t", args.t);
    s.set("block", args.block.as_ref());
    let r_prime: usize = s.get("r_prime")?.map_or_else(|| s.require("r"), Ok)?;
    s.set("r", Some(r_prime));
    let cfg = CalibrationConfig {
        r_prime,
        params: s.code_params()?,
        schedule: s.require::<Schedule>("block")?,
        num_samples: s.get("samples")?.unwrap_or(DEFAULT_SAMPLES),
        range: match s.raw("range") {
            Some(r) => parse_range(r)?,
            None => calibration::DEFAULT_RANGE,
        },
        master_seed: s.seed()?,
    };
    let run = with_workers(s.require("workers")?, || calibration::calibrate(&cfg))??;
    let fit = run.fit;
    let summary = format!("r_prime,a,b,n\n{},{},{},{}\n", fit.r_prime, fit.a, fit.b, fit.num_samples);
    if let Some(p) = &args.out {
        let mut csv = String::from("syndrome_weight,best_threshold\n");
        for smp in &run.samples {
            csv.push_str(&format!("{},{}\n", smp.initial_syndrome_weight, smp.best_threshold));
        }
        fs::write(p, csv)?;
    }
    write_output(args.summary.as_deref(), &summary, out)?;
    if args.summary.is_some() {
        out.write_all(summary.as_bytes())?;
    }
    if let Some(p) = &args.plot {
        let mut data = String::from("# syndrome_weight best_threshold fitted\n");
        for smp in &run.samples {
            let x = smp.initial_syndrome_weight as f64;
            data.push_str(&format!("{} {} {}\n", x, smp.best_threshold, fit.a * x + fit.b));
        }
        fs::write(p, data)?;
    }
    Ok(0)
}

/// Fractional digits shown for full-precision coefficients.
const FULL_PRECISION_DIGITS: u32 = 20;

pub fn quantize_report(a: &str, b: &str, ks: &[u32]) -> Result<String> {
    let full = ThresholdCoefficients::from_decimal(a, b)?;
    let mut rows = vec![(
        "full".to_string(),
        [
            (format_binary(full.a(), FULL_PRECISION_DIGITS), a.trim().to_string()),
            (format_binary(full.b(), FULL_PRECISION_DIGITS), b.trim().to_string()),
        ],
    )];
    for &k in ks {
        let q = full.quantize(k)?;
        let (a_bits, b_bits) = q.fraction_widths().expect("quantized");
        rows.push((
            format!("{k} bits"),
            [
                (format_binary(q.a(), a_bits), format_exact(q.a())),
                (format_binary(q.b(), b_bits), format_exact(q.b())),
            ],
        ));
    }
    let mut text = format!("{:<10}{:<7}{:<40}{}\n", "precision", "coeff", "binary", "decimal");
    for (label, coeffs) in rows {
        for (name, (bin, dec)) in ["a", "b"].iter().zip(coeffs) {
            text.push_str(&format!("{label:<10}{name:<7}{bin:<40}{dec}\n"));
        }
    }
    Ok(text)
}

fn cmd_quantize(args: QuantizeArgs, out: &mut dyn Write) -> Result<u8> {
    out.write_all(quantize_report(&args.a, &args.b, &args.k)?.as_bytes())?;
    Ok(0)
}

fn cmd_cost(args: CostArgs, out: &mut dyn Write) -> Result<u8> {
    if args.r == 0 || args.l == 0 || args.w == 0 || !args.w.is_multiple_of(2) {
        bail!("r and L must be positive and w positive and even");
    }
    let layered = !args.non_layered;
    let logic = |layered: bool| if layered { LAYERED_LOGIC_XORS } else { NON_LAYERED_LOGIC_XORS };
    let report = CostReport::new(
        args.r,
        args.w,
        args.l,
        layered,
        args.logic_xors.unwrap_or(logic(layered)),
        args.latency_iterations,
    );
    match args.compare_r {
        None => write!(out, "{report}")?,
        Some(r2) => {
            let baseline = CostReport::new(r2, args.w, args.l, !layered, logic(!layered), args.latency_iterations);
            write!(out, "{}", CostComparison { proposed: report, baseline })?;
        }
    }
    Ok(0)
}

fn cmd_extrapolate(args: ExtrapolateArgs, out: &mut dyn Write) -> Result<u8> {
    let points: Vec<(f64, f64)> = match (&args.points, &args.csv) {
        (Some(p), _) => parse_list::<String>(p)?
            .iter()
            .map(|pair| {
                let (r, p) = pair
                    .split_once(':')
                    .ok_or_else(|| anyhow!("point must look like r:dfr, got {pair:?}"))?;
                Ok((r.trim().parse()?, p.trim().parse()?))
            })
            .collect::<Result<_>>()?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            text.lines()
                .skip(1)
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    let cols: Vec<&str> = l.split(',').collect();
                    if cols.len() < 4 {
                        bail!("malformed CSV row {l:?}");
                    }
                    Ok((cols[0].parse()?, cols[3].parse()?))
                })
                .collect::<Result<_>>()?
        }
        (None, None) => bail!("give --points or --csv"),
    };
    let x = if args.fit_all {
        dfr::extrapolate_fit_all(&points, args.lambda)?
    } else {
        dfr::extrapolate(&points, args.lambda)?
    };
    writeln!(out, "{EXTRAPOLATION_HEADER}\n{}", x.csv_line())?;
    Ok(0)
}
