//! Command-line front end.
//!
//! Settings resolve in the order flag (or `PIOU_THREADS` for the thread
//! count), then the `--config` file, then built-in defaults. Output files are
//! named `<command>-<seed>.<ext>` inside `--out-dir` and written atomically.

use std::ffi::OsString;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::annot::{self, AnnotationFormat, SynthConfig};
use crate::error::{Error, Result};
use crate::exact::exact_iou;
use crate::gradcheck::{gradcheck_csv, run_gradcheck, GradCheckConfig};
use crate::harness::report::{fig1_csv, reports_csv, reports_svg, trace_csv, trace_svg, write_atomic};
use crate::harness::{
    aspect_suite, compare_losses, fig1_pairs, find_scenario, fit, horizontal, standard_suite, FitConfig, LossKind,
    LossSpec, Optimizer, Scenario,
};
use crate::obb::Obb;
use crate::piou::{soft_overlap_with_budget, HalfExtentMode, KernelConfig, UnionMode};
use crate::pixel::{hard_overlap_with_budget, DEFAULT_SAMPLE_BUDGET};

const DEFAULT_SUPERSAMPLE: u32 = 4;

#[derive(Debug, Parser)]
#[command(name = "piou", version, about = "Oriented-box IoU oracles, the PIoU loss, and regression experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Directory for output files [default: .]
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Random seed; also part of every output file name [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: logical CPUs]
    #[arg(long, global = true, env = "PIOU_THREADS")]
    pub threads: Option<usize>,
    /// TOML file of key = value defaults (k, half_extent_mode, union_mode,
    /// supersample, out_dir, seed, threads); flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Kernel sensitivity [default: 10]
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Kernel threshold placement [default: corrected]
    #[arg(long, global = true, value_enum)]
    pub half_extent_mode: Option<HalfExtentArg>,
    /// PIoU union [default: soft]
    #[arg(long, global = true, value_enum)]
    pub union_mode: Option<UnionArg>,
    /// Pixel-oracle supersampling factor [default: 4]
    #[arg(long, global = true)]
    pub supersample: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfExtentArg {
    Corrected,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnionArg {
    Soft,
    Hard,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// IoU of two boxes with one of the three backends
    Iou(IouArgs),
    /// Compare analytic PIoU gradients with finite differences on random boxes
    Gradcheck(GradcheckArgs),
    /// Regress one scenario's initial box toward its target
    Fit(FitArgs),
    /// Fit a scenario suite under several losses and kernel sensitivities
    Sweep(SweepArgs),
    /// Emit box triples where SmoothL1 ties but IoU does not
    Fig1,
    /// Convert quadrilateral annotations to oriented boxes
    Convert(ConvertArgs),
    /// Generate a synthetic quadrilateral annotation set
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Pixel,
    Piou,
}

#[derive(Debug, Args)]
pub struct IouArgs {
    /// First box as cx,cy,w,h,theta_deg
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    pub a: Obb,
    /// Second box as cx,cy,w,h,theta_deg
    #[arg(long, value_parser = parse_box, allow_hyphen_values = true)]
    pub b: Obb,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
    /// Cap on grid samples for the pixel and piou methods
    #[arg(long, default_value_t = DEFAULT_SAMPLE_BUDGET)]
    pub max_samples: u64,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Number of random configurations
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Largest acceptable relative error
    #[arg(long, default_value_t = 1e-4)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Gd,
    Momentum,
}

#[derive(Debug, Args)]
pub struct FitOptions {
    #[arg(long, value_enum, default_value_t = OptimizerArg::Momentum)]
    pub optimizer: OptimizerArg,
    /// Initial step length
    #[arg(long, default_value_t = 1.0)]
    pub lr: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_steps: usize,
    /// Std. deviation of seeded jitter on the initial center, pixels
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    /// Drop all angles to zero (needed for giou_horizontal)
    #[arg(long)]
    pub horizontal: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Scenario id, e.g. ratio20-rot or ratio20-comb-b
    #[arg(long, default_value = "ratio20-rot")]
    pub scenario: String,
    /// piou, hpiou, l1, l2, smooth_l1 or giou_horizontal
    #[arg(long, default_value = "piou", value_parser = parse_loss)]
    pub loss: LossKind,
    #[command(flatten)]
    pub opts: FitOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Aspect ratios 1, 5, 20 under the four perturbation kinds
    Standard,
    /// Twelve scenarios at the ratio given by --ratio
    Aspect,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Kernel sensitivities for the kernel-based losses
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,30")]
    pub ks: Vec<f64>,
    /// Losses to compare
    #[arg(long, value_delimiter = ',', default_value = "piou", value_parser = parse_loss)]
    pub losses: Vec<LossKind>,
    #[arg(long, value_enum, default_value_t = Suite::Standard)]
    pub suite: Suite,
    /// Aspect ratio for --suite aspect
    #[arg(long, default_value_t = 20.0)]
    pub ratio: f64,
    /// Explicit scenario ids; overrides --suite
    #[arg(long, value_delimiter = ',')]
    pub scenarios: Vec<String>,
    /// Include wall-clock seconds (makes the CSV run-dependent)
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub opts: FitOptions,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Annotation file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output CSV [default: <out-dir>/convert-<seed>.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Input format [default: csv for .csv files, jsonl otherwise]
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of records
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Median long:short side ratio
    #[arg(long, default_value_t = 20.0)]
    pub median_ratio: f64,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output file [default: <out-dir>/synth-<seed>.<csv|jsonl>]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `cx,cy,w,h,theta_deg`.
pub fn parse_box(s: &str) -> std::result::Result<Obb, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(format!("expected cx,cy,w,h,theta_deg, got {s:?}"));
    }
    let mut v = [0.0; 5];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("not a number: {p:?}"))?;
    }
    Obb::from_degrees(v[0], v[1], v[2], v[3], v[4]).map_err(|e| e.to_string())
}

fn parse_loss(s: &str) -> std::result::Result<LossKind, String> {
    LossKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = LossKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown loss {s:?}; expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    k: Option<f64>,
    half_extent_mode: Option<HalfExtentArg>,
    union_mode: Option<UnionArg>,
    supersample: Option<u32>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub kernel: KernelConfig,
    pub supersample: u32,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Config {
    pub fn resolve(g: &GlobalArgs) -> Result<Config> {
        let file = match &g.config {
            Some(p) => {
                let text = fs::read_to_string(p)?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {}", p.display(), e.message())))?
            }
            None => FileConfig::default(),
        };
        let mut kernel = KernelConfig::with_k(g.k.or(file.k).unwrap_or(10.0));
        kernel.half_extent_mode = match g.half_extent_mode.or(file.half_extent_mode) {
            Some(HalfExtentArg::Literal) => HalfExtentMode::Literal,
            _ => HalfExtentMode::Corrected,
        };
        kernel.union_mode = match g.union_mode.or(file.union_mode) {
            Some(UnionArg::Hard) => UnionMode::Hard,
            _ => UnionMode::Soft,
        };
        kernel.validate()?;
        let supersample = g.supersample.or(file.supersample).unwrap_or(DEFAULT_SUPERSAMPLE);
        if supersample == 0 {
            return Err(Error::InvalidArgument("supersample must be at least 1".into()));
        }
        let threads = g.threads.or(file.threads);
        if threads == Some(0) {
            return Err(Error::InvalidArgument("threads must be at least 1".into()));
        }
        Ok(Config {
            kernel,
            supersample,
            out_dir: g.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
            seed: g.seed.or(file.seed).unwrap_or(0),
            threads,
        })
    }

    fn output(&self, command: &str, ext: &str) -> PathBuf {
        self.out_dir.join(format!("{command}-{}.{ext}", self.seed))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GridTooLarge { .. } => 3,
        Error::InvalidBox(_) | Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

/// Parses arguments, runs the command and maps failures to exit codes:
/// 2 for bad arguments, 3 for an exceeded sample budget, 1 otherwise.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    let cfg = Config::resolve(&cli.global)?;
    if let Some(n) = cfg.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Iou(a) => cmd_iou(&cfg, a),
        Command::Gradcheck(a) => cmd_gradcheck(&cfg, a),
        Command::Fit(a) => cmd_fit(&cfg, a),
        Command::Sweep(a) => cmd_sweep(&cfg, a),
        Command::Fig1 => cmd_fig1(&cfg),
        Command::Convert(a) => cmd_convert(&cfg, a),
        Command::Synth(a) => cmd_synth(&cfg, a),
    }
}

fn cmd_iou(cfg: &Config, a: &IouArgs) -> Result<ExitCode> {
    let (name, iou) = match a.method {
        Method::Exact => ("exact", exact_iou(&a.a, &a.b)),
        Method::Pixel => ("pixel", hard_overlap_with_budget(&a.a, &a.b, cfg.supersample, a.max_samples)?.iou),
        Method::Piou => ("piou", soft_overlap_with_budget(&a.a, &a.b, &cfg.kernel, false, a.max_samples)?.piou()),
    };
    println!("method={name} iou={iou:.6}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_gradcheck(cfg: &Config, a: &GradcheckArgs) -> Result<ExitCode> {
    let cases = run_gradcheck(&GradCheckConfig {
        count: a.count,
        seed: cfg.seed,
        k: cfg.kernel.k,
        ..GradCheckConfig::default()
    })?;
    let path = cfg.output("gradcheck", "csv");
    write_atomic(&path, &gradcheck_csv(&cases)?)?;
    let max = cases.iter().map(|c| c.max_rel_err()).fold(0.0, f64::max);
    let disjoint = cases.iter().filter(|c| c.disjoint).count();
    println!(
        "cases={} disjoint={disjoint} max_rel_err={max:e} threshold={:e} out={}",
        cases.len(),
        a.threshold,
        path.display()
    );
    let pass = cases.is_empty() || max < a.threshold;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn fit_config(cfg: &Config, o: &FitOptions) -> FitConfig {
    FitConfig {
        optimizer: match o.optimizer {
            OptimizerArg::Gd => Optimizer::Gd,
            OptimizerArg::Momentum => Optimizer::GdMomentum,
        },
        lr: o.lr,
        max_steps: o.max_steps,
        seed: cfg.seed,
        init_jitter: o.jitter,
    }
}

fn lookup(id: &str) -> Result<Scenario> {
    find_scenario(id).ok_or_else(|| Error::InvalidArgument(format!("unknown scenario {id:?}")))
}

fn cmd_fit(cfg: &Config, a: &FitArgs) -> Result<ExitCode> {
    let mut s = lookup(&a.scenario)?;
    if a.opts.horizontal {
        s = horizontal(&s);
    }
    let spec = LossSpec::new(a.loss).with_kernel(cfg.kernel);
    let trace = fit(&s.init, &s.target, &spec, &fit_config(cfg, &a.opts))?;
    let csv_path = cfg.output("fit", "csv");
    let svg_path = cfg.output("fit", "svg");
    write_atomic(&csv_path, &trace_csv(&trace)?)?;
    write_atomic(&svg_path, trace_svg(&format!("{} / {}", s.id, a.loss), &trace).as_bytes())?;
    let reach = trace.steps_to_reach().map(|n| n.to_string()).unwrap_or_else(|| "-".into());
    println!(
        "scenario={} loss={} status={} steps={} final_iou={:.6} steps_to_0.9={reach}",
        s.id,
        a.loss,
        trace.status.name(),
        trace.last().step,
        trace.final_iou()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(cfg: &Config, a: &SweepArgs) -> Result<ExitCode> {
    let mut scenarios = if a.scenarios.is_empty() {
        match a.suite {
            Suite::Standard => standard_suite(),
            Suite::Aspect => aspect_suite(a.ratio),
        }
    } else {
        a.scenarios.iter().map(|id| lookup(id)).collect::<Result<Vec<_>>>()?
    };
    if a.opts.horizontal {
        scenarios = scenarios.iter().map(horizontal).collect();
    }
    if a.ks.is_empty() || a.losses.is_empty() {
        return Err(Error::InvalidArgument("need at least one k and one loss".into()));
    }
    let mut specs = Vec::new();
    for &loss in &a.losses {
        let base = LossSpec::new(loss).with_kernel(cfg.kernel);
        if loss.uses_kernel() {
            specs.extend(a.ks.iter().map(|&k| base.with_k(k)));
        } else {
            specs.push(base);
        }
    }
    let reports = compare_losses(&scenarios, &specs, &fit_config(cfg, &a.opts))?;
    let csv_path = cfg.output("sweep", "csv");
    write_atomic(&csv_path, &reports_csv(&reports, a.timings)?)?;
    write_atomic(&cfg.output("sweep", "svg"), reports_svg("final exact IoU per scenario", &reports).as_bytes())?;
    let reached = reports.iter().filter(|r| r.steps_to_reach.is_some()).count();
    println!("runs={} reached_0.9={reached} out={}", reports.len(), csv_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_fig1(cfg: &Config) -> Result<ExitCode> {
    let triples = fig1_pairs(&cfg.kernel)?;
    let path = cfg.output("fig1", "csv");
    write_atomic(&path, &fig1_csv(&triples)?)?;
    println!("triples={} out={}", triples.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

fn input_format(path: &Path, explicit: Option<FormatArg>) -> AnnotationFormat {
    let fmt = explicit.unwrap_or_else(|| {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            FormatArg::Csv
        } else {
            FormatArg::Jsonl
        }
    });
    match fmt {
        FormatArg::Jsonl => AnnotationFormat::JsonLines,
        FormatArg::Csv => AnnotationFormat::Csv,
    }
}

fn cmd_convert(cfg: &Config, a: &ConvertArgs) -> Result<ExitCode> {
    let file = fs::File::open(&a.input)?;
    let records = annot::parse_annotations(BufReader::new(file), input_format(&a.input, a.format))?;
    let mut bytes = Vec::new();
    annot::write_obb_csv(&records, &mut bytes)?;
    let path = a.out.clone().unwrap_or_else(|| cfg.output("convert", "csv"));
    write_atomic(&path, &bytes)?;
    let corrected = records.iter().filter(|r| r.orientation_corrected).count();
    let oob = records.iter().filter(|r| r.out_of_bounds).count();
    if oob > 0 {
        eprintln!("warning: {oob} record(s) have vertices outside the image");
    }
    println!(
        "records={} boxes={} orientation_corrected={corrected} out={}",
        records.len(),
        records.iter().map(|r| r.boxes.len()).sum::<usize>(),
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(cfg: &Config, a: &SynthArgs) -> Result<ExitCode> {
    let synth = SynthConfig {
        median_ratio: a.median_ratio,
        ..SynthConfig::default()
    };
    let records = annot::synth_dataset(a.n, &synth, cfg.seed)?;
    let mut bytes = Vec::new();
    let ext = match a.format {
        FormatArg::Csv => {
            annot::write_aqbb_csv(&records, &mut bytes)?;
            "csv"
        }
        FormatArg::Jsonl => {
            annot::write_jsonl(&records, &mut bytes)?;
            "jsonl"
        }
    };
    let path = a.out.clone().unwrap_or_else(|| cfg.output("synth", ext));
    write_atomic(&path, &bytes)?;
    println!("records={} out={}", records.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn box_strings() {
        let b = parse_box("1,-2,4,2,90").unwrap();
        assert_eq!((b.cx(), b.cy(), b.w(), b.h()), (1.0, -2.0, 4.0, 2.0));
        assert!((b.theta() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(parse_box("1,2,3").is_err());
        assert!(parse_box("0,0,-1,2,0").is_err());
        assert!(parse_box("0,0,a,2,0").is_err());
    }

    #[test]
    fn flags_beat_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("piou.toml");
        fs::write(&p, "k = 15\nseed = 4\nunion_mode = \"hard\"\n").unwrap();
        let cli = Cli::try_parse_from(["piou", "--config", p.to_str().unwrap(), "--k", "30", "fig1"]).unwrap();
        let cfg = Config::resolve(&cli.global).unwrap();
        assert_eq!(cfg.kernel.k, 30.0);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.kernel.union_mode, UnionMode::Hard);
        fs::write(&p, "kk = 1\n").unwrap();
        assert!(Config::resolve(&cli.global).is_err());
    }
}
