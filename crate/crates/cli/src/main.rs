mod input;
mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rankfx::analysis::{analyze, AnalysisOptions, HypothesisRequest};
use rankfx::effects::{effect_function_grid, empirical_effect_function};
use rankfx::inference::{Method, Transform, DEFAULT_MC_RUNS};
use rankfx::simulation::{
    default_delta_grid, power_curve, type_one_error, Alternative, Distribution, SimConfig, SimSetting,
};

#[derive(Parser)]
#[command(
    name = "rankfx",
    version,
    about = "Rank-based tests for relative treatment effects in factorial designs",
    after_help = "\
Examples:
  rankfx analyze --data builtin:leucocyte
  rankfx analyze --data trial.csv --response y --factors dose,site --hypothesis A,AB
  rankfx simulate --setting 1 --dist normal --m 5 --nsim 2000 --seed 42
  rankfx simulate --power --alt trend --n 15 --out power.csv
  rankfx effect-fn --data builtin:leucocyte --coeffs 0.25,-0.25,-0.25,0.25"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate effects and test hypotheses for a dataset
    Analyze(AnalyzeArgs),
    /// Monte-Carlo type-I error or power study (one-way, four groups)
    Simulate(SimulateArgs),
    /// Export an empirical effect function as (x, value) rows
    EffectFn(EffectFnArgs),
    /// Print the text view of a saved JSON analysis report
    Render {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Args, Clone)]
pub struct DataArgs {
    /// CSV file in long format, or builtin:leucocyte
    #[arg(long)]
    data: String,

    /// Response column
    #[arg(long)]
    response: Option<String>,

    /// One or two factor columns, comma-separated
    #[arg(long, value_delimiter = ',')]
    factors: Vec<String>,

    /// Explicit level order, e.g. --levels treatment=placebo,drug (repeatable)
    #[arg(long)]
    levels: Vec<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Hypotheses: oneway, A, B, AB, custom:<file.csv> (default: all for the layout)
    #[arg(long, value_delimiter = ',')]
    hypothesis: Vec<String>,

    /// Methods: ats-f, ats-box, ats-eigen, wald, kw
    #[arg(long, value_delimiter = ',', default_value = "ats-f,ats-box,ats-eigen,wald")]
    methods: Vec<String>,

    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Confidence interval transform: logit or identity
    #[arg(long, default_value = "logit")]
    transform: String,

    #[arg(long, default_value_t = DEFAULT_MC_RUNS)]
    mc_runs: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Write <out>.txt and <out>.json instead of printing the text report
    #[arg(long)]
    out: Option<PathBuf>,

    /// Print the JSON report to stdout
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Setting 1-5
    #[arg(long, default_value_t = 1)]
    setting: u8,

    /// Custom group sizes (overrides --setting)
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,

    /// Custom scale factors, used with --sizes
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,

    /// normal, double-exponential or lognormal
    #[arg(long, default_value = "normal")]
    dist: String,

    /// Added to every base group size
    #[arg(long, default_value_t = 0)]
    m: usize,

    #[arg(long)]
    nsim: Option<usize>,

    /// Use 10,000 replications
    #[arg(long)]
    full_scale: bool,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    #[arg(long, value_delimiter = ',', default_value = "kw,wald,ats-eigen,ats-box,ats-f")]
    methods: Vec<String>,

    #[arg(long, default_value_t = DEFAULT_MC_RUNS)]
    mc_runs: usize,

    /// Power study over δ = 0.0, 0.1, ..., 1.6
    #[arg(long)]
    power: bool,

    /// one-point or trend
    #[arg(long, default_value = "one-point")]
    alt: String,

    /// Per-group size for the power study
    #[arg(long, default_value_t = 15)]
    n: usize,

    /// Custom δ grid
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<f64>,

    /// CSV output path; a JSON report is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EffectFnArgs {
    #[command(flatten)]
    data: DataArgs,

    /// One coefficient per cell, comma-separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    coeffs: Vec<f64>,

    /// Extra evenly spaced points between neighbouring observed values
    #[arg(long, default_value_t = 0)]
    refine: usize,

    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list<T: std::str::FromStr<Err = rankfx::Error>>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| Ok(s.parse::<T>()?)).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha <= 0.5) {
        bail!("--alpha must lie in (0, 0.5], got {}", args.alpha);
    }
    let data = input::load_dataset(&args.data)?;
    let mut hypotheses = Vec::new();
    for h in &args.hypothesis {
        match h.strip_prefix("custom:") {
            Some(path) => hypotheses.push(HypothesisRequest::Custom(rankfx::io::load_contrast_csv(path)?)),
            None => hypotheses.push(h.parse()?),
        }
    }
    let methods: Vec<Method> = parse_list(&args.methods)?;
    if methods.is_empty() {
        bail!("at least one method is required");
    }
    let options = AnalysisOptions {
        hypotheses,
        methods,
        alpha: args.alpha,
        transform: args.transform.parse::<Transform>()?,
        mc_runs: args.mc_runs,
        seed: args.seed,
    };
    let report = analyze(&data, &options)?;
    let text = render::analysis_text(&report);
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(prefix) => {
            write_file(&prefix.with_extension("txt"), &text)?;
            write_file(&prefix.with_extension("json"), &json)?;
        }
        None if args.json => print!("{json}"),
        None => print!("{text}"),
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let nsim = match (args.nsim, args.full_scale) {
        (Some(n), _) => n,
        (None, true) => 10_000,
        (None, false) => 2_000,
    };
    let config = SimConfig {
        nsim,
        alpha: args.alpha,
        seed: args.seed,
        methods: parse_list(&args.methods)?,
        mc_runs: args.mc_runs,
    };
    let (csv, json) = if args.power {
        let alt: Alternative = args.alt.parse()?;
        let deltas = if args.deltas.is_empty() { default_delta_grid() } else { args.deltas.clone() };
        let table = power_curve(alt, &deltas, args.n, &config)?;
        (render::power_csv(&table)?, serde_json::to_string_pretty(&table)?)
    } else {
        let dist: Distribution = args.dist.parse()?;
        let setting = if args.sizes.is_empty() {
            SimSetting::standard(args.setting, args.m, dist)?
        } else {
            let k = args.sizes.len();
            let sigma = if args.sigma.is_empty() { vec![1.0; k] } else { args.sigma.clone() };
            let sizes = args.sizes.iter().map(|n| n + args.m).collect();
            SimSetting::custom(sizes, sigma, vec![0.0; k], dist)?
        };
        let report = type_one_error(&setting, &config)?;
        (render::type_one_csv(&report)?, serde_json::to_string_pretty(&report)?)
    };
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            write_file(&path.with_extension("json"), &(json + "\n"))?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_effect_fn(args: EffectFnArgs) -> Result<()> {
    let data = input::load_dataset(&args.data)?;
    let grid = effect_function_grid(&data, args.refine);
    let rows = empirical_effect_function(&data, &args.coeffs, &grid)?;
    let csv = render::effect_fn_csv(&rows)?;
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_render(path: &Path) -> Result<()> {
    let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report: rankfx::Report = serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))?;
    print!("{}", render::analysis_text(&report));
    Ok(())
}

fn error_json(err: &anyhow::Error) -> String {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<rankfx::Error>())
        .map(|e| e.kind())
        .unwrap_or("usage");
    // library errors already render their own sources
    let mut parts = Vec::new();
    for e in err.chain() {
        parts.push(e.to_string());
        if e.downcast_ref::<rankfx::Error>().is_some() {
            break;
        }
    }
    let message = parts.join(": ");
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Simulate(a) => run_simulate(a),
        Command::EffectFn(a) => run_effect_fn(a),
        Command::Render { report } => run_render(&report),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
