//! Command definitions and the pipelines behind them.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dyadic_weights_core::cz::{build_sparse, cz_decompose};
use dyadic_weights_core::harness::{
    self, check_exponents, depth_sweep, SuiteConfig, VerificationReport, DEFAULT_C_DESK,
};
use dyadic_weights_core::operators::{dyadic_maximal, MaximalQuery};
use dyadic_weights_core::weights::{self, Discretization, WeightClass, WeightSpec};
use dyadic_weights_core::StepFunction;

use crate::format::{self, Real};
use crate::{CliError, OUTPUT_DIR_VAR};

/// Tabulation depth used when a power weight has to become a step function.
const POWER_TABULATION_DEPTH: u32 = 8;

#[derive(Debug, Parser)]
#[command(
    name = "dyadic-weights",
    version,
    about = "Dyadic maximal operators and multiplier weight classes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight class constants with the cubes attaining them
    Constants(Options),
    /// Dyadic maximal function of a step function
    Maximal(Options),
    /// Calderón-Zygmund level sets and the sparse family
    Cz(Options),
    /// Root-power and subset inequality suites
    Lemmas(Options),
    /// Measured multiplier ratios against the sufficiency bound
    Verify(Options),
    /// Dual-indicator lower bounds on every cube
    Necessity(Options),
}

impl Command {
    pub fn options(&self) -> &Options {
        match self {
            Self::Constants(o)
            | Self::Maximal(o)
            | Self::Cz(o)
            | Self::Lemmas(o)
            | Self::Verify(o)
            | Self::Necessity(o) => o,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct Options {
    /// Weight file, or the function for `maximal` and `cz`
    #[arg(long = "weight", visible_alias = "function", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Weight of the weighted maximal operator (`maximal` only)
    #[arg(long, value_name = "FILE")]
    pub measure: Option<PathBuf>,
    #[arg(long = "p")]
    pub p: Option<f64>,
    #[arg(long = "q")]
    pub q: Option<f64>,
    /// Fractional order
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Lattice depth: refines tabulated inputs, sets the analytic lattice of
    /// power weights for `constants`, and their tabulation depth elsewhere
    #[arg(long)]
    pub depth: Option<u32>,
    /// Calderón-Zygmund base
    #[arg(long = "a")]
    pub base: Option<f64>,
    /// Reverse Hölder exponent
    #[arg(long = "r", default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Report path; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_C_DESK)]
    pub c_desk: f64,
    /// Number of seeded random functions in the sufficiency suite
    #[arg(long, default_value_t = 200)]
    pub functions: usize,
    /// Plot-data CSV path
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
    /// Depths for the power-weight sweep, comma separated
    #[arg(long, value_delimiter = ',')]
    pub depth_sweep: Vec<u32>,
}

/// Text of the report and plot data, and the overall verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub report: String,
    pub plot: Option<String>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn input(o: &Options) -> Result<&Path, CliError> {
    o.input
        .as_deref()
        .ok_or_else(|| usage("--weight (or --function) is required"))
}

fn need_p(o: &Options) -> Result<f64, CliError> {
    o.p.ok_or_else(|| usage("--p is required"))
}

fn refine(f: StepFunction, depth: Option<u32>) -> Result<StepFunction, CliError> {
    match depth {
        None => Ok(f),
        Some(d) if d >= f.grid().depth() => Ok(f.refine(d)?),
        Some(d) => Err(usage(format!(
            "--depth {d} is below the input depth {}",
            f.grid().depth()
        ))),
    }
}

fn with_depth(w: WeightSpec, depth: Option<u32>) -> Result<WeightSpec, CliError> {
    match (w, depth) {
        (WeightSpec::Tabulated { step, allow_zeros }, d) => Ok(WeightSpec::Tabulated {
            step: refine(step, d)?,
            allow_zeros,
        }),
        (WeightSpec::Power(pw), Some(d)) => Ok(WeightSpec::power(pw.with_depth(d))),
        (w, None) => Ok(w),
    }
}

/// A tabulated weight for the suites that work cell by cell.
fn tabulated(w: WeightSpec, p: f64, depth: Option<u32>) -> Result<WeightSpec, CliError> {
    match w {
        WeightSpec::Power(pw) => {
            let d = depth.unwrap_or(POWER_TABULATION_DEPTH);
            Ok(WeightSpec::tabulated(
                pw.tabulate(d, Discretization::DualAverage { p })?,
            )?)
        }
        w => with_depth(w, depth),
    }
}

fn exponents(o: &Options, dim: usize) -> Result<(), CliError> {
    if o.alpha != 0.0 {
        check_exponents(need_p(o)?, o.q, o.alpha, dim)?;
    }
    Ok(())
}

fn no_plot(o: &Options, command: &str) -> Result<(), CliError> {
    if o.plot_data.is_some() {
        return Err(usage(format!("`{command}` writes no plot data")));
    }
    Ok(())
}

fn report_outcome(o: &Options, report: &VerificationReport) -> Result<Outcome, CliError> {
    let json = format::ReportJson::from(report);
    let text = match o.format {
        OutputFormat::Json => format::to_json(&json),
        OutputFormat::Csv => format::report_csv(&json)?,
    };
    let plot = match o.plot_data {
        Some(_) => Some(format::cube_plot_csv(&json)?),
        None => None,
    };
    Ok(Outcome {
        passed: report.passed,
        report: text,
        plot,
    })
}

fn constants(o: &Options) -> Result<Outcome, CliError> {
    let path = input(o)?;
    let w = format::read_weight(path)?;
    let sweep_source = w.clone();
    let w = with_depth(w, o.depth)?;
    exponents(o, w.dim())?;
    if o.q.is_some() && o.p.is_none() {
        return Err(usage("--q needs --p"));
    }
    let mut classes = Vec::new();
    if let Some(p) = o.p {
        classes.push(WeightClass::Ap { p });
    }
    classes.push(WeightClass::A1);
    if let (Some(p), Some(q)) = (o.p, o.q) {
        classes.push(WeightClass::Apq { p, q });
        classes.push(WeightClass::A1q { q });
    }
    classes.push(WeightClass::ReverseHolder { r: o.r });
    if let Some(p) = o.p {
        classes.push(WeightClass::ApStar { p });
        if let Some(q) = o.q {
            classes.push(WeightClass::ApqStar { p, q });
        }
        if w.as_step().is_some() {
            classes.push(WeightClass::ApStarKernel { p });
        }
    }
    let constants = classes
        .into_iter()
        .map(|class| weights::constant(&w, class).map(|c| format::ConstantJson::from(&c)))
        .collect::<Result<Vec<_>, _>>()?;
    let sigma_rh = match o.p {
        Some(p) => {
            let rh = weights::sigma_rh_constant(&w, p, o.q)?;
            Some(format::SigmaRhJson {
                c: Real(rh.c),
                value: Real(rh.sigma_rh),
            })
        }
        None => None,
    };
    let depth_rows = if o.depth_sweep.is_empty() {
        Vec::new()
    } else {
        let WeightSpec::Power(pw) = &sweep_source else {
            return Err(usage("--depth-sweep needs a power weight"));
        };
        depth_sweep(pw, need_p(o)?, &o.depth_sweep)?
            .iter()
            .map(format::DepthRowJson::from)
            .collect()
    };
    let plot = match &o.plot_data {
        None => None,
        Some(_) if depth_rows.is_empty() => {
            return Err(usage(
                "`constants` writes plot data only with --depth-sweep",
            ))
        }
        Some(_) => Some(format::depth_plot_csv(&depth_rows)?),
    };
    let report = format::ConstantsReport {
        weight: w.label(),
        seed: o.seed,
        constants,
        sigma_rh,
        depth_sweep: depth_rows,
    };
    let text = match o.format {
        OutputFormat::Json => format::to_json(&report),
        OutputFormat::Csv => format::constants_csv(&report)?,
    };
    Ok(Outcome {
        passed: true,
        report: text,
        plot,
    })
}

fn maximal(o: &Options) -> Result<Outcome, CliError> {
    no_plot(o, "maximal")?;
    let f = refine(format::read_function(input(o)?)?, o.depth)?;
    let measure = match &o.measure {
        Some(path) => Some(refine(format::read_function(path)?, o.depth)?),
        None => None,
    };
    let (kind, query) = match (&measure, o.alpha) {
        (None, 0.0) => ("plain", MaximalQuery::Plain),
        (None, alpha) => ("fractional", MaximalQuery::Fractional { alpha }),
        (Some(weight), 0.0) => ("weighted", MaximalQuery::Weighted { weight }),
        (Some(weight), alpha) => (
            "fractional-weighted",
            MaximalQuery::FractionalWeighted { alpha, weight },
        ),
    };
    let m = dyadic_maximal(&f, query)?;
    let text = match o.format {
        OutputFormat::Json => format::to_json(&format::MaximalReport {
            kind: kind.to_string(),
            alpha: Real(o.alpha),
            seed: o.seed,
            function: format::StepFile::from_step(&f),
            values: m.values().iter().copied().map(Real).collect(),
        }),
        OutputFormat::Csv => format::maximal_csv(&f, &m)?,
    };
    Ok(Outcome {
        passed: true,
        report: text,
        plot: None,
    })
}

fn cz(o: &Options) -> Result<Outcome, CliError> {
    no_plot(o, "cz")?;
    let f = refine(format::read_function(input(o)?)?, o.depth)?;
    let dec = cz_decompose(&f, o.base, o.alpha)?;
    let family = build_sparse(&dec)?;
    let passed = dec.verify().is_ok() && family.verify().is_ok();
    let report = format::CzReport::new(&dec, &family, o.seed);
    let text = match o.format {
        OutputFormat::Json => format::to_json(&report),
        OutputFormat::Csv => format::family_csv(&report)?,
    };
    Ok(Outcome {
        passed,
        report: text,
        plot: None,
    })
}

fn lemmas(o: &Options) -> Result<Outcome, CliError> {
    no_plot(o, "lemmas")?;
    let p = need_p(o)?;
    let w = tabulated(format::read_weight(input(o)?)?, p, o.depth)?;
    exponents(o, w.dim())?;
    let report = harness::lemma_suite(&w, p, o.q, o.seed)?;
    report_outcome(o, &report)
}

fn verify(o: &Options) -> Result<Outcome, CliError> {
    let p = need_p(o)?;
    let w = format::read_weight(input(o)?)?;
    let mut config = SuiteConfig {
        seed: o.seed,
        random_functions: o.functions,
        c_desk: o.c_desk,
        ..SuiteConfig::default()
    };
    let w = match w {
        WeightSpec::Power(pw) => {
            if let Some(d) = o.depth {
                config.tabulation_depth = d;
            }
            WeightSpec::Power(pw)
        }
        w => with_depth(w, o.depth)?,
    };
    let report = harness::sufficiency_check(&w, p, o.alpha, o.q, &config)?;
    report_outcome(o, &report)
}

fn necessity(o: &Options) -> Result<Outcome, CliError> {
    let p = need_p(o)?;
    let w = tabulated(format::read_weight(input(o)?)?, p, o.depth)?;
    let report = harness::necessity_check(&w, p, o.alpha, o.q)?;
    report_outcome(o, &report)
}

/// Runs a command without touching the filesystem beyond reading inputs.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Constants(o) => constants(o),
        Command::Maximal(o) => maximal(o),
        Command::Cz(o) => cz(o),
        Command::Lemmas(o) => lemmas(o),
        Command::Verify(o) => verify(o),
        Command::Necessity(o) => necessity(o),
    }
}

/// Relative paths land under the output-directory override when it is set.
pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    let path = resolve_output(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

/// Executes the command and writes its artifacts. Returns the verdict.
pub fn run(command: &Command) -> Result<bool, CliError> {
    let outcome = execute(command)?;
    let o = command.options();
    match &o.output {
        Some(path) => write(path, &outcome.report)?,
        None => print!("{}", outcome.report),
    }
    if let (Some(path), Some(plot)) = (&o.plot_data, &outcome.plot) {
        write(path, plot)?;
    }
    Ok(outcome.passed)
}
