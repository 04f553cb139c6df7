mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ordsel_core::selector::{Criterion, SelectMethod};
use ordsel_core::Direction;

#[derive(Parser, Debug)]
#[command(name = "ordsel", version, about = "AIC/BIC subset selection for the sequential logit model")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select the criterion-optimal feature subset.
    Select(SelectArgs),
    /// Refit the exact model on a fixed subset.
    Fit(FitArgs),
    /// Write the mixed-integer model as an LP file.
    Export(ExportArgs),
    /// Draw a synthetic dataset from a planted model.
    Synth(SynthArgs),
    /// Print a tangent set with slopes, offsets and kinks.
    Tangents(TangentsArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Name of the ordinal label column.
    #[arg(long)]
    label: String,
    /// Drop columns whose missing fraction exceeds this.
    #[arg(long, default_value_t = 0.10)]
    missing_threshold: f64,
    /// Keep numeric columns on their original scale.
    #[arg(long)]
    no_standardize: bool,
    /// Columns to ignore.
    #[arg(long, value_delimiter = ',')]
    drop: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = CriterionArg::Aic)]
    criterion: CriterionArg,
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    direction: DirectionArg,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::BnbPwl)]
    method: MethodArg,
    /// `default17` or a file with one tangent point per line (pwl only).
    #[arg(long)]
    tangents: Option<String>,
    /// Seconds before branch and bound returns its incumbent.
    #[arg(long, env = "ORDSEL_TIME_LIMIT", default_value_t = 600.0)]
    time_limit: f64,
    /// Write the JSON report here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Fit the class subproblems concurrently.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated feature names; omit for the intercept-only model.
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = ApproxArg::Pwl)]
    approx: ApproxArg,
    #[arg(long, value_enum, default_value_t = EncodingArg::Bigm)]
    encoding: EncodingArg,
    #[arg(long, default_value_t = 100.0)]
    big_m: f64,
    /// `default17` or a tangent file (pwl only).
    #[arg(long)]
    tangents: Option<String>,
    #[arg(long, value_enum, default_value_t = NamingArg::Indexed)]
    naming: NamingArg,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    p: usize,
    /// Number of classes minus one.
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    true_features: usize,
    #[arg(long, default_value_t = 1.0)]
    coef_scale: f64,
    /// CSV destination.
    #[arg(long)]
    output: PathBuf,
    /// Ground-truth JSON destination.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TangentsArgs {
    #[arg(long, default_value = "default17")]
    tangents: String,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CriterionArg {
    Aic,
    Bic,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Aic => Criterion::Aic,
            CriterionArg::Bic => Criterion::Bic,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum DirectionArg {
    Forward,
    Backward,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    Exhaustive,
    BnbExact,
    BnbPwl,
    BnbQuad,
    Stepwise,
}

impl From<MethodArg> for SelectMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exhaustive => SelectMethod::Exhaustive,
            MethodArg::BnbExact => SelectMethod::BnbExact,
            MethodArg::BnbPwl => SelectMethod::BnbPwl,
            MethodArg::BnbQuad => SelectMethod::BnbQuad,
            MethodArg::Stepwise => SelectMethod::Stepwise,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ApproxArg {
    Pwl,
    Quad,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EncodingArg {
    Bigm,
    Sos1,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum NamingArg {
    Indexed,
    Names,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let result = match cli.command {
        Command::Select(args) => commands::select(args),
        Command::Fit(args) => commands::fit(args),
        Command::Export(args) => commands::export(args),
        Command::Synth(args) => commands::synth(args),
        Command::Tangents(args) => commands::tangents(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
