//! `repweight`: validate extracts, compute representation metrics and trends,
//! and serve them over HTTP.
//!
//! Exit codes: 0 success, 1 domain violation (invalid data, unbuildable
//! allocation), 2 usage or environment error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use repweight_core::model::{BaselineVariant, Variable};

#[derive(Debug, Parser)]
#[command(name = "repweight", version, about = "Demographic representation weights for the House, Senate and Electoral College")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate extract files or directories of them.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Compute the metrics table for one year and variable.
    Metrics(MetricsArgs),
    /// Compute absolute-weight series across census years.
    Trends(TrendsArgs),
    /// Per-unit and per-state absolute population weights.
    Units(UnitsArgs),
    /// Emit a plotting-ready figure document as JSON.
    Figure(FigureArgs),
    /// Download one variable from a Census-style API as an extract file.
    Fetch(FetchArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct DataDir {
    /// Directory of extract files.
    #[arg(long, env = "ELEC_DATA_DIR")]
    data_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BodyArg {
    House,
    Senate,
    Ec,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

fn parse_variable(s: &str) -> Result<Variable, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_baseline(s: &str) -> Result<BaselineVariant, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[command(flatten)]
    data: DataDir,
    #[arg(long)]
    year: u16,
    #[arg(long, value_parser = parse_variable)]
    variable: Variable,
    #[arg(long, value_enum, default_value = "all")]
    body: BodyArg,
    /// Overrides the scenario file's baseline.
    #[arg(long, value_parser = parse_baseline)]
    baseline: Option<BaselineVariant>,
    /// Scenario overrides as TOML, or JSON when the file ends in `.json`.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrendsArgs {
    #[command(flatten)]
    data: DataDir,
    /// Comma-separated census years; defaults to every loaded year.
    #[arg(long, value_delimiter = ',')]
    years: Option<Vec<u16>>,
    #[arg(long, value_parser = parse_variable)]
    variable: Variable,
    #[arg(long, value_parser = parse_baseline)]
    baseline: Option<BaselineVariant>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct UnitsArgs {
    #[command(flatten)]
    data: DataDir,
    #[arg(long)]
    year: u16,
    #[arg(long, value_enum, default_value = "all")]
    body: BodyArg,
    #[arg(long, value_parser = parse_baseline)]
    baseline: Option<BaselineVariant>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigureArg {
    #[value(name = "unit_weights_fig1", alias = "unit_weights")]
    UnitWeightsFig1,
    #[value(name = "proportions_fig2", alias = "proportions")]
    ProportionsFig2,
    #[value(name = "trends_fig3", alias = "trends")]
    TrendsFig3,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[command(flatten)]
    data: DataDir,
    #[arg(long, value_enum)]
    kind: FigureArg,
    /// Year for the proportions and unit-weight figures.
    #[arg(long)]
    year: Option<u16>,
    /// Years for the trends figure.
    #[arg(long, value_delimiter = ',')]
    years: Option<Vec<u16>>,
    #[arg(long, value_parser = parse_variable)]
    variable: Option<Variable>,
    #[arg(long, value_parser = parse_baseline)]
    baseline: Option<BaselineVariant>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GeographyArg {
    State,
    District,
}

#[derive(Debug, Args)]
struct FetchArgs {
    /// Dataset endpoint, e.g. https://api.census.gov/data/2020/dec/dhc
    #[arg(long)]
    endpoint: String,
    #[arg(long)]
    year: u16,
    #[arg(long, value_parser = parse_variable)]
    variable: Variable,
    #[arg(long, value_enum, default_value = "state")]
    geography: GeographyArg,
    #[arg(long, env = "CENSUS_API_KEY", hide_env_values = true)]
    api_key: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    data: DataDir,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Allowed CORS origin; repeatable. Defaults to any origin.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { paths } => commands::validate(&paths),
        Command::Metrics(a) => commands::metrics(a),
        Command::Trends(a) => commands::trends(a),
        Command::Units(a) => commands::units(a),
        Command::Figure(a) => commands::figure(a),
        Command::Fetch(a) => commands::fetch(a),
        Command::Serve(a) => commands::serve(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
