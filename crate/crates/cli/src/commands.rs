use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use repweight_core::apportion::{self, UnitWeights};
use repweight_core::ingest::fetch::{fetch_extract, FetchError, FetchQuery, Geography};
use repweight_core::ingest::{load_files, parse_extract};
use repweight_core::metrics::compute_for_bodies;
use repweight_core::model::{Body, Dataset, Scenario, ScenarioOverrides, Variable};
use repweight_core::report::{self, format_weight, FigureInputs, FigureKind, TableFormat};
use repweight_core::trends::{compute_trends, TrendSeries};
use repweight_core::validate::{validate_dataset, Severity};
use repweight_core::{registry, Error as CoreError};
use repweight_service::{router, AppState, ServiceConfig};

use crate::{
    BodyArg, FetchArgs, FigureArg, FigureArgs, Format, GeographyArg, MetricsArgs, ServeArgs,
    TrendsArgs, UnitsArgs,
};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            error: error.into(),
        }
    }

    fn domain(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 1,
            error: error.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(_)
            | CoreError::MissingTable { .. }
            | CoreError::InvalidScenario(_)
            | CoreError::TooFewSeats { .. }
            | CoreError::NoHarmonizationPath { .. } => Failure::usage(e),
            _ => Failure::domain(e),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

/// Files named on the command line plus the `*.csv` files of any directory.
fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Failure::usage(anyhow!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            out.extend(files);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(Failure::usage(anyhow!("{}: no such file or directory", p.display())));
        }
    }
    Ok(out)
}

pub fn validate(paths: &[PathBuf]) -> CmdResult {
    let files = expand(paths)?;
    let mut parse_failures = 0;
    for f in &files {
        let file = std::fs::File::open(f).map_err(|e| Failure::usage(anyhow!("{}: {e}", f.display())))?;
        if let Err(e) = parse_extract(file) {
            println!("error {}: {e}", f.display());
            parse_failures += 1;
        }
    }
    if parse_failures > 0 {
        println!("{parse_failures} file(s) failed to parse");
        return Ok(ExitCode::from(1));
    }
    let (units, tables) = load_files(&files)?;
    let report = validate_dataset(&units, &tables);
    for issue in &report.issues {
        println!("{issue}");
    }
    let errors = report.errors().count();
    let warnings = report.issues.iter().filter(|i| i.severity == Severity::Warning).count();
    println!(
        "{} file(s), {} unit(s), {} table(s): {errors} error(s), {warnings} warning(s)",
        files.len(),
        units.len(),
        tables.len()
    );
    Ok(if report.is_valid() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Loads and validates every extract in `dir`, grouped by year.
pub fn load_data_dir(dir: &Path) -> Result<BTreeMap<u16, Dataset>, Failure> {
    if !dir.is_dir() {
        return Err(Failure::usage(anyhow!(
            "data directory {} does not exist",
            dir.display()
        )));
    }
    let files = expand(&[dir.to_path_buf()])?;
    if files.is_empty() {
        return Err(Failure::usage(anyhow!("no .csv extracts in {}", dir.display())));
    }
    let (units, tables) = load_files(&files)?;
    let report = validate_dataset(&units, &tables);
    if !report.is_valid() {
        for issue in report.errors() {
            eprintln!("{issue}");
        }
        return Err(Failure::domain(anyhow!(
            "{} validation error(s) in {}",
            report.errors().count(),
            dir.display()
        )));
    }
    Ok(Dataset::by_year(units, tables))
}

fn year_of(datasets: &BTreeMap<u16, Dataset>, year: u16) -> Result<&Dataset, Failure> {
    datasets.get(&year).ok_or_else(|| {
        let loaded: Vec<String> = datasets.keys().map(|y| y.to_string()).collect();
        Failure::usage(anyhow!("no data for {year} (loaded: {})", loaded.join(", ")))
    })
}

fn select_years(
    datasets: BTreeMap<u16, Dataset>,
    years: Option<Vec<u16>>,
) -> Result<BTreeMap<u16, Dataset>, Failure> {
    let Some(years) = years else {
        return Ok(datasets);
    };
    let mut out = BTreeMap::new();
    for y in years {
        out.insert(y, year_of(&datasets, y)?.clone());
    }
    Ok(out)
}

fn bodies(arg: BodyArg) -> Vec<Body> {
    match arg {
        BodyArg::House => vec![Body::House],
        BodyArg::Senate => vec![Body::Senate],
        BodyArg::Ec => vec![Body::Ec],
        BodyArg::All => Body::ALL.to_vec(),
    }
}

pub fn read_scenario(path: &Path) -> Result<ScenarioOverrides, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(anyhow!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(anyhow::Error::from)
    } else {
        toml::from_str(&text).map_err(anyhow::Error::from)
    };
    parsed.map_err(|e| Failure::usage(e.context(format!("invalid scenario file {}", path.display()))))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::usage(anyhow!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            let mut write = || -> std::io::Result<()> {
                stdout.write_all(bytes)?;
                if !bytes.ends_with(b"\n") {
                    stdout.write_all(b"\n")?;
                }
                stdout.flush()
            };
            match write() {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::usage(anyhow!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn table_format(f: Format) -> TableFormat {
    match f {
        Format::Csv => TableFormat::Csv,
        Format::Json => TableFormat::Json,
        Format::Text => TableFormat::Text,
    }
}

pub fn metrics(a: MetricsArgs) -> CmdResult {
    let mut scenario = match &a.scenario_file {
        Some(p) => read_scenario(p)?.into_scenario(),
        None => Scenario::default(),
    };
    if let Some(b) = a.baseline {
        scenario.baseline_variant = b;
    }
    let datasets = load_data_dir(&a.data.data_dir)?;
    let ds = year_of(&datasets, a.year)?;
    scenario.validate(ds.states().len())?;
    let rows = compute_for_bodies(ds, a.variable, &bodies(a.body), &scenario)?;
    write_output(a.out.as_deref(), &report::render_table(&rows, table_format(a.format)))?;
    Ok(ExitCode::SUCCESS)
}

fn render_trends(series: &[TrendSeries], format: Format) -> Vec<u8> {
    match format {
        Format::Json => serde_json::to_vec(series).expect("trend series serialize"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["variable", "body", "category", "year", "aw"]).expect("in-memory write");
            for s in series {
                for p in &s.points {
                    w.write_record([
                        s.variable.as_str().to_string(),
                        s.body.as_str().to_string(),
                        s.category_code.clone(),
                        p.census_year.to_string(),
                        p.absolute_weight.map(|x| x.to_string()).unwrap_or_default(),
                    ])
                    .expect("in-memory write");
                }
            }
            w.into_inner().expect("in-memory flush")
        }
        Format::Text => {
            let mut out = String::new();
            let Some(first) = series.first() else {
                return out.into_bytes();
            };
            let years: Vec<u16> = {
                let mut y: Vec<u16> = series.iter().flat_map(|s| s.points.iter().map(|p| p.census_year)).collect();
                y.sort();
                y.dedup();
                y
            };
            let label = |s: &TrendSeries| {
                format!("{} / {}", s.body.display(), registry::display_name(s.variable, &s.category_code))
            };
            let w = series.iter().map(|s| label(s).len()).max().unwrap_or(0);
            let _ = writeln!(out, "{} absolute weights ({})", first.variable.display(), first.unit_of_analysis);
            let mut head = format!("{:w$}", "");
            for y in &years {
                let _ = write!(head, " {y:>7}");
            }
            let _ = writeln!(out, "{head}");
            for s in series {
                let mut line = format!("{:<w$}", label(s));
                for y in &years {
                    let v = s.points.iter().find(|p| p.census_year == *y).map(|p| p.absolute_weight);
                    let cell = v.map(format_weight).unwrap_or_default();
                    let _ = write!(line, " {cell:>7}");
                }
                let _ = writeln!(out, "{}", line.trim_end());
            }
            let mut notes: Vec<&String> = series.iter().flat_map(|s| &s.assumptions).collect();
            notes.sort();
            notes.dedup();
            for n in notes {
                let _ = writeln!(out, "note: {n}");
            }
            out.into_bytes()
        }
    }
}

fn scenario_with(baseline: Option<repweight_core::model::BaselineVariant>) -> Scenario {
    let mut s = Scenario::default();
    if let Some(b) = baseline {
        s.baseline_variant = b;
    }
    s
}

fn trend_series(
    datasets: BTreeMap<u16, Dataset>,
    years: Option<Vec<u16>>,
    variable: Variable,
    scenario: &Scenario,
) -> Result<Vec<TrendSeries>, Failure> {
    let selected = select_years(datasets, years)?;
    let series = compute_trends(&selected, variable, scenario)?;
    if series.is_empty() {
        return Err(Failure::usage(anyhow!("no {variable} table in the selected years")));
    }
    Ok(series)
}

pub fn trends(a: TrendsArgs) -> CmdResult {
    let datasets = load_data_dir(&a.data.data_dir)?;
    let series = trend_series(datasets, a.years, a.variable, &scenario_with(a.baseline))?;
    write_output(a.out.as_deref(), &render_trends(&series, a.format))?;
    Ok(ExitCode::SUCCESS)
}

fn unit_weights(ds: &Dataset, bodies: &[Body], scenario: &Scenario) -> Result<Vec<UnitWeights>, Failure> {
    let population = ds.baseline_population(scenario.baseline_variant)?;
    bodies
        .iter()
        .map(|b| {
            let a = apportion::build_body(ds, *b, scenario)?;
            Ok(apportion::unit_weight(ds, &a, population)?)
        })
        .collect()
}

pub fn units(a: UnitsArgs) -> CmdResult {
    let datasets = load_data_dir(&a.data.data_dir)?;
    let ds = year_of(&datasets, a.year)?;
    let weights = unit_weights(ds, &bodies(a.body), &scenario_with(a.baseline))?;
    write_output(a.out.as_deref(), &serde_json::to_vec(&weights).expect("weights serialize"))?;
    Ok(ExitCode::SUCCESS)
}

pub fn figure(a: FigureArgs) -> CmdResult {
    let need = |what: &str| Failure::usage(anyhow!("--{what} is required for this figure"));
    let datasets = load_data_dir(&a.data.data_dir)?;
    let scenario = scenario_with(a.baseline);
    let (kind, inputs) = match a.kind {
        FigureArg::ProportionsFig2 => {
            let ds = year_of(&datasets, a.year.ok_or_else(|| need("year"))?)?;
            let variable = a.variable.ok_or_else(|| need("variable"))?;
            let rows = compute_for_bodies(ds, variable, &Body::ALL, &scenario)?;
            (FigureKind::ProportionsFig2, FigureInputs::Metrics(rows))
        }
        FigureArg::UnitWeightsFig1 => {
            let ds = year_of(&datasets, a.year.ok_or_else(|| need("year"))?)?;
            let weights = unit_weights(ds, &Body::ALL, &scenario)?;
            (FigureKind::UnitWeightsFig1, FigureInputs::UnitWeights(weights))
        }
        FigureArg::TrendsFig3 => {
            let variable = a.variable.ok_or_else(|| need("variable"))?;
            let series = trend_series(datasets, a.years, variable, &scenario)?;
            (FigureKind::TrendsFig3, FigureInputs::Trends(series))
        }
    };
    let doc = report::figure_document(kind, &inputs)?;
    write_output(a.out.as_deref(), &serde_json::to_vec_pretty(&doc).expect("figure serializes"))?;
    Ok(ExitCode::SUCCESS)
}

pub fn fetch(a: FetchArgs) -> CmdResult {
    let endpoint = url::Url::parse(&a.endpoint).map_err(|e| Failure::usage(anyhow!("--endpoint: {e}")))?;
    let query = FetchQuery {
        variable: a.variable,
        census_year: a.year,
        geography: match a.geography {
            GeographyArg::State => Geography::State,
            GeographyArg::District => Geography::CongressionalDistrict,
        },
        api_key: a.api_key,
    };
    let bytes = fetch_extract(&endpoint, &query).map_err(|e| match e {
        FetchError::Adapter(_) => Failure::domain(e),
        _ => Failure::usage(e),
    })?;
    write_output(a.out.as_deref(), &bytes)?;
    Ok(ExitCode::SUCCESS)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}

/// Binds, prints the readiness line, then loads the data directory in the
/// background; the health route answers 503 until loading finishes. A load
/// failure shuts the server down with exit code 2.
pub fn serve(a: ServeArgs) -> CmdResult {
    let dir = a.data.data_dir.clone();
    if !dir.is_dir() {
        return Err(Failure::usage(anyhow!("data directory {} does not exist", dir.display())));
    }
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::usage(anyhow!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((a.host.as_str(), a.port))
            .await
            .map_err(|e| Failure::usage(anyhow!("cannot bind {}:{}: {e}", a.host, a.port)))?;
        let addr = listener
            .local_addr()
            .map_err(|e| Failure::usage(anyhow!("{e}")))?;
        let config = if a.cors_origins.is_empty() {
            ServiceConfig::default()
        } else {
            ServiceConfig {
                cors_origins: a.cors_origins,
            }
        };
        let state = AppState::loading();
        let app = router(state.clone(), &config);

        let (fail_tx, fail_rx) = tokio::sync::oneshot::channel::<Failure>();
        let loader = tokio::task::spawn_blocking(move || match load_data_dir(&dir) {
            Ok(datasets) => {
                let years: Vec<String> = datasets.keys().map(|y| y.to_string()).collect();
                state.install(datasets);
                eprintln!("loaded census years {}", years.join(", "));
            }
            Err(mut f) => {
                f.code = 2;
                let _ = fail_tx.send(f);
            }
        });

        println!("repweight listening on http://{addr}");
        let _ = std::io::stdout().flush();

        let failure = std::sync::Arc::new(std::sync::Mutex::new(None::<Failure>));
        let slot = failure.clone();
        let shutdown = async move {
            tokio::select! {
                _ = shutdown_signal() => {}
                Ok(f) = fail_rx => {
                    *slot.lock().expect("failure slot") = Some(f);
                }
            }
        };
        repweight_service::serve(listener, app, shutdown)
            .await
            .map_err(|e| Failure::usage(anyhow!("server error: {e}")))?;
        let _ = loader.await;
        let taken = failure.lock().expect("failure slot").take();
        match taken {
            Some(f) => Err(f),
            None => Ok(ExitCode::SUCCESS),
        }
    })
}
