use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use repweight_core::apportion::{self, UnitWeights};
use repweight_core::metrics::compute_for_bodies;
use repweight_core::model::{
    ApportionmentSource, AwardMethod, BaselineVariant, Body, Dataset, Scenario, ScenarioOverrides,
    UnitKind, Variable,
};
use repweight_core::report::{self, FigureInputs, FigureKind, TableFormat};
use repweight_core::trends::{compute_trends, TrendSeries};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{ApiError, ApiResult};
use crate::params::{parse_bodies, Params};
use crate::{AppState, Loaded, VERSION};

type QueryMap = Query<BTreeMap<String, String>>;

fn loaded(state: &AppState) -> ApiResult<Arc<Loaded>> {
    state.get().ok_or_else(ApiError::loading)
}

fn dataset(loaded: &Loaded, year: u16) -> ApiResult<&Dataset> {
    loaded.datasets.get(&year).ok_or_else(|| {
        ApiError::not_found("year_not_found", format!("no data loaded for {year}")).with_details(
            serde_json::json!({ "year": year, "available": loaded.datasets.keys().collect::<Vec<_>>() }),
        )
    })
}

fn require_variable(ds: &Dataset, variable: Variable) -> ApiResult<()> {
    ds.require_table(variable).map(|_| ()).map_err(ApiError::from)
}

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("not_found", "no such route")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub years: Vec<u16>,
}

pub async fn health(State(state): State<AppState>) -> ApiResult<Json<Health>> {
    let loaded = loaded(&state)?;
    Ok(Json(Health {
        status: "ok".into(),
        version: VERSION.into(),
        years: loaded.datasets.keys().copied().collect(),
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub census_year: u16,
    pub states: usize,
    pub districts: usize,
    pub has_dc: bool,
    pub has_pr: bool,
    pub variables: Vec<Variable>,
}

pub async fn datasets(State(state): State<AppState>) -> ApiResult<Json<Vec<DatasetSummary>>> {
    let loaded = loaded(&state)?;
    Ok(Json(
        loaded
            .datasets
            .values()
            .map(|ds| DatasetSummary {
                census_year: ds.census_year,
                states: ds.states().len(),
                districts: ds.units_of_kind(UnitKind::District).count(),
                has_dc: ds.units_of_kind(UnitKind::Dc).next().is_some(),
                has_pr: ds.unit("PR").is_some(),
                variables: ds.variables(),
            })
            .collect(),
    ))
}

/// Rows exactly as the command line renders them with `--format json`.
pub async fn metrics(State(state): State<AppState>, Query(q): QueryMap) -> ApiResult<Response> {
    let p = Params::new(q, &["year", "variable", "body", "baseline"])?;
    let (year, variable, bodies, baseline) = (p.year()?, p.variable()?, p.bodies()?, p.baseline()?);
    let loaded = loaded(&state)?;
    require_variable(dataset(&loaded, year)?, variable)?;
    let scenario = Scenario {
        baseline_variant: baseline,
        ..Scenario::default()
    };
    let bytes = blocking(move || {
        let ds = &loaded.datasets[&year];
        let rows = compute_for_bodies(ds, variable, &bodies, &scenario)?;
        Ok(report::render_table(&rows, TableFormat::Json))
    })
    .await?;
    Ok(json_bytes(bytes))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRequest {
    pub year: u16,
    pub variable: Variable,
    /// A body name or `all` (the default).
    #[serde(default)]
    pub body: Option<String>,
    #[serde(default)]
    pub baseline_variant: Option<BaselineVariant>,
    #[serde(default)]
    pub elector_award_method: BTreeMap<String, AwardMethod>,
    #[serde(default)]
    pub house_seat_total: Option<u32>,
    #[serde(default)]
    pub apportionment_source: Option<ApportionmentSource>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllocationSummary {
    pub body: Body,
    pub total_votes: u32,
    pub units: usize,
    pub votes_by_state: BTreeMap<String, u32>,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ScenarioResponse {
    pub year: u16,
    pub variable: Variable,
    pub scenario: Scenario,
    /// Same bytes as `GET /metrics` for the same slice and scenario.
    pub rows: Box<RawValue>,
    pub allocations: Vec<AllocationSummary>,
    /// House seats per state, when the House is among the requested bodies.
    pub seats: Option<BTreeMap<String, u32>>,
}

pub async fn scenario(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: ScenarioRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request("invalid_scenario", e.to_string()))?;
    let bodies = parse_bodies(req.body.as_deref())?;
    let scenario = ScenarioOverrides {
        baseline_variant: req.baseline_variant,
        elector_award_method: req.elector_award_method,
        house_seat_total: req.house_seat_total,
        apportionment_source: req.apportionment_source,
    }
    .into_scenario();
    let loaded = loaded(&state)?;
    let ds_year = dataset(&loaded, req.year)?;
    require_variable(ds_year, req.variable)?;
    scenario.validate(ds_year.states().len())?;
    let (year, variable) = (req.year, req.variable);

    let response = blocking(move || {
        let ds = &loaded.datasets[&year];
        let mut allocations = Vec::new();
        let mut seats = None;
        for body in &bodies {
            let a = apportion::build_body(ds, *body, &scenario)?;
            if *body == Body::House {
                seats = Some(apportion::seats_by_state(&a));
            }
            allocations.push(AllocationSummary {
                body: a.body,
                total_votes: a.total_votes,
                units: a.units.len(),
                votes_by_state: a
                    .votes_by_state()
                    .into_iter()
                    .map(|(s, v)| (s.to_string(), v))
                    .collect(),
                notes: a.notes.clone(),
            });
        }
        let rows = compute_for_bodies(ds, variable, &bodies, &scenario)?;
        let raw = String::from_utf8(report::render_table(&rows, TableFormat::Json))
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let rows = RawValue::from_string(raw).map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(ScenarioResponse {
            year,
            variable,
            scenario,
            rows,
            allocations,
            seats,
        })
    })
    .await?;
    Ok(Json(response).into_response())
}

fn select_years(loaded: &Loaded, years: Option<Vec<u16>>) -> ApiResult<BTreeMap<u16, Dataset>> {
    match years {
        None => Ok(loaded.datasets.clone()),
        Some(ys) => ys
            .into_iter()
            .map(|y| dataset(loaded, y).map(|d| (y, d.clone())))
            .collect(),
    }
}

fn trend_series(
    loaded: &Loaded,
    years: Option<Vec<u16>>,
    variable: Variable,
    baseline: BaselineVariant,
) -> ApiResult<Vec<TrendSeries>> {
    let datasets = select_years(loaded, years)?;
    let scenario = Scenario {
        baseline_variant: baseline,
        ..Scenario::default()
    };
    let series = compute_trends(&datasets, variable, &scenario)?;
    if series.is_empty() {
        return Err(ApiError::not_found(
            "variable_not_found",
            format!("no {variable} table in the requested years"),
        ));
    }
    Ok(series)
}

pub async fn trends(State(state): State<AppState>, Query(q): QueryMap) -> ApiResult<Json<Vec<TrendSeries>>> {
    let p = Params::new(q, &["years", "variable", "baseline"])?;
    let (years, variable, baseline) = (p.years()?, p.variable()?, p.baseline()?);
    let loaded = loaded(&state)?;
    if let Some(ys) = &years {
        for y in ys {
            dataset(&loaded, *y)?;
        }
    }
    let series = blocking(move || trend_series(&loaded, years, variable, baseline)).await?;
    Ok(Json(series))
}

fn unit_weights(ds: &Dataset, bodies: &[Body], baseline: BaselineVariant) -> ApiResult<Vec<UnitWeights>> {
    let scenario = Scenario {
        baseline_variant: baseline,
        ..Scenario::default()
    };
    let population = ds.baseline_population(baseline)?;
    bodies
        .iter()
        .map(|b| {
            let a = apportion::build_body(ds, *b, &scenario)?;
            Ok(apportion::unit_weight(ds, &a, population)?)
        })
        .collect()
}

pub async fn units(State(state): State<AppState>, Query(q): QueryMap) -> ApiResult<Json<Vec<UnitWeights>>> {
    let p = Params::new(q, &["year", "body", "baseline"])?;
    let (year, bodies, baseline) = (p.year()?, p.bodies()?, p.baseline()?);
    let loaded = loaded(&state)?;
    dataset(&loaded, year)?;
    let weights = blocking(move || unit_weights(&loaded.datasets[&year], &bodies, baseline)).await?;
    Ok(Json(weights))
}

pub async fn figure(
    State(state): State<AppState>,
    Path(kind): Path<String>,
    Query(q): QueryMap,
) -> ApiResult<Response> {
    let kind: FigureKind = kind.parse()?;
    let p = Params::new(q, &["year", "years", "variable", "body", "baseline"])?;
    let baseline = p.baseline()?;
    let loaded = loaded(&state)?;
    let inputs = match kind {
        FigureKind::ProportionsFig2 => {
            let (year, variable, bodies) = (p.year()?, p.variable()?, p.bodies()?);
            require_variable(dataset(&loaded, year)?, variable)?;
            let scenario = Scenario {
                baseline_variant: baseline,
                ..Scenario::default()
            };
            blocking(move || {
                let rows = compute_for_bodies(&loaded.datasets[&year], variable, &bodies, &scenario)?;
                Ok(FigureInputs::Metrics(rows))
            })
            .await?
        }
        FigureKind::UnitWeightsFig1 => {
            let (year, bodies) = (p.year()?, p.bodies()?);
            dataset(&loaded, year)?;
            blocking(move || {
                Ok(FigureInputs::UnitWeights(unit_weights(&loaded.datasets[&year], &bodies, baseline)?))
            })
            .await?
        }
        FigureKind::TrendsFig3 => {
            let (years, variable) = (p.years()?, p.variable()?);
            blocking(move || Ok(FigureInputs::Trends(trend_series(&loaded, years, variable, baseline)?))).await?
        }
    };
    let doc = report::figure_document(kind, &inputs)?;
    Ok((StatusCode::OK, Json(doc)).into_response())
}
