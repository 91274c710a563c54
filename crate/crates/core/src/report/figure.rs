//! Plotting-ready figure documents.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::apportion::UnitWeights;
use crate::error::{Error, Result};
use crate::model::{Body, MetricsRow};
use crate::registry;
use crate::trends::TrendSeries;

/// Proportions below this share are drawn without a text label.
pub const LABEL_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    /// Per-state population share and absolute weight in each body.
    UnitWeightsFig1,
    /// Baseline and represented proportions by category.
    ProportionsFig2,
    /// Absolute weights across census years.
    TrendsFig3,
}

impl FigureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureKind::UnitWeightsFig1 => "unit_weights_fig1",
            FigureKind::ProportionsFig2 => "proportions_fig2",
            FigureKind::TrendsFig3 => "trends_fig3",
        }
    }
}

impl FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit_weights_fig1" | "unit_weights" => Ok(FigureKind::UnitWeightsFig1),
            "proportions_fig2" | "proportions" => Ok(FigureKind::ProportionsFig2),
            "trends_fig3" | "trends" => Ok(FigureKind::TrendsFig3),
            other => Err(Error::UnknownFigureKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub enum FigureInputs {
    Metrics(Vec<MetricsRow>),
    UnitWeights(Vec<UnitWeights>),
    Trends(Vec<TrendSeries>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    pub scale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigurePoint {
    pub x: Value,
    pub value: Option<f64>,
    pub label: Option<String>,
    pub labelled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSeries {
    pub label: String,
    pub body: Option<Body>,
    pub category_code: Option<String>,
    pub points: Vec<FigurePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureDocument {
    pub kind: FigureKind,
    pub title: String,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub series: Vec<FigureSeries>,
    pub notes: Vec<String>,
}

fn axis(label: &str, scale: &str) -> Axis {
    Axis {
        label: label.into(),
        scale: scale.into(),
    }
}

pub fn figure_data(kind: &str, inputs: &FigureInputs) -> Result<FigureDocument> {
    figure_document(kind.parse()?, inputs)
}

pub fn figure_document(kind: FigureKind, inputs: &FigureInputs) -> Result<FigureDocument> {
    match (kind, inputs) {
        (FigureKind::ProportionsFig2, FigureInputs::Metrics(rows)) => Ok(proportions(rows)),
        (FigureKind::UnitWeightsFig1, FigureInputs::UnitWeights(w)) => Ok(unit_weights(w)),
        (FigureKind::TrendsFig3, FigureInputs::Trends(t)) => Ok(trends(t)),
        (k, _) => Err(Error::FigureInputMismatch { kind: k.as_str() }),
    }
}

fn proportion_point(variable: crate::model::Variable, code: &str, p: f64) -> FigurePoint {
    let labelled = p >= LABEL_THRESHOLD;
    FigurePoint {
        x: Value::String(registry::display_name(variable, code)),
        value: Some(p),
        label: labelled.then(|| format!("{:.1}%", p * 100.0)),
        labelled,
    }
}

fn proportions(rows: &[MetricsRow]) -> FigureDocument {
    let mut rows: Vec<&MetricsRow> = rows.iter().collect();
    rows.sort_by_cached_key(|r| (r.body, registry::category_rank(r.variable, &r.category_code)));
    let mut series = Vec::new();
    let mut notes = Vec::new();
    if let Some(first) = rows.first() {
        let baseline_rows = rows.iter().filter(|r| r.body == first.body);
        series.push(FigureSeries {
            label: "Baseline".into(),
            body: None,
            category_code: None,
            points: baseline_rows
                .map(|r| proportion_point(r.variable, &r.category_code, r.pi0))
                .collect(),
        });
        notes.push(format!(
            "{} {}, baseline {}, proportions of {}",
            first.variable.display(),
            first.census_year,
            first.baseline_variant,
            first.unit_of_analysis
        ));
    }
    for body in Body::ALL {
        let points: Vec<FigurePoint> = rows
            .iter()
            .filter(|r| r.body == body)
            .map(|r| proportion_point(r.variable, &r.category_code, r.pib))
            .collect();
        if !points.is_empty() {
            series.push(FigureSeries {
                label: body.display().into(),
                body: Some(body),
                category_code: None,
                points,
            });
        }
    }
    notes.push(format!(
        "proportions under {:.0}% are not labelled",
        LABEL_THRESHOLD * 100.0
    ));
    FigureDocument {
        kind: FigureKind::ProportionsFig2,
        title: "Baseline and represented proportions".into(),
        x_axis: axis("Category", "categorical"),
        y_axis: axis("Proportion", "linear"),
        series,
        notes,
    }
}

fn unit_weights(weights: &[UnitWeights]) -> FigureDocument {
    let mut series = Vec::new();
    if let Some(first) = weights.first() {
        series.push(FigureSeries {
            label: "Population share".into(),
            body: None,
            category_code: None,
            points: first
                .states
                .iter()
                .map(|s| {
                    let share = s.population as f64 / first.baseline_population as f64;
                    FigurePoint {
                        x: Value::String(s.state_code.clone()),
                        value: Some(share),
                        label: None,
                        labelled: false,
                    }
                })
                .collect(),
        });
    }
    for w in weights {
        series.push(FigureSeries {
            label: w.body.display().into(),
            body: Some(w.body),
            category_code: None,
            points: w
                .states
                .iter()
                .map(|s| FigurePoint {
                    x: Value::String(s.state_code.clone()),
                    value: Some(s.weight),
                    label: Some(format!("{:.2}", s.weight)),
                    labelled: true,
                })
                .collect(),
        });
    }
    FigureDocument {
        kind: FigureKind::UnitWeightsFig1,
        title: "Absolute population weights by state".into(),
        x_axis: axis("State", "categorical"),
        y_axis: axis("Absolute weight", "log"),
        series,
        notes: vec!["district units are pooled into their state".into()],
    }
}

fn trends(series_in: &[TrendSeries]) -> FigureDocument {
    let mut notes: Vec<String> = Vec::new();
    let series = series_in
        .iter()
        .map(|s| {
            for a in &s.assumptions {
                if !notes.contains(a) {
                    notes.push(a.clone());
                }
            }
            FigureSeries {
                label: format!(
                    "{} / {}",
                    s.body.display(),
                    registry::display_name(s.variable, &s.category_code)
                ),
                body: Some(s.body),
                category_code: Some(s.category_code.clone()),
                points: s
                    .points
                    .iter()
                    .map(|p| FigurePoint {
                        x: Value::from(p.census_year),
                        value: p.absolute_weight,
                        label: None,
                        labelled: false,
                    })
                    .collect(),
            }
        })
        .collect();
    FigureDocument {
        kind: FigureKind::TrendsFig3,
        title: "Absolute weights across census years".into(),
        x_axis: axis("Census year", "linear"),
        y_axis: axis("Absolute weight", "linear"),
        series,
        notes,
    }
}
