//! Absolute-weight series across census years on harmonized categories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::apportion;
use crate::error::{Error, Result};
use crate::ingest::{harmonize, HarmonizationMap};
use crate::metrics;
use crate::model::{Body, Dataset, Scenario, UnitOfAnalysis, Variable, CENSUS_YEARS};
use crate::registry::CategoryRegistry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub census_year: u16,
    pub absolute_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub variable: Variable,
    pub body: Body,
    pub category_code: String,
    pub unit_of_analysis: UnitOfAnalysis,
    pub points: Vec<TrendPoint>,
    /// Allocation assumptions for the years involved, prefixed by year.
    pub assumptions: Vec<String>,
}

/// Harmonizes each year's table, computes metrics for every body and
/// assembles one series per (body, category). Years whose dataset lacks the
/// variable are left out of the series.
pub fn compute_trends(
    datasets: &BTreeMap<u16, Dataset>,
    variable: Variable,
    scenario: &Scenario,
) -> Result<Vec<TrendSeries>> {
    let map = HarmonizationMap::trend(variable);
    let registry = CategoryRegistry::trend(variable);

    // (body, category) -> points
    let mut points: BTreeMap<(Body, &'static str), Vec<TrendPoint>> = BTreeMap::new();
    let mut notes: BTreeMap<Body, Vec<String>> = BTreeMap::new();

    for (year, dataset) in datasets {
        if !CENSUS_YEARS.contains(year) {
            return Err(Error::NoHarmonizationPath {
                variable,
                year: *year,
            });
        }
        let Some(table) = dataset.table(variable) else {
            continue;
        };
        let harmonized = harmonize(table, &map)?;
        for body in Body::ALL {
            let allocation = apportion::build_body(dataset, body, scenario)?;
            for n in &allocation.notes {
                notes.entry(body).or_default().push(format!("{year}: {n}"));
            }
            let rows = metrics::metrics_for_allocation(
                dataset,
                &harmonized,
                &allocation,
                scenario.baseline_variant,
            )?;
            for code in registry.codes() {
                let aw = rows
                    .iter()
                    .find(|r| r.category_code == code)
                    .and_then(|r| r.absolute_weight);
                points.entry((body, code)).or_default().push(TrendPoint {
                    census_year: *year,
                    absolute_weight: aw,
                });
            }
        }
    }

    let mut out = Vec::new();
    for body in Body::ALL {
        for code in registry.codes() {
            if let Some(p) = points.remove(&(body, code)) {
                out.push(TrendSeries {
                    variable,
                    body,
                    category_code: code.to_string(),
                    unit_of_analysis: variable.unit_of_analysis(),
                    points: p,
                    assumptions: notes.get(&body).cloned().unwrap_or_default(),
                });
            }
        }
    }
    Ok(out)
}
