//! Dataset validation.
//!
//! Violations are collected into a report rather than returned as errors.
//! The report is sorted and deduplicated so that permuting the inputs yields
//! the same entries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{DemographicTable, GeoUnit, UnitKind, UnitOfAnalysis, CENSUS_YEARS};
use crate::registry::{self, CategoryRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub code: &'static str,
    pub census_year: Option<u16>,
    pub unit_id: Option<String>,
    pub variable: Option<String>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} [{}]", self.code)?;
        if let Some(y) = self.census_year {
            write!(f, " {y}")?;
        }
        if let Some(u) = &self.unit_id {
            write!(f, " unit={u}")?;
        }
        if let Some(v) = &self.variable {
            write!(f, " variable={v}")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    /// No error-severity entries. Warnings do not invalidate a dataset.
    pub fn is_valid(&self) -> bool {
        !self.issues.iter().any(|i| i.severity == Severity::Error)
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }
}

struct Collector(BTreeSet<Issue>);

impl Collector {
    fn push(
        &mut self,
        severity: Severity,
        code: &'static str,
        year: Option<u16>,
        unit: Option<&str>,
        variable: Option<&str>,
        message: String,
    ) {
        self.0.insert(Issue {
            severity,
            code,
            census_year: year,
            unit_id: unit.map(str::to_string),
            variable: variable.map(str::to_string),
            message,
        });
    }
}

fn is_state_code(s: &str) -> bool {
    s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase())
}

fn is_district_id(id: &str, state: &str) -> bool {
    match id.split_once('-') {
        Some((s, n)) => s == state && n.len() == 2 && n.bytes().all(|b| b.is_ascii_digit()),
        None => false,
    }
}

pub fn validate_dataset(units: &[GeoUnit], tables: &[DemographicTable]) -> ValidationReport {
    let mut out = Collector(BTreeSet::new());

    let mut by_key: BTreeMap<(u16, &str), Vec<&GeoUnit>> = BTreeMap::new();
    for u in units {
        by_key.entry((u.census_year, &u.unit_id)).or_default().push(u);
    }
    for ((year, id), group) in &by_key {
        if group.len() > 1 {
            out.push(
                Severity::Error,
                "duplicate_unit_id",
                Some(*year),
                Some(id),
                None,
                format!("duplicate unit id {id}"),
            );
        }
    }

    for u in units {
        let year = Some(u.census_year);
        let id = Some(u.unit_id.as_str());
        if !CENSUS_YEARS.contains(&u.census_year) {
            out.push(
                Severity::Error,
                "bad_census_year",
                year,
                id,
                None,
                format!("census year {} is not one of 2000, 2010, 2020", u.census_year),
            );
        }
        if !is_state_code(&u.state_code) {
            out.push(
                Severity::Error,
                "bad_state_code",
                year,
                id,
                None,
                format!("state code `{}` is not a two-letter postal code", u.state_code),
            );
        }
        match u.unit_kind {
            UnitKind::District => {
                if !is_district_id(&u.unit_id, &u.state_code) {
                    out.push(
                        Severity::Error,
                        "bad_district_id",
                        year,
                        id,
                        None,
                        format!("district id should be {}-NN", u.state_code),
                    );
                }
                let parent = by_key
                    .get(&(u.census_year, u.state_code.as_str()))
                    .and_then(|g| g.first())
                    .filter(|p| p.unit_kind == UnitKind::State);
                if parent.is_none() {
                    out.push(
                        Severity::Error,
                        "orphan_district",
                        year,
                        id,
                        None,
                        format!("district references missing state {}", u.state_code),
                    );
                }
            }
            UnitKind::Dc if u.state_code != "DC" => out.push(
                Severity::Error,
                "bad_state_code",
                year,
                id,
                None,
                "DC unit must carry state code DC".to_string(),
            ),
            _ => {}
        }
    }

    // District populations against state totals. Disclosure-avoidance noise
    // can break this in published files, so it is only a warning.
    let mut district_sums: BTreeMap<(u16, &str), u64> = BTreeMap::new();
    for u in units.iter().filter(|u| u.unit_kind == UnitKind::District) {
        *district_sums.entry((u.census_year, &u.state_code)).or_default() += u.total_population;
    }
    for ((year, state), sum) in &district_sums {
        if let Some(s) = by_key.get(&(*year, *state)).and_then(|g| g.first()) {
            if s.unit_kind == UnitKind::State && s.total_population != *sum {
                out.push(
                    Severity::Warning,
                    "district_sum_mismatch",
                    Some(*year),
                    Some(state),
                    None,
                    format!(
                        "district populations sum to {sum}, state total is {}",
                        s.total_population
                    ),
                );
            }
        }
    }

    let mut seen_tables: BTreeSet<(u16, String)> = BTreeSet::new();
    for t in tables {
        check_table(t, &by_key, &mut seen_tables, &mut out);
    }

    ValidationReport {
        issues: out.0.into_iter().collect(),
    }
}

fn check_table(
    t: &DemographicTable,
    units: &BTreeMap<(u16, &str), Vec<&GeoUnit>>,
    seen: &mut BTreeSet<(u16, String)>,
    out: &mut Collector,
) {
    let year = Some(t.census_year);
    let var = t.variable.as_str();
    if !seen.insert((t.census_year, var.to_string())) {
        out.push(
            Severity::Error,
            "duplicate_table",
            year,
            None,
            Some(var),
            format!("more than one {var} table for {}", t.census_year),
        );
    }
    if t.unit_of_analysis != t.variable.unit_of_analysis() {
        out.push(
            Severity::Error,
            "wrong_unit_of_analysis",
            year,
            None,
            Some(var),
            format!(
                "{var} must be counted in {}, table declares {}",
                t.variable.unit_of_analysis(),
                t.unit_of_analysis
            ),
        );
    }

    let codes = t.categories();
    for code in &codes {
        if !registry::is_known_category(t.variable, t.census_year, code) {
            out.push(
                Severity::Error,
                "unknown_category",
                year,
                None,
                Some(var),
                format!("category `{code}` is not registered for {var} in {}", t.census_year),
            );
        }
    }
    let year_reg = CategoryRegistry::for_year(t.variable, t.census_year);
    let trend_reg = CategoryRegistry::trend(t.variable);
    let in_year = year_reg.as_ref().is_some_and(|r| codes.iter().all(|c| r.contains(c)));
    let in_trend = codes.iter().all(|c| trend_reg.contains(c));
    if !in_year && !in_trend && codes.iter().all(|c| registry::is_known_category(t.variable, t.census_year, c)) {
        out.push(
            Severity::Error,
            "mixed_category_scheme",
            year,
            None,
            Some(var),
            "table mixes year-specific and harmonized categories".to_string(),
        );
    }

    for (unit_id, counts) in &t.counts {
        let Some(unit) = units.get(&(t.census_year, unit_id.as_str())).and_then(|g| g.first()) else {
            out.push(
                Severity::Error,
                "unknown_unit",
                year,
                Some(unit_id),
                Some(var),
                format!("table references unit {unit_id} not present in the dataset"),
            );
            continue;
        };
        let sum: u64 = counts.values().sum();
        match unit.total(t.unit_of_analysis) {
            Some(total) if total != sum => out.push(
                Severity::Error,
                "category_sum_mismatch",
                year,
                Some(unit_id),
                Some(var),
                format!(
                    "{var} categories sum to {sum}, unit {} total is {total}",
                    t.unit_of_analysis
                ),
            ),
            Some(_) => {}
            None => {
                debug_assert_eq!(t.unit_of_analysis, UnitOfAnalysis::Households);
                out.push(
                    Severity::Error,
                    "missing_households",
                    year,
                    Some(unit_id),
                    Some(var),
                    "household-level table present but unit has no household total".to_string(),
                );
            }
        }
    }
}
