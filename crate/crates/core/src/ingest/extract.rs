//! The canonical extract file: UTF-8, comma-delimited, RFC 4180 quoting,
//! one count per row.
//!
//! ```text
//! unit_id,unit_kind,state_code,census_year,variable,category_code,count
//! VT,state,VT,2020,sex,female,324553
//! ```
//!
//! Rows whose variable is `total` carry unit-level figures rather than
//! category counts: `population`, `households`, or `house_seats` (the state's
//! seat count, used only by state-level datasets without district rows).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{DemographicTable, GeoUnit, UnitKind, Variable, CENSUS_YEARS};
use crate::registry;

pub const HEADER: [&str; 7] = [
    "unit_id",
    "unit_kind",
    "state_code",
    "census_year",
    "variable",
    "category_code",
    "count",
];

pub const TOTAL_VARIABLE: &str = "total";
pub const TOTAL_POPULATION: &str = "population";
pub const TOTAL_HOUSEHOLDS: &str = "households";
pub const TOTAL_HOUSE_SEATS: &str = "house_seats";

#[derive(Debug)]
struct UnitDraft {
    unit_kind: UnitKind,
    state_code: String,
    line: u64,
    population: Option<u64>,
    households: Option<u64>,
    house_seats: Option<u32>,
}

fn row_err(line: u64, message: impl Into<String>) -> Error {
    Error::Row {
        line,
        message: message.into(),
    }
}

/// Parses an extract into units and per-(variable, year) tables. The result
/// is not validated; see [`crate::validate::validate_dataset`].
///
/// Units without an explicit `total,population` row get their population by
/// summing their race/ethnicity counts (falling back to another
/// person-level variable, then to the sum of their districts).
pub fn parse_extract<R: Read>(input: R) -> Result<(Vec<GeoUnit>, Vec<DemographicTable>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);

    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r?,
        None => {
            return Err(Error::Schema {
                column: 1,
                expected: HEADER[0].into(),
                found: String::new(),
            })
        }
    };
    for (i, expected) in HEADER.iter().enumerate() {
        let found = header.get(i).unwrap_or("");
        if found != *expected {
            return Err(Error::Schema {
                column: i + 1,
                expected: (*expected).into(),
                found: found.into(),
            });
        }
    }
    if header.len() > HEADER.len() {
        return Err(Error::Schema {
            column: HEADER.len() + 1,
            expected: String::new(),
            found: header.get(HEADER.len()).unwrap_or("").into(),
        });
    }

    let mut units: BTreeMap<(u16, String), UnitDraft> = BTreeMap::new();
    let mut tables: BTreeMap<(u16, Variable), DemographicTable> = BTreeMap::new();
    let mut seen: BTreeSet<(u16, String, String, String)> = BTreeSet::new();

    for record in records {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != HEADER.len() {
            return Err(row_err(
                line,
                format!("expected {} fields, found {}", HEADER.len(), record.len()),
            ));
        }
        let field = |i: usize| record.get(i).unwrap_or("");

        let unit_id = field(0);
        if unit_id.is_empty() {
            return Err(row_err(line, "empty unit_id"));
        }
        let unit_kind: UnitKind = field(1)
            .parse()
            .map_err(|e: crate::model::ParseKeywordError| row_err(line, e.to_string()))?;
        let state_code = field(2);
        let year: u16 = field(3)
            .parse()
            .ok()
            .filter(|y| CENSUS_YEARS.contains(y))
            .ok_or_else(|| {
                row_err(line, format!("census_year `{}` is not 2000, 2010 or 2020", field(3)))
            })?;
        let variable = field(4);
        let category = field(5);
        let count: u64 = field(6).parse().map_err(|_| {
            row_err(line, format!("count `{}` is not a nonnegative integer", field(6)))
        })?;

        if !seen.insert((year, unit_id.into(), variable.into(), category.into())) {
            return Err(row_err(
                line,
                format!("duplicate row for {unit_id} {variable}/{category} in {year}"),
            ));
        }

        let draft = units
            .entry((year, unit_id.to_string()))
            .or_insert_with(|| UnitDraft {
                unit_kind,
                state_code: state_code.to_string(),
                line,
                population: None,
                households: None,
                house_seats: None,
            });
        if draft.unit_kind != unit_kind || draft.state_code != state_code {
            return Err(row_err(
                line,
                format!(
                    "unit {unit_id} declared as {unit_kind}/{state_code} but line {} declared {}/{}",
                    draft.line, draft.unit_kind, draft.state_code
                ),
            ));
        }

        if variable == TOTAL_VARIABLE {
            match category {
                TOTAL_POPULATION => draft.population = Some(count),
                TOTAL_HOUSEHOLDS => draft.households = Some(count),
                TOTAL_HOUSE_SEATS => {
                    draft.house_seats = Some(u32::try_from(count).map_err(|_| {
                        row_err(line, format!("house_seats {count} is out of range"))
                    })?)
                }
                other => {
                    return Err(row_err(line, format!("unknown total `{other}`")));
                }
            }
            continue;
        }

        let variable: Variable = variable
            .parse()
            .map_err(|e: crate::model::ParseKeywordError| row_err(line, e.to_string()))?;
        if !registry::is_known_category(variable, year, category) {
            return Err(row_err(
                line,
                format!("unknown category `{category}` for {variable} in {year}"),
            ));
        }
        tables
            .entry((year, variable))
            .or_insert_with(|| DemographicTable::new(variable, year))
            .insert(unit_id, category, count);
    }

    let units = finish_units(units, &tables);
    Ok((units, tables.into_values().collect()))
}

fn finish_units(
    drafts: BTreeMap<(u16, String), UnitDraft>,
    tables: &BTreeMap<(u16, Variable), DemographicTable>,
) -> Vec<GeoUnit> {
    const POPULATION_SOURCES: [Variable; 4] = [
        Variable::RaceEthnicity,
        Variable::AgeCategory,
        Variable::Sex,
        Variable::RuralUrban,
    ];

    let from_tables = |year: u16, unit_id: &str| {
        POPULATION_SOURCES.iter().find_map(|v| {
            tables
                .get(&(year, *v))
                .and_then(|t| t.unit_total(unit_id))
        })
    };

    let resolved: Vec<(GeoUnit, Option<u64>)> = drafts
        .into_iter()
        .map(|((year, unit_id), d)| {
            let population = d.population.or_else(|| from_tables(year, &unit_id));
            let households = d.households.or_else(|| {
                tables
                    .get(&(year, Variable::HousingStatus))
                    .and_then(|t| t.unit_total(&unit_id))
            });
            let unit = GeoUnit {
                total_population: population.unwrap_or(0),
                unit_id,
                unit_kind: d.unit_kind,
                state_code: d.state_code,
                census_year: year,
                total_households: households,
                house_seats: d.house_seats,
            };
            (unit, population)
        })
        .collect();

    // Remaining gaps are states known only through their districts.
    let mut district_sums: BTreeMap<(u16, &str), u64> = BTreeMap::new();
    for (u, pop) in &resolved {
        if let (UnitKind::District, Some(p)) = (u.unit_kind, pop) {
            *district_sums.entry((u.census_year, &u.state_code)).or_default() += p;
        }
    }
    let fills: Vec<Option<u64>> = resolved
        .iter()
        .map(|(u, pop)| match (pop, u.unit_kind) {
            (None, UnitKind::State) => district_sums.get(&(u.census_year, u.state_code.as_str())).copied(),
            _ => None,
        })
        .collect();
    resolved
        .into_iter()
        .zip(fills)
        .map(|((mut u, _), fill)| {
            if let Some(p) = fill {
                u.total_population = p;
            }
            u
        })
        .collect()
}

/// Writes units and tables back in canonical form. Each unit's totals are
/// written explicitly, so parsing the output reproduces the same dataset.
pub fn serialize_extract<W: Write>(
    out: W,
    units: &[GeoUnit],
    tables: &[DemographicTable],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;

    let mut sorted_units: Vec<&GeoUnit> = units.iter().collect();
    sorted_units.sort_by(|a, b| (a.census_year, &a.unit_id).cmp(&(b.census_year, &b.unit_id)));
    let lookup: BTreeMap<(u16, &str), &GeoUnit> = sorted_units
        .iter()
        .map(|u| ((u.census_year, u.unit_id.as_str()), *u))
        .collect();

    for u in &sorted_units {
        let year = u.census_year.to_string();
        let mut total = |cat: &str, n: u64| {
            w.write_record([
                u.unit_id.as_str(),
                u.unit_kind.as_str(),
                u.state_code.as_str(),
                year.as_str(),
                TOTAL_VARIABLE,
                cat,
                n.to_string().as_str(),
            ])
        };
        total(TOTAL_POPULATION, u.total_population)?;
        if let Some(h) = u.total_households {
            total(TOTAL_HOUSEHOLDS, h)?;
        }
        if let Some(s) = u.house_seats {
            total(TOTAL_HOUSE_SEATS, u64::from(s))?;
        }
    }

    let mut sorted_tables: Vec<&DemographicTable> = tables.iter().collect();
    sorted_tables.sort_by_key(|t| (t.census_year, t.variable));
    for t in sorted_tables {
        let year = t.census_year.to_string();
        let order = t.categories();
        for (unit_id, counts) in &t.counts {
            let unit = lookup
                .get(&(t.census_year, unit_id.as_str()))
                .ok_or_else(|| Error::UnknownUnit {
                    unit: unit_id.clone(),
                })?;
            for cat in order.iter().filter(|c| counts.contains_key(*c)) {
                w.write_record([
                    unit_id.as_str(),
                    unit.unit_kind.as_str(),
                    unit.state_code.as_str(),
                    year.as_str(),
                    t.variable.as_str(),
                    cat.as_str(),
                    counts[cat].to_string().as_str(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn serialize_extract_to_vec(units: &[GeoUnit], tables: &[DemographicTable]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    serialize_extract(&mut buf, units, tables)?;
    Ok(buf)
}
