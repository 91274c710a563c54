//! Extract parsing, category harmonization and the fetch client.

mod extract;
pub mod fetch;
mod harmonize;

use std::path::Path;

pub use extract::{
    parse_extract, serialize_extract, serialize_extract_to_vec, HEADER, TOTAL_HOUSEHOLDS,
    TOTAL_HOUSE_SEATS, TOTAL_POPULATION, TOTAL_VARIABLE,
};
pub use harmonize::{harmonize, HarmonizationMap};

use crate::error::Result;
use crate::model::{DemographicTable, GeoUnit};

/// Parses every `*.csv` file under `dir` (non-recursive, sorted by name) and
/// concatenates the results.
pub fn load_dir(dir: &Path) -> Result<(Vec<GeoUnit>, Vec<DemographicTable>)> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    load_files(&paths)
}

pub fn load_files<P: AsRef<Path>>(paths: &[P]) -> Result<(Vec<GeoUnit>, Vec<DemographicTable>)> {
    let mut units = Vec::new();
    let mut tables: Vec<DemographicTable> = Vec::new();
    for p in paths {
        let (u, t) = parse_extract(std::fs::File::open(p)?)?;
        units.extend(u);
        for table in t {
            match tables
                .iter_mut()
                .find(|x| x.variable == table.variable && x.census_year == table.census_year)
            {
                Some(existing) => {
                    for (unit, counts) in table.counts {
                        existing.counts.entry(unit).or_default().extend(counts);
                    }
                }
                None => tables.push(table),
            }
        }
    }
    Ok((merge_units(units), tables))
}

/// Collapses units that appear in several files. Explicit figures from any
/// file win over the zero/absent defaults of another.
fn merge_units(units: Vec<GeoUnit>) -> Vec<GeoUnit> {
    let mut out: Vec<GeoUnit> = Vec::new();
    for u in units {
        match out
            .iter_mut()
            .find(|x| x.census_year == u.census_year && x.unit_id == u.unit_id && x.unit_kind == u.unit_kind)
        {
            Some(x) => {
                x.total_population = x.total_population.max(u.total_population);
                x.total_households = x.total_households.or(u.total_households);
                x.house_seats = x.house_seats.or(u.house_seats);
            }
            None => out.push(u),
        }
    }
    out
}
