//! Regenerates the bundled fixture extracts.
//!
//! ```text
//! cargo run -p repweight-core --example write_fixtures -- fixtures
//! ```

use std::fs;
use std::path::Path;

use repweight_core::ingest::serialize_extract_to_vec;
use repweight_core::model::{Dataset, DemographicTable, GeoUnit, UnitKind, Variable};
use repweight_core::synthetic::{trend_fixture, uniform_federation};

fn write(dir: &Path, name: &str, ds: &Dataset) {
    fs::create_dir_all(dir).unwrap();
    let bytes = serialize_extract_to_vec(&ds.units, &ds.tables).unwrap();
    fs::write(dir.join(name), bytes).unwrap();
}

fn two_state() -> Dataset {
    let state = |id: &str, pop| GeoUnit {
        unit_id: id.into(),
        unit_kind: UnitKind::State,
        state_code: id.into(),
        census_year: 2020,
        total_population: pop,
        total_households: None,
        house_seats: Some(1),
    };
    let mut sex = DemographicTable::new(Variable::Sex, 2020);
    sex.insert("AA", "female", 50);
    sex.insert("AA", "male", 50);
    sex.insert("BB", "female", 810);
    sex.insert("BB", "male", 90);
    Dataset::new(2020, vec![state("AA", 100), state("BB", 900)], vec![sex])
}

fn main() {
    let root = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let root = Path::new(&root);
    for ds in trend_fixture() {
        write(&root.join("us_like"), &format!("us_like_{}.csv", ds.census_year), &ds);
    }
    write(&root.join("two_state"), "two_state.csv", &two_state());
    write(&root.join("uniform"), "uniform.csv", &uniform_federation(4, 2, 10_000));
    fs::create_dir_all(root.join("invalid")).unwrap();
    fs::write(
        root.join("invalid/sum_violation.csv"),
        "unit_id,unit_kind,state_code,census_year,variable,category_code,count\n\
AA,state,AA,2020,total,population,100\n\
AA,state,AA,2020,sex,female,51\n\
AA,state,AA,2020,sex,male,48\n",
    )
    .unwrap();
}
