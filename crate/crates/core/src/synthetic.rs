//! Deterministic synthetic datasets for tests, demos and benchmarks.
//!
//! Compositions follow a fixed formula keyed on state and district index, so
//! every call returns identical data.

use crate::apportion::district_id;
use crate::model::{Dataset, DemographicTable, GeoUnit, UnitKind, Variable};

/// House seats per state under the 2010 apportionment (sums to 435).
pub const SEATS_2010: [(&str, u32); 50] = [
    ("AL", 7), ("AK", 1), ("AZ", 9), ("AR", 4), ("CA", 53), ("CO", 7), ("CT", 5),
    ("DE", 1), ("FL", 27), ("GA", 14), ("HI", 2), ("ID", 2), ("IL", 18), ("IN", 9),
    ("IA", 4), ("KS", 4), ("KY", 6), ("LA", 6), ("ME", 2), ("MD", 8), ("MA", 9),
    ("MI", 14), ("MN", 8), ("MS", 4), ("MO", 8), ("MT", 1), ("NE", 3), ("NV", 4),
    ("NH", 2), ("NJ", 12), ("NM", 3), ("NY", 27), ("NC", 13), ("ND", 1), ("OH", 16),
    ("OK", 5), ("OR", 5), ("PA", 18), ("RI", 2), ("SC", 7), ("SD", 1), ("TN", 9),
    ("TX", 36), ("UT", 4), ("VT", 1), ("VA", 11), ("WA", 10), ("WV", 3), ("WI", 8),
    ("WY", 1),
];

/// Splits `total` in proportion to `weights` by largest remainder; the parts
/// sum to `total` exactly.
pub fn split(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        parts[i] += 1;
    }
    parts
}

fn unit(id: &str, kind: UnitKind, state: &str, year: u16, pop: u64) -> GeoUnit {
    GeoUnit {
        unit_id: id.to_string(),
        unit_kind: kind,
        state_code: state.to_string(),
        census_year: year,
        total_population: pop,
        total_households: Some(pop * 2 / 5),
        house_seats: None,
    }
}

/// `states` identical states of `districts_per_state` equal districts, each
/// with the same composition. Every absolute weight is 1 in every body.
pub fn uniform_federation(states: usize, districts_per_state: u32, district_population: u64) -> Dataset {
    let year = 2020;
    let mut units = Vec::new();
    let mut tables: Vec<DemographicTable> = Variable::ALL
        .iter()
        .map(|v| DemographicTable::new(*v, year))
        .collect();
    let codes = |v: Variable| year_codes(v, year);
    let weights = |v: Variable| -> Vec<f64> { vec![1.0; codes(v).len()] };
    for s in 0..states {
        let code = state_code(s);
        let state_pop = district_population * u64::from(districts_per_state);
        let mut st = unit(&code, UnitKind::State, &code, year, state_pop);
        st.house_seats = Some(districts_per_state);
        units.push(st);
        for d in 1..=districts_per_state {
            let id = district_id(&code, d, districts_per_state);
            units.push(unit(&id, UnitKind::District, &code, year, district_population));
            for t in tables.iter_mut() {
                let base = if t.variable == Variable::HousingStatus {
                    district_population * 2 / 5
                } else {
                    district_population
                };
                for (c, n) in codes(t.variable).iter().zip(split(base, &weights(t.variable))) {
                    t.insert(&id, c, n);
                }
            }
        }
    }
    Dataset::new(year, units, tables)
}

/// Two-letter codes AA, AB, ... used by generated federations.
pub fn state_code(index: usize) -> String {
    let a = (b'A' + (index / 26 % 26) as u8) as char;
    let b = (b'A' + (index % 26) as u8) as char;
    format!("{a}{b}")
}

/// Category codes as published for `year`.
pub fn year_codes(variable: Variable, year: u16) -> Vec<&'static str> {
    crate::registry::CategoryRegistry::for_year(variable, year)
        .map(|r| r.codes().collect())
        .unwrap_or_default()
}

/// Composition weights for one district. `r` is the rural share, `d` a
/// state-level diversity factor in [0, 1).
fn composition(variable: Variable, year: u16, r: f64, d: f64) -> Vec<f64> {
    match variable {
        Variable::RaceEthnicity => vec![
            0.35 + 0.5 * r,
            0.05 + 0.3 * (1.0 - r) * d,
            0.04 + 0.14 * (1.0 - d) * (1.0 - r),
            0.015 + 0.09 * (1.0 - r) * d,
            0.03,
            0.004 + 0.02 * r,
            0.002,
            0.004,
        ],
        Variable::AgeCategory => vec![0.22 + 0.02 * r, 0.30 - 0.06 * r, 0.32, 0.14 + 0.06 * r],
        Variable::Sex => vec![0.506 - 0.012 * r, 0.494 + 0.012 * r],
        Variable::RuralUrban if year == 2020 => vec![r, 1.0 - r],
        Variable::RuralUrban => vec![r, 0.1 * (1.0 - r), 0.9 * (1.0 - r)],
        Variable::HousingStatus if year == 2000 => vec![0.45 - 0.3 * r, 0.55 + 0.3 * r],
        Variable::HousingStatus => vec![0.45 - 0.3 * r, 0.38 + 0.1 * r, 0.17 + 0.2 * r],
    }
}

fn district_base(year: u16) -> u64 {
    match year {
        2000 => 646_000,
        2010 => 710_000,
        _ => 761_000,
    }
}

/// A United States-shaped dataset: 50 states with 2010-apportionment seat
/// counts, DC and PR, and all five variables. Smaller states are more rural.
///
/// When `with_districts` is false the dataset is state-level only and each
/// state declares its seat count instead.
pub fn us_like(year: u16, with_districts: bool) -> Dataset {
    let base = district_base(year);
    let mut units = Vec::new();
    let mut tables: Vec<DemographicTable> = Variable::ALL
        .iter()
        .map(|v| DemographicTable::new(*v, year))
        .collect();

    let mut add = |units: &mut Vec<GeoUnit>, id: &str, kind: UnitKind, state: &str, pop: u64, r: f64, d: f64| {
        let mut u = unit(id, kind, state, year, pop);
        let households = pop * 2 / 5;
        u.total_households = Some(households);
        for t in tables.iter_mut() {
            let total = if t.variable == Variable::HousingStatus { households } else { pop };
            let w = composition(t.variable, year, r, d);
            for (c, n) in year_codes(t.variable, year).iter().zip(split(total, &w)) {
                t.insert(id, c, n);
            }
        }
        units.push(u);
    };

    for (k, (code, seats)) in SEATS_2010.iter().enumerate() {
        let seats = *seats;
        let d = ((k * 53) % 17) as f64 / 17.0;
        let state_r = (0.45 / f64::from(seats).sqrt() + 0.05).min(0.6);
        let district_pop = |i: u32| -> u64 {
            if seats == 1 {
                base * (75 + (k as u64 % 5) * 10) / 100
            } else {
                base + ((k as u64 * 7919 + u64::from(i) * 104_729) % 120_001) - 60_000
            }
        };
        let district_r = |i: u32| -> f64 {
            let offset = ((i as usize * 37 + k * 11) % 21) as f64 / 100.0 - 0.10;
            (state_r + offset).clamp(0.01, 0.85)
        };
        if with_districts {
            let mut state_pop = 0;
            for i in 1..=seats {
                let id = district_id(code, i, seats);
                let pop = district_pop(i);
                state_pop += pop;
                add(&mut units, &id, UnitKind::District, code, pop, district_r(i), d);
            }
            let mut st = unit(code, UnitKind::State, code, year, state_pop);
            st.house_seats = Some(seats);
            st.total_households = None;
            units.push(st);
        } else {
            let pop: u64 = (1..=seats).map(district_pop).sum();
            add(&mut units, code, UnitKind::State, code, pop, state_r, d);
            units.last_mut().expect("just pushed").house_seats = Some(seats);
        }
    }
    add(&mut units, "DC", UnitKind::Dc, "DC", base * 9 / 10, 0.0, 0.6);
    add(&mut units, "PR", UnitKind::Territory, "PR", base * 9 / 2, 0.06, 0.95);
    Dataset::new(year, units, tables)
}

/// The three trend years: 2000 at state level, 2010 and 2020 with districts.
pub fn trend_fixture() -> Vec<Dataset> {
    vec![us_like(2000, false), us_like(2010, true), us_like(2020, true)]
}
