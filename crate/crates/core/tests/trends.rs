use std::collections::BTreeMap;

use repweight_core::ingest::{harmonize, HarmonizationMap};
use repweight_core::metrics::compute_metrics_for_table;
use repweight_core::model::{Body, Dataset, Scenario, Variable};
use repweight_core::synthetic::{trend_fixture, uniform_federation};
use repweight_core::trends::compute_trends;
use repweight_core::Error;

fn by_year(ds: Vec<Dataset>) -> BTreeMap<u16, Dataset> {
    ds.into_iter().map(|d| (d.census_year, d)).collect()
}

#[test]
fn points_match_standalone_metrics() {
    let datasets = by_year(trend_fixture());
    let sc = Scenario::default();
    for variable in Variable::ALL {
        let series = compute_trends(&datasets, variable, &sc).unwrap();
        assert!(!series.is_empty());
        for s in &series {
            let years: Vec<u16> = s.points.iter().map(|p| p.census_year).collect();
            assert_eq!(years, vec![2000, 2010, 2020]);
            for p in &s.points {
                let ds = &datasets[&p.census_year];
                let t = harmonize(ds.table(variable).unwrap(), &HarmonizationMap::trend(variable)).unwrap();
                let rows = compute_metrics_for_table(ds, &t, s.body, &sc).unwrap();
                let row = rows.iter().find(|r| r.category_code == s.category_code).unwrap();
                assert_eq!(row.absolute_weight, p.absolute_weight, "{variable} {} {}", s.body, p.census_year);
            }
        }
    }
}

#[test]
fn merged_categories_are_used() {
    let datasets = by_year(trend_fixture());
    let ru = compute_trends(&datasets, Variable::RuralUrban, &Scenario::default()).unwrap();
    let codes: Vec<&str> = ru.iter().filter(|s| s.body == Body::Senate).map(|s| s.category_code.as_str()).collect();
    assert_eq!(codes, vec!["rural", "urban"]);
    let hs = compute_trends(&datasets, Variable::HousingStatus, &Scenario::default()).unwrap();
    let codes: Vec<&str> = hs.iter().filter(|s| s.body == Body::House).map(|s| s.category_code.as_str()).collect();
    assert_eq!(codes, vec!["renter", "owner"]);
}

#[test]
fn state_level_year_is_flagged() {
    let datasets = by_year(trend_fixture());
    let series = compute_trends(&datasets, Variable::Sex, &Scenario::default()).unwrap();
    let house = series.iter().find(|s| s.body == Body::House).unwrap();
    assert!(house.assumptions.iter().any(|a| a.starts_with("2000: synthetic_districts")));
    let senate = series.iter().find(|s| s.body == Body::Senate).unwrap();
    assert!(senate.assumptions.is_empty());
}

#[test]
fn identical_years_give_flat_series() {
    let mut datasets = BTreeMap::new();
    for year in [2000u16, 2010, 2020] {
        let mut ds = uniform_federation(4, 2, 1000);
        ds.census_year = year;
        ds.units.iter_mut().for_each(|u| u.census_year = year);
        ds.tables.retain(|t| t.variable == Variable::Sex);
        ds.tables.iter_mut().for_each(|t| t.census_year = year);
        datasets.insert(year, ds);
    }
    for s in compute_trends(&datasets, Variable::Sex, &Scenario::default()).unwrap() {
        let first = s.points[0].absolute_weight;
        assert!(s.points.iter().all(|p| p.absolute_weight == first));
    }
}

#[test]
fn adding_a_year_leaves_others_unchanged() {
    let all = by_year(trend_fixture());
    let mut two = all.clone();
    two.remove(&2010);
    let sc = Scenario::default();
    let full = compute_trends(&all, Variable::RaceEthnicity, &sc).unwrap();
    let part = compute_trends(&two, Variable::RaceEthnicity, &sc).unwrap();
    for (f, p) in full.iter().zip(&part) {
        assert_eq!(f.category_code, p.category_code);
        let kept: Vec<_> = f.points.iter().filter(|x| x.census_year != 2010).cloned().collect();
        assert_eq!(kept, p.points);
    }
}

#[test]
fn missing_years_are_omitted_and_bad_years_rejected() {
    let mut datasets = by_year(trend_fixture());
    datasets.get_mut(&2010).unwrap().tables.retain(|t| t.variable != Variable::Sex);
    let series = compute_trends(&datasets, Variable::Sex, &Scenario::default()).unwrap();
    assert!(series.iter().all(|s| s.points.len() == 2));

    let mut odd = uniform_federation(2, 1, 100);
    odd.census_year = 1990;
    let bad: BTreeMap<u16, Dataset> = [(1990, odd)].into();
    assert!(matches!(
        compute_trends(&bad, Variable::Sex, &Scenario::default()),
        Err(Error::NoHarmonizationPath { year: 1990, .. })
    ));
}
