use std::collections::BTreeMap;

use repweight_core::apportion::{build_body, unit_weight};
use repweight_core::metrics::compute_all_bodies;
use repweight_core::model::{
    BaselineVariant, Body, Dataset, DemographicTable, GeoUnit, MetricsRow, Scenario, UnitKind,
    Variable,
};
use repweight_core::report::{figure_data, render_table, FigureInputs, TableFormat, CSV_COLUMNS};
use repweight_core::synthetic::{trend_fixture, us_like};
use repweight_core::trends::compute_trends;
use repweight_core::Error;

/// AA: 100 people, 50 male. BB: 900 people, 90 male. One seat each.
fn two_states() -> Dataset {
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
    sex.insert("AA", "male", 50);
    sex.insert("AA", "female", 50);
    sex.insert("BB", "male", 90);
    sex.insert("BB", "female", 810);
    Dataset::new(2020, vec![state("AA", 100), state("BB", 900)], vec![sex])
}

fn race_rows() -> Vec<MetricsRow> {
    compute_all_bodies(&us_like(2020, true), Variable::RaceEthnicity, &Scenario::default()).unwrap()
}

fn parse_opt(s: &str) -> Option<f64> {
    (!s.is_empty()).then(|| s.parse().unwrap())
}

#[test]
fn csv_round_trips_full_precision() {
    let rows = race_rows();
    let bytes = render_table(&rows, TableFormat::Csv);
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), CSV_COLUMNS);
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let body: Body = rec[2].parse().unwrap();
        let row = rows
            .iter()
            .find(|x| x.body == body && x.category_code == rec[1])
            .unwrap();
        assert_eq!(rec[0].parse::<f64>().ok(), None);
        assert_eq!(&rec[3], "2020");
        assert_eq!(&rec[4], "with_dc");
        assert_eq!(rec[5].parse::<f64>().unwrap().to_bits(), row.pi0.to_bits());
        assert_eq!(rec[6].parse::<f64>().unwrap().to_bits(), row.pib.to_bits());
        assert_eq!(parse_opt(&rec[7]), row.absolute_weight);
        assert_eq!(parse_opt(&rec[8]), row.relative_weight);
        assert_eq!(rec[9].parse::<f64>().unwrap().to_bits(), row.excess_population.to_bits());
        n += 1;
    }
    assert_eq!(n, rows.len());
}

#[test]
fn json_round_trips_full_precision() {
    let rows = race_rows();
    let bytes = render_table(&rows, TableFormat::Json);
    let back: Vec<MetricsRow> = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(back.len(), rows.len());
    for b in &back {
        let a = rows
            .iter()
            .find(|x| x.body == b.body && x.category_code == b.category_code)
            .unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn rendering_is_order_independent() {
    let rows = race_rows();
    let mut reversed = rows.clone();
    reversed.reverse();
    for f in [TableFormat::Csv, TableFormat::Json, TableFormat::Text] {
        assert_eq!(render_table(&rows, f), render_table(&reversed, f));
    }
}

#[test]
fn null_weights_render_as_empty_and_na() {
    let mut rows = compute_all_bodies(&two_states(), Variable::Sex, &Scenario::default()).unwrap();
    rows[0].absolute_weight = None;
    rows[0].relative_weight = None;
    let csv = String::from_utf8(render_table(&rows, TableFormat::Csv)).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",,,"), "{csv}");
    let text = String::from_utf8(render_table(&rows, TableFormat::Text)).unwrap();
    assert!(text.contains("NA"), "{text}");
    let json: serde_json::Value = serde_json::from_slice(&render_table(&rows, TableFormat::Json)).unwrap();
    assert!(json[0]["absolute_weight"].is_null());
}

#[test]
fn text_table_layout() {
    let rows = compute_all_bodies(&two_states(), Variable::Sex, &Scenario::default()).unwrap();
    let text = String::from_utf8(render_table(&rows, TableFormat::Text)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("Sex (2020, baseline with_dc"), "{text}");
    assert!(lines[1].contains("House") && lines[1].contains("Senate") && lines[1].contains("Electoral College"));
    assert!(lines[2].starts_with("Category"));
    let female = lines.iter().find(|l| l.starts_with("Female")).unwrap();
    let male = lines.iter().find(|l| l.starts_with("Male")).unwrap();
    // senate male: AW 15/7, RW 645/245, EP 160
    assert!(male.contains("2.143") && male.contains("2.633") && male.contains(" 160"), "{male}");
    assert!(female.contains("1.000") && female.contains("-160"), "{female}");
    assert!(text.find("Female").unwrap() < text.find("Male").unwrap());
}

#[test]
fn proportions_figure_shape() {
    let rows = compute_all_bodies(&two_states(), Variable::Sex, &Scenario::default()).unwrap();
    let doc = figure_data("proportions_fig2", &FigureInputs::Metrics(rows)).unwrap();
    assert_eq!(doc.series.len(), 4);
    assert_eq!(doc.series[0].label, "Baseline");
    assert!(doc.series.iter().all(|s| s.points.len() == 2));
    let baseline_male = &doc.series[0].points[1];
    assert_eq!(baseline_male.value, Some(0.14));
    assert!(baseline_male.labelled);

    let race = figure_data("proportions_fig2", &FigureInputs::Metrics(race_rows())).unwrap();
    for s in &race.series {
        for p in &s.points {
            assert_eq!(p.labelled, p.value.unwrap() >= 0.10);
            assert_eq!(p.label.is_some(), p.labelled);
        }
    }
}

#[test]
fn unit_weight_figure_matches_unit_weights() {
    let ds = two_states();
    let base = ds.baseline_population(BaselineVariant::WithDc).unwrap();
    let weights: Vec<_> = Body::ALL
        .iter()
        .map(|b| unit_weight(&ds, &build_body(&ds, *b, &Scenario::default()).unwrap(), base).unwrap())
        .collect();
    let doc = figure_data("unit_weights_fig1", &FigureInputs::UnitWeights(weights.clone())).unwrap();
    let bodies: Vec<_> = doc.series.iter().filter_map(|s| s.body).collect();
    assert_eq!(bodies, Body::ALL.to_vec());
    for (series, w) in doc.series.iter().filter(|s| s.body.is_some()).zip(&weights) {
        let got: BTreeMap<String, f64> = series
            .points
            .iter()
            .map(|p| (p.x.as_str().unwrap().to_string(), p.value.unwrap()))
            .collect();
        let expected: BTreeMap<String, f64> = w.states.iter().map(|s| (s.state_code.clone(), s.weight)).collect();
        assert_eq!(got, expected);
    }
    let senate = &doc.series.iter().find(|s| s.body == Some(Body::Senate)).unwrap().points;
    assert!((senate[1].value.unwrap() - 0.5 / 0.9).abs() < 1e-12);
    assert!((senate[0].value.unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn trends_figure_carries_series_and_notes() {
    let datasets: BTreeMap<u16, Dataset> = trend_fixture().into_iter().map(|d| (d.census_year, d)).collect();
    let series = compute_trends(&datasets, Variable::RuralUrban, &Scenario::default()).unwrap();
    let doc = figure_data("trends_fig3", &FigureInputs::Trends(series.clone())).unwrap();
    assert_eq!(doc.series.len(), series.len());
    assert_eq!(doc.series[0].points.len(), 3);
    assert_eq!(doc.series[0].points[0].x, serde_json::json!(2000));
    assert!(doc.notes.iter().any(|n| n.starts_with("2000:")));
}

#[test]
fn figure_errors() {
    assert!(matches!(
        figure_data("pie_chart", &FigureInputs::Metrics(vec![])),
        Err(Error::UnknownFigureKind(k)) if k == "pie_chart"
    ));
    assert!(matches!(
        figure_data("trends_fig3", &FigureInputs::Metrics(vec![])),
        Err(Error::FigureInputMismatch { .. })
    ));
}
