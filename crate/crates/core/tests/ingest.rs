mod support;

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;

use proptest::prelude::*;
use repweight_core::ingest::fetch::{fetch_extract, FetchError, FetchQuery, Geography};
use repweight_core::ingest::{harmonize, parse_extract, serialize_extract_to_vec, HarmonizationMap};
use repweight_core::model::{DemographicTable, GeoUnit, Variable};
use repweight_core::synthetic::{trend_fixture, uniform_federation, us_like};
use url::Url;

fn canonical(mut units: Vec<GeoUnit>, mut tables: Vec<DemographicTable>) -> (Vec<GeoUnit>, Vec<DemographicTable>) {
    units.sort_by(|a, b| (a.census_year, &a.unit_id).cmp(&(b.census_year, &b.unit_id)));
    tables.sort_by_key(|t| (t.census_year, t.variable));
    (units, tables)
}

fn round_trip(units: &[GeoUnit], tables: &[DemographicTable]) {
    let bytes = serialize_extract_to_vec(units, tables).unwrap();
    let (u, t) = parse_extract(bytes.as_slice()).unwrap();
    assert_eq!(
        canonical(u.clone(), t.clone()),
        canonical(units.to_vec(), tables.to_vec())
    );
    // serializing the parsed dataset reproduces the same bytes
    assert_eq!(serialize_extract_to_vec(&u, &t).unwrap(), bytes);
}

#[test]
fn fixtures_round_trip() {
    for ds in trend_fixture() {
        round_trip(&ds.units, &ds.tables);
    }
    let u = uniform_federation(4, 3, 1000);
    round_trip(&u.units, &u.tables);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_federations_round_trip(fed in support::federation(1_000_000)) {
        let ds = fed.dataset();
        round_trip(&ds.units, &ds.tables);
    }
}

fn unit_totals(t: &DemographicTable) -> Vec<(String, u64)> {
    t.counts.iter().map(|(u, c)| (u.clone(), c.values().sum())).collect()
}

#[test]
fn harmonization_preserves_unit_totals_and_is_idempotent() {
    let mut fixtures = trend_fixture();
    fixtures.push(us_like(2010, false));
    fixtures.push(uniform_federation(3, 2, 500));
    for ds in &fixtures {
        for t in &ds.tables {
            let map = HarmonizationMap::trend(t.variable);
            let once = harmonize(t, &map).unwrap();
            assert_eq!(unit_totals(&once), unit_totals(t), "{} {}", t.variable, t.census_year);
            let twice = harmonize(&once, &map).unwrap();
            assert_eq!(once, twice);
            let trend: Vec<&str> = repweight_core::registry::CategoryRegistry::trend(t.variable)
                .codes()
                .collect();
            assert!(once.categories().iter().all(|c| trend.contains(&c.as_str())));
        }
    }
}

#[test]
fn harmonization_examples() {
    let mut ru = DemographicTable::new(Variable::RuralUrban, 2010);
    ru.insert("AA", "urban_cluster", 10);
    ru.insert("AA", "urbanized_area", 30);
    ru.insert("AA", "rural", 60);
    let h = harmonize(&ru, &HarmonizationMap::trend(Variable::RuralUrban)).unwrap();
    assert_eq!(h.unit("AA").unwrap().get("urban"), Some(&40));
    assert_eq!(h.unit("AA").unwrap().get("rural"), Some(&60));
    assert_eq!(h.unit("AA").unwrap().len(), 2);

    let mut hs = DemographicTable::new(Variable::HousingStatus, 2010);
    hs.insert("AA", "owner_mortgage", 50);
    hs.insert("AA", "owner_clear", 20);
    hs.insert("AA", "renter", 30);
    let h = harmonize(&hs, &HarmonizationMap::trend(Variable::HousingStatus)).unwrap();
    assert_eq!(h.unit("AA").unwrap().get("owner"), Some(&70));
    assert_eq!(h.unit("AA").unwrap().get("renter"), Some(&30));

    let mut ru20 = DemographicTable::new(Variable::RuralUrban, 2020);
    ru20.insert("AA", "urban", 7);
    ru20.insert("AA", "rural", 3);
    assert_eq!(harmonize(&ru20, &HarmonizationMap::trend(Variable::RuralUrban)).unwrap(), ru20);
}

/// Serves one canned HTTP response per connection, `count` times, and
/// returns the base URL plus the request lines seen.
fn stub(status: &'static str, body: &'static str, count: usize) -> (Url, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = thread::spawn(move || {
        let mut seen = Vec::new();
        for stream in listener.incoming().take(count) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            seen.push(line.trim_end().to_string());
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                if h == "\r\n" || h.is_empty() {
                    break;
                }
            }
            write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: text/plain\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
        seen
    });
    (Url::parse(&format!("http://{addr}/data/2020/dec/dhc")).unwrap(), handle)
}

fn sex_query() -> FetchQuery {
    FetchQuery {
        variable: Variable::Sex,
        census_year: 2020,
        geography: Geography::State,
        api_key: None,
    }
}

#[test]
fn fetch_passes_extract_files_through() {
    const BODY: &str = "unit_id,unit_kind,state_code,census_year,variable,category_code,count\n\
VT,state,VT,2020,total,population,100\n\
VT,state,VT,2020,sex,female,51\n\
VT,state,VT,2020,sex,male,49\n";
    let (url, server) = stub("200 OK", BODY, 1);
    let bytes = fetch_extract(&url, &sex_query()).unwrap();
    let (units, tables) = parse_extract(bytes.as_slice()).unwrap();
    assert_eq!(units.len(), 1);
    assert_eq!(tables[0].unit("VT").unwrap()["male"], 49);
    let seen = server.join().unwrap();
    assert!(seen[0].starts_with("GET /data/2020/dec/dhc?get=NAME"), "{}", seen[0]);
    assert!(seen[0].contains("for=state%3A*") || seen[0].contains("for=state:*"), "{}", seen[0]);
}

#[test]
fn fetch_translates_census_json() {
    const BODY: &str = r#"[["NAME","P12_026N","P12_002N","state"],
["Vermont","324553","318524","50"],
["District of Columbia","358000","331000","11"]]"#;
    let (url, server) = stub("200 OK", BODY, 1);
    let bytes = fetch_extract(&url, &sex_query()).unwrap();
    server.join().unwrap();
    let (units, tables) = parse_extract(bytes.as_slice()).unwrap();
    let vt = units.iter().find(|u| u.unit_id == "VT").unwrap();
    assert_eq!(vt.total_population, 324_553 + 318_524);
    assert_eq!(tables[0].unit("VT").unwrap()["female"], 324_553);
    assert_eq!(tables[0].unit("DC").unwrap()["male"], 331_000);
}

#[test]
fn fetch_reports_http_status() {
    let (url, server) = stub("500 Internal Server Error", "backend exploded", 1);
    match fetch_extract(&url, &sex_query()) {
        Err(FetchError::Status { status, body_excerpt }) => {
            assert_eq!(status, 500);
            assert!(body_excerpt.contains("exploded"));
        }
        other => panic!("{other:?}"),
    }
    server.join().unwrap();
}

#[test]
fn fetch_unreachable_is_retryable_transport_error() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let url = Url::parse(&format!("http://127.0.0.1:{port}/")).unwrap();
    let err = fetch_extract(&url, &sex_query()).unwrap_err();
    assert!(matches!(err, FetchError::Transport { .. }), "{err:?}");
    assert!(err.is_retryable());
}
