//! Census-API-style fetch client.
//!
//! Requests are plain HTTP GETs with `get`, `for` and `in` query parameters.
//! The remote answer is either a Census-style JSON array of arrays (first row
//! is the header) or an extract file; JSON answers are translated into
//! extract form through [`adapter_entries`].
//!
//! | variable        | 2020 (DHC)         | 2010 / 2000 (SF1)                     |
//! |-----------------|--------------------|---------------------------------------|
//! | race_ethnicity  | P9_002N..P9_011N   | P005003..P005010 / P004002..P004011   |
//! | age_category    | P12 age cells      | P012 age cells                        |
//! | sex             | P12_002N, P12_026N | P012002, P012026                      |
//! | rural_urban     | P2_002N, P2_003N   | P002003, P002004, P002005             |
//! | housing_status  | H4_002N..H4_004N   | H004002..H004004 / H004002, H004003   |

use std::collections::BTreeMap;
use std::time::Duration;

use thiserror::Error;
use url::Url;

use crate::ingest::extract::HEADER;
use crate::model::Variable;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("transport error (retryable): {message}")]
    Transport { message: String, retryable: bool },

    #[error("HTTP {status}: {body_excerpt}")]
    Status { status: u16, body_excerpt: String },

    #[error("could not translate response: {0}")]
    Adapter(String),

    #[error("invalid endpoint: {0}")]
    Endpoint(String),
}

impl FetchError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, FetchError::Transport { retryable: true, .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geography {
    State,
    CongressionalDistrict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchQuery {
    pub variable: Variable,
    pub census_year: u16,
    pub geography: Geography,
    pub api_key: Option<String>,
}

const EXCERPT_LEN: usize = 200;

/// Census variable ids and the category each one counts toward. Several ids
/// may feed one category; their values are summed.
pub fn adapter_entries(variable: Variable, year: u16) -> Vec<(String, &'static str)> {
    let cell = |table: &str, n: u32| -> String {
        if year == 2020 {
            format!("{table}_{n:03}N")
        } else {
            format!("{table}{n:03}")
        }
    };
    let (p12, p2, h4, p_race) = if year == 2020 {
        ("P12", "P2", "H4", "P9")
    } else {
        ("P012", "P002", "H004", if year == 2010 { "P005" } else { "P004" })
    };
    match variable {
        Variable::RaceEthnicity => {
            let cells: [(u32, &str); 8] = match year {
                2010 => [
                    (3, "white_nh"),
                    (4, "black_nh"),
                    (5, "aian_nh"),
                    (6, "asian_nh"),
                    (7, "nhopi_nh"),
                    (8, "other_nh"),
                    (9, "multiple_nh"),
                    (10, "hispanic"),
                ],
                _ => [
                    (2, "hispanic"),
                    (5, "white_nh"),
                    (6, "black_nh"),
                    (7, "aian_nh"),
                    (8, "asian_nh"),
                    (9, "nhopi_nh"),
                    (10, "other_nh"),
                    (11, "multiple_nh"),
                ],
            };
            cells.iter().map(|(n, c)| (cell(p_race, *n), *c)).collect()
        }
        Variable::Sex => vec![(cell(p12, 2), "male"), (cell(p12, 26), "female")],
        Variable::AgeCategory => {
            // Male cells start at 3, female cells at 27, same layout.
            let bands: [(std::ops::RangeInclusive<u32>, &str); 4] = [
                (3..=6, "age_0_17"),
                (7..=13, "age_18_39"),
                (14..=19, "age_40_64"),
                (20..=25, "age_65_plus"),
            ];
            bands
                .iter()
                .flat_map(|(r, c)| {
                    r.clone()
                        .flat_map(move |n| [n, n + 24])
                        .map(move |n| (cell(p12, n), *c))
                })
                .collect()
        }
        Variable::RuralUrban => {
            if year == 2020 {
                vec![(cell(p2, 2), "urban"), (cell(p2, 3), "rural")]
            } else {
                vec![
                    (cell(p2, 3), "urbanized_area"),
                    (cell(p2, 4), "urban_cluster"),
                    (cell(p2, 5), "rural"),
                ]
            }
        }
        Variable::HousingStatus => {
            if year == 2000 {
                vec![(cell(h4, 2), "owner"), (cell(h4, 3), "renter")]
            } else {
                vec![
                    (cell(h4, 2), "owner_mortgage"),
                    (cell(h4, 3), "owner_clear"),
                    (cell(h4, 4), "renter"),
                ]
            }
        }
    }
}

/// FIPS state code to postal code for the 50 states, DC and Puerto Rico.
pub fn fips_to_postal(fips: &str) -> Option<&'static str> {
    const TABLE: [(&str, &str); 52] = [
        ("01", "AL"), ("02", "AK"), ("04", "AZ"), ("05", "AR"), ("06", "CA"),
        ("08", "CO"), ("09", "CT"), ("10", "DE"), ("11", "DC"), ("12", "FL"),
        ("13", "GA"), ("15", "HI"), ("16", "ID"), ("17", "IL"), ("18", "IN"),
        ("19", "IA"), ("20", "KS"), ("21", "KY"), ("22", "LA"), ("23", "ME"),
        ("24", "MD"), ("25", "MA"), ("26", "MI"), ("27", "MN"), ("28", "MS"),
        ("29", "MO"), ("30", "MT"), ("31", "NE"), ("32", "NV"), ("33", "NH"),
        ("34", "NJ"), ("35", "NM"), ("36", "NY"), ("37", "NC"), ("38", "ND"),
        ("39", "OH"), ("40", "OK"), ("41", "OR"), ("42", "PA"), ("44", "RI"),
        ("45", "SC"), ("46", "SD"), ("47", "TN"), ("48", "TX"), ("49", "UT"),
        ("50", "VT"), ("51", "VA"), ("53", "WA"), ("54", "WV"), ("55", "WI"),
        ("56", "WY"), ("72", "PR"),
    ];
    TABLE.iter().find(|(f, _)| *f == fips).map(|(_, p)| *p)
}

/// Builds the request URL for `query` against `endpoint`.
pub fn request_url(endpoint: &Url, query: &FetchQuery) -> Url {
    let mut get: Vec<String> = vec!["NAME".into()];
    for (id, _) in adapter_entries(query.variable, query.census_year) {
        if !get.contains(&id) {
            get.push(id);
        }
    }
    let mut url = endpoint.clone();
    {
        let mut q = url.query_pairs_mut();
        q.append_pair("get", &get.join(","));
        match query.geography {
            Geography::State => {
                q.append_pair("for", "state:*");
            }
            Geography::CongressionalDistrict => {
                q.append_pair("for", "congressional district:*");
                q.append_pair("in", "state:*");
            }
        }
        if let Some(key) = &query.api_key {
            q.append_pair("key", key);
        }
    }
    url
}

/// Fetches one variable/year/geography and returns it as an extract file.
pub fn fetch_extract(endpoint: &Url, query: &FetchQuery) -> Result<Vec<u8>, FetchError> {
    let url = request_url(endpoint, query);
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(60))
        .build()
        .map_err(|e| FetchError::Transport {
            message: e.to_string(),
            retryable: false,
        })?;
    let resp = client.get(url).send().map_err(|e| FetchError::Transport {
        message: e.to_string(),
        retryable: true,
    })?;
    let status = resp.status();
    let body = resp.bytes().map_err(|e| FetchError::Transport {
        message: e.to_string(),
        retryable: true,
    })?;
    if !status.is_success() {
        let text = String::from_utf8_lossy(&body);
        return Err(FetchError::Status {
            status: status.as_u16(),
            body_excerpt: text.chars().take(EXCERPT_LEN).collect(),
        });
    }
    if body.starts_with(HEADER[0].as_bytes()) {
        return Ok(body.to_vec());
    }
    translate_census_json(&body, query)
}

/// Translates a Census-style JSON response into extract rows. District
/// pulls also emit state rows aggregated from the districts.
pub fn translate_census_json(body: &[u8], query: &FetchQuery) -> Result<Vec<u8>, FetchError> {
    let rows: Vec<Vec<Option<String>>> =
        serde_json::from_slice(body).map_err(|e| FetchError::Adapter(e.to_string()))?;
    let (header, data) = rows
        .split_first()
        .ok_or_else(|| FetchError::Adapter("empty response".into()))?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.as_deref() == Some(name))
            .ok_or_else(|| FetchError::Adapter(format!("response lacks column `{name}`")))
    };
    let state_col = col("state")?;
    let district_col = match query.geography {
        Geography::CongressionalDistrict => Some(col("congressional district")?),
        Geography::State => None,
    };
    let entries = adapter_entries(query.variable, query.census_year);
    let entry_cols: Vec<(usize, &'static str)> = entries
        .iter()
        .map(|(id, cat)| col(id).map(|i| (i, *cat)))
        .collect::<Result<_, _>>()?;

    // (unit_id, kind, state) -> category -> count
    let mut out: BTreeMap<(String, &'static str, String), BTreeMap<&'static str, u64>> =
        BTreeMap::new();
    for row in data {
        let cell = |i: usize| row.get(i).and_then(|c| c.as_deref()).unwrap_or("");
        let Some(postal) = fips_to_postal(cell(state_col)) else {
            continue;
        };
        let top_kind = match postal {
            "DC" => "dc",
            "PR" => "territory",
            _ => "state",
        };
        let mut targets = vec![(postal.to_string(), top_kind)];
        if let (Some(dc), "state") = (district_col, top_kind) {
            let code = cell(dc);
            if code.len() != 2 || !code.bytes().all(|b| b.is_ascii_digit()) {
                continue;
            }
            targets.push((format!("{postal}-{code}"), "district"));
        }
        for (unit_id, kind) in targets {
            let counts = out.entry((unit_id, kind, postal.to_string())).or_default();
            for (i, cat) in &entry_cols {
                let v: u64 = cell(*i).parse().map_err(|_| {
                    FetchError::Adapter(format!("non-numeric value `{}`", cell(*i)))
                })?;
                *counts.entry(cat).or_default() += v;
            }
        }
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let year = query.census_year.to_string();
    let werr = |e: csv::Error| FetchError::Adapter(e.to_string());
    w.write_record(HEADER).map_err(werr)?;
    for ((unit_id, kind, state), counts) in &out {
        for (cat, n) in counts {
            w.write_record([
                unit_id.as_str(),
                kind,
                state.as_str(),
                year.as_str(),
                query.variable.as_str(),
                cat,
                n.to_string().as_str(),
            ])
            .map_err(werr)?;
        }
    }
    w.into_inner()
        .map_err(|e| FetchError::Adapter(e.to_string()))
}
