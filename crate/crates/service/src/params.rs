//! Query-string parsing with strict parameter names.

use std::collections::BTreeMap;
use std::str::FromStr;

use repweight_core::model::{BaselineVariant, Body, Variable};

use crate::error::{ApiError, ApiResult};

pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    /// Rejects any parameter not in `allowed`.
    pub fn new(values: BTreeMap<String, String>, allowed: &[&str]) -> ApiResult<Self> {
        if let Some(bad) = values.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ApiError::bad_request(
                "unknown_parameter",
                format!("unknown query parameter `{bad}`"),
            )
            .with_details(serde_json::json!({ "parameter": bad, "allowed": allowed })));
        }
        Ok(Self { values })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    fn required(&self, name: &str) -> ApiResult<&str> {
        self.get(name).ok_or_else(|| {
            ApiError::bad_request("missing_parameter", format!("query parameter `{name}` is required"))
        })
    }

    fn keyword<T: FromStr>(&self, name: &str, code: &'static str) -> ApiResult<Option<T>> {
        self.get(name)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    ApiError::bad_request(code, format!("unknown {name} `{v}`"))
                        .with_details(serde_json::json!({ name: v }))
                })
            })
            .transpose()
    }

    pub fn year(&self) -> ApiResult<u16> {
        let raw = self.required("year")?;
        parse_year(raw)
    }

    pub fn years(&self) -> ApiResult<Option<Vec<u16>>> {
        self.get("years")
            .map(|raw| raw.split(',').map(|y| parse_year(y.trim())).collect())
            .transpose()
    }

    pub fn variable(&self) -> ApiResult<Variable> {
        let raw = self.required("variable")?;
        raw.parse().map_err(|_| {
            ApiError::bad_request("unknown_variable", format!("unknown variable `{raw}`"))
                .with_details(serde_json::json!({
                    "variable": raw,
                    "known": Variable::ALL.iter().map(|v| v.as_str()).collect::<Vec<_>>(),
                }))
        })
    }

    /// `body` may be a single body or `all` (the default).
    pub fn bodies(&self) -> ApiResult<Vec<Body>> {
        parse_bodies(self.get("body"))
    }

    pub fn baseline(&self) -> ApiResult<BaselineVariant> {
        Ok(self
            .keyword("baseline", "unknown_baseline")?
            .unwrap_or_default())
    }
}

pub fn parse_year(raw: &str) -> ApiResult<u16> {
    raw.parse().map_err(|_| {
        ApiError::bad_request("invalid_year", format!("`{raw}` is not a census year"))
    })
}

/// Parses a `body` value that may be `all`.
pub fn parse_bodies(raw: Option<&str>) -> ApiResult<Vec<Body>> {
    match raw {
        None | Some("all") => Ok(Body::ALL.to_vec()),
        Some(b) => b.parse().map(|b| vec![b]).map_err(|_| {
            ApiError::bad_request("unknown_body", format!("unknown body `{b}`"))
        }),
    }
}
