//! Demographic representation weights for the U.S. House, Senate and
//! Electoral College.
//!
//! The pipeline is: parse extract files ([`ingest`]), validate
//! ([`validate`]), build per-body vote allocations ([`apportion`]), compute
//! per-category metrics ([`metrics`]) or multi-year series ([`trends`]), and
//! render them ([`report`]).

pub mod apportion;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod registry;
pub mod report;
pub mod synthetic;
pub mod trends;
pub mod validate;

pub use error::{Error, Result};
pub use model::{
    AllocatedUnit, ApportionmentSource, AwardMethod, BaselineVariant, Body, BodyAllocation,
    Dataset, DemographicSource, DemographicTable, GeoUnit, MetricsRow, Scenario,
    ScenarioOverrides, UnitKind, UnitOfAnalysis, Variable,
};
