use thiserror::Error;

use crate::model::{BaselineVariant, Variable};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error at column {column}: expected `{expected}`, found `{found}`")]
    Schema {
        column: usize,
        expected: String,
        found: String,
    },

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("harmonization map for {variable} has no entry for category `{category}`")]
    UnmappedCategory { variable: Variable, category: String },

    #[error("harmonization map is for {map}, table is {table}")]
    HarmonizationMismatch { map: Variable, table: Variable },

    #[error("no harmonization path for {variable} in census year {year}")]
    NoHarmonizationPath { variable: Variable, year: u16 },

    #[error("seat total {seats} is smaller than the number of states ({states})")]
    TooFewSeats { seats: u32, states: usize },

    #[error("state {state} has zero population; apportionment needs positive populations")]
    NonPositivePopulation { state: String },

    #[error("no state units in the {year} dataset")]
    NoStates { year: u16 },

    #[error("no district data for state(s): {}", .states.join(", "))]
    MissingDistricts { states: Vec<String> },

    #[error("unit {unit} is missing from the {variable} table")]
    UnitMissingFromTable { unit: String, variable: Variable },

    #[error("unit {unit} has no counts for {variable}; proportions are undefined")]
    EmptyUnit { unit: String, variable: Variable },

    #[error("unit {unit} has zero population")]
    ZeroPopulation { unit: String },

    #[error("unit {unit} is not present in the dataset")]
    UnknownUnit { unit: String },

    #[error("baseline total for {variable} is zero")]
    ZeroBaseline { variable: Variable },

    #[error("baseline {variant} requires unit {unit}, which is absent from the dataset")]
    MissingBaselineUnit {
        variant: BaselineVariant,
        unit: String,
    },

    #[error("absolute weight for `{category}` is undefined (baseline proportion is zero)")]
    UndefinedWeight { category: String },

    #[error("referent `{referent}` of {variable} has no usable absolute weight")]
    UndefinedReferent { variable: Variable, referent: String },

    #[error("no {variable} table for census year {year}")]
    MissingTable { variable: Variable, year: u16 },

    #[error("unknown figure kind `{0}`")]
    UnknownFigureKind(String),

    #[error("figure kind {kind} cannot be built from the supplied inputs")]
    FigureInputMismatch { kind: &'static str },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
