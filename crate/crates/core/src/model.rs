//! Shared domain types.
//!
//! Everything here is plain data, immutable once built and freely shareable
//! across threads.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::{self, CategoryRegistry};

pub const CENSUS_YEARS: [u16; 3] = [2000, 2010, 2020];

/// Error returned when a keyword does not name a variant.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{value}`")]
pub struct ParseKeywordError {
    pub kind: &'static str,
    pub value: String,
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal { $($(#[$vmeta:meta])* $variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($(#[$vmeta])* $variant),+
        }

        impl $name {
            pub const ALL: [$name; [$($text),+].len()] = [$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ParseKeywordError;

            /// Accepts the snake_case form and its kebab-case spelling.
            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                let normalized = s.trim().replace('-', "_");
                match normalized.as_str() {
                    $($text => Ok($name::$variant),)+
                    _ => Err(ParseKeywordError { kind: $kind, value: s.to_string() }),
                }
            }
        }
    };
}

keyword_enum!(
    /// Demographic variable.
    Variable, "variable" {
        RaceEthnicity => "race_ethnicity",
        AgeCategory => "age_category",
        Sex => "sex",
        RuralUrban => "rural_urban",
        HousingStatus => "housing_status",
    }
);

keyword_enum!(UnitKind, "unit kind" {
    State => "state",
    District => "district",
    Dc => "dc",
    Territory => "territory",
});

keyword_enum!(UnitOfAnalysis, "unit of analysis" {
    Population => "population",
    Households => "households",
});

keyword_enum!(
    /// Representative body.
    Body, "body" {
        House => "house",
        Senate => "senate",
        Ec => "ec",
    }
);

keyword_enum!(#[derive(Default)] BaselineVariant, "baseline variant" {
    #[default]
    WithDc => "with_dc",
    WithoutDc => "without_dc",
    WithDcAndPr => "with_dc_and_pr",
});

keyword_enum!(AwardMethod, "elector award method" {
    Statewide => "statewide",
    ByDistrict => "by_district",
});

keyword_enum!(#[derive(Default)] ApportionmentSource, "apportionment source" {
    #[default]
    FromInputData => "from_input_data",
    Recomputed => "recomputed",
});

impl Variable {
    /// Housing status is counted in households; everything else in persons.
    pub fn unit_of_analysis(self) -> UnitOfAnalysis {
        match self {
            Variable::HousingStatus => UnitOfAnalysis::Households,
            _ => UnitOfAnalysis::Population,
        }
    }

    pub fn display(self) -> &'static str {
        match self {
            Variable::RaceEthnicity => "Race/Ethnicity",
            Variable::AgeCategory => "Age Category",
            Variable::Sex => "Sex",
            Variable::RuralUrban => "Rural/Urban Status",
            Variable::HousingStatus => "Housing Status (Household Level)",
        }
    }
}

impl Body {
    pub fn display(self) -> &'static str {
        match self {
            Body::House => "House",
            Body::Senate => "Senate",
            Body::Ec => "Electoral College",
        }
    }
}

/// A population-bearing unit: state, congressional district, DC or territory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoUnit {
    pub unit_id: String,
    pub unit_kind: UnitKind,
    /// Postal code; districts carry their parent state's code.
    pub state_code: String,
    pub census_year: u16,
    pub total_population: u64,
    pub total_households: Option<u64>,
    /// Number of House seats the state held at the census-year election.
    /// Only consulted for state-level datasets that carry no district units.
    pub house_seats: Option<u32>,
}

impl GeoUnit {
    pub fn total(&self, unit: UnitOfAnalysis) -> Option<u64> {
        match unit {
            UnitOfAnalysis::Population => Some(self.total_population),
            UnitOfAnalysis::Households => self.total_households,
        }
    }
}

/// Per-unit counts of one variable's categories for one census year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemographicTable {
    pub variable: Variable,
    pub census_year: u16,
    pub unit_of_analysis: UnitOfAnalysis,
    /// unit_id -> category_code -> count
    pub counts: BTreeMap<String, BTreeMap<String, u64>>,
}

impl DemographicTable {
    pub fn new(variable: Variable, census_year: u16) -> Self {
        Self {
            variable,
            census_year,
            unit_of_analysis: variable.unit_of_analysis(),
            counts: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, unit_id: &str, category: &str, count: u64) {
        self.counts
            .entry(unit_id.to_string())
            .or_default()
            .insert(category.to_string(), count);
    }

    pub fn unit(&self, unit_id: &str) -> Option<&BTreeMap<String, u64>> {
        self.counts.get(unit_id)
    }

    pub fn unit_total(&self, unit_id: &str) -> Option<u64> {
        self.unit(unit_id).map(|c| c.values().sum())
    }

    /// Every category code present in the table, in registry order.
    pub fn categories(&self) -> Vec<String> {
        let distinct: std::collections::BTreeSet<&String> =
            self.counts.values().flat_map(|c| c.keys()).collect();
        let mut codes: Vec<String> = distinct.into_iter().cloned().collect();
        codes.sort_by_cached_key(|c| registry::category_rank(self.variable, c));
        codes
    }

    /// The registry whose category set this table uses: the year-specific
    /// one when every code belongs to it, otherwise the trend scheme.
    pub fn registry(&self) -> CategoryRegistry {
        match CategoryRegistry::for_year(self.variable, self.census_year) {
            Some(r) if self.categories().iter().all(|c| r.contains(c)) => r,
            _ => CategoryRegistry::trend(self.variable),
        }
    }
}

/// All units and tables of one census year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub census_year: u16,
    pub units: Vec<GeoUnit>,
    pub tables: Vec<DemographicTable>,
}

impl Dataset {
    pub fn new(census_year: u16, units: Vec<GeoUnit>, tables: Vec<DemographicTable>) -> Self {
        Self {
            census_year,
            units,
            tables,
        }
    }

    /// Groups parsed units and tables by census year.
    pub fn by_year(units: Vec<GeoUnit>, tables: Vec<DemographicTable>) -> BTreeMap<u16, Dataset> {
        let mut out: BTreeMap<u16, Dataset> = BTreeMap::new();
        for u in units {
            let year = u.census_year;
            out.entry(year)
                .or_insert_with(|| Dataset::new(year, Vec::new(), Vec::new()))
                .units
                .push(u);
        }
        for t in tables {
            let year = t.census_year;
            out.entry(year)
                .or_insert_with(|| Dataset::new(year, Vec::new(), Vec::new()))
                .tables
                .push(t);
        }
        out
    }

    pub fn unit(&self, unit_id: &str) -> Option<&GeoUnit> {
        self.units.iter().find(|u| u.unit_id == unit_id)
    }

    pub fn units_of_kind(&self, kind: UnitKind) -> impl Iterator<Item = &GeoUnit> {
        self.units.iter().filter(move |u| u.unit_kind == kind)
    }

    /// State units sorted by postal code.
    pub fn states(&self) -> Vec<&GeoUnit> {
        let mut states: Vec<&GeoUnit> = self.units_of_kind(UnitKind::State).collect();
        states.sort_by(|a, b| a.state_code.cmp(&b.state_code));
        states
    }

    /// District units of one state sorted by unit id.
    pub fn districts_of(&self, state_code: &str) -> Vec<&GeoUnit> {
        let mut d: Vec<&GeoUnit> = self
            .units_of_kind(UnitKind::District)
            .filter(|u| u.state_code == state_code)
            .collect();
        d.sort_by(|a, b| a.unit_id.cmp(&b.unit_id));
        d
    }

    pub fn table(&self, variable: Variable) -> Option<&DemographicTable> {
        self.tables.iter().find(|t| t.variable == variable)
    }

    pub fn require_table(&self, variable: Variable) -> Result<&DemographicTable> {
        self.table(variable).ok_or(Error::MissingTable {
            variable,
            year: self.census_year,
        })
    }

    pub fn variables(&self) -> Vec<Variable> {
        let mut v: Vec<Variable> = self.tables.iter().map(|t| t.variable).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Top-level units counted in the baseline population: every state, DC
    /// when present (unless excluded), and Puerto Rico when requested. Other
    /// territories are never included.
    pub fn baseline_units(&self, variant: BaselineVariant) -> Result<Vec<&GeoUnit>> {
        let mut out: Vec<&GeoUnit> = self.states();
        if variant != BaselineVariant::WithoutDc {
            out.extend(self.units_of_kind(UnitKind::Dc));
        }
        if variant == BaselineVariant::WithDcAndPr {
            let pr = self
                .units
                .iter()
                .find(|u| u.unit_kind == UnitKind::Territory && u.state_code == "PR")
                .ok_or(Error::MissingBaselineUnit {
                    variant,
                    unit: "PR".into(),
                })?;
            out.push(pr);
        }
        Ok(out)
    }

    pub fn baseline_population(&self, variant: BaselineVariant) -> Result<u64> {
        Ok(self
            .baseline_units(variant)?
            .iter()
            .map(|u| u.total_population)
            .sum())
    }

    /// Counts for `unit_id` in `table`. States without their own rows are
    /// aggregated from their districts.
    pub fn resolve_counts(
        &self,
        table: &DemographicTable,
        unit_id: &str,
    ) -> Result<BTreeMap<String, u64>> {
        if let Some(c) = table.unit(unit_id) {
            return Ok(c.clone());
        }
        let missing = || Error::UnitMissingFromTable {
            unit: unit_id.to_string(),
            variable: table.variable,
        };
        let unit = self.unit(unit_id).ok_or_else(missing)?;
        if unit.unit_kind != UnitKind::State {
            return Err(missing());
        }
        let districts = self.districts_of(&unit.state_code);
        if districts.is_empty() {
            return Err(missing());
        }
        let mut agg: BTreeMap<String, u64> = BTreeMap::new();
        for d in districts {
            let counts = table.unit(&d.unit_id).ok_or_else(missing)?;
            for (cat, n) in counts {
                *agg.entry(cat.clone()).or_default() += n;
            }
        }
        Ok(agg)
    }
}

/// A what-if configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub baseline_variant: BaselineVariant,
    /// Per-state method; the key `*` sets the method for every state not
    /// listed. States matching neither are awarded statewide.
    pub elector_award_method: BTreeMap<String, AwardMethod>,
    pub house_seat_total: u32,
    pub apportionment_source: ApportionmentSource,
}

pub const DEFAULT_HOUSE_SEATS: u32 = 435;

impl Default for Scenario {
    fn default() -> Self {
        Self {
            baseline_variant: BaselineVariant::WithDc,
            elector_award_method: default_award_methods(),
            house_seat_total: DEFAULT_HOUSE_SEATS,
            apportionment_source: ApportionmentSource::FromInputData,
        }
    }
}

fn default_award_methods() -> BTreeMap<String, AwardMethod> {
    [("ME", AwardMethod::ByDistrict), ("NE", AwardMethod::ByDistrict)]
        .into_iter()
        .map(|(s, m)| (s.to_string(), m))
        .collect()
}

impl Scenario {
    pub fn award_method(&self, state_code: &str) -> AwardMethod {
        self.elector_award_method
            .get(state_code)
            .or_else(|| self.elector_award_method.get("*"))
            .copied()
            .unwrap_or(AwardMethod::Statewide)
    }

    pub fn validate(&self, state_count: usize) -> Result<()> {
        if (self.house_seat_total as usize) < state_count {
            return Err(Error::InvalidScenario(format!(
                "house_seat_total {} is below the number of states ({state_count})",
                self.house_seat_total
            )));
        }
        Ok(())
    }
}

/// Partial scenario as written in scenario files and requests. Absent fields
/// take their defaults; award-method entries are merged over the default
/// Maine/Nebraska entries. Giving `house_seat_total` without an
/// `apportionment_source` selects `recomputed`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    #[serde(default)]
    pub baseline_variant: Option<BaselineVariant>,
    #[serde(default)]
    pub elector_award_method: BTreeMap<String, AwardMethod>,
    #[serde(default)]
    pub house_seat_total: Option<u32>,
    #[serde(default)]
    pub apportionment_source: Option<ApportionmentSource>,
}

impl ScenarioOverrides {
    pub fn into_scenario(self) -> Scenario {
        let mut s = Scenario::default();
        if let Some(b) = self.baseline_variant {
            s.baseline_variant = b;
        }
        s.elector_award_method.extend(self.elector_award_method);
        if let Some(n) = self.house_seat_total {
            s.house_seat_total = n;
        }
        // A seat total only has meaning when seats are reapportioned.
        s.apportionment_source = match (self.apportionment_source, self.house_seat_total) {
            (Some(a), _) => a,
            (None, Some(_)) => ApportionmentSource::Recomputed,
            (None, None) => ApportionmentSource::FromInputData,
        };
        s
    }
}

/// Where an allocation unit takes its demographic proportions from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemographicSource {
    /// A unit in the dataset.
    Unit { unit_id: String },
    /// One of `districts` equal-population districts of a state, carrying
    /// the state's proportions.
    StateShare { state_code: String, districts: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocatedUnit {
    pub unit_id: String,
    pub state_code: String,
    pub votes: u32,
    pub source: DemographicSource,
}

/// Units of one body and the votes each carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyAllocation {
    pub body: Body,
    pub census_year: u16,
    pub units: Vec<AllocatedUnit>,
    pub total_votes: u32,
    /// Assumptions made while building the allocation.
    pub notes: Vec<String>,
}

impl BodyAllocation {
    pub fn new(body: Body, census_year: u16, units: Vec<AllocatedUnit>, notes: Vec<String>) -> Self {
        let total_votes = units.iter().map(|u| u.votes).sum();
        Self {
            body,
            census_year,
            units,
            total_votes,
            notes,
        }
    }

    pub fn votes(&self) -> BTreeMap<&str, u32> {
        self.units
            .iter()
            .map(|u| (u.unit_id.as_str(), u.votes))
            .collect()
    }

    /// Votes summed per state code.
    pub fn votes_by_state(&self) -> BTreeMap<&str, u32> {
        let mut out: BTreeMap<&str, u32> = BTreeMap::new();
        for u in &self.units {
            *out.entry(u.state_code.as_str()).or_default() += u.votes;
        }
        out
    }
}

/// Per-category metrics for one body, variable, year and baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub variable: Variable,
    pub category_code: String,
    pub body: Body,
    pub census_year: u16,
    pub baseline_variant: BaselineVariant,
    pub unit_of_analysis: UnitOfAnalysis,
    pub pi0: f64,
    pub pib: f64,
    pub absolute_weight: Option<f64>,
    pub relative_weight: Option<f64>,
    pub excess_population: f64,
}
