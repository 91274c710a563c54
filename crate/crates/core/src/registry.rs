//! Category definitions per demographic variable and census year.
//!
//! Codes are stable snake_case tokens; display names may differ by year but
//! codes never do. Each variable has one referent category used as the
//! denominator for relative weights.

use serde::Serialize;

use crate::model::Variable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Category {
    pub code: &'static str,
    pub display: &'static str,
}

const fn cat(code: &'static str, display: &'static str) -> Category {
    Category { code, display }
}

const RACE: &[Category] = &[
    cat("white_nh", "White"),
    cat("hispanic", "Hispanic"),
    cat("black_nh", "Black"),
    cat("asian_nh", "Asian"),
    cat("multiple_nh", "Multiple"),
    cat("aian_nh", "AIAN"),
    cat("nhopi_nh", "NHOPI"),
    cat("other_nh", "Other"),
];

const AGE: &[Category] = &[
    cat("age_0_17", "0-17"),
    cat("age_18_39", "18-39"),
    cat("age_40_64", "40-64"),
    cat("age_65_plus", "65+"),
];

const SEX: &[Category] = &[cat("female", "Female"), cat("male", "Male")];

const RURAL_URBAN_2020: &[Category] = &[cat("rural", "Rural"), cat("urban", "Urban")];

const RURAL_URBAN_SPLIT: &[Category] = &[
    cat("rural", "Rural"),
    cat("urban_cluster", "Urban Cluster"),
    cat("urbanized_area", "Urbanized Area"),
];

const HOUSING_SPLIT: &[Category] = &[
    cat("renter", "Renter"),
    cat("owner_mortgage", "Owner: Mortgage"),
    cat("owner_clear", "Owner: Clear"),
];

const HOUSING_2000: &[Category] = &[cat("renter", "Renter"), cat("owner", "Owner")];

/// The ordered category set of one variable, either for a specific census
/// year or for the harmonized trend scheme (`census_year == None`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryRegistry {
    pub variable: Variable,
    pub census_year: Option<u16>,
    pub categories: &'static [Category],
    pub referent: &'static str,
}

impl CategoryRegistry {
    /// Categories as published for `year`. Returns `None` for years outside
    /// 2000, 2010 and 2020.
    pub fn for_year(variable: Variable, year: u16) -> Option<Self> {
        let categories = match (variable, year) {
            (_, y) if !crate::model::CENSUS_YEARS.contains(&y) => return None,
            (Variable::RaceEthnicity, _) => RACE,
            (Variable::AgeCategory, _) => AGE,
            (Variable::Sex, _) => SEX,
            (Variable::RuralUrban, 2020) => RURAL_URBAN_2020,
            (Variable::RuralUrban, _) => RURAL_URBAN_SPLIT,
            (Variable::HousingStatus, 2000) => HOUSING_2000,
            (Variable::HousingStatus, _) => HOUSING_SPLIT,
        };
        Some(Self {
            variable,
            census_year: Some(year),
            categories,
            referent: referent(variable),
        })
    }

    /// Categories shared by every year after harmonization.
    pub fn trend(variable: Variable) -> Self {
        let categories = match variable {
            Variable::RaceEthnicity => RACE,
            Variable::AgeCategory => AGE,
            Variable::Sex => SEX,
            Variable::RuralUrban => RURAL_URBAN_2020,
            Variable::HousingStatus => HOUSING_2000,
        };
        Self {
            variable,
            census_year: None,
            categories,
            referent: referent(variable),
        }
    }

    pub fn contains(&self, code: &str) -> bool {
        self.categories.iter().any(|c| c.code == code)
    }

    pub fn codes(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.categories.iter().map(|c| c.code)
    }
}

pub fn referent(variable: Variable) -> &'static str {
    match variable {
        Variable::RaceEthnicity => "white_nh",
        Variable::AgeCategory => "age_0_17",
        Variable::Sex => "female",
        Variable::RuralUrban => "rural",
        Variable::HousingStatus => "renter",
    }
}

/// Whether `code` is acceptable for `variable` in `year`, either as a
/// year-specific category or as an already-harmonized trend category.
pub fn is_known_category(variable: Variable, year: u16, code: &str) -> bool {
    CategoryRegistry::for_year(variable, year).is_some_and(|r| r.contains(code))
        || CategoryRegistry::trend(variable).contains(code)
}

/// Sort key placing year-specific codes first in registry order, then trend
/// codes, then anything unknown.
pub fn category_rank(variable: Variable, code: &str) -> usize {
    let mut seen: Vec<&'static str> = Vec::new();
    for year in crate::model::CENSUS_YEARS.iter().rev() {
        if let Some(r) = CategoryRegistry::for_year(variable, *year) {
            for c in r.codes() {
                if !seen.contains(&c) {
                    seen.push(c);
                }
            }
        }
    }
    for c in CategoryRegistry::trend(variable).codes() {
        if !seen.contains(&c) {
            seen.push(c);
        }
    }
    seen.iter().position(|c| *c == code).unwrap_or(usize::MAX)
}

pub fn display_name(variable: Variable, code: &str) -> String {
    let trend = CategoryRegistry::trend(variable);
    crate::model::CENSUS_YEARS
        .iter()
        .filter_map(|y| CategoryRegistry::for_year(variable, *y))
        .chain(std::iter::once(trend))
        .flat_map(|r| r.categories.iter())
        .find(|c| c.code == code)
        .map(|c| c.display.to_string())
        .unwrap_or_else(|| code.to_string())
}
