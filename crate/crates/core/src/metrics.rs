//! Represented proportion, absolute weight, relative weight and excess
//! population.
//!
//! For a category and body, the represented proportion is the vote-weighted
//! mean of the category's share in each allocation unit:
//!
//! ```text
//! pib = sum_u (count_u / total_u) * votes_u / sum_u votes_u
//! ```
//!
//! The baseline proportion `pi0` is the category's share of the summed
//! baseline units. Absolute weight is `pib / pi0`, relative weight divides
//! by the referent's absolute weight, and excess population is
//! `grand_total * (pib - pi0)`, positive exactly when the category is
//! overrepresented.
//!
//! Metrics rows also evaluate `pib - pi0` as the vote-weighted mean of each
//! unit's gap to the baseline share, `count_u / total_u - C / T`, with the
//! numerator `count_u * T - C * total_u` formed exactly in integers. A unit
//! whose composition matches the baseline contributes exactly zero. When
//! the gap is within half of `pi0`, `pib` is taken as `pi0 + gap` and excess
//! population as `grand_total * (pib - pi0)`, where the subtraction is exact;
//! weight and excess population then agree in sign. Further from the
//! baseline the direct sum keeps its relative accuracy and is used instead.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::apportion;
use crate::error::{Error, Result};
use crate::model::{
    BaselineVariant, Body, BodyAllocation, Dataset, DemographicSource, DemographicTable,
    MetricsRow, Scenario, UnitOfAnalysis, Variable,
};
use crate::registry::CategoryRegistry;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselinePopulation {
    pub variant: BaselineVariant,
    pub variable: Variable,
    pub unit_of_analysis: UnitOfAnalysis,
    pub units: Vec<String>,
    pub totals: BTreeMap<String, u64>,
    pub grand_total: u64,
}

impl BaselinePopulation {
    /// Sums `table` over the baseline units of `variant`. For household
    /// tables the grand total is a household count.
    pub fn build(dataset: &Dataset, table: &DemographicTable, variant: BaselineVariant) -> Result<Self> {
        let mut totals: BTreeMap<String, u64> = BTreeMap::new();
        let mut units = Vec::new();
        for u in dataset.baseline_units(variant)? {
            for (cat, n) in dataset.resolve_counts(table, &u.unit_id)? {
                *totals.entry(cat).or_default() += n;
            }
            units.push(u.unit_id.clone());
        }
        let grand_total = totals.values().sum();
        Ok(Self {
            variant,
            variable: table.variable,
            unit_of_analysis: table.unit_of_analysis,
            units,
            totals,
            grand_total,
        })
    }
}

/// pi0: the category's share of the baseline population.
pub fn baseline_proportion(baseline: &BaselinePopulation, category: &str) -> Result<f64> {
    if baseline.grand_total == 0 {
        return Err(Error::ZeroBaseline {
            variable: baseline.variable,
        });
    }
    let n = baseline.totals.get(category).copied().unwrap_or(0);
    Ok(n as f64 / baseline.grand_total as f64)
}

/// Per-unit category counts for an allocation, with state aggregates
/// memoized for synthetic districts.
struct CountResolver<'a> {
    dataset: &'a Dataset,
    table: &'a DemographicTable,
    cache: HashMap<String, BTreeMap<String, u64>>,
}

impl<'a> CountResolver<'a> {
    fn new(dataset: &'a Dataset, table: &'a DemographicTable) -> Self {
        Self {
            dataset,
            table,
            cache: HashMap::new(),
        }
    }

    fn counts(&mut self, source: &DemographicSource) -> Result<&BTreeMap<String, u64>> {
        let unit_id = match source {
            DemographicSource::Unit { unit_id } => unit_id.clone(),
            DemographicSource::StateShare { state_code, .. } => self
                .dataset
                .states()
                .into_iter()
                .find(|s| &s.state_code == state_code)
                .map(|s| s.unit_id.clone())
                .ok_or_else(|| Error::UnknownUnit {
                    unit: state_code.clone(),
                })?,
        };
        if !self.cache.contains_key(&unit_id) {
            let c = self.dataset.resolve_counts(self.table, &unit_id)?;
            self.cache.insert(unit_id.clone(), c);
        }
        Ok(&self.cache[&unit_id])
    }
}

/// pib for every category of `table`.
pub fn represented_proportions(
    dataset: &Dataset,
    table: &DemographicTable,
    allocation: &BodyAllocation,
) -> Result<BTreeMap<String, f64>> {
    let categories = table.categories();
    let mut resolver = CountResolver::new(dataset, table);
    let mut weighted = vec![0.0f64; categories.len()];
    let mut votes_total = 0u64;
    for unit in &allocation.units {
        let counts = resolver.counts(&unit.source)?;
        let unit_total: u64 = counts.values().sum();
        if unit_total == 0 {
            return Err(Error::EmptyUnit {
                unit: unit.unit_id.clone(),
                variable: table.variable,
            });
        }
        let votes = f64::from(unit.votes);
        for (i, cat) in categories.iter().enumerate() {
            let share = counts.get(cat).copied().unwrap_or(0) as f64 / unit_total as f64;
            weighted[i] += share * votes;
        }
        votes_total += u64::from(unit.votes);
    }
    let votes_total = votes_total as f64;
    Ok(categories
        .into_iter()
        .zip(weighted)
        .map(|(c, w)| (c, w / votes_total))
        .collect())
}

/// `pib - pi0` for every category of `table`, summed from exact per-unit
/// gap numerators.
fn proportion_gaps(
    dataset: &Dataset,
    table: &DemographicTable,
    allocation: &BodyAllocation,
    baseline: &BaselinePopulation,
) -> Result<BTreeMap<String, f64>> {
    let categories = table.categories();
    let grand = i128::from(baseline.grand_total);
    let mut resolver = CountResolver::new(dataset, table);
    let mut weighted = vec![0.0f64; categories.len()];
    let mut votes_total = 0u64;
    for unit in &allocation.units {
        let counts = resolver.counts(&unit.source)?;
        let unit_total: u64 = counts.values().sum();
        if unit_total == 0 {
            return Err(Error::EmptyUnit {
                unit: unit.unit_id.clone(),
                variable: table.variable,
            });
        }
        let denom = unit_total as f64 * baseline.grand_total as f64;
        let votes = f64::from(unit.votes);
        for (i, cat) in categories.iter().enumerate() {
            let c = i128::from(counts.get(cat).copied().unwrap_or(0));
            let big_c = i128::from(baseline.totals.get(cat).copied().unwrap_or(0));
            let numerator = c * grand - big_c * i128::from(unit_total);
            weighted[i] += numerator as f64 / denom * votes;
        }
        votes_total += u64::from(unit.votes);
    }
    let votes_total = votes_total as f64;
    Ok(categories
        .into_iter()
        .zip(weighted)
        .map(|(c, w)| (c, w / votes_total))
        .collect())
}

pub fn represented_proportion(
    dataset: &Dataset,
    table: &DemographicTable,
    category: &str,
    allocation: &BodyAllocation,
) -> Result<f64> {
    Ok(represented_proportions(dataset, table, allocation)?
        .get(category)
        .copied()
        .unwrap_or(0.0))
}

pub fn absolute_weight(pib: f64, pi0: f64, category: &str) -> Result<f64> {
    if pi0 > 0.0 {
        Ok(pib / pi0)
    } else {
        Err(Error::UndefinedWeight {
            category: category.to_string(),
        })
    }
}

/// RW(c) = AW(c) / AW(referent). The referent's own weight is exactly 1.
pub fn relative_weights(
    weights: &BTreeMap<String, Option<f64>>,
    registry: &CategoryRegistry,
) -> Result<BTreeMap<String, Option<f64>>> {
    let referent = registry.referent;
    let denom = weights
        .get(referent)
        .copied()
        .flatten()
        .filter(|w| *w > 0.0)
        .ok_or_else(|| Error::UndefinedReferent {
            variable: registry.variable,
            referent: referent.to_string(),
        })?;
    Ok(weights
        .iter()
        .map(|(cat, aw)| {
            let rw = if cat == referent {
                Some(1.0)
            } else {
                aw.map(|w| w / denom)
            };
            (cat.clone(), rw)
        })
        .collect())
}

/// grand_total * (pib - pi0)
pub fn excess_population(pib: f64, pi0: f64, grand_total: u64) -> f64 {
    grand_total as f64 * (pib - pi0)
}

/// Metrics for one variable and body under `scenario`.
pub fn compute_metrics(
    dataset: &Dataset,
    variable: Variable,
    body: Body,
    scenario: &Scenario,
) -> Result<Vec<MetricsRow>> {
    let table = dataset.require_table(variable)?;
    compute_metrics_for_table(dataset, table, body, scenario)
}

pub fn compute_metrics_for_table(
    dataset: &Dataset,
    table: &DemographicTable,
    body: Body,
    scenario: &Scenario,
) -> Result<Vec<MetricsRow>> {
    let allocation = apportion::build_body(dataset, body, scenario)?;
    metrics_for_allocation(dataset, table, &allocation, scenario.baseline_variant)
}

pub fn metrics_for_allocation(
    dataset: &Dataset,
    table: &DemographicTable,
    allocation: &BodyAllocation,
    variant: BaselineVariant,
) -> Result<Vec<MetricsRow>> {
    let baseline = BaselinePopulation::build(dataset, table, variant)?;
    let direct = represented_proportions(dataset, table, allocation)?;
    let gaps = proportion_gaps(dataset, table, allocation, &baseline)?;

    let mut pi0 = BTreeMap::new();
    let mut pib = BTreeMap::new();
    let mut ep = BTreeMap::new();
    let mut aw: BTreeMap<String, Option<f64>> = BTreeMap::new();
    let grand = baseline.grand_total as f64;
    for (cat, gap) in &gaps {
        let p0 = baseline_proportion(&baseline, cat)?;
        let (pb, excess) = if gap.abs() <= p0 / 2.0 {
            let pb = p0 + gap;
            (pb, grand * (pb - p0))
        } else {
            (direct[cat], grand * gap)
        };
        pi0.insert(cat.clone(), p0);
        pib.insert(cat.clone(), pb);
        ep.insert(cat.clone(), excess);
        aw.insert(cat.clone(), absolute_weight(pb, p0, cat).ok());
    }
    let rw = relative_weights(&aw, &table.registry())?;

    Ok(table
        .categories()
        .into_iter()
        .map(|cat| {
            let (p0, pb) = (pi0[&cat], pib[&cat]);
            MetricsRow {
                variable: table.variable,
                body: allocation.body,
                census_year: table.census_year,
                baseline_variant: variant,
                unit_of_analysis: table.unit_of_analysis,
                pi0: p0,
                pib: pb,
                absolute_weight: aw[&cat],
                relative_weight: rw[&cat],
                excess_population: ep[&cat],
                category_code: cat,
            }
        })
        .collect())
}

/// Metrics for every body, in House, Senate, EC order.
pub fn compute_all_bodies(
    dataset: &Dataset,
    variable: Variable,
    scenario: &Scenario,
) -> Result<Vec<MetricsRow>> {
    compute_for_bodies(dataset, variable, &Body::ALL, scenario)
}

/// Metrics for the listed bodies, concatenated in the order given. Both the
/// command line and the HTTP service go through this function.
pub fn compute_for_bodies(
    dataset: &Dataset,
    variable: Variable,
    bodies: &[Body],
    scenario: &Scenario,
) -> Result<Vec<MetricsRow>> {
    let table = dataset.require_table(variable)?;
    let mut rows = Vec::new();
    for body in bodies {
        rows.extend(compute_metrics_for_table(dataset, table, *body, scenario)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GeoUnit, UnitKind};

    fn state(id: &str, pop: u64) -> GeoUnit {
        GeoUnit {
            unit_id: id.into(),
            unit_kind: UnitKind::State,
            state_code: id.into(),
            census_year: 2020,
            total_population: pop,
            total_households: None,
            house_seats: Some(1),
        }
    }

    /// A: 100 people, 50 male. B: 900 people, 90 male.
    fn two_states() -> Dataset {
        let mut sex = DemographicTable::new(Variable::Sex, 2020);
        sex.insert("AA", "male", 50);
        sex.insert("AA", "female", 50);
        sex.insert("BB", "male", 90);
        sex.insert("BB", "female", 810);
        Dataset::new(2020, vec![state("AA", 100), state("BB", 900)], vec![sex])
    }

    fn row<'a>(rows: &'a [MetricsRow], cat: &str) -> &'a MetricsRow {
        rows.iter().find(|r| r.category_code == cat).unwrap()
    }

    #[test]
    fn two_state_senate_metrics() {
        let ds = two_states();
        let rows = compute_metrics(&ds, Variable::Sex, Body::Senate, &Scenario::default()).unwrap();
        let male = row(&rows, "male");
        assert!((male.pib - 0.30).abs() < 1e-15);
        assert!((male.pi0 - 0.14).abs() < 1e-15);
        assert!((male.absolute_weight.unwrap() - 15.0 / 7.0).abs() < 1e-12);
        // female is the referent: AW = 0.70 / 0.86
        assert!((male.relative_weight.unwrap() - 645.0 / 245.0).abs() < 1e-12);
        assert!((male.excess_population - 160.0).abs() < 1e-9);
        let female = row(&rows, "female");
        assert_eq!(female.relative_weight, Some(1.0));
        assert!((female.excess_population + 160.0).abs() < 1e-9);
        // categories follow registry order
        assert_eq!(rows[0].category_code, "female");
    }

    #[test]
    fn baseline_proportion_edges() {
        let ds = two_states();
        let t = ds.table(Variable::Sex).unwrap();
        let b = BaselinePopulation::build(&ds, t, BaselineVariant::WithDc).unwrap();
        assert_eq!(b.grand_total, 1000);
        assert_eq!(baseline_proportion(&b, "male").unwrap(), 0.14);
        assert_eq!(baseline_proportion(&b, "nobody").unwrap(), 0.0);
        let mut all = b.clone();
        all.totals = [("male".to_string(), 1000)].into();
        assert_eq!(baseline_proportion(&all, "male").unwrap(), 1.0);
        let mut empty = b;
        empty.grand_total = 0;
        assert!(matches!(baseline_proportion(&empty, "male"), Err(Error::ZeroBaseline { .. })));
    }

    #[test]
    fn pr_baseline_requires_pr() {
        let ds = two_states();
        let t = ds.table(Variable::Sex).unwrap();
        assert!(matches!(
            BaselinePopulation::build(&ds, t, BaselineVariant::WithDcAndPr),
            Err(Error::MissingBaselineUnit { .. })
        ));
    }

    #[test]
    fn single_unit_body_reproduces_unit_share() {
        let mut sex = DemographicTable::new(Variable::Sex, 2020);
        sex.insert("AA", "male", 3);
        sex.insert("AA", "female", 7);
        let ds = Dataset::new(2020, vec![state("AA", 10)], vec![sex]);
        for body in Body::ALL {
            let rows = compute_metrics(&ds, Variable::Sex, body, &Scenario::default()).unwrap();
            assert!((row(&rows, "male").pib - 0.3).abs() < 1e-15);
            assert_eq!(row(&rows, "male").absolute_weight, Some(1.0));
        }
    }

    #[test]
    fn weight_identities() {
        assert_eq!(absolute_weight(0.3, 0.3, "x").unwrap(), 1.0);
        assert!(matches!(absolute_weight(0.3, 0.0, "x"), Err(Error::UndefinedWeight { .. })));
        assert_eq!(excess_population(0.2, 0.2, 1_000_000), 0.0);
        assert_eq!(excess_population(0.30, 0.14, 1000).round(), 160.0);
    }

    #[test]
    fn zero_baseline_category_keeps_its_row() {
        let ds = two_states();
        let mut ds2 = ds.clone();
        // a race table where nobody is NHOPI anywhere still yields a row
        let mut race = DemographicTable::new(Variable::RaceEthnicity, 2020);
        race.insert("AA", "white_nh", 100);
        race.insert("AA", "nhopi_nh", 0);
        race.insert("BB", "white_nh", 900);
        ds2.tables.push(race);
        let rows = compute_metrics(&ds2, Variable::RaceEthnicity, Body::Senate, &Scenario::default()).unwrap();
        let n = row(&rows, "nhopi_nh");
        assert_eq!(n.absolute_weight, None);
        assert_eq!(n.relative_weight, None);
        assert_eq!(n.excess_population, 0.0);
    }

    #[test]
    fn undefined_referent_is_an_error() {
        let mut aw = BTreeMap::new();
        aw.insert("female".to_string(), None);
        aw.insert("male".to_string(), Some(1.2));
        let reg = CategoryRegistry::for_year(Variable::Sex, 2020).unwrap();
        assert!(matches!(relative_weights(&aw, &reg), Err(Error::UndefinedReferent { .. })));
    }

    #[test]
    fn missing_unit_in_table() {
        let mut ds = two_states();
        ds.tables[0].counts.remove("BB");
        let err = compute_metrics(&ds, Variable::Sex, Body::Senate, &Scenario::default()).unwrap_err();
        assert!(matches!(err, Error::UnitMissingFromTable { ref unit, .. } if unit == "BB"), "{err}");
    }
}
