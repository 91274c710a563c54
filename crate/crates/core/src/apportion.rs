//! Vote structures for the three bodies, plus Huntington–Hill seat
//! apportionment for what-if recomputation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AllocatedUnit, ApportionmentSource, AwardMethod, Body, BodyAllocation, Dataset,
    DemographicSource, GeoUnit, Scenario, UnitKind,
};

pub const SENATE_VOTES_PER_STATE: u32 = 2;
pub const DC_ELECTORS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatApportionment {
    pub seat_total: u32,
    pub seats: BTreeMap<String, u32>,
}

/// Compares `p/q` with `r/s` exactly. Denominators must be nonzero.
fn cmp_ratio(mut p: u128, mut q: u128, mut r: u128, mut s: u128) -> Ordering {
    // Continued-fraction expansion: compare integer parts, then the
    // reciprocals of the fractional parts with the order flipped.
    loop {
        let (a, b) = (p / q, r / s);
        if a != b {
            return a.cmp(&b);
        }
        let (pf, rf) = (p % q, r % s);
        match (pf == 0, rf == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            (false, false) => {
                // pf/q vs rf/s  <=>  s/rf vs q/pf
                (p, q, r, s) = (s, rf, q, pf);
            }
        }
    }
}

#[derive(Debug, Eq, PartialEq)]
struct Claim<'a> {
    population: u64,
    seats: u32,
    state: &'a str,
}

impl Ord for Claim<'_> {
    /// Priority pop/sqrt(n(n+1)), compared through its square
    /// pop²/(n(n+1)). Ties go to the larger population, then to the
    /// alphabetically first state code.
    fn cmp(&self, other: &Self) -> Ordering {
        let sq = |c: &Claim| -> (u128, u128) {
            let n = u128::from(c.seats);
            (u128::from(c.population) * u128::from(c.population), n * (n + 1))
        };
        let (p, q) = sq(self);
        let (r, s) = sq(other);
        cmp_ratio(p, q, r, s)
            .then_with(|| self.population.cmp(&other.population))
            .then_with(|| other.state.cmp(self.state))
    }
}

impl PartialOrd for Claim<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Method of equal proportions: one seat per state, then each remaining
/// seat to the state with the highest priority value.
pub fn huntington_hill(
    populations: &BTreeMap<String, u64>,
    seat_total: u32,
) -> Result<SeatApportionment> {
    if (seat_total as usize) < populations.len() {
        return Err(Error::TooFewSeats {
            seats: seat_total,
            states: populations.len(),
        });
    }
    if let Some((state, _)) = populations.iter().find(|(_, p)| **p == 0) {
        return Err(Error::NonPositivePopulation {
            state: state.clone(),
        });
    }
    let mut heap: BinaryHeap<Claim> = populations
        .iter()
        .map(|(state, population)| Claim {
            population: *population,
            seats: 1,
            state,
        })
        .collect();
    let mut remaining = seat_total - populations.len() as u32;
    while remaining > 0 {
        let Some(mut top) = heap.pop() else { break };
        top.seats += 1;
        heap.push(top);
        remaining -= 1;
    }
    let seats = heap
        .into_iter()
        .map(|c| (c.state.to_string(), c.seats))
        .collect();
    Ok(SeatApportionment { seat_total, seats })
}

pub(crate) fn district_id(state: &str, index: u32, count: u32) -> String {
    if count == 1 {
        format!("{state}-00")
    } else {
        format!("{state}-{index:02}")
    }
}

fn synthetic_districts(state: &str, count: u32) -> impl Iterator<Item = AllocatedUnit> + '_ {
    (1..=count).map(move |i| AllocatedUnit {
        unit_id: district_id(state, i, count),
        state_code: state.to_string(),
        votes: 1,
        source: DemographicSource::StateShare {
            state_code: state.to_string(),
            districts: count,
        },
    })
}

fn require_states(dataset: &Dataset) -> Result<Vec<&GeoUnit>> {
    let states = dataset.states();
    if states.is_empty() {
        return Err(Error::NoStates {
            year: dataset.census_year,
        });
    }
    Ok(states)
}

/// One vote per congressional district. DC and territories are absent.
///
/// With `from_input_data`, a state's districts come from the dataset; a state
/// with no district units but a declared seat count (state-level data such
/// as 2000) gets that many equal districts carrying its own proportions.
/// With `recomputed`, seats are reapportioned over state populations.
pub fn build_house(dataset: &Dataset, scenario: &Scenario) -> Result<BodyAllocation> {
    let states = require_states(dataset)?;
    let mut units = Vec::new();
    let mut notes = Vec::new();

    match scenario.apportionment_source {
        ApportionmentSource::FromInputData => {
            let mut missing = Vec::new();
            let mut synthesized = Vec::new();
            for s in &states {
                let districts = dataset.districts_of(&s.state_code);
                if !districts.is_empty() {
                    units.extend(districts.into_iter().map(|d| AllocatedUnit {
                        unit_id: d.unit_id.clone(),
                        state_code: d.state_code.clone(),
                        votes: 1,
                        source: DemographicSource::Unit {
                            unit_id: d.unit_id.clone(),
                        },
                    }));
                } else if let Some(n) = s.house_seats.filter(|n| *n > 0) {
                    units.extend(synthetic_districts(&s.state_code, n));
                    synthesized.push(s.state_code.clone());
                } else {
                    missing.push(s.state_code.clone());
                }
            }
            if !missing.is_empty() {
                return Err(Error::MissingDistricts { states: missing });
            }
            if !synthesized.is_empty() {
                notes.push(format!(
                    "synthetic_districts: {} state(s) have no district data; each is split into its \
                     declared number of equal districts carrying state proportions ({})",
                    synthesized.len(),
                    synthesized.join(", ")
                ));
            }
        }
        ApportionmentSource::Recomputed => {
            scenario.validate(states.len())?;
            let pops: BTreeMap<String, u64> = states
                .iter()
                .map(|s| (s.state_code.clone(), s.total_population))
                .collect();
            let seats = huntington_hill(&pops, scenario.house_seat_total)?;
            for (state, n) in &seats.seats {
                units.extend(synthetic_districts(state, *n));
            }
            notes.push(format!(
                "recomputed: {} seats reapportioned by Huntington-Hill; districts are equal-population \
                 and carry state proportions",
                scenario.house_seat_total
            ));
        }
    }
    Ok(BodyAllocation::new(Body::House, dataset.census_year, units, notes))
}

/// Two votes per state.
pub fn build_senate(dataset: &Dataset, _scenario: &Scenario) -> Result<BodyAllocation> {
    let units = require_states(dataset)?
        .into_iter()
        .map(|s| AllocatedUnit {
            unit_id: s.unit_id.clone(),
            state_code: s.state_code.clone(),
            votes: SENATE_VOTES_PER_STATE,
            source: DemographicSource::Unit {
                unit_id: s.unit_id.clone(),
            },
        })
        .collect();
    Ok(BodyAllocation::new(Body::Senate, dataset.census_year, units, Vec::new()))
}

/// Elector-apportioning units. Statewide states are one unit with
/// seats + 2 votes; by-district states contribute each district (1 vote)
/// plus the state as a whole (2 votes); DC has 3 votes.
pub fn build_ec(dataset: &Dataset, scenario: &Scenario) -> Result<BodyAllocation> {
    let house = build_house(dataset, scenario)?;
    let mut house_by_state: BTreeMap<&str, Vec<&AllocatedUnit>> = BTreeMap::new();
    for u in &house.units {
        house_by_state.entry(u.state_code.as_str()).or_default().push(u);
    }

    let mut units = Vec::new();
    let mut by_district_synthetic = Vec::new();
    for s in require_states(dataset)? {
        let districts = house_by_state
            .get(s.state_code.as_str())
            .ok_or_else(|| Error::MissingDistricts {
                states: vec![s.state_code.clone()],
            })?;
        let whole_state = |votes: u32| AllocatedUnit {
            unit_id: s.unit_id.clone(),
            state_code: s.state_code.clone(),
            votes,
            source: DemographicSource::Unit {
                unit_id: s.unit_id.clone(),
            },
        };
        match scenario.award_method(&s.state_code) {
            AwardMethod::Statewide => {
                units.push(whole_state(districts.len() as u32 + SENATE_VOTES_PER_STATE));
            }
            AwardMethod::ByDistrict => {
                if districts
                    .iter()
                    .any(|d| matches!(d.source, DemographicSource::StateShare { .. }))
                {
                    by_district_synthetic.push(s.state_code.clone());
                }
                units.extend(districts.iter().map(|d| (*d).clone()));
                units.push(whole_state(SENATE_VOTES_PER_STATE));
            }
        }
    }
    for dc in dataset.units_of_kind(UnitKind::Dc) {
        units.push(AllocatedUnit {
            unit_id: dc.unit_id.clone(),
            state_code: dc.state_code.clone(),
            votes: DC_ELECTORS,
            source: DemographicSource::Unit {
                unit_id: dc.unit_id.clone(),
            },
        });
    }

    let mut notes = house.notes;
    if !by_district_synthetic.is_empty() {
        notes.push(format!(
            "by_district_synthetic: district electors of {} use synthetic districts with state proportions",
            by_district_synthetic.join(", ")
        ));
    }
    Ok(BodyAllocation::new(Body::Ec, dataset.census_year, units, notes))
}

pub fn build_body(dataset: &Dataset, body: Body, scenario: &Scenario) -> Result<BodyAllocation> {
    match body {
        Body::House => build_house(dataset, scenario),
        Body::Senate => build_senate(dataset, scenario),
        Body::Ec => build_ec(dataset, scenario),
    }
}

/// House seats per state implied by an allocation (districts per state).
pub fn seats_by_state(house: &BodyAllocation) -> BTreeMap<String, u32> {
    let mut out = BTreeMap::new();
    for u in &house.units {
        *out.entry(u.state_code.clone()).or_default() += u.votes;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitWeight {
    pub unit_id: String,
    pub state_code: String,
    pub votes: u32,
    pub population: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateWeight {
    pub state_code: String,
    pub votes: u32,
    pub population: u64,
    pub weight: f64,
}

/// Absolute population weight of every allocation unit, and of every state
/// with its units' votes pooled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitWeights {
    pub body: Body,
    pub census_year: u16,
    pub baseline_population: u64,
    pub total_votes: u32,
    pub units: Vec<UnitWeight>,
    pub states: Vec<StateWeight>,
}

fn source_population(dataset: &Dataset, source: &DemographicSource) -> Result<f64> {
    match source {
        DemographicSource::Unit { unit_id } => dataset
            .unit(unit_id)
            .map(|u| u.total_population as f64)
            .ok_or_else(|| Error::UnknownUnit {
                unit: unit_id.clone(),
            }),
        DemographicSource::StateShare {
            state_code,
            districts,
        } => dataset
            .states()
            .into_iter()
            .find(|s| &s.state_code == state_code)
            .map(|s| s.total_population as f64 / f64::from(*districts))
            .ok_or_else(|| Error::UnknownUnit {
                unit: state_code.clone(),
            }),
    }
}

/// weight(u) = (votes_u / total_votes) / (population_u / baseline_population)
pub fn unit_weight(
    dataset: &Dataset,
    allocation: &BodyAllocation,
    baseline_population: u64,
) -> Result<UnitWeights> {
    let total_votes = f64::from(allocation.total_votes);
    let baseline = baseline_population as f64;
    let mut units = Vec::with_capacity(allocation.units.len());
    for u in &allocation.units {
        let population = source_population(dataset, &u.source)?;
        if population <= 0.0 {
            return Err(Error::ZeroPopulation {
                unit: u.unit_id.clone(),
            });
        }
        units.push(UnitWeight {
            unit_id: u.unit_id.clone(),
            state_code: u.state_code.clone(),
            votes: u.votes,
            population,
            weight: (f64::from(u.votes) / total_votes) / (population / baseline),
        });
    }

    let mut states = Vec::new();
    for (state_code, votes) in allocation.votes_by_state() {
        let top = dataset
            .units
            .iter()
            .find(|u| u.unit_kind != UnitKind::District && u.state_code == state_code)
            .ok_or_else(|| Error::UnknownUnit {
                unit: state_code.to_string(),
            })?;
        if top.total_population == 0 {
            return Err(Error::ZeroPopulation {
                unit: top.unit_id.clone(),
            });
        }
        states.push(StateWeight {
            state_code: state_code.to_string(),
            votes,
            population: top.total_population,
            weight: (f64::from(votes) / total_votes) / (top.total_population as f64 / baseline),
        });
    }

    Ok(UnitWeights {
        body: allocation.body,
        census_year: allocation.census_year,
        baseline_population,
        total_votes: allocation.total_votes,
        units,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pops(entries: &[(&str, u64)]) -> BTreeMap<String, u64> {
        entries.iter().map(|(s, p)| (s.to_string(), *p)).collect()
    }

    fn seats(a: &SeatApportionment) -> Vec<(&str, u32)> {
        a.seats.iter().map(|(s, n)| (s.as_str(), *n)).collect()
    }

    #[test]
    fn ratio_comparison_is_exact() {
        assert_eq!(cmp_ratio(1, 3, 1, 3), Ordering::Equal);
        assert_eq!(cmp_ratio(2, 6, 1, 3), Ordering::Equal);
        assert_eq!(cmp_ratio(1, 3, 2, 5), Ordering::Less);
        assert_eq!(cmp_ratio(7, 2, 3, 1), Ordering::Greater);
        // differ only far past f64 precision
        let big = 1u128 << 100;
        assert_eq!(cmp_ratio(big + 1, big, big, big - 1), Ordering::Less);
        assert_eq!(cmp_ratio(big, big - 1, big + 1, big), Ordering::Greater);
    }

    #[test]
    fn small_worked_example() {
        let a = huntington_hill(&pops(&[("A", 700), ("B", 200), ("C", 100)]), 10).unwrap();
        assert_eq!(seats(&a), [("A", 7), ("B", 2), ("C", 1)]);
    }

    #[test]
    fn symmetric_populations_split_evenly() {
        let a = huntington_hill(&pops(&[("A", 100), ("B", 100), ("C", 100)]), 6).unwrap();
        assert_eq!(seats(&a), [("A", 2), ("B", 2), ("C", 2)]);
    }

    #[test]
    fn exact_tie_goes_to_first_code() {
        let a = huntington_hill(&pops(&[("B", 100), ("A", 100)]), 3).unwrap();
        assert_eq!(seats(&a), [("A", 2), ("B", 1)]);
    }

    #[test]
    fn floor_of_one_seat() {
        let a = huntington_hill(&pops(&[("A", 1), ("B", 1)]), 2).unwrap();
        assert_eq!(seats(&a), [("A", 1), ("B", 1)]);
        let a = huntington_hill(&pops(&[("A", 1_000_000), ("B", 1)]), 3).unwrap();
        assert_eq!(seats(&a), [("A", 2), ("B", 1)]);
    }

    #[test]
    fn too_few_seats_and_zero_population() {
        assert!(matches!(
            huntington_hill(&pops(&[("A", 1), ("B", 1), ("C", 1)]), 2),
            Err(Error::TooFewSeats { seats: 2, states: 3 })
        ));
        assert!(matches!(
            huntington_hill(&pops(&[("A", 0), ("B", 1)]), 2),
            Err(Error::NonPositivePopulation { .. })
        ));
    }

    #[test]
    fn district_ids() {
        assert_eq!(district_id("VT", 1, 1), "VT-00");
        assert_eq!(district_id("CA", 7, 53), "CA-07");
    }
}
