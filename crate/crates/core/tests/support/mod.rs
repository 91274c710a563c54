//! Random federations and an exact-rational brute-force metrics oracle.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use repweight_core::model::{
    Body, Dataset, DemographicTable, GeoUnit, MetricsRow, UnitKind, Variable,
};
use repweight_core::registry;

pub const STATE_POOL: [&str; 6] = ["AA", "ME", "BB", "NE", "CC", "DD"];

#[derive(Debug, Clone)]
pub struct FedState {
    pub code: String,
    /// Per-district category counts, in `Fed::codes` order.
    pub districts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct Fed {
    pub variable: Variable,
    pub codes: Vec<&'static str>,
    pub states: Vec<FedState>,
    pub dc: Option<Vec<u64>>,
    /// Write state rows explicitly instead of leaving them to aggregation.
    pub explicit_state_rows: bool,
}

fn district_id(state: &str, i: usize, n: usize) -> String {
    if n == 1 {
        format!("{state}-00")
    } else {
        format!("{state}-{i:02}")
    }
}

fn sum(v: &[u64]) -> u64 {
    v.iter().sum()
}

fn add(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl FedState {
    pub fn totals(&self) -> Vec<u64> {
        self.districts
            .iter()
            .skip(1)
            .fold(self.districts[0].clone(), |acc, d| add(&acc, d))
    }
}

impl Fed {
    pub fn unit_count(&self) -> usize {
        self.states.iter().map(|s| 1 + s.districts.len()).sum::<usize>() + usize::from(self.dc.is_some())
    }

    pub fn scaled(&self, k: u64) -> Fed {
        let mut f = self.clone();
        for s in &mut f.states {
            for d in &mut s.districts {
                d.iter_mut().for_each(|x| *x *= k);
            }
        }
        if let Some(dc) = &mut f.dc {
            dc.iter_mut().for_each(|x| *x *= k);
        }
        f
    }

    pub fn dataset(&self) -> Dataset {
        let year = 2020;
        let mut table = DemographicTable::new(self.variable, year);
        let mut units = Vec::new();
        let geo = |id: &str, kind, state: &str, pop| GeoUnit {
            unit_id: id.into(),
            unit_kind: kind,
            state_code: state.into(),
            census_year: year,
            total_population: pop,
            total_households: None,
            house_seats: None,
        };
        let put = |t: &mut DemographicTable, id: &str, counts: &[u64]| {
            for (c, n) in self.codes.iter().zip(counts) {
                t.insert(id, c, *n);
            }
        };
        for s in &self.states {
            let n = s.districts.len();
            for (i, d) in s.districts.iter().enumerate() {
                let id = district_id(&s.code, i + 1, n);
                units.push(geo(&id, UnitKind::District, &s.code, sum(d)));
                put(&mut table, &id, d);
            }
            let totals = s.totals();
            units.push(geo(&s.code, UnitKind::State, &s.code, sum(&totals)));
            if self.explicit_state_rows {
                put(&mut table, &s.code, &totals);
            }
        }
        if let Some(dc) = &self.dc {
            units.push(geo("DC", UnitKind::Dc, "DC", sum(dc)));
            put(&mut table, "DC", dc);
        }
        Dataset::new(year, units, vec![table])
    }
}

fn counts(n: usize, referent: usize, max: u64) -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(prop_oneof![1 => Just(0u64), 4 => 0..=max], n).prop_map(move |mut v| {
        if v[referent] == 0 {
            v[referent] = 1;
        }
        v
    })
}

/// Federations of at most 10 units and 5 categories, counts up to `max`.
pub fn federation(max: u64) -> impl Strategy<Value = Fed> {
    let variable = prop_oneof![
        Just(Variable::Sex),
        Just(Variable::AgeCategory),
        Just(Variable::RaceEthnicity),
    ];
    (variable, 1usize..=4, any::<bool>(), any::<bool>())
        .prop_flat_map(move |(variable, n_states, with_dc, explicit)| {
            let all: Vec<&'static str> = registry::CategoryRegistry::for_year(variable, 2020)
                .unwrap()
                .codes()
                .collect();
            let codes: Vec<&'static str> = all.into_iter().take(5).collect();
            let referent = codes
                .iter()
                .position(|c| *c == registry::referent(variable))
                .unwrap();
            let k = codes.len();
            // Unit budget: states + districts + DC <= 10.
            let budget = 10 - usize::from(with_dc) - n_states;
            let max_d = (budget / n_states).clamp(1, 3);
            let states = proptest::collection::vec(
                proptest::collection::vec(counts(k, referent, max), 1..=max_d),
                n_states,
            );
            let dc = if with_dc {
                counts(k, referent, max).prop_map(Some).boxed()
            } else {
                Just(None).boxed()
            };
            (Just(variable), Just(codes), states, dc, Just(explicit))
        })
        .prop_map(|(variable, codes, states, dc, explicit_state_rows)| Fed {
            variable,
            codes,
            states: states
                .into_iter()
                .enumerate()
                .map(|(i, districts)| FedState {
                    code: STATE_POOL[i].to_string(),
                    districts,
                })
                .collect(),
            dc,
            explicit_state_rows,
        })
}

pub fn rat(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone)]
pub struct OracleRow {
    pub category: &'static str,
    pub pi0: BigRational,
    pub pib: BigRational,
    pub aw: Option<BigRational>,
    pub rw: Option<BigRational>,
    pub ep: BigRational,
    pub grand_total: u64,
}

/// (votes, counts) for every voting unit of `body` under the default
/// scenario: ME and NE award electors by district, DC has 3 electors.
pub fn voting_units(fed: &Fed, body: Body) -> Vec<(u64, Vec<u64>)> {
    let mut out = Vec::new();
    for s in &fed.states {
        match body {
            Body::House => out.extend(s.districts.iter().map(|d| (1, d.clone()))),
            Body::Senate => out.push((2, s.totals())),
            Body::Ec => {
                if s.code == "ME" || s.code == "NE" {
                    out.extend(s.districts.iter().map(|d| (1, d.clone())));
                    out.push((2, s.totals()));
                } else {
                    out.push((s.districts.len() as u64 + 2, s.totals()));
                }
            }
        }
    }
    if let (Body::Ec, Some(dc)) = (body, &fed.dc) {
        out.push((3, dc.clone()));
    }
    out
}

/// Term-by-term evaluation over every (unit, category) pair.
pub fn oracle(fed: &Fed, body: Body) -> Vec<OracleRow> {
    let units = voting_units(fed, body);
    let mut baseline: Vec<Vec<u64>> = fed.states.iter().map(|s| s.totals()).collect();
    if let Some(dc) = &fed.dc {
        baseline.push(dc.clone());
    }
    let grand: u64 = baseline.iter().map(|b| sum(b)).sum();
    let total_votes: u64 = units.iter().map(|(v, _)| v).sum();

    let mut rows: Vec<OracleRow> = fed
        .codes
        .iter()
        .enumerate()
        .map(|(k, code)| {
            let mut pib = BigRational::zero();
            for (votes, c) in &units {
                pib += rat(c[k]) / rat(sum(c)) * rat(*votes);
            }
            pib /= rat(total_votes);
            let pi0 = rat(baseline.iter().map(|b| b[k]).sum()) / rat(grand);
            let aw = (!pi0.is_zero()).then(|| &pib / &pi0);
            let ep = rat(grand) * (&pib - &pi0);
            OracleRow {
                category: code,
                pi0,
                pib,
                aw,
                rw: None,
                ep,
                grand_total: grand,
            }
        })
        .collect();
    let referent = registry::referent(fed.variable);
    let ref_aw = rows
        .iter()
        .find(|r| r.category == referent)
        .and_then(|r| r.aw.clone())
        .expect("referent present");
    for r in &mut rows {
        r.rw = r.aw.as_ref().map(|a| a / &ref_aw);
    }
    rows
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite")
}

fn close(actual: f64, expected: &BigRational, scale: f64, tol: f64) -> bool {
    let e = to_f64(expected);
    (actual - e).abs() <= tol * scale.max(e.abs())
}

/// Compares computed rows against the oracle. Proportions and weights use
/// relative error; EP is measured against the grand total, since it is a
/// difference of nearly equal quantities scaled by that total.
pub fn compare(rows: &[MetricsRow], expected: &[OracleRow], tol: f64) -> Result<(), String> {
    if rows.len() != expected.len() {
        return Err(format!("{} rows, oracle has {}", rows.len(), expected.len()));
    }
    let grand = expected.first().map_or(1.0, |r| r.grand_total as f64);
    for e in expected {
        let r = rows
            .iter()
            .find(|r| r.category_code == e.category)
            .ok_or_else(|| format!("missing row {}", e.category))?;
        let fail = |what: &str, got: String| Err(format!("{} {what}: got {got}, oracle {e:?}", e.category));
        if !close(r.pi0, &e.pi0, f64::MIN_POSITIVE, tol) {
            return fail("pi0", r.pi0.to_string());
        }
        if !close(r.pib, &e.pib, f64::MIN_POSITIVE, tol) {
            return fail("pib", r.pib.to_string());
        }
        match (&r.absolute_weight, &e.aw) {
            (Some(a), Some(x)) if close(*a, x, f64::MIN_POSITIVE, tol) => {}
            (None, None) => {}
            _ => return fail("aw", format!("{:?}", r.absolute_weight)),
        }
        match (&r.relative_weight, &e.rw) {
            (Some(a), Some(x)) if close(*a, x, f64::MIN_POSITIVE, tol) => {}
            (None, None) => {}
            _ => return fail("rw", format!("{:?}", r.relative_weight)),
        }
        if !close(r.excess_population, &e.ep, grand, tol) {
            return fail("ep", r.excess_population.to_string());
        }
    }
    Ok(())
}
