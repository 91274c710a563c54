use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{DemographicTable, Variable};
use crate::registry::CategoryRegistry;

/// Maps each year-specific category of a variable onto its trend category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonizationMap {
    pub variable: Variable,
    pub mapping: BTreeMap<&'static str, &'static str>,
}

impl HarmonizationMap {
    /// The standard trend mapping: urban cluster and urbanized area fold into
    /// urban, the two owner-occupied kinds fold into owner, and every other
    /// code maps to itself.
    pub fn trend(variable: Variable) -> Self {
        let mut mapping: BTreeMap<&'static str, &'static str> = CategoryRegistry::trend(variable)
            .codes()
            .map(|c| (c, c))
            .collect();
        match variable {
            Variable::RuralUrban => {
                mapping.insert("urban_cluster", "urban");
                mapping.insert("urbanized_area", "urban");
            }
            Variable::HousingStatus => {
                mapping.insert("owner_mortgage", "owner");
                mapping.insert("owner_clear", "owner");
            }
            _ => {}
        }
        Self { variable, mapping }
    }
}

/// Re-expresses `table` in the map's merged categories. Per-unit totals are
/// preserved exactly and harmonizing twice changes nothing.
pub fn harmonize(table: &DemographicTable, map: &HarmonizationMap) -> Result<DemographicTable> {
    if table.variable != map.variable {
        return Err(Error::HarmonizationMismatch {
            map: map.variable,
            table: table.variable,
        });
    }
    let mut out = DemographicTable {
        counts: BTreeMap::new(),
        ..table.clone()
    };
    for (unit, counts) in &table.counts {
        let merged = out.counts.entry(unit.clone()).or_default();
        for (cat, n) in counts {
            let target = map.mapping.get(cat.as_str()).ok_or_else(|| Error::UnmappedCategory {
                variable: table.variable,
                category: cat.clone(),
            })?;
            *merged.entry((*target).to_string()).or_default() += n;
        }
    }
    Ok(out)
}
