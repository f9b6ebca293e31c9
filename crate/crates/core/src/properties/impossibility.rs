//! No binary measure combines monotonicity, the distance property and a
//! constant baseline. This module searches the registry for a measure that
//! would contradict that and records, for each near miss, the witness
//! against the missing property.

use serde::Serialize;

use super::{check_property, AuditSpace, PropertyId, Verdict};
use crate::combinatorics::Budget;
use crate::error::Result;
use crate::measures::Measure;

pub const TRIAD: [PropertyId; 3] = [PropertyId::Mon, PropertyId::Dist, PropertyId::CB];

#[derive(Debug, Clone, Serialize)]
pub struct ImpossibilityEntry {
    pub measure: String,
    /// Verdicts for monotonicity, distance and constant baseline.
    pub verdicts: Vec<Verdict>,
    pub satisfied: usize,
    /// The property that fails for a measure satisfying the other two.
    pub missing: Option<PropertyId>,
}

impl ImpossibilityEntry {
    pub fn verdict(&self, p: PropertyId) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.property == p)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImpossibilityReport {
    pub entries: Vec<ImpossibilityEntry>,
    /// True when no measure satisfies all three on the searched spaces.
    pub corroborated: bool,
}

/// Check the three properties for every measure on the binary default spaces.
pub fn corroborate_impossibility(measures: &[Measure], budget: &Budget) -> Result<ImpossibilityReport> {
    use rayon::prelude::*;
    let entries = measures
        .par_iter()
        .map(|m| {
            let verdicts = TRIAD
                .iter()
                .map(|&p| check_property(m, p, &AuditSpace::default_for(p, 2), budget))
                .collect::<Result<Vec<_>>>()?;
            let satisfied = verdicts.iter().filter(|v| v.holds()).count();
            let missing = if satisfied == 2 {
                verdicts.iter().find(|v| !v.holds()).map(|v| v.property)
            } else {
                None
            };
            Ok(ImpossibilityEntry {
                measure: m.id(),
                verdicts,
                satisfied,
                missing,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let corroborated = entries.iter().all(|e| e.satisfied < 3);
    Ok(ImpossibilityReport { entries, corroborated })
}
