//! Which properties survive micro, macro and weighted averaging.

use serde::Serialize;

use super::{check_property, AuditSpace, PropertyId, Verdict};
use crate::averaging::AveragingScheme;
use crate::combinatorics::Budget;
use crate::error::Result;
use crate::measures::Measure;

/// Published preservation marks, columns in [`PropertyId::ALL`] order.
pub const PUBLISHED_AVERAGING_GRID: [(AveragingScheme, [bool; 9]); 3] = [
    (
        AveragingScheme::Micro,
        [true, false, true, true, true, true, false, false, false],
    ),
    (
        AveragingScheme::Macro,
        [true, false, true, true, true, true, false, true, true],
    ),
    (
        AveragingScheme::Weighted,
        [true, false, true, false, false, true, false, true, true],
    ),
];

/// Outcome of one (scheme, property) cell.
#[derive(Debug, Clone, Serialize)]
pub struct PreservationVerdict {
    pub scheme: AveragingScheme,
    pub property: PropertyId,
    pub preserved: bool,
    /// Binary measures that have the property and were averaged.
    pub candidates: Vec<String>,
    /// The first averaged measure that lost the property, with its witness.
    pub counterexample: Option<Verdict>,
    pub spaces: Vec<AuditSpace>,
}

/// Multiclass spaces searched for each cell: three classes, then four.
pub fn preservation_spaces(property: PropertyId) -> Vec<AuditSpace> {
    let three = if property == PropertyId::Dist { 5 } else { 6 };
    vec![AuditSpace::new(3, three), AuditSpace::new(4, 4)]
}

/// Binary measures whose binary verdict for `property` holds. The
/// counting measures come first, as they give the smallest witnesses.
pub fn preservation_candidates(property: PropertyId, budget: &Budget) -> Result<Vec<Measure>> {
    let mut out = Vec::new();
    let pool = Measure::audit_only_measures().into_iter().chain(Measure::registry());
    for m in pool {
        let verdict = check_property(&m, property, &AuditSpace::default_for(property, 2), budget)?;
        if verdict.holds() {
            out.push(m);
        }
    }
    Ok(out)
}

/// Average every candidate with `scheme` and check `property` on the
/// multiclass spaces. The property is preserved when no averaged candidate
/// yields a witness.
pub fn check_averaging_preservation(
    scheme: AveragingScheme,
    property: PropertyId,
    budget: &Budget,
) -> Result<PreservationVerdict> {
    let candidates = preservation_candidates(property, budget)?;
    let spaces = preservation_spaces(property);
    let mut counterexample = None;
    'outer: for space in &spaces {
        for base in &candidates {
            let averaged = Measure::averaged(base.base.clone(), scheme);
            let v = check_property(&averaged, property, space, budget)?;
            if !v.holds() {
                counterexample = Some(v);
                break 'outer;
            }
        }
    }
    Ok(PreservationVerdict {
        scheme,
        property,
        preserved: counterexample.is_none(),
        candidates: candidates.iter().map(Measure::id).collect(),
        counterexample,
        spaces,
    })
}
