//! Executable property checks.
//!
//! Each check walks a bounded space of confusion matrices (or labelings, for
//! the distance property) in a fixed order and either certifies the property
//! on that space or returns the first counterexample found. Counterexamples
//! carry enough data to be replayed through [`Measure::evaluate`].

mod averaging;
mod baseline;
mod checks;
mod impossibility;
mod order;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::confusion::{ConfusionMatrix, Labeling};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::value::{Value, EPSILON};

pub use averaging::{
    check_averaging_preservation, preservation_candidates, preservation_spaces, PreservationVerdict,
    PUBLISHED_AVERAGING_GRID,
};
pub use baseline::{approximate_baseline_value, exact_baseline_expectation, labeling_baseline_expectation};
pub use checks::check_property;
pub use impossibility::{corroborate_impossibility, ImpossibilityEntry, ImpossibilityReport, TRIAD};
pub use order::{
    baseline_order, check_gm_normalizer_conditions, gm_normalizer, interior_grid, rate_matrix, ConditionOutcome,
    ConditionReport, OrderPoint, OrderReport, RateTriple, STRICT_MARGIN, ZERO_THRESHOLD,
};

/// A column of the property table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PropertyId {
    Max,
    Min,
    CSym,
    Sym,
    Dist,
    Mon,
    SMon,
    CB,
    ACB,
}

impl PropertyId {
    /// Table column order.
    pub const ALL: [PropertyId; 9] = [
        PropertyId::Max,
        PropertyId::Min,
        PropertyId::CSym,
        PropertyId::Sym,
        PropertyId::Dist,
        PropertyId::Mon,
        PropertyId::SMon,
        PropertyId::CB,
        PropertyId::ACB,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyId::Max => "Max",
            PropertyId::Min => "Min",
            PropertyId::CSym => "CSym",
            PropertyId::Sym => "Sym",
            PropertyId::Dist => "Dist",
            PropertyId::Mon => "Mon",
            PropertyId::SMon => "SMon",
            PropertyId::CB => "CB",
            PropertyId::ACB => "ACB",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PropertyId::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown property {s}")))
    }
}

/// Bounded search space for a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditSpace {
    pub m: usize,
    pub n_min: usize,
    pub n_max: usize,
}

impl AuditSpace {
    pub fn new(m: usize, n_max: usize) -> Self {
        AuditSpace { m, n_min: 1, n_max }
    }

    /// Default bounds: binary `n <= 8` (`n <= 6` for the triple-based
    /// distance check), three classes `n <= 6` (`n <= 5` for distance), and
    /// `n <= 4` beyond that.
    pub fn default_for(property: PropertyId, m: usize) -> Self {
        let n_max = match (m, property) {
            (2, PropertyId::Dist) => 6,
            (2, _) => 8,
            (3, PropertyId::Dist) => 5,
            (3, _) => 6,
            _ => 4,
        };
        AuditSpace::new(m, n_max)
    }
}

impl fmt::Display for AuditSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={}, n={}..={}", self.m, self.n_min, self.n_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// No counterexample exists in the searched space.
    SatisfiedOnSpace,
    Violated,
}

/// Which metric axiom a distance witness breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricFailure {
    Symmetry,
    /// `d(A, B) = 0` for `A != B`, or `d(A, A) != 0`, or `d < 0`.
    Identity,
    Triangle,
}

/// A replayable counterexample.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// `reference` attains the extreme value and `matrix` contradicts it.
    Extreme {
        reference: ConfusionMatrix,
        reference_value: Value,
        matrix: ConfusionMatrix,
        value: Value,
    },
    /// The measure changes under transposition or a class permutation.
    Transform {
        matrix: ConfusionMatrix,
        value: Value,
        transformed: ConfusionMatrix,
        transformed_value: Value,
        permutation: Option<Vec<usize>>,
    },
    /// An improving edit that fails to increase the measure.
    Edit {
        before: ConfusionMatrix,
        before_value: Value,
        after: ConfusionMatrix,
        after_value: Value,
    },
    /// `d = c_max - M` breaks a metric axiom.
    Metric {
        failure: MetricFailure,
        c_max: Value,
        a: Labeling,
        b: Labeling,
        c: Option<Labeling>,
        distances: Vec<Value>,
    },
    /// Two class-size configurations with different baseline values.
    Baseline {
        first: (Vec<u64>, Vec<u64>),
        first_value: Value,
        second: (Vec<u64>, Vec<u64>),
        second_value: Value,
    },
}

/// Outcome of one property check.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub measure: String,
    pub property: PropertyId,
    pub status: Status,
    pub witness: Option<Witness>,
    pub space: AuditSpace,
    /// Number of configurations examined.
    pub examined: u64,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::SatisfiedOnSpace
    }

    /// Re-evaluate the witness and confirm it still contradicts the property.
    pub fn replay(&self, measure: &Measure) -> Result<bool> {
        match &self.witness {
            None => Ok(self.holds()),
            Some(w) => replay_witness(w, measure, self.property),
        }
    }
}

pub(crate) fn cmp(a: &Value, b: &Value) -> Ordering {
    a.compare(b, EPSILON)
}

pub(crate) fn replay_witness(w: &Witness, measure: &Measure, property: PropertyId) -> Result<bool> {
    match w {
        Witness::Extreme { reference, matrix, .. } => {
            let r = measure.oriented(reference)?;
            let v = measure.oriented(matrix)?;
            Ok(match property {
                PropertyId::Max => {
                    reference.is_diagonal()
                        && if matrix.is_diagonal() {
                            cmp(&v, &r) != Ordering::Equal
                        } else {
                            cmp(&v, &r) != Ordering::Less
                        }
                }
                PropertyId::Min => {
                    reference.is_zero_diagonal()
                        && if matrix.is_zero_diagonal() {
                            cmp(&v, &r) != Ordering::Equal
                        } else {
                            cmp(&v, &r) != Ordering::Greater
                        }
                }
                _ => false,
            })
        }
        Witness::Transform {
            matrix,
            transformed,
            permutation,
            ..
        } => {
            let expected = match permutation {
                Some(p) => matrix.permute_classes(p)?,
                None => matrix.transpose(),
            };
            if &expected != transformed {
                return Ok(false);
            }
            let v = measure.oriented(matrix)?;
            let t = measure.oriented(transformed)?;
            Ok(cmp(&v, &t) != Ordering::Equal)
        }
        Witness::Edit { before, after, .. } => {
            let b = measure.oriented(before)?;
            let a = measure.oriented(after)?;
            Ok(cmp(&b, &a) != Ordering::Less)
        }
        Witness::Metric { failure, a, b, c, .. } => checks::replay_metric(measure, *failure, a, b, c.as_ref()),
        Witness::Baseline { first, second, .. } => {
            let value = |sizes: &(Vec<u64>, Vec<u64>)| -> Result<Value> {
                if property == PropertyId::CB {
                    exact_baseline_expectation(measure, &sizes.0, &sizes.1, &crate::Budget::default())
                } else {
                    approximate_baseline_value(measure, &sizes.0, &sizes.1)
                }
            };
            Ok(cmp(&value(first)?, &value(second)?) != Ordering::Equal)
        }
    }
}

/// Memoized oriented values keyed by integer counts.
pub(crate) struct ValueCache<'a> {
    measure: &'a Measure,
    m: usize,
    map: HashMap<Vec<u64>, Value>,
}

impl<'a> ValueCache<'a> {
    pub(crate) fn new(measure: &'a Measure, m: usize) -> Self {
        ValueCache {
            measure,
            m,
            map: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, counts: &[u64]) -> Result<Value> {
        if let Some(v) = self.map.get(counts) {
            return Ok(v.clone());
        }
        let c = ConfusionMatrix::from_counts(self.m, counts)?;
        let v = self.measure.oriented(&c)?;
        self.map.insert(counts.to_vec(), v.clone());
        Ok(v)
    }
}

/// Verdicts for every measure and property, computed in parallel.
pub fn audit_grid(
    measures: &[Measure],
    properties: &[PropertyId],
    m: usize,
    n_max: Option<usize>,
    budget: &crate::Budget,
) -> Result<Vec<Verdict>> {
    use rayon::prelude::*;
    let cells: Vec<(usize, PropertyId)> = (0..measures.len())
        .flat_map(|i| properties.iter().map(move |&p| (i, p)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, p)| {
            let mut space = AuditSpace::default_for(p, m);
            if let Some(n) = n_max {
                space.n_max = if p == PropertyId::Dist { n.min(space.n_max) } else { n };
            }
            check_property(&measures[i], p, &space, budget)
        })
        .collect()
}
