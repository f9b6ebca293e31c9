//! Micro, macro and weighted extensions of binary measures to `m` classes.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::confusion::{BinaryCounts, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::value::{int, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AveragingScheme {
    Micro,
    Macro,
    Weighted,
}

impl AveragingScheme {
    pub const ALL: [AveragingScheme; 3] = [
        AveragingScheme::Micro,
        AveragingScheme::Macro,
        AveragingScheme::Weighted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AveragingScheme::Micro => "micro",
            AveragingScheme::Macro => "macro",
            AveragingScheme::Weighted => "weighted",
        }
    }

    /// Apply `measure` to `c` through this scheme.
    pub fn extend<F>(self, measure: F, c: &ConfusionMatrix) -> Result<Value>
    where
        F: Fn(&BinaryCounts) -> Result<Value>,
    {
        match self {
            AveragingScheme::Micro => micro_extend(measure, c),
            AveragingScheme::Macro => macro_extend(measure, c),
            AveragingScheme::Weighted => weighted_extend(measure, c),
        }
    }
}

impl fmt::Display for AveragingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AveragingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "micro" => Ok(AveragingScheme::Micro),
            "macro" => Ok(AveragingScheme::Macro),
            "weighted" => Ok(AveragingScheme::Weighted),
            other => Err(Error::UnknownMeasure(format!("averaging scheme {other}"))),
        }
    }
}

/// Sum of the `m` one-vs-all binary matrices.
pub fn micro_counts(c: &ConfusionMatrix) -> BinaryCounts {
    let n = c.total();
    let t = c.trace();
    let off = n - &t;
    let tn = int(c.m() as i64 - 2) * n + &t;
    BinaryCounts {
        tp: t,
        fn_: off.clone(),
        fp: off,
        tn,
    }
}

pub fn micro_extend<F>(measure: F, c: &ConfusionMatrix) -> Result<Value>
where
    F: Fn(&BinaryCounts) -> Result<Value>,
{
    if c.total().is_zero() {
        return Err(Error::EmptyMatrix);
    }
    measure(&micro_counts(c))
}

/// Unweighted mean over the one-vs-all problems.
pub fn macro_extend<F>(measure: F, c: &ConfusionMatrix) -> Result<Value>
where
    F: Fn(&BinaryCounts) -> Result<Value>,
{
    if c.total().is_zero() {
        return Err(Error::EmptyMatrix);
    }
    let mut sum = Value::zero();
    for i in 0..c.m() {
        sum = sum.add(&measure(&c.one_vs_all(i)?)?);
    }
    Ok(sum.scale(&BigRational::new(1.into(), (c.m() as i64).into())))
}

/// Mean over the one-vs-all problems weighted by true class size; empty
/// classes carry no weight and are not evaluated.
pub fn weighted_extend<F>(measure: F, c: &ConfusionMatrix) -> Result<Value>
where
    F: Fn(&BinaryCounts) -> Result<Value>,
{
    let n = c.total();
    if n.is_zero() {
        return Err(Error::EmptyMatrix);
    }
    let mut sum = Value::zero();
    for i in 0..c.m() {
        let w = c.row_sum(i);
        if w.is_zero() {
            continue;
        }
        sum = sum.add(&measure(&c.one_vs_all(i)?)?.scale(&(w / n)));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::formulas::{accuracy, balanced_accuracy, f_beta, generalized_means};
    use crate::value::ratio;

    fn acc_b(bc: &BinaryCounts) -> Result<Value> {
        accuracy(&bc.to_matrix())
    }

    fn ba_b(bc: &BinaryCounts) -> Result<Value> {
        balanced_accuracy(&bc.to_matrix())
    }

    fn f1(bc: &BinaryCounts) -> Result<Value> {
        f_beta(bc, &int(1))
    }

    #[test]
    fn micro_counts_binary_mixture() {
        let c = ConfusionMatrix::from_rows(&[[4, 1], [2, 3]]).unwrap();
        let mc = micro_counts(&c);
        assert_eq!(mc, BinaryCounts::from_ints(7, 3, 3, 7).unwrap());
        assert_eq!(micro_extend(acc_b, &c).unwrap(), accuracy(&c).unwrap());
    }

    #[test]
    fn diagonal_reaches_max() {
        let d = ConfusionMatrix::from_rows(&[[2, 0, 0], [0, 1, 0], [0, 0, 3]]).unwrap();
        for s in AveragingScheme::ALL {
            assert_eq!(s.extend(f1, &d).unwrap(), Value::one(), "{s}");
        }
    }

    #[test]
    fn micro_zero_diagonal_has_true_negatives() {
        let z = ConfusionMatrix::from_rows(&[[0, 1, 0], [0, 0, 1], [1, 0, 0]]).unwrap();
        let mc = micro_counts(&z);
        assert_eq!(mc.tn, int(3));
        assert_eq!(micro_extend(acc_b, &z).unwrap(), Value::Rational(ratio(1, 3)));
    }

    #[test]
    fn macro_ba_binary() {
        let c = BinaryCounts::from_ints(3, 2, 1, 4).unwrap().to_matrix();
        // class 0 as positive: TP=4, FN=1, FP=2, TN=3
        let pos = ba_b(&BinaryCounts::from_ints(3, 2, 1, 4).unwrap()).unwrap();
        let neg = ba_b(&BinaryCounts::from_ints(4, 1, 2, 3).unwrap()).unwrap();
        let expect = pos.add(&neg).scale(&ratio(1, 2));
        assert_eq!(macro_extend(ba_b, &c).unwrap(), expect);
        assert_eq!(expect, Value::Rational(ratio(7, 10)));
    }

    #[test]
    fn weighted_equals_macro_for_balanced_classes() {
        let c = ConfusionMatrix::from_rows(&[[1, 1, 0], [0, 2, 0], [1, 0, 1]]).unwrap();
        let gm1 = |bc: &BinaryCounts| generalized_means(bc, &int(1));
        assert_eq!(weighted_extend(gm1, &c).unwrap(), macro_extend(gm1, &c).unwrap());
    }

    #[test]
    fn weighted_accuracy_is_asymmetric() {
        let c = ConfusionMatrix::from_rows(&[[1, 1, 1], [0, 1, 0], [0, 0, 0]]).unwrap();
        let w = weighted_extend(acc_b, &c).unwrap();
        let wt = weighted_extend(acc_b, &c.transpose()).unwrap();
        assert_ne!(w, wt);
    }

    #[test]
    fn macro_f1_hand_mean() {
        let c = ConfusionMatrix::from_rows(&[[2, 1, 0], [0, 1, 1], [1, 0, 2]]).unwrap();
        // per-class F1: 2*2/(2*2+1+1)=2/3, 2*1/(2+1+1)=1/2, 2*2/(4+1+1)=2/3
        let expect = (ratio(2, 3) + ratio(1, 2) + ratio(2, 3)) / int(3);
        assert_eq!(macro_extend(f1, &c).unwrap(), Value::Rational(expect));
    }
}
