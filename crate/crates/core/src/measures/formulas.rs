//! Closed-form measure definitions with their singularity resolutions.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::confusion::{BinaryCounts, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::value::{int, Value};

fn nonempty(c: &ConfusionMatrix) -> Result<()> {
    if c.total().is_zero() {
        Err(Error::EmptyMatrix)
    } else {
        Ok(())
    }
}

fn dot(x: &[BigRational], y: &[BigRational]) -> BigRational {
    x.iter().zip(y).fold(BigRational::zero(), |acc, (p, q)| acc + p * q)
}

/// Fraction of elements on the diagonal.
pub fn accuracy(c: &ConfusionMatrix) -> Result<Value> {
    nonempty(c)?;
    Ok(Value::Rational(c.trace() / c.total()))
}

/// Mean per-class recall; an empty true class contributes `b_i / n`.
pub fn balanced_accuracy(c: &ConfusionMatrix) -> Result<Value> {
    nonempty(c)?;
    let n = c.total();
    let m = c.m();
    let sum = (0..m).fold(BigRational::zero(), |acc, i| {
        let a = c.row_sum(i);
        if a.is_zero() {
            acc + c.col_sum(i) / n
        } else {
            acc + c.get(i, i) / a
        }
    });
    Ok(Value::Rational(sum / int(m as i64)))
}

/// Balanced accuracy averaged with its transpose.
pub fn symmetric_balanced_accuracy(c: &ConfusionMatrix) -> Result<Value> {
    nonempty(c)?;
    let n = c.total();
    let m = c.m();
    let ratio = |cii: &BigRational, denom: &BigRational, other: &BigRational| {
        if denom.is_zero() {
            other / n
        } else {
            cii / denom
        }
    };
    let sum = (0..m).fold(BigRational::zero(), |acc, i| {
        let (a, b, cii) = (c.row_sum(i), c.col_sum(i), c.get(i, i));
        acc + ratio(cii, a, b) + ratio(cii, b, a)
    });
    Ok(Value::Rational(sum / int(2 * m as i64)))
}

/// Cohen's kappa. The denominator vanishes only when both labelings put
/// everything in the same class, which is maximal agreement.
pub fn cohens_kappa(c: &ConfusionMatrix) -> Result<Value> {
    nonempty(c)?;
    let n = c.total();
    let ab = dot(c.row_sums(), c.col_sums());
    let den = n * n - &ab;
    if den.is_zero() {
        return Ok(Value::one());
    }
    let num = n * c.trace() - ab;
    Ok(Value::Rational(num / den))
}

/// Which class a constant labeling uses, given its size vector.
fn constant_class(sizes: &[BigRational], n: &BigRational) -> Option<usize> {
    sizes.iter().position(|s| s == n)
}

/// Matthews correlation coefficient, kept exact as `num / sqrt(den)`.
pub fn matthews_cc(c: &ConfusionMatrix) -> Result<Value> {
    nonempty(c)?;
    let n = c.total();
    let n2 = n * n;
    let (a, b) = (c.row_sums(), c.col_sums());
    let va = &n2 - dot(a, a);
    let vb = &n2 - dot(b, b);
    if va.is_zero() || vb.is_zero() {
        return Ok(match (constant_class(a, n), constant_class(b, n)) {
            (Some(i), Some(j)) if i == j => Value::one(),
            (Some(_), Some(_)) => Value::from_int(-1),
            _ => Value::zero(),
        });
    }
    let num = n * c.trace() - dot(a, b);
    Ok(Value::over_sqrt(num, va * vb))
}

/// Confusion entropy with log base `2m - 2`; a dissimilarity.
pub fn confusion_entropy(c: &ConfusionMatrix) -> Result<Value> {
    nonempty(c)?;
    let m = c.m();
    let f = c.to_f64_rows();
    let n: f64 = c.total().to_f64().unwrap_or(f64::NAN);
    let a: Vec<f64> = f.iter().map(|r| r.iter().sum()).collect();
    let b: Vec<f64> = (0..m).map(|j| f.iter().map(|r| r[j]).sum()).collect();
    let log_base = ((2 * m - 2) as f64).ln();
    let xlogx = |x: f64, s: f64| if x > 0.0 { x * (x / s).ln() } else { 0.0 };
    let mut total = 0.0;
    for j in 0..m {
        let s = a[j] + b[j];
        if s == 0.0 {
            continue;
        }
        for i in 0..m {
            if i != j {
                total += xlogx(f[j][i], s) + xlogx(f[i][j], s);
            }
        }
    }
    let ce = -total / (2.0 * n * log_base);
    Ok(Value::Float(if ce == 0.0 { 0.0 } else { ce }))
}

/// F-measure with weight `beta > 0`; an all-negative agreement scores 1.
pub fn f_beta(bc: &BinaryCounts, beta: &BigRational) -> Result<Value> {
    if !beta.is_positive() {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let b2 = beta * beta;
    let weighted_tp = (BigRational::one() + &b2) * &bc.tp;
    let den = &weighted_tp + b2 * &bc.fn_ + &bc.fp;
    if den.is_zero() {
        return Ok(Value::one());
    }
    Ok(Value::Rational(weighted_tp / den))
}

/// Jaccard index of the positive class.
pub fn jaccard(bc: &BinaryCounts) -> Result<Value> {
    let den = &bc.tp + &bc.fn_ + &bc.fp;
    if den.is_zero() {
        return Ok(Value::one());
    }
    Ok(Value::Rational(&bc.tp / den))
}

/// Generalized means measure `GM_r`.
///
/// Exact for `r` in `{-2, -1, 1, 2}`; any other nonzero `r` is evaluated in
/// floating point with a form that stays accurate as `r` approaches 0.
pub fn generalized_means(bc: &BinaryCounts, r: &BigRational) -> Result<Value> {
    if r.is_zero() {
        return Err(Error::InvalidParameter(
            "r = 0 is the Matthews coefficient; use cc".into(),
        ));
    }
    let n = bc.total();
    let (a1, a0, b1, b0) = (bc.a1(), bc.a0(), bc.b1(), bc.b0());
    let x = &a1 * &a0;
    let y = &b1 * &b0;
    if x.is_zero() || y.is_zero() {
        if x.is_zero() && y.is_zero() {
            let same = (a1.is_zero() && b1.is_zero()) || (a0.is_zero() && b0.is_zero());
            return Ok(if same { Value::one() } else { Value::from_int(-1) });
        }
        return Ok(Value::zero());
    }
    let num = &n * &bc.tp - &a1 * &b1;
    let two = int(2);
    if *r == int(1) {
        return Ok(Value::Rational(num * &two / (x + y)));
    }
    if *r == int(-1) {
        return Ok(Value::Rational(num * (&x + &y) / (two * x * y)));
    }
    if *r == int(2) {
        return Ok(Value::over_sqrt(num, (&x * &x + &y * &y) / two));
    }
    if *r == int(-2) {
        let (x2, y2) = (&x * &x, &y * &y);
        return Ok(Value::over_sqrt(num, two * &x2 * &y2 / (x2 + y2)));
    }
    let rf = r.to_f64().unwrap_or(f64::NAN);
    let lx = x.to_f64().unwrap_or(f64::NAN).ln();
    let ly = y.to_f64().unwrap_or(f64::NAN).ln();
    let log_mean = 0.5 * (lx + ly) + ln_cosh(0.5 * rf * (lx - ly)) / rf;
    let numf = num.to_f64().unwrap_or(f64::NAN);
    Ok(Value::Float(numf / log_mean.exp()))
}

/// `ln(cosh z)` without cancellation near zero.
pub(crate) fn ln_cosh(z: f64) -> f64 {
    let z = z.abs();
    if z < 1e-4 {
        let z2 = z * z;
        z2 / 2.0 - z2 * z2 / 12.0
    } else {
        z + (-2.0 * z).exp().ln_1p() - std::f64::consts::LN_2
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// `arccos(CC) / pi`; a dissimilarity in `[0, 1]`.
pub fn correlation_distance(c: &ConfusionMatrix) -> Result<Value> {
    let cc = matthews_cc(c)?;
    Ok(Value::Float(clamp_unit(cc.to_f64()).acos() / std::f64::consts::PI))
}

/// `sqrt(2 (1 - CC))`; a dissimilarity in `[0, 2]`.
pub fn cd_prime(c: &ConfusionMatrix) -> Result<Value> {
    let cc = matthews_cc(c)?;
    Ok(Value::Float((2.0 * (1.0 - clamp_unit(cc.to_f64()))).max(0.0).sqrt()))
}

/// `TP + TN - FP - FN`.
pub fn signed_agreement(bc: &BinaryCounts) -> Value {
    Value::Rational(&bc.tp + &bc.tn - &bc.fp - &bc.fn_)
}

/// 1 when some element is classified correctly, 0 otherwise.
pub fn agreement_indicator(bc: &BinaryCounts) -> Value {
    if (&bc.tp + &bc.tn).is_positive() {
        Value::one()
    } else {
        Value::zero()
    }
}

/// `TP - (TP + FP)(TP + FN) / n`.
pub fn centered_true_positives(bc: &BinaryCounts) -> Result<Value> {
    let n = bc.total();
    if n.is_zero() {
        return Err(Error::EmptyMatrix);
    }
    Ok(Value::Rational(&bc.tp - bc.b1() * bc.a1() / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{ratio, ValueKind};

    fn bc(tp: i64, fn_: i64, fp: i64, tn: i64) -> BinaryCounts {
        BinaryCounts::from_ints(tp, fn_, fp, tn).unwrap()
    }

    fn mat<R: AsRef<[i64]>>(rows: &[R]) -> ConfusionMatrix {
        ConfusionMatrix::from_rows(rows).unwrap()
    }

    fn rat(v: Value) -> BigRational {
        v.as_rational().cloned().expect("exact rational")
    }

    #[test]
    fn reference_counts() {
        let c = bc(3, 2, 1, 4);
        let cm = c.to_matrix();
        assert_eq!(rat(accuracy(&cm).unwrap()), ratio(7, 10));
        assert_eq!(rat(balanced_accuracy(&cm).unwrap()), ratio(7, 10));
        assert_eq!(rat(symmetric_balanced_accuracy(&cm).unwrap()), ratio(169, 240));
        assert_eq!(rat(cohens_kappa(&cm).unwrap()), ratio(2, 5));
        assert_eq!(rat(f_beta(&c, &int(1)).unwrap()), ratio(2, 3));
        assert_eq!(rat(jaccard(&c).unwrap()), ratio(1, 2));
        assert_eq!(rat(generalized_means(&c, &int(1)).unwrap()), ratio(20, 49));
        let cc = matthews_cc(&cm).unwrap();
        assert_eq!(cc.kind(), ValueKind::Surd);
        assert_eq!(cc, Value::over_sqrt(int(10), int(600)));
        assert!((cc.to_f64() - 0.408_248).abs() < 1e-6);
    }

    #[test]
    fn accuracy_extremes() {
        assert_eq!(
            accuracy(&mat(&[[2, 0, 0], [0, 1, 0], [0, 0, 4]])).unwrap(),
            Value::one()
        );
        assert_eq!(accuracy(&mat(&[[0, 3], [2, 0]])).unwrap(), Value::zero());
        let empty = ConfusionMatrix::from_rows(&[[0, 0], [0, 0]]).unwrap();
        assert_eq!(accuracy(&empty), Err(Error::EmptyMatrix));
    }

    #[test]
    fn balanced_accuracy_singularity() {
        // all elements truly class 0 and predicted class 0
        assert_eq!(rat(balanced_accuracy(&mat(&[[4, 0], [0, 0]])).unwrap()), ratio(1, 2));
        // an empty true class picks up b_i / n, so a constant truth scores 1/m
        assert_eq!(rat(balanced_accuracy(&mat(&[[2, 2], [0, 0]])).unwrap()), ratio(1, 2));
        let three = mat(&[[2, 1, 1], [0, 0, 0], [0, 0, 0]]);
        assert_eq!(rat(balanced_accuracy(&three).unwrap()), ratio(1, 3));
    }

    #[test]
    fn kappa_fixtures() {
        let k1 = rat(cohens_kappa(&mat(&[[1, 2], [1, 0]])).unwrap());
        let k2 = rat(cohens_kappa(&mat(&[[1, 3], [1, 0]])).unwrap());
        assert_eq!(k1, ratio(-1, 2));
        assert_eq!(k2, ratio(-3, 7));
        assert!(k1 < k2);
        // zero-diagonal value -(Σ a_i b_i)/(n^2 - Σ a_i b_i)
        let z = mat(&[[0, 1, 2], [1, 0, 0], [2, 1, 0]]);
        let ab = int(3 * 3 + 2 + 3 * 2);
        let n2 = int(49);
        assert_eq!(rat(cohens_kappa(&z).unwrap()), -ab.clone() / (n2 - ab));
        assert_eq!(cohens_kappa(&mat(&[[5, 0], [0, 0]])).unwrap(), Value::one());
    }

    #[test]
    fn matthews_fixtures() {
        let c1 = matthews_cc(&mat(&[[0, 1, 0], [0, 0, 1], [2, 0, 0]])).unwrap();
        let c2 = matthews_cc(&mat(&[[0, 1, 0], [1, 0, 1], [0, 1, 0]])).unwrap();
        assert_eq!(rat(c1), ratio(-1, 2));
        assert_eq!(rat(c2), ratio(-3, 5));
        let worse = matthews_cc(&mat(&[[1, 0, 0], [6, 1, 0], [0, 0, 1]])).unwrap();
        let better = matthews_cc(&mat(&[[1, 0, 0], [7, 0, 0], [0, 0, 1]])).unwrap();
        assert_eq!(better.compare(&worse, 0.0), std::cmp::Ordering::Greater);
    }

    #[test]
    fn matthews_singularities() {
        assert_eq!(matthews_cc(&mat(&[[3, 0], [0, 0]])).unwrap(), Value::one());
        assert_eq!(matthews_cc(&mat(&[[0, 3], [0, 0]])).unwrap(), Value::from_int(-1));
        assert_eq!(matthews_cc(&mat(&[[1, 2], [0, 0]])).unwrap(), Value::zero());
        assert_eq!(matthews_cc(&mat(&[[1, 0], [2, 0]])).unwrap(), Value::zero());
    }

    #[test]
    fn entropy_fixtures() {
        let one = confusion_entropy(&mat(&[[0, 6], [6, 0]])).unwrap().to_f64();
        assert!((one - 1.0).abs() < 1e-12);
        let more = confusion_entropy(&mat(&[[1, 5], [5, 1]])).unwrap().to_f64();
        assert!(more > 1.0);
        assert_eq!(confusion_entropy(&mat(&[[3, 0], [0, 2]])).unwrap().to_f64(), 0.0);
        let ab = confusion_entropy(&mat(&[[0, 1], [0, 2]])).unwrap().to_f64();
        assert!((ab - 0.387).abs() < 1e-3);
    }

    #[test]
    fn f_and_jaccard() {
        assert_eq!(f_beta(&bc(4, 0, 0, 3), &int(1)).unwrap(), Value::one());
        assert_eq!(f_beta(&bc(0, 0, 0, 3), &int(1)).unwrap(), Value::one());
        assert_eq!(f_beta(&bc(0, 1, 2, 3), &int(1)).unwrap(), Value::zero());
        assert!(f_beta(&bc(1, 1, 1, 1), &int(0)).is_err());
        assert_eq!(jaccard(&bc(2, 0, 0, 1)).unwrap(), Value::one());
        // beta = 2 weights recall higher
        assert_eq!(rat(f_beta(&bc(3, 2, 1, 4), &int(2)).unwrap()), ratio(15, 24));
    }

    #[test]
    fn gm_variants() {
        let c = bc(3, 2, 1, 4);
        assert!(generalized_means(&c, &int(0)).is_err());
        let hm = rat(generalized_means(&c, &int(-1)).unwrap());
        let sba = rat(symmetric_balanced_accuracy(&c.to_matrix()).unwrap());
        assert_eq!(hm, sba * int(2) - int(1));
        // x = 5*5 = 25, y = 4*6 = 24
        let q = generalized_means(&c, &int(2)).unwrap();
        assert!((q.to_f64() - 10.0 / ((625.0f64 + 576.0) / 2.0).sqrt()).abs() < 1e-14);
        let q2 = generalized_means(&c, &int(-2)).unwrap();
        let expect = 10.0 / (1.0f64 / ((1.0 / 625.0 + 1.0 / 576.0) / 2.0)).sqrt();
        assert!((q2.to_f64() - expect).abs() < 1e-14);
        let near_zero = generalized_means(&c, &ratio(1, 1_000_000_000)).unwrap();
        let cc = matthews_cc(&c.to_matrix()).unwrap();
        assert!((near_zero.to_f64() - cc.to_f64()).abs() < 1e-9);
        let half = generalized_means(&c, &ratio(1, 2)).unwrap();
        let expect = 10.0 / ((25f64.sqrt() + 24f64.sqrt()) / 2.0).powi(2);
        assert!((half.to_f64() - expect).abs() < 1e-14);
        assert_eq!(generalized_means(&bc(2, 0, 0, 0), &int(1)).unwrap(), Value::one());
        assert_eq!(
            generalized_means(&bc(0, 2, 0, 0), &int(1)).unwrap(),
            Value::from_int(-1)
        );
        assert_eq!(generalized_means(&bc(1, 1, 0, 0), &int(1)).unwrap(), Value::zero());
    }

    #[test]
    fn correlation_distances() {
        let perfect = mat(&[[2, 0], [0, 3]]);
        assert_eq!(correlation_distance(&perfect).unwrap().to_f64(), 0.0);
        assert_eq!(cd_prime(&perfect).unwrap().to_f64(), 0.0);
        let worst = mat(&[[0, 2], [3, 0]]);
        assert!((correlation_distance(&worst).unwrap().to_f64() - 1.0).abs() < 1e-15);
        assert!((cd_prime(&worst).unwrap().to_f64() - 2.0).abs() < 1e-15);
        let e = crate::confusion::expected_matrix_from_sizes(&[2, 3], &[4, 1]).unwrap();
        assert_eq!(correlation_distance(&e).unwrap().to_f64(), 0.5);
        assert!((cd_prime(&e).unwrap().to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn audit_only_measures() {
        let c = bc(3, 2, 1, 4);
        assert_eq!(signed_agreement(&c), Value::from_int(4));
        assert_eq!(agreement_indicator(&c), Value::one());
        assert_eq!(agreement_indicator(&bc(0, 2, 1, 0)), Value::zero());
        assert_eq!(rat(centered_true_positives(&c).unwrap()), ratio(1, 1));
    }
}
