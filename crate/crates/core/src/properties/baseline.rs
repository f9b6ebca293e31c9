//! Expected value of a measure against a uniformly random labeling with
//! fixed class sizes.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::combinatorics::{multinomial, Budget};
use crate::confusion::{build_confusion, expected_matrix_from_sizes, ConfusionMatrix, Labeling};
use crate::enumerate::{enumerate_confusion_matrices, enumerate_labelings, LabelingSpace};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::value::Value;

fn validate(a: &[u64], b: &[u64]) -> Result<()> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::ClassCountMismatch(a.len(), b.len()));
    }
    let (na, nb) = (a.iter().sum::<u64>(), b.iter().sum::<u64>());
    if na != nb {
        return Err(Error::MarginMismatch(na.to_string(), nb.to_string()));
    }
    if na == 0 {
        return Err(Error::EmptyMatrix);
    }
    let unary = |s: &[u64]| s.contains(&na);
    if unary(a) && unary(b) {
        return Err(Error::UnaryBaseline);
    }
    Ok(())
}

fn big(v: &num_bigint::BigUint) -> BigInt {
    BigInt::from(v.clone())
}

/// `E[M(A, B)]` over all labelings `B` with class sizes `b`, for a fixed `A`
/// with class sizes `a`. Each confusion matrix with margins `(a, b)` is
/// weighted by the number of labelings that produce it.
pub fn exact_baseline_expectation(measure: &Measure, a: &[u64], b: &[u64], budget: &Budget) -> Result<Value> {
    validate(a, b)?;
    let m = a.len();
    let total = big(&multinomial(b));
    let mut sum = Value::zero();
    for (counts, mult) in enumerate_confusion_matrices(a, b, budget)? {
        let c = ConfusionMatrix::from_counts(m, &counts)?;
        let w = BigRational::new(big(&mult), total.clone());
        sum = sum.add(&measure.evaluate(&c)?.scale(&w));
    }
    Ok(sum)
}

/// The same expectation by brute force over every labeling `B`. Serves as an
/// independent oracle for [`exact_baseline_expectation`].
pub fn labeling_baseline_expectation(measure: &Measure, a: &[u64], b: &[u64], budget: &Budget) -> Result<Value> {
    validate(a, b)?;
    let m = a.len();
    let truth: Vec<usize> = a
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize))
        .collect();
    let truth = Labeling::new(truth, m)?;
    let mut sum = Value::zero();
    let mut count = 0i64;
    for pred in enumerate_labelings(&LabelingSpace::with_sizes(b), budget)? {
        sum = sum.add(&measure.evaluate(&build_confusion(&truth, &pred)?)?);
        count += 1;
    }
    Ok(sum.scale(&BigRational::new(1.into(), count.into())))
}

/// `M` evaluated on the expected matrix `a_i b_j / n`.
pub fn approximate_baseline_value(measure: &Measure, a: &[u64], b: &[u64]) -> Result<Value> {
    validate(a, b)?;
    measure.evaluate(&expected_matrix_from_sizes(a, b)?)
}
