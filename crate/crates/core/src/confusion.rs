//! Labelings, confusion matrices and binary counts.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::value::int;

/// An assignment of `n` elements to `m` classes, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Labeling {
    labels: Vec<usize>,
    classes: usize,
}

impl Labeling {
    pub fn new(labels: Vec<usize>, classes: usize) -> Result<Self> {
        if labels.is_empty() || classes < 2 {
            return Err(Error::DegenerateLabeling);
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        Ok(Labeling { labels, classes })
    }

    /// Binary labeling from 0/1 values.
    pub fn binary(labels: &[usize]) -> Result<Self> {
        Labeling::new(labels.to_vec(), 2)
    }

    pub(crate) fn new_unchecked(labels: Vec<usize>, classes: usize) -> Self {
        Labeling { labels, classes }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; self.classes];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// All elements in one class.
    pub fn is_constant(&self) -> bool {
        self.labels.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, l) in self.labels.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Square confusion matrix with exact nonnegative rational entries.
///
/// Rows index the true class, columns the predicted class. Row sums `a_i` are
/// the true class sizes, column sums `b_j` the predicted class sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfusionMatrix {
    m: usize,
    entries: Vec<BigRational>,
    rows: Vec<BigRational>,
    cols: Vec<BigRational>,
    total: BigRational,
}

impl ConfusionMatrix {
    /// Build from row-major entries.
    pub fn new(m: usize, entries: Vec<BigRational>) -> Result<Self> {
        if m < 2 || entries.len() != m * m {
            return Err(Error::BadShape(entries.len()));
        }
        if entries.iter().any(|e| e.is_negative()) {
            return Err(Error::NegativeEntry);
        }
        let mut rows = vec![BigRational::zero(); m];
        let mut cols = vec![BigRational::zero(); m];
        for i in 0..m {
            for j in 0..m {
                let e = &entries[i * m + j];
                rows[i] += e;
                cols[j] += e;
            }
        }
        let total = rows.iter().fold(BigRational::zero(), |acc, r| acc + r);
        Ok(ConfusionMatrix {
            m,
            entries,
            rows,
            cols,
            total,
        })
    }

    /// Build from nested rows of integer counts.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let mut entries = Vec::with_capacity(m * m);
        for row in rows {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::BadShape(row.len() * m));
            }
            entries.extend(row.iter().map(|&v| int(v)));
        }
        ConfusionMatrix::new(m, entries)
    }

    /// Build from row-major nonnegative integer counts.
    pub fn from_counts(m: usize, counts: &[u64]) -> Result<Self> {
        let entries = counts
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        ConfusionMatrix::new(m, entries)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    /// True class size `a_i`.
    pub fn row_sum(&self, i: usize) -> &BigRational {
        &self.rows[i]
    }

    /// Predicted class size `b_j`.
    pub fn col_sum(&self, j: usize) -> &BigRational {
        &self.cols[j]
    }

    pub fn row_sums(&self) -> &[BigRational] {
        &self.rows
    }

    pub fn col_sums(&self) -> &[BigRational] {
        &self.cols
    }

    pub fn total(&self) -> &BigRational {
        &self.total
    }

    pub fn trace(&self) -> BigRational {
        (0..self.m).fold(BigRational::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_zero_diagonal(&self) -> bool {
        (0..self.m).all(|i| self.get(i, i).is_zero())
    }

    /// Some true class contains every element.
    pub fn true_is_constant(&self) -> bool {
        self.rows.contains(&self.total)
    }

    /// Some predicted class contains every element.
    pub fn pred_is_constant(&self) -> bool {
        self.cols.contains(&self.total)
    }

    /// Every class occurs in the true or the predicted labeling.
    pub fn has_class_support(&self) -> bool {
        (0..self.m).all(|i| !(self.rows[i].is_zero() && self.cols[i].is_zero()))
    }

    pub fn transpose(&self) -> ConfusionMatrix {
        let m = self.m;
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                entries.push(self.get(j, i).clone());
            }
        }
        ConfusionMatrix {
            m,
            entries,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            total: self.total.clone(),
        }
    }

    /// Relabel classes: the result has entry `(i, j)` equal to `c[perm[i]][perm[j]]`.
    pub fn permute_classes(&self, perm: &[usize]) -> Result<ConfusionMatrix> {
        let m = self.m;
        if perm.len() != m {
            return Err(Error::InvalidPermutation(m));
        }
        let mut seen = vec![false; m];
        for &p in perm {
            if p >= m || seen[p] {
                return Err(Error::InvalidPermutation(m));
            }
            seen[p] = true;
        }
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                entries.push(self.get(perm[i], perm[j]).clone());
            }
        }
        ConfusionMatrix::new(m, entries)
    }

    /// Binary sub-problem with class `i` as positive.
    pub fn one_vs_all(&self, i: usize) -> Result<BinaryCounts> {
        if i >= self.m {
            return Err(Error::ClassOutOfRange {
                index: i,
                classes: self.m,
            });
        }
        let tp = self.get(i, i).clone();
        let fn_ = &self.rows[i] - &tp;
        let fp = &self.cols[i] - &tp;
        let tn = &self.total - &self.rows[i] - &self.cols[i] + &tp;
        Ok(BinaryCounts { tp, fn_, fp, tn })
    }

    /// Multiply every entry by `alpha`.
    pub fn scale(&self, alpha: &BigRational) -> Result<ConfusionMatrix> {
        if !alpha.is_positive() {
            return Err(Error::InvalidParameter("scale factor must be positive".into()));
        }
        ConfusionMatrix::new(self.m, self.entries.iter().map(|e| e * alpha).collect())
    }

    /// Binary view: index 1 is the positive class.
    pub fn binary(&self) -> Option<BinaryCounts> {
        (self.m == 2).then(|| BinaryCounts {
            tp: self.get(1, 1).clone(),
            fn_: self.get(1, 0).clone(),
            fp: self.get(0, 1).clone(),
            tn: self.get(0, 0).clone(),
        })
    }

    /// Integer counts when every entry is integral.
    pub fn counts(&self) -> Option<Vec<u64>> {
        self.entries
            .iter()
            .map(|e| if e.is_integer() { e.to_integer().to_u64() } else { None })
            .collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| self.get(i, j).to_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.m {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.m {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl Serialize for ConfusionMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.m)
            .map(|i| (0..self.m).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        rows.serialize(serializer)
    }
}

/// Binary confusion counts; class 1 is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryCounts {
    /// `c11`
    pub tp: BigRational,
    /// `c10`
    pub fn_: BigRational,
    /// `c01`
    pub fp: BigRational,
    /// `c00`
    pub tn: BigRational,
}

impl BinaryCounts {
    pub fn new(tp: BigRational, fn_: BigRational, fp: BigRational, tn: BigRational) -> Result<Self> {
        if [&tp, &fn_, &fp, &tn].iter().any(|v| v.is_negative()) {
            return Err(Error::NegativeEntry);
        }
        let bc = BinaryCounts { tp, fn_, fp, tn };
        if bc.total().is_zero() {
            return Err(Error::EmptyMatrix);
        }
        Ok(bc)
    }

    /// Counts given in the order (TP, FN, FP, TN).
    pub fn from_ints(tp: i64, fn_: i64, fp: i64, tn: i64) -> Result<Self> {
        BinaryCounts::new(int(tp), int(fn_), int(fp), int(tn))
    }

    pub fn total(&self) -> BigRational {
        &self.tp + &self.fn_ + &self.fp + &self.tn
    }

    /// True positives plus false negatives.
    pub fn a1(&self) -> BigRational {
        &self.tp + &self.fn_
    }

    pub fn a0(&self) -> BigRational {
        &self.fp + &self.tn
    }

    pub fn b1(&self) -> BigRational {
        &self.tp + &self.fp
    }

    pub fn b0(&self) -> BigRational {
        &self.fn_ + &self.tn
    }

    /// Exchange the roles of the positive and negative class.
    pub fn swap_classes(&self) -> BinaryCounts {
        BinaryCounts {
            tp: self.tn.clone(),
            fn_: self.fp.clone(),
            fp: self.fn_.clone(),
            tn: self.tp.clone(),
        }
    }

    pub fn to_matrix(&self) -> ConfusionMatrix {
        ConfusionMatrix::new(
            2,
            vec![self.tn.clone(), self.fp.clone(), self.fn_.clone(), self.tp.clone()],
        )
        .expect("binary counts are nonnegative")
    }
}

/// Count agreements between a true and a predicted labeling.
pub fn build_confusion(truth: &Labeling, pred: &Labeling) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch(truth.len(), pred.len()));
    }
    if truth.classes() != pred.classes() {
        return Err(Error::ClassCountMismatch(truth.classes(), pred.classes()));
    }
    let m = truth.classes();
    let counts = confusion_counts(truth.labels(), pred.labels(), m);
    ConfusionMatrix::from_counts(m, &counts)
}

/// Row-major integer confusion counts of two aligned label slices.
pub fn confusion_counts(truth: &[usize], pred: &[usize], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; m * m];
    for (&t, &p) in truth.iter().zip(pred) {
        counts[t * m + p] += 1;
    }
    counts
}

/// Matrix of expected counts `a_i b_j / n` under independent labelings.
pub fn expected_matrix(a: &[BigRational], b: &[BigRational]) -> Result<ConfusionMatrix> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::BadShape(a.len() * b.len()));
    }
    let n: BigRational = a.iter().fold(BigRational::zero(), |acc, x| acc + x);
    let nb: BigRational = b.iter().fold(BigRational::zero(), |acc, x| acc + x);
    if n != nb {
        return Err(Error::MarginMismatch(n.to_string(), nb.to_string()));
    }
    if !n.is_positive() {
        return Err(Error::EmptyMatrix);
    }
    let m = a.len();
    let mut entries = Vec::with_capacity(m * m);
    for ai in a {
        for bj in b {
            entries.push(ai * bj / &n);
        }
    }
    ConfusionMatrix::new(m, entries)
}

/// Integer convenience wrapper around [`expected_matrix`].
pub fn expected_matrix_from_sizes(a: &[u64], b: &[u64]) -> Result<ConfusionMatrix> {
    let conv =
        |v: &[u64]| -> Vec<BigRational> { v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect() };
    expected_matrix(&conv(a), &conv(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ratio;

    fn lab(v: &[usize], m: usize) -> Labeling {
        Labeling::new(v.to_vec(), m).unwrap()
    }

    #[test]
    fn build_counts_rows_as_true_class() {
        let c = build_confusion(&lab(&[1, 1, 0], 2), &lab(&[1, 1, 1], 2)).unwrap();
        assert_eq!(c, ConfusionMatrix::from_rows(&[[0, 1], [0, 2]]).unwrap());
        let id = build_confusion(&lab(&[0, 1, 2], 3), &lab(&[0, 1, 2], 3)).unwrap();
        assert_eq!(
            id,
            ConfusionMatrix::from_rows(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap()
        );
    }

    #[test]
    fn build_rejects_mismatch() {
        assert_eq!(
            build_confusion(&lab(&[0, 1], 2), &lab(&[0, 1, 1], 2)),
            Err(Error::LengthMismatch(2, 3))
        );
        assert_eq!(
            build_confusion(&lab(&[0, 1], 2), &lab(&[0, 1], 3)),
            Err(Error::ClassCountMismatch(2, 3))
        );
        assert!(Labeling::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn table9_triplet3_first_pair() {
        let a = lab(&[0, 0, 0, 0, 1, 1, 1, 0, 1, 0], 2);
        let b = lab(&[1, 1, 1, 1, 1, 1, 1, 1, 0, 1], 2);
        let bc = build_confusion(&a, &b).unwrap().binary().unwrap();
        assert_eq!(bc, BinaryCounts::from_ints(3, 1, 6, 0).unwrap());
    }

    #[test]
    fn transpose_swaps_margins() {
        let c = ConfusionMatrix::from_rows(&[[3, 2], [1, 4]]).unwrap();
        let t = c.transpose();
        assert_eq!(t, ConfusionMatrix::from_rows(&[[3, 1], [2, 4]]).unwrap());
        assert_eq!(t.row_sums(), c.col_sums());
        let p = ConfusionMatrix::from_rows(&[[0, 1, 0], [0, 0, 1], [2, 0, 0]]).unwrap();
        assert_eq!(p.transpose().transpose(), p);
        let d = ConfusionMatrix::from_rows(&[[2, 0], [0, 5]]).unwrap();
        assert_eq!(d.transpose(), d);
    }

    #[test]
    fn permutations() {
        let c = ConfusionMatrix::from_rows(&[[1, 2, 3], [4, 5, 6], [7, 8, 9]]).unwrap();
        assert_eq!(c.permute_classes(&[0, 1, 2]).unwrap(), c);
        // 3-cycle: entry (i,j) = c[perm i][perm j]
        let cyc = [1, 2, 0];
        let p = c.permute_classes(&cyc).unwrap();
        assert_eq!(
            p,
            ConfusionMatrix::from_rows(&[[5, 6, 4], [8, 9, 7], [2, 3, 1]]).unwrap()
        );
        // applying twice equals permuting by the composed cycle
        let twice = p.permute_classes(&cyc).unwrap();
        let squared: Vec<usize> = (0..3).map(|i| cyc[cyc[i]]).collect();
        assert_eq!(twice, c.permute_classes(&squared).unwrap());
        assert!(c.permute_classes(&[0, 0, 1]).is_err());
        assert!(c.permute_classes(&[0, 1]).is_err());

        let bc = BinaryCounts::from_ints(3, 2, 1, 4).unwrap();
        let swapped = bc.to_matrix().permute_classes(&[1, 0]).unwrap().binary().unwrap();
        assert_eq!(swapped, BinaryCounts::from_ints(4, 1, 2, 3).unwrap());
        assert_eq!(swapped, bc.swap_classes());
    }

    #[test]
    fn one_vs_all_counts() {
        let c = ConfusionMatrix::from_rows(&[[0, 1, 0], [0, 0, 1], [2, 0, 0]]).unwrap();
        assert_eq!(c.one_vs_all(0).unwrap(), BinaryCounts::from_ints(0, 1, 2, 1).unwrap());
        let d = ConfusionMatrix::from_rows(&[[2, 0, 0], [0, 1, 0], [0, 0, 3]]).unwrap();
        for i in 0..3 {
            let bc = d.one_vs_all(i).unwrap();
            assert!(bc.fn_.is_zero() && bc.fp.is_zero());
        }
        assert!(c.one_vs_all(3).is_err());
    }

    #[test]
    fn expected_matrices() {
        let e = expected_matrix_from_sizes(&[5, 5], &[4, 6]).unwrap();
        assert_eq!(e, ConfusionMatrix::from_rows(&[[2, 3], [2, 3]]).unwrap());
        let u = expected_matrix_from_sizes(&[7, 0], &[7, 0]).unwrap();
        assert_eq!(u, ConfusionMatrix::from_rows(&[[7, 0], [0, 0]]).unwrap());
        let f = expected_matrix_from_sizes(&[2, 1], &[1, 2]).unwrap();
        assert_eq!(f.get(0, 0), &ratio(2, 3));
        assert_eq!(f.get(0, 1), &ratio(4, 3));
        assert_eq!(f.get(1, 0), &ratio(1, 3));
        assert_eq!(f.get(1, 1), &ratio(2, 3));
        assert_eq!(f.row_sums(), &[int(2), int(1)]);
        assert_eq!(f.col_sums(), &[int(1), int(2)]);
        assert!(expected_matrix_from_sizes(&[2, 1], &[1, 1]).is_err());
    }

    #[test]
    fn negative_entries_rejected() {
        assert_eq!(
            ConfusionMatrix::from_rows(&[[1, -1], [0, 2]]),
            Err(Error::NegativeEntry)
        );
        assert_eq!(BinaryCounts::from_ints(0, 0, 0, 0), Err(Error::EmptyMatrix));
    }
}
