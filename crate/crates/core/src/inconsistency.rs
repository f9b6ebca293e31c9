//! Consistency of pairs of measures: do they order two candidate labelings
//! the same way relative to a reference?

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::Budget;
use crate::confusion::{build_confusion, ConfusionMatrix, Labeling};
use crate::enumerate::{enumerate_labelings, LabelingSpace};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::value::{Value, EPSILON};

/// Relation symbol between `M(A, B1)` and `M(A, B2)` on the oriented scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Relation {
    Greater,
    Less,
    Equal,
}

impl Relation {
    fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Greater => Relation::Greater,
            Ordering::Less => Relation::Less,
            Ordering::Equal => Relation::Equal,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Greater => ">",
            Relation::Less => "<",
            Relation::Equal => "=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A reference labeling and two candidates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Triplet {
    pub a: Labeling,
    pub b1: Labeling,
    pub b2: Labeling,
}

impl Triplet {
    pub fn new(a: Labeling, b1: Labeling, b2: Labeling) -> Result<Self> {
        for b in [&b1, &b2] {
            if b.len() != a.len() {
                return Err(Error::LengthMismatch(a.len(), b.len()));
            }
            if b.classes() != a.classes() {
                return Err(Error::ClassCountMismatch(a.classes(), b.classes()));
            }
        }
        Ok(Triplet { a, b1, b2 })
    }

    /// Binary triplet from 0/1 slices.
    pub fn binary(a: &[usize], b1: &[usize], b2: &[usize]) -> Result<Self> {
        Triplet::new(Labeling::binary(a)?, Labeling::binary(b1)?, Labeling::binary(b2)?)
    }

    pub fn matrices(&self) -> Result<(ConfusionMatrix, ConfusionMatrix)> {
        Ok((build_confusion(&self.a, &self.b1)?, build_confusion(&self.a, &self.b2)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TripletVerdict {
    Consistent,
    Inconsistent,
}

fn relation_eps(x: &Value, y: &Value, eps: f64) -> Relation {
    Relation::from_ordering(x.compare(y, eps))
}

/// How `measure` orders the two candidates.
pub fn relation(measure: &Measure, c1: &ConfusionMatrix, c2: &ConfusionMatrix) -> Result<Relation> {
    Ok(relation_eps(&measure.oriented(c1)?, &measure.oriented(c2)?, EPSILON))
}

pub fn triplet_relation(measure: &Measure, t: &Triplet) -> Result<Relation> {
    let (c1, c2) = t.matrices()?;
    relation(measure, &c1, &c2)
}

/// Consistent iff both measures produce the same relation symbol.
pub fn triplet_verdict(m1: &Measure, m2: &Measure, t: &Triplet) -> Result<TripletVerdict> {
    let (c1, c2) = t.matrices()?;
    Ok(if relation(m1, &c1, &c2)? == relation(m2, &c1, &c2)? {
        TripletVerdict::Consistent
    } else {
        TripletVerdict::Inconsistent
    })
}

/// One measure strictly prefers `B1` and the other strictly prefers `B2`.
pub fn strictly_inconsistent(m1: &Measure, m2: &Measure, t: &Triplet) -> Result<bool> {
    let (c1, c2) = t.matrices()?;
    let pair = (relation(m1, &c1, &c2)?, relation(m2, &c1, &c2)?);
    Ok(matches!(
        pair,
        (Relation::Greater, Relation::Less) | (Relation::Less, Relation::Greater)
    ))
}

/// Dense ranks of binary count vectors `(tp, fn, fp, tn)` under one measure.
/// Equal values share a rank, so relation symbols reduce to integer
/// comparisons.
fn value_ranks(measure: &Measure, matrices: &[[u64; 4]]) -> Result<Vec<u32>> {
    let mut values = Vec::with_capacity(matrices.len());
    for (k, c) in matrices.iter().enumerate() {
        let m = ConfusionMatrix::from_counts(2, &[c[3], c[2], c[1], c[0]])?;
        values.push((measure.oriented(&m)?, k));
    }
    values.sort_by(|x, y| x.0.compare(&y.0, EPSILON));
    let mut ranks = vec![0u32; matrices.len()];
    let mut rank = 0u32;
    for i in 0..values.len() {
        if i > 0 && values[i].0.compare(&values[i - 1].0, EPSILON) != Ordering::Equal {
            rank += 1;
        }
        ranks[values[i].1] = rank;
    }
    Ok(ranks)
}

/// Indistinguishability result for one `n`.
#[derive(Debug, Clone, Serialize)]
pub struct DistinguishReport {
    pub n: usize,
    pub measures: Vec<String>,
    /// Groups of two or more measures that agree on every triplet.
    pub groups: Vec<Vec<String>>,
    /// `distinguished[i][j]` is true when some triplet separates `i` and `j`.
    pub distinguished: Vec<Vec<bool>>,
    /// Number of triplets (or reduced configurations) examined.
    pub examined: u64,
}

impl DistinguishReport {
    fn from_matrix(n: usize, measures: &[Measure], distinguished: Vec<Vec<bool>>, examined: u64) -> Self {
        let k = measures.len();
        let mut assigned = vec![false; k];
        let mut groups = Vec::new();
        for i in 0..k {
            if assigned[i] {
                continue;
            }
            let members: Vec<usize> = (i..k)
                .filter(|&j| !assigned[j] && (j == i || !distinguished[i][j]))
                .collect();
            // consistency is an equivalence relation, so the class of `i` is a maximal group
            for &j in &members {
                assigned[j] = true;
            }
            if members.len() > 1 {
                groups.push(members.iter().map(|&j| measures[j].name()).collect());
            }
        }
        DistinguishReport {
            n,
            measures: measures.iter().map(Measure::name).collect(),
            groups,
            distinguished,
            examined,
        }
    }

    pub fn is_distinguished(&self, a: &str, b: &str) -> Option<bool> {
        let i = self.measures.iter().position(|m| m == a)?;
        let j = self.measures.iter().position(|m| m == b)?;
        Some(self.distinguished[i][j])
    }
}

fn check_binary(measures: &[Measure], n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    if measures.is_empty() {
        return Err(Error::EmptyInput("measure list".into()));
    }
    Ok(())
}

/// Pairs of measures separated by some triplet of binary labelings of `n`
/// elements in which every labeling uses both classes.
///
/// Relabeling the elements changes no value, so the reference labeling can
/// be taken sorted with `a1` positives. A candidate is then determined by
/// how many of its positives fall in each block of the reference, and the
/// search runs over pairs of such reduced candidates.
pub fn indistinguishable_groups(n: usize, measures: &[Measure], budget: &Budget) -> Result<DistinguishReport> {
    check_binary(measures, n)?;
    let k = measures.len();
    let mut distinguished = vec![vec![false; k]; k];
    let mut examined = 0u64;
    for a1 in 1..n as u64 {
        let a0 = n as u64 - a1;
        // (tp, fn, fp, tn) for B with k1 positives among A's positives and k0 among its negatives
        let mut candidates = Vec::new();
        for k1 in 0..=a1 {
            for k0 in 0..=a0 {
                let b1 = k1 + k0;
                if b1 == 0 || b1 == n as u64 {
                    continue;
                }
                candidates.push([k1, a1 - k1, k0, a0 - k0]);
            }
        }
        budget.charge((candidates.len() * candidates.len()) as u64)?;
        examined += (candidates.len() * candidates.len()) as u64;
        let ranks: Vec<Vec<u32>> = measures
            .iter()
            .map(|m| value_ranks(m, &candidates))
            .collect::<Result<_>>()?;
        for x in 0..candidates.len() {
            for y in 0..candidates.len() {
                let rel: Vec<Ordering> = ranks.iter().map(|r| r[x].cmp(&r[y])).collect();
                for i in 0..k {
                    for j in i + 1..k {
                        if rel[i] != rel[j] {
                            distinguished[i][j] = true;
                            distinguished[j][i] = true;
                        }
                    }
                }
            }
        }
    }
    Ok(DistinguishReport::from_matrix(n, measures, distinguished, examined))
}

/// The same analysis by literal enumeration of every ordered triplet
/// `(A, B1, B2)` of non-constant binary labelings. Work grows as `8^n`;
/// the reference labeling is split across threads.
pub fn literal_indistinguishable_groups(n: usize, measures: &[Measure], budget: &Budget) -> Result<DistinguishReport> {
    check_binary(measures, n)?;
    let k = measures.len();
    let labs: Vec<Vec<usize>> = enumerate_labelings(&LabelingSpace::nonconstant(n, 2), budget)?
        .map(|l| l.labels().to_vec())
        .collect();
    let total = (labs.len() as u64).pow(3);
    budget.charge(total)?;
    // every binary count vector with total n, ranked once per measure
    let mut all = Vec::new();
    let mut index = HashMap::new();
    for tp in 0..=n as u64 {
        for fn_ in 0..=n as u64 - tp {
            for fp in 0..=n as u64 - tp - fn_ {
                index.insert([tp, fn_, fp], all.len());
                all.push([tp, fn_, fp, n as u64 - tp - fn_ - fp]);
            }
        }
    }
    let ranks: Vec<Vec<u32>> = measures.iter().map(|m| value_ranks(m, &all)).collect::<Result<_>>()?;
    let key = |a: &[usize], b: &[usize]| -> usize {
        let mut c = [0u64; 3];
        for (&x, &y) in a.iter().zip(b) {
            match (x, y) {
                (1, 1) => c[0] += 1,
                (1, 0) => c[1] += 1,
                (0, 1) => c[2] += 1,
                _ => {}
            }
        }
        index[&c]
    };
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let found: Vec<Vec<bool>> = labs
        .par_iter()
        .map(|a| {
            let keys: Vec<usize> = labs.iter().map(|b| key(a, b)).collect();
            let mut hit = vec![false; pairs.len()];
            for &x in &keys {
                for &y in &keys {
                    for (p, &(i, j)) in pairs.iter().enumerate() {
                        if !hit[p] && ranks[i][x].cmp(&ranks[i][y]) != ranks[j][x].cmp(&ranks[j][y]) {
                            hit[p] = true;
                        }
                    }
                }
            }
            hit
        })
        .collect();
    let mut distinguished = vec![vec![false; k]; k];
    for hit in found {
        for (p, &(i, j)) in pairs.iter().enumerate() {
            if hit[p] {
                distinguished[i][j] = true;
                distinguished[j][i] = true;
            }
        }
    }
    Ok(DistinguishReport::from_matrix(n, measures, distinguished, total))
}

/// Inconsistency of one measure pair over a set of comparisons.
#[derive(Debug, Clone, Serialize)]
pub struct PairRate {
    pub first: String,
    pub second: String,
    pub inconsistent: u64,
    pub total: u64,
    /// Exact fraction `inconsistent / total` in lowest terms.
    pub rate: String,
    pub percent: f64,
}

impl PairRate {
    /// Percentage with one decimal.
    pub fn percent_label(&self) -> String {
        format!("{:.1}", self.percent)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub measures: Vec<String>,
    /// Tolerance used when comparing float values.
    pub epsilon: f64,
    pub comparisons: u64,
    /// Unordered measure pairs in input order.
    pub pairs: Vec<PairRate>,
    /// Comparisons whose verdict for some pair changes when the float
    /// tolerance is divided or multiplied by ten.
    pub epsilon_sensitive: u64,
}

impl ConsistencyReport {
    pub fn rate(&self, a: &str, b: &str) -> Option<&PairRate> {
        self.pairs
            .iter()
            .find(|p| (p.first == a && p.second == b) || (p.first == b && p.second == a))
    }
}

/// For every unordered measure pair, the share of comparisons `(C1, C2)` on
/// which the two measures produce different relation symbols.
pub fn pairwise_inconsistency(
    measures: &[Measure],
    comparisons: &[(ConfusionMatrix, ConfusionMatrix)],
) -> Result<ConsistencyReport> {
    pairwise_inconsistency_with(measures, comparisons, EPSILON)
}

/// [`pairwise_inconsistency`] with a custom tolerance for float values.
pub fn pairwise_inconsistency_with(
    measures: &[Measure],
    comparisons: &[(ConfusionMatrix, ConfusionMatrix)],
    eps: f64,
) -> Result<ConsistencyReport> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {eps}")));
    }
    if comparisons.is_empty() {
        return Err(Error::EmptyInput("no comparisons".into()));
    }
    if measures.len() < 2 {
        return Err(Error::EmptyInput("need at least two measures".into()));
    }
    let m = comparisons[0].0.m();
    for (c1, c2) in comparisons {
        for c in [c1, c2] {
            if c.m() != m {
                return Err(Error::ClassCountMismatch(m, c.m()));
            }
        }
    }
    let k = measures.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let rows: Vec<(Vec<bool>, bool)> = comparisons
        .par_iter()
        .map(|(c1, c2)| {
            let vals: Vec<(Value, Value)> = measures
                .iter()
                .map(|me| Ok((me.oriented(c1)?, me.oriented(c2)?)))
                .collect::<Result<_>>()?;
            let rel = |eps: f64| -> Vec<Relation> { vals.iter().map(|(x, y)| relation_eps(x, y, eps)).collect() };
            let (base, tight, loose) = (rel(eps), rel(eps / 10.0), rel(eps * 10.0));
            let differ = |r: &[Relation]| -> Vec<bool> { pairs.iter().map(|&(i, j)| r[i] != r[j]).collect() };
            let d = differ(&base);
            let sensitive = d != differ(&tight) || d != differ(&loose);
            Ok((d, sensitive))
        })
        .collect::<Result<_>>()?;
    let total = comparisons.len() as u64;
    let mut counts = vec![0u64; pairs.len()];
    let mut epsilon_sensitive = 0;
    for (d, sensitive) in &rows {
        for (p, &x) in d.iter().enumerate() {
            counts[p] += u64::from(x);
        }
        epsilon_sensitive += u64::from(*sensitive);
    }
    let pairs = pairs
        .iter()
        .zip(counts)
        .map(|(&(i, j), c)| PairRate {
            first: measures[i].name(),
            second: measures[j].name(),
            inconsistent: c,
            total,
            rate: BigRational::new(BigInt::from(c), BigInt::from(total)).to_string(),
            percent: 100.0 * c as f64 / total as f64,
        })
        .collect();
    Ok(ConsistencyReport {
        measures: measures.iter().map(Measure::name).collect(),
        epsilon: eps,
        comparisons: total,
        pairs,
        epsilon_sensitive,
    })
}

fn check_aligned(truth: &Labeling, predictions: &[(String, Labeling)]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("no predictions".into()));
    }
    for (_, p) in predictions {
        if p.len() != truth.len() {
            return Err(Error::LengthMismatch(truth.len(), p.len()));
        }
        if p.classes() != truth.classes() {
            return Err(Error::ClassCountMismatch(truth.classes(), p.classes()));
        }
    }
    Ok(())
}

/// Every unordered pair of models, as confusion matrices against `truth`.
pub fn model_pairs(
    truth: &Labeling,
    predictions: &[(String, Labeling)],
) -> Result<Vec<(ConfusionMatrix, ConfusionMatrix)>> {
    check_aligned(truth, predictions)?;
    let mats: Vec<ConfusionMatrix> = predictions
        .iter()
        .map(|(_, p)| build_confusion(truth, p))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            out.push((mats[i].clone(), mats[j].clone()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RankingColumn {
    pub measure: String,
    pub values: Vec<Value>,
    /// 1-based competition ranks; tied models share the better rank.
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankingTable {
    pub models: Vec<String>,
    pub columns: Vec<RankingColumn>,
}

impl RankingTable {
    pub fn column(&self, measure: &str) -> Option<&RankingColumn> {
        self.columns.iter().find(|c| c.measure == measure)
    }
}

/// Rank models by each measure, best first.
pub fn rank_models(measures: &[Measure], truth: &Labeling, predictions: &[(String, Labeling)]) -> Result<RankingTable> {
    rank_models_with(measures, truth, predictions, EPSILON)
}

/// [`rank_models`] with a custom tolerance for ties between float values.
pub fn rank_models_with(
    measures: &[Measure],
    truth: &Labeling,
    predictions: &[(String, Labeling)],
    eps: f64,
) -> Result<RankingTable> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {eps}")));
    }
    check_aligned(truth, predictions)?;
    let mats: Vec<ConfusionMatrix> = predictions
        .iter()
        .map(|(_, p)| build_confusion(truth, p))
        .collect::<Result<_>>()?;
    let mut columns = Vec::with_capacity(measures.len());
    for me in measures {
        let values: Vec<Value> = mats.iter().map(|c| me.evaluate(c)).collect::<Result<_>>()?;
        let oriented: Vec<Value> = mats.iter().map(|c| me.oriented(c)).collect::<Result<_>>()?;
        let ranks = (0..mats.len())
            .map(|i| {
                1 + oriented
                    .iter()
                    .filter(|o| o.compare(&oriented[i], eps) == Ordering::Greater)
                    .count()
            })
            .collect();
        columns.push(RankingColumn {
            measure: me.name(),
            values,
            ranks,
        });
    }
    Ok(RankingTable {
        models: predictions.iter().map(|(name, _)| name.clone()).collect(),
        columns,
    })
}
