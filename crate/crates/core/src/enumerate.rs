//! Deterministic, lexicographically ordered enumerations of labelings and
//! confusion matrices.
//!
//! Matrices are produced as row-major `u64` count vectors; callers wrap them in
//! [`ConfusionMatrix`](crate::ConfusionMatrix) only where exact evaluation is
//! needed.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::combinatorics::{binomial, multinomial, Budget};
use crate::confusion::Labeling;
use crate::error::{Error, Result};

/// Which labelings of `n` elements into `m` classes to visit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelingSpace {
    pub n: usize,
    pub m: usize,
    /// Fixed class sizes, if any.
    pub sizes: Option<Vec<u64>>,
    /// Skip labelings that put every element into one class.
    pub exclude_constant: bool,
}

impl LabelingSpace {
    pub fn all(n: usize, m: usize) -> Self {
        LabelingSpace {
            n,
            m,
            sizes: None,
            exclude_constant: false,
        }
    }

    pub fn with_sizes(sizes: &[u64]) -> Self {
        LabelingSpace {
            n: sizes.iter().sum::<u64>() as usize,
            m: sizes.len(),
            sizes: Some(sizes.to_vec()),
            exclude_constant: false,
        }
    }

    /// Every labeling that uses at least two classes.
    pub fn nonconstant(n: usize, m: usize) -> Self {
        LabelingSpace {
            exclude_constant: true,
            ..LabelingSpace::all(n, m)
        }
    }

    /// Number of labelings the enumeration yields.
    pub fn count(&self) -> BigUint {
        match &self.sizes {
            Some(s) => {
                let unary = s.iter().any(|&k| k as usize == self.n);
                if self.exclude_constant && unary {
                    BigUint::zero()
                } else {
                    multinomial(s)
                }
            }
            None => {
                let total = BigUint::from(self.m).pow(self.n as u32);
                if self.exclude_constant {
                    total - BigUint::from(self.m)
                } else {
                    total
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < 2 {
            return Err(Error::DegenerateLabeling);
        }
        if let Some(s) = &self.sizes {
            if s.len() != self.m {
                return Err(Error::ClassCountMismatch(s.len(), self.m));
            }
            let total: u64 = s.iter().sum();
            if total as usize != self.n {
                return Err(Error::MarginMismatch(total.to_string(), self.n.to_string()));
            }
        }
        Ok(())
    }
}

/// Lexicographic stream of labelings.
#[derive(Debug, Clone)]
pub struct Labelings {
    current: Option<Vec<usize>>,
    m: usize,
    fixed_sizes: bool,
    exclude_constant: bool,
}

impl Iterator for Labelings {
    type Item = Labeling;

    fn next(&mut self) -> Option<Labeling> {
        loop {
            let cur = self.current.take()?;
            let advanced = if self.fixed_sizes {
                next_multiset_permutation(&cur)
            } else {
                next_odometer(&cur, self.m)
            };
            self.current = advanced;
            let constant = cur.windows(2).all(|w| w[0] == w[1]);
            if !(self.exclude_constant && constant) {
                return Some(Labeling::new_unchecked(cur, self.m));
            }
        }
    }
}

/// Enumerate a labeling space after charging its size to `budget`.
pub fn enumerate_labelings(space: &LabelingSpace, budget: &Budget) -> Result<Labelings> {
    space.validate()?;
    let count = space.count();
    budget.reserve(&count)?;
    budget.charge(count.to_u64().unwrap_or(u64::MAX))?;
    let start = match &space.sizes {
        Some(s) => s
            .iter()
            .enumerate()
            .flat_map(|(class, &k)| std::iter::repeat_n(class, k as usize))
            .collect(),
        None => vec![0; space.n],
    };
    Ok(Labelings {
        current: Some(start),
        m: space.m,
        fixed_sizes: space.sizes.is_some(),
        exclude_constant: space.exclude_constant,
    })
}

fn next_odometer(cur: &[usize], m: usize) -> Option<Vec<usize>> {
    let mut next = cur.to_vec();
    for pos in (0..next.len()).rev() {
        if next[pos] + 1 < m {
            next[pos] += 1;
            return Some(next);
        }
        next[pos] = 0;
    }
    None
}

fn next_multiset_permutation(cur: &[usize]) -> Option<Vec<usize>> {
    let mut next = cur.to_vec();
    let len = next.len();
    let i = (0..len.saturating_sub(1)).rev().find(|&i| next[i] < next[i + 1])?;
    let j = (i + 1..len).rev().find(|&j| next[j] > next[i])?;
    next.swap(i, j);
    next[i + 1..].reverse();
    Some(next)
}

/// Every integer matrix with the given row and column sums, paired with the
/// number of labelings `B` producing it against a fixed `A` with sizes `a`.
pub fn enumerate_confusion_matrices(a: &[u64], b: &[u64], budget: &Budget) -> Result<Vec<(Vec<u64>, BigUint)>> {
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
    let m = a.len();
    let mut out = Vec::new();
    let mut entries = vec![0u64; m * m];
    let mut remaining = b.to_vec();
    fill_rows(a, 0, &mut remaining, &mut entries, &mut out, budget)?;
    let with_mult = out
        .into_iter()
        .map(|e| {
            let mult = (0..m).fold(BigUint::from(1u32), |acc, i| acc * multinomial(&e[i * m..(i + 1) * m]));
            (e, mult)
        })
        .collect();
    Ok(with_mult)
}

fn fill_rows(
    a: &[u64],
    row: usize,
    remaining: &mut [u64],
    entries: &mut [u64],
    out: &mut Vec<Vec<u64>>,
    budget: &Budget,
) -> Result<()> {
    let m = a.len();
    if row + 1 == m {
        // last row is forced by the column sums
        entries[row * m..].copy_from_slice(remaining);
        budget.charge(1)?;
        out.push(entries.to_vec());
        return Ok(());
    }
    let mut row_vals = vec![0u64; m];
    fill_cells(a, row, 0, a[row], remaining, &mut row_vals, entries, out, budget)
}

#[allow(clippy::too_many_arguments)]
fn fill_cells(
    a: &[u64],
    row: usize,
    col: usize,
    left: u64,
    remaining: &mut [u64],
    row_vals: &mut [u64],
    entries: &mut [u64],
    out: &mut Vec<Vec<u64>>,
    budget: &Budget,
) -> Result<()> {
    let m = a.len();
    if col + 1 == m {
        if left > remaining[col] {
            return Ok(());
        }
        row_vals[col] = left;
        for (j, &v) in row_vals.iter().enumerate() {
            entries[row * m + j] = v;
            remaining[j] -= v;
        }
        let res = fill_rows(a, row + 1, remaining, entries, out, budget);
        for (j, &v) in row_vals.iter().enumerate() {
            remaining[j] += v;
        }
        return res;
    }
    let hi = left.min(remaining[col]);
    for v in 0..=hi {
        row_vals[col] = v;
        fill_cells(a, row, col + 1, left - v, remaining, row_vals, entries, out, budget)?;
    }
    Ok(())
}

/// All compositions of `total` into `parts` nonnegative parts, lexicographic.
pub fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; parts];
    compose(total, 0, &mut cur, &mut out);
    out
}

fn compose(left: u64, pos: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for v in 0..=left {
        cur[pos] = v;
        compose(left - v, pos + 1, cur, out);
    }
}

/// Every `m x m` count matrix with total `n`, row-major lexicographic.
pub fn matrices_with_total(n: u64, m: usize, budget: &Budget) -> Result<Vec<Vec<u64>>> {
    let count = binomial(n + (m * m) as u64 - 1, (m * m) as u64 - 1);
    budget.reserve(&count)?;
    budget.charge(count.to_u64().unwrap_or(u64::MAX))?;
    Ok(compositions(n, m * m))
}

/// Every count matrix with the given row sums.
pub fn matrices_with_rows(a: &[u64], budget: &Budget) -> Result<Vec<Vec<u64>>> {
    let m = a.len();
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for &ai in a {
        let rows = compositions(ai, m);
        let mut next = Vec::with_capacity(out.len() * rows.len());
        for prefix in &out {
            for r in &rows {
                let mut v = prefix.clone();
                v.extend_from_slice(r);
                next.push(v);
            }
        }
        budget.charge(next.len() as u64)?;
        out = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeling_counts() {
        let b = Budget::default();
        let sized: Vec<_> = enumerate_labelings(&LabelingSpace::with_sizes(&[1, 2]), &b)
            .unwrap()
            .collect();
        assert_eq!(sized.len(), 3);
        assert_eq!(sized[0].labels(), &[0, 1, 1]);
        assert_eq!(sized[2].labels(), &[1, 1, 0]);
        assert_eq!(enumerate_labelings(&LabelingSpace::all(2, 2), &b).unwrap().count(), 4);
        let nc = LabelingSpace::nonconstant(10, 2);
        assert_eq!(nc.count(), BigUint::from(1022u32));
        assert_eq!(enumerate_labelings(&nc, &b).unwrap().count(), 1022);
    }

    #[test]
    fn labelings_are_lexicographic() {
        let b = Budget::default();
        let all: Vec<_> = enumerate_labelings(&LabelingSpace::all(3, 3), &b).unwrap().collect();
        assert_eq!(all.len(), 27);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let sized: Vec<_> = enumerate_labelings(&LabelingSpace::with_sizes(&[2, 1, 2]), &b)
            .unwrap()
            .collect();
        assert_eq!(sized.len(), 30);
        assert!(sized.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn budget_guards_enumeration() {
        let b = Budget::new(100);
        assert!(matches!(
            enumerate_labelings(&LabelingSpace::all(10, 2), &b),
            Err(Error::BudgetExceeded { limit: 100 })
        ));
    }

    #[test]
    fn confusion_matrices_with_margins() {
        let b = Budget::default();
        let two = enumerate_confusion_matrices(&[1, 1], &[1, 1], &b).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[0], (vec![0, 1, 1, 0], BigUint::from(1u32)));
        assert_eq!(two[1], (vec![1, 0, 0, 1], BigUint::from(1u32)));
        let one = enumerate_confusion_matrices(&[2, 0], &[1, 1], &b).unwrap();
        assert_eq!(one, vec![(vec![1, 1, 0, 0], BigUint::from(2u32))]);
        let total: BigUint = enumerate_confusion_matrices(&[5, 5], &[4, 6], &b)
            .unwrap()
            .into_iter()
            .map(|(_, k)| k)
            .sum();
        assert_eq!(total, BigUint::from(210u32));
    }

    #[test]
    fn matrix_spaces() {
        let b = Budget::default();
        assert_eq!(matrices_with_total(2, 2, &b).unwrap().len(), 10);
        assert_eq!(matrices_with_rows(&[1, 2], &b).unwrap().len(), 6);
    }
}
