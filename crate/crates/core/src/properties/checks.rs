use std::cmp::Ordering;

use super::baseline::{approximate_baseline_value, exact_baseline_expectation};
use super::{cmp, AuditSpace, MetricFailure, PropertyId, Status, ValueCache, Verdict, Witness};
use crate::combinatorics::Budget;
use crate::confusion::{build_confusion, confusion_counts, ConfusionMatrix, Labeling};
use crate::enumerate::{compositions, enumerate_labelings, matrices_with_total, LabelingSpace};
use crate::error::{Error, Result};
use crate::measures::{Arity, Measure};
use crate::value::{Value, EPSILON};

/// Check one property of `measure` on `space`.
///
/// Matrices are visited by increasing `n` and then lexicographically, so the
/// reported witness is the first one in that order. Extremal checks use
/// matrices in which every class occurs in both labelings. Monotonicity
/// checks start from matrices in which neither labeling is constant and
/// every class occurs somewhere; for averaged measures every class must
/// occur in both labelings. Symmetry checks need each class to occur
/// somewhere. Baseline checks range over all true class sizes and over
/// non-unary predicted sizes (for averaged measures: every class predicted).
pub fn check_property(measure: &Measure, property: PropertyId, space: &AuditSpace, budget: &Budget) -> Result<Verdict> {
    if space.m < 2 || space.n_max < space.n_min {
        return Err(Error::InvalidParameter(format!("empty audit space {space}")));
    }
    if space.m > 2 && measure.arity() == Arity::BinaryOnly {
        return Err(Error::Arity {
            measure: measure.id(),
            classes: space.m,
        });
    }
    let mut cache = ValueCache::new(measure, space.m);
    let (witness, examined) = match property {
        PropertyId::Max => extreme(&mut cache, space, budget, true)?,
        PropertyId::Min => extreme(&mut cache, space, budget, false)?,
        PropertyId::Sym => symmetry(&mut cache, space, budget)?,
        PropertyId::CSym => class_symmetry(&mut cache, space, budget)?,
        PropertyId::Mon => monotone(&mut cache, space, budget, false)?,
        PropertyId::SMon => monotone(&mut cache, space, budget, true)?,
        PropertyId::CB => baseline(measure, space, budget, true)?,
        PropertyId::ACB => baseline(measure, space, budget, false)?,
        PropertyId::Dist => distance(&mut cache, space, budget)?,
    };
    Ok(Verdict {
        measure: measure.id(),
        property,
        status: if witness.is_some() {
            Status::Violated
        } else {
            Status::SatisfiedOnSpace
        },
        witness,
        space: *space,
        examined,
    })
}

type Found = (Option<Witness>, u64);

fn margins(counts: &[u64], m: usize) -> (Vec<u64>, Vec<u64>, u64) {
    let mut a = vec![0; m];
    let mut b = vec![0; m];
    for i in 0..m {
        for j in 0..m {
            a[i] += counts[i * m + j];
            b[j] += counts[i * m + j];
        }
    }
    let n = a.iter().sum();
    (a, b, n)
}

fn is_diagonal(counts: &[u64], m: usize) -> bool {
    (0..m).all(|i| (0..m).all(|j| i == j || counts[i * m + j] == 0))
}

fn is_zero_diagonal(counts: &[u64], m: usize) -> bool {
    (0..m).all(|i| counts[i * m + i] == 0)
}

/// Every class occurs in the true or the predicted labeling.
fn supported(counts: &[u64], m: usize) -> bool {
    let (a, b, _) = margins(counts, m);
    (0..m).all(|i| a[i] + b[i] > 0)
}

/// Every class occurs in both labelings, so each one-vs-all problem is
/// non-unary.
fn full_support(counts: &[u64], m: usize) -> bool {
    let (a, b, _) = margins(counts, m);
    a.iter().chain(&b).all(|&s| s > 0)
}

/// Source matrices for the monotonicity checks. Native measures need
/// non-constant labelings with every class occurring somewhere. Averaged
/// measures need every class on both sides, so that each one-vs-all problem
/// is non-unary. With two classes the two conditions coincide.
fn admissible(counts: &[u64], m: usize, averaged: bool) -> bool {
    if averaged {
        return full_support(counts, m);
    }
    let (a, b, n) = margins(counts, m);
    supported(counts, m) && a.iter().chain(&b).all(|&s| s != n)
}

fn matrix(counts: &[u64], m: usize) -> ConfusionMatrix {
    ConfusionMatrix::from_counts(m, counts).expect("nonnegative counts")
}

fn space_matrices(space: &AuditSpace, budget: &Budget) -> Result<Vec<Vec<u64>>> {
    let mut out = Vec::new();
    for n in space.n_min.max(1)..=space.n_max {
        out.extend(matrices_with_total(n as u64, space.m, budget)?);
    }
    Ok(out)
}

fn extreme(cache: &mut ValueCache, space: &AuditSpace, budget: &Budget, is_max: bool) -> Result<Found> {
    let marked = if is_max { is_diagonal } else { is_zero_diagonal };
    let m = space.m;
    let all: Vec<Vec<u64>> = space_matrices(space, budget)?
        .into_iter()
        .filter(|c| full_support(c, m))
        .collect();
    let Some(reference) = all.iter().find(|c| marked(c, m)).cloned() else {
        return Ok((None, all.len() as u64));
    };
    let ref_value = cache.get(&reference)?;
    for (k, c) in all.iter().enumerate() {
        let v = cache.get(c)?;
        let ord = cmp(&v, &ref_value);
        let bad = if marked(c, m) {
            ord != Ordering::Equal
        } else if is_max {
            ord != Ordering::Less
        } else {
            ord != Ordering::Greater
        };
        if bad {
            let witness = Witness::Extreme {
                reference: matrix(&reference, m),
                reference_value: ref_value,
                matrix: matrix(c, m),
                value: v,
            };
            return Ok((Some(witness), k as u64 + 1));
        }
    }
    Ok((None, all.len() as u64))
}

fn transposed(counts: &[u64], m: usize) -> Vec<u64> {
    let mut t = vec![0; m * m];
    for i in 0..m {
        for j in 0..m {
            t[j * m + i] = counts[i * m + j];
        }
    }
    t
}

fn symmetry(cache: &mut ValueCache, space: &AuditSpace, budget: &Budget) -> Result<Found> {
    let m = space.m;
    let mut examined = 0;
    for c in space_matrices(space, budget)? {
        if !supported(&c, m) {
            continue;
        }
        examined += 1;
        let t = transposed(&c, m);
        let (v, vt) = (cache.get(&c)?, cache.get(&t)?);
        if cmp(&v, &vt) != Ordering::Equal {
            let witness = Witness::Transform {
                matrix: matrix(&c, m),
                value: v,
                transformed: matrix(&t, m),
                transformed_value: vt,
                permutation: None,
            };
            return Ok((Some(witness), examined));
        }
    }
    Ok((None, examined))
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

fn class_symmetry(cache: &mut ValueCache, space: &AuditSpace, budget: &Budget) -> Result<Found> {
    let m = space.m;
    let perms: Vec<Vec<usize>> = permutations(m).into_iter().skip(1).collect();
    let mut examined = 0;
    for c in space_matrices(space, budget)? {
        if !supported(&c, m) {
            continue;
        }
        examined += 1;
        let v = cache.get(&c)?;
        for p in &perms {
            let mut pc = vec![0; m * m];
            for i in 0..m {
                for j in 0..m {
                    pc[i * m + j] = c[p[i] * m + p[j]];
                }
            }
            let vp = cache.get(&pc)?;
            if cmp(&v, &vp) != Ordering::Equal {
                let witness = Witness::Transform {
                    matrix: matrix(&c, m),
                    value: v,
                    transformed: matrix(&pc, m),
                    transformed_value: vp,
                    permutation: Some(p.clone()),
                };
                return Ok((Some(witness), examined));
            }
        }
    }
    Ok((None, examined))
}

/// Improving edits of `c`. For plain monotonicity: move one off-diagonal
/// element onto either diagonal cell of its row or column. For strong
/// monotonicity: add one diagonal element or remove one off-diagonal element.
fn improving_edits(c: &[u64], m: usize, strong: bool) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    if strong {
        for i in 0..m {
            let mut e = c.to_vec();
            e[i * m + i] += 1;
            out.push(e);
        }
    }
    for a in 0..m {
        for b in 0..m {
            if a == b || c[a * m + b] == 0 {
                continue;
            }
            if strong {
                let mut e = c.to_vec();
                e[a * m + b] -= 1;
                out.push(e);
            } else {
                for target in [a, b] {
                    let mut e = c.to_vec();
                    e[a * m + b] -= 1;
                    e[target * m + target] += 1;
                    out.push(e);
                }
            }
        }
    }
    out
}

fn monotone(cache: &mut ValueCache, space: &AuditSpace, budget: &Budget, strong: bool) -> Result<Found> {
    let m = space.m;
    let averaged = cache.measure.scheme.is_some();
    let mut examined = 0;
    for c in space_matrices(space, budget)? {
        if !admissible(&c, m, averaged) {
            continue;
        }
        let v = cache.get(&c)?;
        for e in improving_edits(&c, m, strong) {
            if strong
                && ((is_diagonal(&c, m) && is_diagonal(&e, m)) || (is_zero_diagonal(&c, m) && is_zero_diagonal(&e, m)))
            {
                continue;
            }
            examined += 1;
            let ve = cache.get(&e)?;
            if cmp(&v, &ve) != Ordering::Less {
                let witness = Witness::Edit {
                    before: matrix(&c, m),
                    before_value: v,
                    after: matrix(&e, m),
                    after_value: ve,
                };
                return Ok((Some(witness), examined));
            }
        }
    }
    Ok((None, examined))
}

fn baseline(measure: &Measure, space: &AuditSpace, budget: &Budget, exact: bool) -> Result<Found> {
    let m = space.m;
    let averaged = measure.scheme.is_some();
    let mut reference: Option<((Vec<u64>, Vec<u64>), Value)> = None;
    let mut examined = 0;
    for n in space.n_min.max(2)..=space.n_max {
        let sizes = compositions(n as u64, m);
        for a in &sizes {
            for b in &sizes {
                // non-unary predictions; averaged measures need that in
                // every one-vs-all problem
                let skip = if averaged {
                    b.contains(&0)
                } else {
                    b.contains(&(n as u64))
                };
                if skip {
                    continue;
                }
                examined += 1;
                let value = if exact {
                    exact_baseline_expectation(measure, a, b, budget)?
                } else {
                    approximate_baseline_value(measure, a, b)?
                };
                match &reference {
                    None => reference = Some(((a.clone(), b.clone()), value)),
                    Some((first, first_value)) => {
                        if cmp(&value, first_value) != Ordering::Equal {
                            let witness = Witness::Baseline {
                                first: first.clone(),
                                first_value: first_value.clone(),
                                second: (a.clone(), b.clone()),
                                second_value: value,
                            };
                            return Ok((Some(witness), examined));
                        }
                    }
                }
            }
        }
    }
    Ok((None, examined))
}

fn identity_counts(m: usize) -> Vec<u64> {
    (0..m * m).map(|k| u64::from(k / m == k % m)).collect()
}

/// `c_max - M` must be a metric on labelings: symmetric, zero exactly on
/// equal labelings, and subadditive along every triple.
fn distance(cache: &mut ValueCache, space: &AuditSpace, budget: &Budget) -> Result<Found> {
    let m = space.m;
    let c_max = cache.get(&identity_counts(m))?;
    let exact = c_max.is_exact() && cache.measure.is_exact();
    let mut examined = 0u64;
    for n in space.n_min.max(1)..=space.n_max {
        let labs: Vec<Labeling> = enumerate_labelings(&LabelingSpace::all(n, m), budget)?.collect();
        let k = labs.len();
        let mut value = vec![Value::zero(); k * k];
        let mut dist = vec![0f64; k * k];
        for i in 0..k {
            for j in 0..k {
                let v = cache.get(&confusion_counts(labs[i].labels(), labs[j].labels(), m))?;
                dist[i * k + j] = c_max.to_f64() - v.to_f64();
                value[i * k + j] = v;
            }
        }
        let metric = |failure, a: usize, b: usize, c: Option<usize>, ds: Vec<Value>| Witness::Metric {
            failure,
            c_max: c_max.clone(),
            a: labs[a].clone(),
            b: labs[b].clone(),
            c: c.map(|c| labs[c].clone()),
            distances: ds,
        };
        let d = |i: usize, j: usize| c_max.add(&value[i * k + j].neg());
        for i in 0..k {
            for j in 0..k {
                examined += 1;
                let ord = cmp(&value[i * k + j], &c_max);
                let identity_ok = if i == j {
                    ord == Ordering::Equal
                } else {
                    ord == Ordering::Less
                };
                if !identity_ok {
                    let w = metric(MetricFailure::Identity, i, j, None, vec![d(i, j)]);
                    return Ok((Some(w), examined));
                }
                if cmp(&value[i * k + j], &value[j * k + i]) != Ordering::Equal {
                    let w = metric(MetricFailure::Symmetry, i, j, None, vec![d(i, j), d(j, i)]);
                    return Ok((Some(w), examined));
                }
            }
        }
        budget.charge((k * k) as u64)?;
        for a in 0..k {
            // simultaneous permutation of the elements preserves every
            // distance, so the first labeling can be taken sorted
            if !labs[a].labels().windows(2).all(|w| w[0] <= w[1]) {
                continue;
            }
            budget.charge((k * k) as u64)?;
            for b in 0..k {
                let dab = dist[a * k + b];
                for c in 0..k {
                    examined += 1;
                    let slack = dab + dist[b * k + c] - dist[a * k + c];
                    let violated = if exact {
                        slack < 1e-9 && {
                            let lhs = d(a, b).add(&d(b, c));
                            cmp(&lhs, &d(a, c)) == Ordering::Less
                        }
                    } else {
                        slack < -EPSILON
                    };
                    if violated {
                        let w = metric(MetricFailure::Triangle, a, b, Some(c), vec![d(a, b), d(b, c), d(a, c)]);
                        return Ok((Some(w), examined));
                    }
                }
            }
        }
    }
    Ok((None, examined))
}

pub(crate) fn replay_metric(
    measure: &Measure,
    failure: MetricFailure,
    a: &Labeling,
    b: &Labeling,
    c: Option<&Labeling>,
) -> Result<bool> {
    let m = a.classes();
    let id = ConfusionMatrix::from_counts(m, &identity_counts(m))?;
    let c_max = measure.oriented(&id)?;
    let value = |x: &Labeling, y: &Labeling| -> Result<Value> { measure.oriented(&build_confusion(x, y)?) };
    let dist = |x: &Labeling, y: &Labeling| -> Result<Value> { Ok(c_max.add(&value(x, y)?.neg())) };
    Ok(match failure {
        MetricFailure::Symmetry => cmp(&value(a, b)?, &value(b, a)?) != Ordering::Equal,
        MetricFailure::Identity => {
            let d = dist(a, b)?;
            let zero = Value::zero();
            if a == b {
                cmp(&d, &zero) != Ordering::Equal
            } else {
                cmp(&d, &zero) != Ordering::Greater
            }
        }
        MetricFailure::Triangle => {
            let Some(c) = c else { return Ok(false) };
            let lhs = dist(a, b)?.add(&dist(b, c)?);
            cmp(&lhs, &dist(a, c)?) == Ordering::Less
        }
    })
}
