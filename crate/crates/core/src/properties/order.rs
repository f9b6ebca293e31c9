//! Higher-order baseline analysis on the rate parametrization
//! `(p_AB, p_A, p_B)`, and the conditions on the normalizer `s(p_A, p_B)`
//! of measures of the form `s(p_A, p_B) (p_AB - p_A p_B)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::confusion::{BinaryCounts, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::measures::formulas::ln_cosh;
use crate::measures::Measure;
use crate::value::{int, Value, EPSILON};

/// A derivative counts as zero below this, measured in the coordinate
/// `t = (p_AB - p_A p_B) / w` where `w` is the width of the feasible range.
pub const ZERO_THRESHOLD: f64 = 1e-6;

/// Strict inequalities must hold with at least this margin.
pub const STRICT_MARGIN: f64 = 1e-9;

/// Agreement rate and the two positive rates of a binary comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RateTriple {
    #[serde(serialize_with = "ser_rational")]
    pub p_ab: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub p_a: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub p_b: BigRational,
}

fn ser_rational<S: serde::Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

impl RateTriple {
    pub fn new(p_ab: BigRational, p_a: BigRational, p_b: BigRational) -> Result<Self> {
        let one = BigRational::one();
        let zero = BigRational::zero();
        let in_unit = |q: &BigRational| *q >= zero && *q <= one;
        if !(in_unit(&p_ab) && in_unit(&p_a) && in_unit(&p_b)) {
            return Err(Error::InvalidParameter("rates must lie in [0, 1]".into()));
        }
        let lower = (&p_a + &p_b - &one).max(zero);
        let upper = p_a.clone().min(p_b.clone());
        if p_ab < lower || p_ab > upper {
            return Err(Error::InvalidParameter(format!(
                "p_AB = {p_ab} outside [{lower}, {upper}]"
            )));
        }
        Ok(RateTriple { p_ab, p_a, p_b })
    }

    /// The point `p_AB = p_A p_B`.
    pub fn independent(p_a: BigRational, p_b: BigRational) -> Result<Self> {
        RateTriple::new(&p_a * &p_b, p_a, p_b)
    }

    /// Feasible range of `p_AB` for the given marginal rates.
    pub fn feasible_range(&self) -> (BigRational, BigRational) {
        let lower = (&self.p_a + &self.p_b - BigRational::one()).max(BigRational::zero());
        let upper = self.p_a.clone().min(self.p_b.clone());
        (lower, upper)
    }
}

/// Real-valued confusion matrix with unit total.
pub fn rate_matrix(t: &RateTriple) -> ConfusionMatrix {
    let one = BigRational::one();
    BinaryCounts {
        tp: t.p_ab.clone(),
        fn_: &t.p_a - &t.p_ab,
        fp: &t.p_b - &t.p_ab,
        tn: one - &t.p_a - &t.p_b + &t.p_ab,
    }
    .to_matrix()
}

/// `(j / steps, k / steps)` for `0 < j, k < steps`.
pub fn interior_grid(steps: u32) -> Vec<(BigRational, BigRational)> {
    let q = |j: u32| BigRational::new(BigInt::from(j), BigInt::from(steps));
    (1..steps).flat_map(|j| (1..steps).map(move |k| (q(j), q(k)))).collect()
}

fn check_interior(grid: &[(BigRational, BigRational)]) -> Result<()> {
    let one = BigRational::one();
    for (a, b) in grid {
        if !a.is_positive() || !b.is_positive() || *a >= one || *b >= one {
            return Err(Error::GridOnBoundary(a.to_string(), b.to_string()));
        }
    }
    Ok(())
}

fn f64_of(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Derivatives of one measure at one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct OrderPoint {
    pub p_a: f64,
    pub p_b: f64,
    /// Value at `p_AB = p_A p_B`.
    pub baseline_value: f64,
    /// Width of the feasible `p_AB` range.
    pub width: f64,
    /// `d^l M / d p_AB^l` for `l = 1..=l_max`.
    pub derivatives: Vec<f64>,
    /// The same derivatives multiplied by `width^l`.
    pub scaled: Vec<f64>,
    pub vanishing: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub measure: String,
    pub l_max: usize,
    pub points: Vec<OrderPoint>,
    /// The value at the expected point is the same on every grid point.
    pub baseline_constant: bool,
    /// For each `l` in `2..=l_max`, whether the derivative vanishes everywhere.
    pub vanishes_everywhere: Vec<(usize, bool)>,
    /// Largest `k` such that the baseline is constant and derivatives of
    /// order `2..=k` vanish, capped at `l_max`; zero without a constant baseline.
    pub order: usize,
}

impl OrderReport {
    /// Largest absolute scaled derivative of order `l` over the grid.
    pub fn max_scaled(&self, l: usize) -> f64 {
        self.points.iter().map(|p| p.scaled[l - 1].abs()).fold(0.0, f64::max)
    }

    pub fn max_derivative(&self, l: usize) -> f64 {
        self.points
            .iter()
            .map(|p| p.derivatives[l - 1].abs())
            .fold(0.0, f64::max)
    }
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central difference of order `l` with step `h` around `t = 0`.
fn central_difference(f: &dyn Fn(f64) -> Result<f64>, l: usize, h: f64) -> Result<f64> {
    let mut sum = 0.0;
    for k in 0..=l {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial_f64(l, k) * f((l as f64 / 2.0 - k as f64) * h)?;
    }
    Ok(sum / h.powi(l as i32))
}

/// Step in the normalized coordinate. Rounding error grows like `h^-l`,
/// and the Richardson step leaves an `h^4` truncation term, so a fairly
/// wide step is the better trade.
const STEP: f64 = 1e-2;

/// Finite-difference estimates of the `p_AB` derivatives of a binary
/// measure at `p_AB = p_A p_B`, for every grid point.
pub fn baseline_order(measure: &Measure, l_max: usize, grid: &[(BigRational, BigRational)]) -> Result<OrderReport> {
    if !(1..=4).contains(&l_max) {
        return Err(Error::InvalidParameter(format!(
            "derivative order {l_max} not in 1..=4"
        )));
    }
    if grid.is_empty() {
        return Err(Error::EmptyInput("grid".into()));
    }
    check_interior(grid)?;
    let mut points = Vec::with_capacity(grid.len());
    for (pa, pb) in grid {
        let center = RateTriple::independent(pa.clone(), pb.clone())?;
        let (lo, hi) = center.feasible_range();
        let width = &hi - &lo;
        let room = f64_of(&(&hi - &center.p_ab).min(&center.p_ab - &lo)) / f64_of(&width);
        let f = |t: f64| -> Result<f64> {
            let dt = BigRational::from_float(t).ok_or_else(|| Error::Invalid("non-finite step".into()))?;
            let triple = RateTriple::new(&center.p_ab + dt * &width, pa.clone(), pb.clone())?;
            Ok(measure.evaluate(&rate_matrix(&triple))?.to_f64())
        };
        let baseline_value = f(0.0)?;
        let w = f64_of(&width);
        let mut derivatives = Vec::with_capacity(l_max);
        let mut scaled = Vec::with_capacity(l_max);
        let mut vanishing = Vec::with_capacity(l_max);
        for l in 1..=l_max {
            // keep the widest stencil inside the feasible range
            let h = STEP.min(0.9 * room / (l as f64 / 2.0).max(1.0));
            let coarse = central_difference(&f, l, h)?;
            let fine = central_difference(&f, l, h / 2.0)?;
            let d_t = (4.0 * fine - coarse) / 3.0;
            derivatives.push(d_t / w.powi(l as i32));
            scaled.push(d_t);
            vanishing.push(d_t.abs() < ZERO_THRESHOLD);
        }
        points.push(OrderPoint {
            p_a: f64_of(pa),
            p_b: f64_of(pb),
            baseline_value,
            width: w,
            derivatives,
            scaled,
            vanishing,
        });
    }
    let first = points[0].baseline_value;
    let baseline_constant = points.iter().all(|p| (p.baseline_value - first).abs() <= 1e-9);
    let vanishes_everywhere: Vec<(usize, bool)> = (2..=l_max)
        .map(|l| (l, points.iter().all(|p| p.vanishing[l - 1])))
        .collect();
    let order = if baseline_constant {
        1 + vanishes_everywhere.iter().take_while(|(_, v)| *v).count()
    } else {
        0
    };
    Ok(OrderReport {
        measure: measure.id(),
        l_max,
        points,
        baseline_constant,
        vanishes_everywhere,
        order,
    })
}

/// `s(p_A, p_B) = 1 / M_r(p_A (1 - p_A), p_B (1 - p_B))` where `M_r` is the
/// power mean with exponent `r` (geometric mean for `r = 0`). Exact for
/// `r` in `{-2, -1, 0, 1, 2}`.
pub fn gm_normalizer(r: &BigRational, p_a: &BigRational, p_b: &BigRational) -> Result<Value> {
    let one = BigRational::one();
    let x = p_a * (&one - p_a);
    let y = p_b * (&one - p_b);
    if !x.is_positive() || !y.is_positive() {
        return Err(Error::GridOnBoundary(p_a.to_string(), p_b.to_string()));
    }
    let two = int(2);
    Ok(if r.is_zero() {
        Value::over_sqrt(one, &x * &y)
    } else if *r == int(1) {
        Value::Rational(two / (x + y))
    } else if *r == int(-1) {
        Value::Rational((&x + &y) / (two * x * y))
    } else if *r == int(2) {
        Value::over_sqrt(one, (&x * &x + &y * &y) / two)
    } else if *r == int(-2) {
        let (x2, y2) = (&x * &x, &y * &y);
        Value::over_sqrt(one, two * &x2 * &y2 / (x2 + y2))
    } else {
        let rf = f64_of(r);
        let (lx, ly) = (f64_of(&x).ln(), f64_of(&y).ln());
        let log_mean = 0.5 * (lx + ly) + ln_cosh(0.5 * rf * (lx - ly)) / rf;
        Value::Float((-log_mean).exp())
    })
}

fn normalizer_f64(r: f64, p_a: f64, p_b: f64) -> f64 {
    let x = p_a * (1.0 - p_a);
    let y = p_b * (1.0 - p_b);
    let (lx, ly) = (x.ln(), y.ln());
    let log_mean = if r == 0.0 {
        0.5 * (lx + ly)
    } else {
        0.5 * (lx + ly) + ln_cosh(0.5 * r * (lx - ly)) / r
    };
    (-log_mean).exp()
}

/// `(∂s/∂p_A, ∂s/∂p_B) / s` in closed form.
fn log_partials(r: f64, p_a: f64, p_b: f64) -> (f64, f64) {
    let x = p_a * (1.0 - p_a);
    let y = p_b * (1.0 - p_b);
    // weight of x in the power mean: x^r / (x^r + y^r)
    let w_a = 1.0 / (1.0 + (r * (y.ln() - x.ln())).exp());
    let w_b = 1.0 - w_a;
    ((2.0 * p_a - 1.0) / x * w_a, (2.0 * p_b - 1.0) / y * w_b)
}

/// Outcome of one normalizer condition over the grid.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionOutcome {
    pub index: u8,
    pub statement: &'static str,
    pub holds: bool,
    pub points_checked: usize,
    /// Smallest slack of an inequality, or the largest deviation of an identity.
    pub margin: f64,
    pub worst_point: Option<(String, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub r: String,
    pub grid_points: usize,
    pub conditions: Vec<ConditionOutcome>,
    /// Largest relative gap between closed-form and finite-difference partials.
    pub partials_max_error: f64,
    pub all_hold: bool,
}

struct Tracker {
    index: u8,
    statement: &'static str,
    holds: bool,
    points: usize,
    margin: f64,
    worst: Option<(String, String)>,
}

impl Tracker {
    fn new(index: u8, statement: &'static str, identity: bool) -> Self {
        Tracker {
            index,
            statement,
            holds: true,
            points: 0,
            margin: if identity { 0.0 } else { f64::INFINITY },
            worst: None,
        }
    }

    fn identity(&mut self, ok: bool, deviation: f64, at: (&BigRational, &BigRational)) {
        self.points += 1;
        if !ok {
            self.holds = false;
        }
        if deviation > self.margin || (!ok && self.worst.is_none()) {
            self.margin = self.margin.max(deviation);
            self.worst = Some((at.0.to_string(), at.1.to_string()));
        }
    }

    fn slack(&mut self, slack: f64, required: f64, at: (&BigRational, &BigRational)) {
        self.points += 1;
        if slack < required {
            self.holds = false;
        }
        if slack < self.margin {
            self.margin = slack;
            self.worst = Some((at.0.to_string(), at.1.to_string()));
        }
    }

    fn finish(self) -> ConditionOutcome {
        ConditionOutcome {
            index: self.index,
            statement: self.statement,
            holds: self.holds,
            points_checked: self.points,
            margin: self.margin,
            worst_point: self.worst,
        }
    }
}

fn same(a: &Value, b: &Value) -> (bool, f64) {
    let ok = a.compare(b, EPSILON) == std::cmp::Ordering::Equal;
    (ok, (a.to_f64() - b.to_f64()).abs())
}

/// Check the six conditions that characterize normalizers of measures
/// `s(p_A, p_B) (p_AB - p_A p_B)` with all properties except distance,
/// for the generalized-mean normalizer with exponent `r`.
pub fn check_gm_normalizer_conditions(r: &BigRational, grid: &[(BigRational, BigRational)]) -> Result<ConditionReport> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("grid".into()));
    }
    check_interior(grid)?;
    let one = BigRational::one();
    let rf = f64_of(r);
    let mut c1 = Tracker::new(1, "s(pA,pB) = s(pB,pA) = s(1-pA,1-pB)", true);
    let mut c2 = Tracker::new(2, "s(pA,pA) = s(pA,1-pA) = 1/(pA(1-pA))", true);
    let mut c3 = Tracker::new(3, "s < max{1/(pA pB), 1/((1-pA)(1-pB))} for pB != 1-pA", false);
    let mut c4 = Tracker::new(4, "s < max{1/(pA(1-pB)), 1/((1-pA)pB)} for pB != pA", false);
    let mut c5 = Tracker::new(5, "(pA ds/dpA + pB ds/dpB)/s within its interval", false);
    let mut c6 = Tracker::new(6, "((1-pA) ds/dpA - pB ds/dpB)/s within its interval", false);
    let mut partials_max_error: f64 = 0.0;

    for (pa, pb) in grid {
        let at = (pa, pb);
        let qa = &one - pa;
        let qb = &one - pb;
        let s = gm_normalizer(r, pa, pb)?;

        let (ok1, d1) = same(&s, &gm_normalizer(r, pb, pa)?);
        let (ok2, d2) = same(&s, &gm_normalizer(r, &qa, &qb)?);
        c1.identity(ok1 && ok2, d1.max(d2), at);

        let target = Value::Rational(one.clone() / (pa * &qa));
        let (ok3, d3) = same(&gm_normalizer(r, pa, pa)?, &target);
        let (ok4, d4) = same(&gm_normalizer(r, pa, &qa)?, &target);
        c2.identity(ok3 && ok4, d3.max(d4), at);

        let sf = s.to_f64();
        if *pb != qa {
            let bound = (one.clone() / (pa * pb)).max(one.clone() / (&qa * &qb));
            c3.slack(f64_of(&bound) - sf, STRICT_MARGIN, at);
        }
        if pb != pa {
            let bound = (one.clone() / (pa * &qb)).max(one.clone() / (&qa * pb));
            c4.slack(f64_of(&bound) - sf, STRICT_MARGIN, at);
        }

        let (a, b) = (f64_of(pa), f64_of(pb));
        let (la, lb) = log_partials(rf, a, b);
        let h = 1e-6;
        let fd_a = (normalizer_f64(rf, a + h, b) - normalizer_f64(rf, a - h, b)) / (2.0 * h) / sf;
        let fd_b = (normalizer_f64(rf, a, b + h) - normalizer_f64(rf, a, b - h)) / (2.0 * h) / sf;
        for (closed, fd) in [(la, fd_a), (lb, fd_b)] {
            partials_max_error = partials_max_error.max((closed - fd).abs() / closed.abs().max(1.0));
        }

        let q5 = a * la + b * lb;
        let lo5 = (-2.0f64).min(-1.0 - a * b / ((1.0 - a) * (1.0 - b)));
        let hi5 = ((2.0 * b - 1.0) / (1.0 - b)).max((2.0 * a - 1.0) / (1.0 - a));
        c5.slack((q5 - lo5).min(hi5 - q5), -EPSILON, at);

        let q6 = (1.0 - a) * la - b * lb;
        let lo6 = (2.0 - 1.0 / a).min(2.0 - 1.0 / (1.0 - b));
        let hi6 = (1.0 + b * (1.0 - a) / (a * (1.0 - b))).max(2.0);
        c6.slack((q6 - lo6).min(hi6 - q6), -EPSILON, at);
    }

    let conditions: Vec<ConditionOutcome> = [c1, c2, c3, c4, c5, c6].into_iter().map(Tracker::finish).collect();
    let all_hold = conditions.iter().all(|c| c.holds) && partials_max_error < 1e-5;
    Ok(ConditionReport {
        r: r.to_string(),
        grid_points: grid.len(),
        conditions,
        partials_max_error,
        all_hold,
    })
}
