//! Measure registry, identifiers and dispatch.
//!
//! A [`Measure`] is a base formula plus an optional averaging scheme. Stable
//! identifiers follow `name[:param=value][:scheme]`, for example `acc`,
//! `f:beta=1`, `gm:r=-1:macro`.

pub mod formulas;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::averaging::AveragingScheme;
use crate::confusion::{BinaryCounts, ConfusionMatrix};
use crate::error::{Error, Result};
use crate::value::{int, ratio, Value};

pub use formulas::{
    accuracy, balanced_accuracy, cd_prime, cohens_kappa, confusion_entropy, correlation_distance, f_beta,
    generalized_means, jaccard, matthews_cc, symmetric_balanced_accuracy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Similarity,
    Dissimilarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arity {
    BinaryOnly,
    MulticlassNative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericClass {
    Exact,
    Transcendental,
}

/// The underlying formula of a measure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BaseMeasure {
    Accuracy,
    BalancedAccuracy,
    SymmetricBalancedAccuracy,
    CohensKappa,
    Matthews,
    ConfusionEntropy,
    FBeta(BigRational),
    Jaccard,
    GeneralizedMean(BigRational),
    CorrelationDistance,
    CdPrime,
    /// `TP + TN - FP - FN`; audit only.
    SignedAgreement,
    /// `1{TP + TN > 0}`; audit only.
    AgreementIndicator,
    /// `TP - (TP + FP)(TP + FN) / n`; audit only.
    CenteredTruePositives,
}

impl BaseMeasure {
    pub fn arity(&self) -> Arity {
        use BaseMeasure::*;
        match self {
            FBeta(_) | Jaccard | GeneralizedMean(_) | SignedAgreement | AgreementIndicator | CenteredTruePositives => {
                Arity::BinaryOnly
            }
            _ => Arity::MulticlassNative,
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            BaseMeasure::ConfusionEntropy | BaseMeasure::CorrelationDistance | BaseMeasure::CdPrime => {
                Orientation::Dissimilarity
            }
            _ => Orientation::Similarity,
        }
    }

    pub fn numeric_class(&self) -> NumericClass {
        match self {
            BaseMeasure::ConfusionEntropy | BaseMeasure::CorrelationDistance | BaseMeasure::CdPrime => {
                NumericClass::Transcendental
            }
            BaseMeasure::GeneralizedMean(r) if !is_exact_exponent(r) => NumericClass::Transcendental,
            _ => NumericClass::Exact,
        }
    }

    pub fn audit_only(&self) -> bool {
        matches!(
            self,
            BaseMeasure::SignedAgreement | BaseMeasure::AgreementIndicator | BaseMeasure::CenteredTruePositives
        )
    }

    /// Evaluate on a binary problem.
    pub fn evaluate_binary(&self, bc: &BinaryCounts) -> Result<Value> {
        use BaseMeasure::*;
        match self {
            FBeta(beta) => f_beta(bc, beta),
            Jaccard => jaccard(bc),
            GeneralizedMean(r) => generalized_means(bc, r),
            SignedAgreement => Ok(formulas::signed_agreement(bc)),
            AgreementIndicator => Ok(formulas::agreement_indicator(bc)),
            CenteredTruePositives => formulas::centered_true_positives(bc),
            native => native.evaluate_matrix(&bc.to_matrix()),
        }
    }

    /// Evaluate on an `m x m` matrix; binary-only formulas require `m = 2`.
    pub fn evaluate_matrix(&self, c: &ConfusionMatrix) -> Result<Value> {
        use BaseMeasure::*;
        match self {
            Accuracy => accuracy(c),
            BalancedAccuracy => balanced_accuracy(c),
            SymmetricBalancedAccuracy => symmetric_balanced_accuracy(c),
            CohensKappa => cohens_kappa(c),
            Matthews => matthews_cc(c),
            ConfusionEntropy => confusion_entropy(c),
            CorrelationDistance => correlation_distance(c),
            CdPrime => cd_prime(c),
            binary_only => match c.binary() {
                Some(bc) => {
                    if bc.total().is_zero() {
                        return Err(Error::EmptyMatrix);
                    }
                    binary_only.evaluate_binary(&bc)
                }
                None => Err(Error::Arity {
                    measure: binary_only.id(),
                    classes: c.m(),
                }),
            },
        }
    }

    /// Stable identifier without scheme suffix.
    pub fn id(&self) -> String {
        use BaseMeasure::*;
        match self {
            Accuracy => "acc".into(),
            BalancedAccuracy => "ba".into(),
            SymmetricBalancedAccuracy => "sba".into(),
            CohensKappa => "kappa".into(),
            Matthews => "cc".into(),
            ConfusionEntropy => "ce".into(),
            FBeta(b) => format!("f:beta={}", fmt_param(b)),
            Jaccard => "jaccard".into(),
            GeneralizedMean(r) => format!("gm:r={}", fmt_param(r)),
            CorrelationDistance => "cd".into(),
            CdPrime => "cdprime".into(),
            SignedAgreement => "signed".into(),
            AgreementIndicator => "indicator".into(),
            CenteredTruePositives => "centered-tp".into(),
        }
    }

    /// Short display name used in reports.
    pub fn name(&self) -> String {
        use BaseMeasure::*;
        match self {
            Accuracy => "Acc".into(),
            BalancedAccuracy => "BA".into(),
            SymmetricBalancedAccuracy => "SBA".into(),
            CohensKappa => "Kappa".into(),
            Matthews => "CC".into(),
            ConfusionEntropy => "CE".into(),
            FBeta(b) => format!("F{}", fmt_param(b)),
            Jaccard => "J".into(),
            GeneralizedMean(r) => format!("GM{}", fmt_param(r)),
            CorrelationDistance => "CD".into(),
            CdPrime => "CD'".into(),
            SignedAgreement => "TP+TN-FP-FN".into(),
            AgreementIndicator => "1{TP+TN>0}".into(),
            CenteredTruePositives => "TP-E[TP]".into(),
        }
    }
}

fn is_exact_exponent(r: &BigRational) -> bool {
    r.is_integer() && {
        let k = r.to_integer();
        k == BigInt::from(1) || k == BigInt::from(-1) || k == BigInt::from(2) || k == BigInt::from(-2)
    }
}

fn fmt_param(q: &BigRational) -> String {
    if q.is_integer() {
        return q.to_integer().to_string();
    }
    // prefer a terminating decimal when one exists
    let mut den = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut digits = 0usize;
    while (&den % &two).is_zero() || (&den % &five).is_zero() {
        if (&den % &two).is_zero() {
            den /= &two;
        }
        if (&den % &five).is_zero() {
            den /= &five;
        }
        digits += 1;
    }
    if den.is_one() && digits <= 12 {
        let scaled = q * BigRational::from_integer(BigInt::from(10).pow(digits as u32));
        let int_part = scaled.to_integer();
        let neg = int_part.is_negative();
        let mut s = int_part.abs().to_string();
        while s.len() <= digits {
            s.insert(0, '0');
        }
        let split = s.len() - digits;
        let text = format!("{}.{}", &s[..split], s[split..].trim_end_matches('0'));
        return if neg { format!("-{text}") } else { text };
    }
    q.to_string()
}

/// Parse an exact rational from `3`, `-1`, `0.5`, `1/3` or `1e-9`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameter(format!("not a number: {s}"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = BigRational::from_integer(digits);
    if scale >= 0 {
        q *= BigRational::from_integer(ten.pow(scale as u32));
    } else {
        q /= BigRational::from_integer(ten.pow((-scale) as u32));
    }
    Ok(if neg { -q } else { q })
}

/// Identity and metadata of a measure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasureDescriptor {
    pub id: String,
    pub name: String,
    pub arity: Arity,
    pub orientation: Orientation,
    pub numeric_class: NumericClass,
    pub scheme: Option<AveragingScheme>,
    pub audit_only: bool,
}

/// A base formula, optionally extended to many classes by averaging.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measure {
    pub base: BaseMeasure,
    pub scheme: Option<AveragingScheme>,
}

impl Measure {
    pub fn new(base: BaseMeasure) -> Self {
        Measure { base, scheme: None }
    }

    pub fn averaged(base: BaseMeasure, scheme: AveragingScheme) -> Self {
        Measure {
            base,
            scheme: Some(scheme),
        }
    }

    pub fn with_scheme(&self, scheme: AveragingScheme) -> Self {
        Measure::averaged(self.base.clone(), scheme)
    }

    pub fn accuracy() -> Self {
        Measure::new(BaseMeasure::Accuracy)
    }
    pub fn balanced_accuracy() -> Self {
        Measure::new(BaseMeasure::BalancedAccuracy)
    }
    pub fn sba() -> Self {
        Measure::new(BaseMeasure::SymmetricBalancedAccuracy)
    }
    pub fn kappa() -> Self {
        Measure::new(BaseMeasure::CohensKappa)
    }
    pub fn cc() -> Self {
        Measure::new(BaseMeasure::Matthews)
    }
    pub fn ce() -> Self {
        Measure::new(BaseMeasure::ConfusionEntropy)
    }
    pub fn f1() -> Self {
        Measure::new(BaseMeasure::FBeta(int(1)))
    }
    pub fn jaccard() -> Self {
        Measure::new(BaseMeasure::Jaccard)
    }
    pub fn gm(r: i64) -> Self {
        Measure::new(BaseMeasure::GeneralizedMean(int(r)))
    }
    pub fn cd() -> Self {
        Measure::new(BaseMeasure::CorrelationDistance)
    }
    pub fn cd_prime() -> Self {
        Measure::new(BaseMeasure::CdPrime)
    }

    /// The ten measures of the binary property table, in table order.
    pub fn table_measures() -> Vec<Measure> {
        vec![
            Measure::f1(),
            Measure::jaccard(),
            Measure::cc(),
            Measure::accuracy(),
            Measure::balanced_accuracy(),
            Measure::kappa(),
            Measure::ce(),
            Measure::sba(),
            Measure::gm(1),
            Measure::cd(),
        ]
    }

    /// Measures compared in the indistinguishability analysis.
    pub fn distinguish_measures() -> Vec<Measure> {
        vec![
            Measure::accuracy(),
            Measure::balanced_accuracy(),
            Measure::f1(),
            Measure::kappa(),
            Measure::ce(),
            Measure::gm(1),
            Measure::cc(),
            Measure::sba(),
        ]
    }

    /// Every public measure with default parameters.
    pub fn registry() -> Vec<Measure> {
        let mut v = Measure::table_measures();
        v.push(Measure::cd_prime());
        v
    }

    /// Hidden measures used only to exhibit averaging counterexamples.
    pub fn audit_only_measures() -> Vec<Measure> {
        vec![
            Measure::new(BaseMeasure::SignedAgreement),
            Measure::new(BaseMeasure::AgreementIndicator),
            Measure::new(BaseMeasure::CenteredTruePositives),
        ]
    }

    pub fn arity(&self) -> Arity {
        if self.scheme.is_some() {
            Arity::MulticlassNative
        } else {
            self.base.arity()
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.base.orientation()
    }

    pub fn numeric_class(&self) -> NumericClass {
        self.base.numeric_class()
    }

    pub fn is_exact(&self) -> bool {
        self.numeric_class() == NumericClass::Exact
    }

    pub fn id(&self) -> String {
        match self.scheme {
            Some(s) => format!("{}:{}", self.base.id(), s),
            None => self.base.id(),
        }
    }

    pub fn name(&self) -> String {
        match self.scheme {
            Some(s) => format!("{}^{}", self.base.name(), s),
            None => self.base.name(),
        }
    }

    pub fn descriptor(&self) -> MeasureDescriptor {
        MeasureDescriptor {
            id: self.id(),
            name: self.name(),
            arity: self.arity(),
            orientation: self.orientation(),
            numeric_class: self.numeric_class(),
            scheme: self.scheme,
            audit_only: self.base.audit_only(),
        }
    }

    /// Raw value on the measure's own scale.
    pub fn evaluate(&self, c: &ConfusionMatrix) -> Result<Value> {
        match self.scheme {
            None => self.base.evaluate_matrix(c),
            Some(s) => s.extend(|bc| self.base.evaluate_binary(bc), c),
        }
    }

    /// Value with dissimilarities negated, so that larger always means closer.
    pub fn oriented(&self, c: &ConfusionMatrix) -> Result<Value> {
        let v = self.evaluate(c)?;
        Ok(match self.orientation() {
            Orientation::Similarity => v,
            Orientation::Dissimilarity => v.neg(),
        })
    }

    /// Upper bound attained exactly on diagonal matrices, on the oriented scale.
    pub fn c_max(&self) -> Option<Value> {
        use BaseMeasure::*;
        match self.base {
            SignedAgreement | AgreementIndicator | CenteredTruePositives => None,
            ConfusionEntropy | CorrelationDistance | CdPrime => Some(Value::zero()),
            _ => Some(Value::one()),
        }
    }

    /// Constant attained exactly on zero-diagonal matrices with `m` classes, if any.
    pub fn c_min(&self, m: usize) -> Option<Value> {
        use BaseMeasure::*;
        if self.scheme.is_some() {
            return None;
        }
        match (&self.base, m) {
            (Accuracy | BalancedAccuracy | SymmetricBalancedAccuracy, _) => Some(Value::zero()),
            (GeneralizedMean(_), 2) | (Matthews, 2) => Some(Value::from_int(-1)),
            (CorrelationDistance, 2) => Some(Value::from_int(-1)),
            (CdPrime, 2) => Some(Value::from_int(-2)),
            (AgreementIndicator, 2) => Some(Value::zero()),
            _ => None,
        }
    }

    /// Expected value under random predictions with fixed class sizes, if constant.
    pub fn c_base(&self, m: usize) -> Option<Value> {
        use BaseMeasure::*;
        if self.scheme == Some(AveragingScheme::Micro) {
            return None;
        }
        match self.base {
            Matthews | CohensKappa | GeneralizedMean(_) | CenteredTruePositives => Some(Value::zero()),
            BalancedAccuracy | SymmetricBalancedAccuracy => {
                let classes = if self.scheme.is_some() { 2 } else { m };
                Some(Value::Rational(ratio(1, classes as i64)))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.id())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_measure(s)
    }
}

/// Parse `name[:param=value][:scheme]`.
pub fn parse_measure(text: &str) -> Result<Measure> {
    let unknown = || Error::UnknownMeasure(text.to_string());
    let mut parts = text.trim().split(':');
    let name = parts.next().ok_or_else(unknown)?.to_ascii_lowercase();
    let mut param: Option<(String, BigRational)> = None;
    let mut scheme = None;
    for part in parts {
        if let Some((k, v)) = part.split_once('=') {
            if param.is_some() || scheme.is_some() {
                return Err(unknown());
            }
            param = Some((k.trim().to_ascii_lowercase(), parse_rational(v)?));
        } else {
            if scheme.is_some() {
                return Err(unknown());
            }
            scheme = Some(part.trim().parse::<AveragingScheme>().map_err(|_| unknown())?);
        }
    }
    let expect = |key: &str, p: Option<(String, BigRational)>| -> Result<BigRational> {
        match p {
            Some((k, v)) if k == key => Ok(v),
            Some((k, _)) => Err(Error::InvalidParameter(format!("{name} takes {key}, not {k}"))),
            None => Err(Error::InvalidParameter(format!("{name} requires {key}=<value>"))),
        }
    };
    let no_param = |p: &Option<(String, BigRational)>| -> Result<()> {
        match p {
            Some((k, _)) => Err(Error::InvalidParameter(format!("{name} takes no parameter {k}"))),
            None => Ok(()),
        }
    };
    use BaseMeasure::*;
    let base = match name.as_str() {
        "f" => {
            let beta = expect("beta", param)?;
            if !beta.is_positive() {
                return Err(Error::InvalidParameter("beta must be positive".into()));
            }
            FBeta(beta)
        }
        "gm" => {
            let r = expect("r", param)?;
            if r.is_zero() {
                return Err(Error::InvalidParameter("r must be nonzero; r = 0 is cc".into()));
            }
            GeneralizedMean(r)
        }
        other => {
            no_param(&param)?;
            match other {
                "acc" => Accuracy,
                "ba" => BalancedAccuracy,
                "sba" => SymmetricBalancedAccuracy,
                "kappa" => CohensKappa,
                "cc" => Matthews,
                "ce" => ConfusionEntropy,
                "f1" => FBeta(BigRational::one()),
                "jaccard" | "j" => Jaccard,
                "cd" => CorrelationDistance,
                "cdprime" => CdPrime,
                "signed" => SignedAgreement,
                "indicator" => AgreementIndicator,
                "centered-tp" => CenteredTruePositives,
                _ => return Err(unknown()),
            }
        }
    };
    Ok(Measure { base, scheme })
}

/// Parse a comma-separated list; `all` expands to the public registry.
pub fn parse_measure_list(text: &str) -> Result<Vec<Measure>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            out.extend(Measure::registry());
        } else {
            out.push(parse_measure(item)?);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("measure list".into()));
    }
    Ok(out)
}
