//! Exact integer affine expressions over the step counter `n` and named
//! game parameters, plus the decision procedure for "non-negative for every
//! `n >= 0` and every parameter at or above its lower bound".

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bounds of the named parameters, e.g. `v >= 1`.
pub type ParamBounds = BTreeMap<String, i64>;

/// Concrete parameter values.
pub type Valuation = BTreeMap<String, i64>;

/// `coeff_n * n + sum(coeff_p * p) + constant`, with zero coefficients never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffineExpr {
    coeff_n: i64,
    params: BTreeMap<String, i64>,
    constant: i64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    /// The step counter `n`.
    pub fn n() -> Self {
        Self {
            coeff_n: 1,
            ..Self::default()
        }
    }

    pub fn param(name: impl Into<String>) -> Self {
        let mut params = BTreeMap::new();
        params.insert(name.into(), 1);
        Self {
            params,
            ..Self::default()
        }
    }

    pub fn coeff_n(&self) -> i64 {
        self.coeff_n
    }

    pub fn coeff(&self, param: &str) -> i64 {
        self.params.get(param).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> i64 {
        self.constant
    }

    /// Parameters with a non-zero coefficient, in name order.
    pub fn params(&self) -> impl Iterator<Item = (&str, i64)> {
        self.params.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_zero(&self) -> bool {
        self.coeff_n == 0 && self.params.is_empty() && self.constant == 0
    }

    /// True when the expression does not mention `n`.
    pub fn is_step_free(&self) -> bool {
        self.coeff_n == 0
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        Self {
            coeff_n: self.coeff_n * k,
            params: self.params.iter().map(|(p, c)| (p.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    /// Replaces `n` with `n + delta`.
    pub fn shift_n(&self, delta: u64) -> Self {
        let mut out = self.clone();
        out.constant += self.coeff_n * delta as i64;
        out
    }

    /// Replaces `n` with the concrete value `k`.
    pub fn substitute_n(&self, k: i64) -> Self {
        Self {
            coeff_n: 0,
            params: self.params.clone(),
            constant: self.constant + self.coeff_n * k,
        }
    }

    /// Replaces every parameter present in `values`; others stay symbolic.
    pub fn substitute_params(&self, values: &Valuation) -> Self {
        let mut out = Self {
            coeff_n: self.coeff_n,
            params: BTreeMap::new(),
            constant: self.constant,
        };
        for (p, c) in &self.params {
            match values.get(p) {
                Some(x) => out.constant += c * x,
                None => {
                    out.params.insert(p.clone(), *c);
                }
            }
        }
        out
    }

    /// Fully concrete evaluation.
    pub fn eval(&self, n: i64, values: &Valuation) -> Result<i64> {
        let mut acc = self.constant + self.coeff_n * n;
        for (p, c) in &self.params {
            let x = values.get(p).ok_or_else(|| Error::ParamUnbound(p.clone()))?;
            acc += c * x;
        }
        Ok(acc)
    }

    fn add_param(&mut self, name: &str, c: i64) {
        let slot = self.params.entry(name.to_string()).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.params.remove(name);
        }
    }
}

impl Add for &AffineExpr {
    type Output = AffineExpr;

    fn add(self, rhs: &AffineExpr) -> AffineExpr {
        let mut out = self.clone();
        out.coeff_n += rhs.coeff_n;
        out.constant += rhs.constant;
        for (p, c) in &rhs.params {
            out.add_param(p, *c);
        }
        out
    }
}

impl Add for AffineExpr {
    type Output = AffineExpr;

    fn add(self, rhs: AffineExpr) -> AffineExpr {
        &self + &rhs
    }
}

impl Neg for &AffineExpr {
    type Output = AffineExpr;

    fn neg(self) -> AffineExpr {
        self.scale(-1)
    }
}

impl Neg for AffineExpr {
    type Output = AffineExpr;

    fn neg(self) -> AffineExpr {
        self.scale(-1)
    }
}

impl Sub for &AffineExpr {
    type Output = AffineExpr;

    fn sub(self, rhs: &AffineExpr) -> AffineExpr {
        self + &(-rhs)
    }
}

impl Sub for AffineExpr {
    type Output = AffineExpr;

    fn sub(self, rhs: AffineExpr) -> AffineExpr {
        &self - &rhs
    }
}

impl Mul<i64> for &AffineExpr {
    type Output = AffineExpr;

    fn mul(self, k: i64) -> AffineExpr {
        self.scale(k)
    }
}

impl Mul<i64> for AffineExpr {
    type Output = AffineExpr;

    fn mul(self, k: i64) -> AffineExpr {
        self.scale(k)
    }
}

impl From<i64> for AffineExpr {
    fn from(c: i64) -> Self {
        AffineExpr::constant(c)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, first: bool, coeff: i64, atom: Option<&str>) -> fmt::Result {
    let mag = coeff.unsigned_abs();
    match (first, coeff < 0) {
        (true, true) => write!(f, "-")?,
        (true, false) => {}
        (false, true) => write!(f, " - ")?,
        (false, false) => write!(f, " + ")?,
    }
    match atom {
        Some(a) if mag == 1 => write!(f, "{a}"),
        Some(a) => write!(f, "{mag}*{a}"),
        None => write!(f, "{mag}"),
    }
}

impl fmt::Display for AffineExpr {
    /// Normal form: `n` term, then parameters by name, then the constant.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        if self.coeff_n != 0 {
            write_term(f, first, self.coeff_n, Some("n"))?;
            first = false;
        }
        for (p, c) in &self.params {
            write_term(f, first, *c, Some(p))?;
            first = false;
        }
        if self.constant != 0 {
            write_term(f, first, self.constant, None)?;
        }
        Ok(())
    }
}

/// Coefficient-wise evidence that `e >= 0` over `n >= 0` and bounded parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonnegJustification {
    pub coeff_n: i64,
    pub param_coeffs: BTreeMap<String, i64>,
    /// Value at `n = 0` with every parameter at its lower bound.
    pub floor_value: i64,
    pub holds: bool,
}

/// A point of the quantified domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainPoint {
    pub n: u64,
    pub params: Valuation,
}

fn floor_value(e: &AffineExpr, bounds: &ParamBounds) -> Result<i64> {
    let mut acc = e.constant;
    for (p, c) in &e.params {
        let lb = bounds.get(p).ok_or_else(|| Error::ParamUnbound(p.clone()))?;
        acc += c * lb;
    }
    Ok(acc)
}

pub fn nonneg_justification(e: &AffineExpr, bounds: &ParamBounds) -> Result<NonnegJustification> {
    let floor_value = floor_value(e, bounds)?;
    let holds = e.coeff_n >= 0 && e.params.values().all(|c| *c >= 0) && floor_value >= 0;
    Ok(NonnegJustification {
        coeff_n: e.coeff_n,
        param_coeffs: e.params.clone(),
        floor_value,
        holds,
    })
}

/// Decides `e >= 0` for every integer `n >= 0` and every parameter value at
/// or above its bound.
///
/// The domain is a translated orthant, so the minimum over it is attained at
/// the corner unless some coefficient is negative, in which case the
/// expression is unbounded below.
pub fn affine_forall_nonneg(e: &AffineExpr, bounds: &ParamBounds) -> Result<bool> {
    Ok(nonneg_justification(e, bounds)?.holds)
}

/// The smallest-`n` point (parameters as low as possible) where `e < 0`, if any.
pub fn counterexample(e: &AffineExpr, bounds: &ParamBounds) -> Result<Option<DomainPoint>> {
    let floor = floor_value(e, bounds)?;
    let mut params: Valuation = e
        .params
        .keys()
        .map(|p| (p.clone(), bounds[p]))
        .collect();
    if floor < 0 {
        return Ok(Some(DomainPoint { n: 0, params }));
    }
    if e.coeff_n < 0 {
        let n = floor / -e.coeff_n + 1;
        return Ok(Some(DomainPoint { n: n as u64, params }));
    }
    if let Some((p, c)) = e.params.iter().find(|(_, c)| **c < 0) {
        *params.get_mut(p).expect("parameter present") += floor / -c + 1;
        return Ok(Some(DomainPoint { n: 0, params }));
    }
    Ok(None)
}
