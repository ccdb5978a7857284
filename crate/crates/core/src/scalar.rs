//! Exact coefficient ring: Laurent polynomials in the half-genus marker `h`
//! over arbitrary-precision rationals.
//!
//! The genus expansion lives in integer powers of `hbar = h^2`; odd powers of
//! `h` appear in intermediate operator calculus, so the ring is graded by all
//! of `Z`. No floating point is used anywhere.

use crate::error::{CalcError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Rational from an integer.
pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact factorial as a rational.
pub fn factorial(n: u32) -> BigRational {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

/// Binomial coefficient as a rational.
pub fn binomial(n: u32, k: u32) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k as u64 {
        acc *= BigInt::from(n as u64 - j);
    }
    BigRational::from_integer(acc) / factorial(k)
}

/// Integer power of a rational, exponent may be negative.
pub fn rat_pow(base: &BigRational, exp: i64) -> BigRational {
    if exp >= 0 {
        num_traits::pow::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow::pow(base.clone(), (-exp) as usize).recip()
    }
}

/// Bernoulli numbers with the convention B_1 = -1/2.
///
/// Computed by the defining recurrence sum_{j<=m} C(m+1, j) B_j = 0.
pub fn bernoulli(m: u32) -> BigRational {
    let mut b: Vec<BigRational> = Vec::with_capacity(m as usize + 1);
    for n in 0..=m {
        if n == 0 {
            b.push(BigRational::one());
            continue;
        }
        let mut sum = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            sum += binomial(n + 1, j as u32) * bj;
        }
        b.push(-sum / binomial(n + 1, n));
    }
    b.pop().unwrap()
}

/// Riemann zeta at negative integers: zeta(-m) = -B_{m+1} / (m+1).
pub fn zeta_neg(m: u32) -> BigRational {
    -bernoulli(m + 1) / rat_int(m as i64 + 1)
}

/// A Laurent polynomial in `h` with exact rational coefficients.
///
/// Zero coefficients are never stored, so equality of maps is equality of
/// ring elements and every iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScalarSeries {
    terms: BTreeMap<i32, BigRational>,
}

impl ScalarSeries {
    pub fn zero() -> Self {
        ScalarSeries { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        ScalarSeries::from_rational(BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut s = ScalarSeries::zero();
        if !r.is_zero() {
            s.terms.insert(0, r);
        }
        s
    }

    pub fn from_int(n: i64) -> Self {
        ScalarSeries::from_rational(rat_int(n))
    }

    /// The single term `r * h^exp`.
    pub fn term(r: BigRational, exp: i32) -> Self {
        let mut s = ScalarSeries::zero();
        if !r.is_zero() {
            s.terms.insert(exp, r);
        }
        s
    }

    /// `h^exp` with coefficient one.
    pub fn h_pow(exp: i32) -> Self {
        ScalarSeries::term(BigRational::one(), exp)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).map_or(false, |c| c.is_one())
    }

    /// Coefficient of `h^exp` (zero when absent).
    pub fn coeff(&self, exp: i32) -> BigRational {
        self.terms.get(&exp).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Iterate terms in ascending `h`-exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (&i32, &BigRational)> {
        self.terms.iter()
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add_term(&mut self, exp: i32, r: &BigRational) {
        if r.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigRational::zero);
        *entry += r;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    /// Multiply by `r * h^exp` in place.
    pub fn scale(&self, r: &BigRational, exp: i32) -> Self {
        if r.is_zero() {
            return ScalarSeries::zero();
        }
        let mut out = ScalarSeries::zero();
        for (e, c) in &self.terms {
            out.terms.insert(e + exp, c * r);
        }
        out
    }

    /// Discard terms with `h`-exponent outside `[lo, hi]`.
    pub fn project_window(&self, lo: i32, hi: i32) -> Self {
        let mut out = ScalarSeries::zero();
        for (e, c) in &self.terms {
            if (lo..=hi).contains(e) {
                out.terms.insert(*e, c.clone());
            }
        }
        out
    }

    /// Evaluate at `h = 1` (sum of all coefficients).
    pub fn eval_at_one(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.terms.values() {
            acc += c;
        }
        acc
    }

    /// Exponential of a series supported on strictly positive `h`-powers,
    /// expanded exactly up to `h^max_exp`.
    ///
    /// A nonzero coefficient at `h^e` with `e <= 0` is rejected: its
    /// exponential is not a Laurent polynomial.
    pub fn exp_positive(&self, max_exp: i32) -> Result<ScalarSeries> {
        if let Some(min) = self.min_exp() {
            if min <= 0 {
                return Err(CalcError::NonTerminating(format!(
                    "exp of scalar with h^{min} term"
                )));
            }
        }
        let x = self.project_window(i32::MIN, max_exp);
        let mut acc = ScalarSeries::one();
        let mut power = ScalarSeries::one();
        let mut k: u64 = 1;
        loop {
            power = (&power * &x).project_window(i32::MIN, max_exp);
            if power.is_zero() {
                break;
            }
            acc = &acc + &power.scale(&factorial(k as u32).recip(), 0);
            k += 1;
        }
        Ok(acc)
    }

    /// Logarithm of a series with constant term exactly 1, all other support
    /// on strictly positive `h`-powers, expanded up to `h^max_exp`.
    pub fn log_unit(&self, max_exp: i32) -> Result<ScalarSeries> {
        if !self.coeff(0).is_one() {
            return Err(CalcError::NonUnitConstant(format!(
                "scalar log with h^0 coefficient {}",
                self.coeff(0)
            )));
        }
        let mut x = self.clone();
        x.add_term(0, &-BigRational::one());
        if let Some(min) = x.min_exp() {
            if min <= 0 {
                return Err(CalcError::NonTerminating(format!(
                    "log of scalar with h^{min} term"
                )));
            }
        }
        let x = x.project_window(i32::MIN, max_exp);
        let mut acc = ScalarSeries::zero();
        let mut power = ScalarSeries::one();
        let mut k: i64 = 1;
        loop {
            power = (&power * &x).project_window(i32::MIN, max_exp);
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = &acc + &power.scale(&rat(sign, k), 0);
            k += 1;
        }
        Ok(acc)
    }
}

impl Add for &ScalarSeries {
    type Output = ScalarSeries;
    fn add(self, rhs: &ScalarSeries) -> ScalarSeries {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl AddAssign<&ScalarSeries> for ScalarSeries {
    fn add_assign(&mut self, rhs: &ScalarSeries) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c);
        }
    }
}

impl Sub for &ScalarSeries {
    type Output = ScalarSeries;
    fn sub(self, rhs: &ScalarSeries) -> ScalarSeries {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, &-c.clone());
        }
        out
    }
}

impl Neg for &ScalarSeries {
    type Output = ScalarSeries;
    fn neg(self) -> ScalarSeries {
        let mut out = ScalarSeries::zero();
        for (e, c) in &self.terms {
            out.terms.insert(*e, -c.clone());
        }
        out
    }
}

impl Mul for &ScalarSeries {
    type Output = ScalarSeries;
    fn mul(self, rhs: &ScalarSeries) -> ScalarSeries {
        let mut out = ScalarSeries::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, &(ca * cb));
            }
        }
        out
    }
}

impl fmt::Display for ScalarSeries {
    /// Renders as a sum of `coeff*h^exp` factors in ascending exponent order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            match (*e, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "h")?,
                (1, false) => write!(f, "{a}*h")?,
                (_, true) => write!(f, "h^{e}")?,
                (_, false) => write!(f, "{a}*h^{e}")?,
            }
        }
        Ok(())
    }
}
