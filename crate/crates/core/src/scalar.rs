//! Number types the engine is generic over.
//!
//! Every indicator is a rational function of the kernel spectrum, so the
//! whole pipeline only needs ordered-field operations. Four concrete types are
//! provided:
//!
//! * [`Rational`]: arbitrary-precision rationals, exact.
//! * [`Surd`]: exact elements `a + b·√d` of a real quadratic field, enough to
//!   represent spectra such as `(1 ± √3)/2`.
//! * [`Extended`]: double-double floats (about 106 significand bits).
//! * `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Ordered field used by the geometry and quadrature code.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;
    const NAME: &'static str;

    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn parse_str(s: &str) -> Result<Self>;
    /// Exact textual form (`p/q`, or `a+b*sqrt(d)`), when the type is exact.
    fn exact_string(&self) -> Option<String>;

    /// Decimal rendering with 17 significant digits.
    fn decimal_string(&self) -> String {
        format_f64(self.to_f64())
    }

    fn from_f64(x: f64) -> Self {
        Self::from_rational(&Rational::from_float(x).expect("finite float"))
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn from_bigint(v: &BigInt) -> Self {
        Self::from_rational(&Rational::from_integer(v.clone()))
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Sign with an absolute tolerance; exact types ignore `tol`.
    fn sign_tol(&self, tol: f64) -> Ordering {
        if Self::EXACT {
            self.partial_cmp(&Self::zero()).unwrap_or(Ordering::Equal)
        } else {
            let v = self.to_f64();
            if v.abs() <= tol {
                Ordering::Equal
            } else if v > 0.0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.clone() - other.clone()).sign_tol(tol) == Ordering::Equal
    }

    /// String used in JSON output: exact when available, decimal otherwise.
    fn to_json_string(&self) -> String {
        self.exact_string().unwrap_or_else(|| self.decimal_string())
    }
}

/// Float scalars that also provide the transcendental functions needed by
/// the moduli charts.
pub trait RealScalar: Scalar {
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn pi() -> Self;
}

// ---------------------------------------------------------------------------
// f64

impl Scalar for f64 {
    const EXACT: bool = false;
    const NAME: &'static str = "double";

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn parse_str(s: &str) -> Result<Self> {
        if s.contains("sqrt") {
            return Ok(Surd::parse(s)?.to_f64());
        }
        Ok(ToPrimitive::to_f64(&parse_rational(s)?).unwrap_or(f64::NAN))
    }
    fn exact_string(&self) -> Option<String> {
        None
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl RealScalar for f64 {
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
}

// ---------------------------------------------------------------------------
// double-double

/// Double-double float. Addition, multiplication and square roots come from
/// `twofloat`; division and the trigonometric functions are done here since
/// the library versions only reach double accuracy.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Extended(TwoFloat);

/// `π` to double-double precision.
const PI_HI: f64 = std::f64::consts::PI;
const PI_LO: f64 = 1.2246467991473532e-16;

impl Extended {
    pub fn new(hi: f64, lo: f64) -> Self {
        Extended(TwoFloat::new_add(hi, lo))
    }

    pub fn hi(&self) -> f64 {
        self.0.hi()
    }

    pub fn lo(&self) -> f64 {
        self.0.lo()
    }

    fn scale(self, k: f64) -> Self {
        Extended(self.0 * k)
    }

    fn div_f64(self, k: f64) -> Self {
        Extended(self.0 / k)
    }

    /// Taylor series on `|x| ≤ π/4` after reduction by multiples of `π/2`.
    fn sin_cos(self) -> (Self, Self) {
        let half_pi = Extended::new(PI_HI, PI_LO).scale(0.5);
        let k = (self.to_f64() / std::f64::consts::FRAC_PI_2).round();
        let r = self - half_pi.scale(k);
        let r2 = r * r;
        let (mut s, mut c) = (r, Extended::one());
        let (mut ts, mut tc) = (r, Extended::one());
        for i in 1..40 {
            let i = i as f64;
            ts = -(ts * r2).div_f64((2.0 * i) * (2.0 * i + 1.0));
            tc = -(tc * r2).div_f64((2.0 * i - 1.0) * (2.0 * i));
            s = s + ts;
            c = c + tc;
            if tc.hi().abs() < 1e-36 && ts.hi().abs() < 1e-36 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl Add for Extended {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Extended(self.0 + o.0)
    }
}

impl Sub for Extended {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Extended(self.0 - o.0)
    }
}

impl Mul for Extended {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Extended(self.0 * o.0)
    }
}

impl Div for Extended {
    type Output = Self;
    /// Long division with three double-precision quotient digits.
    fn div(self, o: Self) -> Self {
        let b = o.0;
        let q1 = self.0.hi() / b.hi();
        if !q1.is_finite() || q1 == 0.0 {
            return Extended(TwoFloat::from(q1));
        }
        let r = self.0 - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        Extended(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl Neg for Extended {
    type Output = Self;
    fn neg(self) -> Self {
        Extended(-self.0)
    }
}

impl Zero for Extended {
    fn zero() -> Self {
        Extended(TwoFloat::from(0.0))
    }
    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0
    }
}

impl One for Extended {
    fn one() -> Self {
        Extended(TwoFloat::from(1.0))
    }
}

fn extended_to_rational(x: &Extended) -> Rational {
    let hi = Rational::from_float(x.hi()).unwrap_or_else(Rational::zero);
    let lo = Rational::from_float(x.lo()).unwrap_or_else(Rational::zero);
    hi + lo
}

impl Scalar for Extended {
    const EXACT: bool = false;
    const NAME: &'static str = "extended";

    fn from_i64(v: i64) -> Self {
        let hi = v as f64;
        let lo = (v - hi as i64) as f64;
        Extended::new(hi, lo)
    }
    fn from_rational(r: &Rational) -> Self {
        let hi = ToPrimitive::to_f64(r).unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return Extended(TwoFloat::from(hi));
        }
        let rest = r - Rational::from_float(hi).expect("finite");
        let lo = ToPrimitive::to_f64(&rest).unwrap_or(0.0);
        Extended::new(hi, lo)
    }
    fn to_f64(&self) -> f64 {
        self.hi() + self.lo()
    }
    fn from_f64(x: f64) -> Self {
        Extended(TwoFloat::from(x))
    }
    fn parse_str(s: &str) -> Result<Self> {
        if s.contains("sqrt") {
            return Ok(Surd::parse(s)?.to_extended());
        }
        Ok(Self::from_rational(&parse_rational(s)?))
    }
    fn exact_string(&self) -> Option<String> {
        None
    }
    fn decimal_string(&self) -> String {
        format_rational(&extended_to_rational(self), 17)
    }
}

impl RealScalar for Extended {
    fn sqrt(&self) -> Self {
        Extended(self.0.sqrt())
    }
    fn sin(&self) -> Self {
        self.sin_cos().0
    }
    fn cos(&self) -> Self {
        self.sin_cos().1
    }
    fn pi() -> Self {
        Extended::new(PI_HI, PI_LO)
    }
}

// ---------------------------------------------------------------------------
// rationals

impl Scalar for Rational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn parse_str(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn exact_string(&self) -> Option<String> {
        Some(rational_string(self))
    }
    fn decimal_string(&self) -> String {
        format_rational(self, 17)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

// ---------------------------------------------------------------------------
// quadratic surds

/// Exact real number `rational + radical·√d`.
///
/// `d` is square-free; values with `radical == 0` carry `d == 0` and mix
/// with any field. Combining two irrational values from different fields is a
/// contract violation and panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    rational: Rational,
    radical: Rational,
    d: u64,
}

impl Surd {
    pub fn new(rational: Rational, radical: Rational, d: u64) -> Self {
        if radical.is_zero() || d == 0 {
            return Self::rational(rational);
        }
        let (square, free) = split_square(d);
        if free == 1 {
            return Self::rational(rational + radical * Rational::from_integer(square.into()));
        }
        Self {
            rational,
            radical: radical * Rational::from_integer(square.into()),
            d: free,
        }
    }

    pub fn rational(r: Rational) -> Self {
        Self {
            rational: r,
            radical: Rational::zero(),
            d: 0,
        }
    }

    /// `√d`.
    pub fn sqrt_of(d: u64) -> Self {
        Self::new(Rational::zero(), Rational::one(), d)
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rational
    }

    pub fn radical_part(&self) -> &Rational {
        &self.radical
    }

    /// Square-free radicand, 0 for rational values.
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.radical.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        Self {
            rational: self.rational.clone(),
            radical: -self.radical.clone(),
            d: self.d,
        }
    }

    /// Field norm `a² − d·b²`.
    pub fn norm(&self) -> Rational {
        &self.rational * &self.rational
            - &self.radical * &self.radical * Rational::from_integer(self.d.into())
    }

    fn field(a: &Surd, b: &Surd) -> u64 {
        match (a.d, b.d) {
            (0, d) | (d, 0) => d,
            (x, y) if x == y => x,
            (x, y) => panic!("mixed quadratic fields sqrt({x}) and sqrt({y})"),
        }
    }

    fn signum(&self) -> Ordering {
        let a = self.rational.cmp(&Rational::zero());
        let b = self.radical.cmp(&Rational::zero());
        match (a, b) {
            (x, Ordering::Equal) => x,
            (Ordering::Equal, y) => y,
            (x, y) if x == y => x,
            (x, _) => {
                // opposite signs: compare a² with d·b²
                let aa = &self.rational * &self.rational;
                let bb =
                    &self.radical * &self.radical * Rational::from_integer(self.d.into());
                match aa.cmp(&bb) {
                    Ordering::Greater => x,
                    Ordering::Less => x.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn to_extended(&self) -> Extended {
        let a = Extended::from_rational(&self.rational);
        if self.is_rational() {
            return a;
        }
        let root = RealScalar::sqrt(&Extended::from_i64(self.d as i64));
        a + Extended::from_rational(&self.radical) * root
    }

    /// Parses `r`, `r*sqrt(d)`, `sqrt(d)` or `r±r*sqrt(d)` where `r` is a
    /// rational or decimal literal.
    pub fn parse(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(idx) = s.find("sqrt(") else {
            return Ok(Self::rational(parse_rational(&s)?));
        };
        let close = s[idx..]
            .find(')')
            .map(|c| c + idx)
            .ok_or_else(|| Error::Parse(format!("unbalanced sqrt in {s:?}")))?;
        if close + 1 != s.len() {
            return Err(Error::Parse(format!("trailing input after sqrt in {s:?}")));
        }
        let d: u64 = s[idx + 5..close]
            .parse()
            .map_err(|_| Error::Parse(format!("bad radicand in {s:?}")))?;
        let head = s[..idx].strip_suffix('*').unwrap_or(&s[..idx]);
        let bytes = head.as_bytes();
        let split = (1..head.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        let (rat, coef) = match split {
            Some(p) => (parse_rational(&head[..p])?, &head[p..]),
            None => (Rational::zero(), head),
        };
        let coef = match coef {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            c => parse_rational(c)?,
        };
        Ok(Self::new(rat, coef, d))
    }
}

fn split_square(d: u64) -> (u64, u64) {
    let mut square = 1u64;
    let mut free = d;
    let mut f = 2u64;
    while f * f <= free {
        while free.is_multiple_of(f * f) {
            free /= f * f;
            square *= f;
        }
        f += 1;
    }
    (square, free)
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", rational_string(&self.rational));
        }
        let coef = if self.radical.is_one() {
            String::new()
        } else if (-self.radical.clone()).is_one() {
            "-".to_string()
        } else {
            format!("{}*", rational_string(&self.radical))
        };
        if self.rational.is_zero() {
            write!(f, "{coef}sqrt({})", self.d)
        } else {
            let sep = if self.radical.is_positive() { "+" } else { "" };
            write!(f, "{}{sep}{coef}sqrt({})", rational_string(&self.rational), self.d)
        }
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some((self.clone() - other.clone()).signum())
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        let d = Surd::field(&self, &rhs);
        Surd::new(self.rational + rhs.rational, self.radical + rhs.radical, d)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        let d = Surd::field(&self, &rhs);
        Surd::new(self.rational - rhs.rational, self.radical - rhs.radical, d)
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let d = Surd::field(&self, &rhs);
        let dd = Rational::from_integer(d.into());
        let rational = &self.rational * &rhs.rational + &self.radical * &rhs.radical * dd;
        let radical = &self.rational * &rhs.radical + &self.radical * &rhs.rational;
        Surd::new(rational, radical, d)
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, rhs: Surd) -> Surd {
        let norm = rhs.norm();
        assert!(!norm.is_zero(), "division by zero surd");
        let num = self * rhs.conjugate();
        Surd::new(num.rational / &norm, num.radical / &norm, num.d)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            rational: -self.rational,
            radical: -self.radical,
            d: self.d,
        }
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.radical.is_zero()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::rational(Rational::one())
    }
}

impl Scalar for Surd {
    const EXACT: bool = true;
    const NAME: &'static str = "quadratic-surd";

    fn from_i64(v: i64) -> Self {
        Surd::rational(Rational::from_integer(v.into()))
    }
    fn from_rational(r: &Rational) -> Self {
        Surd::rational(r.clone())
    }
    fn to_f64(&self) -> f64 {
        Scalar::to_f64(&self.to_extended())
    }
    fn parse_str(s: &str) -> Result<Self> {
        Surd::parse(s)
    }
    fn exact_string(&self) -> Option<String> {
        Some(self.to_string())
    }
    fn decimal_string(&self) -> String {
        format_f64(self.to_f64())
    }
}

// ---------------------------------------------------------------------------
// parsing and formatting

/// Parses `p/q`, integers and decimal literals (with optional exponent)
/// into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let den = parse_decimal(den)?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(parse_decimal(num)? / den);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a number: {s:?}"));
    let s = s.trim();
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    if scale >= 0 {
        value *= Rational::from_integer(num::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Decimal rendering of `x` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    format_rational(&Rational::from_float(x).expect("finite"), 17)
}

/// Positional decimal rendering of `r` rounded to `sig` significant digits,
/// trailing zeros removed.
pub fn format_rational(r: &Rational, sig: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let mag = Signed::abs(r);
    let ten = BigInt::from(10);
    let approx = ToPrimitive::to_f64(&mag).unwrap_or(1.0);
    let mut exp = if approx > 0.0 && approx.is_finite() {
        approx.log10().floor() as i64
    } else {
        0
    };
    let scaled = |e: i64| -> BigInt {
        let shift = sig as i64 - 1 - e;
        let v = if shift >= 0 {
            &mag * Rational::from_integer(num::pow(ten.clone(), shift as usize))
        } else {
            &mag / Rational::from_integer(num::pow(ten.clone(), (-shift) as usize))
        };
        round_half_even(&v)
    };
    let mut digits = scaled(exp);
    let upper = num::pow(ten.clone(), sig);
    let lower = num::pow(ten.clone(), sig - 1);
    if digits >= upper {
        exp += 1;
        digits = scaled(exp);
    } else if digits < lower {
        exp -= 1;
        digits = scaled(exp);
        if digits >= upper {
            exp += 1;
            digits = scaled(exp);
        }
    }
    let d = digits.to_string();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp >= 0 {
        let int_len = exp as usize + 1;
        if int_len >= d.len() {
            out.push_str(&d);
            out.push_str(&"0".repeat(int_len - d.len()));
        } else {
            let frac = d[int_len..].trim_end_matches('0');
            out.push_str(&d[..int_len]);
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        }
    } else {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(d.trim_end_matches('0'));
    }
    out
}

fn round_half_even(v: &Rational) -> BigInt {
    let (q, r) = v.numer().div_rem(v.denom());
    let twice: BigInt = r << 1usize;
    match twice.cmp(v.denom()) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Sign of a big integer as `i8`.
pub fn bigint_sign(v: &BigInt) -> i8 {
    match v.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(q("3/4"), Rational::new(3.into(), 4.into()));
        assert_eq!(q("-0.25"), Rational::new((-1).into(), 4.into()));
        assert_eq!(q("1e-3"), Rational::new(1.into(), 1000.into()));
        assert_eq!(q("2.5E1"), Rational::from_integer(25.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats_significant_digits() {
        assert_eq!(format_rational(&q("1/32"), 17), "0.03125");
        assert_eq!(format_rational(&q("1/3"), 5), "0.33333");
        assert_eq!(format_rational(&q("-2/3"), 3), "-0.667");
        assert_eq!(format_rational(&q("1234.5"), 3), "1230");
        assert_eq!(format_rational(&q("9.9996"), 4), "10");
        assert_eq!(format_f64(1.0), "1");
        assert_eq!(format_f64(0.1), "0.10000000000000001");
    }

    #[test]
    fn surd_arithmetic_is_exact() {
        let r3 = Surd::sqrt_of(3);
        let prod = r3.clone() * r3.clone();
        assert_eq!(prod, Surd::from_i64(3));
        let x = (Surd::one() + r3.clone()) / Surd::from_i64(2);
        let y = (Surd::one() - r3.clone()) / Surd::from_i64(2);
        assert_eq!(x.clone() + y.clone(), Surd::one());
        assert_eq!(x.clone() * x.clone() + y.clone() * y.clone(), Surd::from_i64(2));
        assert!(x > y);
        assert!(y < Surd::zero());
        let inv = Surd::one() / x.clone();
        assert_eq!(inv * x, Surd::one());
        assert_eq!(Surd::sqrt_of(12), Surd::from_i64(2) * Surd::sqrt_of(3));
        assert_eq!(Surd::sqrt_of(16), Surd::from_i64(4));
    }

    #[test]
    fn surd_ordering_with_mixed_signs() {
        let a = Surd::parse("1-1/2*sqrt(3)").unwrap(); // 1 - 0.866 > 0
        assert!(a > Surd::zero());
        let b = Surd::parse("1-sqrt(3)").unwrap();
        assert!(b < Surd::zero());
        let c = Surd::parse("-2+sqrt(3)").unwrap();
        assert!(c < Surd::zero());
    }

    #[test]
    fn surd_parse_and_display_agree() {
        for s in ["1/2+1/2*sqrt(3)", "1/2-1/2*sqrt(7)", "sqrt(3)", "-sqrt(2)", "3/4", "2*sqrt(5)"] {
            let v = Surd::parse(s).unwrap();
            assert_eq!(v.to_string(), s);
        }
        assert!(Surd::parse("sqrt(3").is_err());
        assert!(Surd::parse("sqrt(3)+1").is_err());
    }

    #[test]
    #[should_panic(expected = "mixed quadratic fields")]
    fn surd_rejects_mixed_fields() {
        let _ = Surd::sqrt_of(2) + Surd::sqrt_of(3);
    }

    #[test]
    fn extended_round_trips_rationals() {
        let third = Extended::from_rational(&q("1/3"));
        let back = extended_to_rational(&third);
        let err = Signed::abs(&(back - q("1/3")));
        assert!(err < q("1/1000000000000000000000000000000"));
        assert_eq!(Scalar::to_f64(&Extended::from_i64(7)), 7.0);
        let s = format_rational(&extended_to_rational(&Extended::parse_str("1/3").unwrap()), 30);
        assert!(s.starts_with("0.3333333333333333333333333333"), "{s}");
        assert_eq!(Extended::ratio(1, 3).decimal_string(), "0.33333333333333333");
    }

    fn ext_err(x: Extended, want: &Rational) -> f64 {
        Scalar::to_f64(&Signed::abs(&(extended_to_rational(&x) - want)))
    }

    #[test]
    fn extended_division_is_double_double() {
        for (a, b) in [(1, 3), (2, 7), (-5, 11), (1_000_003, 97)] {
            let x = Extended::from_i64(a) / Extended::from_i64(b);
            let want = Rational::new(a.into(), b.into());
            assert!(ext_err(x, &want) <= 1e-31 * Scalar::to_f64(&want).abs(), "{a}/{b}");
        }
        let third = Extended::ratio(1, 3);
        assert!(ext_err(third / Extended::ratio(2, 7), &q("7/6")) < 1e-31);
    }

    #[test]
    fn extended_trig_is_double_double() {
        let pi = Extended::pi();
        assert!(ext_err(RealScalar::sin(&(pi / Extended::from_i64(6))), &q("1/2")) < 1e-31);
        assert!(ext_err(RealScalar::cos(&(pi / Extended::from_i64(3))), &q("1/2")) < 1e-31);
        for x in [0.1, 0.7, 1.3, 2.9, 4.4, 6.1, -2.2] {
            let e = Extended::from_f64(x);
            let (s, c) = (RealScalar::sin(&e), RealScalar::cos(&e));
            let one = s * s + c * c;
            assert!(ext_err(one, &q("1")) < 1e-30, "{x}");
            let d = RealScalar::sin(&(e + e)) - Extended::from_i64(2) * s * c;
            assert!(Scalar::to_f64(&d).abs() < 1e-30, "{x}");
            assert!((Scalar::to_f64(&s) - x.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn float_parse_accepts_surds() {
        let v = f64::parse_str("1/2+1/2*sqrt(3)").unwrap();
        assert!((v - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(factorial(6), BigInt::from(720));
        assert_eq!(binomial(14, 2), BigInt::from(91));
        assert_eq!(binomial(3, 5), BigInt::zero());
    }

    #[test]
    fn sign_tolerance() {
        assert_eq!(1e-14f64.sign_tol(1e-12), Ordering::Equal);
        assert_eq!((-1e-10f64).sign_tol(1e-12), Ordering::Less);
        assert_eq!(Rational::from_f64(1e-300).sign_tol(1.0), Ordering::Greater);
    }
}
