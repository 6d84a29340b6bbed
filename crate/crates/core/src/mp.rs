//! Arbitrary-precision real scalars.
//!
//! [`Scalar`] wraps an `astro-float` number together with the
//! [`PrecisionContext`] it was produced under. Binary operations run at the
//! larger of the two operand precisions, so values created from one context
//! never lose digits when mixed with literals.
//!
//! Invalid operations (division by zero, overflow in `exp`) produce a
//! non-finite scalar instead of panicking; callers test with
//! [`Scalar::is_finite`].

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigUint;
use thiserror::Error;

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 2048;

/// Smallest precision a context accepts.
pub const MIN_DIGITS: u32 = 64;

const GUARD_BITS: usize = 64;
const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = std::f64::consts::LOG2_10;
const LOG10_2: f64 = std::f64::consts::LOG10_2;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("failed to allocate constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MpError {
    #[error("precision of {0} digits is below the minimum of {MIN_DIGITS}")]
    PrecisionTooLow(u32),
    #[error("malformed number: {0:?}")]
    Parse(String),
    #[error("number out of range: {0:?}")]
    OutOfRange(String),
    #[error("cannot format a non-finite value")]
    NonFinite,
    #[error("significant digits must be at least 1")]
    ZeroDigits,
}

/// Working precision in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrecisionContext {
    digits: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self, MpError> {
        if digits < MIN_DIGITS {
            return Err(MpError::PrecisionTooLow(digits));
        }
        Ok(Self { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary mantissa width backing this context, including guard bits.
    pub fn bits(&self) -> usize {
        (self.digits as f64 * LOG2_10).ceil() as usize + GUARD_BITS
    }

    /// A context with `factor` times as many digits.
    pub fn scaled(&self, factor: u32) -> Self {
        Self {
            digits: self.digits.saturating_mul(factor),
        }
    }

    /// `10^(-digits + slack)`, the magnitude below which a quantity is
    /// indistinguishable from rounding noise.
    pub fn noise_floor(&self, slack: i64) -> Scalar {
        Scalar::pow10(-(self.digits as i64) + slack, *self)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            digits: DEFAULT_DIGITS,
        }
    }
}

/// Rounding applied when printing a fixed number of significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitRounding {
    HalfEven,
    TowardZero,
}

/// An immutable real number at a known precision.
#[derive(Clone)]
pub struct Scalar {
    value: BigFloat,
    ctx: PrecisionContext,
}

impl Scalar {
    fn wrap(value: BigFloat, ctx: PrecisionContext) -> Self {
        Self { value, ctx }
    }

    pub fn zero(ctx: PrecisionContext) -> Self {
        Self::from_i64(0, ctx)
    }

    pub fn one(ctx: PrecisionContext) -> Self {
        Self::from_i64(1, ctx)
    }

    pub fn from_i64(n: i64, ctx: PrecisionContext) -> Self {
        Self::wrap(BigFloat::from_i64(n, ctx.bits()), ctx)
    }

    /// Exact binary value of `f`; only meant for values that are exactly
    /// representable or where the binary rounding of `f` is intended.
    pub fn from_f64(f: f64, ctx: PrecisionContext) -> Self {
        Self::wrap(BigFloat::from_f64(f, ctx.bits()), ctx)
    }

    /// Rational `num / den` at context precision.
    pub fn ratio(num: i64, den: i64, ctx: PrecisionContext) -> Self {
        Self::from_i64(num, ctx) / den
    }

    pub fn parse(text: &str, ctx: PrecisionContext) -> Result<Self, MpError> {
        parse_scalar(text, ctx)
    }

    /// `10^k` at context precision.
    pub fn pow10(k: i64, ctx: PrecisionContext) -> Self {
        let p = ctx.bits();
        let ten = BigFloat::from_i64(10, p);
        let mag = ten.powi(k.unsigned_abs() as usize, p, RM);
        if k >= 0 {
            Self::wrap(mag, ctx)
        } else {
            Self::wrap(mag.reciprocal(p, RM), ctx)
        }
    }

    pub fn pi(ctx: PrecisionContext) -> Self {
        let v = with_consts(|cc| cc.pi(ctx.bits(), RM));
        Self::wrap(v, ctx)
    }

    /// Integer `n` at this scalar's precision.
    pub fn lift(&self, n: i64) -> Self {
        Self::from_i64(n, self.ctx)
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    /// The same value rounded (or extended) to another context.
    pub fn with_ctx(&self, ctx: PrecisionContext) -> Self {
        let mut v = self.value.clone();
        // Fails only on non-finite values, which carry no mantissa.
        let _ = v.set_precision(ctx.bits(), RM);
        Self::wrap(v, ctx)
    }

    pub fn is_finite(&self) -> bool {
        !self.value.is_nan() && !self.value.is_inf()
    }

    pub fn is_nan(&self) -> bool {
        self.value.is_nan()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.ctx)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.value.reciprocal(self.ctx.bits(), RM), self.ctx)
    }

    pub fn sqrt(&self) -> Self {
        Self::wrap(self.value.sqrt(self.ctx.bits(), RM), self.ctx)
    }

    pub fn powi(&self, n: i32) -> Self {
        let p = self.ctx.bits();
        let mag = self.value.powi(n.unsigned_abs() as usize, p, RM);
        if n >= 0 {
            Self::wrap(mag, self.ctx)
        } else {
            Self::wrap(mag.reciprocal(p, RM), self.ctx)
        }
    }

    pub fn pow(&self, exponent: &Scalar) -> Self {
        let ctx = self.ctx.max(exponent.ctx);
        let v = with_consts(|cc| self.value.pow(&exponent.value, ctx.bits(), RM, cc));
        Self::wrap(v, ctx)
    }

    pub fn exp(&self) -> Self {
        let v = with_consts(|cc| self.value.exp(self.ctx.bits(), RM, cc));
        Self::wrap(v, self.ctx)
    }

    pub fn ln(&self) -> Self {
        let v = with_consts(|cc| self.value.ln(self.ctx.bits(), RM, cc));
        Self::wrap(v, self.ctx)
    }

    pub fn sin(&self) -> Self {
        let v = with_consts(|cc| self.value.sin(self.ctx.bits(), RM, cc));
        Self::wrap(v, self.ctx)
    }

    pub fn cos(&self) -> Self {
        let v = with_consts(|cc| self.value.cos(self.ctx.bits(), RM, cc));
        Self::wrap(v, self.ctx)
    }

    pub fn atan(&self) -> Self {
        let v = with_consts(|cc| self.value.atan(self.ctx.bits(), RM, cc));
        Self::wrap(v, self.ctx)
    }

    pub fn max(&self, other: &Scalar) -> Self {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Nearest `f64`. Magnitudes outside the `f64` range saturate to zero
    /// or infinity.
    pub fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf() {
            return if self.value.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        if self.value.is_zero() {
            return 0.0;
        }
        let mut v = self.value.clone();
        let _ = v.set_precision(64, RM);
        with_consts(|cc| v.format(Radix::Dec, RM, cc))
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .unwrap_or(f64::NAN)
    }

    /// Approximate `log10 |self|`, accurate to about 1e-15 relative; usable
    /// far outside the `f64` exponent range.
    pub fn log10_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        if !self.is_finite() {
            return f64::NAN;
        }
        let e2 = self.value.exponent().unwrap_or(0) as f64;
        let top = self
            .value
            .as_raw_parts()
            .map(|(words, _, _, _, _)| words[words.len() - 1])
            .unwrap_or(1 << 63);
        // |v| = (top / 2^64) * 2^e2, up to the truncated lower words
        let frac = top as f64 / 2f64.powi(64);
        e2 * LOG10_2 + frac.log10()
    }

    /// Exact integer value of a finite, integral, non-negative scalar.
    fn to_biguint(&self) -> Option<BigUint> {
        if self.value.is_zero() {
            return Some(BigUint::default());
        }
        let (words, n_bits, sign, exp, _) = self.value.as_raw_parts()?;
        if sign == Sign::Neg {
            return None;
        }
        let digits: Vec<u32> = words
            .iter()
            .flat_map(|w| [*w as u32, (*w >> 32) as u32])
            .collect();
        let mantissa = BigUint::new(digits);
        let shift = exp as i64 - n_bits as i64;
        Some(if shift >= 0 {
            mantissa << shift as usize
        } else {
            mantissa >> (-shift) as usize
        })
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match format_scientific(self, 24) {
            Ok(s) => write!(f, "Scalar({s})"),
            Err(_) if self.is_nan() => write!(f, "Scalar(NaN)"),
            Err(_) if self.is_negative() => write!(f, "Scalar(-Inf)"),
            Err(_) => write!(f, "Scalar(Inf)"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(17).max(1);
        match format_scientific(self, digits) {
            Ok(s) => f.write_str(&s),
            Err(_) if self.is_nan() => f.write_str("NaN"),
            Err(_) if self.is_negative() => f.write_str("-Inf"),
            Err(_) => f.write_str("Inf"),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.value.cmp(&other.value) == Some(0)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::wrap(self.value.clone().neg(), self.ctx)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let ctx = self.ctx.max(rhs.ctx);
                Scalar::wrap(self.value.$method(&rhs.value, ctx.bits(), RM), ctx)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
        impl $trait<i64> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: i64) -> Scalar {
                self.$method(&self.lift(rhs))
            }
        }
        impl $trait<i64> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: i64) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);
scalar_binop!(Div, div);

/// `[+-]` digits with an optional fraction and exponent, e.g. `-1.5e-3` or `.5`.
pub fn is_decimal_literal(text: &str) -> bool {
    let body = text.strip_prefix(['+', '-']).unwrap_or(text);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() && frac.is_empty() {
        return false;
    }
    if !all_digits(int) || !all_digits(frac) {
        return false;
    }
    match exponent {
        None => true,
        Some(e) => {
            let e = e.strip_prefix(['+', '-']).unwrap_or(e);
            !e.is_empty() && all_digits(e)
        }
    }
}

/// Parses decimal or scientific notation (`-1.207`, `2.0`, `1e-320`).
pub fn parse_scalar(text: &str, ctx: PrecisionContext) -> Result<Scalar, MpError> {
    let trimmed = text.trim();
    if !is_decimal_literal(trimmed) {
        return Err(MpError::Parse(text.to_owned()));
    }
    let unsigned = trimmed.strip_prefix('+').unwrap_or(trimmed);
    let v = with_consts(|cc| BigFloat::parse(unsigned, Radix::Dec, ctx.bits(), RM, cc));
    if v.is_nan() {
        return Err(MpError::Parse(text.to_owned()));
    }
    if v.is_inf() {
        return Err(MpError::OutOfRange(text.to_owned()));
    }
    Ok(Scalar::wrap(v, ctx))
}

/// Normalized scientific notation with `sig_digits` significant digits,
/// rounded half-to-even: `0.16` → `"1.6e-1"`.
pub fn format_scientific(v: &Scalar, sig_digits: usize) -> Result<String, MpError> {
    format_scientific_with(v, sig_digits, DigitRounding::HalfEven)
}

/// [`format_scientific`] with an explicit digit rounding rule.
pub fn format_scientific_with(
    v: &Scalar,
    sig_digits: usize,
    rounding: DigitRounding,
) -> Result<String, MpError> {
    if sig_digits == 0 {
        return Err(MpError::ZeroDigits);
    }
    if !v.is_finite() {
        return Err(MpError::NonFinite);
    }
    let sign = if v.is_negative() { "-" } else { "" };
    if v.is_zero() {
        return Ok(render_digits("", &"0".repeat(sig_digits), 0));
    }

    let ctx = PrecisionContext {
        digits: v.ctx.digits + 20,
    };
    let a = v.abs().with_ctx(ctx);
    let s = sig_digits as i64;
    let lower = Scalar::pow10(s - 1, ctx);
    let upper = Scalar::pow10(s, ctx);

    // floor(log10 |v|) is the estimate or one above it
    let mut exp10 = a.log10_abs().floor() as i64;
    let mut scaled = &a * &Scalar::pow10(s - 1 - exp10, ctx);
    while scaled < lower {
        exp10 -= 1;
        scaled = &a * &Scalar::pow10(s - 1 - exp10, ctx);
    }
    while scaled >= upper {
        exp10 += 1;
        scaled = &a * &Scalar::pow10(s - 1 - exp10, ctx);
    }

    let whole = Scalar::wrap(scaled.value.floor(), ctx);
    let frac = &scaled - &whole;
    let mut n = whole.to_biguint().ok_or(MpError::NonFinite)?;
    if rounding == DigitRounding::HalfEven {
        let half = Scalar::ratio(1, 2, ctx);
        let odd = n.bit(0);
        if frac > half || (frac == half && odd) {
            n += 1u32;
        }
    }
    let mut digits = n.to_string();
    if digits.len() > sig_digits {
        // rounded up to 10^s
        digits.truncate(sig_digits);
        exp10 += 1;
    }
    Ok(render_digits(sign, &digits, exp10))
}

fn render_digits(sign: &str, digits: &str, exp10: i64) -> String {
    let (lead, rest) = digits.split_at(1);
    if rest.is_empty() {
        format!("{sign}{lead}e{exp10}")
    } else {
        format!("{sign}{lead}.{rest}e{exp10}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(128).unwrap()
    }

    fn p(s: &str) -> Scalar {
        parse_scalar(s, ctx()).unwrap()
    }

    #[test]
    fn context_rejects_low_precision() {
        assert_eq!(PrecisionContext::new(63), Err(MpError::PrecisionTooLow(63)));
        assert!(PrecisionContext::new(64).is_ok());
        assert_eq!(PrecisionContext::default().digits(), 2048);
    }

    #[test]
    fn formats_table_magnitudes() {
        assert_eq!(format_scientific(&p("0.16"), 2).unwrap(), "1.6e-1");
        assert_eq!(format_scientific(&p("1.0"), 2).unwrap(), "1.0e0");
        assert_eq!(format_scientific(&p("1.3e-1570"), 2).unwrap(), "1.3e-1570");
        assert_eq!(format_scientific(&p("-2.5e10"), 3).unwrap(), "-2.50e10");
        assert_eq!(format_scientific(&p("7"), 1).unwrap(), "7e0");
        assert_eq!(format_scientific(&Scalar::zero(ctx()), 2).unwrap(), "0.0e0");
    }

    #[test]
    fn formatting_rounds_half_even() {
        assert_eq!(format_scientific(&p("1.25"), 2).unwrap(), "1.2e0");
        assert_eq!(format_scientific(&p("1.35"), 2).unwrap(), "1.4e0");
        assert_eq!(format_scientific(&p("1.2500001"), 2).unwrap(), "1.3e0");
        assert_eq!(format_scientific(&p("9.96"), 2).unwrap(), "1.0e1");
        assert_eq!(format_scientific(&p("9.96e-400"), 2).unwrap(), "1.0e-399");
    }

    #[test]
    fn truncating_format_keeps_leading_digits() {
        let v = p("0.165234");
        assert_eq!(
            format_scientific_with(&v, 2, DigitRounding::TowardZero).unwrap(),
            "1.6e-1"
        );
        assert_eq!(format_scientific(&v, 2).unwrap(), "1.7e-1");
        let v = p("9.99e-5");
        assert_eq!(
            format_scientific_with(&v, 2, DigitRounding::TowardZero).unwrap(),
            "9.9e-5"
        );
    }

    #[test]
    fn exact_powers_of_ten_land_on_their_exponent() {
        for k in [-1570, -320, -1, 0, 1, 7, 300] {
            let v = Scalar::pow10(k, ctx());
            assert_eq!(format_scientific(&v, 3).unwrap(), format!("1.00e{k}"));
        }
    }

    #[test]
    fn format_rejects_non_finite_and_zero_digits() {
        let inf = Scalar::one(ctx()) / Scalar::zero(ctx());
        assert!(!inf.is_finite());
        assert_eq!(format_scientific(&inf, 2), Err(MpError::NonFinite));
        assert_eq!(format_scientific(&p("1"), 0), Err(MpError::ZeroDigits));
    }

    #[test]
    fn parses_decimal_and_scientific() {
        let tiny = Scalar::pow10(-320, ctx());
        assert!((p("1e-320") - &tiny).abs() < ctx().noise_floor(2) * &tiny);
        assert_eq!(p("2.0"), Scalar::from_i64(2, ctx()));
        assert_eq!(p("+3"), Scalar::from_i64(3, ctx()));
        let v = p("-1.207");
        let err = (&v + &Scalar::ratio(1207, 1000, ctx())).abs();
        assert!(err < ctx().noise_floor(2));
        assert_eq!(p(".5"), Scalar::ratio(1, 2, ctx()));
    }

    #[test]
    fn parse_rejects_malformed() {
        for bad in ["", "abc", "1.2.3", "1e", "e5", "--1", "1e+-3", ".", "1 2"] {
            assert!(
                matches!(parse_scalar(bad, ctx()), Err(MpError::Parse(_))),
                "{bad:?}"
            );
        }
        assert!(matches!(
            parse_scalar("1e99999999999", ctx()),
            Err(MpError::OutOfRange(_))
        ));
    }

    #[test]
    fn sqrt_two_squared_is_two() {
        let two = Scalar::from_i64(2, ctx());
        let r = two.sqrt();
        assert!((&r * &r - &two).abs() < ctx().noise_floor(2));
    }

    #[test]
    fn pi_comes_from_the_arithmetic_layer() {
        let pi = Scalar::pi(ctx());
        // sin(pi) vanishes to working precision
        assert!(pi.sin().abs() < ctx().noise_floor(2));
        assert!(format_scientific(&pi, 30)
            .unwrap()
            .starts_with("3.14159265358979323846264338328e0"));
    }

    #[test]
    fn transcendental_identities() {
        let x = p("0.7");
        let one = Scalar::one(ctx());
        let tol = ctx().noise_floor(4);
        assert!((x.sin().powi(2) + x.cos().powi(2) - &one).abs() < tol);
        assert!((x.exp().ln() - &x).abs() < tol);
        // atan(1) = pi/4
        assert!((one.atan() * 4 - Scalar::pi(ctx())).abs() < tol);
        assert!((x.pow(&p("2")) - x.powi(2)).abs() < tol);
    }

    #[test]
    fn overflow_is_flagged_not_fatal() {
        let huge = p("1e12").exp();
        assert!(!huge.is_finite());
        assert!(!huge.is_nan());
        let nan = Scalar::zero(ctx()) / Scalar::zero(ctx());
        assert!(nan.is_nan());
        assert!(nan.partial_cmp(&p("1")).is_none());
        assert_ne!(nan, nan.clone());
    }

    #[test]
    fn log10_estimate_tracks_exponent() {
        assert!((p("1e-1570").log10_abs() + 1570.0).abs() < 1e-9);
        assert!((p("250").log10_abs() - 250f64.log10()).abs() < 1e-12);
        assert_eq!(Scalar::zero(ctx()).log10_abs(), f64::NEG_INFINITY);
    }

    #[test]
    fn to_f64_saturates() {
        assert_eq!(p("0.25").to_f64(), 0.25);
        assert_eq!(p("1e-1570").to_f64(), 0.0);
        assert!((p("-1.207").to_f64() + 1.207).abs() < 1e-15);
    }

    #[test]
    fn mixed_precision_ops_use_the_wider_context() {
        let lo = Scalar::one(ctx());
        let hi = Scalar::one(ctx().scaled(4));
        assert_eq!((&lo + &hi).ctx(), ctx().scaled(4));
    }
}
