//! Affine flip threshold `f(x) = a x + b`, the per-iteration threshold
//! schedule, and finite-precision truncation of the coefficients.
//!
//! All threshold arithmetic is exact. Coefficients are parsed from decimal
//! strings into rationals, truncation produces dyadic rationals, and the
//! `/3` terms of the schedule stay rational unless a fixed-point width is
//! requested. A count `sigma` passes threshold `T` iff `sigma >= T`, which
//! for integer `sigma` is `sigma >= ceil(T)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default `delta` for the 128-bit parameter set.
pub const DEFAULT_DELTA: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Full,
    /// `a` keeps `k` bits from its first nonzero fractional bit, `b` keeps
    /// its first `k` fractional bits.
    Msnb(u32),
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Full => f.write_str("full"),
            Precision::Msnb(k) => write!(f, "{k} bits"),
        }
    }
}

/// Coefficients of `f(x) = a x + b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThresholdCoefficients {
    a: BigRational,
    b: BigRational,
    precision: Precision,
}

impl ThresholdCoefficients {
    pub fn new(a: BigRational, b: BigRational) -> Result<Self> {
        if a.is_negative() || b.is_negative() {
            return Err(Error::InvalidParameter("threshold coefficients must be nonnegative".into()));
        }
        Ok(Self {
            a,
            b,
            precision: Precision::Full,
        })
    }

    /// Parses `a` and `b` from plain decimal strings such as `"0.00618658"`.
    pub fn from_decimal(a: &str, b: &str) -> Result<Self> {
        Self::new(parse_decimal(a)?, parse_decimal(b)?)
    }

    /// Exact value of an `f64`, for coefficients coming out of a fit. The
    /// shortest round-trip decimal is used so that printed and used values agree.
    pub fn from_f64(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Self::from_decimal(&format!("{a}"), &format!("{b}"))
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// `f(x) = a x + b`, exact.
    pub fn eval(&self, syndrome_weight: usize) -> BigRational {
        &self.a * BigRational::from_integer(BigInt::from(syndrome_weight)) + &self.b
    }

    /// Truncates `a` to its `k` most significant nonzero fractional bits and
    /// `b` to its `k` most significant fractional bits. Never rounds up.
    pub fn quantize(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("quantization needs k >= 1".into()));
        }
        let a_bits = msnb_width(&self.a, k);
        Ok(Self {
            a: truncate_fraction(&self.a, a_bits),
            b: truncate_fraction(&self.b, k),
            precision: Precision::Msnb(k),
        })
    }

    /// Number of fractional binary digits that represent `a` and `b` at the
    /// current precision, or `None` at full precision.
    pub fn fraction_widths(&self) -> Option<(u32, u32)> {
        match self.precision {
            Precision::Full => None,
            Precision::Msnb(k) => Some((msnb_width(&self.a, k), k)),
        }
    }
}

/// Fractional width that keeps `k` bits starting at the first nonzero
/// fractional bit of `x`. A zero fraction keeps `k` bits.
fn msnb_width(x: &BigRational, k: u32) -> u32 {
    match leading_fraction_bit(x) {
        Some(p) => p + k - 1,
        None => k,
    }
}

/// 1-based position of the first nonzero bit in the fractional part of `x`.
fn leading_fraction_bit(x: &BigRational) -> Option<u32> {
    let frac = x - x.floor();
    if frac.is_zero() {
        return None;
    }
    let mut p = 1;
    let mut scaled = frac * BigRational::from_integer(2.into());
    while scaled < BigRational::one() {
        scaled *= BigRational::from_integer(2.into());
        p += 1;
    }
    Some(p)
}

/// `floor(x * 2^bits) / 2^bits` for nonnegative `x`.
pub fn truncate_fraction(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    let scaled = (x * BigRational::from_integer(scale.clone())).floor();
    BigRational::new(scaled.to_integer(), scale)
}

/// Parses a plain decimal literal (`digits[.digits]`) into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let valid = |p: &str| p.bytes().all(|c| c.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !valid(int_part) || !valid(frac_part) {
        return Err(Error::Parse(format!("not a decimal number: {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| Error::Parse(format!("not a decimal number: {s:?}")))?
    };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let v = BigRational::new(numer, denom);
    Ok(if neg { -v } else { v })
}

/// Exact decimal rendering when the denominator has only factors 2 and 5,
/// otherwise `numer/denom`.
pub fn format_exact(x: &BigRational) -> String {
    let mut denom = x.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while denom.is_multiple_of(&two) {
        denom /= &two;
        twos += 1;
    }
    while denom.is_multiple_of(&five) {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return format!("{}/{}", x.numer(), x.denom());
    }
    let places = twos.max(fives);
    let scaled = (x * BigRational::from_integer(num_traits::pow(BigInt::from(10), places as usize)))
        .to_integer();
    let sign = if scaled.is_negative() { "-" } else { "" };
    let digits = scaled.abs().to_string();
    if places == 0 {
        return format!("{sign}{digits}");
    }
    let places = places as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    format!("{sign}{int}.{frac}")
}

/// Binary expansion of a nonnegative `x` with exactly `frac_bits`
/// fractional digits (truncated). Appends `...` if bits were dropped.
pub fn format_binary(x: &BigRational, frac_bits: u32) -> String {
    let int = x.floor().to_integer();
    let mut out = int.to_str_radix(2);
    let mut frac = x - x.floor();
    if frac_bits > 0 {
        out.push('.');
    }
    let two = BigRational::from_integer(2.into());
    for _ in 0..frac_bits {
        frac *= &two;
        if frac >= BigRational::one() {
            out.push('1');
            frac -= BigRational::one();
        } else {
            out.push('0');
        }
    }
    if !frac.is_zero() {
        out.push_str("...");
    }
    out
}

/// Constants fixed at the start of a decode: `T' = f(|s0|)`, `M = (d+1)/2`
/// and `delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdState {
    pub t_prime: BigRational,
    pub majority: BigRational,
    pub delta: BigRational,
}

impl ThresholdState {
    pub fn new(coeffs: &ThresholdCoefficients, initial_weight: usize, d: usize, delta: u32) -> Self {
        Self {
            t_prime: coeffs.eval(initial_weight),
            majority: BigRational::new(BigInt::from(d + 1), BigInt::from(2)),
            delta: BigRational::from_integer(BigInt::from(delta)),
        }
    }
}

/// Schedule value for iteration `i >= 1`, before the max with `f(|s|)`.
///
/// `thirds_bits` truncates the `/3` terms to that many fractional bits;
/// `None` keeps them exact.
pub fn scheduled_threshold(i: usize, state: &ThresholdState, thirds_bits: Option<u32>) -> BigRational {
    assert!(i >= 1, "iterations are numbered from 1");
    let three = BigRational::from_integer(3.into());
    let two = BigRational::from_integer(2.into());
    let third = |x: BigRational| {
        let q = x / &three;
        match thirds_bits {
            Some(bits) => truncate_fraction(&q, bits),
            None => q,
        }
    };
    let base = match i {
        1 => state.t_prime.clone(),
        2 => third(&two * &state.t_prime + &state.majority),
        3 => third(&state.t_prime + &two * &state.majority),
        _ => state.majority.clone(),
    };
    base + &state.delta
}

/// `max(f(|s|), T_i)`.
pub fn threshold(
    i: usize,
    syndrome_weight: usize,
    state: &ThresholdState,
    coeffs: &ThresholdCoefficients,
    thirds_bits: Option<u32>,
) -> BigRational {
    let sched = scheduled_threshold(i, state, thirds_bits);
    let f = coeffs.eval(syndrome_weight);
    if f > sched {
        f
    } else {
        sched
    }
}

/// Smallest integer count that satisfies `sigma >= t`.
pub fn integer_threshold(t: &BigRational) -> i64 {
    t.ceil()
        .to_integer()
        .to_i64()
        .expect("threshold does not fit in i64")
}
