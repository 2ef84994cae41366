//! Midpoint-radius ("ball") arithmetic over dyadic fixed point.
//!
//! A [`CertifiedReal`] with midpoint `m`, radius `r` and `b` fractional bits
//! encloses every real in `[(m - r) / 2^b, (m + r) / 2^b]`. Every operation
//! rounds its midpoint to nearest and charges the rounding to the radius, so
//! enclosures stay rigorous no matter how expressions are combined.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const LOG10_2: f64 = std::f64::consts::LOG10_2;
const LN_GUARD_BITS: u32 = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedReal {
    mid: BigInt,
    rad: BigUint,
    bits: u32,
}

/// Fractional bits needed for `digits` decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 / LOG10_2).ceil() as u32
}

fn pow2(bits: u32) -> BigUint {
    BigUint::one() << bits
}

fn round_shr(x: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    let half = BigInt::one() << (s - 1);
    (x + half).div_floor(&BigInt::from(pow2(s)))
}

fn ceil_shr(x: &BigUint, s: u32) -> BigUint {
    if s == 0 {
        return x.clone();
    }
    (x + pow2(s) - 1u8) >> s
}

fn div_round(n: &BigInt, d: &BigInt) -> BigInt {
    let (n, d) = if d.is_negative() { (-n, -d) } else { (n.clone(), d.clone()) };
    let twice: BigInt = n * 2 + &d;
    twice.div_floor(&(d * 2))
}

fn ceil_sqrt(x: &BigUint) -> BigUint {
    let s = Roots::sqrt(x);
    if &s * &s == *x {
        s
    } else {
        s + 1u8
    }
}

impl CertifiedReal {
    pub fn from_parts(mid: BigInt, rad: BigUint, bits: u32) -> Self {
        CertifiedReal { mid, rad, bits }
    }

    pub fn zero(bits: u32) -> Self {
        Self::from_int(0, bits)
    }

    pub fn one(bits: u32) -> Self {
        Self::from_int(1, bits)
    }

    pub fn from_int(v: impl Into<BigInt>, bits: u32) -> Self {
        CertifiedReal {
            mid: v.into() << bits,
            rad: BigUint::zero(),
            bits,
        }
    }

    /// Enclosure of `num / den`.
    pub fn from_ratio(num: impl Into<BigInt>, den: impl Into<BigInt>, bits: u32) -> Result<Self> {
        let num = num.into();
        let den = den.into();
        if den.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let scaled = &num << bits;
        let exact = (&scaled % &den).is_zero();
        Ok(CertifiedReal {
            mid: div_round(&scaled, &den),
            rad: if exact { BigUint::zero() } else { BigUint::one() },
            bits,
        })
    }

    /// Enclosure of a decimal literal such as `"62.4"` or `"-0.005"`.
    pub fn from_decimal(s: &str, bits: u32) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a decimal literal: {s}"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut num: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        Self::from_ratio(num, den, bits)
    }

    /// Ball spanning the scaled closed interval `[lo, hi]`.
    pub fn from_scaled_interval(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mid = (&lo + &hi).div_floor(&BigInt::from(2));
        let rad = (&hi - &mid).magnitude().clone();
        CertifiedReal { mid, rad, bits }
    }

    pub fn mid(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad(&self) -> &BigUint {
        &self.rad
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Decimal digits carried by the fixed-point scale.
    pub fn digits(&self) -> u32 {
        (self.bits as f64 * LOG10_2).floor() as u32
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn lower_scaled(&self) -> BigInt {
        &self.mid - BigInt::from(self.rad.clone())
    }

    pub fn upper_scaled(&self) -> BigInt {
        &self.mid + BigInt::from(self.rad.clone())
    }

    /// Re-express on `bits` fractional bits; exact when widening.
    pub fn with_bits(&self, bits: u32) -> Self {
        use std::cmp::Ordering::*;
        match bits.cmp(&self.bits) {
            Equal => self.clone(),
            Greater => {
                let d = bits - self.bits;
                CertifiedReal {
                    mid: &self.mid << d,
                    rad: &self.rad << d,
                    bits,
                }
            }
            Less => {
                let d = self.bits - bits;
                CertifiedReal {
                    mid: round_shr(&self.mid, d),
                    rad: ceil_shr(&self.rad, d) + 1u8,
                    bits,
                }
            }
        }
    }

    fn aligned(a: &Self, b: &Self) -> (Self, Self) {
        let bits = a.bits.max(b.bits);
        (a.with_bits(bits), b.with_bits(bits))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = Self::aligned(self, other);
        CertifiedReal {
            mid: a.mid + b.mid,
            rad: a.rad + b.rad,
            bits: a.bits,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b) = Self::aligned(self, other);
        CertifiedReal {
            mid: a.mid - b.mid,
            rad: a.rad + b.rad,
            bits: a.bits,
        }
    }

    pub fn neg(&self) -> Self {
        CertifiedReal {
            mid: -&self.mid,
            rad: self.rad.clone(),
            bits: self.bits,
        }
    }

    pub fn abs(&self) -> Self {
        if self.mid.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::aligned(self, other);
        let bits = a.bits;
        let product = &a.mid * &b.mid;
        let spread = a.mid.magnitude() * &b.rad + b.mid.magnitude() * &a.rad + &a.rad * &b.rad;
        let rounding = if (&product % BigInt::from(pow2(bits))).is_zero() { 0u8 } else { 1u8 };
        CertifiedReal {
            mid: round_shr(&product, bits),
            rad: ceil_shr(&spread, bits) + rounding,
            bits,
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        CertifiedReal {
            mid: &self.mid * k,
            rad: &self.rad * k.unsigned_abs(),
            bits: self.bits,
        }
    }

    pub fn mul_big(&self, k: &BigInt) -> Self {
        CertifiedReal {
            mid: &self.mid * k,
            rad: &self.rad * k.magnitude(),
            bits: self.bits,
        }
    }

    pub fn div_int(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("division by zero".into()));
        }
        let kb = BigInt::from(k);
        let exact = (&self.mid % &kb).is_zero();
        Ok(CertifiedReal {
            mid: div_round(&self.mid, &kb),
            rad: ceil_div(&self.rad, k.unsigned_abs()) + if exact { 0u8 } else { 1u8 },
            bits: self.bits,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let (a, b) = Self::aligned(self, other);
        let bits = a.bits;
        let m2 = b.mid.magnitude();
        if *m2 <= b.rad {
            return Err(Error::precision("division", "divisor not certified nonzero"));
        }
        let mid = div_round(&(&a.mid << bits), &b.mid);
        let num = (&a.rad * m2 + a.mid.magnitude() * &b.rad) << bits;
        let den = m2 * (m2 - &b.rad);
        let spread = num.div_ceil(&den);
        Ok(CertifiedReal {
            mid,
            rad: spread + 1u8,
            bits,
        })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one(self.bits).div(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(self.bits);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn sqrt(&self) -> Result<Self> {
        let lo = self.lower_scaled();
        if lo.is_negative() {
            return Err(Error::precision("sqrt", "argument not certified non-negative"));
        }
        let hi = self.upper_scaled();
        let lo_root = Roots::sqrt(&(lo.magnitude() << self.bits));
        let hi_root = ceil_sqrt(&(hi.magnitude() << self.bits));
        Ok(Self::from_scaled_interval(
            BigInt::from(lo_root),
            BigInt::from(hi_root),
            self.bits,
        ))
    }

    /// `sum_{j >= 0} t^(2j+1) / (2j+1)`, i.e. `atanh(t)`, for `|t| <= 1/2`.
    fn atanh_series(t: &Self) -> Result<Self> {
        let bound = BigInt::from(pow2(t.bits)) / 2;
        if t.mid.abs() + BigInt::from(t.rad.clone()) > bound {
            return Err(Error::InvalidArgument("atanh series needs |t| <= 1/2".into()));
        }
        let t2 = t.mul(t);
        let mut power = t.clone();
        let mut sum = t.clone();
        let mut j: i64 = 1;
        loop {
            power = power.mul(&t2);
            let mag = power.mid.magnitude() + &power.rad;
            sum = sum.add(&power.div_int(2 * j + 1)?);
            // Remaining terms total below |t|^(2j+3) / (1 - t^2) < 2^-bits.
            if mag <= BigUint::one() {
                break;
            }
            j += 1;
        }
        sum.rad += 1u8;
        Ok(sum)
    }

    /// `ln 2` at `bits` fractional bits, cached.
    pub fn ln2(bits: u32) -> Self {
        static CACHE: OnceLock<Mutex<HashMap<u32, CertifiedReal>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(v) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&bits) {
            return v.clone();
        }
        let wb = bits + LN_GUARD_BITS;
        let third = Self::from_ratio(1, 3, wb).expect("nonzero denominator");
        let v = Self::atanh_series(&third)
            .expect("1/3 is inside the series domain")
            .mul_int(2)
            .with_bits(bits);
        cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(bits, v.clone());
        v
    }

    /// Natural logarithm of a ball that is certified positive.
    pub fn ln(&self) -> Result<Self> {
        let lower = self.lower_scaled();
        if !lower.is_positive() {
            return Err(Error::precision("ln", "argument not certified positive"));
        }
        let bits = self.bits;
        let wb = bits + LN_GUARD_BITS;
        let m = self.mid.magnitude();
        let len = m.bits() as i64;
        // x = m / 2^bits = 2^k * y with y in [0.75, 1.5).
        let mut k = len - 1 - bits as i64;
        let to_y = |k: i64| -> CertifiedReal {
            let sh = wb as i64 - bits as i64 - k;
            if sh >= 0 {
                CertifiedReal {
                    mid: BigInt::from(m << sh as u64),
                    rad: BigUint::zero(),
                    bits: wb,
                }
            } else {
                CertifiedReal {
                    mid: round_shr(&BigInt::from(m.clone()), (-sh) as u32),
                    rad: BigUint::one(),
                    bits: wb,
                }
            }
        };
        let mut y = to_y(k);
        let three_halves = BigInt::from(pow2(wb)) * 3 / 2;
        if y.mid >= three_halves {
            k += 1;
            y = to_y(k);
        }
        let one = Self::one(wb);
        let t = y.sub(&one).div(&y.add(&one))?;
        let ln_y = Self::atanh_series(&t)?.mul_int(2);
        let mut result = Self::ln2(wb).mul_int(k).add(&ln_y);
        // |ln x - ln mid| <= rad / (mid - rad)
        if !self.rad.is_zero() {
            let widen = (&self.rad << wb).div_ceil(lower.magnitude());
            result.rad += widen + 1u8;
        }
        Ok(result.with_bits(bits))
    }

    /// `floor` of the enclosed value when it is the same across the ball.
    pub fn floor(&self) -> Option<BigInt> {
        let s = BigInt::from(pow2(self.bits));
        let lo = self.lower_scaled().div_floor(&s);
        let hi = self.upper_scaled().div_floor(&s);
        (lo == hi).then_some(lo)
    }

    /// Smallest integer strictly greater than every point of the ball.
    pub fn strict_integer_ceiling(&self) -> BigInt {
        let s = BigInt::from(pow2(self.bits));
        self.upper_scaled().div_floor(&s) + 1
    }

    /// Smallest integer not below any point of the ball.
    pub fn ceil_upper(&self) -> BigInt {
        let s = BigInt::from(pow2(self.bits));
        let u = self.upper_scaled();
        let (q, r) = u.div_mod_floor(&s);
        if r.is_zero() {
            q
        } else {
            q + 1
        }
    }

    /// Largest integer not above any point of the ball.
    pub fn floor_lower(&self) -> BigInt {
        let s = BigInt::from(pow2(self.bits));
        self.lower_scaled().div_floor(&s)
    }

    pub fn certainly_lt(&self, other: &Self) -> bool {
        let (a, b) = Self::aligned(self, other);
        a.upper_scaled() < b.lower_scaled()
    }

    pub fn certainly_le(&self, other: &Self) -> bool {
        let (a, b) = Self::aligned(self, other);
        a.upper_scaled() <= b.lower_scaled()
    }

    pub fn certainly_gt(&self, other: &Self) -> bool {
        other.certainly_lt(self)
    }

    pub fn certainly_positive(&self) -> bool {
        self.lower_scaled().is_positive()
    }

    /// Certified ordering: `Some(true)` if `self < other` everywhere,
    /// `Some(false)` if `self >= other` everywhere, `None` if the balls overlap.
    pub fn compare_lt(&self, other: &Self) -> Option<bool> {
        if self.certainly_lt(other) {
            Some(true)
        } else if other.certainly_le(self) {
            Some(false)
        } else {
            None
        }
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        let (a, b) = Self::aligned(self, other);
        a.lower_scaled() <= b.upper_scaled() && b.lower_scaled() <= a.upper_scaled()
    }

    /// Whether the exact rational `num / den` (with `den > 0`) lies in the ball.
    pub fn contains_ratio(&self, num: &BigInt, den: &BigInt) -> bool {
        let target = num << self.bits;
        self.lower_scaled() * den <= target && target <= self.upper_scaled() * den
    }

    /// Radius as a real number, rounded up to a single-precision-ish float
    /// only for reporting.
    pub fn radius_f64(&self) -> f64 {
        scaled_to_f64(&BigInt::from(self.rad.clone()), self.bits)
    }

    /// `log10` of the radius; `-inf` for exact balls.
    pub fn radius_log10(&self) -> f64 {
        if self.rad.is_zero() {
            return f64::NEG_INFINITY;
        }
        biguint_log10(&self.rad) - self.bits as f64 * LOG10_2
    }

    /// Whether the radius is at most `10^exp10`.
    pub fn radius_at_most_pow10(&self, exp10: i64) -> bool {
        // rad / 2^bits <= 10^exp10  <=>  rad * 10^-exp10 <= 2^bits
        if exp10 >= 0 {
            BigInt::from(self.rad.clone()) <= BigInt::from(pow2(self.bits)) * num_traits::pow(BigInt::from(10), exp10 as usize)
        } else {
            self.rad.clone() * num_traits::pow(BigUint::from(10u8), (-exp10) as usize) <= pow2(self.bits)
        }
    }

    /// Whether every point of the ball has absolute value at most `10^exp10`.
    pub fn abs_at_most_pow10(&self, exp10: i64) -> bool {
        let extent = self.mid.magnitude() + &self.rad;
        if exp10 >= 0 {
            extent <= pow2(self.bits) * num_traits::pow(BigUint::from(10u8), exp10 as usize)
        } else {
            extent * num_traits::pow(BigUint::from(10u8), (-exp10) as usize) <= pow2(self.bits)
        }
    }

    pub fn to_f64(&self) -> f64 {
        scaled_to_f64(&self.mid, self.bits)
    }

    /// Midpoint rounded to `digits` decimals.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scaled = div_round(
            &(&self.mid * num_traits::pow(BigInt::from(10), digits)),
            &BigInt::from(pow2(self.bits)),
        );
        let neg = scaled.is_negative();
        let s = scaled.magnitude().to_str_radix(10);
        let s = if s.len() <= digits {
            format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
        } else {
            s
        };
        let (int_part, frac_part) = s.split_at(s.len() - digits);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    /// Radius in scientific notation, e.g. `"3.1e-205"`.
    pub fn radius_sci(&self) -> String {
        if self.rad.is_zero() {
            return "0".to_string();
        }
        let l = self.radius_log10();
        let e = l.floor();
        let mant = 10f64.powf(l - e);
        format!("{mant:.2}e{}", e as i64)
    }
}

fn ceil_div(x: &BigUint, k: u64) -> BigUint {
    x.div_ceil(&BigUint::from(k))
}

fn biguint_log10(x: &BigUint) -> f64 {
    let len = x.bits();
    if len <= 1000 {
        return x.to_f64().map(f64::log10).unwrap_or(f64::INFINITY);
    }
    let shift = len - 64;
    let top = (x >> shift).to_f64().unwrap_or(1.0);
    top.log10() + shift as f64 * LOG10_2
}

fn scaled_to_f64(v: &BigInt, bits: u32) -> f64 {
    let mag = v.magnitude();
    let len = mag.bits();
    let shift = len.saturating_sub(64);
    let top = (mag >> shift).to_f64().unwrap_or(0.0);
    let value = top * 2f64.powi(shift as i32 - bits as i32);
    if v.sign() == Sign::Minus {
        -value
    } else {
        value
    }
}

impl fmt::Display for CertifiedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(f, "{} ± {}", self.to_decimal(digits), self.radius_sci())
    }
}
