//! Certified enclosures of the dominant Tribonacci root and friends.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::ball::{bits_for_digits, CertifiedReal};
use crate::error::{Error, Result};
use crate::seq::trib_prefix;

pub const MIN_DIGITS: u32 = 50;
const GUARD_BITS: u32 = 16;
const NEWTON_LIMIT: usize = 64;

/// Constants of the Binet formula `T_s = c_a a^s + c_b b^s + c_g g^s`, all as
/// certified balls at a common precision. The complex roots enter only
/// through `|beta| = alpha^(-1/2)`.
#[derive(Clone, Debug)]
pub struct TribConstants {
    pub digits: u32,
    pub alpha: CertifiedReal,
    pub c_alpha: CertifiedReal,
    pub log_alpha: CertifiedReal,
    pub log_10: CertifiedReal,
    pub beta_abs: CertifiedReal,
}

/// Characteristic polynomial scaled by `S^3`: `z^3 - z^2 S - z S^2 - S^3`.
fn char_poly_scaled(z: &BigInt, s: &BigInt) -> BigInt {
    z * z * z - z * z * s - z * s * s - s * s * s
}

fn certify_alpha(bits: u32) -> Result<CertifiedReal> {
    let s = BigInt::one() << bits;
    let mut z = BigInt::from(1839286755214161u64) * &s / BigInt::from(10u64.pow(15));
    for _ in 0..NEWTON_LIMIT {
        let f = char_poly_scaled(&z, &s);
        let fp = BigInt::from(3) * &z * &z - BigInt::from(2) * &z * &s - &s * &s;
        let step = &f / &fp;
        z -= &step;
        if step.abs() <= BigInt::from(1) {
            break;
        }
    }
    // The polynomial is increasing on [1.8, 1.9], so a sign change pins the root.
    let slack = BigInt::from(4);
    let lo = &z - &slack;
    let hi = &z + &slack;
    let lo_ok = char_poly_scaled(&lo, &s).is_negative();
    let hi_ok = char_poly_scaled(&hi, &s).is_positive();
    let in_window = lo >= BigInt::from(18) * &s / 10 && hi <= BigInt::from(19) * &s / 10;
    if !(lo_ok && hi_ok && in_window) {
        return Err(Error::certification("alpha", "no certified sign change around the Newton iterate"));
    }
    Ok(CertifiedReal::from_parts(z, BigUint::from(4u8), bits))
}

fn ratio(n: i64, d: i64, bits: u32) -> CertifiedReal {
    CertifiedReal::from_ratio(n, d, bits).expect("nonzero denominator")
}

pub fn compute_constants(digits: u32) -> Result<TribConstants> {
    if digits < MIN_DIGITS {
        return Err(Error::precision(
            "constants",
            format!("{digits} digits requested, at least {MIN_DIGITS} needed"),
        ));
    }
    let bits = bits_for_digits(digits) + GUARD_BITS;
    let alpha = certify_alpha(bits)?;
    let a2 = alpha.mul(&alpha);
    let denom = a2.mul_int(3).sub(&alpha.mul_int(2)).sub(&CertifiedReal::one(bits));
    let c_alpha = denom.recip()?;
    let log_alpha = alpha.ln()?;
    let log_10 = CertifiedReal::from_int(10, bits).ln()?;
    let beta_abs = alpha.sqrt()?.recip()?;

    let consts = TribConstants {
        digits,
        alpha,
        c_alpha,
        log_alpha,
        log_10,
        beta_abs,
    };
    consts.check_enclosures()?;
    Ok(consts)
}

impl TribConstants {
    pub fn bits(&self) -> u32 {
        self.alpha.bits()
    }

    fn check_enclosures(&self) -> Result<()> {
        let b = self.bits();
        let within = |x: &CertifiedReal, lo: (i64, i64), hi: (i64, i64)| {
            ratio(lo.0, lo.1, b).certainly_lt(x) && x.certainly_lt(&ratio(hi.0, hi.1, b))
        };
        if !within(&self.alpha, (183, 100), (184, 100)) {
            return Err(Error::certification("constants", "alpha outside (1.83, 1.84)"));
        }
        if !within(&self.beta_abs, (73, 100), (74, 100)) {
            return Err(Error::certification("constants", "|beta| outside (0.73, 0.74)"));
        }
        if !within(&self.c_alpha, (18, 100), (19, 100)) {
            return Err(Error::certification("constants", "c_alpha outside (0.18, 0.19)"));
        }
        let tolerance = 2 - self.digits as i64;
        for (name, ball) in self.named() {
            if !ball.radius_at_most_pow10(tolerance) {
                return Err(Error::precision(
                    "constants",
                    format!("radius of {name} is {} > 1e{tolerance}", ball.radius_sci()),
                ));
            }
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, &CertifiedReal); 5] {
        [
            ("alpha", &self.alpha),
            ("c_alpha", &self.c_alpha),
            ("log_alpha", &self.log_alpha),
            ("log_10", &self.log_10),
            ("beta_abs", &self.beta_abs),
        ]
    }

    pub fn ln_int(&self, v: i64) -> Result<CertifiedReal> {
        CertifiedReal::from_int(v, self.bits()).ln()
    }

    /// `alpha^3 - alpha^2 - alpha - 1`, which must enclose zero.
    pub fn char_poly_residual(&self) -> CertifiedReal {
        let a = &self.alpha;
        let a2 = a.mul(a);
        a2.mul(a).sub(&a2).sub(a).sub(&CertifiedReal::one(self.bits()))
    }

    /// `|beta|^2 alpha - 1`, which must enclose zero.
    pub fn root_product_residual(&self) -> CertifiedReal {
        self.beta_abs
            .mul(&self.beta_abs)
            .mul(&self.alpha)
            .sub(&CertifiedReal::one(self.bits()))
    }

    /// `c_alpha (3 alpha^2 - 2 alpha - 1) - 1`, which must enclose zero.
    pub fn c_alpha_residual(&self) -> CertifiedReal {
        let a = &self.alpha;
        let d = a.mul(a).mul_int(3).sub(&a.mul_int(2)).sub(&CertifiedReal::one(self.bits()));
        self.c_alpha.mul(&d).sub(&CertifiedReal::one(self.bits()))
    }

    /// Upper bound `2 log 9 + (f/3) log 44` on the height of `d / (9 c_alpha^f)`.
    /// The bound is uniform in the digit `d`.
    pub fn height_eta1(&self, d: u8, f: u32) -> Result<CertifiedReal> {
        if !(1..=9).contains(&d) {
            return Err(Error::InvalidArgument(format!("digit {d} not in 1..9")));
        }
        let log9 = self.ln_int(9)?;
        let log44 = self.ln_int(44)?;
        Ok(log9.mul_int(2).add(&log44.mul_int(f as i64).div_int(3)?))
    }

    /// Checks `alpha^(n-2) <= T_n <= alpha^(n-1)` for `1 <= n <= n_max`.
    pub fn growth_sandwich_check(&self, n_max: u64) -> Result<bool> {
        let b = self.bits();
        let terms = trib_prefix(n_max);
        let inv_alpha = self.alpha.recip()?;
        // alpha^(n-1) at n = 1; exact powers keep the equality cases n = 1, 2 decidable
        let mut upper = CertifiedReal::one(b);
        let mut lower = inv_alpha;
        for (n, t) in terms.iter().enumerate().skip(1) {
            if n == 2 {
                lower = CertifiedReal::one(b);
            }
            let t = CertifiedReal::from_int(BigInt::from(t.clone()), b);
            match (lower.certainly_le(&t), t.certainly_le(&upper)) {
                (true, true) => {}
                _ if lower.overlaps(&t) || t.overlaps(&upper) => {
                    return Err(Error::precision("growth sandwich", "bound undecided"))
                }
                _ => return Ok(false),
            }
            if n >= 2 {
                lower = lower.mul(&self.alpha);
            }
            upper = upper.mul(&self.alpha);
        }
        Ok(true)
    }

    pub fn dump(&self, shown_digits: usize) -> Vec<ConstantEntry> {
        self.named()
            .into_iter()
            .map(|(name, ball)| ConstantEntry {
                name: name.to_string(),
                value: ball.to_decimal(shown_digits),
                radius: ball.radius_sci(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstantEntry {
    pub name: String,
    pub value: String,
    pub radius: String,
}

/// Digits needed so `c_alpha alpha^(s+1)` is resolved far below `alpha^(-s/2)`.
fn binet_digits(n_max: u64) -> u32 {
    let need = 1.5 * n_max as f64 * 0.2647 + 40.0;
    (need.ceil() as u32).max(MIN_DIGITS)
}

/// Checks `|T_s - c_alpha alpha^(s+1)| < alpha^(-s/2)` for `1 <= s <= n_max`,
/// raising precision until every comparison is decided.
///
/// With `c_alpha = 1/(3 alpha^2 - 2 alpha - 1)` the sum over the three roots
/// `c_r r^s` is `0, 0, 1, 1, 2, ...`, i.e. `T_(s-1)` when `T_1 = T_2 = 1`; the
/// dominant term of `T_s` is therefore `c_alpha alpha^(s+1)`.
pub fn binet_error_check(n_max: u64) -> Result<bool> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let mut digits = binet_digits(n_max);
    let ceiling = digits * 8;
    loop {
        let consts = compute_constants(digits)?;
        match binet_error_check_with(&consts, n_max) {
            Ok(v) => return Ok(v),
            Err(Error::Precision { .. }) if digits < ceiling => digits *= 2,
            Err(e) => return Err(e),
        }
    }
}

pub fn binet_error_check_with(consts: &TribConstants, n_max: u64) -> Result<bool> {
    Ok(first_binet_violation(consts, n_max, 1)?.is_none())
}

/// First `s <= n_max` with `|T_s - c_alpha alpha^(s+shift)| >= alpha^(-s/2)`.
/// `shift = 1` is the true alignment; `shift = 0` audits the unshifted reading.
pub fn first_binet_violation(consts: &TribConstants, n_max: u64, shift: u32) -> Result<Option<u64>> {
    let b = consts.bits();
    let terms = trib_prefix(n_max);
    let mut power = consts.alpha.pow(1 + shift);
    let mut decay = consts.beta_abs.clone();
    for (s, t) in terms.iter().enumerate().skip(1) {
        let t = CertifiedReal::from_int(BigInt::from(t.clone()), b);
        let err = t.sub(&consts.c_alpha.mul(&power)).abs();
        match err.compare_lt(&decay) {
            Some(true) => {}
            Some(false) => return Ok(Some(s as u64)),
            None => {
                return Err(Error::precision(
                    "binet error check",
                    format!("comparison at s = {s} undecided at {} digits", consts.digits),
                ))
            }
        }
        power = power.mul(&consts.alpha);
        decay = decay.mul(&consts.beta_abs);
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalPolyReport {
    pub printed_polynomial: String,
    pub annihilating_polynomial: String,
    pub printed_vanishes: bool,
    /// `44 c^3 + 4 c - 1` at `c_alpha`.
    pub plus_value: String,
    /// `44 c^3 - 4 c - 1` at `c_alpha`.
    pub minus_value: String,
    pub vanishing_tolerance: String,
    /// Height `(1/3) log 44`, the same under either sign.
    pub height: String,
}

pub const MINPOLY_MIN_DIGITS: u32 = 150;
const MINPOLY_TOLERANCE_EXP: i64 = -140;

/// Audits which of `44x^3 + 4x - 1` and `44x^3 - 4x - 1` annihilates `c_alpha`.
pub fn minimal_poly_check_c_alpha(consts: &TribConstants) -> Result<MinimalPolyReport> {
    if consts.digits < MINPOLY_MIN_DIGITS {
        return Err(Error::precision(
            "minimal polynomial audit",
            format!(
                "{} digits available, {MINPOLY_MIN_DIGITS} needed to resolve 1e{MINPOLY_TOLERANCE_EXP}",
                consts.digits
            ),
        ));
    }
    let c = &consts.c_alpha;
    let b = consts.bits();
    let cubic = c.mul(c).mul(c).mul_int(44);
    let one = CertifiedReal::one(b);
    let plus = cubic.add(&c.mul_int(4)).sub(&one);
    let minus = cubic.sub(&c.mul_int(4)).sub(&one);
    let vanishes = |v: &CertifiedReal| v.abs_at_most_pow10(MINPOLY_TOLERANCE_EXP);
    let nonzero = |v: &CertifiedReal| !v.overlaps(&CertifiedReal::zero(b));
    let (annihilating, printed_vanishes) = match (vanishes(&plus), vanishes(&minus)) {
        (true, false) if nonzero(&minus) => ("44x^3 + 4x - 1", false),
        (false, true) if nonzero(&plus) => ("44x^3 - 4x - 1", true),
        _ => {
            return Err(Error::certification(
                "minimal polynomial audit",
                "not exactly one candidate annihilates c_alpha",
            ))
        }
    };
    let height = consts.ln_int(44)?.div_int(3)?;
    Ok(MinimalPolyReport {
        printed_polynomial: "44x^3 - 4x - 1".into(),
        annihilating_polynomial: annihilating.into(),
        printed_vanishes,
        plus_value: format!("{:.6}", plus),
        minus_value: format!("{:.6}", minus),
        vanishing_tolerance: format!("1e{MINPOLY_TOLERANCE_EXP}"),
        height: height.to_decimal(30),
    })
}

/// Whether every point of `x` lies strictly between the integers `lo` and `hi`.
pub fn strictly_between(x: &CertifiedReal, lo: i64, hi: i64) -> bool {
    let b = x.bits();
    CertifiedReal::from_int(lo, b).certainly_lt(x) && x.certainly_lt(&CertifiedReal::from_int(hi, b))
}

/// Whether the ball certainly encloses zero, i.e. a residual that should vanish.
pub fn encloses_zero(x: &CertifiedReal) -> bool {
    x.lower_scaled() <= BigInt::zero() && x.upper_scaled() >= BigInt::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_digits() {
        let c = compute_constants(50).unwrap();
        assert!(c.alpha.to_decimal(45).starts_with("1.839286755214161132551852564653286600424178746"));
        assert!(c.c_alpha.to_decimal(30).starts_with("0.182803532968295464385265406185"));
        assert!(encloses_zero(&c.char_poly_residual()));
        assert!(encloses_zero(&c.root_product_residual()));
        assert!(encloses_zero(&c.c_alpha_residual()));
    }

    #[test]
    fn too_few_digits() {
        assert!(matches!(compute_constants(49), Err(Error::Precision { .. })));
    }

    #[test]
    fn radii_shrink_with_precision() {
        let lo = compute_constants(60).unwrap();
        let hi = compute_constants(120).unwrap();
        assert!(hi.alpha.radius_log10() < lo.alpha.radius_log10() - 50.0);
        assert!(lo.alpha.overlaps(&hi.alpha));
        assert!(lo.log_alpha.overlaps(&hi.log_alpha));
    }

    #[test]
    fn binet_small_cases() {
        let c = compute_constants(60).unwrap();
        assert!(binet_error_check_with(&c, 60).unwrap());
        // s = 1: |1 - c_alpha alpha| is about 0.664 against alpha^(-1/2) = 0.737,
        // but the unshifted alignment breaks down from s = 3 on
        let e1 = CertifiedReal::one(c.bits()).sub(&c.c_alpha.mul(&c.alpha)).abs();
        assert!(e1.to_decimal(3).starts_with("0.66"));
        assert_eq!(first_binet_violation(&c, 60, 0).unwrap(), Some(3));
        // T_8 = 44 is c_alpha alpha^9 up to 0.02
        let e8 = CertifiedReal::from_int(44, c.bits()).sub(&c.c_alpha.mul(&c.alpha.pow(9))).abs();
        assert!(e8.certainly_lt(&c.beta_abs.pow(8)));
    }

    #[test]
    fn heights() {
        let c = compute_constants(60).unwrap();
        let h7 = c.height_eta1(1, 7).unwrap();
        assert!(h7.to_decimal(2) == "13.23" || h7.to_decimal(2) == "13.22");
        assert!(h7.mul_int(3).certainly_lt(&CertifiedReal::from_int(40, c.bits())));
        let h13 = c.height_eta1(9, 13).unwrap();
        assert!(h13.mul_int(3).certainly_lt(&CertifiedReal::from_decimal("62.4", c.bits()).unwrap()));
        assert!(c.height_eta1(0, 1).is_err());
    }

    #[test]
    fn growth_sandwich() {
        let c = compute_constants(60).unwrap();
        assert!(c.growth_sandwich_check(150).unwrap());
    }
}
