//! Continued-fraction reduction of the Matveev bound.
//!
//! The inhomogeneous step: with `Lambda / log 10 = m - b2 theta + psi`,
//! `theta = log alpha / log 10`, `psi = log(d / (9 c_alpha^f)) / log 10` and
//! `|Lambda| < c exp(-delta n)`, a convergent denominator `q > X0` with
//! `||q psi|| > 2 X0 / q` forces `n < log(q^2 c / (log 10 X0)) / delta`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baker::{self, GammaModel, InitialBound};
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::real::{compute_constants, CertifiedReal, TribConstants};

pub const MAX_DEPTH: usize = 200;
pub const MAX_DIGITS: u32 = 1600;
/// Below this the distance-to-integer decisions are not attempted at all.
pub const MIN_REDUCTION_DIGITS: u32 = 100;
pub const DEFAULT_REDUCTION_DIGITS: u32 = 200;
pub const DELTA: &str = "0.6";

/// `ceil(c_gamma * (-log(1 - a)) / a)`: from `|Gamma| < a` one gets
/// `|log(1 + Gamma)| < (-log(1 - a) / a) |Gamma|`.
pub fn lambda_coefficient(c_gamma: u64, a: &str, bits: u32) -> Result<u64> {
    let a_val = CertifiedReal::from_decimal(a, bits)?;
    let one = CertifiedReal::one(bits);
    if !(a_val.certainly_positive() && a_val.certainly_lt(&one)) {
        return Err(Error::InvalidArgument(format!("a = {a} must lie in (0, 1)")));
    }
    let factor = one.sub(&a_val).ln()?.neg().div(&a_val)?;
    CertifiedReal::from_int(c_gamma, bits)
        .mul(&factor)
        .ceil_upper()
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument("lambda coefficient overflow".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    #[serde(with = "crate::serde_big::bigint")]
    pub p: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub q: BigInt,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuedFraction {
    /// Enclosure of the expanded value at the precision that certified it.
    pub value: String,
    #[serde(with = "crate::serde_big::bigint_vec")]
    pub partial_quotients: Vec<BigInt>,
    pub convergents: Vec<Convergent>,
    #[serde(skip)]
    pub digits: u32,
}

fn rational_cf(mut num: BigInt, mut den: BigInt, limit: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    while !den.is_zero() && out.len() < limit {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        num = std::mem::replace(&mut den, r);
    }
    out
}

fn convergents_of(quotients: &[BigInt]) -> Vec<Convergent> {
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    quotients
        .iter()
        .map(|a| {
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            Convergent { p: p.clone(), q: q.clone() }
        })
        .collect()
}

impl ContinuedFraction {
    /// The partial quotients shared by every real in the ball. Both rational
    /// endpoints are expanded; the last shared quotient is dropped, since a
    /// rational's final quotient is not that of nearby irrationals.
    pub fn from_ball(x: &CertifiedReal, depth: usize) -> Self {
        let den = BigInt::one() << x.bits();
        let lo = rational_cf(x.lower_scaled(), den.clone(), depth + 2);
        let hi = rational_cf(x.upper_scaled(), den, depth + 2);
        let mut common: Vec<BigInt> = lo.iter().zip(&hi).take_while(|(a, b)| a == b).map(|(a, _)| a.clone()).collect();
        common.pop();
        common.truncate(depth + 1);
        ContinuedFraction {
            value: x.to_decimal(30),
            convergents: convergents_of(&common),
            partial_quotients: common,
            digits: x.digits(),
        }
    }

    pub fn len(&self) -> usize {
        self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_quotients.is_empty()
    }

    pub fn q(&self, k: usize) -> Option<&BigInt> {
        self.convergents.get(k).map(|c| &c.q)
    }
}

/// Expands the value produced by `eval(digits)` to `depth` (indices
/// `0..=depth`), doubling precision from `start_digits` until the prefix is
/// long enough and agrees with the expansion at twice that precision.
pub fn cf_expand<F>(eval: F, depth: usize, start_digits: u32) -> Result<ContinuedFraction>
where
    F: Fn(u32) -> Result<CertifiedReal>,
{
    if depth > MAX_DEPTH {
        return Err(Error::InvalidArgument(format!("depth {depth} exceeds {MAX_DEPTH}")));
    }
    let mut digits = start_digits;
    let mut cf = ContinuedFraction::from_ball(&eval(digits)?, depth);
    loop {
        if digits * 2 > MAX_DIGITS {
            return Err(Error::precision(
                "continued fraction",
                format!("partial quotient a_{} uncertified at {digits} digits", cf.len()),
            ));
        }
        let finer = ContinuedFraction::from_ball(&eval(digits * 2)?, depth);
        let stable = cf.len() > depth && finer.partial_quotients[..cf.len()] == cf.partial_quotients[..];
        if stable {
            return Ok(cf);
        }
        digits *= 2;
        cf = finer;
    }
}

/// `log alpha / log 10` at `digits`.
pub fn theta(consts: &TribConstants) -> Result<CertifiedReal> {
    consts.log_alpha.div(&consts.log_10)
}

pub fn theta_cf(depth: usize, start_digits: u32) -> Result<ContinuedFraction> {
    cf_expand(|d| theta(&compute_constants(d)?), depth, start_digits)
}

/// `psi = log(d / (9 c_alpha^f)) / log 10`.
pub fn psi(consts: &TribConstants, d: u8, f: u32) -> Result<CertifiedReal> {
    let log_c = consts.c_alpha.ln()?;
    consts
        .ln_int(d as i64)?
        .sub(&consts.ln_int(9)?)
        .sub(&log_c.mul_int(f as i64))
        .div(&consts.log_10)
}

/// Certified lower bound on the distance from `x` to the nearest integer.
pub fn distance_to_integer_lower(x: &CertifiedReal) -> CertifiedReal {
    let bits = x.bits();
    let one = BigInt::one() << bits;
    let half: BigInt = &one >> 1u32;
    let nearest: BigInt = (x.mid() + half).div_floor(&one);
    [-1i64, 0, 1]
        .iter()
        .map(|j| {
            let dist = x.sub(&CertifiedReal::from_int(&nearest + j, bits)).abs();
            let lo = dist.lower_scaled().max(BigInt::zero());
            CertifiedReal::from_scaled_interval(lo.clone(), lo, bits)
        })
        .reduce(|a, b| if b.certainly_lt(&a) { b } else { a })
        .expect("three candidates")
}

/// Enclosure of `|x - round(mid x)|`, an upper bound on `||x||`.
pub fn distance_to_integer_upper(x: &CertifiedReal) -> CertifiedReal {
    let bits = x.bits();
    let one = BigInt::one() << bits;
    let half: BigInt = &one >> 1u32;
    let nearest: BigInt = (x.mid() + half).div_floor(&one);
    x.sub(&CertifiedReal::from_int(nearest, bits)).abs()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomogeneousOutcome {
    pub y0: u64,
    #[serde(with = "crate::serde_big::bigint")]
    pub a_max: BigInt,
    pub upper: String,
    /// Largest `Y` not excluded.
    pub max_y: u64,
}

/// Homogeneous reduction (`psi = 0`): with `Y0 = -1 + log(sqrt5 X0 + 1) /
/// log phi` and `A = max a_(k+1)` over `k <= Y0`, every solution has
/// `Y < log(c (A + 2) X0 / |theta2|) / delta`.
pub fn reduce_homogeneous(
    cf: &ContinuedFraction,
    c: &CertifiedReal,
    delta: &CertifiedReal,
    x0: u64,
    theta2: &CertifiedReal,
) -> Result<HomogeneousOutcome> {
    let bits = c.bits();
    let one = CertifiedReal::one(bits);
    let sqrt5 = CertifiedReal::from_int(5, bits).sqrt()?;
    let phi = one.add(&sqrt5).div_int(2)?;
    let x0_real = CertifiedReal::from_int(x0, bits);
    let y0_real = sqrt5.mul(&x0_real).add(&one).ln()?.div(&phi.ln()?)?.sub(&one);
    let y0 = y0_real.floor_lower().max(BigInt::zero()).to_u64().unwrap_or(u64::MAX);
    let needed = y0 as usize + 2;
    if cf.len() < needed {
        return Err(Error::precision(
            "homogeneous reduction",
            format!("need {needed} partial quotients, have {}", cf.len()),
        ));
    }
    let a_max = cf.partial_quotients[1..needed].iter().max().cloned().unwrap_or_default();
    let upper = c
        .mul(&CertifiedReal::from_int(&a_max + 2, bits))
        .mul(&x0_real)
        .div(&theta2.abs())?
        .ln()?
        .div(delta)?;
    let strict = upper.ceil_upper();
    Ok(HomogeneousOutcome {
        y0,
        a_max,
        upper: upper.to_decimal(4),
        max_y: (strict - BigInt::one()).max(BigInt::zero()).to_u64().unwrap_or(u64::MAX),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedStage {
    pub x0: String,
    pub convergent_index: usize,
    pub bound: u64,
}

pub fn printed_stage(equation: Equation, stage: u32) -> Option<PrintedStage> {
    let (x0, k, bound) = match (equation, stage) {
        (Equation::Eq1, 1) => ("1.7e17", 42, 104),
        (Equation::Eq1, 2) => ("749", 12, 49),
        (Equation::Eq2, 1) => ("1.5e17", 42, 102),
        (Equation::Eq2, 2) => ("621", 12, 47),
        (Equation::Eq3, 1) => ("5.4e17", 43, 123),
        (Equation::Eq3, 2) => ("1793", 14, 67),
        _ => return None,
    };
    Some(PrintedStage { x0: x0.into(), convergent_index: k, bound })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionOutcome {
    pub stage: u32,
    /// Every solution at this stage has `n < input_bound`.
    pub input_bound: u64,
    pub x0: u64,
    pub c: u64,
    pub delta: String,
    pub convergent_index: usize,
    #[serde(with = "crate::serde_big::bigint")]
    pub q: BigInt,
    pub upper: String,
    /// Every solution has `n < new_bound`.
    pub new_bound: u64,
    pub checked_cases: Vec<(u8, u32)>,
    pub printed: Option<PrintedStage>,
}

enum Verdict {
    Holds,
    Fails(Vec<(u8, u32)>),
    Undecided,
}

fn norm_condition(consts: &TribConstants, q: &BigInt, x0: u64, cases: &[(u8, u32)]) -> Result<Verdict> {
    let bits = consts.bits();
    let threshold = CertifiedReal::from_int(2 * x0 as i128, bits).div(&CertifiedReal::from_int(q.clone(), bits))?;
    let results: Vec<Result<Option<bool>>> = cases
        .par_iter()
        .map(|&(d, f)| {
            let x = psi(consts, d, f)?.mul_big(q);
            let dist = distance_to_integer_lower(&x);
            Ok(if dist.certainly_gt(&threshold) {
                Some(true)
            } else if distance_to_integer_upper(&x).certainly_lt(&threshold) {
                Some(false)
            } else {
                None
            })
        })
        .collect();
    let mut failing = Vec::new();
    for (r, &case) in results.into_iter().zip(cases) {
        match r? {
            Some(true) => {}
            Some(false) => failing.push(case),
            None => return Ok(Verdict::Undecided),
        }
    }
    Ok(if failing.is_empty() { Verdict::Holds } else { Verdict::Fails(failing) })
}

/// All `(d, f)` with `d` in 1..=9 and `f` over the equation's factor counts.
pub fn cases(equation: Equation) -> Result<Vec<(u8, u32)>> {
    let fs = baker::factor_counts(equation)?;
    Ok(fs.flat_map(|f| (1..=9u8).map(move |d| (d, f))).collect())
}

/// Finds the smallest convergent `q > X0` satisfying the norm condition for
/// every case and returns the reduced bound. `Err(Precision)` asks the caller
/// to retry with more digits.
pub fn reduce_inhomogeneous(
    consts: &TribConstants,
    cf: &ContinuedFraction,
    c: u64,
    x0: u64,
    cases: &[(u8, u32)],
) -> Result<(usize, BigInt, CertifiedReal)> {
    let bits = consts.bits();
    let x0_big = BigInt::from(x0);
    let mut offending = Vec::new();
    for (k, conv) in cf.convergents.iter().enumerate() {
        if conv.q <= x0_big {
            continue;
        }
        match norm_condition(consts, &conv.q, x0, cases)? {
            Verdict::Holds => {
                let q = CertifiedReal::from_int(conv.q.clone(), bits);
                let upper = q
                    .mul(&q)
                    .mul_int(c as i64)
                    .div(&consts.log_10.mul_int(x0 as i64))?
                    .ln()?
                    .div(&CertifiedReal::from_decimal(DELTA, bits)?)?;
                return Ok((k, conv.q.clone(), upper));
            }
            Verdict::Fails(f) => offending = f,
            Verdict::Undecided => {
                return Err(Error::precision(
                    "reduction",
                    format!("||q_{k} psi|| not separated from 2 X0 / q at {} digits", consts.digits),
                ))
            }
        }
    }
    if cf.len() > MAX_DEPTH {
        return Err(Error::ReductionFailed {
            x0,
            depth: cf.len(),
            offending: offending.into_iter().map(|(d, f)| (d as u32, f)).collect(),
        });
    }
    Err(Error::precision(
        "reduction",
        format!("no admissible convergent among the {} certified at {} digits", cf.len(), consts.digits),
    ))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionChain {
    pub equation: Equation,
    pub model: GammaModel,
    pub initial: InitialBound,
    pub lambda_c: u64,
    pub stages: Vec<ReductionOutcome>,
    pub final_bound: u64,
}

fn check_min_digits(digits: u32) -> Result<()> {
    if digits < MIN_REDUCTION_DIGITS {
        return Err(Error::precision(
            "reduction",
            format!("{digits} digits requested; distance-to-integer tests need at least {MIN_REDUCTION_DIGITS}"),
        ));
    }
    Ok(())
}

/// Context shared by both chains: constants and the expansion of theta at a
/// precision that settled every decision.
pub struct ReductionContext {
    pub consts: TribConstants,
    pub cf: ContinuedFraction,
}

impl ReductionContext {
    pub fn new(digits: u32) -> Result<Self> {
        check_min_digits(digits)?;
        let consts = compute_constants(digits)?;
        let cf = ContinuedFraction::from_ball(&theta(&consts)?, MAX_DEPTH);
        Ok(ReductionContext { consts, cf })
    }
}

fn run_stages(ctx: &ReductionContext, equation: Equation, model: GammaModel) -> Result<ReductionChain> {
    let consts = &ctx.consts;
    let initial = baker::initial_bound(equation, model, consts)?;
    let gamma = baker::gamma_bound(equation, model, consts)?;
    if !gamma.small_at_threshold {
        return Err(Error::certification("reduction", format!("|Gamma| < {} not certified", gamma.small_a)));
    }
    let lambda_c = lambda_coefficient(gamma.coefficient, &gamma.small_a, consts.bits())?;
    let cases = cases(equation)?;
    let mut bound = initial.bound;
    let mut stages = Vec::new();
    for stage in 1..=2u32 {
        let x0 = baker::max_exponent(equation, bound - 1)?;
        let (k, q, upper) = reduce_inhomogeneous(consts, &ctx.cf, lambda_c, x0, &cases)?;
        let new_bound = upper
            .ceil_upper()
            .to_u64()
            .ok_or_else(|| Error::certification("reduction", "bound overflow"))?;
        stages.push(ReductionOutcome {
            stage,
            input_bound: bound,
            x0,
            c: lambda_c,
            delta: DELTA.into(),
            convergent_index: k,
            q,
            upper: upper.to_decimal(4),
            new_bound: new_bound.min(bound),
            checked_cases: cases.clone(),
            printed: match model {
                GammaModel::ThreeHalves => printed_stage(equation, stage),
                GammaModel::ShiftDominated => None,
            },
        });
        bound = new_bound.min(bound);
    }
    Ok(ReductionChain { equation, model, initial, lambda_c, stages, final_bound: bound })
}

/// Both reduction stages for one `|Gamma|` model, doubling precision from
/// `digits` (up to [`MAX_DIGITS`]) whenever a decision is not settled.
/// Returns the chain and the precision that settled it.
pub fn two_stage_reduce(equation: Equation, model: GammaModel, digits: u32) -> Result<(ReductionChain, u32)> {
    // an explicitly too-low request is a configuration error, not a retry
    check_min_digits(digits)?;
    let mut digits = digits;
    loop {
        let ctx = ReductionContext::new(digits)?;
        match run_stages(&ctx, equation, model) {
            Err(Error::Precision { .. }) if digits * 2 <= MAX_DIGITS => digits *= 2,
            other => return other.map(|c| (c, digits)),
        }
    }
}

/// Sign helper for tests and reports: `p_k q_(k-1) - p_(k-1) q_k`.
pub fn determinant(cf: &ContinuedFraction, k: usize) -> Option<BigInt> {
    if k == 0 || k >= cf.convergents.len() {
        return None;
    }
    let (a, b) = (&cf.convergents[k], &cf.convergents[k - 1]);
    Some(&a.p * &b.q - &b.p * &a.q)
}

pub fn is_unit(v: &BigInt) -> bool {
    v.abs().is_one() && v.sign() != Sign::NoSign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_coefficient(11964, "0.02", 200).unwrap(), 12086);
        assert_eq!(lambda_coefficient(3988, "0.005", 200).unwrap(), 3999);
        assert_eq!(lambda_coefficient(8721506, "0.002", 200).unwrap(), 8730240);
        assert!(lambda_coefficient(10, "1", 200).is_err());
        assert!(lambda_coefficient(10, "1.5", 200).is_err());
    }

    #[test]
    fn golden_ratio_expansion() {
        let phi = |d: u32| {
            let bits = crate::real::bits_for_digits(d);
            let one = CertifiedReal::one(bits);
            one.add(&CertifiedReal::from_int(5, bits).sqrt()?).div_int(2)
        };
        let cf = cf_expand(phi, 10, 50).unwrap();
        assert!(cf.partial_quotients[..=10].iter().all(|a| a.is_one()));
        let qs: Vec<i64> = cf.convergents[..=10].iter().map(|c| c.q.to_i64().unwrap()).collect();
        assert_eq!(qs, vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        for k in 1..=10 {
            assert!(is_unit(&determinant(&cf, k).unwrap()));
        }
    }

    #[test]
    fn theta_convergents() {
        let cf = theta_cf(45, 100).unwrap();
        assert_eq!(cf.q(12).unwrap().to_string(), "686323");
        assert_eq!(cf.q(14).unwrap().to_string(), "9120227");
        assert_eq!(cf.q(42).unwrap().to_string(), "152414933276058910307");
        assert_eq!(cf.q(43).unwrap().to_string(), "3468665590923027810230");
        let head: Vec<u64> = cf.partial_quotients[..12].iter().map(|a| a.to_u64().unwrap()).collect();
        assert_eq!(head, vec![0, 3, 1, 3, 1, 1, 14, 1, 3, 3, 6, 1]);
    }

    #[test]
    fn homogeneous_golden_example() {
        let bits = 200;
        let one = CertifiedReal::one(bits);
        let phi = one.add(&CertifiedReal::from_int(5, bits).sqrt().unwrap()).div_int(2).unwrap();
        let cf = ContinuedFraction::from_ball(&phi, 60);
        let log10 = CertifiedReal::from_int(10, bits).ln().unwrap();
        let out = reduce_homogeneous(&cf, &one, &one, 10, &log10).unwrap();
        assert_eq!(out.a_max, BigInt::one());
        assert_eq!(out.max_y, 2);
        assert!(out.upper.starts_with("2.56") || out.upper.starts_with("2.57"));
        let wider = reduce_homogeneous(&cf, &one, &one, 100, &log10).unwrap();
        let diff = wider.upper.parse::<f64>().unwrap() - out.upper.parse::<f64>().unwrap();
        assert!((diff - std::f64::consts::LN_10).abs() < 1e-3);
    }

    #[test]
    fn distance_to_integer() {
        let x = CertifiedReal::from_decimal("3.75", 100).unwrap();
        assert_eq!(distance_to_integer_lower(&x).to_decimal(4), "0.2500");
        let y = CertifiedReal::from_decimal("-2.1", 100).unwrap();
        assert!(distance_to_integer_lower(&y).to_decimal(4).starts_with("0.1"));
    }

    #[test]
    fn under_precision_rejected() {
        assert!(matches!(ReductionContext::new(50), Err(Error::Precision { .. })));
        assert!(matches!(
            two_stage_reduce(Equation::Eq1, GammaModel::ThreeHalves, 50),
            Err(Error::Precision { .. })
        ));
    }
}
