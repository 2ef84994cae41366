//! Matveev lower bounds for the linear forms
//! `Gamma = d 10^m / (9 c_alpha^f alpha^b2) - 1` and the absolute bound on `n`
//! they yield.
//!
//! Two upper-bound models for `|Gamma|` are carried side by side:
//!
//! * [`GammaModel::ThreeHalves`]: `|Gamma| < ceil(3^f / c_alpha) alpha^(-3n/2)`,
//!   the classical estimate obtained by bounding the expansion of the product
//!   term by term with `|e_s| < alpha^(-s/2)`.
//! * [`GammaModel::ShiftDominated`]: `|Gamma| < C' alpha^(-n)`. The `+-1`
//!   shifts perturb each factor by a relative `~ 1/(c_alpha alpha^(n+1))`, so
//!   `alpha^(-n)` is the true decay; this model is rigorous and slightly
//!   weaker, and the pipeline searches up to the larger of both chains.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::real::{CertifiedReal, TribConstants};

pub const MATVEEV_S: u32 = 3;
pub const FIELD_DEGREE: u32 = 3;

/// `B(n) = slope * n + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearBound {
    pub slope: u64,
    pub intercept: u64,
}

impl LinearBound {
    pub const fn new(slope: u64, intercept: u64) -> Self {
        LinearBound { slope, intercept }
    }

    pub fn eval(&self, n: u64) -> u64 {
        self.slope * n + self.intercept
    }
}

impl std::fmt::Display for LinearBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}n+{}", self.slope, self.intercept)
    }
}

/// Block-length caps `(k_max, l_max)` as certified by the 2-adic scan.
pub fn block_caps(equation: Equation) -> Result<(u32, u32)> {
    match equation {
        Equation::Eq1 => Ok((0, 7)),
        Equation::Eq2 => Ok((0, 6)),
        Equation::Eq3 => Ok((6, 7)),
        Equation::Eq4 => Ok((7, 6)),
        Equation::Bgl => Err(Error::InvalidArgument("no linear form for the unshifted product".into())),
    }
}

/// All `(k, l)` allowed by the caps.
pub fn block_shapes(equation: Equation) -> Result<Vec<(u32, u32)>> {
    let (k_max, l_max) = block_caps(equation)?;
    let ks: Vec<u32> = if k_max == 0 { vec![0] } else { (1..=k_max).collect() };
    Ok(ks
        .into_iter()
        .flat_map(|k| (1..=l_max).map(move |l| (k, l)))
        .collect())
}

fn check_shape(equation: Equation, k: u32, l: u32) -> Result<()> {
    let (k_max, l_max) = block_caps(equation)?;
    let k_ok = if k_max == 0 { k == 0 } else { (1..=k_max).contains(&k) };
    if !k_ok || !(1..=l_max).contains(&l) {
        return Err(Error::InvalidArgument(format!(
            "(k, l) = ({k}, {l}) outside the caps ({k_max}, {l_max}) for {equation}"
        )));
    }
    Ok(())
}

/// Upper bound on `m` from `T_u - 1 < T_u <= alpha^(u-1)` and
/// `T_u + 1 < alpha^(u+1)`, summed over the factors.
pub fn m_upper(equation: Equation, n: u64, k: u32, l: u32) -> Result<u64> {
    check_shape(equation, k, l)?;
    let (n, k, l) = (n as i128, k as i128, l as i128);
    let v = match equation {
        Equation::Eq1 => l * n + l * (l + 1) / 2,
        Equation::Eq2 => l * n + l * (l - 3) / 2,
        Equation::Eq3 => (k + l) * n + k * (k - 3) / 2 + l * (2 * k + l + 1) / 2,
        Equation::Eq4 => (k + l) * n + k * (k + 1) / 2 + l * (2 * k + l - 3) / 2,
        Equation::Bgl => unreachable!(),
    };
    Ok(v.max(0) as u64)
}

/// Exponent of `alpha` in the leading term `c_alpha^f alpha^(fn + f(f+1)/2)` of
/// an `f`-factor product starting at `T_n`.
pub fn alpha_exponent(f: u32, n: u64) -> u64 {
    let f = f as u64;
    f * n + f * (f + 1) / 2
}

/// `max(m_upper, alpha_exponent)` over every shape allowed by the caps: the
/// largest coefficient `|b_j|` in the linear form at a given `n`.
pub fn max_exponent(equation: Equation, n: u64) -> Result<u64> {
    block_shapes(equation)?
        .into_iter()
        .map(|(k, l)| Ok(m_upper(equation, n, k, l)?.max(alpha_exponent(k + l, n))))
        .try_fold(0u64, |acc, v: Result<u64>| Ok(acc.max(v?)))
}

/// Linear bound `B` with `max_exponent(n) <= B(n)` for every `n >= 0`.
pub fn b_expression(equation: Equation) -> Result<LinearBound> {
    let shapes = block_shapes(equation)?;
    let slope = shapes.iter().map(|&(k, l)| (k + l) as u64).max().unwrap_or(0);
    let intercept = max_exponent(equation, 0)?;
    Ok(LinearBound::new(slope, intercept))
}

/// `B` expression as printed alongside each equation's bound (the displayed
/// logarithm for the first equation uses `7n+28` although `8n+28` is named).
pub fn printed_b_expression(equation: Equation) -> Option<LinearBound> {
    match equation {
        Equation::Eq1 => Some(LinearBound::new(7, 28)),
        Equation::Eq2 => Some(LinearBound::new(6, 15)),
        Equation::Eq3 | Equation::Eq4 => Some(LinearBound::new(13, 85)),
        Equation::Bgl => None,
    }
}

pub fn max_factor_count(equation: Equation) -> Result<u32> {
    let (k, l) = block_caps(equation)?;
    Ok(k + l)
}

/// Range of `f` (number of factors) over the allowed shapes.
pub fn factor_counts(equation: Equation) -> Result<std::ops::RangeInclusive<u32>> {
    let (k, l) = block_caps(equation)?;
    Ok(if k == 0 { 1..=l } else { 2..=k + l })
}

/// `C(s, D) = 1.4 * 30^(s+3) * s^4.5 * D^2 * (1 + log D)`.
pub fn matveev_constant(s: u32, degree: u32, bits: u32) -> Result<CertifiedReal> {
    if s == 0 || degree == 0 {
        return Err(Error::InvalidArgument("s and D must be positive".into()));
    }
    let s_big = CertifiedReal::from_int(s as i64, bits);
    let pow30 = CertifiedReal::from_int(num_traits::pow(BigInt::from(30), (s + 3) as usize), bits);
    let s45 = s_big.pow(4).mul(&s_big.sqrt()?);
    let d = CertifiedReal::from_int(degree as i64, bits);
    let one_plus_log = CertifiedReal::one(bits).add(&d.ln()?);
    Ok(CertifiedReal::from_ratio(7, 5, bits)?
        .mul(&pow30)
        .mul(&s45)
        .mul(&d.mul(&d))
        .mul(&one_plus_log))
}

/// The `A_j` bounds for `(d / (9 c_alpha^f), alpha, 10)`.
pub fn a_values(equation: Equation) -> Result<[&'static str; 3]> {
    match equation {
        Equation::Eq1 | Equation::Eq2 => Ok(["40", "0.7", "7"]),
        Equation::Eq3 | Equation::Eq4 => Ok(["62.4", "0.7", "7"]),
        Equation::Bgl => Err(Error::InvalidArgument("no linear form for the unshifted product".into())),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmissibilityCheck {
    pub eta: String,
    pub a_j: String,
    /// Certified upper end of `max(D h(eta), |log eta|, 0.16)` over all cases.
    pub requirement: String,
    pub admissible: bool,
}

fn decimal(x: &CertifiedReal, digits: usize) -> String {
    x.to_decimal(digits)
}

fn upper_of(x: &CertifiedReal) -> CertifiedReal {
    CertifiedReal::from_parts(x.upper_scaled(), Default::default(), x.bits())
}

/// Certifies `A_j >= max(D h(eta_j), |log eta_j|, 0.16)` for the three
/// algebraic numbers of the form, over every digit and factor count.
pub fn check_admissibility(equation: Equation, consts: &TribConstants) -> Result<Vec<AdmissibilityCheck>> {
    let bits = consts.bits();
    let a = a_values(equation)?;
    let a_real: Vec<CertifiedReal> = a
        .iter()
        .map(|s| CertifiedReal::from_decimal(s, bits))
        .collect::<Result<_>>()?;
    let floor = CertifiedReal::from_ratio(16, 100, bits)?;
    let degree = FIELD_DEGREE as i64;
    let max_of = |xs: Vec<CertifiedReal>| -> CertifiedReal {
        xs.into_iter()
            .map(|x| upper_of(&x))
            .reduce(|a, b| if a.certainly_lt(&b) { b } else { a })
            .expect("nonempty")
    };

    let mut eta1 = vec![floor.clone()];
    let log9 = consts.ln_int(9)?;
    let log_c = consts.c_alpha.ln()?;
    for f in factor_counts(equation)? {
        eta1.push(consts.height_eta1(1, f)?.mul_int(degree));
        for d in 1..=9 {
            let log_eta = consts.ln_int(d)?.sub(&log9).sub(&log_c.mul_int(f as i64));
            eta1.push(log_eta.abs());
        }
    }
    // h(alpha) = log(alpha) / 3 since alpha is a unit of degree 3 with one
    // conjugate outside the unit circle.
    let eta2 = vec![consts.log_alpha.clone(), consts.log_alpha.clone(), floor.clone()];
    let eta3 = vec![consts.log_10.mul_int(degree), consts.log_10.clone(), floor];

    let names = ["d/(9 c_alpha^f)", "alpha", "10"];
    Ok([eta1, eta2, eta3]
        .into_iter()
        .zip(names)
        .zip(a.iter().zip(a_real.iter()))
        .map(|((reqs, name), (a_str, a_val))| {
            let req = max_of(reqs);
            AdmissibilityCheck {
                eta: name.to_string(),
                a_j: a_str.to_string(),
                requirement: decimal(&req, 6),
                admissible: req.certainly_le(a_val),
            }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatveevInstance {
    pub equation: Equation,
    pub s: u32,
    pub degree: u32,
    pub a: Vec<String>,
    pub admissibility: Vec<AdmissibilityCheck>,
    pub b: LinearBound,
    pub printed_b: Option<LinearBound>,
    /// `C(s, D)` in scientific notation.
    pub c_sd: String,
    /// `C(s, D) A_1 A_2 A_3`.
    pub c_times_a: String,
    pub gamma_nonzero: String,
}

pub fn matveev_instance(equation: Equation, consts: &TribConstants) -> Result<MatveevInstance> {
    let bits = consts.bits();
    let c = matveev_constant(MATVEEV_S, FIELD_DEGREE, bits)?;
    let prod = a_product(equation, bits)?;
    let admissibility = check_admissibility(equation, consts)?;
    if let Some(bad) = admissibility.iter().find(|a| !a.admissible) {
        return Err(Error::certification(
            "matveev",
            format!("A = {} is below {} for {}", bad.a_j, bad.requirement, bad.eta),
        ));
    }
    Ok(MatveevInstance {
        equation,
        s: MATVEEV_S,
        degree: FIELD_DEGREE,
        a: a_values(equation)?.iter().map(|s| s.to_string()).collect(),
        admissibility,
        b: b_expression(equation)?,
        printed_b: printed_b_expression(equation),
        c_sd: sci(&c, 9),
        c_times_a: sci(&c.mul(&prod), 6),
        gamma_nonzero: "assumed: conjugating Gamma = 0 by alpha -> beta gives 1 < |c_beta|^f |beta|^b2 < 1".into(),
    })
}

fn a_product(equation: Equation, bits: u32) -> Result<CertifiedReal> {
    a_values(equation)?
        .iter()
        .map(|s| CertifiedReal::from_decimal(s, bits))
        .try_fold(CertifiedReal::one(bits), |acc, a| Ok(acc.mul(&a?)))
}

/// Scientific notation with `sig` significant digits, from the midpoint.
pub fn sci(x: &CertifiedReal, sig: usize) -> String {
    format!("{:.*e}", sig.saturating_sub(1), x.to_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaModel {
    ThreeHalves,
    ShiftDominated,
}

impl GammaModel {
    pub const ALL: [GammaModel; 2] = [GammaModel::ThreeHalves, GammaModel::ShiftDominated];

    /// Decay exponent `rho` in `alpha^(-rho n)` as a ratio.
    pub fn decay(self) -> (i64, i64) {
        match self {
            GammaModel::ThreeHalves => (3, 2),
            GammaModel::ShiftDominated => (1, 1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GammaModel::ThreeHalves => "three_halves",
            GammaModel::ShiftDominated => "shift_dominated",
        }
    }
}

/// Threshold `n0` from which `|Gamma| < a` is claimed, and that `a`.
pub fn gamma_threshold(equation: Equation) -> Result<(u64, &'static str)> {
    match equation {
        Equation::Eq1 => Ok((15, "0.02")),
        Equation::Eq2 => Ok((15, "0.005")),
        Equation::Eq3 | Equation::Eq4 => Ok((25, "0.002")),
        Equation::Bgl => Err(Error::InvalidArgument("no linear form for the unshifted product".into())),
    }
}

pub fn printed_gamma_coefficient(equation: Equation) -> Option<u64> {
    match equation {
        Equation::Eq1 => Some(11964),
        Equation::Eq2 => Some(3988),
        Equation::Eq3 | Equation::Eq4 => Some(8721506),
        Equation::Bgl => None,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaBound {
    pub equation: Equation,
    pub model: GammaModel,
    pub factor_count: u32,
    /// `3^f - 1` cross terms in the expanded product.
    pub remainder_terms: u64,
    pub coefficient: u64,
    pub printed_coefficient: Option<u64>,
    pub decay: String,
    pub threshold_n: u64,
    pub small_a: String,
    /// `coefficient * alpha^(-rho n0) < a`, certified.
    pub small_at_threshold: bool,
}

/// Certified upper bound on the `|Gamma|` coefficient for `model`, valid for
/// every shape allowed by the caps and every `n >= n0`.
pub fn gamma_coefficient(model: GammaModel, f: u32, n0: u64, consts: &TribConstants) -> Result<CertifiedReal> {
    let bits = consts.bits();
    let inv_c = consts.c_alpha.recip()?;
    match model {
        GammaModel::ThreeHalves => Ok(inv_c.mul_big(&num_traits::pow(BigInt::from(3), f as usize))),
        GammaModel::ShiftDominated => {
            let one = CertifiedReal::one(bits);
            let half_decay = consts.beta_abs.pow(n0 as u32); // alpha^(-n0/2)
            let shift = one.add(&half_decay);
            let t = shift.mul(&inv_c).div(&consts.alpha.pow(n0 as u32 + 1))?;
            let cross = shift.mul_int(f as i64).mul(&one.add(&t).pow(f.saturating_sub(1)));
            Ok(one.add(&cross).mul(&inv_c).div(&consts.alpha)?)
        }
    }
}

pub fn gamma_bound(equation: Equation, model: GammaModel, consts: &TribConstants) -> Result<GammaBound> {
    let f = max_factor_count(equation)?;
    let (n0, a) = gamma_threshold(equation)?;
    let coef = gamma_coefficient(model, f, n0, consts)?;
    let coefficient = coef
        .ceil_upper()
        .to_u64()
        .ok_or_else(|| Error::certification("gamma bound", "coefficient overflow"))?;
    let bits = consts.bits();
    let (num, den) = model.decay();
    // alpha^(-rho n0) = |beta|^(2 rho n0)
    let decay = consts.beta_abs.pow((2 * num * n0 as i64 / den) as u32);
    let at_threshold = CertifiedReal::from_int(coefficient as i64, bits).mul(&decay);
    let small_at_threshold = at_threshold.certainly_lt(&CertifiedReal::from_decimal(a, bits)?);
    Ok(GammaBound {
        equation,
        model,
        factor_count: f,
        remainder_terms: 3u64.pow(f) - 1,
        coefficient,
        printed_coefficient: match model {
            GammaModel::ThreeHalves => printed_gamma_coefficient(equation),
            GammaModel::ShiftDominated => None,
        },
        decay: if den == 1 { format!("alpha^(-{num}n)") } else { format!("alpha^(-{num}n/{den})") },
        threshold_n: n0,
        small_a: a.to_string(),
        small_at_threshold,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InitialBound {
    pub equation: Equation,
    pub model: GammaModel,
    /// `C(s,D) A_1 A_2 A_3 / (rho log alpha)`.
    pub k_const: String,
    pub b: LinearBound,
    pub coefficient: u64,
    /// Iterates of `N -> ceil(g(N))` from above.
    pub iterates: Vec<u64>,
    /// Every solution with `n >= threshold` has `n < bound`.
    pub bound: u64,
    pub printed_bound: Option<String>,
}

pub fn printed_initial_bound(equation: Equation) -> Option<&'static str> {
    match equation {
        Equation::Eq1 | Equation::Eq2 => Some("2.4e16"),
        Equation::Eq3 | Equation::Eq4 => Some("3.8e16"),
        Equation::Bgl => None,
    }
}

const FIXED_POINT_START: u64 = 1_000_000_000_000_000_000;
const FIXED_POINT_LIMIT: usize = 100;

/// Solves `rho n log(alpha) - log(coef) < K0 (1 + log(a n + b))` for the
/// least `N` beyond which it fails, by iterating `N -> ceil(g(N))` from above
/// where `g(n) = (K0 (1 + log(a n + b)) + log coef) / (rho log alpha)`.
pub fn initial_bound(equation: Equation, model: GammaModel, consts: &TribConstants) -> Result<InitialBound> {
    let bits = consts.bits();
    let gamma = gamma_bound(equation, model, consts)?;
    let b = b_expression(equation)?;
    let k0 = matveev_constant(MATVEEV_S, FIELD_DEGREE, bits)?.mul(&a_product(equation, bits)?);
    let (num, den) = model.decay();
    let denom = consts.log_alpha.mul_int(num).div_int(den)?;
    let log_coef = consts.ln_int(gamma.coefficient as i64)?;
    let one = CertifiedReal::one(bits);
    let g = |n: u64| -> Result<BigInt> {
        let arg = CertifiedReal::from_int(BigInt::from(b.eval(n)), bits);
        let val = k0.mul(&one.add(&arg.ln()?)).add(&log_coef).div(&denom)?;
        Ok(val.ceil_upper())
    };
    let mut n = FIXED_POINT_START;
    let mut iterates = vec![n];
    for _ in 0..FIXED_POINT_LIMIT {
        let next = g(n)?
            .to_u64()
            .ok_or_else(|| Error::certification("initial bound", "iterate overflow"))?;
        if next >= n {
            // g(n) <= n: no solution at or beyond n
            return Ok(InitialBound {
                equation,
                model,
                k_const: sci(&k0.div(&denom)?, 4),
                b,
                coefficient: gamma.coefficient,
                iterates,
                bound: n,
                printed_bound: match model {
                    GammaModel::ThreeHalves => printed_initial_bound(equation).map(str::to_string),
                    GammaModel::ShiftDominated => None,
                },
            });
        }
        n = next;
        iterates.push(n);
    }
    Err(Error::certification("initial bound", "fixed-point iteration did not settle"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::compute_constants;

    fn consts() -> TribConstants {
        compute_constants(60).unwrap()
    }

    #[test]
    fn m_upper_examples() {
        assert_eq!(m_upper(Equation::Eq1, 24_000_000_000_000_000, 0, 7).unwrap(), 168_000_000_000_000_028);
        assert_eq!(m_upper(Equation::Eq1, 103, 0, 7).unwrap(), 749);
        assert_eq!(m_upper(Equation::Eq2, 102, 0, 6).unwrap(), 621);
        assert_eq!(m_upper(Equation::Eq3, 123, 6, 7).unwrap(), 13 * 123 + 79);
        assert_eq!(m_upper(Equation::Eq4, 10, 7, 6).unwrap(), 130 + 79);
        assert!(m_upper(Equation::Eq1, 10, 0, 8).is_err());
        assert!(m_upper(Equation::Eq3, 10, 7, 1).is_err());
    }

    #[test]
    fn eq4_bound_dominates_products() {
        // direct check of the mirrored exponent against actual products
        use crate::seq::trib;
        for n in 5..40u64 {
            for (k, l) in block_shapes(Equation::Eq4).unwrap() {
                let mut p = num_bigint::BigUint::from(1u8);
                for i in 0..(k + l) as u64 {
                    let t = trib(n + i).value;
                    p *= if i < k as u64 { t + 1u8 } else { t - 1u8 };
                }
                let digits = p.to_str_radix(10).len() as u64;
                assert!(digits <= m_upper(Equation::Eq4, n, k, l).unwrap());
            }
        }
    }

    #[test]
    fn b_expressions() {
        assert_eq!(b_expression(Equation::Eq1).unwrap(), LinearBound::new(7, 28));
        assert_eq!(b_expression(Equation::Eq2).unwrap(), LinearBound::new(6, 21));
        assert_eq!(b_expression(Equation::Eq3).unwrap(), LinearBound::new(13, 91));
        assert_eq!(b_expression(Equation::Eq4).unwrap(), LinearBound::new(13, 91));
        assert_eq!(max_exponent(Equation::Eq1, 103).unwrap(), 749);
    }

    #[test]
    fn matveev_values() {
        let c = matveev_constant(3, 3, 200).unwrap();
        assert_eq!(sci(&c, 5), "2.7044e12");
        let prod = c.mul(&CertifiedReal::from_int(196, 200));
        assert_eq!(sci(&prod, 3), "5.30e14");
        assert!(matveev_constant(0, 3, 64).is_err());
    }

    #[test]
    fn admissible() {
        let c = consts();
        for eq in Equation::SHIFTED {
            let checks = check_admissibility(eq, &c).unwrap();
            assert!(checks.iter().all(|a| a.admissible), "{eq}: {checks:?}");
        }
    }

    #[test]
    fn coefficients() {
        let c = consts();
        let g1 = gamma_bound(Equation::Eq1, GammaModel::ThreeHalves, &c).unwrap();
        assert_eq!((g1.remainder_terms, g1.coefficient), (2186, 11964));
        assert!(g1.small_at_threshold);
        let g2 = gamma_bound(Equation::Eq2, GammaModel::ThreeHalves, &c).unwrap();
        assert_eq!((g2.remainder_terms, g2.coefficient), (728, 3988));
        let g3 = gamma_bound(Equation::Eq3, GammaModel::ThreeHalves, &c).unwrap();
        assert_eq!(g3.remainder_terms, 1594322);
        assert!(g3.coefficient.abs_diff(8721506) <= 10);
        for eq in Equation::SHIFTED {
            let s = gamma_bound(eq, GammaModel::ShiftDominated, &c).unwrap();
            assert!(s.small_at_threshold, "{eq}");
        }
    }

    #[test]
    fn initial_bounds() {
        let c = consts();
        let b1 = initial_bound(Equation::Eq1, GammaModel::ThreeHalves, &c).unwrap();
        assert!(b1.bound <= 24_000_000_000_000_000 && b1.bound >= 22_800_000_000_000_000);
        let b3 = initial_bound(Equation::Eq3, GammaModel::ThreeHalves, &c).unwrap();
        assert!(b3.bound <= 38_000_000_000_000_000 && b3.bound >= 36_100_000_000_000_000);
        let s1 = initial_bound(Equation::Eq1, GammaModel::ShiftDominated, &c).unwrap();
        assert!(s1.bound > b1.bound);
        // fixed-point soundness: g(N) <= N but the iterate before was larger
        assert!(b1.iterates.windows(2).all(|w| w[0] > w[1]));
    }
}
