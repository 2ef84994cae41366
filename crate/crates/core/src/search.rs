//! Exhaustive search over the reduced ranges.
//!
//! `m` and `d` are never enumerated: each block product is tested once with
//! [`as_repdigit`], which reads both off the value.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baker;
use crate::equation::{Equation, Shift, ShiftPattern};
use crate::error::Result;
use crate::seq::{as_repdigit, nu2_biguint, repdigit_value, trib, trib_prefix};

/// A repdigit `d (10^m - 1) / 9` has `v2 <= 3` since `(10^m - 1) / 9` is odd.
pub const REPDIGIT_MAX_NU2: u64 = 3;
pub const RESIDUE_MODULUS: u32 = 10_000;
/// Filtered candidates whose hash falls below this (out of 100) are re-checked.
pub const AUDIT_PERCENT: u64 = 1;
pub const BGL_N_MAX: u64 = 100;
pub const BGL_L_MAX: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub equation: Equation,
    pub n_min: u64,
    pub n_max: u64,
    pub k_max: u32,
    pub l_max: u32,
    pub m_min: u32,
}

impl SearchSpace {
    pub fn new(equation: Equation, n_max: u64) -> Result<Self> {
        let (k_max, l_max) = match equation {
            Equation::Bgl => (0, BGL_L_MAX),
            eq => baker::block_caps(eq)?,
        };
        Ok(SearchSpace { equation, n_min: 1, n_max, k_max, l_max, m_min: 2 })
    }

    pub fn patterns(&self) -> Result<Vec<ShiftPattern>> {
        let ks: Vec<u32> = if self.k_max == 0 { vec![0] } else { (1..=self.k_max).collect() };
        ks.iter()
            .flat_map(|&k| (1..=self.l_max).map(move |l| (k, l)))
            .map(|(k, l)| self.equation.pattern(k, l))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solution {
    pub n: u64,
    pub k: u32,
    pub l: u32,
    pub m: u32,
    pub d: u8,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounts {
    pub zero_product: u64,
    pub nu2_above_3: u64,
    pub residue_mod_10000: u64,
    pub full_checks: u64,
    pub audited: u64,
    pub audit_failures: u64,
}

impl FilterCounts {
    fn merge(mut self, o: FilterCounts) -> Self {
        self.zero_product += o.zero_product;
        self.nu2_above_3 += o.nu2_above_3;
        self.residue_mod_10000 += o.residue_mod_10000;
        self.full_checks += o.full_checks;
        self.audited += o.audited;
        self.audit_failures += o.audit_failures;
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchReport {
    pub space: SearchSpace,
    pub solutions: Vec<Solution>,
    pub candidates_scanned: u64,
    pub filters: Vec<String>,
    pub counts: FilterCounts,
    /// Largest `m` any product in the space could have (digit count of the
    /// largest product); `m` itself is not capped during the search.
    pub m_max_observed: u32,
    /// SHA-256 over `n k l v2 residue` lines in `(n, k, l)` order.
    pub digest: String,
}

pub fn filter_descriptions() -> Vec<String> {
    vec![
        "products containing a zero factor are skipped".into(),
        format!("v2(product) > {REPDIGIT_MAX_NU2} excludes a repdigit"),
        format!("product >= {RESIDUE_MODULUS} must end in dddd modulo {RESIDUE_MODULUS}"),
        format!("{AUDIT_PERCENT}% of filtered candidates re-checked with the full repdigit test"),
    ]
}

fn factor(t: &BigUint, shift: Shift) -> BigUint {
    match shift {
        Shift::Plus => t + 1u8,
        Shift::None => t.clone(),
        Shift::Minus if t.is_zero() => BigUint::zero(),
        Shift::Minus => t - 1u8,
    }
}

/// Exact product of the shifted terms `T_n, T_(n+1), ...` in the pattern's
/// order; zero if some factor vanishes.
pub fn product_of_block(n: u64, pattern: &ShiftPattern) -> BigUint {
    product_from(n, pattern, |i| trib(i).value)
}

fn product_from(n: u64, pattern: &ShiftPattern, term: impl Fn(u64) -> BigUint) -> BigUint {
    pattern
        .shifts()
        .enumerate()
        .fold(BigUint::from(1u8), |acc, (i, s)| acc * factor(&term(n + i as u64), s))
}

fn repdigit_residues() -> Vec<bool> {
    let mut ok = vec![false; RESIDUE_MODULUS as usize];
    for d in 1..=9u32 {
        ok[(d * 1111) as usize] = true;
    }
    ok
}

fn audit_pick(n: u64, k: u32, l: u32) -> bool {
    // splitmix64 finalizer on the packed triple
    let mut z = (n << 16 | (k as u64) << 8 | l as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    z % 100 < AUDIT_PERCENT
}

struct CandidateResult {
    solution: Option<Solution>,
    counts: FilterCounts,
    line: String,
    digits: u32,
}

fn examine(space: &SearchSpace, n: u64, p: &ShiftPattern, terms: &[BigUint], residues: &[bool]) -> CandidateResult {
    let mut counts = FilterCounts::default();
    let product = product_from(n, p, |i| terms[i as usize].clone());
    let nu2 = nu2_biguint(&product);
    let residue = (&product % RESIDUE_MODULUS).to_u32().unwrap_or(0);
    let line = format!("{n} {} {} {} {residue}\n", p.k, p.l, nu2.map_or(-1, |v| v as i64));
    let digits = if product.is_zero() { 0 } else { product.to_str_radix(10).len() as u32 };
    let filtered = if product.is_zero() {
        counts.zero_product += 1;
        false
    } else if nu2.is_some_and(|v| v > REPDIGIT_MAX_NU2) {
        counts.nu2_above_3 += 1;
        true
    } else if product >= BigUint::from(RESIDUE_MODULUS) && !residues[residue as usize] {
        counts.residue_mod_10000 += 1;
        true
    } else {
        false
    };
    let mut solution = None;
    if filtered {
        if audit_pick(n, p.k, p.l) {
            counts.audited += 1;
            if matches!(as_repdigit(&product), Ok(Some(r)) if r.length >= space.m_min) {
                counts.audit_failures += 1;
            }
        }
    } else if !product.is_zero() {
        counts.full_checks += 1;
        if let Ok(Some(r)) = as_repdigit(&product) {
            if r.length >= space.m_min {
                solution = Some(Solution { n, k: p.k, l: p.l, m: r.length, d: r.digit });
            }
        }
    }
    CandidateResult { solution, counts, line, digits }
}

/// Enumerates every `(n, k, l)` in the space, in parallel over `n`, and
/// merges the results in `(n, k, l)` order.
pub fn exhaustive_search(space: &SearchSpace) -> Result<SearchReport> {
    let patterns = space.patterns()?;
    let max_len = patterns.iter().map(|p| p.len()).max().unwrap_or(0) as u64;
    let terms = trib_prefix(space.n_max + max_len);
    let residues = repdigit_residues();
    let per_n: Vec<Vec<CandidateResult>> = (space.n_min..=space.n_max)
        .into_par_iter()
        .map(|n| patterns.iter().map(|p| examine(space, n, p, &terms, &residues)).collect())
        .collect();

    let mut hasher = Sha256::new();
    let mut solutions = Vec::new();
    let mut counts = FilterCounts::default();
    let mut scanned = 0u64;
    let mut m_max = 0u32;
    for r in per_n.into_iter().flatten() {
        hasher.update(r.line.as_bytes());
        scanned += 1;
        m_max = m_max.max(r.digits);
        counts = counts.merge(r.counts);
        solutions.extend(r.solution);
    }
    solutions.sort();
    Ok(SearchReport {
        space: *space,
        solutions,
        candidates_scanned: scanned,
        filters: filter_descriptions(),
        counts,
        m_max_observed: m_max,
        digest: hex::encode(hasher.finalize()),
    })
}

/// Recomputes both sides from scratch and compares them exactly.
pub fn verify_solution(n: u64, k: u32, l: u32, m: u32, d: u8, equation: Equation) -> bool {
    if !(1..=9).contains(&d) || m == 0 || n == 0 {
        return false;
    }
    let Ok(pattern) = equation.pattern(k, l) else {
        return false;
    };
    let (mut a, mut b, mut c) = (BigUint::zero(), BigUint::from(1u8), BigUint::from(1u8));
    for _ in 0..n {
        let next = &a + &b + &c;
        a = std::mem::replace(&mut b, std::mem::replace(&mut c, next));
    }
    // a = T_n now
    let mut product = BigUint::from(1u8);
    for s in pattern.shifts() {
        product *= factor(&a, s);
        let next = &a + &b + &c;
        a = std::mem::replace(&mut b, std::mem::replace(&mut c, next));
    }
    !product.is_zero() && product == repdigit_value(d, m)
}
