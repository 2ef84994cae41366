//! 2-adic orders of `T_n +- 1`, of products of consecutive shifted terms, and
//! the block-length caps they imply.
//!
//! Closed forms (valid for `n >= 5`):
//!
//! ```text
//! v2(T_n + 1) = 0                         n = 0, 3 (mod 4)
//!               1                         n = 1, 2, 6 (mod 8)
//!               3                         n = 5 (mod 16)
//!               v2((n + 3)^2) - 3         n = 13, 29, 45 (mod 64)
//!               v2((n - rho)(n + 3)) - 3  n = 61 (mod 64)
//!
//! v2(T_n - 1) = 0                         n = 0, 3 (mod 4)
//!               1                         n = 5 (mod 8)
//!               v2(n + 2) - 1             n = 6 (mod 8)
//!               v2(n - 2) - 1             n = 2 (mod 8)
//!               v2((n - 1)(n + 7)) - 3    n = 1 (mod 8)
//! ```
//!
//! `rho` is the 2-adic integer with `rho = 61 (mod 64)` at which `T + 1`
//! vanishes 2-adically; it is lifted once by Hensel iteration (see
//! [`plus_root`]). Writing `61` for `rho`, as is sometimes done, is only
//! right modulo `2^12`.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::{BlockOrder, Equation, Shift, ShiftPattern};
use crate::error::{Error, Result};
use crate::seq::trib_wrapping_u128;

pub const MIN_INDEX: u64 = 5;
pub const DEFAULT_RANGE_MAX: u64 = 70_000;
/// Largest 2-adic order a repdigit `d (10^m - 1) / 9` can have.
pub const REPDIGIT_MAX_ORDER: u32 = 3;

const ROOT_BITS: u32 = 120;
const ROOT_MASK: u128 = (1u128 << ROOT_BITS) - 1;

fn tz(x: u128) -> u32 {
    x.trailing_zeros()
}

/// 2-adic root of `T + 1` in the class `61 (mod 64)`, modulo `2^120`.
pub fn plus_root() -> u128 {
    static ROOT: OnceLock<u128> = OnceLock::new();
    *ROOT.get_or_init(|| {
        // For r = rho (mod 128): v2(T_r + 1) = v2(r - rho) + v2(r + 3) - 3 with
        // v2(r + 3) = 6, so each step learns at least one more bit of rho.
        let mut r: u128 = 61;
        loop {
            let w = trib_wrapping_u128(r).wrapping_add(1);
            let nu = if w == 0 { 128 } else { tz(w) };
            let v = nu + 3 - tz(r + 3);
            if v >= ROOT_BITS {
                return r & ROOT_MASK;
            }
            r += 1u128 << v;
        }
    })
}

/// Lower bound on `v2(w)` when only `w mod 2^e` is known; exact when `w`'s
/// residue is nonzero.
fn v2_mod(w: u128, e: u32) -> (u32, bool) {
    let w = w & mask(e);
    if w == 0 {
        (e, false)
    } else {
        (tz(w), true)
    }
}

fn mask(e: u32) -> u128 {
    if e >= 128 {
        u128::MAX
    } else {
        (1u128 << e) - 1
    }
}

/// `v2(T_z + shift)` for every `z >= 5` in the class `z (mod 2^e)`, as a
/// lower bound plus a flag telling whether it is exact on the whole class.
/// Requires `e >= 6`.
pub fn factor_order_bound(shift: Shift, z: u128, e: u32) -> (u32, bool) {
    debug_assert!(e >= 6);
    let sum2 = |a: (u32, bool), b: (u32, bool), c: u32| (a.0 + b.0 - c, a.1 && b.1);
    match shift {
        Shift::Plus => match z % 64 {
            r if r % 4 == 0 || r % 4 == 3 => (0, true),
            r if matches!(r % 8, 1 | 2 | 6) => (1, true),
            r if r % 16 == 5 => (3, true),
            13 | 29 | 45 => {
                let a = v2_mod(z + 3, e);
                sum2(a, a, 3)
            }
            _ => {
                let rho = plus_root() & mask(e.min(ROOT_BITS));
                let e = e.min(ROOT_BITS);
                sum2(v2_mod(z.wrapping_sub(rho), e), v2_mod(z + 3, e), 3)
            }
        },
        Shift::Minus => match z % 8 {
            0 | 3 | 4 | 7 => (0, true),
            5 => (1, true),
            6 => {
                let (v, exact) = v2_mod(z + 2, e);
                (v - 1, exact)
            }
            2 => {
                let (v, exact) = v2_mod(z - 2, e);
                (v - 1, exact)
            }
            _ => sum2(v2_mod(z - 1, e), v2_mod(z + 7, e), 3),
        },
        Shift::None => (0, false),
    }
}

fn closed_form(shift: Shift, n: u64, what: &'static str) -> Result<u32> {
    if n < MIN_INDEX {
        return Err(Error::OutOfDomain { what, n, min: MIN_INDEX });
    }
    match factor_order_bound(shift, n as u128, ROOT_BITS) {
        (v, true) => Ok(v),
        // only reachable for n = rho (mod 2^120), which no u64 index is
        (_, false) => Err(Error::precision(what, format!("n = {n} agrees with the 2-adic root to 120 bits"))),
    }
}

/// `v2(T_n + 1)` for `n >= 5` by the closed form.
pub fn nu2_shift_plus(n: u64) -> Result<u32> {
    closed_form(Shift::Plus, n, "nu2_shift_plus")
}

/// `v2(T_n - 1)` for `n >= 5` by the closed form.
pub fn nu2_shift_minus(n: u64) -> Result<u32> {
    closed_form(Shift::Minus, n, "nu2_shift_minus")
}

/// The `n = 61 (mod 64)` branch as it is usually printed,
/// `v2((n - 61)(n + 7)) - 3` with `n = 61` giving 15. Kept for auditing only.
pub fn nu2_shift_plus_printed(n: u64) -> Result<u32> {
    if n % 64 != 61 {
        return nu2_shift_plus(n);
    }
    if n == 61 {
        return Ok(15);
    }
    Ok(tz((n - 61) as u128) + tz(n as u128 + 7) - 3)
}

/// `v2(T_n + offset)` straight from `T_n mod 2^128`; `None` when the shifted
/// term is zero.
pub fn nu2_direct(n: u64, shift: Shift) -> Option<u32> {
    let t = trib_wrapping_u128(n as u128);
    let w = t.wrapping_add(shift.offset() as u128);
    if n <= 2 && w == 0 {
        return None;
    }
    Some(if w == 0 { 128 } else { tz(w) })
}

/// `T_n mod 2^64` for `0 <= n < len`.
fn residues_mod_2_64(len: usize) -> Vec<u64> {
    let mut t = vec![0u64; len.max(3)];
    t[1] = 1;
    t[2] = 1;
    for i in 3..t.len() {
        t[i] = t[i - 1].wrapping_add(t[i - 2]).wrapping_add(t[i - 3]);
    }
    t.truncate(len);
    t
}

fn nu2_u64(t: u64, shift: Shift) -> u32 {
    let w = t.wrapping_add(shift.offset() as u64);
    if w == 0 {
        64
    } else {
        w.trailing_zeros()
    }
}

/// Sum of closed-form orders over the pattern's factors `T_n, T_(n+1), ...`.
pub fn nu2_product(n: u64, pattern: &ShiftPattern) -> Result<u32> {
    if pattern.order == BlockOrder::Unshifted {
        return Err(Error::InvalidArgument("unshifted patterns have no closed form".into()));
    }
    pattern.shifts().enumerate().try_fold(0u32, |acc, (i, s)| {
        let v = match s {
            Shift::Plus => nu2_shift_plus(n + i as u64)?,
            Shift::Minus => nu2_shift_minus(n + i as u64)?,
            Shift::None => unreachable!(),
        };
        Ok(acc + v)
    })
}

/// Direct `v2` of the product for any `n >= 1`; `None` if a factor vanishes.
pub fn nu2_product_direct(n: u64, pattern: &ShiftPattern) -> Option<u32> {
    pattern
        .shifts()
        .enumerate()
        .try_fold(0u32, |acc, (i, s)| nu2_direct(n + i as u64, s).map(|v| acc + v))
}

/// Lower bound on `v2` of the pattern's product over every `n >= 5` with
/// `n = x (mod 2^coarse)`, obtained by splitting the class modulo `2^fine`.
pub fn class_lower_bound(pattern: &ShiftPattern, x: u64, coarse: u32, fine: u32) -> (u32, bool) {
    let step = 1u128 << coarse;
    let count = 1u128 << (fine - coarse);
    let mut best: Option<u32> = None;
    let mut exact_const = true;
    for j in 0..count {
        let y = x as u128 + j * step;
        let (mut total, mut exact) = (0u32, true);
        for (i, s) in pattern.shifts().enumerate() {
            let (v, ex) = factor_order_bound(s, y + i as u128, fine);
            total += v;
            exact &= ex;
        }
        match best {
            None => best = Some(total),
            Some(b) if b != total => {
                exact_const = false;
                best = Some(b.min(total));
            }
            _ => {}
        }
        exact_const &= exact;
    }
    (best.unwrap_or(0), exact_const)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Verdict {
    Exact(u32),
    AtLeast(u32),
}

impl Verdict {
    pub fn value(self) -> u32 {
        match self {
            Verdict::Exact(v) | Verdict::AtLeast(v) => v,
        }
    }

    /// Whether an observed verdict is consistent with this printed one.
    pub fn admits(self, observed: Verdict, observed_min: u32) -> bool {
        match self {
            Verdict::Exact(v) => observed == Verdict::Exact(v),
            Verdict::AtLeast(v) => observed_min >= v,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Exact(v) => write!(f, "= {v}"),
            Verdict::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

use Verdict::{AtLeast as Ge, Exact as Is};

/// Printed table for `T_i + 1` products: (block length, [(x mod 64, verdict)]).
/// Row 2's last residue is printed as "i60".
pub const PLUS_TABLE: &[(u32, &[(u64, Verdict)])] = &[
    (1, &[(13, Is(5)), (29, Is(7)), (45, Is(5)), (61, Ge(5))]),
    (2, &[(5, Is(4)), (12, Is(5)), (21, Is(4)), (28, Is(7)), (37, Is(4)), (44, Is(5)), (53, Is(4)), (60, Ge(5))]),
    (3, &[(4, Is(4)), (11, Is(5)), (20, Is(4)), (27, Is(7)), (36, Is(4)), (43, Is(5)), (52, Is(4)), (59, Ge(5))]),
    (
        4,
        &[
            (2, Is(4)), (3, Is(4)), (10, Is(6)), (18, Is(4)), (19, Is(4)), (26, Is(8)),
            (34, Is(4)), (35, Is(4)), (42, Is(6)), (50, Is(4)), (51, Is(4)), (58, Ge(6)),
        ],
    ),
    (5, &[(1, Is(5)), (9, Is(7)), (17, Is(5)), (25, Is(9)), (33, Is(5)), (41, Is(7)), (49, Is(5)), (57, Ge(8))]),
    (6, &[(0, Is(5)), (8, Is(7)), (16, Is(5)), (24, Is(9)), (32, Is(5)), (40, Is(7)), (48, Is(5)), (56, Ge(7))]),
    (7, &[(7, Is(7)), (15, Is(5)), (23, Is(9)), (31, Is(5)), (39, Is(7)), (47, Is(5)), (55, Ge(7)), (63, Is(5))]),
    (8, &[(6, Is(8)), (14, Is(6)), (22, Is(10)), (30, Is(6)), (38, Is(8)), (46, Is(6)), (54, Ge(8)), (62, Is(6))]),
];

/// Printed table for `T_i - 1` products: (block length, [(x mod 8, verdict)]).
pub const MINUS_TABLE: &[(u32, &[(u64, Verdict)])] = &[
    (1, &[(1, Ge(4))]),
    (2, &[(0, Ge(4))]),
    (4, &[(6, Ge(5)), (7, Ge(5))]),
    (5, &[(2, Ge(6)), (5, Ge(6))]),
    (6, &[(4, Ge(6))]),
    (7, &[(3, Ge(6))]),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationTableRow {
    pub shift: Shift,
    pub block_length: u32,
    pub modulus: u64,
    pub residue: u64,
    /// Exact when the sampled order is constant over the class.
    pub verdict: Verdict,
    pub observed_min: u32,
    pub observed_max: u32,
    pub samples: u64,
    pub printed: Verdict,
    /// Closed-form lower bound over the whole class `n >= 5`.
    pub closed_form_bound: u32,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableVerification {
    pub range_min: u64,
    pub range_max: u64,
    pub rows: Vec<ValuationTableRow>,
    pub all_consistent: bool,
    pub interpreted_typos: Vec<String>,
}

/// Refinement used when confirming `>=` entries through the closed forms.
const REFINE_BITS: u32 = 12;

fn scan_class(t: &[u64], pattern: &ShiftPattern, modulus: u64, x: u64, lo: u64, hi: u64) -> (u32, u32, u64) {
    let (mut mn, mut mx, mut count) = (u32::MAX, 0u32, 0u64);
    let start = lo + (x + modulus - lo % modulus) % modulus;
    let mut n = start;
    while n <= hi {
        let v: u32 = pattern
            .shifts()
            .enumerate()
            .map(|(i, s)| nu2_u64(t[n as usize + i], s))
            .sum();
        mn = mn.min(v);
        mx = mx.max(v);
        count += 1;
        n += modulus;
    }
    (mn, mx, count)
}

/// Recomputes both printed tables by direct evaluation of the products mod
/// `2^64` over `5 <= n <= range_max` and checks them entry by entry.
pub fn verify_valuation_tables(range_max: u64) -> Result<TableVerification> {
    let min_range = 64 * 16 + 69;
    if range_max < min_range {
        return Err(Error::InvalidArgument(format!(
            "range_max = {range_max} too small, need at least {min_range}"
        )));
    }
    let t = residues_mod_2_64(range_max as usize + 16);
    let mut jobs: Vec<(Shift, u32, u64, u64, Verdict)> = Vec::new();
    for (len, entries) in PLUS_TABLE {
        for &(x, v) in *entries {
            jobs.push((Shift::Plus, *len, 64, x, v));
        }
    }
    for (len, entries) in MINUS_TABLE {
        for &(x, v) in *entries {
            jobs.push((Shift::Minus, *len, 8, x, v));
        }
    }
    let rows: Vec<ValuationTableRow> = jobs
        .par_iter()
        .map(|&(shift, len, modulus, x, printed)| {
            let pattern = match shift {
                Shift::Plus => ShiftPattern::plus_only(len),
                _ => ShiftPattern::minus_only(len),
            }
            .expect("table lengths are positive");
            let (mn, mx, samples) = scan_class(&t, &pattern, modulus, x, MIN_INDEX, range_max);
            let verdict = if mn == mx { Verdict::Exact(mn) } else { Verdict::AtLeast(mn) };
            let coarse = modulus.trailing_zeros();
            let (bound, _) = class_lower_bound(&pattern, x, coarse, REFINE_BITS);
            let consistent = printed.admits(verdict, mn) && bound <= mn && bound >= printed.value().min(mn)
                && match printed {
                    Verdict::AtLeast(v) => bound >= v,
                    Verdict::Exact(_) => true,
                };
            ValuationTableRow {
                shift,
                block_length: len,
                modulus,
                residue: x,
                verdict,
                observed_min: mn,
                observed_max: mx,
                samples,
                printed,
                closed_form_bound: bound,
                consistent,
            }
        })
        .collect();
    let all_consistent = rows.iter().all(|r| r.consistent);
    Ok(TableVerification {
        range_min: MIN_INDEX,
        range_max,
        rows,
        all_consistent,
        interpreted_typos: vec![
            "plus table, block length 2: residue printed as \"i60\" read as 60".into(),
            "plus table, block length 7: eight residues matched to eight verdicts in printed order".into(),
        ],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockCaps {
    pub equation: Equation,
    /// Cap on the first block of a mixed pattern; 0 for single-block equations.
    pub k_max: u32,
    /// Cap on the second (or only) block.
    pub l_max: u32,
    pub plus_run_cap: u32,
    pub minus_run_cap: u32,
    /// Minimum closed-form lower bound over all residue classes mod 64 of
    /// every pattern one longer than a cap.
    pub certified_min_order: u32,
    /// Minimum direct order over `1 <= n < 5` of the same patterns
    /// (`None` means every such product has a vanishing factor).
    pub small_n_min_order: Option<u32>,
    pub sample_range_max: u64,
    pub sample_min_order: u32,
}

/// Longest run of a single shift that can still have `v2 <= 3` somewhere,
/// from the sampled scan.
fn sampled_run_cap(t: &[u64], shift: Shift, range_max: u64) -> u32 {
    let pattern = |len| match shift {
        Shift::Plus => ShiftPattern::plus_only(len),
        _ => ShiftPattern::minus_only(len),
    }
    .expect("positive length");
    (0..64u64)
        .into_par_iter()
        .map(|x| {
            (1..=32)
                .find(|&len| scan_class(t, &pattern(len), 64, x, MIN_INDEX, range_max).0 > REPDIGIT_MAX_ORDER)
                .map(|len| len - 1)
                .unwrap_or(32)
        })
        .max()
        .unwrap_or(0)
}

fn certify_excess(patterns: &[ShiftPattern], range_max: u64, t: &[u64]) -> Result<(u32, Option<u32>, u32)> {
    let mut certified = u32::MAX;
    let mut small: Option<u32> = None;
    let mut sampled = u32::MAX;
    for p in patterns {
        let classes: Vec<u32> = (0..64u64)
            .into_par_iter()
            .map(|x| class_lower_bound(p, x, 6, REFINE_BITS).0)
            .collect();
        certified = certified.min(classes.into_iter().min().unwrap_or(0));
        for n in 1..MIN_INDEX {
            if let Some(v) = nu2_product_direct(n, p) {
                small = Some(small.map_or(v, |s: u32| s.min(v)));
            }
        }
        for x in 0..64 {
            sampled = sampled.min(scan_class(t, p, 64, x, MIN_INDEX, range_max).0);
        }
    }
    if certified <= REPDIGIT_MAX_ORDER || small.is_some_and(|s| s <= REPDIGIT_MAX_ORDER) {
        return Err(Error::certification(
            "block caps",
            format!("pattern beyond the cap reaches order {}", certified.min(small.unwrap_or(u32::MAX))),
        ));
    }
    Ok((certified, small, sampled))
}

pub fn max_block_lengths(equation: Equation) -> Result<BlockCaps> {
    max_block_lengths_with(equation, DEFAULT_RANGE_MAX)
}

/// Caps `(k_max, l_max)` on block lengths, certified for every `n >= 1`: every
/// pattern with a block one longer than its cap has 2-adic order at least 4,
/// which no repdigit reaches.
pub fn max_block_lengths_with(equation: Equation, range_max: u64) -> Result<BlockCaps> {
    if range_max < 64 * 16 + 69 {
        return Err(Error::InvalidArgument(format!("range_max = {range_max} too small")));
    }
    let t = residues_mod_2_64(range_max as usize + 80);
    let plus_cap = sampled_run_cap(&t, Shift::Plus, range_max);
    let minus_cap = sampled_run_cap(&t, Shift::Minus, range_max);
    let (order, k_max, l_max) = match equation {
        Equation::Eq1 => (BlockOrder::PlusOnly, 0, plus_cap),
        Equation::Eq2 => (BlockOrder::MinusOnly, 0, minus_cap),
        Equation::Eq3 => (BlockOrder::MinusThenPlus, minus_cap, plus_cap),
        Equation::Eq4 => (BlockOrder::PlusThenMinus, plus_cap, minus_cap),
        Equation::Bgl => {
            return Err(Error::InvalidArgument("the unshifted product has no 2-adic cap".into()));
        }
    };
    let mut excess = Vec::new();
    if k_max == 0 {
        excess.push(ShiftPattern::new(order, 0, l_max + 1)?);
    } else {
        for l in 1..=l_max + 1 {
            excess.push(ShiftPattern::new(order, k_max + 1, l)?);
        }
        for k in 1..=k_max + 1 {
            excess.push(ShiftPattern::new(order, k, l_max + 1)?);
        }
    }
    let (certified, small, sampled) = certify_excess(&excess, range_max, &t)?;
    Ok(BlockCaps {
        equation,
        k_max,
        l_max,
        plus_run_cap: plus_cap,
        minus_run_cap: minus_cap,
        certified_min_order: certified,
        small_n_min_order: small,
        sample_range_max: range_max,
        sample_min_order: sampled,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrintedBranchAudit {
    pub range_max: u64,
    pub checked: u64,
    pub mismatches: u64,
    pub first_mismatches: Vec<(u64, u32, u32)>,
}

/// Compares the printed `n = 61 (mod 64)` branch against direct orders.
pub fn audit_printed_plus_branch(range_max: u64) -> PrintedBranchAudit {
    let t = residues_mod_2_64(range_max as usize + 1);
    let mut audit = PrintedBranchAudit {
        range_max,
        checked: 0,
        mismatches: 0,
        first_mismatches: Vec::new(),
    };
    for n in (61..=range_max).step_by(64) {
        audit.checked += 1;
        let direct = nu2_u64(t[n as usize], Shift::Plus);
        let printed = nu2_shift_plus_printed(n).expect("n >= 5");
        if printed != direct {
            audit.mismatches += 1;
            if audit.first_mismatches.len() < 5 {
                audit.first_mismatches.push((n, printed, direct));
            }
        }
    }
    audit
}

/// Number of `n` in `5..=range_max` where either closed form disagrees with
/// direct evaluation, with the first few offenders.
pub fn closed_form_mismatches(range_max: u64) -> (u64, Vec<(u64, Shift, u32, u32)>) {
    let t = residues_mod_2_64(range_max as usize + 1);
    let bad: Vec<(u64, Shift, u32, u32)> = (MIN_INDEX..=range_max)
        .into_par_iter()
        .flat_map_iter(|n| {
            let tn = t[n as usize];
            let plus = (Shift::Plus, nu2_shift_plus(n).ok(), nu2_u64(tn, Shift::Plus));
            let minus = (Shift::Minus, nu2_shift_minus(n).ok(), nu2_u64(tn, Shift::Minus));
            [plus, minus]
                .into_iter()
                .filter(|(_, c, d)| *c != Some(*d))
                .map(move |(s, c, d)| (n, s, c.unwrap_or(u32::MAX), d))
        })
        .collect();
    let count = bad.len() as u64;
    (count, bad.into_iter().take(10).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(nu2_shift_plus(61).unwrap(), 15);
        assert_eq!(nu2_shift_plus(5).unwrap(), 3);
        assert_eq!(nu2_shift_plus(13).unwrap(), 5);
        assert_eq!(nu2_shift_minus(10).unwrap(), 2);
        assert_eq!(nu2_shift_minus(7).unwrap(), 0);
        assert_eq!(nu2_shift_minus(9).unwrap(), 4);
        assert!(matches!(nu2_shift_plus(4), Err(Error::OutOfDomain { .. })));
        assert!(nu2_shift_minus(0).is_err());
    }

    #[test]
    fn root_residues() {
        let rho = plus_root();
        assert_eq!(rho as u64, 9489618705952706621);
        assert_eq!(rho % 8192, 4157);
    }

    #[test]
    fn closed_forms_match_direct_small() {
        let (count, bad) = closed_form_mismatches(5000);
        assert_eq!(count, 0, "{bad:?}");
    }

    #[test]
    fn closed_form_large_indices() {
        for n in [61 + 64 * 1_000_003u64, 4157 + (1 << 40), 13 + 64 * 77_777_777, 1 + 8 * 123_456_789, u64::MAX / 3] {
            assert_eq!(Some(nu2_shift_plus(n).unwrap()), nu2_direct(n, Shift::Plus), "n = {n}");
            assert_eq!(Some(nu2_shift_minus(n).unwrap()), nu2_direct(n, Shift::Minus), "n = {n}");
        }
    }

    #[test]
    fn printed_branch_fails() {
        let a = audit_printed_plus_branch(100_000);
        assert!(a.mismatches > 0);
        assert_eq!(nu2_shift_plus_printed(61).unwrap(), 15);
    }

    #[test]
    fn product_examples() {
        let p8 = ShiftPattern::plus_only(8).unwrap();
        for j in [1u64, 2, 5, 17] {
            assert_eq!(nu2_product(64 * j + 6, &p8).unwrap(), 8);
        }
        assert_eq!(nu2_product(13, &ShiftPattern::plus_only(1).unwrap()).unwrap(), 5);
        let m2 = ShiftPattern::minus_only(2).unwrap();
        for j in 1..50u64 {
            assert!(nu2_product(8 * j, &m2).unwrap() >= 4);
        }
        let mixed = Equation::Eq3.pattern(2, 3).unwrap();
        assert_eq!(Some(nu2_product(20, &mixed).unwrap()), nu2_product_direct(20, &mixed));
    }

    #[test]
    fn direct_handles_zero_factors() {
        assert_eq!(nu2_direct(1, Shift::Minus), None);
        assert_eq!(nu2_direct(0, Shift::Plus), Some(0));
        assert_eq!(nu2_direct(5, Shift::Plus), Some(3));
    }

    #[test]
    fn class_bounds() {
        let p1 = ShiftPattern::plus_only(1).unwrap();
        assert_eq!(class_lower_bound(&p1, 13, 6, 12), (5, true));
        assert_eq!(class_lower_bound(&p1, 61, 6, 12).0, 10);
        let m1 = ShiftPattern::minus_only(1).unwrap();
        assert_eq!(class_lower_bound(&m1, 1, 3, 12).0, 4);
    }

    #[test]
    fn table_spot_checks() {
        let tv = verify_valuation_tables(5000).unwrap();
        let find = |s: Shift, len: u32, x: u64| {
            tv.rows
                .iter()
                .find(|r| r.shift == s && r.block_length == len && r.residue == x)
                .unwrap()
                .clone()
        };
        assert_eq!(find(Shift::Plus, 5, 25).verdict, Verdict::Exact(9));
        assert_eq!(find(Shift::Plus, 4, 26).verdict, Verdict::Exact(8));
        let m = find(Shift::Minus, 1, 1);
        assert!(m.observed_min >= 4 && m.consistent);
        assert!(tv.all_consistent);
        assert!(verify_valuation_tables(100).is_err());
    }

    #[test]
    fn caps() {
        let c1 = max_block_lengths_with(Equation::Eq1, 5000).unwrap();
        assert_eq!((c1.k_max, c1.l_max), (0, 7));
        let c3 = max_block_lengths_with(Equation::Eq3, 5000).unwrap();
        assert_eq!((c3.k_max, c3.l_max), (6, 7));
        let c4 = max_block_lengths_with(Equation::Eq4, 5000).unwrap();
        assert_eq!((c4.k_max, c4.l_max), (7, 6));
        assert!(c4.certified_min_order >= 4);
    }
}
