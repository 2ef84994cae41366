//! Tribonacci terms, repdigits and p-adic valuations of integers.

use std::sync::RwLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TribTerm {
    pub index: u64,
    pub value: BigUint,
}

/// `T_n` by the linear recurrence `T_{n+3} = T_{n+2} + T_{n+1} + T_n`.
pub fn trib(n: u64) -> TribTerm {
    let (mut a, mut b, mut c) = (BigUint::zero(), BigUint::one(), BigUint::one());
    for _ in 0..n {
        let next = &a + &b + &c;
        a = std::mem::replace(&mut b, std::mem::replace(&mut c, next));
    }
    TribTerm { index: n, value: a }
}

/// `T_0, ..., T_n`.
pub fn trib_prefix(n: u64) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n as usize + 1);
    for i in 0..=n as usize {
        let v = match i {
            0 => BigUint::zero(),
            1 | 2 => BigUint::one(),
            _ => &out[i - 1] + &out[i - 2] + &out[i - 3],
        };
        out.push(v);
    }
    out
}

/// `T_n mod modulus`, carrying the recurrence in modular arithmetic.
pub fn trib_mod(n: u64, modulus: &BigUint) -> Result<BigUint> {
    if *modulus < BigUint::from(2u8) {
        return Err(Error::InvalidArgument(format!("modulus must be >= 2, got {modulus}")));
    }
    let (mut a, mut b, mut c) = (BigUint::zero(), BigUint::one(), BigUint::one());
    for _ in 0..n {
        let next = (&a + &b + &c) % modulus;
        a = std::mem::replace(&mut b, std::mem::replace(&mut c, next));
    }
    Ok(a % modulus)
}

type Mat3 = [[u128; 3]; 3];

fn mat_mul_wrapping(x: &Mat3, y: &Mat3) -> Mat3 {
    let mut out = [[0u128; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut acc = 0u128;
            for (k, xv) in x[i].iter().enumerate() {
                acc = acc.wrapping_add(xv.wrapping_mul(y[k][j]));
            }
            *cell = acc;
        }
    }
    out
}

/// `T_n mod 2^128` for arbitrary `n` by companion-matrix exponentiation.
pub fn trib_wrapping_u128(n: u128) -> u128 {
    let mut result: Mat3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut base: Mat3 = [[1, 1, 1], [1, 0, 0], [0, 1, 0]];
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul_wrapping(&result, &base);
        }
        base = mat_mul_wrapping(&base, &base);
        e >>= 1;
    }
    // result * (T_2, T_1, T_0)^t = (T_{n+2}, T_{n+1}, T_n)^t
    result[2][0].wrapping_add(result[2][1])
}

/// Read-mostly cache of exact terms. Readers share a lock; growth publishes the
/// whole extended prefix at once.
#[derive(Debug)]
pub struct TribCache {
    terms: RwLock<Vec<BigUint>>,
}

impl Default for TribCache {
    fn default() -> Self {
        Self::with_capacity(200)
    }
}

impl TribCache {
    pub fn with_capacity(max_index: u64) -> Self {
        TribCache {
            terms: RwLock::new(trib_prefix(max_index)),
        }
    }

    pub fn get(&self, n: u64) -> BigUint {
        {
            let terms = self.terms.read().unwrap_or_else(|e| e.into_inner());
            if let Some(v) = terms.get(n as usize) {
                return v.clone();
            }
        }
        let mut terms = self.terms.write().unwrap_or_else(|e| e.into_inner());
        while terms.len() <= n as usize {
            let i = terms.len();
            let next = &terms[i - 1] + &terms[i - 2] + &terms[i - 3];
            terms.push(next);
        }
        terms[n as usize].clone()
    }

    pub fn len(&self) -> usize {
        self.terms.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepdigitForm {
    pub digit: u8,
    pub length: u32,
    #[serde(with = "crate::serde_big::biguint")]
    pub value: BigUint,
}

impl RepdigitForm {
    /// `d (10^m - 1) / 9`.
    pub fn new(digit: u8, length: u32) -> Result<Self> {
        if !(1..=9).contains(&digit) || length == 0 {
            return Err(Error::InvalidArgument(format!(
                "repdigit needs 1 <= d <= 9 and m >= 1, got d = {digit}, m = {length}"
            )));
        }
        Ok(RepdigitForm {
            digit,
            length,
            value: repdigit_value(digit, length),
        })
    }
}

pub fn repdigit_value(digit: u8, length: u32) -> BigUint {
    let ten = BigUint::from(10u8);
    (num_traits::pow(ten, length as usize) - 1u8) / 9u8 * digit
}

/// `Some((d, m))` when every decimal digit of `v` equals `d`.
pub fn as_repdigit(v: &BigUint) -> Result<Option<RepdigitForm>> {
    if v.is_zero() {
        return Err(Error::InvalidArgument("repdigit test needs v >= 1".into()));
    }
    let digits = v.to_str_radix(10);
    let bytes = digits.as_bytes();
    let first = bytes[0];
    if bytes.iter().any(|&b| b != first) {
        return Ok(None);
    }
    Ok(Some(RepdigitForm {
        digit: first - b'0',
        length: bytes.len() as u32,
        value: v.clone(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valuation {
    pub prime: u64,
    /// `None` stands for the valuation of zero.
    pub order: Option<u64>,
}

impl Valuation {
    pub fn is_infinite(&self) -> bool {
        self.order.is_none()
    }

    pub fn at_least(&self, k: u64) -> bool {
        self.order.is_none_or(|o| o >= k)
    }
}

/// Exact `p`-adic order of `v`. Primality of `p` is not checked.
pub fn nu(p: u64, v: &BigInt) -> Result<Valuation> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("valuation base must be >= 2, got {p}")));
    }
    if v.is_zero() {
        return Ok(Valuation { prime: p, order: None });
    }
    let mag = v.magnitude();
    let order = if p == 2 {
        mag.trailing_zeros().unwrap_or(0)
    } else {
        let p_big = BigUint::from(p);
        let mut m = mag.clone();
        let mut k = 0u64;
        loop {
            let (q, r) = m.div_rem(&p_big);
            if !r.is_zero() {
                break;
            }
            m = q;
            k += 1;
        }
        k
    };
    Ok(Valuation { prime: p, order: Some(order) })
}

/// `nu_2` of a non-negative integer; `None` for zero.
pub fn nu2_biguint(v: &BigUint) -> Option<u64> {
    v.trailing_zeros()
}

/// `T_n + shift` as a signed integer.
pub fn shifted(t: &BigUint, offset: i64) -> BigInt {
    BigInt::from_biguint(Sign::Plus, t.clone()) + offset
}

/// `nu_2(T_n + offset)` from the term modulo `2^128`; `None` if the residue is
/// zero, i.e. the order is at least 128.
pub fn nu2_shifted_u128(t_mod: u128, offset: i64) -> Option<u32> {
    let x = t_mod.wrapping_add(offset as i128 as u128);
    if x == 0 {
        None
    } else {
        Some(x.trailing_zeros())
    }
}

pub fn to_u64_lossy(v: &BigUint) -> u64 {
    v.to_u64().unwrap_or(u64::MAX)
}
