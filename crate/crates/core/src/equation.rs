//! The four shifted-product equations plus the unshifted sanity case, and the
//! block patterns that describe their left-hand sides.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Equation {
    /// `(T_n + 1) ... (T_{n+l-1} + 1)`
    Eq1,
    /// `(T_n - 1) ... (T_{n+l-1} - 1)`
    Eq2,
    /// `k` terms `T_i - 1` followed by `l` terms `T_i + 1`.
    Eq3,
    /// `k` terms `T_i + 1` followed by `l` terms `T_i - 1`.
    Eq4,
    /// `T_n ... T_{n+l-1}`, whose only repdigit with two or more digits is `T_8 = 44`.
    Bgl,
}

impl Equation {
    pub const ALL: [Equation; 5] = [
        Equation::Eq1,
        Equation::Eq2,
        Equation::Eq3,
        Equation::Eq4,
        Equation::Bgl,
    ];

    pub const SHIFTED: [Equation; 4] = [Equation::Eq1, Equation::Eq2, Equation::Eq3, Equation::Eq4];

    pub fn id(self) -> &'static str {
        match self {
            Equation::Eq1 => "1",
            Equation::Eq2 => "2",
            Equation::Eq3 => "3",
            Equation::Eq4 => "4",
            Equation::Bgl => "bgl",
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, Equation::Eq3 | Equation::Eq4)
    }

    /// Block pattern with `k` terms in the first block and `l` in the second.
    /// Single-block equations require `k = 0`.
    pub fn pattern(self, k: u32, l: u32) -> Result<ShiftPattern> {
        let order = match self {
            Equation::Eq1 => BlockOrder::PlusOnly,
            Equation::Eq2 => BlockOrder::MinusOnly,
            Equation::Eq3 => BlockOrder::MinusThenPlus,
            Equation::Eq4 => BlockOrder::PlusThenMinus,
            Equation::Bgl => BlockOrder::Unshifted,
        };
        ShiftPattern::new(order, k, l)
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equation::Bgl => write!(f, "bgl"),
            other => write!(f, "eq{}", other.id()),
        }
    }
}

impl FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "eq1" => Ok(Equation::Eq1),
            "2" | "eq2" => Ok(Equation::Eq2),
            "3" | "eq3" => Ok(Equation::Eq3),
            "4" | "eq4" => Ok(Equation::Eq4),
            "bgl" => Ok(Equation::Bgl),
            other => Err(Error::InvalidArgument(format!(
                "unknown equation '{other}' (expected 1, 2, 3, 4 or bgl)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shift {
    Plus,
    Minus,
    None,
}

impl Shift {
    pub fn offset(self) -> i64 {
        match self {
            Shift::Plus => 1,
            Shift::Minus => -1,
            Shift::None => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockOrder {
    PlusOnly,
    MinusOnly,
    MinusThenPlus,
    PlusThenMinus,
    Unshifted,
}

/// Consecutive factors `T_n + s_0, T_{n+1} + s_1, ...` grouped into at most two
/// blocks. `k` is the length of the first block of a mixed pattern and is zero
/// for single-block patterns, whose length is `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShiftPattern {
    pub order: BlockOrder,
    pub k: u32,
    pub l: u32,
}

impl ShiftPattern {
    pub fn new(order: BlockOrder, k: u32, l: u32) -> Result<Self> {
        let ok = match order {
            BlockOrder::PlusOnly | BlockOrder::MinusOnly | BlockOrder::Unshifted => k == 0 && l >= 1,
            BlockOrder::MinusThenPlus | BlockOrder::PlusThenMinus => k >= 1 && l >= 1,
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "pattern {order:?} does not admit k = {k}, l = {l}"
            )));
        }
        Ok(ShiftPattern { order, k, l })
    }

    pub fn plus_only(l: u32) -> Result<Self> {
        Self::new(BlockOrder::PlusOnly, 0, l)
    }

    pub fn minus_only(l: u32) -> Result<Self> {
        Self::new(BlockOrder::MinusOnly, 0, l)
    }

    pub fn len(&self) -> u32 {
        self.k + self.l
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn plus_count(&self) -> u32 {
        match self.order {
            BlockOrder::PlusOnly => self.l,
            BlockOrder::MinusThenPlus => self.l,
            BlockOrder::PlusThenMinus => self.k,
            BlockOrder::MinusOnly | BlockOrder::Unshifted => 0,
        }
    }

    pub fn minus_count(&self) -> u32 {
        match self.order {
            BlockOrder::MinusOnly => self.l,
            BlockOrder::MinusThenPlus => self.k,
            BlockOrder::PlusThenMinus => self.l,
            BlockOrder::PlusOnly | BlockOrder::Unshifted => 0,
        }
    }

    /// Shift applied to the `i`-th factor, `0 <= i < len()`.
    pub fn shift_at(&self, i: u32) -> Shift {
        let (first, second) = match self.order {
            BlockOrder::PlusOnly => (Shift::Plus, Shift::Plus),
            BlockOrder::MinusOnly => (Shift::Minus, Shift::Minus),
            BlockOrder::Unshifted => (Shift::None, Shift::None),
            BlockOrder::MinusThenPlus => (Shift::Minus, Shift::Plus),
            BlockOrder::PlusThenMinus => (Shift::Plus, Shift::Minus),
        };
        if i < self.k {
            first
        } else {
            second
        }
    }

    pub fn shifts(&self) -> impl Iterator<Item = Shift> + '_ {
        (0..self.len()).map(move |i| self.shift_at(i))
    }
}

impl fmt::Display for ShiftPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.shifts() {
            f.write_str(match s {
                Shift::Plus => "+",
                Shift::Minus => "-",
                Shift::None => "0",
            })?;
        }
        Ok(())
    }
}
