//! Prime-field arithmetic with explicit operation counting.
//!
//! Every element is kept in canonical form `[0, q)`. Counted operations
//! follow one convention throughout the crate: each addition or subtraction
//! of two symbols costs one add, and a multiplication costs one mul unless an
//! operand is `0`, `1` or `q - 1` (identity, negation and annihilation are
//! free). Inversions are never counted; the code only inverts constants that
//! are fixed once the code parameters are chosen.

use std::fmt;

use crate::error::{Error, Result};

/// Largest modulus accepted. Symbols are stored as 16-bit integers on disk.
pub const MAX_MODULUS: u32 = 1 << 15;

/// An element of `F_q` in canonical form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub(crate) u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The prime field `F_q` for an odd prime `7 <= q < 2^15`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u32,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self> {
        if !(7..MAX_MODULUS).contains(&q) || q.is_multiple_of(2) || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(PrimeField { q })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.q
    }

    /// Reduces any integer into the field.
    #[inline]
    pub fn elem(&self, v: i64) -> Fe {
        Fe(v.rem_euclid(self.q as i64) as u32)
    }

    /// Accepts an already-canonical value, rejecting anything `>= q`.
    pub fn try_elem(&self, v: u32) -> Result<Fe> {
        if v < self.q {
            Ok(Fe(v))
        } else {
            Err(Error::SymbolOutOfRange { value: v, q: self.q })
        }
    }

    #[inline]
    pub fn minus_one(&self) -> Fe {
        Fe(self.q - 1)
    }

    /// Maps a `+1`/`-1` sign into the field.
    #[inline]
    pub fn sign(&self, s: i8) -> Fe {
        if s >= 0 {
            Fe::ONE
        } else {
            self.minus_one()
        }
    }

    /// Centered integer representative in `(-q/2, q/2]`.
    pub fn centered(&self, x: Fe) -> i64 {
        let v = x.0 as i64;
        if v > (self.q as i64) / 2 {
            v - self.q as i64
        } else {
            v
        }
    }

    #[inline]
    pub fn add(&self, x: Fe, y: Fe) -> Fe {
        let s = x.0 + y.0;
        Fe(if s >= self.q { s - self.q } else { s })
    }

    #[inline]
    pub fn sub(&self, x: Fe, y: Fe) -> Fe {
        if x.0 >= y.0 {
            Fe(x.0 - y.0)
        } else {
            Fe(x.0 + self.q - y.0)
        }
    }

    #[inline]
    pub fn neg(&self, x: Fe) -> Fe {
        if x.0 == 0 {
            x
        } else {
            Fe(self.q - x.0)
        }
    }

    #[inline]
    pub fn mul(&self, x: Fe, y: Fe) -> Fe {
        Fe(((x.0 as u64 * y.0 as u64) % self.q as u64) as u32)
    }

    pub fn pow(&self, mut base: Fe, mut exp: u64) -> Fe {
        let mut acc = Fe::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: Fe) -> Result<Fe> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(x, (self.q - 2) as u64))
    }

    /// True for the multipliers the counting convention treats as free.
    #[inline]
    pub fn is_trivial_factor(&self, x: Fe) -> bool {
        x.0 == 0 || x.0 == 1 || x.0 == self.q - 1
    }

    /// `x + y`, charging one add.
    #[inline]
    pub fn add_counted(&self, x: Fe, y: Fe, counter: &mut OpCounter) -> Fe {
        counter.count_add(1);
        self.add(x, y)
    }

    /// `x - y`, charging one add.
    #[inline]
    pub fn sub_counted(&self, x: Fe, y: Fe, counter: &mut OpCounter) -> Fe {
        counter.count_add(1);
        self.sub(x, y)
    }

    /// `x * y`, charging one mul unless either operand is `0` or `±1`.
    #[inline]
    pub fn mul_counted(&self, x: Fe, y: Fe, counter: &mut OpCounter) -> Fe {
        if !self.is_trivial_factor(x) && !self.is_trivial_factor(y) {
            counter.count_mul(1);
        }
        self.mul(x, y)
    }
}

/// Stage of a repair an operation is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Download,
    Cancel,
    Recover,
    Other,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Download, Phase::Cancel, Phase::Recover, Phase::Other];

    fn slot(self) -> usize {
        match self {
            Phase::Download => 0,
            Phase::Cancel => 1,
            Phase::Recover => 2,
            Phase::Other => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Download => "download",
            Phase::Cancel => "cancel",
            Phase::Recover => "recover",
            Phase::Other => "other",
        }
    }
}

/// Phase-tagged tally of field additions and multiplications.
///
/// Operations are charged to the current phase, which starts as
/// [`Phase::Other`]. Counters are plain values: each task owns one and they
/// are merged after joining.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpCounter {
    phase: Phase,
    adds: [u64; 4],
    muls: [u64; 4],
}

impl Default for OpCounter {
    fn default() -> Self {
        OpCounter { phase: Phase::Other, adds: [0; 4], muls: [0; 4] }
    }
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    #[inline]
    pub fn count_add(&mut self, n: u64) {
        self.adds[self.phase.slot()] += n;
    }

    #[inline]
    pub fn count_mul(&mut self, n: u64) {
        self.muls[self.phase.slot()] += n;
    }

    pub fn adds(&self) -> u64 {
        self.adds.iter().sum()
    }

    pub fn muls(&self) -> u64 {
        self.muls.iter().sum()
    }

    pub fn adds_in(&self, phase: Phase) -> u64 {
        self.adds[phase.slot()]
    }

    pub fn muls_in(&self, phase: Phase) -> u64 {
        self.muls[phase.slot()]
    }

    /// Component-wise sum. The receiver keeps its current phase.
    pub fn merge(&mut self, other: &OpCounter) {
        for s in 0..4 {
            self.adds[s] += other.adds[s];
            self.muls[s] += other.muls[s];
        }
    }
}
