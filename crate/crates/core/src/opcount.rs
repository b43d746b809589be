//! Real-arithmetic operation counting.
//!
//! Every counted kernel in this crate takes a `&mut T where T: Tally`. Pass an
//! [`OpCounter`] to get a per-phase ledger or [`NullTally`] to count nothing.
//!
//! Counts are in real-arithmetic units: a complex multiply is 4 real
//! multiplies and 2 real adds, a complex add (or subtract) is 2 real adds.
//! Subtractions are counted as adds. Negation and conjugation are free.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Factorization,
    Normalization,
    BackSubstitution,
    Detection,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::Factorization,
        Phase::Normalization,
        Phase::BackSubstitution,
        Phase::Detection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Factorization => "factorization",
            Phase::Normalization => "normalization",
            Phase::BackSubstitution => "back-substitution",
            Phase::Detection => "detection",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Mul,
    Div,
    Sqrt,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub adds: u64,
    pub mults: u64,
    pub divs: u64,
    pub sqrts: u64,
}

impl OpCounts {
    fn bump(&mut self, op: Op, n: u64) {
        match op {
            Op::Add => self.adds += n,
            Op::Mul => self.mults += n,
            Op::Div => self.divs += n,
            Op::Sqrt => self.sqrts += n,
        }
    }
}

impl std::ops::Add for OpCounts {
    type Output = OpCounts;

    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts {
            adds: self.adds + o.adds,
            mults: self.mults + o.mults,
            divs: self.divs + o.divs,
            sqrts: self.sqrts + o.sqrts,
        }
    }
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, o: OpCounts) {
        *self = *self + o;
    }
}

impl std::iter::Sum for OpCounts {
    fn sum<I: Iterator<Item = OpCounts>>(iter: I) -> Self {
        iter.fold(OpCounts::default(), |a, b| a + b)
    }
}

impl fmt::Display for OpCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "adds={} mults={} divs={} sqrts={}",
            self.adds, self.mults, self.divs, self.sqrts
        )
    }
}

/// Sink for operation counts.
pub trait Tally {
    fn record(&mut self, op: Op, n: u64);
    fn set_phase(&mut self, phase: Phase);
}

/// Counts nothing. Used in Monte Carlo loops where only results matter.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullTally;

impl Tally for NullTally {
    #[inline(always)]
    fn record(&mut self, _op: Op, _n: u64) {}

    #[inline(always)]
    fn set_phase(&mut self, _phase: Phase) {}
}

/// Per-phase tally of real additions, multiplications, divisions and square
/// roots. Operations land in whichever phase was set last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpCounter {
    current: Phase,
    counts: [OpCounts; 4],
}

impl Default for OpCounter {
    fn default() -> Self {
        Self::new()
    }
}

impl OpCounter {
    pub fn new() -> Self {
        OpCounter {
            current: Phase::Factorization,
            counts: [OpCounts::default(); 4],
        }
    }

    pub fn phase(&self) -> Phase {
        self.current
    }

    pub fn get(&self, phase: Phase) -> OpCounts {
        self.counts[phase.slot()]
    }

    pub fn total(&self) -> OpCounts {
        self.counts.iter().copied().sum()
    }

    pub fn merge(&mut self, other: &OpCounter) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += *b;
        }
    }
}

impl Tally for OpCounter {
    #[inline]
    fn record(&mut self, op: Op, n: u64) {
        self.counts[self.current.slot()].bump(op, n);
    }

    #[inline]
    fn set_phase(&mut self, phase: Phase) {
        self.current = phase;
    }
}

impl fmt::Display for OpCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for phase in Phase::ALL {
            writeln!(f, "ops {:<17} {}", phase.name(), self.get(phase))?;
        }
        write!(f, "ops {:<17} {}", "total", self.total())
    }
}
