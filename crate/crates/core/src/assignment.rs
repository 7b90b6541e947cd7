use std::fmt;

use bitvec::prelude::*;

/// A Boolean variable, stored 0-based. Displayed with the 1-based OPB name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: usize) -> Self {
        Var(u32::try_from(index).expect("variable index exceeds u32"))
    }

    /// Build from the 1-based index used in OPB files (`x1` is index 1).
    pub fn from_opb(index: usize) -> Self {
        assert!(index >= 1, "OPB variable indices start at 1");
        Var::new(index - 1)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn opb_index(self) -> usize {
        self.index() + 1
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.opb_index())
    }
}

/// A literal: `x` when `positive`, `~x` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit { var, positive }
    }

    #[inline]
    pub fn var(self) -> Var {
        self.var
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// Value of the literal under the given variable value.
    #[inline]
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }

    /// The variable value that makes this literal true.
    #[inline]
    pub fn satisfying_value(self) -> bool {
        self.positive
    }

    #[inline]
    pub fn is_true(self, a: &Assignment) -> bool {
        self.eval(a.get(self.var))
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit::new(self.var, !self.positive)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "~{}", self.var)
        }
    }
}

/// A total assignment stored as a dense bit vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    bits: BitVec<u64, Lsb0>,
}

impl Assignment {
    pub fn zeros(num_vars: usize) -> Self {
        Assignment {
            bits: bitvec![u64, Lsb0; 0; num_vars],
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(values: I) -> Self {
        Assignment {
            bits: values.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, v: Var) -> bool {
        self.bits[v.index()]
    }

    #[inline]
    pub fn set(&mut self, v: Var, value: bool) {
        self.bits.set(v.index(), value);
    }

    #[inline]
    pub fn flip(&mut self, v: Var) {
        let i = v.index();
        let old = self.bits[i];
        self.bits.set(i, !old);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().by_vals()
    }

    /// Number of positions where the two assignments differ. Lengths must match.
    pub fn distance(&self, other: &Assignment) -> usize {
        debug_assert_eq!(self.len(), other.len());
        self.bits
            .as_raw_slice()
            .iter()
            .zip(other.bits.as_raw_slice())
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Assignment(")?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}
