//! Boolean formula representations.
//!
//! Variable `i` is always bit `i` of an assignment mask (LSB is `x0`). Every
//! representation answers the same three questions: evaluate on a full
//! assignment, decide whether a partial assignment already determines the
//! value, and restrict one variable to a constant.

mod dnf;
mod table;
mod tree;

pub use dnf::{DnfFormula, Literal, ReadOnceDnf};
pub use table::{TruthTable, TABLE_CAP};
pub use tree::{RoNode, RoTree, TtspGraph, TtspNode};

use crate::error::{Result, SbfeError};

/// Bitmask over variables. Bit `i` is variable `i`.
pub type Mask = u128;

/// Largest variable count any representation accepts.
pub const MAX_VARS: usize = 128;

/// Mask with the low `n` bits set.
pub fn full_mask(n: usize) -> Mask {
    if n >= 128 {
        Mask::MAX
    } else {
        (1u128 << n) - 1
    }
}

pub fn check_var_count(n: usize) -> Result<()> {
    if n > MAX_VARS {
        return Err(SbfeError::SizeExceeded { what: "formula", n, cap: MAX_VARS });
    }
    Ok(())
}

/// Which variables have been tested and what they returned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PartialAssignment {
    tested: Mask,
    values: Mask,
}

impl PartialAssignment {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `values` must be a subset of `tested`.
    pub fn new(tested: Mask, values: Mask) -> Result<Self> {
        if values & !tested != 0 {
            return Err(SbfeError::InvalidInstance("partial assignment sets values on untested variables".into()));
        }
        Ok(Self { tested, values })
    }

    /// The observation of the full assignment `x` on the variables in `tested`.
    pub fn observe(tested: Mask, x: Mask) -> Self {
        Self { tested, values: x & tested }
    }

    pub fn tested(&self) -> Mask {
        self.tested
    }

    pub fn values(&self) -> Mask {
        self.values
    }

    pub fn is_tested(&self, var: usize) -> bool {
        self.tested >> var & 1 == 1
    }

    pub fn value(&self, var: usize) -> Option<bool> {
        self.is_tested(var).then(|| self.values >> var & 1 == 1)
    }

    pub fn with(&self, var: usize, value: bool) -> Self {
        let bit = 1u128 << var;
        Self { tested: self.tested | bit, values: if value { self.values | bit } else { self.values & !bit } }
    }

    pub fn num_tested(&self) -> u32 {
        self.tested.count_ones()
    }
}

/// Outcome of a determination check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Determination {
    Determined(bool),
    Undetermined,
}

impl Determination {
    pub fn is_determined(self) -> bool {
        matches!(self, Determination::Determined(_))
    }

    pub fn value(self) -> Option<bool> {
        match self {
            Determination::Determined(v) => Some(v),
            Determination::Undetermined => None,
        }
    }
}

impl From<Option<bool>> for Determination {
    fn from(v: Option<bool>) -> Self {
        v.map_or(Determination::Undetermined, Determination::Determined)
    }
}

/// Any supported representation of a Boolean function on `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Constant { n: usize, value: bool },
    Dnf(DnfFormula),
    Tree(RoTree),
    Ttsp(TtspGraph),
    Table(TruthTable),
}

impl Formula {
    pub fn n(&self) -> usize {
        match self {
            Formula::Constant { n, .. } => *n,
            Formula::Dnf(f) => f.n(),
            Formula::Tree(t) => t.n(),
            Formula::Ttsp(g) => g.n(),
            Formula::Table(t) => t.n(),
        }
    }

    pub fn eval(&self, x: Mask) -> bool {
        match self {
            Formula::Constant { value, .. } => *value,
            Formula::Dnf(f) => f.eval(x),
            Formula::Tree(t) => t.eval(x),
            Formula::Ttsp(g) => g.eval(x),
            Formula::Table(t) => t.get(x as usize),
        }
    }

    /// Exact determination: `Determined(v)` iff `f` is constant `v` on the
    /// subcube fixed by `pa`.
    pub fn is_determined(&self, pa: &PartialAssignment) -> Determination {
        match self {
            Formula::Constant { value, .. } => Determination::Determined(*value),
            Formula::Dnf(f) => f.is_determined(pa),
            Formula::Tree(t) => t.kleene(pa).into(),
            Formula::Ttsp(g) => g.kleene(pa).into(),
            Formula::Table(t) => t.is_determined(pa),
        }
    }

    /// `f` with `x_var` fixed to `value`. The result keeps the same `n`;
    /// a TTSP graph restricts to its equivalent read-once tree.
    pub fn restrict(&self, var: usize, value: bool) -> Formula {
        match self {
            Formula::Constant { .. } => self.clone(),
            Formula::Dnf(f) => f.restrict(var, value),
            Formula::Tree(t) => t.restrict(var, value),
            Formula::Ttsp(g) => g.to_formula().restrict(var, value),
            Formula::Table(t) => Formula::Table(t.restrict(var, value)),
        }
    }

    pub fn to_truth_table(&self, cap: usize) -> Result<TruthTable> {
        let n = self.n();
        let cap = cap.min(TABLE_CAP);
        if n > cap {
            return Err(SbfeError::SizeExceeded { what: "truth table", n, cap });
        }
        if let Formula::Table(t) = self {
            return Ok(t.clone());
        }
        Ok(TruthTable::from_fn(n, |x| self.eval(x as Mask)))
    }

    pub fn as_read_once_dnf(&self) -> Option<ReadOnceDnf> {
        match self {
            Formula::Dnf(f) => ReadOnceDnf::try_from(f.clone()).ok(),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Formula::Constant { .. } => "constant",
            Formula::Dnf(_) => "dnf",
            Formula::Tree(_) => "rotree",
            Formula::Ttsp(_) => "ttsp",
            Formula::Table(_) => "truth_table",
        }
    }
}

impl From<DnfFormula> for Formula {
    fn from(f: DnfFormula) -> Self {
        Formula::Dnf(f)
    }
}

impl From<ReadOnceDnf> for Formula {
    fn from(f: ReadOnceDnf) -> Self {
        Formula::Dnf(f.into_inner())
    }
}

impl From<RoTree> for Formula {
    fn from(t: RoTree) -> Self {
        Formula::Tree(t)
    }
}

impl From<TtspGraph> for Formula {
    fn from(g: TtspGraph) -> Self {
        Formula::Ttsp(g)
    }
}

impl From<TruthTable> for Formula {
    fn from(t: TruthTable) -> Self {
        Formula::Table(t)
    }
}

/// Iterates over every submask of `mask`, including `0` and `mask` itself.
pub(crate) fn submasks(mask: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}
