use serde::{Deserialize, Serialize};

use super::{check_var_count, Determination, Formula, Mask, PartialAssignment};
use crate::error::{Result, SbfeError};

/// A variable or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    #[serde(rename = "neg")]
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    /// Truth value of the literal under the assignment `x`.
    pub fn holds(&self, x: Mask) -> bool {
        (x >> self.var & 1 == 1) != self.negated
    }
}

/// An OR of terms, each an AND of literals over distinct variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfFormula {
    n: usize,
    terms: Vec<Vec<Literal>>,
}

/// A term compiled to positive/negative literal masks.
#[derive(Debug, Clone, Copy)]
struct TermMasks {
    pos: Mask,
    neg: Mask,
}

impl DnfFormula {
    pub fn new(n: usize, terms: Vec<Vec<Literal>>) -> Result<Self> {
        check_var_count(n)?;
        if terms.is_empty() {
            return Err(SbfeError::InvalidFormula("DNF needs at least one term".into()));
        }
        for (j, term) in terms.iter().enumerate() {
            if term.is_empty() {
                return Err(SbfeError::InvalidFormula(format!("term {j} is empty")));
            }
            let mut seen: Mask = 0;
            for lit in term {
                if lit.var >= n {
                    return Err(SbfeError::InvalidFormula(format!("term {j} uses variable {} but n = {n}", lit.var)));
                }
                if seen >> lit.var & 1 == 1 {
                    return Err(SbfeError::InvalidFormula(format!("term {j} repeats variable {}", lit.var)));
                }
                seen |= 1 << lit.var;
            }
        }
        Ok(Self { n, terms })
    }

    /// Convenience constructor for a monotone DNF given as variable lists.
    pub fn monotone(n: usize, terms: &[Vec<usize>]) -> Result<Self> {
        Self::new(n, terms.iter().map(|t| t.iter().map(|&v| Literal::pos(v)).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Vec<Literal>] {
        &self.terms
    }

    pub fn is_monotone(&self) -> bool {
        self.terms.iter().flatten().all(|l| !l.negated)
    }

    fn masks(&self) -> impl Iterator<Item = TermMasks> + '_ {
        self.terms.iter().map(|t| {
            t.iter().fold(TermMasks { pos: 0, neg: 0 }, |mut m, l| {
                if l.negated {
                    m.neg |= 1 << l.var;
                } else {
                    m.pos |= 1 << l.var;
                }
                m
            })
        })
    }

    pub fn eval(&self, x: Mask) -> bool {
        self.terms.iter().any(|t| t.iter().all(|l| l.holds(x)))
    }

    /// The term-wise rule: some term has every literal tested true, or every
    /// term has a tested-false literal. Sound for every DNF and complete for
    /// monotone ones; it misses tautological completions such as
    /// `(¬a ∧ y0) ∨ (a ∧ y1)` with `y0 = y1 = 1`.
    pub fn structural_determination(&self, pa: &PartialAssignment) -> Determination {
        let mut all_false = true;
        for m in self.masks() {
            match term_status(m, pa) {
                TermStatus::True => return Determination::Determined(true),
                TermStatus::False => {}
                TermStatus::Open { .. } => all_false = false,
            }
        }
        if all_false {
            Determination::Determined(false)
        } else {
            Determination::Undetermined
        }
    }

    /// Exact determination. Falls back to a tautology check of the restricted
    /// DNF when the term-wise rule is inconclusive and negations are present.
    pub fn is_determined(&self, pa: &PartialAssignment) -> Determination {
        let mut open = Vec::new();
        for m in self.masks() {
            match term_status(m, pa) {
                TermStatus::True => return Determination::Determined(true),
                TermStatus::False => {}
                TermStatus::Open { pos, neg } => open.push(TermMasks { pos, neg }),
            }
        }
        if open.is_empty() {
            return Determination::Determined(false);
        }
        if is_tautology(&open) {
            Determination::Determined(true)
        } else {
            Determination::Undetermined
        }
    }

    pub fn restrict(&self, var: usize, value: bool) -> Formula {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match t.iter().find(|l| l.var == var) {
                None => terms.push(t.clone()),
                Some(l) if l.negated == value => {} // falsified
                Some(_) => {
                    let rest: Vec<Literal> = t.iter().copied().filter(|l| l.var != var).collect();
                    if rest.is_empty() {
                        return Formula::Constant { n: self.n, value: true };
                    }
                    terms.push(rest);
                }
            }
        }
        if terms.is_empty() {
            Formula::Constant { n: self.n, value: false }
        } else {
            Formula::Dnf(DnfFormula { n: self.n, terms })
        }
    }

    /// Removes repeated terms (as literal sets), keeping first occurrences.
    pub fn normalized(&self) -> Self {
        let mut seen = std::collections::HashSet::new();
        let terms = self
            .terms
            .iter()
            .filter(|t| {
                let mut key: Vec<Literal> = (*t).clone();
                key.sort_by_key(|l| (l.var, l.negated));
                seen.insert(key)
            })
            .cloned()
            .collect();
        Self { n: self.n, terms }
    }
}

enum TermStatus {
    True,
    False,
    /// Remaining untested literals.
    Open {
        pos: Mask,
        neg: Mask,
    },
}

fn term_status(m: TermMasks, pa: &PartialAssignment) -> TermStatus {
    let t = pa.tested();
    let v = pa.values();
    if (m.pos & t & !v) != 0 || (m.neg & t & v) != 0 {
        return TermStatus::False;
    }
    let pos = m.pos & !t;
    let neg = m.neg & !t;
    if pos == 0 && neg == 0 {
        TermStatus::True
    } else {
        TermStatus::Open { pos, neg }
    }
}

/// Whether an OR of non-contradictory terms covers the whole cube.
fn is_tautology(terms: &[TermMasks]) -> bool {
    if terms.iter().any(|t| t.pos == 0 && t.neg == 0) {
        return true;
    }
    // All-zeros falsifies any term with a positive literal; all-ones any
    // term with a negative one.
    if terms.iter().all(|t| t.pos != 0) || terms.iter().all(|t| t.neg != 0) {
        return false;
    }
    let first = terms[0];
    let split = first.pos | first.neg;
    let var = split.trailing_zeros();
    let bit = 1u128 << var;
    [false, true].into_iter().all(|value| {
        let sub: Vec<TermMasks> = terms
            .iter()
            .filter(|t| {
                let kills = if value { t.neg & bit != 0 } else { t.pos & bit != 0 };
                !kills
            })
            .map(|t| TermMasks { pos: t.pos & !bit, neg: t.neg & !bit })
            .collect();
        is_tautology(&sub)
    })
}

/// A DNF with no negations whose terms use pairwise disjoint variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadOnceDnf(DnfFormula);

impl TryFrom<DnfFormula> for ReadOnceDnf {
    type Error = SbfeError;

    fn try_from(f: DnfFormula) -> Result<Self> {
        let mut seen: Mask = 0;
        for lit in f.terms.iter().flatten() {
            if lit.negated {
                return Err(SbfeError::NotReadOnceDnf);
            }
            if seen >> lit.var & 1 == 1 {
                return Err(SbfeError::NotReadOnceDnf);
            }
            seen |= 1 << lit.var;
        }
        Ok(ReadOnceDnf(f))
    }
}

impl ReadOnceDnf {
    pub fn from_terms(n: usize, terms: &[Vec<usize>]) -> Result<Self> {
        DnfFormula::monotone(n, terms)?.try_into()
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn num_terms(&self) -> usize {
        self.0.terms.len()
    }

    /// Variable indices of each term, in stored order.
    pub fn term_vars(&self) -> Vec<Vec<usize>> {
        self.0.terms.iter().map(|t| t.iter().map(|l| l.var).collect()).collect()
    }

    pub fn as_dnf(&self) -> &DnfFormula {
        &self.0
    }

    pub fn into_inner(self) -> DnfFormula {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_or() -> DnfFormula {
        // (x0 ∧ x1) ∨ x2
        DnfFormula::monotone(3, &[vec![0, 1], vec![2]]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = and_or();
        assert!(f.eval(0b011));
        assert!(!f.eval(0b000));
        assert!(f.eval(0b100));
    }

    #[test]
    fn construction_rejects_malformed_terms() {
        assert!(DnfFormula::new(2, vec![]).is_err());
        assert!(DnfFormula::new(2, vec![vec![]]).is_err());
        assert!(DnfFormula::new(2, vec![vec![Literal::pos(2)]]).is_err());
        assert!(DnfFormula::new(2, vec![vec![Literal::pos(1), Literal::neg(1)]]).is_err());
    }

    #[test]
    fn read_once_validation() {
        assert!(ReadOnceDnf::from_terms(4, &[vec![0, 1], vec![2, 3]]).is_ok());
        assert_eq!(ReadOnceDnf::from_terms(3, &[vec![0, 1], vec![1, 2]]), Err(SbfeError::NotReadOnceDnf));
        let negated = DnfFormula::new(2, vec![vec![Literal::neg(0)], vec![Literal::pos(1)]]).unwrap();
        assert_eq!(ReadOnceDnf::try_from(negated), Err(SbfeError::NotReadOnceDnf));
    }

    #[test]
    fn restrict_to_constant_and_subformula() {
        let or = DnfFormula::monotone(2, &[vec![0], vec![1]]).unwrap();
        assert_eq!(or.restrict(0, true), Formula::Constant { n: 2, value: true });
        let f = and_or().restrict(1, false);
        match &f {
            Formula::Dnf(d) => assert_eq!(d.terms(), &[vec![Literal::pos(2)]]),
            other => panic!("unexpected {other:?}"),
        }
        for x in 0..8u128 {
            assert_eq!(f.eval(x), x & 0b100 != 0);
        }
    }

    #[test]
    fn structural_check_misses_tautologies_but_exact_check_does_not() {
        // (¬a ∧ y0) ∨ (a ∧ y1)
        let f =
            DnfFormula::new(3, vec![vec![Literal::neg(0), Literal::pos(1)], vec![Literal::pos(0), Literal::pos(2)]])
                .unwrap();
        let pa = PartialAssignment::empty().with(1, true).with(2, true);
        assert_eq!(f.structural_determination(&pa), Determination::Undetermined);
        assert_eq!(f.is_determined(&pa), Determination::Determined(true));
    }

    #[test]
    fn normalization_drops_duplicates_only() {
        let f = DnfFormula::new(
            3,
            vec![vec![Literal::pos(0), Literal::pos(1)], vec![Literal::pos(1), Literal::pos(0)], vec![Literal::pos(2)]],
        )
        .unwrap();
        assert_eq!(f.normalized().terms().len(), 2);
        assert_eq!(f.terms().len(), 3);
    }
}
