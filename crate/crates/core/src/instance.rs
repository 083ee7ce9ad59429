//! Problem instances and their JSON file format.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SbfeError};
use crate::formula::{DnfFormula, Formula, Literal, RoNode, RoTree, TruthTable, TtspGraph, TtspNode};
use crate::num::{format_rational, parse_rational, ratio, to_f64, JsonNumber, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Float,
}

/// Per-variable test costs and truth probabilities.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Exact { costs: Vec<Rational>, probs: Vec<Rational> },
    Float { costs: Vec<f64>, probs: Vec<f64> },
}

/// A formula with costs `c_i > 0` and probabilities `0 < p_i < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    formula: Formula,
    weights: Weights,
}

fn check_len(what: &str, len: usize, n: usize) -> Result<()> {
    if len != n {
        return Err(SbfeError::InvalidInstance(format!("{what} has length {len}, expected {n}")));
    }
    Ok(())
}

impl Instance {
    pub fn exact(formula: Formula, costs: Vec<Rational>, probs: Vec<Rational>) -> Result<Self> {
        let n = formula.n();
        check_len("costs", costs.len(), n)?;
        check_len("probs", probs.len(), n)?;
        if let Some(i) = costs.iter().position(|c| *c <= Rational::zero()) {
            return Err(SbfeError::InvalidInstance(format!("cost of x{i} is not positive")));
        }
        if let Some(i) = probs.iter().position(|p| *p <= Rational::zero() || *p >= Rational::one()) {
            return Err(SbfeError::InvalidInstance(format!("probability of x{i} is not in (0, 1)")));
        }
        Ok(Self { formula, weights: Weights::Exact { costs, probs } })
    }

    pub fn float(formula: Formula, costs: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let n = formula.n();
        check_len("costs", costs.len(), n)?;
        check_len("probs", probs.len(), n)?;
        if let Some(i) = costs.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(SbfeError::InvalidInstance(format!("cost of x{i} is not positive")));
        }
        if let Some(i) = probs.iter().position(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(SbfeError::InvalidInstance(format!("probability of x{i} is not in (0, 1)")));
        }
        Ok(Self { formula, weights: Weights::Float { costs, probs } })
    }

    /// Unit costs and `p_i = 1/2`, exact mode.
    pub fn unit_uniform(formula: Formula) -> Self {
        let n = formula.n();
        Self { formula, weights: Weights::Exact { costs: vec![Rational::one(); n], probs: vec![ratio(1, 2); n] } }
    }

    pub fn n(&self) -> usize {
        self.formula.n()
    }

    pub fn mode(&self) -> Mode {
        match self.weights {
            Weights::Exact { .. } => Mode::Exact,
            Weights::Float { .. } => Mode::Float,
        }
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Same weights, different formula over the same variables.
    pub fn with_formula(&self, formula: Formula) -> Result<Self> {
        check_len("formula", formula.n(), self.n())?;
        Ok(Self { formula, weights: self.weights.clone() })
    }

    pub fn exact_weights(&self) -> Result<(&[Rational], &[Rational])> {
        match &self.weights {
            Weights::Exact { costs, probs } => Ok((costs, probs)),
            Weights::Float { .. } => Err(SbfeError::ModeMismatch { expected: Mode::Exact }),
        }
    }

    pub fn costs_f64(&self) -> Vec<f64> {
        match &self.weights {
            Weights::Exact { costs, .. } => costs.iter().map(to_f64).collect(),
            Weights::Float { costs, .. } => costs.clone(),
        }
    }

    pub fn probs_f64(&self) -> Vec<f64> {
        match &self.weights {
            Weights::Exact { probs, .. } => probs.iter().map(to_f64).collect(),
            Weights::Float { probs, .. } => probs.clone(),
        }
    }

    pub fn is_unit_cost(&self) -> bool {
        match &self.weights {
            Weights::Exact { costs, .. } => costs.iter().all(One::is_one),
            Weights::Float { costs, .. } => costs.iter().all(|&c| c == 1.0),
        }
    }

    pub fn is_uniform(&self) -> bool {
        match &self.weights {
            Weights::Exact { probs, .. } => probs.iter().all(|p| *p == ratio(1, 2)),
            Weights::Float { probs, .. } => probs.iter().all(|&p| p == 0.5),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceJson::from(self)).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: InstanceJson = serde_json::from_str(s).map_err(|e| SbfeError::Parse(format!("instance: {e}")))?;
        raw.try_into()
    }

    /// Hex SHA-256 of the canonical JSON, truncated to 16 characters.
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.to_json().as_bytes());
        hex::encode(h)[..16].to_string()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormulaJson {
    Constant { value: bool },
    Dnf { terms: Vec<Vec<Literal>> },
    Rotree { node: RoNode },
    Ttsp { node: TtspNode },
    TruthTable { bits_hex: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub mode: Mode,
    pub formula: FormulaJson,
    pub costs: Vec<JsonNumber>,
    pub probs: Vec<JsonNumber>,
}

impl From<&Formula> for FormulaJson {
    fn from(f: &Formula) -> Self {
        match f {
            Formula::Constant { value, .. } => FormulaJson::Constant { value: *value },
            Formula::Dnf(d) => FormulaJson::Dnf { terms: d.terms().to_vec() },
            Formula::Tree(t) => FormulaJson::Rotree { node: t.root().clone() },
            Formula::Ttsp(g) => FormulaJson::Ttsp { node: g.root().clone() },
            Formula::Table(t) => FormulaJson::TruthTable { bits_hex: t.to_hex() },
        }
    }
}

impl FormulaJson {
    pub fn into_formula(self, n: usize) -> Result<Formula> {
        Ok(match self {
            FormulaJson::Constant { value } => Formula::Constant { n, value },
            FormulaJson::Dnf { terms } => Formula::Dnf(DnfFormula::new(n, terms)?),
            FormulaJson::Rotree { node } => Formula::Tree(RoTree::new(n, node)?),
            FormulaJson::Ttsp { node } => Formula::Ttsp(TtspGraph::new(n, node)?),
            FormulaJson::TruthTable { bits_hex } => Formula::Table(TruthTable::from_hex(n, &bits_hex)?),
        })
    }
}

impl From<&Instance> for InstanceJson {
    fn from(inst: &Instance) -> Self {
        let (costs, probs) = match &inst.weights {
            Weights::Exact { costs, probs } => (
                costs.iter().map(|c| JsonNumber::Text(format_rational(c))).collect(),
                probs.iter().map(|p| JsonNumber::Text(format_rational(p))).collect(),
            ),
            Weights::Float { costs, probs } => (
                costs.iter().map(|&c| JsonNumber::Float(c)).collect(),
                probs.iter().map(|&p| JsonNumber::Float(p)).collect(),
            ),
        };
        InstanceJson { n: inst.n(), mode: inst.mode(), formula: (&inst.formula).into(), costs, probs }
    }
}

impl TryFrom<InstanceJson> for Instance {
    type Error = SbfeError;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        let formula = raw.formula.into_formula(raw.n)?;
        match raw.mode {
            Mode::Exact => {
                let exact = |v: Vec<JsonNumber>, what: &str| -> Result<Vec<Rational>> {
                    v.into_iter()
                        .map(|x| match x {
                            JsonNumber::Text(s) => parse_rational(&s),
                            JsonNumber::Float(_) => {
                                Err(SbfeError::Parse(format!("exact mode requires \"num/den\" strings in {what}")))
                            }
                        })
                        .collect()
                };
                Instance::exact(formula, exact(raw.costs, "costs")?, exact(raw.probs, "probs")?)
            }
            Mode::Float => {
                let float = |v: Vec<JsonNumber>| -> Result<Vec<f64>> {
                    v.into_iter()
                        .map(|x| match x {
                            JsonNumber::Float(f) => Ok(f),
                            JsonNumber::Text(s) => parse_rational(&s).map(|r| to_f64(&r)),
                        })
                        .collect()
                };
                Instance::float(formula, float(raw.costs)?, float(raw.probs)?)
            }
        }
    }
}
