use serde::{Deserialize, Serialize};

use super::{check_var_count, Formula, Mask, PartialAssignment};
use crate::error::{Result, SbfeError};

/// Node of a read-once AND/OR tree with positive leaves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoNode {
    Leaf(usize),
    And(Vec<RoNode>),
    Or(Vec<RoNode>),
}

/// A read-once formula: every variable labels at most one leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoTree {
    n: usize,
    root: RoNode,
}

fn validate_children<T>(children: &[T], what: &str) -> Result<()> {
    if children.len() < 2 {
        return Err(SbfeError::InvalidFormula(format!("{what} node needs at least two children")));
    }
    Ok(())
}

fn claim(var: usize, n: usize, seen: &mut Mask) -> Result<()> {
    if var >= n {
        return Err(SbfeError::InvalidFormula(format!("variable {var} out of range for n = {n}")));
    }
    if *seen >> var & 1 == 1 {
        return Err(SbfeError::InvalidFormula(format!("variable {var} appears twice")));
    }
    *seen |= 1 << var;
    Ok(())
}

impl RoNode {
    fn validate(&self, n: usize, seen: &mut Mask) -> Result<()> {
        match self {
            RoNode::Leaf(v) => claim(*v, n, seen),
            RoNode::And(ch) | RoNode::Or(ch) => {
                validate_children(ch, "and/or")?;
                ch.iter().try_for_each(|c| c.validate(n, seen))
            }
        }
    }

    pub fn eval(&self, x: Mask) -> bool {
        match self {
            RoNode::Leaf(v) => x >> v & 1 == 1,
            RoNode::And(ch) => ch.iter().all(|c| c.eval(x)),
            RoNode::Or(ch) => ch.iter().any(|c| c.eval(x)),
        }
    }

    /// Three-valued evaluation; exact for read-once formulas since no
    /// variable is shared between subtrees.
    pub fn kleene(&self, pa: &PartialAssignment) -> Option<bool> {
        match self {
            RoNode::Leaf(v) => pa.value(*v),
            RoNode::And(ch) => {
                let mut all = true;
                for c in ch {
                    match c.kleene(pa) {
                        Some(false) => return Some(false),
                        Some(true) => {}
                        None => all = false,
                    }
                }
                all.then_some(true)
            }
            RoNode::Or(ch) => {
                let mut none = true;
                for c in ch {
                    match c.kleene(pa) {
                        Some(true) => return Some(true),
                        Some(false) => {}
                        None => none = false,
                    }
                }
                none.then_some(false)
            }
        }
    }

    fn restrict(&self, var: usize, value: bool) -> std::result::Result<RoNode, bool> {
        match self {
            RoNode::Leaf(v) if *v == var => Err(value),
            RoNode::Leaf(_) => Ok(self.clone()),
            RoNode::And(ch) => collapse(ch, var, value, false).map(RoNode::And),
            RoNode::Or(ch) => collapse(ch, var, value, true).map(RoNode::Or),
        }
        .map(|node| match node {
            RoNode::And(mut ch) | RoNode::Or(mut ch) if ch.len() == 1 => ch.pop().unwrap(),
            other => other,
        })
    }

    /// Collects the variables on leaves, in preorder.
    pub fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            RoNode::Leaf(v) => out.push(*v),
            RoNode::And(ch) | RoNode::Or(ch) => ch.iter().for_each(|c| c.leaves(out)),
        }
    }
}

/// Restricts children of a gate whose absorbing constant is `absorbing`
/// (`false` for AND, `true` for OR). `Err(c)` means the gate became constant `c`.
fn collapse(ch: &[RoNode], var: usize, value: bool, absorbing: bool) -> std::result::Result<Vec<RoNode>, bool> {
    let mut kept = Vec::with_capacity(ch.len());
    for c in ch {
        match c.restrict(var, value) {
            Err(k) if k == absorbing => return Err(absorbing),
            Err(_) => {}
            Ok(node) => kept.push(node),
        }
    }
    if kept.is_empty() {
        Err(!absorbing)
    } else {
        Ok(kept)
    }
}

impl RoTree {
    pub fn new(n: usize, root: RoNode) -> Result<Self> {
        check_var_count(n)?;
        root.validate(n, &mut 0)?;
        Ok(Self { n, root })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> &RoNode {
        &self.root
    }

    pub fn eval(&self, x: Mask) -> bool {
        self.root.eval(x)
    }

    pub fn kleene(&self, pa: &PartialAssignment) -> Option<bool> {
        self.root.kleene(pa)
    }

    pub fn restrict(&self, var: usize, value: bool) -> Formula {
        match self.root.restrict(var, value) {
            Ok(root) => Formula::Tree(RoTree { n: self.n, root }),
            Err(c) => Formula::Constant { n: self.n, value: c },
        }
    }
}

/// Node of a two-terminal series-parallel multigraph; each edge carries a variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TtspNode {
    Edge(usize),
    Series(Vec<TtspNode>),
    Parallel(Vec<TtspNode>),
}

impl TtspNode {
    fn validate(&self, n: usize, seen: &mut Mask) -> Result<()> {
        match self {
            TtspNode::Edge(v) => claim(*v, n, seen),
            TtspNode::Series(ch) | TtspNode::Parallel(ch) => {
                validate_children(ch, "series/parallel")?;
                ch.iter().try_for_each(|c| c.validate(n, seen))
            }
        }
    }

    fn to_ro(&self) -> RoNode {
        match self {
            TtspNode::Edge(v) => RoNode::Leaf(*v),
            TtspNode::Series(ch) => RoNode::And(ch.iter().map(TtspNode::to_ro).collect()),
            TtspNode::Parallel(ch) => RoNode::Or(ch.iter().map(TtspNode::to_ro).collect()),
        }
    }
}

/// s–t connectivity of a series-parallel graph whose edges are usable iff
/// their variable is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TtspGraph {
    n: usize,
    root: TtspNode,
    tree: RoNode,
}

impl TtspGraph {
    /// Every variable in `[0, n)` must label exactly one edge.
    pub fn new(n: usize, root: TtspNode) -> Result<Self> {
        check_var_count(n)?;
        let mut seen = 0;
        root.validate(n, &mut seen)?;
        if seen != super::full_mask(n) {
            return Err(SbfeError::InvalidFormula("some variable labels no edge".into()));
        }
        let tree = root.to_ro();
        Ok(Self { n, root, tree })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> &TtspNode {
        &self.root
    }

    /// Series composition becomes AND, parallel becomes OR, edges become leaves.
    pub fn to_formula(&self) -> RoTree {
        RoTree { n: self.n, root: self.tree.clone() }
    }

    pub fn eval(&self, x: Mask) -> bool {
        self.tree.eval(x)
    }

    pub fn kleene(&self, pa: &PartialAssignment) -> Option<bool> {
        self.tree.kleene(pa)
    }
}
