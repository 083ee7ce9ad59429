//! Constructors for the lower-bound instance families.
//!
//! Variables are numbered term by term, left to right. Tree edges are
//! numbered in preorder: the edge into a node comes before the edges of its
//! left subtree, which come before those of its right subtree.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbfeError};
use crate::formula::{check_var_count, DnfFormula, Literal, Mask, RoNode, RoTree, MAX_VARS};
use crate::instance::Instance;
use crate::num::{format_rational, int, parse_rational, ratio, Rational};

fn too_big(n: u128) -> SbfeError {
    SbfeError::SizeExceeded { what: "generated instance", n: n.min(usize::MAX as u128) as usize, cap: MAX_VARS }
}

/// `k` terms of width `w` over disjoint variables; unit costs, `p = 1/2`.
pub fn gen_tribes(k: usize, w: usize) -> Result<Instance> {
    if k == 0 || w == 0 {
        return Err(SbfeError::ParameterError("tribes needs k, w >= 1".into()));
    }
    let n = k.checked_mul(w).filter(|&n| n <= MAX_VARS).ok_or_else(|| too_big((k as u128) * (w as u128)))?;
    let terms: Vec<Vec<usize>> = (0..k).map(|j| (j * w..(j + 1) * w).collect()).collect();
    Ok(Instance::unit_uniform(DnfFormula::monotone(n, &terms)?.into()))
}

/// `m` terms of width `l`; in each term the first variable has `p = 1/l`
/// and the rest `p = (l/m)^(1/(l-1))`, so every term is true with
/// probability `1/m`. Unit costs; float mode.
pub fn gen_ucap(m: usize, l: usize) -> Result<Instance> {
    if m < 2 || l < 2 {
        return Err(SbfeError::ParameterError("ucap needs m >= 2 and l >= 2".into()));
    }
    if l >= m {
        return Err(SbfeError::ParameterError(format!(
            "ucap needs l < m so that (l/m)^(1/(l-1)) < 1, got m = {m}, l = {l}"
        )));
    }
    let n = (m as u128) * (l as u128);
    if n > MAX_VARS as u128 {
        return Err(too_big(n));
    }
    let n = n as usize;
    let terms: Vec<Vec<usize>> = (0..m).map(|j| (j * l..(j + 1) * l).collect()).collect();
    let rest = (l as f64 / m as f64).powf(1.0 / (l as f64 - 1.0));
    let probs = (0..n).map(|i| if i % l == 0 { 1.0 / l as f64 } else { rest }).collect();
    Instance::float(DnfFormula::monotone(n, &terms)?.into(), vec![1.0; n], probs)
}

/// `2^l` terms of width `l`, the `i`-th variable of each term costing
/// `2^(i-1)`; `p = 1/2`, exact.
pub fn gen_geometric_cost(l: usize) -> Result<Instance> {
    if l == 0 {
        return Err(SbfeError::ParameterError("geometric cost needs l >= 1".into()));
    }
    if l >= 64 {
        return Err(too_big(u128::MAX));
    }
    let m = 1usize << l;
    let n = (m as u128) * (l as u128);
    if n > MAX_VARS as u128 {
        return Err(too_big(n));
    }
    let n = n as usize;
    let terms: Vec<Vec<usize>> = (0..m).map(|j| (j * l..(j + 1) * l).collect()).collect();
    let costs = (0..n).map(|i| int(1 << (i % l))).collect();
    Instance::exact(DnfFormula::monotone(n, &terms)?.into(), costs, vec![ratio(1, 2); n])
}

/// Leaf/internal split and root-to-leaf paths of a binary-tree instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeInstanceMeta {
    pub depth: usize,
    pub epsilon: Rational,
    pub leaf_mask: Mask,
    pub internal_mask: Mask,
    /// Edge variables on the path to each leaf, leaves left to right.
    pub leaf_paths: Vec<Vec<usize>>,
}

impl TreeInstanceMeta {
    pub fn leaf_edges(&self) -> Vec<usize> {
        self.leaf_paths.iter().map(|p| *p.last().expect("non-empty path")).collect()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf_paths.len()
    }

    /// Bitmask over leaves (left to right) of those alive under `x`.
    pub fn alive_leaves(&self, x: Mask) -> u64 {
        self.leaf_paths
            .iter()
            .enumerate()
            .filter(|(_, path)| path.iter().all(|&e| x >> e & 1 == 1))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&TreeMetaJson::from(self)).expect("meta serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: TreeMetaJson = serde_json::from_str(s).map_err(|e| SbfeError::Parse(format!("tree meta: {e}")))?;
        let mask = |v: &[usize]| v.iter().fold(0 as Mask, |m, &e| m | 1 << e);
        Ok(Self {
            depth: raw.depth,
            epsilon: parse_rational(&raw.epsilon)?,
            leaf_mask: mask(&raw.leaf_edges),
            internal_mask: mask(&raw.internal_edges),
            leaf_paths: raw.leaf_paths,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TreeMetaJson {
    depth: usize,
    epsilon: String,
    leaf_edges: Vec<usize>,
    internal_edges: Vec<usize>,
    leaf_paths: Vec<Vec<usize>>,
}

impl From<&TreeInstanceMeta> for TreeMetaJson {
    fn from(m: &TreeInstanceMeta) -> Self {
        let bits = |mask: Mask| (0..128).filter(|i| mask >> i & 1 == 1).collect();
        TreeMetaJson {
            depth: m.depth,
            epsilon: format_rational(&m.epsilon),
            leaf_edges: bits(m.leaf_mask),
            internal_edges: bits(m.internal_mask),
            leaf_paths: m.leaf_paths.clone(),
        }
    }
}

struct TreeBuilder {
    depth: usize,
    next: usize,
    path: Vec<usize>,
    paths: Vec<Vec<usize>>,
    leaf_mask: Mask,
}

impl TreeBuilder {
    /// Formula for the edge into a node at `level` (1 = child of the root).
    fn edge(&mut self, level: usize) -> RoNode {
        let e = self.next;
        self.next += 1;
        self.path.push(e);
        let node = if level == self.depth {
            self.leaf_mask |= 1 << e;
            self.paths.push(self.path.clone());
            RoNode::Leaf(e)
        } else {
            let left = self.edge(level + 1);
            let right = self.edge(level + 1);
            RoNode::And(vec![RoNode::Leaf(e), RoNode::Or(vec![left, right])])
        };
        self.path.pop();
        node
    }
}

/// Complete binary tree of depth `d` whose `n = 2^(d+1) - 2` edges are the
/// variables; `f = 1` iff some leaf is reachable from the root through true
/// edges. Unit costs, `p_i = (1 + eps)/2`.
pub fn gen_binary_tree(d: usize, eps: &Rational) -> Result<(Instance, TreeInstanceMeta)> {
    if d == 0 {
        return Err(SbfeError::ParameterError("binary tree needs d >= 1".into()));
    }
    if *eps <= int(0) || *eps > ratio(1, 2) {
        return Err(SbfeError::ParameterError("binary tree needs 0 < eps <= 1/2".into()));
    }
    if d >= 64 {
        return Err(too_big(u128::MAX));
    }
    let n = (2u128 << d) - 2;
    if n > MAX_VARS as u128 {
        return Err(too_big(n));
    }
    let n = n as usize;
    check_var_count(n)?;
    let mut b = TreeBuilder { depth: d, next: 0, path: Vec::new(), paths: Vec::new(), leaf_mask: 0 };
    let left = b.edge(1);
    let right = b.edge(1);
    let tree = RoTree::new(n, RoNode::Or(vec![left, right]))?;
    let p = (Rational::one() + eps) / int(2);
    let inst = Instance::exact(tree.into(), vec![Rational::one(); n], vec![p; n])?;
    let full = crate::formula::full_mask(n);
    let meta = TreeInstanceMeta {
        depth: d,
        epsilon: eps.clone(),
        leaf_mask: b.leaf_mask,
        internal_mask: full & !b.leaf_mask,
        leaf_paths: b.paths,
    };
    Ok((inst, meta))
}

/// Address function: `d` shared bits `a` (variables `0..d`) and dedicated
/// `y_i` (variable `d + i`); term `i` is `y_i` and the address literals
/// spelling `i` in binary, `a_b` negated where bit `b` of `i` is 0.
/// Dedicated tests cost 1, shared ones `shared_cost`; `p = 1/2`.
pub fn gen_address(d: usize, shared_cost: &Rational) -> Result<Instance> {
    if d == 0 {
        return Err(SbfeError::ParameterError("address function needs d >= 1".into()));
    }
    if *shared_cost <= int(0) {
        return Err(SbfeError::ParameterError("shared cost must be positive".into()));
    }
    if d >= 64 {
        return Err(too_big(u128::MAX));
    }
    let n = (1u128 << d) + d as u128;
    if n > MAX_VARS as u128 {
        return Err(too_big(n));
    }
    let n = n as usize;
    let terms = (0..1usize << d)
        .map(|i| {
            let mut t: Vec<Literal> = (0..d).map(|b| Literal { var: b, negated: i >> b & 1 == 0 }).collect();
            t.push(Literal::pos(d + i));
            t
        })
        .collect();
    let costs = (0..n).map(|v| if v < d { shared_cost.clone() } else { Rational::one() }).collect();
    Instance::exact(DnfFormula::new(n, terms)?.into(), costs, vec![ratio(1, 2); n])
}
