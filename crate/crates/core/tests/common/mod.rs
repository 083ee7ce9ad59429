#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbfe_core::num::ratio;
use sbfe_core::{DnfFormula, Formula, Instance, Literal, Rational, RoNode, RoTree, TruthTable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn prob(rng: &mut ChaCha8Rng) -> Rational {
    let den = rng.random_range(2..=9);
    ratio(rng.random_range(1..den), den)
}

pub fn cost(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.random_range(1..=9), rng.random_range(1..=4))
}

pub fn with_random_weights(rng: &mut ChaCha8Rng, formula: Formula) -> Instance {
    let n = formula.n();
    let costs = (0..n).map(|_| cost(rng)).collect();
    let probs = (0..n).map(|_| prob(rng)).collect();
    Instance::exact(formula, costs, probs).unwrap()
}

pub fn unit_cost_random_probs(rng: &mut ChaCha8Rng, formula: Formula) -> Instance {
    let n = formula.n();
    let probs = (0..n).map(|_| prob(rng)).collect();
    Instance::exact(formula, vec![ratio(1, 1); n], probs).unwrap()
}

/// Random partition of `0..n` into terms, shuffled.
pub fn ro_terms(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<usize>> {
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    let mut terms = Vec::new();
    let mut rest = &vars[..];
    while !rest.is_empty() {
        let len = rng.random_range(1..=rest.len().min(4));
        terms.push(rest[..len].to_vec());
        rest = &rest[len..];
    }
    terms
}

pub fn ro_dnf(rng: &mut ChaCha8Rng, n: usize) -> Formula {
    DnfFormula::monotone(n, &ro_terms(rng, n)).unwrap().into()
}

/// `m` terms of width `w` over a shuffled variable order.
pub fn equal_width_dnf(rng: &mut ChaCha8Rng, m: usize, w: usize) -> Formula {
    let mut vars: Vec<usize> = (0..m * w).collect();
    vars.shuffle(rng);
    let terms: Vec<Vec<usize>> = vars.chunks(w).map(<[usize]>::to_vec).collect();
    DnfFormula::monotone(m * w, &terms).unwrap().into()
}

pub fn general_dnf(rng: &mut ChaCha8Rng, n: usize) -> Formula {
    let terms = (0..rng.random_range(1..=4))
        .map(|_| {
            let mut vars: Vec<usize> = (0..n).collect();
            vars.shuffle(rng);
            let len = rng.random_range(1..=n.min(3));
            vars[..len].iter().map(|&v| Literal { var: v, negated: rng.random_bool(0.3) }).collect()
        })
        .collect();
    DnfFormula::new(n, terms).unwrap().into()
}

fn ro_node(rng: &mut ChaCha8Rng, vars: &[usize], and: bool) -> RoNode {
    if vars.len() == 1 {
        return RoNode::Leaf(vars[0]);
    }
    let parts = rng.random_range(2..=vars.len().min(3));
    let mut cuts: Vec<usize> = (1..vars.len()).collect();
    cuts.shuffle(rng);
    let mut cuts = cuts[..parts - 1].to_vec();
    cuts.sort_unstable();
    let mut children = Vec::new();
    let mut start = 0;
    for end in cuts.into_iter().chain([vars.len()]) {
        children.push(ro_node(rng, &vars[start..end], !and));
        start = end;
    }
    if and {
        RoNode::And(children)
    } else {
        RoNode::Or(children)
    }
}

pub fn ro_tree(rng: &mut ChaCha8Rng, n: usize) -> Formula {
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    let and = rng.random_bool(0.5);
    RoTree::new(n, ro_node(rng, &vars, and)).unwrap().into()
}

pub fn truth_table(rng: &mut ChaCha8Rng, n: usize) -> Formula {
    let bits: Vec<bool> = (0..1usize << n).map(|_| rng.random_bool(0.5)).collect();
    TruthTable::from_bits(&bits).unwrap().into()
}

/// Any of the formula kinds.
pub fn any_formula(rng: &mut ChaCha8Rng, n: usize) -> Formula {
    match rng.random_range(0..4) {
        0 => ro_dnf(rng, n),
        1 => general_dnf(rng, n),
        2 => ro_tree(rng, n),
        _ => truth_table(rng, n),
    }
}

pub fn or_formula(n: usize) -> Formula {
    let terms: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    DnfFormula::monotone(n, &terms).unwrap().into()
}

/// Every set partition of `0..n`, as read-once DNFs.
pub fn all_ro_dnfs(n: usize) -> Vec<Formula> {
    fn go(v: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if v == n {
            out.push(blocks.clone());
            return;
        }
        for i in 0..blocks.len() {
            blocks[i].push(v);
            go(v + 1, n, blocks, out);
            blocks[i].pop();
        }
        blocks.push(vec![v]);
        go(v + 1, n, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), &mut out);
    out.into_iter().map(|t| DnfFormula::monotone(n, &t).unwrap().into()).collect()
}

/// Random decision tree that stops exactly when `f` is determined.
pub fn random_tree(rng: &mut ChaCha8Rng, instance: &Instance) -> sbfe_core::AdaptiveTree {
    use sbfe_core::{PartialAssignment, TreeNode};
    fn go(rng: &mut ChaCha8Rng, f: &Formula, pa: PartialAssignment) -> TreeNode {
        if f.is_determined(&pa).is_determined() {
            return TreeNode::Stop;
        }
        let free: Vec<usize> = (0..f.n()).filter(|&v| !pa.is_tested(v)).collect();
        let v = free[rng.random_range(0..free.len())];
        let lo = go(rng, f, pa.with(v, false));
        let hi = go(rng, f, pa.with(v, true));
        TreeNode::test(v, lo, hi)
    }
    let root = go(rng, instance.formula(), PartialAssignment::empty());
    sbfe_core::AdaptiveTree::new(instance.n(), root).unwrap()
}

pub fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> sbfe_core::NonAdaptiveStrategy {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    sbfe_core::NonAdaptiveStrategy::new(n, order).unwrap()
}
