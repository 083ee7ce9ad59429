//! Exact optimal strategies for small instances.
//!
//! `opt_adaptive` memoizes `V(g) = min_i c_i + p_i V(g|x_i=1) + (1-p_i) V(g|x_i=0)`
//! over restrictions `g`, keyed by the truth table of `g` projected onto the
//! variables it still depends on. `opt_nonadaptive` runs the subset recursion
//! `best(T) = min_{i∉T} U(T)·c_i + best(T∪{i})` where `U(T)` is the
//! probability that observing `x` on `T` leaves `f` undetermined. The brute
//! force routines enumerate strategies outright and exist only to certify
//! the two recursions.
//!
//! Ties in every argmin go to the lowest variable index.

use std::collections::HashMap;
use std::ops::{AddAssign, Mul};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Result, SbfeError};
use crate::formula::{full_mask, Mask, PartialAssignment, TruthTable};
use crate::instance::Instance;
use crate::num::{complement, Rational};
use crate::strategy::{
    expected_cost_by_enumeration, AdaptiveTree, InputWeights, NonAdaptiveStrategy, Strategy, TreeNode,
};

pub const ADAPTIVE_CAP: usize = 20;
pub const NONADAPTIVE_CAP: usize = 16;
pub const BRUTE_NONADAPTIVE_CAP: usize = 8;
pub const BRUTE_ADAPTIVE_CAP: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Tree(AdaptiveTree),
    Perm(NonAdaptiveStrategy),
}

/// An optimal value with a strategy attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub value: Rational,
    pub witness: Witness,
}

impl SolveResult {
    pub fn strategy(&self) -> Strategy {
        match &self.witness {
            Witness::Tree(t) => t.clone().into(),
            Witness::Perm(p) => p.clone().into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteKind {
    Adaptive,
    NonAdaptive,
}

fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(SbfeError::SizeExceeded { what, n, cap });
    }
    Ok(())
}

// Bits whose index has bit j clear, within one 64-bit word.
const LOW_HALF: [u64; 7] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// Packs the bits of `w` whose index has bit `j` clear into the low 32 bits.
fn compress(mut w: u64, j: usize) -> u64 {
    w &= LOW_HALF[j];
    for t in j..6 {
        w = (w | w >> (1 << t)) & LOW_HALF[t + 1];
    }
    w
}

/// A restricted function projected onto the variables it depends on.
///
/// Entry `idx` of the table is the value when original variable `vars[j]`
/// equals bit `j` of `idx`. Two keys are equal iff they denote the same
/// function of the same original variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RestrictionKey {
    vars: Vec<u8>,
    words: Vec<u64>,
}

impl RestrictionKey {
    pub fn from_table(t: &TruthTable) -> Self {
        let n = t.n();
        let mut words = vec![0u64; (1usize << n).div_ceil(64)];
        for x in 0..1usize << n {
            if t.get(x) {
                words[x / 64] |= 1 << (x % 64);
            }
        }
        RestrictionKey { vars: (0..n as u8).collect(), words }.reduced()
    }

    pub fn vars(&self) -> &[u8] {
        &self.vars
    }

    /// `Some(v)` when no variable remains.
    pub fn constant(&self) -> Option<bool> {
        self.vars.is_empty().then(|| self.words[0] & 1 == 1)
    }

    fn depends_on(&self, j: usize) -> bool {
        if j < 6 {
            let shift = 1 << j;
            self.words.iter().any(|&w| (w ^ (w >> shift)) & LOW_HALF[j] != 0)
        } else {
            let block = 1 << (j - 6);
            self.words.chunks(2 * block).any(|c| c[..block] != c[block..])
        }
    }

    /// Fixes local variable `j` without re-reducing.
    fn cofactor_raw(&self, j: usize, value: bool) -> Self {
        let k = self.vars.len();
        let mut vars = self.vars.clone();
        vars.remove(j);
        let words = if j >= 6 {
            let block = 1 << (j - 6);
            let off = if value { block } else { 0 };
            self.words.chunks(2 * block).flat_map(|c| c[off..off + block].iter().copied()).collect()
        } else {
            let shift = if value { 1 << j } else { 0 };
            let half: Vec<u64> = self.words.iter().map(|&w| compress(w >> shift, j)).collect();
            if k <= 6 {
                half
            } else {
                half.chunks(2).map(|c| c[0] | c[1] << 32).collect()
            }
        };
        RestrictionKey { vars, words }
    }

    fn reduced(mut self) -> Self {
        for j in (0..self.vars.len()).rev() {
            if !self.depends_on(j) {
                self = self.cofactor_raw(j, false);
            }
        }
        self
    }

    pub fn cofactor(&self, j: usize, value: bool) -> Self {
        self.cofactor_raw(j, value).reduced()
    }
}

struct AdaptiveSolver<'a> {
    costs: &'a [Rational],
    probs: &'a [Rational],
    memo: HashMap<RestrictionKey, (Rational, u8)>,
}

impl AdaptiveSolver<'_> {
    fn value(&mut self, key: &RestrictionKey) -> Rational {
        if key.constant().is_some() {
            return Rational::zero();
        }
        if let Some((v, _)) = self.memo.get(key) {
            return v.clone();
        }
        let mut best: Option<(Rational, u8)> = None;
        for j in 0..key.vars.len() {
            let var = key.vars[j] as usize;
            let on_true = self.value(&key.cofactor(j, true));
            let on_false = self.value(&key.cofactor(j, false));
            let p = &self.probs[var];
            let cand = &self.costs[var] + p * on_true + complement(p) * on_false;
            if best.as_ref().is_none_or(|(b, _)| cand < *b) {
                best = Some((cand, var as u8));
            }
        }
        let best = best.expect("non-constant key has a variable");
        self.memo.insert(key.clone(), best.clone());
        best.0
    }

    fn tree(&self, key: &RestrictionKey) -> TreeNode {
        if key.constant().is_some() {
            return TreeNode::Stop;
        }
        let var = self.memo[key].1;
        let j = key.vars.iter().position(|&v| v == var).expect("memoized variable is present");
        TreeNode::test(var as usize, self.tree(&key.cofactor(j, false)), self.tree(&key.cofactor(j, true)))
    }
}

pub fn opt_adaptive(instance: &Instance) -> Result<SolveResult> {
    opt_adaptive_with_cap(instance, ADAPTIVE_CAP)
}

/// Minimum expected cost over all adaptive strategies, with an optimal tree.
pub fn opt_adaptive_with_cap(instance: &Instance, cap: usize) -> Result<SolveResult> {
    let (costs, probs) = instance.exact_weights()?;
    let n = instance.n();
    check_cap("adaptive solver", n, cap)?;
    let table = instance.formula().to_truth_table(cap)?;
    let root = RestrictionKey::from_table(&table);
    let mut solver = AdaptiveSolver { costs, probs, memo: HashMap::new() };
    let value = solver.value(&root);
    let tree = AdaptiveTree::new(n, solver.tree(&root))?;
    Ok(SolveResult { value, witness: Witness::Tree(tree) })
}

const MIXED: u8 = 2;

/// Classifies every subcube: entry `Σ d_i 3^i` (digit 2 = free) is 0 or 1 if
/// `f` is constant there, [`MIXED`] otherwise.
fn subcube_classes(table: &TruthTable) -> Vec<u8> {
    let n = table.n();
    let size = 3usize.pow(n as u32);
    let mut cls = vec![0u8; size];
    let mut digits = vec![0u8; n];
    for s in 0..size {
        if s > 0 {
            // base-3 increment
            for d in digits.iter_mut() {
                if *d == 2 {
                    *d = 0;
                } else {
                    *d += 1;
                    break;
                }
            }
        }
        match digits.iter().position(|&d| d == 2) {
            Some(i) => {
                let p = 3usize.pow(i as u32);
                let (a, b) = (cls[s - 2 * p], cls[s - p]);
                cls[s] = if a == b { a } else { MIXED };
            }
            None => {
                let x = digits.iter().enumerate().fold(0usize, |x, (i, &d)| x | (d as usize) << i);
                cls[s] = table.get(x) as u8;
            }
        }
    }
    cls
}

/// Numerators of `U(T)` over the denominator `Π den(p_i)`, for every `T`.
/// `pf`, `pt` and `den` hold `den - num`, `num` and `den` of each `p_i`.
fn undetermined_masses<W>(n: usize, cls: &[u8], pf: &[W], pt: &[W], den: &[W]) -> Vec<W>
where
    W: Clone + Zero + One + for<'a> AddAssign<&'a W> + for<'a> Mul<&'a W, Output = W>,
{
    let pow3: Vec<usize> = (0..n).map(|i| 3usize.pow(i as u32)).collect();
    let mut out = Vec::with_capacity(1 << n);
    let mut vars = Vec::with_capacity(n);
    let mut free_suffix = vec![0usize; n + 1];
    for t in 0..1usize << n {
        vars.clear();
        vars.extend((0..n).filter(|i| t >> i & 1 == 1));
        let untested: usize = (0..n).filter(|i| t >> i & 1 == 0).map(|i| 2 * pow3[i]).sum();
        let scale = (0..n).filter(|i| t >> i & 1 == 0).fold(W::one(), |acc, i| acc * &den[i]);
        free_suffix[vars.len()] = 0;
        for d in (0..vars.len()).rev() {
            free_suffix[d] = free_suffix[d + 1] + 2 * pow3[vars[d]];
        }
        let mut acc = W::zero();
        // (depth, index over the digits fixed so far, weight); a branch is
        // dropped as soon as its partially fixed subcube is constant.
        let mut stack = vec![(0usize, untested, scale)];
        while let Some((depth, idx, weight)) = stack.pop() {
            if cls[idx + free_suffix[depth]] != MIXED {
                continue;
            }
            if depth == vars.len() {
                acc += &weight;
                continue;
            }
            let v = vars[depth];
            stack.push((depth + 1, idx, weight.clone() * &pf[v]));
            stack.push((depth + 1, idx + pow3[v], weight * &pt[v]));
        }
        out.push(acc);
    }
    out
}

/// `U(T)` for every `T`, as numerators over a shared denominator.
struct UTable {
    numer: Vec<BigUint>,
    denom: BigUint,
}

fn undetermined_table(instance: &Instance, cap: usize) -> Result<UTable> {
    let (_, probs) = instance.exact_weights()?;
    let n = instance.n();
    check_cap("non-adaptive solver", n, cap)?;
    let table = instance.formula().to_truth_table(cap)?;
    let cls = subcube_classes(&table);
    let split = |p: &Rational| {
        let num = p.numer().to_biguint().expect("positive");
        let den = p.denom().to_biguint().expect("positive");
        (&den - &num, num, den)
    };
    let parts: Vec<(BigUint, BigUint, BigUint)> = probs.iter().map(split).collect();
    let denom = parts.iter().fold(BigUint::one(), |acc, (_, _, d)| acc * d);
    let pf: Vec<BigUint> = parts.iter().map(|(q, _, _)| q.clone()).collect();
    let pt: Vec<BigUint> = parts.iter().map(|(_, p, _)| p.clone()).collect();
    let den: Vec<BigUint> = parts.iter().map(|(_, _, d)| d.clone()).collect();
    let numer: Vec<BigUint> = if denom.bits() <= 64 {
        let small = |v: &[BigUint]| -> Vec<u128> { v.iter().map(|x| x.to_u128().unwrap()).collect() };
        undetermined_masses(n, &cls, &small(&pf), &small(&pt), &small(&den)).into_iter().map(BigUint::from).collect()
    } else {
        undetermined_masses(n, &cls, &pf, &pt, &den)
    };
    Ok(UTable { numer, denom })
}

/// `Pr_x[f is not determined by x restricted to T]`, by direct enumeration
/// of the `2^|T|` observation patterns.
pub fn undetermined_prob(instance: &Instance, tested: Mask) -> Result<Rational> {
    let (_, probs) = instance.exact_weights()?;
    let n = instance.n();
    check_cap("undetermined_prob", n, crate::formula::TABLE_CAP)?;
    let tested = tested & full_mask(n);
    let mut total = Rational::zero();
    for values in crate::formula::submasks(tested) {
        let pa = PartialAssignment::observe(tested, values);
        if !instance.formula().is_determined(&pa).is_determined() {
            let w: Rational = (0..n)
                .filter(|i| tested >> i & 1 == 1)
                .map(|i| if values >> i & 1 == 1 { probs[i].clone() } else { complement(&probs[i]) })
                .product();
            total += w;
        }
    }
    Ok(total)
}

/// All `U(T)` values through the subcube-class table (same numbers as
/// [`undetermined_prob`], computed in `O(3^n)`).
pub fn undetermined_probs_all(instance: &Instance) -> Result<Vec<Rational>> {
    let u = undetermined_table(instance, NONADAPTIVE_CAP)?;
    let d = BigInt::from(u.denom);
    Ok(u.numer.into_iter().map(|x| Rational::new(BigInt::from(x), d.clone())).collect())
}

fn scaled_costs(costs: &[Rational]) -> (Vec<BigUint>, BigUint) {
    let lcm = costs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled = costs.iter().map(|c| (c.numer() * (&lcm / c.denom())).to_biguint().expect("positive cost")).collect();
    (scaled, lcm.to_biguint().expect("positive"))
}

pub fn opt_nonadaptive(instance: &Instance) -> Result<SolveResult> {
    opt_nonadaptive_with_cap(instance, NONADAPTIVE_CAP)
}

/// Minimum expected cost over all test permutations, with an optimal one.
pub fn opt_nonadaptive_with_cap(instance: &Instance, cap: usize) -> Result<SolveResult> {
    let (costs, _) = instance.exact_weights()?;
    let n = instance.n();
    let u = undetermined_table(instance, cap)?;
    let (ce, cost_denom) = scaled_costs(costs);
    let full = (1usize << n) - 1;
    let mut best = vec![BigUint::zero(); 1 << n];
    let mut arg = vec![u8::MAX; 1 << n];
    for t in (0..full).rev() {
        if u.numer[t].is_zero() {
            continue;
        }
        let mut choice: Option<(BigUint, u8)> = None;
        for i in (0..n).filter(|i| t >> i & 1 == 0) {
            let cand = &u.numer[t] * &ce[i] + &best[t | 1 << i];
            if choice.as_ref().is_none_or(|(b, _)| cand < *b) {
                choice = Some((cand, i as u8));
            }
        }
        let (b, i) = choice.expect("t is not full");
        best[t] = b;
        arg[t] = i;
    }
    let mut order = Vec::with_capacity(n);
    let mut t = 0usize;
    while t != full && !u.numer[t].is_zero() {
        let i = arg[t] as usize;
        order.push(i);
        t |= 1 << i;
    }
    order.extend((0..n).filter(|i| t >> i & 1 == 0));
    let value = Rational::new(BigInt::from(std::mem::take(&mut best[0])), BigInt::from(u.denom * cost_denom));
    Ok(SolveResult { value, witness: Witness::Perm(NonAdaptiveStrategy::new(n, order)?) })
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exhaustive minimum over strategies; an oracle for the dynamic programs.
pub fn brute_force_opt(instance: &Instance, kind: BruteKind) -> Result<SolveResult> {
    match kind {
        BruteKind::NonAdaptive => brute_nonadaptive(instance),
        BruteKind::Adaptive => brute_adaptive(instance),
    }
}

fn stop_masses<W>(n: usize, det: &[bool], perm: &[usize], weights: &[W]) -> Vec<W>
where
    W: Clone + Zero + for<'a> AddAssign<&'a W>,
{
    let mut mass = vec![W::zero(); n + 1];
    for (x, w) in weights.iter().enumerate() {
        let row = &det[x << n..(x + 1) << n];
        let mut t = 0usize;
        let mut k = 0;
        while !row[t] {
            t |= 1 << perm[k];
            k += 1;
        }
        mass[k] += w;
    }
    mass
}

fn brute_nonadaptive(instance: &Instance) -> Result<SolveResult> {
    let (costs, probs) = instance.exact_weights()?;
    let n = instance.n();
    check_cap("brute-force non-adaptive", n, BRUTE_NONADAPTIVE_CAP)?;
    let f = instance.formula();
    let mut det = vec![false; 1 << (2 * n)];
    for x in 0..1usize << n {
        for t in 0..1usize << n {
            det[x << n | t] = f.is_determined(&PartialAssignment::observe(t as Mask, x as Mask)).is_determined();
        }
    }
    let iw = InputWeights::new(probs);
    let weights: Vec<BigUint> = (0..1usize << n).map(|x| iw.weight(x)).collect();
    let small: Option<Vec<u128>> =
        if iw.denom.bits() <= 64 { Some(weights.iter().map(|w| w.to_u128().unwrap()).collect()) } else { None };
    let (ce, cost_denom) = scaled_costs(costs);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(BigUint, Vec<usize>)> = None;
    loop {
        let mass: Vec<BigUint> = match &small {
            Some(w) => stop_masses(n, &det, &perm, w).into_iter().map(BigUint::from).collect(),
            None => stop_masses(n, &det, &perm, &weights),
        };
        let mut prefix = BigUint::zero();
        let mut total = BigUint::zero();
        for (k, m) in mass.iter().enumerate() {
            if k > 0 {
                prefix += &ce[perm[k - 1]];
            }
            total += m * &prefix;
        }
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (total, order) = best.expect("at least one permutation");
    let value = Rational::new(BigInt::from(total), BigInt::from(iw.denom * cost_denom));
    Ok(SolveResult { value, witness: Witness::Perm(NonAdaptiveStrategy::new(n, order)?) })
}

/// Every decision tree that stops exactly when `f` is determined.
fn all_trees(instance: &Instance, pa: PartialAssignment) -> Vec<TreeNode> {
    if instance.formula().is_determined(&pa).is_determined() {
        return vec![TreeNode::Stop];
    }
    let mut out = Vec::new();
    for v in (0..instance.n()).filter(|&v| !pa.is_tested(v)) {
        let lows = all_trees(instance, pa.with(v, false));
        let highs = all_trees(instance, pa.with(v, true));
        for a in &lows {
            for b in &highs {
                out.push(TreeNode::test(v, a.clone(), b.clone()));
            }
        }
    }
    out
}

fn brute_adaptive(instance: &Instance) -> Result<SolveResult> {
    instance.exact_weights()?;
    let n = instance.n();
    check_cap("brute-force adaptive", n, BRUTE_ADAPTIVE_CAP)?;
    let mut best: Option<(Rational, AdaptiveTree)> = None;
    for root in all_trees(instance, PartialAssignment::empty()) {
        let tree = AdaptiveTree::new(n, root)?;
        let cost = expected_cost_by_enumeration(instance, &tree.clone().into(), 0)?;
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, tree));
        }
    }
    let (value, tree) = best.expect("at least one tree");
    Ok(SolveResult { value, witness: Witness::Tree(tree) })
}
