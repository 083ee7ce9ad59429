//! Testing strategies and their costs.
//!
//! Testing always stops the moment the observed outcomes determine `f`, no
//! matter what the strategy would do next. A strategy that asks to stop while
//! `f` is still open, or repeats a test, is rejected with
//! [`SbfeError::InvalidStrategy`].
//!
//! Monte Carlo estimates draw from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64(seed)`; worker `w` of a partitioned run uses stream `w` of
//! that generator and takes `samples / workers` draws, the first
//! `samples % workers` workers taking one extra. Each variable of a sample is
//! one `f64` draw compared against `p_i`, in index order.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbfeError};
use crate::formula::{full_mask, Mask, PartialAssignment, TABLE_CAP};
use crate::instance::{Instance, Mode, Weights};
use crate::num::{complement, CostValue, Rational};

/// A fixed test order; testing runs down the permutation until `f` is determined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonAdaptiveStrategy {
    order: Vec<usize>,
}

impl NonAdaptiveStrategy {
    pub fn new(n: usize, order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(SbfeError::InvalidStrategy(format!("permutation has length {}, expected {n}", order.len())));
        }
        for &v in &order {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(SbfeError::InvalidStrategy(format!("{order:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(Self { order })
    }

    pub fn identity(n: usize) -> Self {
        Self { order: (0..n).collect() }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Decision tree node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Stop,
    Test { var: usize, if_false: Box<TreeNode>, if_true: Box<TreeNode> },
}

impl TreeNode {
    pub fn test(var: usize, if_false: TreeNode, if_true: TreeNode) -> Self {
        TreeNode::Test { var, if_false: Box::new(if_false), if_true: Box::new(if_true) }
    }

    pub fn size(&self) -> usize {
        match self {
            TreeNode::Stop => 1,
            TreeNode::Test { if_false, if_true, .. } => 1 + if_false.size() + if_true.size(),
        }
    }

    fn validate(&self, n: usize, path: Mask) -> Result<()> {
        match self {
            TreeNode::Stop => Ok(()),
            TreeNode::Test { var, if_false, if_true } => {
                if *var >= n {
                    return Err(SbfeError::InvalidStrategy(format!("tree tests x{var} but n = {n}")));
                }
                if path >> var & 1 == 1 {
                    return Err(SbfeError::InvalidStrategy(format!("tree repeats x{var} on a path")));
                }
                if_false.validate(n, path | 1 << var)?;
                if_true.validate(n, path | 1 << var)
            }
        }
    }
}

/// An adaptive strategy materialized as a decision tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveTree {
    root: TreeNode,
}

impl AdaptiveTree {
    /// Checks that no variable repeats along a root-to-node path.
    pub fn new(n: usize, root: TreeNode) -> Result<Self> {
        root.validate(n, 0)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    /// Checks that every `Stop` node is reached only when `f` is determined.
    pub fn check_stops(&self, instance: &Instance) -> Result<()> {
        fn go(node: &TreeNode, inst: &Instance, pa: PartialAssignment) -> Result<()> {
            match node {
                TreeNode::Stop => {
                    if inst.formula().is_determined(&pa).is_determined() {
                        Ok(())
                    } else {
                        Err(SbfeError::InvalidStrategy("tree stops before f is determined".into()))
                    }
                }
                TreeNode::Test { var, if_false, if_true } => {
                    go(if_false, inst, pa.with(*var, false))?;
                    go(if_true, inst, pa.with(*var, true))
                }
            }
        }
        go(&self.root, instance, PartialAssignment::empty())
    }
}

/// What an adaptive policy wants to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Test(usize),
    Stop,
}

/// A lazily evaluated adaptive strategy.
pub trait AdaptivePolicy: Send + Sync {
    fn decide(&self, instance: &Instance, pa: &PartialAssignment) -> Decision;
}

impl<F> AdaptivePolicy for F
where
    F: Fn(&Instance, &PartialAssignment) -> Decision + Send + Sync,
{
    fn decide(&self, instance: &Instance, pa: &PartialAssignment) -> Decision {
        self(instance, pa)
    }
}

#[derive(Clone)]
pub enum Strategy {
    NonAdaptive(NonAdaptiveStrategy),
    Tree(AdaptiveTree),
    Policy(Arc<dyn AdaptivePolicy>),
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::NonAdaptive(s) => f.debug_tuple("NonAdaptive").field(&s.order).finish(),
            Strategy::Tree(t) => f.debug_tuple("Tree").field(&t.size()).finish(),
            Strategy::Policy(_) => f.write_str("Policy(..)"),
        }
    }
}

impl From<NonAdaptiveStrategy> for Strategy {
    fn from(s: NonAdaptiveStrategy) -> Self {
        Strategy::NonAdaptive(s)
    }
}

impl From<AdaptiveTree> for Strategy {
    fn from(t: AdaptiveTree) -> Self {
        Strategy::Tree(t)
    }
}

impl Strategy {
    pub fn policy(p: impl AdaptivePolicy + 'static) -> Self {
        Strategy::Policy(Arc::new(p))
    }

    fn cursor(&self) -> Cursor<'_> {
        match self {
            Strategy::NonAdaptive(s) => Cursor::Perm { order: &s.order, pos: 0 },
            Strategy::Tree(t) => Cursor::Tree(&t.root),
            Strategy::Policy(p) => Cursor::Policy(p.as_ref()),
        }
    }

    /// Materializes any strategy as a decision tree, pruned where `f` is determined.
    pub fn to_tree(&self, instance: &Instance) -> Result<AdaptiveTree> {
        fn go(inst: &Instance, cur: Cursor<'_>, pa: PartialAssignment, depth: usize) -> Result<TreeNode> {
            if inst.formula().is_determined(&pa).is_determined() {
                return Ok(TreeNode::Stop);
            }
            if depth > inst.n() {
                return Err(SbfeError::InvalidStrategy("policy exceeded depth n".into()));
            }
            let var = cur.next_test(inst, &pa)?;
            Ok(TreeNode::test(
                var,
                go(inst, cur.advance(false), pa.with(var, false), depth + 1)?,
                go(inst, cur.advance(true), pa.with(var, true), depth + 1)?,
            ))
        }
        let root = go(instance, self.cursor(), PartialAssignment::empty(), 0)?;
        AdaptiveTree::new(instance.n(), root)
    }

    pub fn to_json(&self, instance: &Instance) -> Result<StrategyJson> {
        Ok(match self {
            Strategy::NonAdaptive(s) => StrategyJson::Perm { order: s.order.clone() },
            Strategy::Tree(t) => StrategyJson::Tree { node: t.root.clone() },
            Strategy::Policy(_) => StrategyJson::Tree { node: self.to_tree(instance)?.root },
        })
    }
}

/// Strategy file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyJson {
    Perm { order: Vec<usize> },
    Tree { node: TreeNode },
}

impl StrategyJson {
    pub fn into_strategy(self, n: usize) -> Result<Strategy> {
        Ok(match self {
            StrategyJson::Perm { order } => NonAdaptiveStrategy::new(n, order)?.into(),
            StrategyJson::Tree { node } => AdaptiveTree::new(n, node)?.into(),
        })
    }
}

/// Position inside a strategy while walking one branch.
#[derive(Clone, Copy)]
enum Cursor<'a> {
    Perm { order: &'a [usize], pos: usize },
    Tree(&'a TreeNode),
    Policy(&'a dyn AdaptivePolicy),
}

impl<'a> Cursor<'a> {
    /// The next test, or an error if the strategy gives up while `f` is open.
    fn next_test(&self, inst: &Instance, pa: &PartialAssignment) -> Result<usize> {
        let decision = match *self {
            Cursor::Perm { order, pos } => order.get(pos).map_or(Decision::Stop, |&v| Decision::Test(v)),
            Cursor::Tree(TreeNode::Stop) => Decision::Stop,
            Cursor::Tree(TreeNode::Test { var, .. }) => Decision::Test(*var),
            Cursor::Policy(p) => p.decide(inst, pa),
        };
        match decision {
            Decision::Stop => Err(SbfeError::InvalidStrategy("stopped before f was determined".into())),
            Decision::Test(v) if v >= inst.n() => {
                Err(SbfeError::InvalidStrategy(format!("tested x{v} but n = {}", inst.n())))
            }
            Decision::Test(v) if pa.is_tested(v) => Err(SbfeError::InvalidStrategy(format!("repeated test of x{v}"))),
            Decision::Test(v) => Ok(v),
        }
    }

    fn advance(self, value: bool) -> Self {
        match self {
            Cursor::Perm { order, pos } => Cursor::Perm { order, pos: pos + 1 },
            Cursor::Tree(TreeNode::Test { if_false, if_true, .. }) => {
                Cursor::Tree(if value { if_true } else { if_false })
            }
            other => other,
        }
    }
}

/// Variables the strategy tests on input `x` before `f(x)` is determined.
pub fn tested_set(instance: &Instance, strategy: &Strategy, x: Mask) -> Result<Mask> {
    let mut pa = PartialAssignment::empty();
    let mut cur = strategy.cursor();
    while !instance.formula().is_determined(&pa).is_determined() {
        let v = cur.next_test(instance, &pa)?;
        let value = x >> v & 1 == 1;
        pa = pa.with(v, value);
        cur = cur.advance(value);
    }
    Ok(pa.tested())
}

fn mask_cost_exact(costs: &[Rational], mask: Mask) -> Rational {
    costs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, c)| c).sum()
}

fn mask_cost_f64(costs: &[f64], mask: Mask) -> f64 {
    costs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, c)| c).sum()
}

/// Total cost paid on input `x`.
pub fn simulate_cost(instance: &Instance, x: Mask, strategy: &Strategy) -> Result<CostValue> {
    let mask = tested_set(instance, strategy, x)?;
    Ok(match instance.weights() {
        Weights::Exact { costs, .. } => CostValue::Exact(mask_cost_exact(costs, mask)),
        Weights::Float { costs, .. } => CostValue::Float(mask_cost_f64(costs, mask)),
    })
}

/// Exact expected cost.
pub fn expected_cost_exact(instance: &Instance, strategy: &Strategy) -> Result<Rational> {
    expected_cost_by_recursion(instance, strategy, 0)
}

/// Exact expected cost where variables in `free_mask` cost nothing.
pub fn expected_leaf_cost(instance: &Instance, strategy: &Strategy, free_mask: Mask) -> Result<Rational> {
    expected_cost_by_recursion(instance, strategy, free_mask)
}

/// Walks the strategy's branching structure, adding `c_v · Pr(reach node)`
/// at each test node.
pub fn expected_cost_by_recursion(instance: &Instance, strategy: &Strategy, free_mask: Mask) -> Result<Rational> {
    let (costs, probs) = instance.exact_weights()?;
    fn go(
        inst: &Instance,
        costs: &[Rational],
        probs: &[Rational],
        free: Mask,
        cur: Cursor<'_>,
        pa: PartialAssignment,
        reach: Rational,
    ) -> Result<Rational> {
        if inst.formula().is_determined(&pa).is_determined() {
            return Ok(Rational::zero());
        }
        let v = cur.next_test(inst, &pa)?;
        let here = if free >> v & 1 == 1 { Rational::zero() } else { &costs[v] * &reach };
        let on_true = go(inst, costs, probs, free, cur.advance(true), pa.with(v, true), &reach * &probs[v])?;
        let on_false =
            go(inst, costs, probs, free, cur.advance(false), pa.with(v, false), &reach * complement(&probs[v]))?;
        Ok(here + on_true + on_false)
    }
    go(
        instance,
        costs,
        probs,
        free_mask,
        strategy.cursor(),
        PartialAssignment::empty(),
        Rational::from_integer(1.into()),
    )
}

/// Numerators of `Pr(x)` over the common denominator `Π den(p_i)`.
pub(crate) struct InputWeights {
    lo_bits: usize,
    lo: Vec<BigUint>,
    hi: Vec<BigUint>,
    pub denom: BigUint,
}

impl InputWeights {
    pub(crate) fn new(probs: &[Rational]) -> Self {
        let n = probs.len();
        let factors: Vec<(BigUint, BigUint, BigUint)> = probs
            .iter()
            .map(|p| {
                let num = p.numer().to_biguint().expect("positive probability");
                let den = p.denom().to_biguint().expect("positive denominator");
                let q = &den - &num;
                (q, num, den)
            })
            .collect();
        let table = |vars: &[(BigUint, BigUint, BigUint)]| -> Vec<BigUint> {
            let mut t = vec![BigUint::from(1u32)];
            for (q, p, _) in vars {
                let mut next = Vec::with_capacity(t.len() * 2);
                next.extend(t.iter().map(|w| w * q));
                next.extend(t.iter().map(|w| w * p));
                t = next;
            }
            t
        };
        let lo_bits = n / 2;
        let lo = table(&factors[..lo_bits]);
        let hi = table(&factors[lo_bits..]);
        let denom = factors.iter().fold(BigUint::from(1u32), |acc, (_, _, d)| acc * d);
        Self { lo_bits, lo, hi, denom }
    }

    pub(crate) fn weight(&self, x: usize) -> BigUint {
        &self.lo[x & ((1 << self.lo_bits) - 1)] * &self.hi[x >> self.lo_bits]
    }
}

/// Sums `Pr(x) · cost(x)` over all `2^n` inputs.
pub fn expected_cost_by_enumeration(instance: &Instance, strategy: &Strategy, free_mask: Mask) -> Result<Rational> {
    let (costs, probs) = instance.exact_weights()?;
    let n = instance.n();
    if n > TABLE_CAP {
        return Err(SbfeError::SizeExceeded { what: "enumeration", n, cap: TABLE_CAP });
    }
    let weights = InputWeights::new(probs);
    let mut mass: HashMap<Mask, BigUint> = HashMap::new();
    for x in 0..1usize << n {
        let tested = tested_set(instance, strategy, x as Mask)? & !free_mask;
        *mass.entry(tested).or_default() += weights.weight(x);
    }
    let denom = Rational::from_integer(weights.denom.into());
    let total: Rational =
        mass.into_iter().map(|(mask, m)| mask_cost_exact(costs, mask) * Rational::from_integer(m.into())).sum();
    Ok(total / denom)
}

/// Monte Carlo estimate of the expected cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

pub fn sample_input(rng: &mut impl Rng, probs: &[f64]) -> Mask {
    probs.iter().enumerate().fold(0, |x, (i, &p)| if rng.random::<f64>() < p { x | 1 << i } else { x })
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var / self.count as f64).sqrt()
    }
}

pub fn expected_cost_mc(instance: &Instance, strategy: &Strategy, samples: u64, seed: u64) -> Result<McEstimate> {
    expected_cost_mc_workers(instance, strategy, samples, seed, 1)
}

/// Partitioned Monte Carlo; `(seed, samples, workers)` fixes the result.
pub fn expected_cost_mc_workers(
    instance: &Instance,
    strategy: &Strategy,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(SbfeError::PreconditionViolated("samples must be at least 1".into()));
    }
    let workers = workers.clamp(1, samples.min(1024) as usize);
    let costs = instance.costs_f64();
    let probs = instance.probs_f64();
    let run = |w: usize| -> Result<Moments> {
        let share = samples / workers as u64 + u64::from((w as u64) < samples % workers as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(w as u64);
        let mut m = Moments::default();
        for _ in 0..share {
            let x = sample_input(&mut rng, &probs);
            m.push(mask_cost_f64(&costs, tested_set(instance, strategy, x)?));
        }
        Ok(m)
    };
    let parts: Vec<Result<Moments>> = if workers == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || run(w))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    let mut total = Moments::default();
    for p in parts {
        total = total.merge(p?);
    }
    Ok(McEstimate { mean: total.mean, stderr: total.stderr(), samples, seed })
}

/// Exact or Monte Carlo expected cost, depending on the instance mode.
pub fn expected_cost(instance: &Instance, strategy: &Strategy, samples: u64, seed: u64) -> Result<CostValue> {
    match instance.mode() {
        Mode::Exact => expected_cost_exact(instance, strategy).map(CostValue::Exact),
        Mode::Float => expected_cost_mc(instance, strategy, samples, seed).map(|e| CostValue::Float(e.mean)),
    }
}

/// Every input, for exhaustive checks on small `n`.
pub fn all_inputs(n: usize) -> impl Iterator<Item = Mask> {
    0..=full_mask(n)
}
