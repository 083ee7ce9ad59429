//! Closed-form strategies for read-once DNFs and friends.
//!
//! Within a term, variables are tested in non-decreasing `c_i / (1 - p_i)`;
//! terms are taken in non-decreasing `C(T) / P(T)`, where `P(T)` is the
//! probability the term is true and `C(T)` the expected cost of testing its
//! variables in that order until one is false. Ties go to the lower variable
//! index, then the lower term index.

use std::cmp::Ordering;

use num_traits::Num;

use crate::error::{Result, SbfeError};
use crate::formula::{PartialAssignment, ReadOnceDnf};
use crate::instance::{Instance, Weights};
use crate::strategy::{AdaptivePolicy, Decision, NonAdaptiveStrategy};

/// Per-term quantities driving the optimal adaptive order.
#[derive(Debug, Clone, PartialEq)]
pub struct TermStats<T> {
    /// Term variables in non-decreasing `c / (1 - p)`.
    pub order: Vec<usize>,
    /// `P(T) = Π p_i`.
    pub prob_true: T,
    /// `C(T) = Σ_i c_{j_i} Π_{r<i} p_{j_r}`.
    pub expected_cost: T,
}

fn cmp<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

pub fn term_stats<T>(vars: &[usize], costs: &[T], probs: &[T]) -> TermStats<T>
where
    T: Num + Clone + PartialOrd,
{
    let key = |v: usize| costs[v].clone() / (T::one() - probs[v].clone());
    let mut order = vars.to_vec();
    order.sort_by(|&a, &b| cmp(&key(a), &key(b)).then(a.cmp(&b)));
    let mut reach = T::one();
    let mut expected_cost = T::zero();
    for &v in &order {
        expected_cost = expected_cost + costs[v].clone() * reach.clone();
        reach = reach * probs[v].clone();
    }
    TermStats { order, prob_true: reach, expected_cost }
}

/// Terms in evaluation order, each listing its variables in testing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermPlan {
    pub terms: Vec<Vec<usize>>,
}

fn plan_generic<T>(f: &ReadOnceDnf, costs: &[T], probs: &[T]) -> TermPlan
where
    T: Num + Clone + PartialOrd,
{
    let stats: Vec<TermStats<T>> = f.term_vars().iter().map(|t| term_stats(t, costs, probs)).collect();
    let mut idx: Vec<usize> = (0..stats.len()).collect();
    let key = |j: usize| stats[j].expected_cost.clone() / stats[j].prob_true.clone();
    idx.sort_by(|&a, &b| cmp(&key(a), &key(b)).then(a.cmp(&b)));
    TermPlan { terms: idx.into_iter().map(|j| stats[j].order.clone()).collect() }
}

pub fn read_once_dnf(instance: &Instance) -> Result<ReadOnceDnf> {
    instance.formula().as_read_once_dnf().ok_or(SbfeError::NotReadOnceDnf)
}

pub fn term_plan(instance: &Instance) -> Result<TermPlan> {
    let f = read_once_dnf(instance)?;
    Ok(match instance.weights() {
        Weights::Exact { costs, probs } => plan_generic(&f, costs, probs),
        Weights::Float { costs, probs } => plan_generic(&f, costs, probs),
    })
}

/// The optimal adaptive strategy for read-once DNFs: evaluate terms one at a
/// time in plan order, abandoning a term at its first false variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorosUnyulurt {
    plan: TermPlan,
}

impl BorosUnyulurt {
    pub fn plan(&self) -> &TermPlan {
        &self.plan
    }
}

impl AdaptivePolicy for BorosUnyulurt {
    fn decide(&self, _instance: &Instance, pa: &PartialAssignment) -> Decision {
        for term in &self.plan.terms {
            if term.iter().any(|&v| pa.value(v) == Some(false)) {
                continue;
            }
            return match term.iter().find(|&&v| !pa.is_tested(v)) {
                Some(&v) => Decision::Test(v),
                None => Decision::Stop,
            };
        }
        Decision::Stop
    }
}

pub fn boros_unyulurt(instance: &Instance) -> Result<BorosUnyulurt> {
    Ok(BorosUnyulurt { plan: term_plan(instance)? })
}

/// `⌈2 log2 n⌉`, i.e. the least `t` with `2^t ≥ n²`.
pub fn prefix_length(n: usize) -> usize {
    let sq = (n as u128) * (n as u128);
    (0..).find(|&t| 1u128 << t >= sq).unwrap()
}

/// Non-adaptive strategy for unit costs and uniform probabilities: terms by
/// increasing length, each contributing its first `⌈2 log2 n⌉` variables,
/// then every variable left over (same term order, within-term order).
pub fn algorithm1(instance: &Instance) -> Result<NonAdaptiveStrategy> {
    let f = read_once_dnf(instance)?;
    if !instance.is_unit_cost() || !instance.is_uniform() {
        return Err(SbfeError::PreconditionViolated("algorithm 1 needs unit costs and p_i = 1/2".into()));
    }
    let n = instance.n();
    let tau = prefix_length(n);
    let mut terms = f.term_vars();
    for t in terms.iter_mut() {
        t.sort_unstable();
    }
    terms.sort_by_key(Vec::len);
    let mut order: Vec<usize> = terms.iter().flat_map(|t| t.iter().take(tau).copied()).collect();
    order.extend(terms.iter().flat_map(|t| t.iter().skip(tau).copied()));
    append_unused(n, &mut order);
    NonAdaptiveStrategy::new(n, order)
}

/// Variables outside every term (irrelevant ones) go last, by index.
fn append_unused(n: usize, order: &mut Vec<usize>) {
    let mut used = vec![false; n];
    order.iter().for_each(|&v| used[v] = true);
    order.extend((0..n).filter(|&v| !used[v]));
}

/// Round `r` tests the `r`-th variable of every term that still has one.
pub fn round_robin(instance: &Instance) -> Result<NonAdaptiveStrategy> {
    let plan = term_plan(instance)?;
    let rounds = plan.terms.iter().map(Vec::len).max().unwrap_or(0);
    let mut order: Vec<usize> =
        (0..rounds).flat_map(|r| plan.terms.iter().filter_map(move |t| t.get(r).copied())).collect();
    append_unused(instance.n(), &mut order);
    NonAdaptiveStrategy::new(instance.n(), order)
}

/// Every term in full, terms in plan order.
pub fn term_order(instance: &Instance) -> Result<NonAdaptiveStrategy> {
    let plan = term_plan(instance)?;
    let mut order: Vec<usize> = plan.terms.into_iter().flatten().collect();
    append_unused(instance.n(), &mut order);
    NonAdaptiveStrategy::new(instance.n(), order)
}

fn sorted_by<K: PartialOrd>(n: usize, key: impl Fn(usize) -> K) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp(&key(a), &key(b)).then(a.cmp(&b)));
    order
}

/// Variables by increasing cost, ties by index.
pub fn increasing_cost(instance: &Instance) -> NonAdaptiveStrategy {
    let order = match instance.weights() {
        Weights::Exact { costs, .. } => sorted_by(instance.n(), |v| costs[v].clone()),
        Weights::Float { costs, .. } => sorted_by(instance.n(), |v| costs[v]),
    };
    NonAdaptiveStrategy::new(instance.n(), order).expect("sorted indices")
}

/// Variables by increasing `c_i / p_i`; optimal for an OR of variables.
pub fn cost_per_probability(instance: &Instance) -> NonAdaptiveStrategy {
    let order = match instance.weights() {
        Weights::Exact { costs, probs } => sorted_by(instance.n(), |v| &costs[v] / &probs[v]),
        Weights::Float { costs, probs } => sorted_by(instance.n(), |v| costs[v] / probs[v]),
    };
    NonAdaptiveStrategy::new(instance.n(), order).expect("sorted indices")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::DnfFormula;
    use crate::num::{int, ratio, Rational};
    use crate::strategy::{expected_cost_exact, Strategy};

    fn rodnf(n: usize, terms: &[Vec<usize>], costs: Vec<Rational>, probs: Vec<Rational>) -> Instance {
        Instance::exact(DnfFormula::monotone(n, terms).unwrap().into(), costs, probs).unwrap()
    }

    #[test]
    fn within_term_order_uses_cost_over_failure_probability() {
        // c/(1-p): 1/(1/10) = 10 for x0, 1/(1/2) = 2 for x1.
        let s = term_stats(&[0, 1], &[int(1), int(1)], &[ratio(9, 10), ratio(1, 2)]);
        assert_eq!(s.order, vec![1, 0]);
        assert_eq!(s.prob_true, ratio(9, 20));
        assert_eq!(s.expected_cost, ratio(3, 2));
    }

    #[test]
    fn expected_term_cost_is_one_and_a_half_for_fair_pair() {
        let s = term_stats(&[0, 1], &[int(1), int(1)], &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(s.expected_cost, ratio(3, 2));
    }

    #[test]
    fn unit_uniform_terms_sorted_by_length() {
        let inst =
            Instance::unit_uniform(DnfFormula::monotone(6, &[vec![0, 1, 2], vec![3], vec![4, 5]]).unwrap().into());
        assert_eq!(term_plan(&inst).unwrap().terms, vec![vec![3], vec![4, 5], vec![0, 1, 2]]);
    }

    #[test]
    fn single_term_policy_cost() {
        let inst = rodnf(2, &[vec![0, 1]], vec![int(1); 2], vec![ratio(1, 2); 2]);
        let bu = Strategy::policy(boros_unyulurt(&inst).unwrap());
        assert_eq!(expected_cost_exact(&inst, &bu).unwrap(), ratio(3, 2));
    }

    #[test]
    fn algorithm1_cases() {
        assert_eq!(prefix_length(1), 0);
        assert_eq!(prefix_length(4), 4);
        assert_eq!(prefix_length(5), 5);
        assert_eq!(prefix_length(8), 6);
        // Short terms: plain concatenation by increasing length.
        let inst = Instance::unit_uniform(DnfFormula::monotone(5, &[vec![0, 1, 2], vec![3, 4]]).unwrap().into());
        assert_eq!(algorithm1(&inst).unwrap().order(), &[3, 4, 0, 1, 2]);
        // One long term of length n = 20 > τ = 9.
        let n = 20;
        let inst = Instance::unit_uniform(DnfFormula::monotone(n, &[(0..n).collect()]).unwrap().into());
        assert_eq!(prefix_length(n), 9);
        assert_eq!(algorithm1(&inst).unwrap().order(), (0..n).collect::<Vec<_>>().as_slice());
        // A long term after a short one: the tail of the long term moves to the end.
        let terms = vec![(0..18).collect::<Vec<_>>(), vec![18, 19]];
        let inst = Instance::unit_uniform(DnfFormula::monotone(20, &terms).unwrap().into());
        let mut expected = vec![18, 19];
        expected.extend(0..9);
        expected.extend(9..18);
        assert_eq!(algorithm1(&inst).unwrap().order(), expected.as_slice());
    }

    #[test]
    fn algorithm1_preconditions() {
        let inst = rodnf(2, &[vec![0, 1]], vec![int(2), int(1)], vec![ratio(1, 2); 2]);
        assert!(matches!(algorithm1(&inst), Err(SbfeError::PreconditionViolated(_))));
        let neg = DnfFormula::new(1, vec![vec![crate::formula::Literal::neg(0)]]).unwrap();
        assert_eq!(algorithm1(&Instance::unit_uniform(neg.into())), Err(SbfeError::NotReadOnceDnf));
    }

    #[test]
    fn round_robin_and_term_order_on_symmetric_tribes() {
        let inst = Instance::unit_uniform(DnfFormula::monotone(4, &[vec![0, 1], vec![2, 3]]).unwrap().into());
        assert_eq!(round_robin(&inst).unwrap().order(), &[0, 2, 1, 3]);
        let t = term_order(&inst).unwrap();
        assert_eq!(t.order(), &[0, 1, 2, 3]);
        assert_eq!(expected_cost_exact(&inst, &t.into()).unwrap(), ratio(25, 8));
    }

    #[test]
    fn single_term_orders_agree() {
        let inst = rodnf(3, &[vec![0, 1, 2]], vec![int(3), int(1), int(2)], vec![ratio(1, 2); 3]);
        let within = term_plan(&inst).unwrap().terms[0].clone();
        assert_eq!(within, vec![1, 2, 0]);
        assert_eq!(round_robin(&inst).unwrap().order(), within.as_slice());
        assert_eq!(term_order(&inst).unwrap().order(), within.as_slice());
    }

    #[test]
    fn cost_orders() {
        let inst = Instance::unit_uniform(DnfFormula::monotone(3, &[vec![0], vec![1], vec![2]]).unwrap().into());
        assert_eq!(increasing_cost(&inst).order(), &[0, 1, 2]);
        let inst = rodnf(3, &[vec![0], vec![1], vec![2]], vec![int(3), int(1), int(2)], vec![ratio(1, 2); 3]);
        assert_eq!(increasing_cost(&inst).order(), &[1, 2, 0]);
        let inst = rodnf(2, &[vec![0], vec![1]], vec![int(1), int(2)], vec![ratio(1, 4), ratio(3, 4)]);
        assert_eq!(cost_per_probability(&inst).order(), &[1, 0]);
    }
}
