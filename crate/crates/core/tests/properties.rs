mod common;

use std::collections::VecDeque;

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use sbfe_core::formula::{full_mask, TtspGraph, TtspNode};
use sbfe_core::generators::{gen_binary_tree, gen_tribes};
use sbfe_core::heuristics::boros_unyulurt;
use sbfe_core::num::{int, ratio};
use sbfe_core::solve::{opt_adaptive, opt_nonadaptive, undetermined_prob, undetermined_probs_all};
use sbfe_core::strategy::{
    all_inputs, expected_cost_by_enumeration, expected_cost_by_recursion, expected_cost_exact,
    expected_cost_mc_workers, tested_set,
};
use sbfe_core::{Formula, Instance, Mask, PartialAssignment, RoNode, Strategy, TruthTable};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn evaluators_agree(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = common::rng(seed);
        let f = common::any_formula(&mut rng, n);
        let inst = common::with_random_weights(&mut rng, f);
        let tree: Strategy = common::random_tree(&mut rng, &inst).into();
        let perm: Strategy = common::random_perm(&mut rng, n).into();
        let free = rng.random_range(0..=full_mask(n));
        for s in [tree, perm] {
            prop_assert_eq!(
                expected_cost_by_recursion(&inst, &s, free).unwrap(),
                expected_cost_by_enumeration(&inst, &s, free).unwrap()
            );
        }
    }

    #[test]
    fn monotone_structural_rule_matches_table(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = common::rng(seed);
        let Formula::Dnf(f) = common::ro_dnf(&mut rng, n) else { unreachable!() };
        let table = Formula::Dnf(f.clone()).to_truth_table(n).unwrap();
        for _ in 0..32 {
            let tested = rng.random_range(0..=full_mask(n));
            let pa = PartialAssignment::observe(tested, rng.random_range(0..=full_mask(n)));
            prop_assert_eq!(f.structural_determination(&pa), table.is_determined(&pa));
            prop_assert_eq!(f.is_determined(&pa), table.is_determined(&pa));
        }
    }

    #[test]
    fn exact_determination_matches_table(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = common::rng(seed);
        let f = common::any_formula(&mut rng, n);
        let table = f.to_truth_table(n).unwrap();
        for _ in 0..32 {
            let tested = rng.random_range(0..=full_mask(n));
            let pa = PartialAssignment::observe(tested, rng.random_range(0..=full_mask(n)));
            prop_assert_eq!(f.is_determined(&pa), table.is_determined(&pa));
        }
    }

    #[test]
    fn restrict_agrees_with_eval(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = common::rng(seed);
        let f = common::any_formula(&mut rng, n);
        let var = rng.random_range(0..n);
        for value in [false, true] {
            let g = f.restrict(var, value);
            prop_assert_eq!(g.n(), n);
            for x in all_inputs(n) {
                let fixed = if value { x | 1 << var } else { x & !(1 << var) };
                prop_assert_eq!(g.eval(x), f.eval(fixed));
            }
        }
    }

    #[test]
    fn ttsp_matches_graph_search(seed in any::<u64>(), n in 1usize..=9) {
        let mut rng = common::rng(seed);
        let Formula::Tree(t) = common::ro_tree(&mut rng, n) else { unreachable!() };
        let g = TtspGraph::new(n, to_ttsp(t.root())).unwrap();
        let edges = layout(g.root());
        for x in all_inputs(n) {
            prop_assert_eq!(g.eval(x), connected(&edges, x));
        }
    }

    #[test]
    fn policy_matches_its_tree(seed in any::<u64>(), n in 1usize..=9) {
        let mut rng = common::rng(seed);
        let f = common::ro_dnf(&mut rng, n);
        let inst = common::with_random_weights(&mut rng, f);
        let policy = Strategy::policy(boros_unyulurt(&inst).unwrap());
        let tree: Strategy = policy.to_tree(&inst).unwrap().into();
        for x in all_inputs(n) {
            prop_assert_eq!(tested_set(&inst, &policy, x).unwrap(), tested_set(&inst, &tree, x).unwrap());
        }
        prop_assert_eq!(expected_cost_exact(&inst, &policy).unwrap(), expected_cost_exact(&inst, &tree).unwrap());
    }

    #[test]
    fn optimum_ordering(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = common::rng(seed);
        let f = common::any_formula(&mut rng, n);
        let inst = common::with_random_weights(&mut rng, f);
        let a = opt_adaptive(&inst).unwrap();
        let nn = opt_nonadaptive(&inst).unwrap();
        prop_assert!(a.value <= nn.value);
        prop_assert_eq!(expected_cost_exact(&inst, &a.strategy()).unwrap(), a.value.clone());
        prop_assert_eq!(expected_cost_exact(&inst, &nn.strategy()).unwrap(), nn.value.clone());
        let perm: Strategy = common::random_perm(&mut rng, n).into();
        prop_assert!(nn.value <= expected_cost_exact(&inst, &perm).unwrap());
        let tree: Strategy = common::random_tree(&mut rng, &inst).into();
        prop_assert!(a.value <= expected_cost_exact(&inst, &tree).unwrap());
    }

    #[test]
    fn optima_scale_with_costs(seed in any::<u64>(), n in 1usize..=7, num in 1i64..=7, den in 1i64..=5) {
        let mut rng = common::rng(seed);
        let f = common::any_formula(&mut rng, n);
        let inst = common::with_random_weights(&mut rng, f);
        let lambda = ratio(num, den);
        let (costs, probs) = inst.exact_weights().unwrap();
        let scaled = Instance::exact(
            inst.formula().clone(),
            costs.iter().map(|c| c * &lambda).collect(),
            probs.to_vec(),
        ).unwrap();
        prop_assert_eq!(opt_adaptive(&scaled).unwrap().value, opt_adaptive(&inst).unwrap().value * &lambda);
        prop_assert_eq!(opt_nonadaptive(&scaled).unwrap().value, opt_nonadaptive(&inst).unwrap().value * &lambda);
    }

    #[test]
    fn undetermined_routes_agree(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = common::rng(seed);
        let f = common::any_formula(&mut rng, n);
        let inst = common::with_random_weights(&mut rng, f);
        let all = undetermined_probs_all(&inst).unwrap();
        for (t, u) in all.iter().enumerate() {
            prop_assert_eq!(u, &undetermined_prob(&inst, t as Mask).unwrap());
        }
        prop_assert!(all[(1 << n) - 1].is_zero());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = common::rng(seed);
        let f = common::any_formula(&mut rng, n);
        let inst = common::with_random_weights(&mut rng, f);
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), inst.to_json());
        prop_assert_eq!(back.digest(), inst.digest());
    }

    #[test]
    fn mc_is_reproducible(seed in any::<u64>(), workers in 1usize..=4) {
        let mut rng = common::rng(seed);
        let f = common::ro_dnf(&mut rng, 6);
        let inst = common::with_random_weights(&mut rng, f);
        let s: Strategy = common::random_perm(&mut rng, 6).into();
        let a = expected_cost_mc_workers(&inst, &s, 500, seed, workers).unwrap();
        let b = expected_cost_mc_workers(&inst, &s, 500, seed, workers).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn to_ttsp(node: &RoNode) -> TtspNode {
    match node {
        RoNode::Leaf(v) => TtspNode::Edge(*v),
        RoNode::And(ch) => TtspNode::Series(ch.iter().map(to_ttsp).collect()),
        RoNode::Or(ch) => TtspNode::Parallel(ch.iter().map(to_ttsp).collect()),
    }
}

/// Edges `(u, v, var)` of the graph, source 0 and sink 1.
fn layout(root: &TtspNode) -> Vec<(usize, usize, usize)> {
    fn place(node: &TtspNode, s: usize, t: usize, next: &mut usize, out: &mut Vec<(usize, usize, usize)>) {
        match node {
            TtspNode::Edge(v) => out.push((s, t, *v)),
            TtspNode::Parallel(ch) => ch.iter().for_each(|c| place(c, s, t, next, out)),
            TtspNode::Series(ch) => {
                let mut from = s;
                for (i, c) in ch.iter().enumerate() {
                    let to = if i + 1 == ch.len() {
                        t
                    } else {
                        *next += 1;
                        *next
                    };
                    place(c, from, to, next, out);
                    from = to;
                }
            }
        }
    }
    let mut out = Vec::new();
    place(root, 0, 1, &mut 1, &mut out);
    out
}

fn connected(edges: &[(usize, usize, usize)], x: Mask) -> bool {
    let vertices = edges.iter().map(|e| e.0.max(e.1)).max().unwrap_or(1) + 1;
    let mut seen = vec![false; vertices];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &(a, b, v) in edges {
            if x >> v & 1 == 0 {
                continue;
            }
            let w = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen[1]
}

#[test]
fn tribes_terms_have_probability_two_to_minus_w() {
    for w in 1..=5 {
        let inst = gen_tribes(2, w).unwrap();
        let p = ratio(1, 1 << w);
        let (_, probs) = inst.exact_weights().unwrap();
        let term: sbfe_core::Rational = probs[..w].iter().product();
        assert_eq!(term, p);
    }
}

/// Heap-numbered paths rebuilt independently of the generator: the edge
/// into heap node `h` (root 1) has preorder index computed from subtree
/// sizes.
fn preorder_paths(d: usize) -> Vec<Vec<usize>> {
    let subtree_edges = |level: usize| (2usize << (d - level)) - 2;
    let mut paths = Vec::new();
    for leaf in 0..1usize << d {
        let mut path = Vec::new();
        let mut base = 0;
        for level in 1..=d {
            let right = leaf >> (d - level) & 1 == 1;
            let idx = if right { base + 1 + subtree_edges(level) } else { base };
            path.push(idx);
            base = idx + 1;
        }
        paths.push(path);
    }
    paths
}

#[test]
fn binary_tree_matches_alive_leaf_walk() {
    for d in 1..=3 {
        let (inst, meta) = gen_binary_tree(d, &ratio(1, 4)).unwrap();
        let paths = preorder_paths(d);
        assert_eq!(paths, meta.leaf_paths);
        for x in all_inputs(inst.n()) {
            let alive = paths.iter().any(|p| p.iter().all(|&e| x >> e & 1 == 1));
            assert_eq!(inst.formula().eval(x), alive, "d = {d}, x = {x:#b}");
        }
    }
}

#[test]
fn depth_two_survival_by_enumeration() {
    let (inst, _) = gen_binary_tree(2, &ratio(1, 4)).unwrap();
    let q = ratio(5, 8);
    let alive: sbfe_core::Rational = all_inputs(6)
        .filter(|&x| inst.formula().eval(x))
        .map(|x| (0..6).map(|i| if x >> i & 1 == 1 { q.clone() } else { int(1) - &q }).product::<sbfe_core::Rational>())
        .sum();
    assert!(alive >= ratio(1, 4));
    assert!(alive <= sbfe_core::Rational::one());
}

#[test]
fn constant_tables_cost_nothing() {
    for value in [false, true] {
        let t = TruthTable::from_fn(3, |_| value);
        let inst = Instance::unit_uniform(t.into());
        assert!(opt_adaptive(&inst).unwrap().value.is_zero());
        assert!(opt_nonadaptive(&inst).unwrap().value.is_zero());
    }
}
