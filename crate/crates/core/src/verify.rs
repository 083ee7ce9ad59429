//! Gap reports, lemma checkers and parameter sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SbfeError};
use crate::formula::TABLE_CAP;
use crate::generators::{gen_address, gen_binary_tree, gen_geometric_cost, gen_tribes, gen_ucap};
use crate::heuristics::{algorithm1, boros_unyulurt, cost_per_probability, increasing_cost, round_robin, term_order};
use crate::instance::{Instance, Mode};
use crate::num::{format_rational, int, ratio, to_f64, CostValue, JsonNumber, Rational};
use crate::solve::{next_permutation, opt_adaptive_with_cap, opt_nonadaptive_with_cap, ADAPTIVE_CAP, NONADAPTIVE_CAP};
use crate::strategy::{all_inputs, expected_cost_exact, expected_cost_mc, InputWeights, Strategy};

/// How strategy costs are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

impl EvalMode {
    pub fn tag(&self) -> &'static str {
        match self {
            EvalMode::Exact => "exact",
            EvalMode::MonteCarlo { .. } => "mc",
        }
    }
}

/// Strategy names understood by [`named_strategy`].
pub const STRATEGY_NAMES: [&str; 6] = ["bu", "alg1", "roundrobin", "termorder", "cost", "cost_per_prob"];

/// Builds a heuristic strategy by name.
pub fn named_strategy(instance: &Instance, name: &str) -> Result<Strategy> {
    Ok(match name {
        "bu" => Strategy::policy(boros_unyulurt(instance)?),
        "alg1" => algorithm1(instance)?.into(),
        "roundrobin" => round_robin(instance)?.into(),
        "termorder" => term_order(instance)?.into(),
        "cost" => increasing_cost(instance).into(),
        "cost_per_prob" => cost_per_probability(instance).into(),
        other => {
            return Err(SbfeError::ParameterError(format!(
                "unknown strategy {other:?}, expected one of {}",
                STRATEGY_NAMES.join(", ")
            )))
        }
    })
}

/// Every heuristic whose preconditions hold for `instance`.
pub fn applicable_strategies(instance: &Instance) -> Vec<(&'static str, Strategy)> {
    STRATEGY_NAMES.iter().filter_map(|&name| named_strategy(instance, name).ok().map(|s| (name, s))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyCost {
    pub name: String,
    pub adaptive: bool,
    pub cost: CostValue,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub digest: String,
    pub n: usize,
    pub mode: EvalMode,
    pub opt_a: Option<CostValue>,
    pub opt_n: Option<CostValue>,
    pub ratio: Option<CostValue>,
    pub strategies: Vec<StrategyCost>,
}

#[derive(Serialize)]
struct StrategyCostJson {
    name: String,
    adaptive: bool,
    cost: JsonNumber,
    #[serde(skip_serializing_if = "Option::is_none")]
    stderr: Option<f64>,
}

#[derive(Serialize)]
struct GapReportJson {
    digest: String,
    n: usize,
    mode: &'static str,
    opt_a: Option<JsonNumber>,
    opt_n: Option<JsonNumber>,
    ratio: Option<JsonNumber>,
    strategies: Vec<StrategyCostJson>,
}

impl GapReport {
    pub fn cost_of(&self, name: &str) -> Option<&CostValue> {
        self.strategies.iter().find(|s| s.name == name).map(|s| &s.cost)
    }

    /// Comparisons that must hold in exact mode: `1 <= ratio`,
    /// `opt_a <= every cost`, `opt_n <= every non-adaptive cost`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (Some(CostValue::Exact(a)), Some(CostValue::Exact(nn))) = (&self.opt_a, &self.opt_n) else {
            return out;
        };
        if a > nn {
            out.push(format!("opt_a {} exceeds opt_n {}", format_rational(a), format_rational(nn)));
        }
        for s in &self.strategies {
            let CostValue::Exact(c) = &s.cost else { continue };
            if c < a {
                out.push(format!("{} costs {} below opt_a", s.name, format_rational(c)));
            }
            if !s.adaptive && c < nn {
                out.push(format!("{} costs {} below opt_n", s.name, format_rational(c)));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let j = GapReportJson {
            digest: self.digest.clone(),
            n: self.n,
            mode: self.mode.tag(),
            opt_a: self.opt_a.as_ref().map(Into::into),
            opt_n: self.opt_n.as_ref().map(Into::into),
            ratio: self.ratio.as_ref().map(Into::into),
            strategies: self
                .strategies
                .iter()
                .map(|s| StrategyCostJson {
                    name: s.name.clone(),
                    adaptive: s.adaptive,
                    cost: (&s.cost).into(),
                    stderr: s.stderr,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("report serializes")
    }
}

/// `opt_n / opt_a`, with `0/0` read as 1.
pub fn gap_ratio(opt_a: &Rational, opt_n: &Rational) -> Rational {
    if opt_a.is_zero() {
        Rational::one()
    } else {
        opt_n / opt_a
    }
}

/// OPT_A, OPT_N, their ratio and every applicable heuristic's cost. In
/// Monte Carlo mode only heuristic costs are estimated.
pub fn gap_report(instance: &Instance, mode: EvalMode) -> Result<GapReport> {
    let mut report = GapReport {
        digest: instance.digest(),
        n: instance.n(),
        mode,
        opt_a: None,
        opt_n: None,
        ratio: None,
        strategies: Vec::new(),
    };
    let strategies = applicable_strategies(instance);
    match mode {
        EvalMode::Exact => {
            if instance.mode() != Mode::Exact {
                return Err(SbfeError::ModeMismatch { expected: Mode::Exact });
            }
            let a = opt_adaptive_with_cap(instance, ADAPTIVE_CAP)?.value;
            let nn = opt_nonadaptive_with_cap(instance, NONADAPTIVE_CAP)?.value;
            report.ratio = Some(CostValue::Exact(gap_ratio(&a, &nn)));
            report.opt_a = Some(CostValue::Exact(a));
            report.opt_n = Some(CostValue::Exact(nn));
            for (name, s) in strategies {
                let cost = expected_cost_exact(instance, &s)?;
                report.strategies.push(StrategyCost {
                    name: name.into(),
                    adaptive: matches!(s, Strategy::Policy(_)),
                    cost: CostValue::Exact(cost),
                    stderr: None,
                });
            }
        }
        EvalMode::MonteCarlo { samples, seed } => {
            for (name, s) in strategies {
                let est = expected_cost_mc(instance, &s, samples, seed)?;
                report.strategies.push(StrategyCost {
                    name: name.into(),
                    adaptive: matches!(s, Strategy::Policy(_)),
                    cost: CostValue::Float(est.mean),
                    stderr: Some(est.stderr),
                });
            }
        }
    }
    Ok(report)
}

/// Outcome of a lemma check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaResult {
    pub lemma: String,
    pub trials: u64,
    pub violations: u64,
    pub stats: BTreeMap<String, JsonNumber>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<String>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl LemmaResult {
    fn new(lemma: &str) -> Self {
        Self {
            lemma: lemma.into(),
            trials: 0,
            violations: 0,
            stats: BTreeMap::new(),
            tolerance: None,
            pass: false,
            notes: Vec::new(),
        }
    }

    fn exact(&mut self, key: &str, v: &Rational) {
        self.stats.insert(key.into(), JsonNumber::Text(format_rational(v)));
    }

    fn float(&mut self, key: &str, v: f64) {
        self.stats.insert(key.into(), JsonNumber::Float(v));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lemma result serializes")
    }
}

fn earthmover_sides(p_list: &[Rational], p: &Rational) -> Result<(Rational, Rational, Rational)> {
    if !p.is_positive() {
        return Err(SbfeError::HypothesisViolated("p must be positive".into()));
    }
    if p_list.iter().any(Signed::is_negative) {
        return Err(SbfeError::HypothesisViolated("p_list has a negative entry".into()));
    }
    if p_list.windows(2).any(|w| w[0] < w[1]) {
        return Err(SbfeError::HypothesisViolated("p_list is not nonincreasing".into()));
    }
    if p_list.first().is_some_and(|p1| p1 > p) {
        return Err(SbfeError::HypothesisViolated("p is below p_1".into()));
    }
    let total: Rational = p_list.iter().sum();
    let l_prime = (total / p).floor();
    let lhs: Rational = p_list.iter().enumerate().map(|(i, q)| q * int(i as i64 + 1)).sum();
    let rhs = p * &l_prime * (&l_prime + int(1)) / int(2);
    Ok((l_prime, lhs, rhs))
}

/// With `L' = ⌊Σ p_ℓ / p⌋`, checks `Σ ℓ·p_ℓ ≥ Σ_{ℓ ≤ L'} ℓ·p` exactly.
pub fn check_earthmover(p_list: &[Rational], p: &Rational) -> Result<LemmaResult> {
    let (l_prime, lhs, rhs) = earthmover_sides(p_list, p)?;
    let mut r = LemmaResult::new("earthmover");
    r.trials = 1;
    r.violations = u64::from(lhs < rhs);
    r.pass = r.violations == 0;
    r.exact("l_prime", &l_prime);
    r.exact("lhs", &lhs);
    r.exact("rhs", &rhs);
    Ok(r)
}

fn random_fraction(rng: &mut ChaCha8Rng, max_den: i64) -> Rational {
    let den = rng.random_range(1..=max_den);
    ratio(rng.random_range(0..=den), den)
}

/// Random valid earthmover inputs: a sorted list of random fractions and a
/// `p` at or above its head (exactly at it a quarter of the time).
pub fn earthmover_input(rng: &mut ChaCha8Rng) -> (Vec<Rational>, Rational) {
    let len = rng.random_range(0..=12);
    let mut list: Vec<Rational> = (0..len).map(|_| random_fraction(rng, 64)).collect();
    list.sort_by(|a, b| b.cmp(a));
    let head = list.first().cloned().unwrap_or_else(Rational::zero);
    let mut p = if rng.random_range(0..4) == 0 { head.clone() } else { &head + random_fraction(rng, 64) };
    if p.is_zero() {
        p = ratio(1, rng.random_range(1..=64));
    }
    (list, p)
}

pub fn check_earthmover_batch(trials: u64, seed: u64) -> LemmaResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = LemmaResult::new("earthmover");
    let mut slack_min: Option<Rational> = None;
    for _ in 0..trials {
        let (list, p) = earthmover_input(&mut rng);
        let (_, lhs, rhs) = earthmover_sides(&list, &p).expect("generated inputs satisfy the hypotheses");
        let slack = lhs - rhs;
        if slack.is_negative() {
            r.violations += 1;
        }
        if slack_min.as_ref().is_none_or(|m| &slack < m) {
            slack_min = Some(slack);
        }
    }
    r.trials = trials;
    r.pass = r.violations == 0;
    r.float("seed", seed as f64);
    if let Some(m) = slack_min {
        r.exact("min_slack", &m);
    }
    r
}

/// Largest depth the branching simulator accepts.
pub const BRANCHING_MAX_DEPTH: usize = 24;

/// Simulates the alive-edge process: generation 0 is the root, and every
/// alive node has two children, each alive with probability `(1 + eps)/2`.
/// Passes iff the mean of `Z_d` is within 4 standard errors of
/// `(1 + eps)^d` and the survival rate is at least `eps` minus 4 standard
/// errors.
pub fn check_branching(d: usize, eps: &Rational, samples: u64, seed: u64) -> Result<LemmaResult> {
    if samples == 0 {
        return Err(SbfeError::PreconditionViolated("samples must be at least 1".into()));
    }
    if d > BRANCHING_MAX_DEPTH {
        return Err(SbfeError::SizeExceeded { what: "branching depth", n: d, cap: BRANCHING_MAX_DEPTH });
    }
    if !eps.is_positive() || *eps > int(1) {
        return Err(SbfeError::ParameterError("eps must lie in (0, 1]".into()));
    }
    let q = to_f64(&((int(1) + eps) / int(2)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq, mut survived) = (0f64, 0f64, 0u64);
    for _ in 0..samples {
        let mut z: u64 = 1;
        for _ in 0..d {
            if z == 0 {
                break;
            }
            z = (0..2 * z).filter(|_| rng.random::<f64>() < q).count() as u64;
        }
        sum += z as f64;
        sum_sq += (z as f64) * (z as f64);
        survived += u64::from(z > 0);
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    let stderr = (var / n).sqrt();
    let survival = survived as f64 / n;
    let surv_var = if samples > 1 { survival * (1.0 - survival) * n / (n - 1.0) } else { 0.0 };
    let surv_stderr = (surv_var / n).sqrt();
    let target_exact: Rational = (int(1) + eps).pow(d as u32);
    let target = to_f64(&target_exact);
    let eps_f = to_f64(eps);

    let mut r = LemmaResult::new("branching");
    r.trials = samples;
    let mean_ok = (mean - target).abs() <= 4.0 * stderr + 1e-12 * target;
    let surv_ok = survival >= eps_f - 4.0 * surv_stderr;
    r.violations = u64::from(!mean_ok) + u64::from(!surv_ok);
    r.pass = r.violations == 0;
    r.tolerance = Some("4 standard errors".into());
    r.exact("target_mean", &target_exact);
    r.float("mean", mean);
    r.float("stderr", stderr);
    r.float("relative_stderr", stderr / target);
    r.float("survival", survival);
    r.float("survival_stderr", surv_stderr);
    r.float("seed", seed as f64);
    Ok(r)
}

/// Exact law of `Z_d` from the generation recursion
/// `Z_{k+1} ~ Binomial(2 Z_k, (1 + eps)/2)`; entry `z` is `Pr(Z_d = z)`.
pub fn branching_distribution(d: usize, eps: &Rational) -> Vec<Rational> {
    let q = (int(1) + eps) / int(2);
    let q_bar = int(1) - &q;
    let mut dist = vec![Rational::zero(), Rational::one()];
    for _ in 0..d {
        let mut next = vec![Rational::zero(); 2 * dist.len() - 1];
        for (z, pz) in dist.iter().enumerate() {
            if pz.is_zero() {
                continue;
            }
            for (j, slot) in next.iter_mut().enumerate().take(2 * z + 1) {
                let c = Rational::from_integer(binomial(BigUint::from(2 * z), BigUint::from(j)).into());
                *slot += pz * c * q.clone().pow(j as u32) * q_bar.clone().pow((2 * z - j) as u32);
            }
        }
        dist = next;
    }
    dist
}

/// Law of the alive-leaf count of the depth-`d` tree instance, by
/// enumerating all edge outcomes. Errors if some outcome has an alive leaf
/// but `f = 0` or vice versa.
pub fn alive_leaf_distribution(d: usize, eps: &Rational) -> Result<Vec<Rational>> {
    let (inst, meta) = gen_binary_tree(d, eps)?;
    let n = inst.n();
    if n > TABLE_CAP {
        return Err(SbfeError::SizeExceeded { what: "edge outcomes", n, cap: TABLE_CAP });
    }
    let (_, probs) = inst.exact_weights()?;
    let w = InputWeights::new(probs);
    let mut mass = vec![BigUint::zero(); meta.num_leaves() + 1];
    for x in all_inputs(n) {
        let alive = meta.alive_leaves(x).count_ones() as usize;
        if (alive > 0) != inst.formula().eval(x) {
            return Err(SbfeError::InvalidFormula(format!("tree formula disagrees with alive leaves at {x:#b}")));
        }
        mass[alive] += w.weight(x as usize);
    }
    let denom: Rational = Rational::from_integer(w.denom.into());
    Ok(mass.into_iter().map(|m| Rational::from_integer(m.into()) / &denom).collect())
}

/// Compares the recursion with exhaustive enumeration on the tree instance
/// and checks `Pr(Z_d > 0) >= eps` exactly.
pub fn check_branching_exact(d: usize, eps: &Rational) -> Result<LemmaResult> {
    let recursive = branching_distribution(d, eps);
    let enumerated = alive_leaf_distribution(d, eps)?;
    let mut r = LemmaResult::new("branching_exact");
    r.trials = 1u64 << (2 * (1u64 << d) - 2);
    let mismatched = (0..recursive.len().max(enumerated.len()))
        .filter(|&z| recursive.get(z).unwrap_or(&Rational::zero()) != enumerated.get(z).unwrap_or(&Rational::zero()))
        .count() as u64;
    let survival = int(1) - &enumerated[0];
    r.violations = mismatched + u64::from(survival < *eps);
    r.pass = r.violations == 0;
    let mean: Rational = enumerated.iter().enumerate().map(|(z, p)| p * int(z as i64)).sum();
    r.exact("survival", &survival);
    r.exact("mean", &mean);
    r.exact("target_mean", &(int(1) + eps).pow(d as u32));
    r.float("mismatched_counts", mismatched as f64);
    Ok(r)
}

/// Depth cap for exhaustive leaf-order search.
pub const LEAF_MONOTONE_MAX_DEPTH: usize = 3;

/// Over leaf orders of the depth-`d` tree (internal edges free), finds the
/// orders minimizing the expected position of the first alive leaf given
/// that one exists, and checks that each has nonincreasing
/// first-alive-leaf probabilities.
pub fn check_leaf_monotone(d: usize, eps: &Rational) -> Result<LemmaResult> {
    if d > LEAF_MONOTONE_MAX_DEPTH {
        return Err(SbfeError::SizeExceeded { what: "leaf-order depth", n: d, cap: LEAF_MONOTONE_MAX_DEPTH });
    }
    let (inst, meta) = gen_binary_tree(d, eps)?;
    let leaves = meta.num_leaves();
    let (_, probs) = inst.exact_weights()?;
    let w = InputWeights::new(probs);

    let sets = 1usize << leaves;
    let mut mass = vec![BigUint::zero(); sets];
    for x in all_inputs(inst.n()) {
        mass[meta.alive_leaves(x) as usize] += w.weight(x as usize);
    }
    // subset sums, then Q(B) = Pr(no leaf of B alive) = S(complement of B)
    let mut subset = mass.clone();
    for b in 0..leaves {
        for s in 0..sets {
            if s >> b & 1 == 1 {
                let low = subset[s ^ 1 << b].clone();
                subset[s] += low;
            }
        }
    }
    let q = |b: usize| &subset[(sets - 1) & !b];

    let mut perm: Vec<usize> = (0..leaves).collect();
    let mut best: Option<BigUint> = None;
    let mut optimal: Vec<(Vec<usize>, Vec<BigUint>)> = Vec::new();
    let mut orders = 0u64;
    loop {
        orders += 1;
        let mut seq = Vec::with_capacity(leaves);
        let mut prefix = 0usize;
        let mut cost = BigUint::zero();
        for (pos, &leaf) in perm.iter().enumerate() {
            let next = prefix | 1 << leaf;
            let p = q(prefix) - q(next);
            cost += &p * BigUint::from(pos + 1);
            seq.push(p);
            prefix = next;
        }
        match best.as_ref().map(|b| cost.cmp(b)) {
            Some(std::cmp::Ordering::Greater) => {}
            Some(std::cmp::Ordering::Equal) => optimal.push((perm.clone(), seq)),
            _ => {
                best = Some(cost);
                optimal = vec![(perm.clone(), seq)];
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }

    let alive = &w.denom - &mass[0];
    let mut r = LemmaResult::new("leaf_monotone");
    r.trials = orders;
    r.violations = optimal.iter().filter(|(_, seq)| seq.windows(2).any(|p| p[0] < p[1])).count() as u64;
    r.pass = r.violations == 0;
    let big = |v: &BigUint| Rational::from_integer(v.clone().into());
    let pr_alive = big(&alive) / big(&w.denom);
    let best = best.expect("at least one order");
    r.exact("pr_some_leaf_alive", &pr_alive);
    r.exact("optimal_conditional_cost", &(big(&best) / big(&alive)));
    r.float("optimal_orders", optimal.len() as f64);
    let (order, seq) = &optimal[0];
    r.notes.push(format!("first optimal order {order:?}"));
    r.notes.push(format!(
        "conditional first-alive probabilities [{}]",
        seq.iter().map(|p| format_rational(&(big(p) / big(&alive)))).collect::<Vec<_>>().join(", ")
    ));
    Ok(r)
}

/// Instance families available to sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Tribes,
    Ucap,
    GeomCost,
    BinTree,
    Address,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "tribes" => Family::Tribes,
            "ucap" => Family::Ucap,
            "geomcost" => Family::GeomCost,
            "bintree" => Family::BinTree,
            "address" => Family::Address,
            other => return Err(SbfeError::ParameterError(format!("unknown family {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Tribes => "tribes",
            Family::Ucap => "ucap",
            Family::GeomCost => "geomcost",
            Family::BinTree => "bintree",
            Family::Address => "address",
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Family::Tribes => &["k", "w"],
            Family::Ucap => &["m", "l"],
            Family::GeomCost => &["l"],
            Family::BinTree => &["d", "eps"],
            Family::Address => &["d", "shared_cost"],
        }
    }
}

/// Fixed parameters of a sweep; the swept value is the family's first
/// parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub mode: EvalMode,
    /// Tribes width (default: equal to `k`) or ucap term width (default 2).
    pub width: Option<usize>,
    pub eps: Rational,
    pub shared_cost: Rational,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { mode: EvalMode::Exact, width: None, eps: ratio(1, 4), shared_cost: int(1) }
    }
}

/// The instance a sweep uses for `value`, with its parameter cells.
pub fn sweep_instance(family: Family, value: usize, opts: &SweepOptions) -> Result<(Vec<String>, Instance)> {
    Ok(match family {
        Family::Tribes => {
            let w = opts.width.unwrap_or(value);
            (vec![value.to_string(), w.to_string()], gen_tribes(value, w)?)
        }
        Family::Ucap => {
            let l = opts.width.unwrap_or(2);
            (vec![value.to_string(), l.to_string()], gen_ucap(value, l)?)
        }
        Family::GeomCost => (vec![value.to_string()], gen_geometric_cost(value)?),
        Family::BinTree => (vec![value.to_string(), format_rational(&opts.eps)], gen_binary_tree(value, &opts.eps)?.0),
        Family::Address => {
            (vec![value.to_string(), format_rational(&opts.shared_cost)], gen_address(value, &opts.shared_cost)?)
        }
    })
}

const COST_COLUMNS: [(&str, &str); 4] = [
    ("alg1", "alg1_cost"),
    ("roundrobin", "roundrobin_cost"),
    ("termorder", "termorder_cost"),
    ("cost", "cost_sorted_cost"),
];

pub fn sweep_header(family: Family) -> String {
    let mut cols = vec!["family"];
    cols.extend(family.param_names());
    cols.extend(["n", "opt_a", "opt_n", "ratio"]);
    cols.extend(COST_COLUMNS.iter().map(|c| c.1));
    cols.join(",")
}

fn cell(v: Option<&CostValue>) -> String {
    v.map(ToString::to_string).unwrap_or_default()
}

fn sweep_row(family: Family, value: usize, opts: &SweepOptions) -> Result<String> {
    let (params, inst) = sweep_instance(family, value, opts)?;
    let report = gap_report(&inst, opts.mode)?;
    let mut cells = vec![family.name().to_string()];
    cells.extend(params);
    cells.push(inst.n().to_string());
    cells.push(cell(report.opt_a.as_ref()));
    cells.push(cell(report.opt_n.as_ref()));
    cells.push(cell(report.ratio.as_ref()));
    cells.extend(COST_COLUMNS.iter().map(|(name, _)| cell(report.cost_of(name))));
    Ok(cells.join(","))
}

/// One CSV row per value, in the given order; rows are computed in
/// parallel.
pub fn sweep(family: Family, values: &[usize], opts: &SweepOptions) -> Result<String> {
    let rows: Vec<String> = values.par_iter().map(|&v| sweep_row(family, v, opts)).collect::<Result<_>>()?;
    let mut out = sweep_header(family);
    out.push('\n');
    for row in rows {
        writeln!(out, "{row}").expect("writing to a string");
    }
    Ok(out)
}

/// Reads a CSV cell written by [`sweep`] back as an exact value.
pub fn parse_cell(s: &str) -> Option<Rational> {
    crate::num::parse_rational(s).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::DnfFormula;

    #[test]
    fn tribes_gap() {
        let r = gap_report(&gen_tribes(2, 2).unwrap(), EvalMode::Exact).unwrap();
        assert_eq!(r.ratio, Some(CostValue::Exact(ratio(25, 21))));
        assert!(r.violations().is_empty());
        assert_eq!(r.cost_of("bu"), r.opt_a.as_ref());
    }

    #[test]
    fn constant_gap_is_one() {
        let inst = Instance::unit_uniform(crate::formula::Formula::Constant { n: 3, value: true });
        let r = gap_report(&inst, EvalMode::Exact).unwrap();
        assert_eq!(r.opt_a, Some(CostValue::Exact(int(0))));
        assert_eq!(r.ratio, Some(CostValue::Exact(int(1))));
    }

    #[test]
    fn mc_gap_has_no_optima() {
        let inst = gen_ucap(4, 2).unwrap();
        assert!(gap_report(&inst, EvalMode::Exact).is_err());
        let r = gap_report(&inst, EvalMode::MonteCarlo { samples: 500, seed: 3 }).unwrap();
        assert!(r.opt_a.is_none() && r.ratio.is_none());
        assert!(r.cost_of("bu").is_some());
    }

    #[test]
    fn earthmover_examples() {
        let r = check_earthmover(&[ratio(1, 2), ratio(3, 10), ratio(1, 5)], &ratio(1, 2)).unwrap();
        assert!(r.pass);
        assert_eq!(r.stats["l_prime"], JsonNumber::Text("2/1".into()));
        assert_eq!(r.stats["lhs"], JsonNumber::Text("17/10".into()));
        assert_eq!(r.stats["rhs"], JsonNumber::Text("3/2".into()));
        let r = check_earthmover(&vec![int(0); 3], &int(1)).unwrap();
        assert!(r.pass);
        let r = check_earthmover(&vec![ratio(1, 3); 4], &ratio(1, 3)).unwrap();
        assert_eq!(r.stats["lhs"], r.stats["rhs"]);
        assert!(matches!(
            check_earthmover(&[ratio(1, 5), ratio(1, 2)], &int(1)),
            Err(SbfeError::HypothesisViolated(_))
        ));
        assert!(matches!(check_earthmover(&[ratio(1, 2)], &ratio(1, 3)), Err(SbfeError::HypothesisViolated(_))));
        assert!(check_earthmover_batch(2000, 1).pass);
    }

    #[test]
    fn branching_depth_zero() {
        let r = check_branching(0, &ratio(1, 4), 10, 0).unwrap();
        assert!(r.pass);
        assert_eq!(r.stats["mean"], JsonNumber::Float(1.0));
        assert_eq!(r.stats["survival"], JsonNumber::Float(1.0));
    }

    #[test]
    fn branching_target() {
        let r = check_branching(5, &ratio(1, 4), 2000, 9).unwrap();
        assert_eq!(r.stats["target_mean"], JsonNumber::Text("3125/1024".into()));
    }

    #[test]
    fn branching_exact_agrees() {
        for d in 1..=2 {
            let r = check_branching_exact(d, &ratio(1, 4)).unwrap();
            assert!(r.pass, "{r:?}");
        }
        let dist = branching_distribution(1, &ratio(1, 2));
        assert_eq!(dist, vec![ratio(1, 16), ratio(6, 16), ratio(9, 16)]);
    }

    #[test]
    fn leaf_monotone_small() {
        for d in 1..=2 {
            assert!(check_leaf_monotone(d, &ratio(1, 4)).unwrap().pass);
        }
        let r = check_leaf_monotone(1, &ratio(1, 2)).unwrap();
        assert_eq!(r.stats["optimal_orders"], JsonNumber::Float(2.0));
        assert!(check_leaf_monotone(4, &ratio(1, 4)).is_err());
    }

    #[test]
    fn sweep_shapes() {
        let opts = SweepOptions::default();
        assert_eq!(sweep(Family::Tribes, &[], &opts).unwrap(), format!("{}\n", sweep_header(Family::Tribes)));
        let csv = sweep(Family::Tribes, &[2, 1], &opts).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "family,k,w,n,opt_a,opt_n,ratio,alg1_cost,roundrobin_cost,termorder_cost,cost_sorted_cost"
        );
        assert!(lines[1].starts_with("tribes,2,2,4,21/8,25/8,25/21,"));
        assert!(lines[2].starts_with("tribes,1,1,1,"));
        let csv = sweep(Family::Address, &[1], &opts).unwrap();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(&row[..6], &["address", "1", "1/1", "3", "2/1", "5/2"]);
        assert_eq!(row[7], "");
    }

    #[test]
    fn named_strategies() {
        let inst = Instance::unit_uniform(DnfFormula::monotone(2, &[vec![0], vec![1]]).unwrap().into());
        assert_eq!(applicable_strategies(&inst).len(), 6);
        assert!(named_strategy(&inst, "nope").is_err());
    }
}
