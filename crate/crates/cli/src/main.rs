use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sbfe_core::generators::{gen_address, gen_binary_tree, gen_geometric_cost, gen_tribes, gen_ucap};
use sbfe_core::num::{format_rational, int, parse_rational, ratio};
use sbfe_core::solve::{brute_force_opt, opt_adaptive, opt_nonadaptive, BruteKind, SolveResult};
use sbfe_core::strategy::{expected_cost_exact, expected_cost_mc_workers, StrategyJson};
use sbfe_core::verify::{
    check_branching, check_branching_exact, check_earthmover, check_earthmover_batch, check_leaf_monotone, gap_report,
    named_strategy, sweep, EvalMode, Family, LemmaResult, SweepOptions,
};
use sbfe_core::{Instance, Mode, Rational, Strategy};

#[derive(Parser, Debug)]
#[command(name = "sbfe", version, about = "Sequential testing of Boolean functions: costs, optima and gaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CostMode {
    Exact,
    Mc,
}

#[derive(clap::Args, Debug)]
struct McArgs {
    /// Evaluation mode; defaults to exact for exact instances, mc otherwise.
    #[arg(long, value_enum)]
    mode: Option<CostMode>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance: tribes, ucap, geomcost, bintree or address.
    Gen {
        family: String,
        /// Comma-separated key=value pairs, e.g. k=2,w=3.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the bintree metadata; defaults next to --out.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Emit a named heuristic strategy as JSON.
    Strategy {
        /// bu, alg1, roundrobin, termorder, cost or cost_per_prob.
        name: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected cost of a strategy.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        /// Strategy JSON file.
        #[arg(long, conflicts_with = "name")]
        strategy: Option<PathBuf>,
        /// Named heuristic instead of a file.
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal adaptive and non-adaptive costs with witnesses.
    Opt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = OptKind::Both)]
        kind: OptKind,
        /// Exhaustive search instead of dynamic programming.
        #[arg(long)]
        brute: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adaptivity gap and heuristic costs.
    Gap {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One CSV row per parameter value.
    Sweep {
        family: String,
        /// Comma-separated values of the family's first parameter.
        #[arg(long, default_value = "")]
        values: String,
        /// Fixed parameters: width, eps, shared_cost.
        #[arg(long, default_value = "")]
        params: String,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a lemma checker: earthmover, earthmover-batch, branching,
    /// branching-exact or leaf-monotone.
    Verify {
        lemma: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OptKind {
    Adaptive,
    Nonadaptive,
    Both,
}

struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(s: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| anyhow!("parameter {pair:?} is not key=value"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Params(map))
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn usize(&self, key: &str, default: Option<usize>) -> Result<usize> {
        match (self.raw(key), default) {
            (Some(v), _) => v.parse().with_context(|| format!("parameter {key} = {v:?}")),
            (None, Some(d)) => Ok(d),
            (None, None) => bail!("missing parameter {key}"),
        }
    }

    fn rational(&self, key: &str, default: Option<Rational>) -> Result<Rational> {
        match (self.raw(key), default) {
            (Some(v), _) => Ok(parse_rational(v)?),
            (None, Some(d)) => Ok(d),
            (None, None) => bail!("missing parameter {key}"),
        }
    }
}

/// Writes to stdout; a closed pipe downstream is not an error.
fn stdout(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => stdout(&format!("{}\n", text.trim_end())),
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Instance::from_json(&text)?)
}

fn eval_mode(inst: &Instance, mc: &McArgs) -> EvalMode {
    let mode = mc.mode.unwrap_or(match inst.mode() {
        Mode::Exact => CostMode::Exact,
        Mode::Float => CostMode::Mc,
    });
    match mode {
        CostMode::Exact => EvalMode::Exact,
        CostMode::Mc => EvalMode::MonteCarlo { samples: mc.samples, seed: mc.seed },
    }
}

fn generate(family: &str, params: &Params) -> Result<(Instance, Option<String>)> {
    Ok(match family {
        "tribes" => (gen_tribes(params.usize("k", None)?, params.usize("w", None)?)?, None),
        "ucap" => (gen_ucap(params.usize("m", None)?, params.usize("l", None)?)?, None),
        "geomcost" => (gen_geometric_cost(params.usize("l", None)?)?, None),
        "bintree" => {
            let (inst, meta) = gen_binary_tree(params.usize("d", None)?, &params.rational("eps", Some(ratio(1, 4)))?)?;
            (inst, Some(meta.to_json()))
        }
        "address" => (gen_address(params.usize("d", None)?, &params.rational("shared_cost", Some(int(1)))?)?, None),
        other => bail!("unknown family {other:?}"),
    })
}

fn load_strategy(inst: &Instance, file: Option<&Path>, name: Option<&str>) -> Result<Strategy> {
    match (file, name) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let raw: StrategyJson = serde_json::from_str(&text).context("parsing strategy")?;
            Ok(raw.into_strategy(inst.n())?)
        }
        (None, Some(n)) => Ok(named_strategy(inst, n)?),
        (None, None) => bail!("give --strategy FILE or --name NAME"),
    }
}

fn solve_json(inst: &Instance, r: SolveResult) -> Result<Value> {
    let witness = serde_json::to_value(r.strategy().to_json(inst)?)?;
    Ok(json!({ "value": format_rational(&r.value), "witness": witness }))
}

fn lemma(name: &str, params: &Params, samples: u64, seed: u64) -> Result<LemmaResult> {
    Ok(match name {
        "earthmover" => {
            let list = params
                .raw("list")
                .unwrap_or("")
                .split(':')
                .filter(|s| !s.trim().is_empty())
                .map(parse_rational)
                .collect::<sbfe_core::Result<Vec<_>>>()?;
            check_earthmover(&list, &params.rational("p", None)?)?
        }
        "earthmover-batch" => check_earthmover_batch(params.usize("trials", Some(100_000))? as u64, seed),
        "branching" => check_branching(params.usize("d", None)?, &params.rational("eps", None)?, samples, seed)?,
        "branching-exact" => check_branching_exact(params.usize("d", None)?, &params.rational("eps", None)?)?,
        "leaf-monotone" => check_leaf_monotone(params.usize("d", None)?, &params.rational("eps", None)?)?,
        other => bail!("unknown lemma {other:?}"),
    })
}

/// Exit status 1 signals a failed check, everything else is 0.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { family, params, out, meta } => {
            let (inst, side) = generate(&family, &Params::parse(&params)?)?;
            emit(out.as_deref(), &inst.to_json())?;
            if let Some(side) = side {
                let path = meta.or_else(|| out.as_ref().map(|o| o.with_extension("meta.json")));
                match path {
                    Some(p) => fs::write(&p, side).with_context(|| format!("writing {}", p.display()))?,
                    None => eprintln!("{side}"),
                }
            }
        }
        Command::Strategy { name, input, out } => {
            let inst = read_instance(&input)?;
            let s = named_strategy(&inst, &name)?;
            emit(out.as_deref(), &serde_json::to_string_pretty(&s.to_json(&inst)?)?)?;
        }
        Command::Eval { input, strategy, name, mc, workers, out } => {
            let inst = read_instance(&input)?;
            let s = load_strategy(&inst, strategy.as_deref(), name.as_deref())?;
            let report = match eval_mode(&inst, &mc) {
                EvalMode::Exact => json!({ "value": format_rational(&expected_cost_exact(&inst, &s)?) }),
                EvalMode::MonteCarlo { samples, seed } => {
                    let e = expected_cost_mc_workers(&inst, &s, samples, seed, workers)?;
                    json!({ "value": e.mean, "stderr": e.stderr, "samples": e.samples, "seed": e.seed })
                }
            };
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
        }
        Command::Opt { input, kind, brute, out } => {
            let inst = read_instance(&input)?;
            let mut report = serde_json::Map::new();
            if kind != OptKind::Nonadaptive {
                let r = if brute { brute_force_opt(&inst, BruteKind::Adaptive)? } else { opt_adaptive(&inst)? };
                report.insert("opt_a".into(), solve_json(&inst, r)?);
            }
            if kind != OptKind::Adaptive {
                let r = if brute { brute_force_opt(&inst, BruteKind::NonAdaptive)? } else { opt_nonadaptive(&inst)? };
                report.insert("opt_n".into(), solve_json(&inst, r)?);
            }
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
        }
        Command::Gap { input, mc, out } => {
            let inst = read_instance(&input)?;
            let report = gap_report(&inst, eval_mode(&inst, &mc))?;
            emit(out.as_deref(), &report.to_json())?;
            let violations = report.violations();
            for v in &violations {
                eprintln!("violation: {v}");
            }
            return Ok(violations.is_empty());
        }
        Command::Sweep { family, values, params, mc, out } => {
            let family = Family::parse(&family)?;
            let values = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| v.parse::<usize>().with_context(|| format!("sweep value {v:?}")))
                .collect::<Result<Vec<_>>>()?;
            let params = Params::parse(&params)?;
            let defaults = SweepOptions::default();
            let mode = match mc.mode.unwrap_or(if family == Family::Ucap { CostMode::Mc } else { CostMode::Exact }) {
                CostMode::Exact => EvalMode::Exact,
                CostMode::Mc => EvalMode::MonteCarlo { samples: mc.samples, seed: mc.seed },
            };
            let opts = SweepOptions {
                mode,
                width: params.raw("width").map(|_| params.usize("width", None)).transpose()?,
                eps: params.rational("eps", Some(defaults.eps))?,
                shared_cost: params.rational("shared_cost", Some(defaults.shared_cost))?,
            };
            let csv = sweep(family, &values, &opts)?;
            match out {
                Some(p) => fs::write(&p, csv).with_context(|| format!("writing {}", p.display()))?,
                None => stdout(&csv)?,
            }
        }
        Command::Verify { lemma: name, params, samples, seed, out } => {
            let r = lemma(&name, &Params::parse(&params)?, samples, seed)?;
            emit(out.as_deref(), &r.to_json())?;
            return Ok(r.pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
