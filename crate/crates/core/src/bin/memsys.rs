//! Command-line workbench: validation, simulation, emergence decision,
//! model checking, and predicate extraction over system files.
//!
//! Machine-readable JSON goes to stdout, human summaries to stderr.
//! Exit codes: 0 pass/holds, 2 semantic failure (invalid system, violated
//! formula, unsupported emergence, spec mismatch), 3 inconclusive,
//! 1 operational error (I/O, parse, budget).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use memsys::emergence::{check_emergence, EmergenceBudgets, FairnessMode};
use memsys::family::{check_semilinear_spec, computed_predicate_table, FamilyFile};
use memsys::graph::{build_graph, History, HistoryKind};

use memsys::logic::check::{model_check, CheckError, CheckMode as LogicMode};
use memsys::logic::eval::LogicModel;
use memsys::logic::parse::{parse_formula_file, NameContext};
use memsys::presburger::parse_presburger;
use memsys::sim::{simulate, Scheduler};
use memsys::system::MemorySystem;

#[derive(Parser)]
#[command(name = "memsys", version, about = "Memory-system workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check well-formedness and report subclass structure.
    Validate {
        system: PathBuf,
    },
    /// Run a scheduled simulation and emit a JSONL trace.
    Simulate {
        system: PathBuf,
        /// Maximum number of interactions.
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Policy::UniformRandom)]
        policy: Policy,
        /// Write the trace here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decide emergence of collective memory exactly.
    CheckEmergence {
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = Fairness::Entry)]
        fairness: Fairness,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Model-check every sentence in a formula file.
    ModelCheck {
        system: PathBuf,
        formulas: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::AllMaximal)]
        mode: Mode,
        /// Bind a free variable to an agent, e.g. --bind x=2 (repeatable).
        #[arg(long, value_parser = parse_bind)]
        bind: Vec<(String, String)>,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Tabulate the predicate a system family computes and compare it
    /// against a Presburger spec.
    ComputePredicate {
        family: PathBuf,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// File with one `signal: formula` line per output signal.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Export the reachable configuration graph as adjacency JSON.
    ExportGraph {
        system: PathBuf,
        #[command(flatten)]
        budgets: Budgets,
    },
}

#[derive(Args)]
struct Budgets {
    /// Configuration-graph node budget.
    #[arg(long, default_value_t = 100_000)]
    nodes: usize,
    /// Brute-force lasso stem+cycle bound.
    #[arg(long, default_value_t = 12)]
    lasso_bound: usize,
    /// Bounded-quantifier search limit for Presburger evaluation.
    #[arg(long, default_value_t = 64)]
    quantifier_bound: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    UniformRandom,
    RoundRobin,
    FairnessForcing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fairness {
    Entry,
    Neighbourhood,
    SpanN,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    AllMaximal,
    SpanningOnly,
}

fn parse_bind(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected VAR=AGENT, got `{s}`"))
}

/// Semantic outcome, distinguished from operational errors.
enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not errors.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Ok(Outcome::Inconclusive) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Validate { system } => {
            let sys = load_system(&system)?;
            let report = sys.validate();
            println!(
                "{}",
                json!({
                    "valid": report.is_valid(),
                    "violations": report.violations,
                    "warnings": report.warnings,
                    "flags": {
                        "pairwise": report.flags.pairwise,
                        "size_based": report.flags.size_based,
                        "hierarchy": report.flags.hierarchy,
                    },
                })
            );
            if report.is_valid() {
                eprintln!("valid ({} warnings)", report.warnings.len());
                Ok(Outcome::Pass)
            } else {
                eprintln!("invalid: {} violation(s)", report.violations.len());
                Ok(Outcome::Fail)
            }
        }
        Command::Simulate {
            system,
            steps,
            seed,
            policy,
            output,
        } => {
            let sys = load_system(&system)?;
            let sched = match policy {
                Policy::UniformRandom => Scheduler::UniformRandom { seed },
                Policy::RoundRobin => Scheduler::RoundRobin,
                Policy::FairnessForcing => Scheduler::FairnessForcing { seed },
            };
            let h = simulate(&sys, sched, steps);
            let mut lines = String::new();
            for (step, config) in h.configs.iter().enumerate() {
                let label = step.checked_sub(1).map(|i| {
                    let t = &sys.transitions[h.labels[i]];
                    json!({
                        "neighbourhood": sys.neighbourhoods[t.neighbourhood].name,
                        "entry": t.id,
                    })
                });
                let states: Vec<&str> = (0..sys.agent_count())
                    .map(|a| sys.states[config.state_of(a)].as_str())
                    .collect();
                lines.push_str(&serde_json::to_string(&json!({
                    "step": step,
                    "label": label,
                    "config": states,
                }))?);
                lines.push('\n');
            }
            match output {
                Some(path) => fs::write(path, lines)?,
                None => print!("{lines}"),
            }
            let kind = match h.kind {
                HistoryKind::FiniteMaximal => "deadlock",
                _ => "prefix",
            };
            let uniform = sys
                .uniform_signal(h.configs.last().expect("nonempty trace"))
                .map(|g| sys.signals[g].clone());
            eprintln!(
                "final kind: {kind}; final configuration signal-uniform: {}",
                uniform.as_deref().unwrap_or("no")
            );
            Ok(Outcome::Pass)
        }
        Command::CheckEmergence {
            system,
            fairness,
            budgets,
        } => {
            let sys = load_system(&system)?;
            let mode = match fairness {
                Fairness::Entry => FairnessMode::Entry,
                Fairness::Neighbourhood => FairnessMode::Neighbourhood,
                Fairness::SpanN => FairnessMode::SpanAgents,
            };
            let verdict = check_emergence(
                &sys,
                mode,
                EmergenceBudgets {
                    node_budget: budgets.nodes,
                    ..EmergenceBudgets::default()
                },
            )?;
            let mut signals: Vec<&str> = verdict
                .classes
                .iter()
                .filter_map(|c| c.stable_signal.map(|g| sys.signals[g].as_str()))
                .collect();
            signals.sort_unstable();
            signals.dedup();
            let signal = match (verdict.supports, signals.as_slice()) {
                (true, [s]) => Some(s.to_string()),
                _ => None,
            };
            println!(
                "{}",
                json!({
                    "supports": verdict.supports,
                    "signal": signal,
                    "classes": verdict.classes.iter().map(|c| json!({
                        "size": c.nodes.len(),
                        "stable_signal": c.stable_signal.map(|g| sys.signals[g].clone()),
                    })).collect::<Vec<_>>(),
                    "counterexample": verdict.counterexample.as_ref().map(|h| history_json(&sys, h)),
                })
            );
            if verdict.supports {
                eprintln!(
                    "supports emergence{}",
                    signal.map(|s| format!(" with signal {s}")).unwrap_or_default()
                );
                Ok(Outcome::Pass)
            } else {
                eprintln!("does not support emergence");
                Ok(Outcome::Fail)
            }
        }
        Command::ModelCheck {
            system,
            formulas,
            mode,
            bind,
            budgets,
        } => {
            let sys = load_system(&system)?;
            let ctx = NameContext::of(&sys);
            let text = fs::read_to_string(&formulas)?;
            let parsed = parse_formula_file(&text, Some(&ctx))?;
            let mut eta = BTreeMap::new();
            for (var, agent) in bind {
                let idx = sys
                    .agent_names
                    .iter()
                    .position(|a| a == &agent)
                    .ok_or_else(|| format!("--bind {var}={agent}: unknown agent"))?;
                eta.insert(var, idx);
            }
            let mut model = LogicModel::new(&sys);
            model.eta = eta;
            let logic_mode = match mode {
                Mode::AllMaximal => LogicMode::AllMaximal,
                Mode::SpanningOnly => LogicMode::SpanningOnly,
            };
            let mut all_hold = true;
            for (line, phi) in parsed {
                match model_check(&model, &phi, logic_mode, budgets.nodes) {
                    Ok(v) => {
                        all_hold &= v.holds;
                        println!(
                            "{}",
                            json!({
                                "line": line,
                                "formula": phi.to_string(),
                                "holds": v.holds,
                                "counterexample": v.counterexample.as_ref().map(|(h, pos)| json!({
                                    "position": pos,
                                    "history": history_json(&sys, h),
                                })),
                            })
                        );
                        eprintln!("line {line}: {}", if v.holds { "holds" } else { "fails" });
                    }
                    Err(CheckError::FreeVariables(vars)) => {
                        return fail(format!(
                            "line {line}: unbound variable(s) {vars:?}; use --bind"
                        ))
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(if all_hold { Outcome::Pass } else { Outcome::Fail })
        }
        Command::ComputePredicate {
            family,
            n_max,
            spec,
            budgets,
        } => {
            let file: FamilyFile = serde_json::from_str(&fs::read_to_string(&family)?)?;
            let fam = file.into_family()?;
            let table = computed_predicate_table(
                &fam,
                n_max,
                EmergenceBudgets {
                    node_budget: budgets.nodes,
                    ..EmergenceBudgets::default()
                },
            )?;
            print!("{}", table.to_csv());
            let Some(spec_path) = spec else {
                eprintln!("{} table rows, no spec given", table.rows.len());
                return Ok(Outcome::Pass);
            };
            let mut spec_map = BTreeMap::new();
            for (no, line) in fs::read_to_string(&spec_path)?.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (gamma, formula) = line
                    .split_once(':')
                    .ok_or_else(|| format!("{}:{}: expected `signal: formula`", spec_path.display(), no + 1))?;
                spec_map.insert(gamma.trim().to_string(), parse_presburger(formula)?);
            }
            let report = check_semilinear_spec(&table, &spec_map, budgets.quantifier_bound)?;
            eprintln!(
                "{} rows, {} mismatches, {} inconclusive",
                table.rows.len(),
                report.mismatches.len(),
                report.inconclusive.len()
            );
            for (y, why) in &report.mismatches {
                eprintln!("mismatch at {y:?}: {why}");
            }
            for (y, why) in &report.inconclusive {
                eprintln!("inconclusive at {y:?}: {why}");
            }
            if !report.mismatches.is_empty() {
                Ok(Outcome::Fail)
            } else if !report.inconclusive.is_empty() {
                Ok(Outcome::Inconclusive)
            } else {
                Ok(Outcome::Pass)
            }
        }
        Command::ExportGraph { system, budgets } => {
            let sys = load_system(&system)?;
            let graph = build_graph(&sys, budgets.nodes)?;
            let nodes: Vec<Value> = graph
                .nodes
                .iter()
                .map(|c| {
                    Value::Array(
                        (0..sys.agent_count())
                            .map(|a| Value::String(sys.states[c.state_of(a)].clone()))
                            .collect(),
                    )
                })
                .collect();
            let adjacency: Vec<Vec<Value>> = graph
                .edges
                .iter()
                .map(|out| {
                    out.iter()
                        .map(|e| {
                            json!({
                                "target": e.target,
                                "entry": sys.transitions[e.entry].id,
                            })
                        })
                        .collect()
                })
                .collect();
            println!(
                "{}",
                json!({ "root": graph.root, "nodes": nodes, "adjacency": adjacency })
            );
            eprintln!(
                "{} nodes, {} edges",
                graph.node_count(),
                graph.edge_count()
            );
            Ok(Outcome::Pass)
        }
    }
}

fn fail(msg: impl Display) -> Result<Outcome, Box<dyn std::error::Error>> {
    eprintln!("{msg}");
    Ok(Outcome::Fail)
}

fn load_system(path: &PathBuf) -> Result<MemorySystem, Box<dyn std::error::Error>> {
    Ok(memsys::loader::from_path(path)?)
}

fn history_json(sys: &MemorySystem, h: &History) -> Value {
    let kind = match h.kind {
        HistoryKind::FiniteMaximal => "finite_maximal",
        HistoryKind::Lasso => "lasso",
        HistoryKind::Prefix => "prefix",
    };
    json!({
        "kind": kind,
        "lasso_start": h.lasso_start,
        "configs": h.configs.iter().map(|c| {
            (0..sys.agent_count())
                .map(|a| sys.states[c.state_of(a)].clone())
                .collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
        "labels": h.labels.iter().map(|&l| sys.transitions[l].id.clone()).collect::<Vec<_>>(),
    })
}
