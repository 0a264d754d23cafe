//! Random small systems and sentences for differential testing against the
//! brute-force oracles. Everything is driven by a caller-supplied RNG so
//! failures are reproducible from a seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::logic::Formula;
use crate::system::{MemorySystem, RawTransition};

/// Bounds for [`random_system`]. The defaults match the differential-test
/// envelope: at most 3 agents, 2 states, 2 signals, and 6 transition entries.
#[derive(Debug, Clone, Copy)]
pub struct GenLimits {
    pub max_agents: usize,
    pub max_states: usize,
    pub max_signals: usize,
    pub max_entries: usize,
}

impl Default for GenLimits {
    fn default() -> Self {
        GenLimits {
            max_agents: 3,
            max_states: 2,
            max_signals: 2,
            max_entries: 6,
        }
    }
}

/// Draws a well-formed random system within the limits. Guards are built
/// from the exact sizes of the chosen neighbourhoods, so every generated
/// system passes validation.
pub fn random_system<R: Rng>(rng: &mut R, limits: GenLimits) -> MemorySystem {
    let n_agents = rng.gen_range(1..=limits.max_agents);
    let n_states = rng.gen_range(1..=limits.max_states);
    let n_signals = rng.gen_range(1..=limits.max_signals);

    let states: Vec<String> = (0..n_states).map(|i| format!("q{i}")).collect();
    let signals: Vec<String> = (0..n_signals).map(|i| format!("s{i}")).collect();
    let agent_names: Vec<String> = (1..=n_agents).map(|i| i.to_string()).collect();

    let signal_of: BTreeMap<String, String> = states
        .iter()
        .map(|q| (q.clone(), signals[rng.gen_range(0..n_signals)].clone()))
        .collect();

    // Distinct nonempty agent subsets as neighbourhoods.
    let mut subsets: Vec<Vec<usize>> = (1..(1usize << n_agents))
        .map(|mask| (0..n_agents).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.shuffle(rng);
    let n_nbhds = rng.gen_range(1..=subsets.len().min(3));
    let neighbourhoods: Vec<(String, Vec<String>)> = subsets[..n_nbhds]
        .iter()
        .enumerate()
        .map(|(i, members)| {
            (
                format!("I{i}"),
                members.iter().map(|&a| agent_names[a].clone()).collect(),
            )
        })
        .collect();

    let n_entries = rng.gen_range(1..=limits.max_entries);
    let mut transitions = Vec::new();
    for e in 0..n_entries {
        let nb = rng.gen_range(0..n_nbhds);
        let size = neighbourhoods[nb].1.len() as u32;
        // Random composition of the neighbourhood size over the signals.
        let mut guard = vec![0u32; n_signals];
        for _ in 0..size {
            guard[rng.gen_range(0..n_signals)] += 1;
        }
        // Random partial rule over (signal, state) keys.
        let mut rule = Vec::new();
        for g in 0..n_signals {
            for q in 0..n_states {
                if rng.gen_bool(0.6) {
                    rule.push((
                        signals[g].clone(),
                        states[q].clone(),
                        states[rng.gen_range(0..n_states)].clone(),
                    ));
                }
            }
        }
        transitions.push(RawTransition {
            id: format!("t{e}"),
            neighbourhood: format!("I{nb}"),
            guard,
            rule,
        });
    }

    let initial: BTreeMap<String, String> = agent_names
        .iter()
        .map(|a| (a.clone(), states[rng.gen_range(0..n_states)].clone()))
        .collect();

    MemorySystem::from_parts(
        states,
        signals,
        &signal_of,
        agent_names,
        neighbourhoods,
        transitions,
        &initial,
    )
    .expect("generated system is well-formed by construction")
}

/// Draws a closed sentence over the given system with temporal depth at
/// most `depth` and counting thresholds at most the agent count.
pub fn random_sentence<R: Rng>(rng: &mut R, sys: &MemorySystem, depth: usize) -> Formula {
    random_formula(rng, sys, depth, &mut Vec::new())
}

fn random_formula<R: Rng>(
    rng: &mut R,
    sys: &MemorySystem,
    depth: usize,
    bound_vars: &mut Vec<String>,
) -> Formula {
    let atom_only = depth == 0;
    let choice = if atom_only {
        rng.gen_range(0..3)
    } else {
        rng.gen_range(0..10)
    };
    match choice {
        // Atoms: signal@term, term = term, term in I.
        0 => Formula::At(
            sys.signals[rng.gen_range(0..sys.signals.len())].clone(),
            random_term(rng, sys, bound_vars),
        ),
        1 => Formula::Eq(
            random_term(rng, sys, bound_vars),
            random_term(rng, sys, bound_vars),
        ),
        2 => {
            let nb = &sys.neighbourhoods[rng.gen_range(0..sys.neighbourhoods.len())];
            Formula::In(random_term(rng, sys, bound_vars), nb.name.clone())
        }
        3 => random_formula(rng, sys, depth - 1, bound_vars).not(),
        4 => Formula::or(
            random_formula(rng, sys, depth - 1, bound_vars),
            random_formula(rng, sys, depth - 1, bound_vars),
        ),
        5 => Formula::Prev(Box::new(random_formula(rng, sys, depth - 1, bound_vars))),
        6 => Formula::Next(Box::new(random_formula(rng, sys, depth - 1, bound_vars))),
        7 => Formula::Once(Box::new(random_formula(rng, sys, depth - 1, bound_vars))),
        8 => Formula::Eventually(Box::new(random_formula(rng, sys, depth - 1, bound_vars))),
        _ => {
            let var = format!("v{}", bound_vars.len());
            bound_vars.push(var.clone());
            let body = random_formula(rng, sys, depth - 1, bound_vars);
            bound_vars.pop();
            let ops = [
                crate::logic::CountOp::Eq,
                crate::logic::CountOp::Ne,
                crate::logic::CountOp::Lt,
                crate::logic::CountOp::Le,
                crate::logic::CountOp::Gt,
                crate::logic::CountOp::Ge,
            ];
            Formula::Count(
                var,
                Box::new(body),
                ops[rng.gen_range(0..ops.len())],
                rng.gen_range(0..=sys.agent_count() as u32),
            )
        }
    }
}

fn random_term<R: Rng>(
    rng: &mut R,
    sys: &MemorySystem,
    bound_vars: &[String],
) -> crate::logic::AgentTerm {
    if !bound_vars.is_empty() && rng.gen_bool(0.5) {
        crate::logic::AgentTerm::Name(bound_vars[rng.gen_range(0..bound_vars.len())].clone())
    } else {
        crate::logic::AgentTerm::Agent(rng.gen_range(0..sys.agent_count()))
    }
}
