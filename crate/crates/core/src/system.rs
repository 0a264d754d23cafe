//! Core data model for memory systems: states, signals, neighbourhoods,
//! distribution-guarded transitions, and the single-step semantics.

use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Error raised while assembling a system from raw parts.
#[derive(Debug, Error)]
pub enum SystemError {
    #[error("empty {0} set")]
    EmptySet(&'static str),
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("initial state map is not total: missing agent `{0}`")]
    PartialInitial(String),
    #[error("signalling function is not total: missing state `{0}`")]
    PartialSignalOf(String),
    #[error("neighbourhood `{0}` is empty")]
    EmptyNeighbourhood(String),
}

#[derive(Debug, Error)]
#[error("transition `{entry}` is not enabled at this configuration")]
pub struct NotEnabled {
    pub entry: String,
}

/// Count vector of signals emitted inside one neighbourhood, indexed by the
/// signal alphabet order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution(pub Vec<u32>);

impl Distribution {
    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// A named nonempty subset of agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighbourhood {
    pub name: String,
    /// Sorted agent indices (0-based).
    pub members: Vec<usize>,
}

/// One element of the transition family: a neighbourhood, a distribution
/// guard, and a deterministic per-agent (signal, state) -> state rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionEntry {
    pub id: String,
    pub neighbourhood: usize,
    pub guard: Distribution,
    /// Sorted by (signal, state) key. Duplicate keys are reported by the
    /// validator; application uses the first match.
    pub rule: Vec<((usize, usize), usize)>,
}

impl TransitionEntry {
    pub fn rule_target(&self, signal: usize, state: usize) -> Option<usize> {
        self.rule
            .iter()
            .find(|((g, q), _)| *g == signal && *q == state)
            .map(|(_, q2)| *q2)
    }
}

/// Global state: one memory state per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(pub Vec<u16>);

impl Configuration {
    pub fn state_of(&self, agent: usize) -> usize {
        self.0[agent] as usize
    }
}

/// A memory system (Q, delta, iota, omega) over agents N, neighbourhoods C,
/// and signal alphabet Gamma. Immutable after construction; all operations
/// are pure functions of their inputs.
#[derive(Debug, Clone)]
pub struct MemorySystem {
    /// State names Q.
    pub states: Vec<String>,
    /// Signal names, order fixed: it indexes distribution vectors.
    pub signals: Vec<String>,
    /// omega: state index -> signal index.
    pub signal_of: Vec<usize>,
    /// External agent names; agents are canonically 0..n-1 internally.
    pub agent_names: Vec<String>,
    pub neighbourhoods: Vec<Neighbourhood>,
    /// Sorted by entry id.
    pub transitions: Vec<TransitionEntry>,
    /// iota: agent index -> state index.
    pub initial: Vec<usize>,
}

/// Subclass classification of a system (section-level structure only; the
/// memory update rules are unconstrained).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SubclassFlags {
    /// All neighbourhoods have exactly two members.
    pub pairwise: bool,
    /// Equal-size neighbourhoods carry identical (guard, rule) sets.
    pub size_based: bool,
    /// All neighbourhoods are downward-closed in the canonical agent order.
    pub hierarchy: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub flags: SubclassFlags,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl MemorySystem {
    /// Assembles a system from name-based parts, canonically renaming agents
    /// and sorting transition entries by id.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        states: Vec<String>,
        signals: Vec<String>,
        signal_of: &BTreeMap<String, String>,
        agent_names: Vec<String>,
        neighbourhoods: Vec<(String, Vec<String>)>,
        transitions: Vec<RawTransition>,
        initial: &BTreeMap<String, String>,
    ) -> Result<Self, SystemError> {
        if states.is_empty() {
            return Err(SystemError::EmptySet("state"));
        }
        if signals.is_empty() {
            return Err(SystemError::EmptySet("signal"));
        }
        if agent_names.is_empty() {
            return Err(SystemError::EmptySet("agent"));
        }
        if neighbourhoods.is_empty() {
            return Err(SystemError::EmptySet("neighbourhood"));
        }
        let state_idx = index_of("state", &states)?;
        let signal_idx = index_of("signal", &signals)?;
        let agent_idx = index_of("agent", &agent_names)?;

        let mut omega = Vec::with_capacity(states.len());
        for q in &states {
            let gamma = signal_of
                .get(q)
                .ok_or_else(|| SystemError::PartialSignalOf(q.clone()))?;
            omega.push(lookup(&signal_idx, "signal", gamma)?);
        }

        let mut nbhds = Vec::with_capacity(neighbourhoods.len());
        for (name, members) in neighbourhoods {
            if members.is_empty() {
                return Err(SystemError::EmptyNeighbourhood(name));
            }
            let mut idx: Vec<usize> = members
                .iter()
                .map(|a| lookup(&agent_idx, "agent", a))
                .collect::<Result<_, _>>()?;
            idx.sort_unstable();
            idx.dedup();
            nbhds.push(Neighbourhood { name, members: idx });
        }
        let nbhd_idx: BTreeMap<&str, usize> = nbhds
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();

        let mut entries = Vec::with_capacity(transitions.len());
        for t in transitions {
            let nb = *nbhd_idx
                .get(t.neighbourhood.as_str())
                .ok_or_else(|| SystemError::UnknownName {
                    kind: "neighbourhood",
                    name: t.neighbourhood.clone(),
                })?;
            let mut rule = Vec::with_capacity(t.rule.len());
            for (g, q, q2) in &t.rule {
                rule.push((
                    (
                        lookup(&signal_idx, "signal", g)?,
                        lookup(&state_idx, "state", q)?,
                    ),
                    lookup(&state_idx, "state", q2)?,
                ));
            }
            rule.sort();
            entries.push(TransitionEntry {
                id: t.id,
                neighbourhood: nb,
                guard: Distribution(t.guard),
                rule,
            });
        }
        entries.sort_by(|a, b| a.id.cmp(&b.id));

        let mut iota = Vec::with_capacity(agent_names.len());
        for a in &agent_names {
            let q = initial
                .get(a)
                .ok_or_else(|| SystemError::PartialInitial(a.clone()))?;
            iota.push(lookup(&state_idx, "state", q)?);
        }

        Ok(MemorySystem {
            states,
            signals,
            signal_of: omega,
            agent_names,
            neighbourhoods: nbhds,
            transitions: entries,
            initial: iota,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.agent_names.len()
    }

    pub fn signal_of_state(&self, state: usize) -> usize {
        self.signal_of[state]
    }

    pub fn neighbourhood_named(&self, name: &str) -> Option<usize> {
        self.neighbourhoods.iter().position(|n| n.name == name)
    }

    pub fn transition_named(&self, id: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t.id == id)
    }

    /// The initial configuration chi_0 induced by iota.
    pub fn initial_configuration(&self) -> Configuration {
        Configuration(self.initial.iter().map(|&q| q as u16).collect())
    }

    /// Signal distribution induced by omega(chi) restricted to neighbourhood I.
    pub fn distribution_of(&self, chi: &Configuration, nbhd: usize) -> Distribution {
        let mut counts = vec![0u32; self.signals.len()];
        for &agent in &self.neighbourhoods[nbhd].members {
            counts[self.signal_of[chi.state_of(agent)]] += 1;
        }
        Distribution(counts)
    }

    /// Entries enabled at chi, in id order (transitions are id-sorted).
    pub fn enabled_transitions(&self, chi: &Configuration) -> Vec<usize> {
        let dists: Vec<Distribution> = (0..self.neighbourhoods.len())
            .map(|i| self.distribution_of(chi, i))
            .collect();
        self.transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| dists[t.neighbourhood] == t.guard)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_enabled(&self, chi: &Configuration, entry: usize) -> bool {
        let t = &self.transitions[entry];
        self.distribution_of(chi, t.neighbourhood) == t.guard
    }

    /// Applies an enabled entry: agents in I with a matching (signal, state)
    /// rule move to its target; everyone else keeps their state.
    pub fn apply_transition(
        &self,
        chi: &Configuration,
        entry: usize,
    ) -> Result<Configuration, NotEnabled> {
        if !self.is_enabled(chi, entry) {
            return Err(NotEnabled {
                entry: self.transitions[entry].id.clone(),
            });
        }
        let t = &self.transitions[entry];
        let mut next = chi.clone();
        for &agent in &self.neighbourhoods[t.neighbourhood].members {
            let q = chi.state_of(agent);
            let gamma = self.signal_of[q];
            if let Some(q2) = t.rule_target(gamma, q) {
                next.0[agent] = q2 as u16;
            }
        }
        Ok(next)
    }

    /// True when every agent in `agents` emits `signal` at chi.
    pub fn uniform_on(&self, chi: &Configuration, signal: usize, agents: &[usize]) -> bool {
        agents
            .iter()
            .all(|&a| self.signal_of[chi.state_of(a)] == signal)
    }

    /// The uniform signal over all agents at chi, if there is one.
    pub fn uniform_signal(&self, chi: &Configuration) -> Option<usize> {
        let first = self.signal_of[chi.state_of(0)];
        if (1..self.agent_count()).all(|a| self.signal_of[chi.state_of(a)] == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Checks Def.-1 well-formedness and classifies subclass structure.
    /// Violations are reported, never raised.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        if self.agent_count() <= 2 {
            report.warnings.push(format!(
                "population size {} violates the standing assumption |N| > 2",
                self.agent_count()
            ));
        }

        let mut seen_nbhd: BTreeMap<&[usize], &str> = BTreeMap::new();
        for nb in &self.neighbourhoods {
            if let Some(prev) = seen_nbhd.insert(&nb.members, &nb.name) {
                report.violations.push(format!(
                    "duplicate neighbourhood: `{}` and `{}` have the same members",
                    prev, nb.name
                ));
            }
        }

        let mut seen_ids: BTreeSet<&str> = BTreeSet::new();
        for t in &self.transitions {
            if !seen_ids.insert(&t.id) {
                report
                    .violations
                    .push(format!("duplicate transition id `{}`", t.id));
            }
            if t.guard.0.len() != self.signals.len() {
                report.violations.push(format!(
                    "entry `{}`: guard has {} components, expected {}",
                    t.id,
                    t.guard.0.len(),
                    self.signals.len()
                ));
                continue;
            }
            let size = self.neighbourhoods[t.neighbourhood].members.len() as u32;
            if t.guard.total() != size {
                report.violations.push(format!(
                    "entry `{}`: guard/neighbourhood size mismatch (guard sums to {}, |{}| = {})",
                    t.id,
                    t.guard.total(),
                    self.neighbourhoods[t.neighbourhood].name,
                    size
                ));
            }
            let mut keys = BTreeSet::new();
            for ((g, q), _) in &t.rule {
                if !keys.insert((*g, *q)) {
                    report.violations.push(format!(
                        "entry `{}`: duplicate rule for (signal `{}`, state `{}`)",
                        t.id, self.signals[*g], self.states[*q]
                    ));
                }
            }
        }

        report.flags = self.subclass_flags();
        report
    }

    fn subclass_flags(&self) -> SubclassFlags {
        let pairwise = self.neighbourhoods.iter().all(|n| n.members.len() == 2);

        // Size-based: any two equal-size neighbourhoods carry the same
        // (guard, rule) multiset.
        let mut by_size: BTreeMap<usize, Vec<BTreeSet<(Vec<u32>, Vec<((usize, usize), usize)>)>>> =
            BTreeMap::new();
        for (i, nb) in self.neighbourhoods.iter().enumerate() {
            let set: BTreeSet<_> = self
                .transitions
                .iter()
                .filter(|t| t.neighbourhood == i)
                .map(|t| (t.guard.0.clone(), t.rule.clone()))
                .collect();
            by_size.entry(nb.members.len()).or_default().push(set);
        }
        let size_based = by_size
            .values()
            .all(|sets| sets.windows(2).all(|w| w[0] == w[1]));

        SubclassFlags {
            pairwise,
            size_based,
            hierarchy: self.is_hierarchy(&(0..self.agent_count()).collect::<Vec<_>>()),
        }
    }

    /// True when every neighbourhood is downward-closed with respect to the
    /// supplied agent order (`order[0]` is the least element).
    pub fn is_hierarchy(&self, order: &[usize]) -> bool {
        let mut rank = vec![usize::MAX; self.agent_count()];
        for (r, &a) in order.iter().enumerate() {
            if a < rank.len() {
                rank[a] = r;
            }
        }
        self.neighbourhoods.iter().all(|nb| {
            let max_rank = nb.members.iter().map(|&a| rank[a]).max().unwrap_or(0);
            (0..self.agent_count()).all(|a| rank[a] > max_rank || nb.members.contains(&a))
        })
    }
}

/// Name-based transition description, as it appears in system files.
#[derive(Debug, Clone)]
pub struct RawTransition {
    pub id: String,
    pub neighbourhood: String,
    pub guard: Vec<u32>,
    pub rule: Vec<(String, String, String)>,
}

fn index_of<'a>(
    kind: &'static str,
    names: &'a [String],
) -> Result<BTreeMap<&'a str, usize>, SystemError> {
    let mut map = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.as_str(), i).is_some() {
            return Err(SystemError::DuplicateName {
                kind,
                name: n.clone(),
            });
        }
    }
    Ok(map)
}

fn lookup(map: &BTreeMap<&str, usize>, kind: &'static str, name: &str) -> Result<usize, SystemError> {
    map.get(name).copied().ok_or_else(|| SystemError::UnknownName {
        kind,
        name: name.to_string(),
    })
}
