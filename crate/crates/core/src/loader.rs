//! JSON (de)serialization of memory systems.
//!
//! The on-disk schema is deliberately name-based: states, signals and agents
//! are strings, and transitions refer to neighbourhoods by name. Unknown
//! fields are rejected so that typos surface as load errors.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::system::{MemorySystem, RawTransition, SystemError};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("agent count must be positive")]
    NoAgents,
}

/// Agents are given either as a count (names become "1".."n") or as an
/// explicit list of names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AgentsField {
    Count(usize),
    Names(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub states: Vec<String>,
    pub signals: Vec<String>,
    /// state name -> signal name
    pub signal_of: BTreeMap<String, String>,
    pub agents: AgentsField,
    /// neighbourhood name -> agent names
    pub neighbourhoods: BTreeMap<String, Vec<String>>,
    pub transitions: Vec<TransitionFile>,
    /// agent name -> state name
    pub initial: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionFile {
    pub id: String,
    pub neighbourhood: String,
    /// Signal distribution, indexed like `signals`.
    pub guard: Vec<u32>,
    /// Triples (signal, source state, target state).
    pub rule: Vec<(String, String, String)>,
}

impl SystemFile {
    pub fn agent_names(&self) -> Result<Vec<String>, LoadError> {
        match &self.agents {
            AgentsField::Count(0) => Err(LoadError::NoAgents),
            AgentsField::Count(n) => Ok((1..=*n).map(|i| i.to_string()).collect()),
            AgentsField::Names(names) if names.is_empty() => Err(LoadError::NoAgents),
            AgentsField::Names(names) => Ok(names.clone()),
        }
    }

    pub fn into_system(self) -> Result<MemorySystem, LoadError> {
        let agent_names = self.agent_names()?;
        let neighbourhoods = self
            .neighbourhoods
            .iter()
            .map(|(name, members)| (name.clone(), members.clone()))
            .collect();
        let transitions = self
            .transitions
            .into_iter()
            .map(|t| RawTransition {
                id: t.id,
                neighbourhood: t.neighbourhood,
                guard: t.guard,
                rule: t.rule,
            })
            .collect();
        Ok(MemorySystem::from_parts(
            self.states,
            self.signals,
            &self.signal_of,
            agent_names,
            neighbourhoods,
            transitions,
            &self.initial,
        )?)
    }
}

/// Serializes a system back to the file schema.
pub fn to_file(sys: &MemorySystem) -> SystemFile {
    SystemFile {
        states: sys.states.clone(),
        signals: sys.signals.clone(),
        signal_of: sys
            .states
            .iter()
            .zip(&sys.signal_of)
            .map(|(s, &g)| (s.clone(), sys.signals[g].clone()))
            .collect(),
        agents: AgentsField::Names(sys.agent_names.clone()),
        neighbourhoods: sys
            .neighbourhoods
            .iter()
            .map(|n| {
                (
                    n.name.clone(),
                    n.members.iter().map(|&a| sys.agent_names[a].clone()).collect(),
                )
            })
            .collect(),
        transitions: sys
            .transitions
            .iter()
            .map(|t| TransitionFile {
                id: t.id.clone(),
                neighbourhood: sys.neighbourhoods[t.neighbourhood].name.clone(),
                guard: t.guard.0.clone(),
                rule: t
                    .rule
                    .iter()
                    .map(|&((g, q), q2)| {
                        (
                            sys.signals[g].clone(),
                            sys.states[q].clone(),
                            sys.states[q2].clone(),
                        )
                    })
                    .collect(),
            })
            .collect(),
        initial: sys
            .agent_names
            .iter()
            .zip(&sys.initial)
            .map(|(a, &q)| (a.clone(), sys.states[q as usize].clone()))
            .collect(),
    }
}

pub fn from_str(text: &str) -> Result<MemorySystem, LoadError> {
    let file: SystemFile = serde_json::from_str(text)?;
    file.into_system()
}

pub fn from_path(path: &Path) -> Result<MemorySystem, LoadError> {
    from_str(&std::fs::read_to_string(path)?)
}

pub fn to_string_pretty(sys: &MemorySystem) -> String {
    serde_json::to_string_pretty(&to_file(sys)).expect("system file serializes")
}
