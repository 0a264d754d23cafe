//! Built-in pedagogical systems used throughout the tests and docs.

use std::collections::BTreeMap;

use crate::system::{MemorySystem, RawTransition};

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn raw(id: &str, nbhd: &str, guard: Vec<u32>, rule: &[(&str, &str, &str)]) -> RawTransition {
    RawTransition {
        id: id.to_string(),
        neighbourhood: nbhd.to_string(),
        guard,
        rule: rule
            .iter()
            .map(|(g, q, q2)| (g.to_string(), q.to_string(), q2.to_string()))
            .collect(),
    }
}

/// Three agents in a single neighbourhood running the good/bad majority rule:
/// more than half signalling x moves everyone in the neighbourhood to x.
/// Initially (G, G, B).
pub fn maj1() -> MemorySystem {
    let signal_of: BTreeMap<String, String> =
        [("G", "g"), ("B", "b")].map(|(k, v)| (k.into(), v.into())).into();
    let initial: BTreeMap<String, String> =
        [("1", "G"), ("2", "G"), ("3", "B")].map(|(k, v)| (k.into(), v.into())).into();
    MemorySystem::from_parts(
        strs(&["G", "B"]),
        strs(&["g", "b"]),
        &signal_of,
        strs(&["1", "2", "3"]),
        vec![("I".into(), strs(&["1", "2", "3"]))],
        vec![
            raw("maj-3g-0b", "I", vec![3, 0], &[("g", "G", "G")]),
            raw("maj-2g-1b", "I", vec![2, 1], &[("g", "G", "G"), ("b", "B", "G")]),
            raw("maj-1g-2b", "I", vec![1, 2], &[("g", "G", "B"), ("b", "B", "B")]),
            raw("maj-0g-3b", "I", vec![0, 3], &[("b", "B", "B")]),
        ],
        &initial,
    )
    .expect("maj1 fixture is well-formed")
}

/// Two evenly matched agents: the only rule is the tie identity, so (G, B)
/// loops forever and neither signal ever dominates.
pub fn even2() -> MemorySystem {
    let signal_of: BTreeMap<String, String> =
        [("G", "g"), ("B", "b")].map(|(k, v)| (k.into(), v.into())).into();
    let initial: BTreeMap<String, String> =
        [("1", "G"), ("2", "B")].map(|(k, v)| (k.into(), v.into())).into();
    MemorySystem::from_parts(
        strs(&["G", "B"]),
        strs(&["g", "b"]),
        &signal_of,
        strs(&["1", "2"]),
        vec![("I".into(), strs(&["1", "2"]))],
        vec![raw("even-1-1", "I", vec![1, 1], &[("g", "G", "G"), ("b", "B", "B")])],
        &initial,
    )
    .expect("even2 fixture is well-formed")
}

/// Predatory pairwise system: only mixed pairs may interact, and in a mixed
/// pair the b side always wins, so b spreads despite the initial g majority.
pub fn pred3() -> MemorySystem {
    let signal_of: BTreeMap<String, String> =
        [("G", "g"), ("B", "b")].map(|(k, v)| (k.into(), v.into())).into();
    let initial: BTreeMap<String, String> =
        [("1", "G"), ("2", "G"), ("3", "B")].map(|(k, v)| (k.into(), v.into())).into();
    let pairs = [("I12", &["1", "2"]), ("I13", &["1", "3"]), ("I23", &["2", "3"])];
    let mut transitions = Vec::new();
    for (name, _) in &pairs {
        let tag = &name[1..];
        transitions.push(raw(
            &format!("pred-{tag}-1-1"),
            name,
            vec![1, 1],
            &[("g", "G", "B"), ("b", "B", "B")],
        ));
        transitions.push(raw(
            &format!("pred-{tag}-0-2"),
            name,
            vec![0, 2],
            &[("b", "B", "B")],
        ));
    }
    MemorySystem::from_parts(
        strs(&["G", "B"]),
        strs(&["g", "b"]),
        &signal_of,
        strs(&["1", "2", "3"]),
        pairs
            .iter()
            .map(|(name, members)| (name.to_string(), strs(*members)))
            .collect(),
        transitions,
        &initial,
    )
    .expect("pred3 fixture is well-formed")
}

/// Majority variant without the uniform-guard self-loop entries; the all-G
/// configuration becomes a deadlock.
pub fn maj1_without_uniform_entries() -> MemorySystem {
    let mut sys = maj1();
    sys.transitions
        .retain(|t| t.id != "maj-3g-0b" && t.id != "maj-0g-3b");
    sys
}
