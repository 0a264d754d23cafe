//! Deciding emergence of collective memory: enumeration of the fair terminal
//! classes (the sets of configurations realizable as the infinitely-visited
//! set of a spanning history), the exact verdict with counterexample
//! extraction, and an independent brute-force oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use thiserror::Error;

use crate::graph::{build_graph, ConfigurationGraph, GraphError, History};
use crate::system::MemorySystem;

/// Which reading of the spanning (fairness) condition to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FairnessMode {
    /// Every transition entry that is infinitely often enabled fires
    /// infinitely often (default, strongest reading).
    #[default]
    Entry,
    /// Every neighbourhood with some infinitely often enabled entry
    /// interacts infinitely often (weaker reading).
    Neighbourhood,
    /// The union of neighbourhoods interacting along the history covers all
    /// of N (weakest reading).
    SpanAgents,
}

#[derive(Debug, Error)]
pub enum EmergenceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("class budget {budget} exceeded while enumerating fairness-closed subsets")]
    ClassBudgetExceeded { budget: usize },
    #[error("component too large for subset enumeration ({nodes} nodes / {labels} labels; limit 60)")]
    ComponentTooLarge { nodes: usize, labels: usize },
    #[error("span fairness supports at most 60 agents, system has {0}")]
    TooManyAgents(usize),
    #[error("lasso bound {bound} too small to cover all cycles")]
    LassoBoundInsufficient { bound: usize },
}

/// A set of configurations realizable as the inf-set of a spanning infinite
/// history, together with internal edges discharging its fairness
/// obligations and the uniform signal (if any) it stabilizes to.
#[derive(Debug, Clone)]
pub struct FairTerminalClass {
    pub nodes: Vec<usize>,
    /// (source, entry, target) edges inside the class.
    pub witness_edges: Vec<(usize, usize, usize)>,
    pub stable_signal: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct EmergenceVerdict {
    pub supports: bool,
    pub classes: Vec<FairTerminalClass>,
    /// A spanning lasso with no stable signal, or a finite maximal history
    /// ending in a non-uniform deadlock.
    pub counterexample: Option<History>,
}

#[derive(Debug, Clone, Copy)]
pub struct EmergenceBudgets {
    pub node_budget: usize,
    pub class_budget: usize,
}

impl Default for EmergenceBudgets {
    fn default() -> Self {
        EmergenceBudgets {
            node_budget: 100_000,
            class_budget: 1_000_000,
        }
    }
}

/// All fair terminal classes of a fully-built graph, in deterministic order.
///
/// Realization: a candidate must lie inside one SCC of G, be strongly
/// connected via its internal edges, contain at least one edge, and (in the
/// entry/neighbourhood modes) serve every obligation inside itself. The
/// enumeration over subsets is exponential in the SCC size and guarded by
/// `class_budget`.
pub fn fair_terminal_classes(
    sys: &MemorySystem,
    graph: &ConfigurationGraph,
    mode: FairnessMode,
    class_budget: usize,
) -> Result<Vec<FairTerminalClass>, EmergenceError> {
    if mode == FairnessMode::SpanAgents && sys.agent_count() > 60 {
        return Err(EmergenceError::TooManyAgents(sys.agent_count()));
    }
    let mut classes = Vec::new();
    let mut examined = 0usize;
    for scc in graph.scc_decomposition() {
        let nodes = &scc.nodes;
        // Internal edges of the SCC and the labels occurring on them.
        let mut labels = BTreeSet::new();
        for &v in nodes {
            for e in &graph.edges[v] {
                if nodes.binary_search(&e.target).is_ok() {
                    labels.insert(e.entry);
                }
            }
        }
        if nodes.len() > 60 || labels.len() > 60 {
            return Err(EmergenceError::ComponentTooLarge {
                nodes: nodes.len(),
                labels: labels.len(),
            });
        }
        if labels.is_empty() {
            continue; // no internal edge, no infinite run stays here
        }
        let count = nodes.len();
        for mask in 1u64..(1u64 << count) {
            examined += 1;
            if examined > class_budget {
                return Err(EmergenceError::ClassBudgetExceeded {
                    budget: class_budget,
                });
            }
            let subset: Vec<usize> = (0..count)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| nodes[i])
                .collect();
            if let Some(class) = qualify_subset(sys, graph, &subset, mode) {
                classes.push(class);
            }
        }
    }
    Ok(classes)
}

/// Checks whether `subset` (sorted) qualifies as a fair terminal class.
fn qualify_subset(
    sys: &MemorySystem,
    graph: &ConfigurationGraph,
    subset: &[usize],
    mode: FairnessMode,
) -> Option<FairTerminalClass> {
    let inside = |v: usize| subset.binary_search(&v).is_ok();
    let internal: Vec<(usize, usize, usize)> = subset
        .iter()
        .flat_map(|&v| {
            graph.edges[v]
                .iter()
                .filter(|e| inside(e.target))
                .map(move |e| (v, e.entry, e.target))
        })
        .collect();
    if internal.is_empty() {
        return None;
    }
    if !strongly_connected(subset, &internal) {
        return None;
    }
    match mode {
        FairnessMode::Entry => {
            let served: BTreeSet<usize> = internal.iter().map(|&(_, e, _)| e).collect();
            for &v in subset {
                for e in &graph.edges[v] {
                    if !served.contains(&e.entry) {
                        return None;
                    }
                }
            }
        }
        FairnessMode::Neighbourhood => {
            let served: BTreeSet<usize> = internal
                .iter()
                .map(|&(_, e, _)| sys.transitions[e].neighbourhood)
                .collect();
            for &v in subset {
                for e in &graph.edges[v] {
                    if !served.contains(&sys.transitions[e.entry].neighbourhood) {
                        return None;
                    }
                }
            }
        }
        FairnessMode::SpanAgents => {
            if covering_stem(sys, graph, subset, &internal).is_none() {
                return None;
            }
        }
    }
    let mut stable = sys.uniform_signal(&graph.nodes[subset[0]]);
    for &v in &subset[1..] {
        if stable.is_none() {
            break;
        }
        if sys.uniform_signal(&graph.nodes[v]) != stable {
            stable = None;
        }
    }
    Some(FairTerminalClass {
        nodes: subset.to_vec(),
        witness_edges: internal,
        stable_signal: stable,
    })
}

fn strongly_connected(subset: &[usize], internal: &[(usize, usize, usize)]) -> bool {
    let pos: BTreeMap<usize, usize> = subset.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = subset.len();
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for &(u, _, v) in internal {
        fwd[pos[&u]].push(pos[&v]);
        bwd[pos[&v]].push(pos[&u]);
    }
    let reach = |adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    reach(&fwd) && reach(&bwd)
}

/// For span fairness: a stem from the root to `subset` such that stem
/// neighbourhoods plus internal neighbourhoods cover all agents. Returns the
/// stem as (nodes, labels) ending at a subset member.
fn covering_stem(
    sys: &MemorySystem,
    graph: &ConfigurationGraph,
    subset: &[usize],
    internal: &[(usize, usize, usize)],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut covered = 0u64;
    for &(_, e, _) in internal {
        for &a in &sys.neighbourhoods[sys.transitions[e].neighbourhood].members {
            covered |= 1 << a;
        }
    }
    let all = if sys.agent_count() == 64 {
        u64::MAX
    } else {
        (1u64 << sys.agent_count()) - 1
    };
    let missing = all & !covered;
    // BFS over (node, subset of `missing` covered so far).
    let mut parent: HashMap<(usize, u64), (usize, u64, usize)> = HashMap::new();
    let start = (graph.root, 0u64);
    let mut queue = VecDeque::from([start]);
    let mut seen = BTreeSet::from([start]);
    let inside = |v: usize| subset.binary_search(&v).is_ok();
    while let Some((v, got)) = queue.pop_front() {
        if got == missing && inside(v) {
            let mut nodes = vec![v];
            let mut labels = Vec::new();
            let mut cur = (v, got);
            while cur != start {
                let (pv, pg, e) = parent[&cur];
                labels.push(e);
                nodes.push(pv);
                cur = (pv, pg);
            }
            nodes.reverse();
            labels.reverse();
            return Some((nodes, labels));
        }
        for e in &graph.edges[v] {
            let mut got2 = got;
            for &a in &sys.neighbourhoods[sys.transitions[e.entry].neighbourhood].members {
                got2 |= (1 << a) & missing;
            }
            let next = (e.target, got2);
            if seen.insert(next) {
                parent.insert(next, (v, got, e.entry));
                queue.push_back(next);
            }
        }
    }
    None
}

/// Exact decision of Def.-3 emergence at the fixed population size, with
/// counterexample extraction.
pub fn check_emergence(
    sys: &MemorySystem,
    mode: FairnessMode,
    budgets: EmergenceBudgets,
) -> Result<EmergenceVerdict, EmergenceError> {
    let graph = build_graph(sys, budgets.node_budget)?;
    check_emergence_on(sys, &graph, mode, budgets.class_budget)
}

/// Same as [`check_emergence`] but over a pre-built graph.
pub fn check_emergence_on(
    sys: &MemorySystem,
    graph: &ConfigurationGraph,
    mode: FairnessMode,
    class_budget: usize,
) -> Result<EmergenceVerdict, EmergenceError> {
    // Finite maximal histories are spanning vacuously in the entry and
    // neighbourhood readings, so every reachable deadlock must be uniform.
    // In the span reading a deadlock only matters if some covering stem
    // reaches it.
    for dead in graph.deadlocks() {
        if sys.uniform_signal(&graph.nodes[dead]).is_some() {
            continue;
        }
        let stem = match mode {
            FairnessMode::SpanAgents => covering_stem(sys, graph, &[dead], &[]),
            _ => graph.path(graph.root, dead),
        };
        if let Some((nodes, labels)) = stem {
            let configs = nodes.iter().map(|&v| graph.nodes[v].clone()).collect();
            let classes = fair_terminal_classes(sys, graph, mode, class_budget)?;
            return Ok(EmergenceVerdict {
                supports: false,
                classes,
                counterexample: Some(History::finite_maximal(configs, labels)),
            });
        }
    }

    let classes = fair_terminal_classes(sys, graph, mode, class_budget)?;
    for class in &classes {
        if class.stable_signal.is_none() {
            let counterexample = class_lasso(sys, graph, class, mode);
            return Ok(EmergenceVerdict {
                supports: false,
                classes,
                counterexample: Some(counterexample),
            });
        }
    }
    Ok(EmergenceVerdict {
        supports: true,
        classes,
        counterexample: None,
    })
}

/// Builds a spanning lasso whose cycle visits every node of the class and
/// discharges every fairness obligation inside it.
fn class_lasso(
    sys: &MemorySystem,
    graph: &ConfigurationGraph,
    class: &FairTerminalClass,
    mode: FairnessMode,
) -> History {
    let anchor = class.nodes[0];
    let (stem_nodes, stem_labels) = match mode {
        FairnessMode::SpanAgents => {
            covering_stem(sys, graph, &class.nodes, &class.witness_edges)
                .expect("class admits a covering stem")
        }
        _ => graph.path(graph.root, anchor).expect("class reachable"),
    };
    let anchor = *stem_nodes.last().expect("stem nonempty");

    // One internal edge per obligation label, deterministic choice.
    let mut chosen: BTreeMap<usize, (usize, usize, usize)> = BTreeMap::new();
    for &(u, e, v) in &class.witness_edges {
        chosen.entry(e).or_insert((u, e, v));
    }

    let mut cycle_nodes = Vec::new(); // nodes strictly after the anchor
    let mut cycle_labels = Vec::new();
    let mut cur = anchor;
    let extend = |cur: &mut usize, to: usize, nodes: &mut Vec<usize>, labels: &mut Vec<usize>| {
        let (path_nodes, path_labels) =
            path_within(graph, &class.nodes, *cur, to).expect("class strongly connected");
        for (n, l) in path_nodes[1..].iter().zip(path_labels) {
            nodes.push(*n);
            labels.push(l);
        }
        *cur = to;
    };
    for &v in &class.nodes {
        extend(&mut cur, v, &mut cycle_nodes, &mut cycle_labels);
    }
    for &(u, e, v) in chosen.values() {
        extend(&mut cur, u, &mut cycle_nodes, &mut cycle_labels);
        cycle_nodes.push(v);
        cycle_labels.push(e);
        cur = v;
    }
    extend(&mut cur, anchor, &mut cycle_nodes, &mut cycle_labels);
    if cycle_labels.is_empty() {
        // Take some internal edge and come back.
        let &(u, e, v) = class.witness_edges.first().expect("class has an edge");
        extend(&mut cur, u, &mut cycle_nodes, &mut cycle_labels);
        cycle_nodes.push(v);
        cycle_labels.push(e);
        cur = v;
        extend(&mut cur, anchor, &mut cycle_nodes, &mut cycle_labels);
    }

    // The closing step re-enters the anchor; drop the duplicated node.
    debug_assert_eq!(cycle_nodes.last(), Some(&anchor));
    cycle_nodes.pop();

    let mut configs: Vec<_> = stem_nodes.iter().map(|&v| graph.nodes[v].clone()).collect();
    configs.extend(cycle_nodes.iter().map(|&v| graph.nodes[v].clone()));
    let lasso_start = stem_nodes.len() - 1;
    let mut labels = stem_labels;
    labels.extend(cycle_labels);
    History::lasso(configs, labels, lasso_start)
}

/// Shortest path between two members of `allowed`, using only edges whose
/// endpoints stay inside `allowed`.
fn path_within(
    graph: &ConfigurationGraph,
    allowed: &[usize],
    from: usize,
    to: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if from == to {
        return Some((vec![from], Vec::new()));
    }
    let inside = |v: usize| allowed.binary_search(&v).is_ok();
    let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for e in &graph.edges[v] {
            if !inside(e.target) || e.target == from || parent.contains_key(&e.target) {
                continue;
            }
            parent.insert(e.target, (v, e.entry));
            if e.target == to {
                let mut nodes = vec![to];
                let mut labels = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, l) = parent[&cur];
                    labels.push(l);
                    nodes.push(p);
                    cur = p;
                }
                nodes.reverse();
                labels.reverse();
                return Some((nodes, labels));
            }
            queue.push_back(e.target);
        }
    }
    None
}

/// Independent oracle: enumerates closed walks (cycles) of bounded length
/// directly, filters the spanning ones by a literal fairness check on the
/// walk, and evaluates stability on the visited set. Entry-level fairness.
pub fn brute_force_emergence(
    sys: &MemorySystem,
    lasso_bound: usize,
) -> Result<EmergenceVerdict, EmergenceError> {
    let graph = build_graph(sys, 100_000)?;

    for dead in graph.deadlocks() {
        if sys.uniform_signal(&graph.nodes[dead]).is_none() {
            let (nodes, labels) = graph.path(graph.root, dead).expect("reachable");
            let configs = nodes.iter().map(|&v| graph.nodes[v].clone()).collect();
            return Ok(EmergenceVerdict {
                supports: false,
                classes: Vec::new(),
                counterexample: Some(History::finite_maximal(configs, labels)),
            });
        }
    }

    let mut truncated = false;
    for scc in graph.scc_decomposition() {
        let nodes = scc.nodes;
        let mut labels: Vec<usize> = BTreeSet::from_iter(nodes.iter().flat_map(|&v| {
            graph.edges[v]
                .iter()
                .filter(|e| nodes.binary_search(&e.target).is_ok())
                .map(|e| e.entry)
        }))
        .into_iter()
        .collect();
        labels.sort_unstable();
        if nodes.len() > 60 || labels.len() > 60 {
            return Err(EmergenceError::ComponentTooLarge {
                nodes: nodes.len(),
                labels: labels.len(),
            });
        }
        if labels.is_empty() {
            continue;
        }
        for (si, &start) in nodes.iter().enumerate() {
            match walk_search(sys, &graph, &nodes, &labels, start, si, lasso_bound) {
                WalkOutcome::Violation(walk_nodes, walk_labels) => {
                    let (stem_nodes, stem_labels) =
                        graph.path(graph.root, start).expect("reachable");
                    let mut configs: Vec<_> =
                        stem_nodes.iter().map(|&v| graph.nodes[v].clone()).collect();
                    configs
                        .extend(walk_nodes[1..walk_nodes.len() - 1]
                            .iter()
                            .map(|&v| graph.nodes[v].clone()));
                    let lasso_start = stem_nodes.len() - 1;
                    let mut all_labels = stem_labels;
                    all_labels.extend(walk_labels);
                    return Ok(EmergenceVerdict {
                        supports: false,
                        classes: Vec::new(),
                        counterexample: Some(History::lasso(configs, all_labels, lasso_start)),
                    });
                }
                WalkOutcome::Exhausted => {}
                WalkOutcome::Truncated => truncated = true,
            }
        }
    }
    if truncated {
        return Err(EmergenceError::LassoBoundInsufficient { bound: lasso_bound });
    }
    let classes = fair_terminal_classes(sys, &graph, FairnessMode::Entry, 1_000_000)?;
    Ok(EmergenceVerdict {
        supports: true,
        classes,
        counterexample: None,
    })
}

enum WalkOutcome {
    Violation(Vec<usize>, Vec<usize>),
    Exhausted,
    Truncated,
}

/// BFS over (current node, visited-node set, used-label set) for closed
/// walks from `start`, memoized; equivalent to enumerating all cycles up to
/// the bound but without re-walking shared prefixes.
fn walk_search(
    sys: &MemorySystem,
    graph: &ConfigurationGraph,
    scc_nodes: &[usize],
    scc_labels: &[usize],
    start: usize,
    start_bit: usize,
    bound: usize,
) -> WalkOutcome {
    type State = (usize, u64, u64);
    let node_bit = |v: usize| scc_nodes.binary_search(&v).ok();
    let label_bit = |e: usize| scc_labels.binary_search(&e).ok();

    let init: State = (start, 1u64 << start_bit, 0u64);
    let mut parent: HashMap<State, (State, usize)> = HashMap::new();
    let mut frontier = vec![init];
    let mut seen: BTreeSet<State> = BTreeSet::from([init]);
    let mut truncated = false;
    let mut depth = 0usize;
    while !frontier.is_empty() {
        if depth >= bound {
            truncated = true;
            break;
        }
        depth += 1;
        let mut next_frontier = Vec::new();
        for &(v, visited, used) in &frontier {
            for e in &graph.edges[v] {
                let (Some(nb), Some(lb)) = (node_bit(e.target), label_bit(e.entry)) else {
                    continue; // leaves the SCC
                };
                let state: State = (e.target, visited | (1 << nb), used | (1 << lb));
                if !seen.insert(state) {
                    continue;
                }
                parent.insert(state, ((v, visited, used), e.entry));
                if e.target == start && fair_and_unstable(sys, graph, scc_nodes, scc_labels, state)
                {
                    // Reconstruct the closed walk.
                    let mut walk_nodes = vec![state.0];
                    let mut walk_labels = Vec::new();
                    let mut cur = state;
                    while cur != init {
                        let (prev, entry) = parent[&cur];
                        walk_labels.push(entry);
                        walk_nodes.push(prev.0);
                        cur = prev;
                    }
                    walk_nodes.reverse();
                    walk_labels.reverse();
                    return WalkOutcome::Violation(walk_nodes, walk_labels);
                }
                next_frontier.push(state);
            }
        }
        frontier = next_frontier;
    }
    if truncated {
        WalkOutcome::Truncated
    } else {
        WalkOutcome::Exhausted
    }
}

fn fair_and_unstable(
    sys: &MemorySystem,
    graph: &ConfigurationGraph,
    scc_nodes: &[usize],
    scc_labels: &[usize],
    (_, visited, used): (usize, u64, u64),
) -> bool {
    // Fairness: every entry enabled at a visited node must have been taken.
    for (i, &v) in scc_nodes.iter().enumerate() {
        if visited & (1 << i) == 0 {
            continue;
        }
        for e in &graph.edges[v] {
            match scc_labels.binary_search(&e.entry) {
                Ok(lb) if used & (1 << lb) != 0 => {}
                _ => return false, // enabled but never taken inside the walk
            }
        }
    }
    // Instability: no signal is uniform across all visited configurations.
    'signals: for gamma in 0..sys.signals.len() {
        for (i, &v) in scc_nodes.iter().enumerate() {
            if visited & (1 << i) == 0 {
                continue;
            }
            if sys.uniform_signal(&graph.nodes[v]) != Some(gamma) {
                continue 'signals;
            }
        }
        return false; // gamma is stable on the walk
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::HistoryKind;
    use crate::system::Configuration;

    fn classes_of(sys: &MemorySystem, mode: FairnessMode) -> Vec<FairTerminalClass> {
        let g = build_graph(sys, 1000).unwrap();
        fair_terminal_classes(sys, &g, mode, 1_000_000).unwrap()
    }

    #[test]
    fn maj1_single_stable_class() {
        let sys = fixtures::maj1();
        let classes = classes_of(&sys, FairnessMode::Entry);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].nodes, vec![1]); // the all-G node
        assert_eq!(classes[0].stable_signal, Some(0));
    }

    #[test]
    fn even2_single_unstable_class() {
        let sys = fixtures::even2();
        let classes = classes_of(&sys, FairnessMode::Entry);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].nodes, vec![0]);
        assert_eq!(classes[0].stable_signal, None);
    }

    #[test]
    fn pred3_classes_all_uniformly_b() {
        let sys = fixtures::pred3();
        let classes = classes_of(&sys, FairnessMode::Entry);
        assert!(!classes.is_empty());
        for class in &classes {
            assert_eq!(class.stable_signal, Some(1));
        }
    }

    #[test]
    fn verdicts_on_fixtures() {
        let v = check_emergence(&fixtures::maj1(), FairnessMode::Entry, Default::default()).unwrap();
        assert!(v.supports);
        assert_eq!(v.classes[0].stable_signal, Some(0));

        let v =
            check_emergence(&fixtures::even2(), FairnessMode::Entry, Default::default()).unwrap();
        assert!(!v.supports);
        let cex = v.counterexample.unwrap();
        assert_eq!(cex.kind, HistoryKind::Lasso);
        cex.replay_check(&fixtures::even2()).unwrap();
        assert!(cex.configs.contains(&Configuration(vec![0, 1])));

        let v =
            check_emergence(&fixtures::pred3(), FairnessMode::Entry, Default::default()).unwrap();
        assert!(v.supports);
        assert!(v.classes.iter().all(|c| c.stable_signal == Some(1)));
    }

    #[test]
    fn deadlock_counterexample() {
        // Drop the all-B self-loop and rewire so a non-uniform deadlock exists:
        // remove every entry except the tie identity from even2 plus... simpler:
        // MAJ1 without uniform entries deadlocks at all-G, which is uniform, so
        // emergence still holds.
        let sys = fixtures::maj1_without_uniform_entries();
        let v = check_emergence(&sys, FairnessMode::Entry, Default::default()).unwrap();
        assert!(v.supports);

        // A system with no transitions at all deadlocks at its (non-uniform) root.
        let mut sys = fixtures::maj1();
        sys.transitions.clear();
        let v = check_emergence(&sys, FairnessMode::Entry, Default::default()).unwrap();
        assert!(!v.supports);
        let cex = v.counterexample.unwrap();
        assert_eq!(cex.kind, HistoryKind::FiniteMaximal);
    }

    #[test]
    fn constant_signalling_always_supports() {
        let mut sys = fixtures::maj1();
        sys.signal_of = vec![0, 0]; // both states emit g
        let v = check_emergence(&sys, FairnessMode::Entry, Default::default()).unwrap();
        assert!(v.supports);
        assert!(v.counterexample.is_none());
    }

    #[test]
    fn brute_force_on_fixtures() {
        let v = brute_force_emergence(&fixtures::maj1(), 8).unwrap();
        assert!(v.supports);
        let v = brute_force_emergence(&fixtures::even2(), 4).unwrap();
        assert!(!v.supports);
        let cex = v.counterexample.unwrap();
        cex.replay_check(&fixtures::even2()).unwrap();
        let v = brute_force_emergence(&fixtures::pred3(), 16).unwrap();
        assert!(v.supports);
    }

    #[test]
    fn bottom_sccs_qualify_as_classes() {
        for sys in [fixtures::maj1(), fixtures::even2(), fixtures::pred3()] {
            let g = build_graph(&sys, 1000).unwrap();
            let classes = fair_terminal_classes(&sys, &g, FairnessMode::Entry, 1_000_000).unwrap();
            for scc in g.scc_decomposition() {
                let has_edge = scc.nodes.iter().any(|&v| {
                    g.edges[v]
                        .iter()
                        .any(|e| scc.nodes.binary_search(&e.target).is_ok())
                });
                if scc.bottom && has_edge {
                    assert!(
                        classes.iter().any(|c| c.nodes == scc.nodes),
                        "bottom SCC {:?} must itself be a class",
                        scc.nodes
                    );
                }
            }
        }
    }

    #[test]
    fn span_mode_even2() {
        // Even2's single self-loop covers both agents, so the class exists in
        // span mode too and emergence still fails.
        let v = check_emergence(&fixtures::even2(), FairnessMode::SpanAgents, Default::default())
            .unwrap();
        assert!(!v.supports);
    }

    #[test]
    fn counterexamples_replay() {
        for sys in [fixtures::even2()] {
            for mode in [
                FairnessMode::Entry,
                FairnessMode::Neighbourhood,
                FairnessMode::SpanAgents,
            ] {
                let v = check_emergence(&sys, mode, Default::default()).unwrap();
                if let Some(cex) = v.counterexample {
                    cex.replay_check(&sys).unwrap();
                }
            }
        }
    }
}
