//! Configuration-graph construction and queries: BFS closure of the initial
//! configuration, deadlock detection, SCC decomposition, and histories.

use std::collections::{HashMap, VecDeque};
use thiserror::Error;

use crate::system::{Configuration, MemorySystem};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node budget {budget} exceeded while exploring the configuration graph")]
    BudgetExceeded { budget: usize },
    #[error("node budget must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Transition entry index into `MemorySystem::transitions`.
    pub entry: usize,
    pub target: usize,
}

/// Explicit reachable configuration graph G_M. Node 0 is the root chi_0;
/// node indices follow BFS order with edges expanded in entry-id order, so
/// the numbering is canonical for a given system.
#[derive(Debug, Clone)]
pub struct ConfigurationGraph {
    pub nodes: Vec<Configuration>,
    pub edges: Vec<Vec<Edge>>,
    pub root: usize,
    index: HashMap<Configuration, usize>,
}

impl ConfigurationGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(|e| e.len()).sum()
    }

    pub fn node_of(&self, chi: &Configuration) -> Option<usize> {
        self.index.get(chi).copied()
    }

    /// Nodes with no outgoing edges: ends of finite maximal histories.
    pub fn deadlocks(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| self.edges[v].is_empty())
            .collect()
    }

    /// Shortest path (as alternating labels) from `from` to `to`; None when
    /// unreachable. Edges are explored in entry order, so paths are stable.
    pub fn path(&self, from: usize, to: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut nodes = vec![to];
                let mut labels = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, e) = parent[&cur];
                    labels.push(e);
                    nodes.push(p);
                    cur = p;
                }
                nodes.reverse();
                labels.reverse();
                return Some((nodes, labels));
            }
            for edge in &self.edges[v] {
                if edge.target != from && !parent.contains_key(&edge.target) {
                    parent.insert(edge.target, (v, edge.entry));
                    queue.push_back(edge.target);
                }
            }
        }
        if from == to {
            return Some((vec![from], Vec::new()));
        }
        None
    }

    /// Maximal SCC partition with bottom flags, ordered by least member node.
    pub fn scc_decomposition(&self) -> Vec<Scc> {
        let mut sccs = tarjan(&self.edges);
        for scc in &mut sccs {
            scc.nodes.sort_unstable();
        }
        sccs.sort_by_key(|s| s.nodes[0]);
        let mut comp_of = vec![0usize; self.nodes.len()];
        for (i, scc) in sccs.iter().enumerate() {
            for &v in &scc.nodes {
                comp_of[v] = i;
            }
        }
        for i in 0..sccs.len() {
            let bottom = sccs[i]
                .nodes
                .iter()
                .all(|&v| self.edges[v].iter().all(|e| comp_of[e.target] == i));
            sccs[i].bottom = bottom;
        }
        sccs
    }
}

#[derive(Debug, Clone)]
pub struct Scc {
    pub nodes: Vec<usize>,
    /// True iff no edge leaves the component.
    pub bottom: bool,
}

/// BFS closure of chi_0 under enabled transitions. Fails once more than
/// `node_budget` distinct configurations have been discovered.
pub fn build_graph(
    sys: &MemorySystem,
    node_budget: usize,
) -> Result<ConfigurationGraph, GraphError> {
    if node_budget == 0 {
        return Err(GraphError::ZeroBudget);
    }
    let root = sys.initial_configuration();
    let mut index = HashMap::new();
    index.insert(root.clone(), 0usize);
    let mut nodes = vec![root];
    let mut edges: Vec<Vec<Edge>> = Vec::new();
    let mut next = 0usize;
    while next < nodes.len() {
        let chi = nodes[next].clone();
        let mut out = Vec::new();
        for entry in sys.enabled_transitions(&chi) {
            let target_chi = sys
                .apply_transition(&chi, entry)
                .expect("enabled entries apply");
            let target = match index.get(&target_chi) {
                Some(&t) => t,
                None => {
                    if nodes.len() >= node_budget {
                        return Err(GraphError::BudgetExceeded {
                            budget: node_budget,
                        });
                    }
                    let t = nodes.len();
                    index.insert(target_chi.clone(), t);
                    nodes.push(target_chi);
                    t
                }
            };
            out.push(Edge { entry, target });
        }
        edges.push(out);
        next += 1;
    }
    Ok(ConfigurationGraph {
        nodes,
        edges,
        root: 0,
        index,
    })
}

fn tarjan(adj: &[Vec<Edge>]) -> Vec<Scc> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0usize;
    let mut out = Vec::new();

    // Iterative Tarjan: (node, next edge position) frames.
    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        let mut frames = vec![(start, 0usize)];
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos].target;
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack nonempty");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(Scc {
                        nodes: comp,
                        bottom: false,
                    });
                }
            }
        }
    }
    out
}

/// How a history ends (or does not).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryKind {
    /// Ends in a deadlock configuration; cannot be extended.
    FiniteMaximal,
    /// Infinite history given as stem + repeating cycle.
    Lasso,
    /// Step-bounded simulation that hit no deadlock; undetermined suffix.
    Prefix,
}

/// A path in G_M starting from chi_0. For a lasso the final label leads back
/// to `configs[lasso_start]`, so `labels.len() == configs.len()`; otherwise
/// `labels.len() == configs.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    pub kind: HistoryKind,
    pub configs: Vec<Configuration>,
    pub labels: Vec<usize>,
    pub lasso_start: Option<usize>,
}

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("property is not determined on a prefix history")]
    UndeterminedOnPrefix,
    #[error("malformed history: {0}")]
    Malformed(String),
}

impl History {
    pub fn finite_maximal(configs: Vec<Configuration>, labels: Vec<usize>) -> Self {
        History {
            kind: HistoryKind::FiniteMaximal,
            configs,
            labels,
            lasso_start: None,
        }
    }

    pub fn prefix(configs: Vec<Configuration>, labels: Vec<usize>) -> Self {
        History {
            kind: HistoryKind::Prefix,
            configs,
            labels,
            lasso_start: None,
        }
    }

    pub fn lasso(configs: Vec<Configuration>, labels: Vec<usize>, lasso_start: usize) -> Self {
        History {
            kind: HistoryKind::Lasso,
            configs,
            labels,
            lasso_start: Some(lasso_start),
        }
    }

    pub fn cycle_len(&self) -> Option<usize> {
        self.lasso_start.map(|s| self.configs.len() - s)
    }

    /// Configuration at an arbitrary position; for lassos positions beyond
    /// the unfolding wrap around the cycle.
    pub fn config_at(&self, pos: usize) -> Option<&Configuration> {
        if pos < self.configs.len() {
            return Some(&self.configs[pos]);
        }
        match (self.kind, self.lasso_start) {
            (HistoryKind::Lasso, Some(start)) => {
                let cycle = self.configs.len() - start;
                Some(&self.configs[start + (pos - start) % cycle])
            }
            _ => None,
        }
    }

    /// Entry label of the step leaving position `pos`.
    pub fn label_at(&self, pos: usize) -> Option<usize> {
        if pos < self.labels.len() {
            return Some(self.labels[pos]);
        }
        match (self.kind, self.lasso_start) {
            (HistoryKind::Lasso, Some(start)) => {
                let cycle = self.configs.len() - start;
                Some(self.labels[start + (pos - start) % cycle])
            }
            _ => None,
        }
    }

    /// Replays every step through the transition semantics; errors if any
    /// step is not a real labelled edge of the system.
    pub fn replay_check(&self, sys: &MemorySystem) -> Result<(), HistoryError> {
        let expect_labels = match self.kind {
            HistoryKind::Lasso => self.configs.len(),
            _ => self.configs.len().saturating_sub(1),
        };
        if self.labels.len() != expect_labels {
            return Err(HistoryError::Malformed(format!(
                "expected {} labels, found {}",
                expect_labels,
                self.labels.len()
            )));
        }
        for (i, &entry) in self.labels.iter().enumerate() {
            let src = &self.configs[i];
            let dst = if i + 1 < self.configs.len() {
                &self.configs[i + 1]
            } else {
                &self.configs[self.lasso_start.expect("lasso has a start")]
            };
            let applied = sys
                .apply_transition(src, entry)
                .map_err(|e| HistoryError::Malformed(e.to_string()))?;
            if applied != *dst {
                return Err(HistoryError::Malformed(format!(
                    "step {i} does not reproduce its target"
                )));
            }
        }
        if self.kind == HistoryKind::FiniteMaximal {
            let last = self.configs.last().expect("nonempty history");
            if !sys.enabled_transitions(last).is_empty() {
                return Err(HistoryError::Malformed(
                    "finite-maximal history does not end in a deadlock".into(),
                ));
            }
        }
        Ok(())
    }

    /// Whether `signal` is eventually stable for the agents of `scope`
    /// (None = the full agent set N). Exact on finite-maximal and lasso
    /// histories; prefixes are refused.
    pub fn is_eventually_stable(
        &self,
        sys: &MemorySystem,
        signal: usize,
        scope: Option<&[usize]>,
    ) -> Result<bool, HistoryError> {
        let all: Vec<usize>;
        let agents = match scope {
            Some(a) => a,
            None => {
                all = (0..sys.agent_count()).collect();
                &all
            }
        };
        match self.kind {
            HistoryKind::Prefix => Err(HistoryError::UndeterminedOnPrefix),
            HistoryKind::FiniteMaximal => {
                let last = self.configs.last().expect("nonempty history");
                Ok(sys.uniform_on(last, signal, agents))
            }
            HistoryKind::Lasso => {
                let start = self.lasso_start.expect("lasso has a start");
                Ok(self.configs[start..]
                    .iter()
                    .all(|chi| sys.uniform_on(chi, signal, agents)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::system::Configuration;

    #[test]
    fn maj1_graph_closure() {
        let sys = fixtures::maj1();
        let g = build_graph(&sys, 100).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.nodes[0], Configuration(vec![0, 0, 1]));
        assert_eq!(g.nodes[1], Configuration(vec![0, 0, 0]));
        assert_eq!(g.edges[0], vec![Edge { entry: sys.transition_named("maj-2g-1b").unwrap(), target: 1 }]);
        assert_eq!(g.edges[1], vec![Edge { entry: sys.transition_named("maj-3g-0b").unwrap(), target: 1 }]);
    }

    #[test]
    fn even2_graph_is_one_self_loop() {
        let g = build_graph(&fixtures::even2(), 100).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges[0][0].target, 0);
    }

    #[test]
    fn budget_exceeded_on_tiny_budget() {
        assert!(matches!(
            build_graph(&fixtures::maj1(), 1),
            Err(GraphError::BudgetExceeded { budget: 1 })
        ));
    }

    #[test]
    fn deadlock_sets() {
        let g = build_graph(&fixtures::maj1(), 100).unwrap();
        assert!(g.deadlocks().is_empty());

        let sys = fixtures::maj1_without_uniform_entries();
        let g = build_graph(&sys, 100).unwrap();
        let dead = g.deadlocks();
        assert_eq!(dead.len(), 1);
        assert_eq!(g.nodes[dead[0]], Configuration(vec![0, 0, 0]));

        // Empty delta: the root itself deadlocks.
        let mut sys = fixtures::maj1();
        sys.transitions.clear();
        let g = build_graph(&sys, 100).unwrap();
        assert_eq!(g.deadlocks(), vec![0]);
    }

    #[test]
    fn scc_structure() {
        let g = build_graph(&fixtures::maj1(), 100).unwrap();
        let sccs = g.scc_decomposition();
        assert_eq!(sccs.len(), 2);
        assert_eq!(sccs[0].nodes, vec![0]);
        assert!(!sccs[0].bottom);
        assert_eq!(sccs[1].nodes, vec![1]);
        assert!(sccs[1].bottom);

        let g = build_graph(&fixtures::even2(), 100).unwrap();
        let sccs = g.scc_decomposition();
        assert_eq!(sccs.len(), 1);
        assert!(sccs[0].bottom);

        // Edgeless graph: every node its own bottom SCC.
        let mut sys = fixtures::maj1();
        sys.transitions.clear();
        let g = build_graph(&sys, 100).unwrap();
        let sccs = g.scc_decomposition();
        assert_eq!(sccs.len(), 1);
        assert!(sccs[0].bottom);
    }

    #[test]
    fn graph_edges_replay() {
        for sys in [fixtures::maj1(), fixtures::even2(), fixtures::pred3()] {
            let g = build_graph(&sys, 1000).unwrap();
            for (v, out) in g.edges.iter().enumerate() {
                for e in out {
                    let applied = sys.apply_transition(&g.nodes[v], e.entry).unwrap();
                    assert_eq!(applied, g.nodes[e.target]);
                }
                // completeness: one edge per enabled entry
                let enabled = sys.enabled_transitions(&g.nodes[v]);
                assert_eq!(enabled.len(), out.len());
            }
        }
    }

    #[test]
    fn stability_on_histories() {
        let sys = fixtures::maj1();
        let ggb = Configuration(vec![0, 0, 1]);
        let ggg = Configuration(vec![0, 0, 0]);
        let step = sys.transition_named("maj-2g-1b").unwrap();
        let uni = sys.transition_named("maj-3g-0b").unwrap();
        let lasso = History::lasso(vec![ggb, ggg], vec![step, uni], 1);
        lasso.replay_check(&sys).unwrap();
        assert!(lasso.is_eventually_stable(&sys, 0, None).unwrap());
        assert!(!lasso.is_eventually_stable(&sys, 1, None).unwrap());

        let sys = fixtures::even2();
        let gb = sys.initial_configuration();
        let tie = sys.transition_named("even-1-1").unwrap();
        let lasso = History::lasso(vec![gb.clone()], vec![tie], 0);
        assert!(!lasso.is_eventually_stable(&sys, 0, None).unwrap());

        let prefix = History::prefix(vec![gb], vec![]);
        assert!(matches!(
            prefix.is_eventually_stable(&sys, 0, None),
            Err(HistoryError::UndeterminedOnPrefix)
        ));
    }

    #[test]
    fn finite_history_stability_at_last_config() {
        let sys = fixtures::maj1_without_uniform_entries();
        let chi0 = sys.initial_configuration();
        let step = sys.transition_named("maj-2g-1b").unwrap();
        let all_g = sys.apply_transition(&chi0, step).unwrap();
        let h = History::finite_maximal(vec![chi0, all_g], vec![step]);
        h.replay_check(&sys).unwrap();
        assert!(h.is_eventually_stable(&sys, 0, None).unwrap());
    }
}
