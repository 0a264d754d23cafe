//! Explicit-state model checking: every maximal (or every spanning) history
//! must satisfy the sentence at position 0.
//!
//! The checker searches for a violating history via a product construction:
//! graph nodes are paired with one history bit per past subformula (updated
//! deterministically) and one guessed bit per future subformula (constrained
//! for consistency along edges). Violating infinite runs are found as
//! product SCCs meeting generalized-Büchi obligations for the eventualities;
//! violating finite maximal runs as product paths into deadlocks whose
//! final-state constraints hold. The search is linear in the configuration
//! graph for a fixed formula and exponential only in the formula.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use super::eval::{eval_at, EvalError, LogicModel};
use super::{eliminate_counting, Formula};
use crate::emergence::{fair_terminal_classes, EmergenceError, FairnessMode, FairTerminalClass};
use crate::graph::{build_graph, ConfigurationGraph, GraphError, History};
use crate::system::Configuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckMode {
    /// Quantify over all maximal histories (finite maximal and infinite).
    #[default]
    AllMaximal,
    /// Quantify over spanning histories only (finite maximal ones are
    /// spanning vacuously).
    SpanningOnly,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub holds: bool,
    /// A maximal history violating the sentence, with the position (always
    /// 0 for model checking).
    pub counterexample: Option<(History, usize)>,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Emergence(#[from] EmergenceError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("formula has free variables: {0:?} (bind them with an assignment)")]
    FreeVariables(Vec<String>),
    #[error("formula has {0} temporal subformulas; the product supports at most 24")]
    TooManySubformulas(usize),
    #[error("stem+cycle bound {bound} does not cover all simple lassos (need {needed})")]
    BoundInsufficient { bound: usize, needed: usize },
    #[error("walk enumeration exceeded the step budget")]
    WalkBudgetExceeded,
}

type Bits = u32;

/// M ⊨ φ: every history of the requested kind satisfies φ at position 0.
pub fn model_check(
    model: &LogicModel,
    phi: &Formula,
    mode: CheckMode,
    node_budget: usize,
) -> Result<Verdict, CheckError> {
    let sys = model.sys;
    let bound_phi = phi.bind(&model.eta);
    let free = bound_phi.free_vars();
    let free: Vec<String> = free
        .into_iter()
        .filter(|v| !sys.agent_names.contains(v))
        .collect();
    if !free.is_empty() {
        return Err(CheckError::FreeVariables(free));
    }
    // Search for a history satisfying ¬φ at 0.
    let psi = eliminate_counting(&bound_phi.not(), sys.agent_count());
    let graph = build_graph(sys, node_budget)?;

    let mut past = Vec::new();
    let mut future = Vec::new();
    collect_temporal(&psi, &mut past, &mut future);
    if past.len() + future.len() > 24 {
        return Err(CheckError::TooManySubformulas(past.len() + future.len()));
    }

    let product = ProductSearch {
        model,
        graph: &graph,
        past,
        future,
    };
    match product.find_violation(&psi, mode)? {
        Some(history) => Ok(Verdict {
            holds: false,
            counterexample: Some((history, 0)),
        }),
        None => Ok(Verdict {
            holds: true,
            counterexample: None,
        }),
    }
}

/// Collects maximal temporal subformulas in postorder (children before
/// parents), deduplicated.
fn collect_temporal(f: &Formula, past: &mut Vec<Formula>, future: &mut Vec<Formula>) {
    match f {
        Formula::Not(a) => collect_temporal(a, past, future),
        Formula::Or(a, b) => {
            collect_temporal(a, past, future);
            collect_temporal(b, past, future);
        }
        Formula::Threshold(_, _, fs) => {
            for x in fs {
                collect_temporal(x, past, future);
            }
        }
        Formula::Prev(a) | Formula::Once(a) => {
            collect_temporal(a, past, future);
            if !past.contains(f) {
                past.push(f.clone());
            }
        }
        Formula::Next(a) | Formula::Eventually(a) => {
            collect_temporal(a, past, future);
            if !future.contains(f) {
                future.push(f.clone());
            }
        }
        Formula::Count(..) => unreachable!("counting eliminated before product"),
        _ => {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct PState {
    node: usize,
    pb: Bits,
    fb: Bits,
}

struct ProductSearch<'a, 'b> {
    model: &'a LogicModel<'b>,
    graph: &'a ConfigurationGraph,
    past: Vec<Formula>,
    future: Vec<Formula>,
}

impl ProductSearch<'_, '_> {
    /// Truth of `f` at a position represented by (node, past bits, future
    /// bits); temporal subformulas read their bit instead of recursing.
    fn value(&self, node: usize, pb: Bits, fb: Bits, f: &Formula) -> Result<bool, CheckError> {
        if let Some(i) = self.past.iter().position(|p| p == f) {
            return Ok(pb & (1 << i) != 0);
        }
        if let Some(i) = self.future.iter().position(|p| p == f) {
            return Ok(fb & (1 << i) != 0);
        }
        match f {
            Formula::True => Ok(true),
            Formula::Not(a) => Ok(!self.value(node, pb, fb, a)?),
            Formula::Or(a, b) => {
                Ok(self.value(node, pb, fb, a)? || self.value(node, pb, fb, b)?)
            }
            Formula::Threshold(op, k, fs) => {
                let mut count = 0i64;
                for x in fs {
                    if self.value(node, pb, fb, x)? {
                        count += 1;
                    }
                }
                Ok(op.holds(count, *k as i64))
            }
            atom => Ok(self.atom_value(node, atom)?),
        }
    }

    fn atom_value(&self, node: usize, f: &Formula) -> Result<bool, EvalError> {
        let config = &self.graph.nodes[node];
        let one_config = History::prefix(vec![config.clone()], vec![]);
        Ok(eval_at(&one_config, 0, f, self.model)? == crate::tri::Tri::True)
    }

    /// Past bits at position 0 for the root under guessed future bits.
    fn init_pb(&self, node: usize, fb: Bits) -> Result<Bits, CheckError> {
        let mut pb = 0;
        for (i, p) in self.past.iter().enumerate() {
            let bit = match p {
                Formula::Prev(_) => false,
                Formula::Once(chi) => self.value(node, pb, fb, chi)?,
                _ => unreachable!(),
            };
            if bit {
                pb |= 1 << i;
            }
        }
        Ok(pb)
    }

    /// Past bits after taking an edge src → dst.
    fn step_pb(&self, src: PState, dst_node: usize, dst_fb: Bits) -> Result<Bits, CheckError> {
        let mut pb = 0;
        for (i, p) in self.past.iter().enumerate() {
            let bit = match p {
                Formula::Prev(chi) => self.value(src.node, src.pb, src.fb, chi)?,
                Formula::Once(chi) => {
                    src.pb & (1 << i) != 0 || self.value(dst_node, pb, dst_fb, chi)?
                }
                _ => unreachable!(),
            };
            if bit {
                pb |= 1 << i;
            }
        }
        Ok(pb)
    }

    /// Future-bit consistency along an edge.
    fn edge_consistent(&self, src: PState, dst: PState) -> Result<bool, CheckError> {
        for (i, f) in self.future.iter().enumerate() {
            let claimed = src.fb & (1 << i) != 0;
            let actual = match f {
                Formula::Next(chi) => self.value(dst.node, dst.pb, dst.fb, chi)?,
                Formula::Eventually(chi) => {
                    self.value(src.node, src.pb, src.fb, chi)? || dst.fb & (1 << i) != 0
                }
                _ => unreachable!(),
            };
            if claimed != actual {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Future-bit constraints at a deadlock (no successor instant).
    fn final_consistent(&self, s: PState) -> Result<bool, CheckError> {
        for (i, f) in self.future.iter().enumerate() {
            let claimed = s.fb & (1 << i) != 0;
            let actual = match f {
                Formula::Next(_) => false,
                Formula::Eventually(chi) => self.value(s.node, s.pb, s.fb, chi)?,
                _ => unreachable!(),
            };
            if claimed != actual {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn find_violation(
        &self,
        psi: &Formula,
        mode: CheckMode,
    ) -> Result<Option<History>, CheckError> {
        let fcount = self.future.len();

        // Initial product states: any future guess whose induced valuation
        // makes ψ (the negated sentence) true at the root.
        let mut states: Vec<PState> = Vec::new();
        let mut index: HashMap<PState, usize> = HashMap::new();
        let mut parent: Vec<Option<(usize, usize)>> = Vec::new(); // (pred, entry)
        let mut queue = VecDeque::new();
        for fb in 0..(1u32 << fcount) {
            let pb = self.init_pb(self.graph.root, fb)?;
            let s = PState {
                node: self.graph.root,
                pb,
                fb,
            };
            if self.value(s.node, s.pb, s.fb, psi)? && !index.contains_key(&s) {
                index.insert(s, states.len());
                parent.push(None);
                queue.push_back(states.len());
                states.push(s);
            }
        }

        // BFS closure of the product; edges recorded for the SCC pass.
        let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); states.len()]; // (entry, dst)
        while let Some(si) = queue.pop_front() {
            let s = states[si];
            for e in &self.graph.edges[s.node] {
                for fb2 in 0..(1u32 << fcount) {
                    let pb2 = self.step_pb(s, e.target, fb2)?;
                    let t = PState {
                        node: e.target,
                        pb: pb2,
                        fb: fb2,
                    };
                    if !self.edge_consistent(s, t)? {
                        continue;
                    }
                    let ti = match index.get(&t) {
                        Some(&ti) => ti,
                        None => {
                            let ti = states.len();
                            index.insert(t, ti);
                            states.push(t);
                            parent.push(Some((si, e.entry)));
                            edges.push(Vec::new());
                            queue.push_back(ti);
                            ti
                        }
                    };
                    edges[si].push((e.entry, ti));
                }
            }
        }

        // Finite maximal violations: reachable deadlock with consistent
        // final bits.
        for (si, s) in states.iter().enumerate() {
            if !self.graph.edges[s.node].is_empty() {
                continue;
            }
            if self.final_consistent(*s)? {
                return Ok(Some(self.finite_history(&states, &parent, si)));
            }
        }

        // Infinite violations: product SCCs meeting the Büchi obligations
        // (and, in spanning mode, the fairness obligations of a fair
        // terminal class).
        let sccs = product_sccs(&edges);
        match mode {
            CheckMode::AllMaximal => {
                for scc in &sccs {
                    if !scc_has_internal_edge(scc, &edges) {
                        continue;
                    }
                    if let Some(required) = self.buchi_targets(scc, &states)? {
                        return Ok(Some(self.lasso_history(
                            &states,
                            &parent,
                            &edges,
                            scc,
                            &required,
                            &[],
                        )));
                    }
                }
            }
            CheckMode::SpanningOnly => {
                let classes = fair_terminal_classes(
                    self.model.sys,
                    self.graph,
                    FairnessMode::Entry,
                    1_000_000,
                )?;
                for class in &classes {
                    if let Some(hist) =
                        self.spanning_violation(&states, &parent, &edges, &sccs, class)?
                    {
                        return Ok(Some(hist));
                    }
                }
            }
        }
        Ok(None)
    }

    /// For each eventuality with a true bit, the SCC must contain a state
    /// where the body already holds; returns one target state per
    /// obligation if all are satisfiable inside the SCC.
    fn buchi_targets(
        &self,
        scc: &[usize],
        states: &[PState],
    ) -> Result<Option<Vec<usize>>, CheckError> {
        let mut targets = Vec::new();
        for (i, f) in self.future.iter().enumerate() {
            let Formula::Eventually(chi) = f else {
                continue;
            };
            let mut found = None;
            for &si in scc {
                let s = states[si];
                if s.fb & (1 << i) == 0 || self.value(s.node, s.pb, s.fb, chi)? {
                    found = Some(si);
                    break;
                }
            }
            match found {
                Some(si) => targets.push(si),
                None => return Ok(None),
            }
        }
        Ok(Some(targets))
    }

    /// A violating spanning run whose inf-set is exactly `class`: an SCC of
    /// the product restricted to the class must project onto the whole
    /// class, carry every fairness obligation, and satisfy the Büchi
    /// obligations.
    fn spanning_violation(
        &self,
        states: &[PState],
        parent: &[Option<(usize, usize)>],
        edges: &[Vec<(usize, usize)>],
        sccs: &[Vec<usize>],
        class: &FairTerminalClass,
    ) -> Result<Option<History>, CheckError> {
        let in_class = |node: usize| class.nodes.binary_search(&node).is_ok();
        let obligations: BTreeSet<usize> = class
            .nodes
            .iter()
            .flat_map(|&v| self.graph.edges[v].iter().map(|e| e.entry))
            .collect();
        // SCCs of the restriction = SCCs of the subgraph induced on states
        // whose node lies in the class; compute from scratch.
        let sub_edges: Vec<Vec<(usize, usize)>> = edges
            .iter()
            .enumerate()
            .map(|(si, out)| {
                if !in_class(states[si].node) {
                    return Vec::new();
                }
                out.iter()
                    .filter(|&&(_, ti)| in_class(states[ti].node))
                    .copied()
                    .collect()
            })
            .collect();
        let _ = sccs;
        for scc in product_sccs(&sub_edges) {
            let scc: Vec<usize> = scc
                .into_iter()
                .filter(|&si| in_class(states[si].node))
                .collect();
            if scc.is_empty() || !scc_has_internal_edge(&scc, &sub_edges) {
                continue;
            }
            let proj: BTreeSet<usize> = scc.iter().map(|&si| states[si].node).collect();
            if proj.len() != class.nodes.len() {
                continue;
            }
            let labels: BTreeSet<usize> = scc
                .iter()
                .flat_map(|&si| {
                    sub_edges[si]
                        .iter()
                        .filter(|&&(_, ti)| scc.contains(&ti))
                        .map(|&(entry, _)| entry)
                })
                .collect();
            if !obligations.iter().all(|e| labels.contains(e)) {
                continue;
            }
            let Some(mut required) = self.buchi_targets(&scc, states)? else {
                continue;
            };
            // The cycle must also visit every class node and serve every
            // obligation; covering all SCC states and all labels does both.
            required.extend(scc.iter().copied());
            let required_labels: Vec<usize> = labels.into_iter().collect();
            return Ok(Some(self.lasso_history(
                states,
                parent,
                &sub_edges,
                &scc,
                &required,
                &required_labels,
            )));
        }
        Ok(None)
    }

    fn finite_history(
        &self,
        states: &[PState],
        parent: &[Option<(usize, usize)>],
        last: usize,
    ) -> History {
        let (nodes, labels) = unwind(states, parent, last);
        History::finite_maximal(
            nodes
                .iter()
                .map(|&si| self.graph.nodes[states[si].node].clone())
                .collect(),
            labels,
        )
    }

    /// Stem (BFS parents) to the SCC anchor, then a cycle through all
    /// required states and at least one edge per required label.
    fn lasso_history(
        &self,
        states: &[PState],
        parent: &[Option<(usize, usize)>],
        edges: &[Vec<(usize, usize)>],
        scc: &[usize],
        required_states: &[usize],
        required_labels: &[usize],
    ) -> History {
        let anchor = scc[0];
        let (stem_nodes, stem_labels) = unwind(states, parent, anchor);

        let mut cycle_nodes: Vec<usize> = Vec::new(); // product indices after anchor
        let mut cycle_labels: Vec<usize> = Vec::new();
        let mut cur = anchor;
        fn extend(
            edges: &[Vec<(usize, usize)>],
            scc: &[usize],
            cur: &mut usize,
            goal: Goal,
            cycle_nodes: &mut Vec<usize>,
            cycle_labels: &mut Vec<usize>,
        ) {
            let (path_states, path_labels) = path_in_product(edges, scc, *cur, goal);
            for (s, l) in path_states.iter().zip(path_labels) {
                cycle_nodes.push(*s);
                cycle_labels.push(l);
            }
            if let Some(&last) = path_states.last() {
                *cur = last;
            }
        }
        for &req in required_states {
            extend(edges, scc, &mut cur, Goal::State(req), &mut cycle_nodes, &mut cycle_labels);
        }
        for &label in required_labels {
            extend(edges, scc, &mut cur, Goal::Label(label), &mut cycle_nodes, &mut cycle_labels);
        }
        extend(edges, scc, &mut cur, Goal::State(anchor), &mut cycle_nodes, &mut cycle_labels);
        if cycle_labels.is_empty() {
            // Degenerate: take any internal edge explicitly (it may be a
            // self-loop) and walk back to the anchor.
            let (entry, ti) = edges[anchor]
                .iter()
                .copied()
                .find(|&(_, ti)| scc.contains(&ti))
                .expect("scc has an internal edge");
            cycle_nodes.push(ti);
            cycle_labels.push(entry);
            cur = ti;
            extend(edges, scc, &mut cur, Goal::State(anchor), &mut cycle_nodes, &mut cycle_labels);
        }
        debug_assert_eq!(cycle_nodes.last(), Some(&anchor));
        cycle_nodes.pop();

        let mut configs: Vec<Configuration> = stem_nodes
            .iter()
            .map(|&si| self.graph.nodes[states[si].node].clone())
            .collect();
        let lasso_start = configs.len() - 1;
        configs.extend(
            cycle_nodes
                .iter()
                .map(|&si| self.graph.nodes[states[si].node].clone()),
        );
        let mut labels = stem_labels;
        labels.extend(cycle_labels);
        History::lasso(configs, labels, lasso_start)
    }
}

enum Goal {
    State(usize),
    Label(usize),
}

/// BFS path inside the SCC from `from` to the goal (a state, or any edge
/// with a given label). Returns states after `from` and the labels taken.
fn path_in_product(
    edges: &[Vec<(usize, usize)>],
    scc: &[usize],
    from: usize,
    goal: Goal,
) -> (Vec<usize>, Vec<usize>) {
    if let Goal::State(s) = goal {
        if s == from {
            return (Vec::new(), Vec::new());
        }
    }
    let inside = |s: usize| scc.contains(&s);
    let mut parent: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut finish: Option<usize> = None;
    'bfs: while let Some(s) = queue.pop_front() {
        for &(entry, t) in &edges[s] {
            if !inside(t) {
                continue;
            }
            if let Goal::Label(l) = goal {
                if entry == l {
                    // Take this edge now, even if t was visited before.
                    let mut seq_states = vec![t];
                    let mut seq_labels = vec![entry];
                    let mut cur = s;
                    while cur != from {
                        let (p, e) = parent[&cur];
                        seq_states.push(cur);
                        seq_labels.push(e);
                        cur = p;
                    }
                    // seq is reversed with the final edge first element.
                    seq_states.reverse();
                    seq_labels.reverse();
                    return (seq_states, seq_labels);
                }
            }
            if parent.contains_key(&t) || t == from {
                continue;
            }
            parent.insert(t, (s, entry));
            if let Goal::State(g) = goal {
                if t == g {
                    finish = Some(t);
                    break 'bfs;
                }
            }
            queue.push_back(t);
        }
    }
    let end = finish.expect("goal reachable within SCC");
    let mut seq_states = Vec::new();
    let mut seq_labels = Vec::new();
    let mut cur = end;
    while cur != from {
        let (p, e) = parent[&cur];
        seq_states.push(cur);
        seq_labels.push(e);
        cur = p;
    }
    seq_states.reverse();
    seq_labels.reverse();
    (seq_states, seq_labels)
}

fn unwind(
    _states: &[PState],
    parent: &[Option<(usize, usize)>],
    last: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut nodes = vec![last];
    let mut labels = Vec::new();
    let mut cur = last;
    while let Some((p, e)) = parent[cur] {
        labels.push(e);
        nodes.push(p);
        cur = p;
    }
    nodes.reverse();
    labels.reverse();
    (nodes, labels)
}

fn scc_has_internal_edge(scc: &[usize], edges: &[Vec<(usize, usize)>]) -> bool {
    scc.iter()
        .any(|&s| edges[s].iter().any(|&(_, t)| scc.contains(&t)))
}

/// Iterative Tarjan over the product adjacency.
fn product_sccs(edges: &[Vec<(usize, usize)>]) -> Vec<Vec<usize>> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0usize;
    let mut out = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        call.push((start, 0));
        index[start] = next;
        low[start] = next;
        next += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < edges[v].len() {
                let (_, w) = edges[v][*ei];
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent_v, _)) = call.last() {
                    low[parent_v] = low[parent_v].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Independent oracle: enumerates finite maximal histories and lassos with
/// stem+cycle length up to `stem_bound`, evaluating each with [`eval_at`].
pub fn brute_force_check(
    model: &LogicModel,
    phi: &Formula,
    stem_bound: usize,
    mode: CheckMode,
) -> Result<Verdict, CheckError> {
    let sys = model.sys;
    let bound_phi = phi.bind(&model.eta);
    let free: Vec<String> = bound_phi
        .free_vars()
        .into_iter()
        .filter(|v| !sys.agent_names.contains(v))
        .collect();
    if !free.is_empty() {
        return Err(CheckError::FreeVariables(free));
    }
    let graph = build_graph(sys, 100_000)?;

    let mut walk: Vec<usize> = vec![graph.root];
    let mut labels: Vec<usize> = Vec::new();
    let mut budget: u64 = 5_000_000;
    if let Some(history) =
        enumerate(model, &graph, &bound_phi, stem_bound, mode, &mut walk, &mut labels, &mut budget)?
    {
        return Ok(Verdict {
            holds: false,
            counterexample: Some((history, 0)),
        });
    }
    // No violation found: the result is reliable only if the bound covers
    // every simple stem plus every simple cycle.
    let needed = longest_simple_path(&graph) + longest_simple_cycle(&graph);
    if stem_bound < needed {
        return Err(CheckError::BoundInsufficient {
            bound: stem_bound,
            needed,
        });
    }
    Ok(Verdict {
        holds: true,
        counterexample: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    model: &LogicModel,
    graph: &ConfigurationGraph,
    phi: &Formula,
    bound: usize,
    mode: CheckMode,
    walk: &mut Vec<usize>,
    labels: &mut Vec<usize>,
    budget: &mut u64,
) -> Result<Option<History>, CheckError> {
    if *budget == 0 {
        return Err(CheckError::WalkBudgetExceeded);
    }
    *budget -= 1;
    let cur = *walk.last().expect("walk nonempty");

    // Finite maximal history if we are stuck.
    if graph.edges[cur].is_empty() {
        let configs = walk.iter().map(|&v| graph.nodes[v].clone()).collect();
        let h = History::finite_maximal(configs, labels.clone());
        if eval_at(&h, 0, phi, model)? != crate::tri::Tri::True {
            return Ok(Some(h));
        }
        return Ok(None);
    }

    // Lasso candidates: the walk closes a cycle at any earlier occurrence.
    if let Some(i) = walk[..walk.len() - 1].iter().position(|&v| v == cur) {
        let cycle_nodes = &walk[i..walk.len() - 1];
        let cycle_labels = &labels[i..];
        let spanning = match mode {
            CheckMode::AllMaximal => true,
            CheckMode::SpanningOnly => cycle_is_fair(graph, cycle_nodes, cycle_labels),
        };
        if spanning {
            let configs = walk[..walk.len() - 1]
                .iter()
                .map(|&v| graph.nodes[v].clone())
                .collect();
            let h = History::lasso(configs, labels.clone(), i);
            if eval_at(&h, 0, phi, model)? != crate::tri::Tri::True {
                return Ok(Some(h));
            }
        }
    }

    if labels.len() >= bound {
        return Ok(None);
    }
    for e in &graph.edges[cur] {
        walk.push(e.target);
        labels.push(e.entry);
        let found = enumerate(model, graph, phi, bound, mode, walk, labels, budget)?;
        walk.pop();
        labels.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Entry-level fairness on a cycle: every entry enabled at any cycle node
/// must occur among the cycle labels.
fn cycle_is_fair(graph: &ConfigurationGraph, nodes: &[usize], labels: &[usize]) -> bool {
    nodes.iter().all(|&v| {
        graph.edges[v]
            .iter()
            .all(|e| labels.contains(&e.entry))
    })
}

fn longest_simple_path(graph: &ConfigurationGraph) -> usize {
    fn dfs(graph: &ConfigurationGraph, v: usize, seen: &mut Vec<bool>) -> usize {
        let mut best = 0;
        for e in &graph.edges[v] {
            if !seen[e.target] {
                seen[e.target] = true;
                best = best.max(1 + dfs(graph, e.target, seen));
                seen[e.target] = false;
            }
        }
        best
    }
    let mut seen = vec![false; graph.node_count()];
    seen[graph.root] = true;
    dfs(graph, graph.root, &mut seen)
}

fn longest_simple_cycle(graph: &ConfigurationGraph) -> usize {
    fn dfs(
        graph: &ConfigurationGraph,
        start: usize,
        v: usize,
        len: usize,
        seen: &mut Vec<bool>,
        best: &mut usize,
    ) {
        for e in &graph.edges[v] {
            if e.target == start {
                *best = (*best).max(len + 1);
            } else if !seen[e.target] {
                seen[e.target] = true;
                dfs(graph, start, e.target, len + 1, seen, best);
                seen[e.target] = false;
            }
        }
    }
    let mut best = 0;
    for start in 0..graph.node_count() {
        let mut seen = vec![false; graph.node_count()];
        seen[start] = true;
        dfs(graph, start, start, 0, &mut seen, &mut best);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::parse::{parse_formula, NameContext};

    fn mc(sys: &crate::system::MemorySystem, text: &str, mode: CheckMode) -> Verdict {
        let ctx = NameContext::of(sys);
        let phi = parse_formula(text, Some(&ctx)).unwrap();
        let model = LogicModel::new(sys);
        model_check(&model, &phi, mode, 100_000).unwrap()
    }

    fn bf(sys: &crate::system::MemorySystem, text: &str, mode: CheckMode) -> Verdict {
        let ctx = NameContext::of(sys);
        let phi = parse_formula(text, Some(&ctx)).unwrap();
        let model = LogicModel::new(sys);
        brute_force_check(&model, &phi, 8, mode).unwrap()
    }

    #[test]
    fn maj1_collective_memory_holds() {
        let sys = fixtures::maj1();
        let v = mc(&sys, "<> [] forall x. g@x", CheckMode::AllMaximal);
        assert!(v.holds, "counterexample: {:?}", v.counterexample);
        assert!(bf(&sys, "<> [] forall x. g@x", CheckMode::AllMaximal).holds);
    }

    #[test]
    fn even2_emergence_fails_with_lasso() {
        let sys = fixtures::even2();
        let v = mc(&sys, "emergence", CheckMode::AllMaximal);
        assert!(!v.holds);
        let (h, pos) = v.counterexample.unwrap();
        assert_eq!(pos, 0);
        h.replay_check(&sys).unwrap();
        assert!(!bf(&sys, "emergence", CheckMode::AllMaximal).holds);
    }

    #[test]
    fn pred3_spanning_only_stabilizes_b() {
        let sys = fixtures::pred3();
        let v = mc(&sys, "<> [] forall x. b@x", CheckMode::SpanningOnly);
        assert!(v.holds, "counterexample: {:?}", v.counterexample);
        // Under all-maximal the property fails: a run may loop unfairly
        // without ever completing the takeover.
        let v = mc(&sys, "<> [] forall x. b@x", CheckMode::AllMaximal);
        assert!(!v.holds);
        if let Some((h, _)) = v.counterexample {
            h.replay_check(&sys).unwrap();
        }
    }

    #[test]
    fn true_holds_everywhere() {
        for sys in [fixtures::maj1(), fixtures::even2(), fixtures::pred3()] {
            assert!(mc(&sys, "true", CheckMode::AllMaximal).holds);
            assert!(mc(&sys, "true", CheckMode::SpanningOnly).holds);
            assert!(bf(&sys, "true", CheckMode::AllMaximal).holds);
        }
    }

    #[test]
    fn no_simultaneous_phi_and_not_phi() {
        for sys in [fixtures::maj1(), fixtures::even2(), fixtures::pred3()] {
            for text in ["<> [] forall x. g@x", "emergence", "g@1", "X #x. g@x >= 1"] {
                let pos = mc(&sys, text, CheckMode::AllMaximal);
                let neg = mc(&sys, &format!("~({text})"), CheckMode::AllMaximal);
                assert!(
                    !(pos.holds && neg.holds),
                    "{text} and its negation both hold"
                );
            }
        }
    }

    #[test]
    fn free_variables_rejected() {
        let sys = fixtures::maj1();
        let ctx = NameContext::of(&sys);
        let phi = parse_formula("g@z", Some(&ctx)).unwrap();
        let model = LogicModel::new(&sys);
        assert!(matches!(
            model_check(&model, &phi, CheckMode::AllMaximal, 100_000),
            Err(CheckError::FreeVariables(_))
        ));
        // Binding the variable fixes it.
        let mut model = LogicModel::new(&sys);
        model.eta.insert("z".into(), 0);
        assert!(model_check(&model, &phi, CheckMode::AllMaximal, 100_000).is_ok());
    }

    #[test]
    fn oracle_agreement_on_fixture_formulas() {
        for sys in [fixtures::maj1(), fixtures::even2(), fixtures::pred3()] {
            for text in [
                "g@1",
                "X g@1",
                "Y g@1",
                "<> #x. b@x >= 1",
                "[] #x. g@x >= 1",
                "<> [] forall x. g@x",
                "emergence",
                "P- g@1",
                "#x. g@x = 2 -> X #x. g@x >= 2",
            ] {
                for mode in [CheckMode::AllMaximal, CheckMode::SpanningOnly] {
                    let ctx = NameContext::of(&sys);
                    let phi = parse_formula(text, Some(&ctx)).unwrap();
                    let model = LogicModel::new(&sys);
                    let a = model_check(&model, &phi, mode, 100_000).unwrap();
                    let b = brute_force_check(&model, &phi, 10, mode).unwrap();
                    assert_eq!(a.holds, b.holds, "{text} ({mode:?})");
                }
            }
        }
    }

    #[test]
    fn counterexamples_replay_and_violate() {
        for sys in [fixtures::even2(), fixtures::pred3()] {
            for text in ["emergence", "[] #x. g@x >= 1", "stable(b)"] {
                let ctx = NameContext::of(&sys);
                let phi = parse_formula(text, Some(&ctx)).unwrap();
                let model = LogicModel::new(&sys);
                let v = model_check(&model, &phi, CheckMode::AllMaximal, 100_000).unwrap();
                if let Some((h, pos)) = v.counterexample {
                    h.replay_check(&sys).unwrap();
                    assert_eq!(
                        eval_at(&h, pos, &phi, &model).unwrap(),
                        crate::tri::Tri::False,
                        "{text}"
                    );
                }
            }
        }
    }
}
