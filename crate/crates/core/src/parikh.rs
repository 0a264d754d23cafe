//! Parikh images and Parikh automata: a finite automaton over Δ × D (D a
//! finite set of vectors in N^d) together with a Presburger constraint over
//! the accumulated vector, plus the encoding of a memory system's
//! configuration graph as a Parikh automaton.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::emergence::{check_emergence_on, EmergenceError, FairnessMode};
use crate::graph::{build_graph, GraphError};
use crate::presburger::{eval_presburger, Pres, PresburgerError, Rel, Term};
use crate::system::MemorySystem;
use crate::tri::Tri;

#[derive(Debug, Error)]
pub enum ParikhError {
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("letter index {letter} out of range (alphabet size {size})")]
    LetterOutOfRange { letter: usize, size: usize },
    #[error("vector has dimension {got}, automaton has dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error(transparent)]
    Presburger(#[from] PresburgerError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Emergence(#[from] EmergenceError),
}

/// Parikh image of a word over a plain alphabet: per-letter counts.
pub fn parikh_image(word: &[&str], alphabet: &[String]) -> Result<Vec<u64>, ParikhError> {
    let mut counts = vec![0u64; alphabet.len()];
    for &letter in word {
        let idx = alphabet
            .iter()
            .position(|a| a == letter)
            .ok_or_else(|| ParikhError::UnknownLetter(letter.to_string()))?;
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Parikh image over the extended alphabet Δ × D: componentwise sum of the
/// vector components.
pub fn parikh_image_ext(word: &[(usize, Vec<u64>)], dimension: usize) -> Result<Vec<u64>, ParikhError> {
    let mut sum = vec![0u64; dimension];
    for (_, v) in word {
        if v.len() != dimension {
            return Err(ParikhError::DimensionMismatch {
                got: v.len(),
                want: dimension,
            });
        }
        for (s, &c) in sum.iter_mut().zip(v) {
            *s += c;
        }
    }
    Ok(sum)
}

#[derive(Debug, Clone)]
pub struct PaTransition {
    pub source: usize,
    /// Index into `alphabet` (the Δ component of the letter).
    pub letter: usize,
    /// The D component of the letter.
    pub vector: Vec<u64>,
    pub target: usize,
}

#[derive(Debug, Clone)]
pub struct ParikhAutomaton {
    pub dimension: usize,
    pub alphabet: Vec<String>,
    pub state_count: usize,
    pub initial: usize,
    pub finals: Vec<usize>,
    pub transitions: Vec<PaTransition>,
    /// Presburger constraint over x1..xd, applied to the accumulated vector.
    pub constraint: Pres,
}

/// The always-true constraint 0 <= 0.
pub fn trivial_constraint() -> Pres {
    Pres::Atom(Term::Const(0), Rel::Le, Term::Const(0))
}

impl ParikhAutomaton {
    /// Projection λ to the Δ component.
    pub fn projection<'a>(&'a self, word: &[(usize, Vec<u64>)]) -> Vec<&'a str> {
        word.iter()
            .map(|&(l, _)| self.alphabet[l].as_str())
            .collect()
    }

    /// Does the underlying NFA accept the extended word (both letter
    /// components must match a transition exactly)?
    pub fn nfa_accepts(&self, word: &[(usize, Vec<u64>)]) -> Result<bool, ParikhError> {
        let mut current = vec![self.initial];
        for (letter, vector) in word {
            if *letter >= self.alphabet.len() {
                return Err(ParikhError::LetterOutOfRange {
                    letter: *letter,
                    size: self.alphabet.len(),
                });
            }
            if vector.len() != self.dimension {
                return Err(ParikhError::DimensionMismatch {
                    got: vector.len(),
                    want: self.dimension,
                });
            }
            let mut next = Vec::new();
            for t in &self.transitions {
                if t.letter == *letter
                    && &t.vector == vector
                    && current.contains(&t.source)
                    && !next.contains(&t.target)
                {
                    next.push(t.target);
                }
            }
            if next.is_empty() {
                return Ok(false);
            }
            current = next;
        }
        Ok(current.iter().any(|s| self.finals.contains(s)))
    }

    /// Acceptance per L(A)⌈φ: the NFA accepts and the constraint holds on
    /// the Parikh image. `Unknown` propagates from quantified constraints.
    pub fn accepts(
        &self,
        word: &[(usize, Vec<u64>)],
        quantifier_bound: u64,
    ) -> Result<Tri, ParikhError> {
        if !self.nfa_accepts(word)? {
            return Ok(Tri::False);
        }
        let image = parikh_image_ext(word, self.dimension)?;
        Ok(eval_presburger(&self.constraint, &image, quantifier_bound)?)
    }

    /// Bounded nonemptiness: BFS over (state, accumulated vector) up to
    /// `length_bound` steps, returning the shortest (then lexicographically
    /// least) witness, or None if no witness exists up to the bound. A None
    /// is exhaustion, not a proof of emptiness.
    pub fn bounded_nonempty(
        &self,
        length_bound: usize,
        quantifier_bound: u64,
    ) -> Result<Option<Witness>, ParikhError> {
        let mut order: Vec<&PaTransition> = self.transitions.iter().collect();
        order.sort_by(|a, b| {
            (a.letter, &a.vector, a.target).cmp(&(b.letter, &b.vector, b.target))
        });

        type Key = (usize, Vec<u64>);
        let start: Key = (self.initial, vec![0u64; self.dimension]);
        let mut parent: HashMap<Key, (Key, usize, Vec<u64>)> = HashMap::new();
        let mut queue = VecDeque::from([(start.clone(), 0usize)]);
        let check = |key: &Key,
                     parent: &HashMap<Key, (Key, usize, Vec<u64>)>|
         -> Result<Option<Witness>, ParikhError> {
            if !self.finals.contains(&key.0) {
                return Ok(None);
            }
            if eval_presburger(&self.constraint, &key.1, quantifier_bound)? != Tri::True {
                return Ok(None);
            }
            let mut word = Vec::new();
            let mut cur = key.clone();
            while cur != start {
                let (prev, letter, vector) = parent[&cur].clone();
                word.push((letter, vector));
                cur = prev;
            }
            word.reverse();
            Ok(Some(Witness {
                image: key.1.clone(),
                word,
            }))
        };
        if let Some(w) = check(&start, &parent)? {
            return Ok(Some(w));
        }
        let mut seen = std::collections::BTreeSet::from([start.clone()]);
        while let Some((key, depth)) = queue.pop_front() {
            if depth >= length_bound {
                continue;
            }
            for t in &order {
                if t.source != key.0 {
                    continue;
                }
                let mut vec2 = key.1.clone();
                for (s, &c) in vec2.iter_mut().zip(&t.vector) {
                    *s += c;
                }
                let next: Key = (t.target, vec2);
                if !seen.insert(next.clone()) {
                    continue;
                }
                parent.insert(next.clone(), (key.clone(), t.letter, t.vector.clone()));
                if let Some(w) = check(&next, &parent)? {
                    return Ok(Some(w));
                }
                queue.push_back((next, depth + 1));
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub word: Vec<(usize, Vec<u64>)>,
    pub image: Vec<u64>,
}

/// Encodes the configuration graph as a Parikh automaton of dimension |Γ|:
/// states are reachable configurations, a letter is (entry id, guard
/// distribution), and final states are the members of fair terminal classes
/// that stabilize to some signal. The constraint defaults to the trivial
/// one; callers may supply occurrence-count constraints over x1..x|Γ|.
pub fn system_to_parikh(
    sys: &MemorySystem,
    node_budget: usize,
    constraint: Option<Pres>,
) -> Result<ParikhAutomaton, ParikhError> {
    let graph = build_graph(sys, node_budget)?;
    let verdict = check_emergence_on(sys, &graph, FairnessMode::Entry, 1_000_000)?;
    let mut finals: Vec<usize> = verdict
        .classes
        .iter()
        .filter(|c| c.stable_signal.is_some())
        .flat_map(|c| c.nodes.iter().copied())
        .collect();
    finals.sort_unstable();
    finals.dedup();

    let alphabet: Vec<String> = sys.transitions.iter().map(|t| t.id.clone()).collect();
    let mut transitions = Vec::new();
    for (source, edges) in graph.edges.iter().enumerate() {
        for e in edges {
            let guard = &sys.transitions[e.entry].guard.0;
            transitions.push(PaTransition {
                source,
                letter: e.entry,
                vector: guard.iter().map(|&c| c as u64).collect(),
                target: e.target,
            });
        }
    }
    Ok(ParikhAutomaton {
        dimension: sys.signals.len(),
        alphabet,
        state_count: graph.node_count(),
        initial: graph.root,
        finals,
        transitions,
        constraint: constraint.unwrap_or_else(trivial_constraint),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::presburger::parse_presburger;

    fn equal_counts_pa() -> ParikhAutomaton {
        // Single state, letters a/b carry unit vectors; φ: x1 = x2.
        ParikhAutomaton {
            dimension: 2,
            alphabet: vec!["a".into(), "b".into()],
            state_count: 1,
            initial: 0,
            finals: vec![0],
            transitions: vec![
                PaTransition {
                    source: 0,
                    letter: 0,
                    vector: vec![1, 0],
                    target: 0,
                },
                PaTransition {
                    source: 0,
                    letter: 1,
                    vector: vec![0, 1],
                    target: 0,
                },
            ],
            constraint: parse_presburger("x1 = x2").unwrap(),
        }
    }

    #[test]
    fn parikh_image_counts() {
        let alpha = vec!["a".to_string(), "b".to_string()];
        assert_eq!(parikh_image(&["a", "a", "b"], &alpha).unwrap(), vec![2, 1]);
        assert_eq!(parikh_image(&[], &alpha).unwrap(), vec![0, 0]);
        assert!(matches!(
            parikh_image(&["c"], &alpha),
            Err(ParikhError::UnknownLetter(_))
        ));
    }

    #[test]
    fn parikh_homomorphism() {
        let u = vec![(0usize, vec![1, 0]), (1, vec![0, 1])];
        let v = vec![(0usize, vec![1, 0])];
        let uv: Vec<_> = u.iter().chain(&v).cloned().collect();
        let pu = parikh_image_ext(&u, 2).unwrap();
        let pv = parikh_image_ext(&v, 2).unwrap();
        let puv = parikh_image_ext(&uv, 2).unwrap();
        assert_eq!(puv, vec![pu[0] + pv[0], pu[1] + pv[1]]);
    }

    #[test]
    fn equal_counts_acceptance() {
        let pa = equal_counts_pa();
        let ab = vec![(0usize, vec![1, 0]), (1, vec![0, 1])];
        let aab = vec![(0usize, vec![1, 0]), (0, vec![1, 0]), (1, vec![0, 1])];
        assert_eq!(pa.accepts(&ab, 64).unwrap(), Tri::True);
        assert_eq!(pa.accepts(&aab, 64).unwrap(), Tri::False);
    }

    #[test]
    fn rejecting_nfa_rejects_everything() {
        let mut pa = equal_counts_pa();
        pa.finals.clear();
        let ab = vec![(0usize, vec![1, 0]), (1, vec![0, 1])];
        assert_eq!(pa.accepts(&ab, 64).unwrap(), Tri::False);
        assert_eq!(pa.accepts(&[], 64).unwrap(), Tri::False);
    }

    #[test]
    fn bounded_nonemptiness_finds_least_witness() {
        let pa = equal_counts_pa();
        // Empty word has equal counts (0 = 0) and state 0 is final.
        let w = pa.bounded_nonempty(2, 64).unwrap().unwrap();
        assert!(w.word.is_empty());

        // Exclude the empty word by requiring at least one occurrence.
        let mut pa2 = pa.clone();
        pa2.constraint = parse_presburger("x1 = x2 & x1 >= 1").unwrap();
        let w = pa2.bounded_nonempty(2, 64).unwrap().unwrap();
        assert_eq!(w.word.len(), 2);
        assert_eq!(w.word[0].0, 0); // lexicographically least: "ab"
        assert_eq!(w.word[1].0, 1);
        assert!(pa2.bounded_nonempty(1, 64).unwrap().is_none());
    }

    #[test]
    fn unsatisfiable_constraint_never_nonempty() {
        let mut pa = equal_counts_pa();
        pa.constraint = parse_presburger("x1 > x1").unwrap();
        assert!(pa.bounded_nonempty(4, 64).unwrap().is_none());
    }

    #[test]
    fn projection_consistency() {
        let pa = equal_counts_pa();
        let ab = vec![(0usize, vec![1, 0]), (1, vec![0, 1])];
        assert!(pa.nfa_accepts(&ab).unwrap());
        assert_eq!(pa.projection(&ab), vec!["a", "b"]);
    }

    #[test]
    fn maj1_encoding() {
        let pa = system_to_parikh(&fixtures::maj1(), 1000, None).unwrap();
        assert_eq!(pa.state_count, 2);
        assert_eq!(pa.dimension, 2);
        assert_eq!(pa.finals.len(), 1);
        let w = pa.bounded_nonempty(3, 64).unwrap().unwrap();
        assert!(!w.word.is_empty());
        // First step takes the (2,1)-guarded majority entry.
        assert_eq!(w.word[0].1, vec![2, 1]);
    }

    #[test]
    fn even2_encoding_has_no_finals() {
        let pa = system_to_parikh(&fixtures::even2(), 1000, None).unwrap();
        assert!(pa.finals.is_empty());
        assert!(pa.bounded_nonempty(6, 64).unwrap().is_none());
    }
}
