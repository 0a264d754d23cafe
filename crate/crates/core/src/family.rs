//! Size-parameterized system families and empirical predicate extraction.
//!
//! A family is a size-based schema: rules are given per neighbourhood size
//! (a fixed size k, or the full population), with guards described by a
//! Presburger predicate over the signal-count vector. Instantiating the
//! family at a population size and an initial signal distribution yields an
//! ordinary system, and running emergence analysis over all distributions
//! produces the predicate the family computes — which can then be compared
//! against a Presburger specification per output signal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emergence::{check_emergence, EmergenceBudgets, EmergenceError, FairnessMode};
use crate::presburger::{eval_presburger, parse_presburger, Pres, PresburgerError};
use crate::system::{MemorySystem, RawTransition, SystemError};
use crate::tri::Tri;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("distribution has {got} components, family has {want} signals")]
    DimensionMismatch { got: usize, want: usize },
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("no initial state declared for signal `{0}`")]
    NoInitialState(String),
    #[error("fixed neighbourhood size {size} exceeds population {n}")]
    SizeTooLarge { size: usize, n: usize },
    #[error("guard predicate error: {0}")]
    Guard(#[from] PresburgerError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Emergence(#[from] EmergenceError),
}

/// Neighbourhood size selector for a rule template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeSpec {
    /// Every subset of exactly k agents.
    Fixed(usize),
    /// The single neighbourhood containing the whole population.
    #[serde(with = "full_tag")]
    Full,
}

mod full_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("full")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let tag = String::deserialize(d)?;
        if tag == "full" {
            Ok(())
        } else {
            Err(D::Error::custom("expected \"full\" or an integer size"))
        }
    }
}

/// One δ_k template: applies to every neighbourhood of the selected size,
/// for every signal-count vector satisfying `when`.
#[derive(Debug, Clone)]
pub struct RuleTemplate {
    pub size: SizeSpec,
    /// Guard predicate over x1..xd, one variable per signal, evaluated on
    /// concrete count vectors; must be quantifier-free to select guards.
    pub when: Pres,
    /// (signal, state, next state) by name.
    pub rule: Vec<(String, String, String)>,
}

#[derive(Debug, Clone)]
pub struct SystemFamily {
    pub states: Vec<String>,
    pub signals: Vec<String>,
    pub signal_of: BTreeMap<String, String>,
    /// Which state an agent starts in to realize one unit of each signal.
    pub initial_state_of: BTreeMap<String, String>,
    pub rules: Vec<RuleTemplate>,
}

impl SystemFamily {
    /// Instantiates the family at the initial distribution `y` (one count
    /// per signal, in signal order); the population size is the sum.
    pub fn instantiate(&self, y: &[u64]) -> Result<MemorySystem, FamilyError> {
        if y.len() != self.signals.len() {
            return Err(FamilyError::DimensionMismatch {
                got: y.len(),
                want: self.signals.len(),
            });
        }
        let n = y.iter().sum::<u64>() as usize;
        if n == 0 {
            return Err(FamilyError::EmptyPopulation);
        }
        let agent_names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();

        let mut initial = BTreeMap::new();
        let mut agent = 0usize;
        for (gamma, &count) in self.signals.iter().zip(y) {
            let state = self
                .initial_state_of
                .get(gamma)
                .ok_or_else(|| FamilyError::NoInitialState(gamma.clone()))?;
            for _ in 0..count {
                initial.insert(agent_names[agent].clone(), state.clone());
                agent += 1;
            }
        }

        // Neighbourhoods needed by the templates, deduplicated by member set.
        let mut neighbourhoods: Vec<(String, Vec<String>)> = Vec::new();
        let mut have = BTreeMap::new();
        let mut nbhds_of_size = |size: usize| -> Vec<String> {
            let mut names = Vec::new();
            for members in subsets_of_size(n, size) {
                let name = if size == n {
                    "N".to_string()
                } else {
                    format!(
                        "I{}",
                        members
                            .iter()
                            .map(|i| (i + 1).to_string())
                            .collect::<Vec<_>>()
                            .join("-")
                    )
                };
                if !have.contains_key(&members) {
                    have.insert(members.clone(), name.clone());
                    neighbourhoods.push((
                        name.clone(),
                        members.iter().map(|&i| agent_names[i].clone()).collect(),
                    ));
                }
                names.push(have[&members].clone());
            }
            names
        };

        let mut transitions = Vec::new();
        for (ri, template) in self.rules.iter().enumerate() {
            let size = match template.size {
                SizeSpec::Fixed(k) => {
                    if k > n {
                        return Err(FamilyError::SizeTooLarge { size: k, n });
                    }
                    k
                }
                SizeSpec::Full => n,
            };
            let names = nbhds_of_size(size);
            for guard in compositions(size as u32, self.signals.len()) {
                let point: Vec<u64> = guard.iter().map(|&c| c as u64).collect();
                if eval_presburger(&template.when, &point, 64)? != Tri::True {
                    continue;
                }
                for name in &names {
                    transitions.push(RawTransition {
                        id: format!(
                            "r{ri}-{name}-{}",
                            guard
                                .iter()
                                .map(|c| c.to_string())
                                .collect::<Vec<_>>()
                                .join("-")
                        ),
                        neighbourhood: name.clone(),
                        guard: guard.clone(),
                        rule: template.rule.clone(),
                    });
                }
            }
        }

        Ok(MemorySystem::from_parts(
            self.states.clone(),
            self.signals.clone(),
            &self.signal_of,
            agent_names,
            neighbourhoods,
            transitions,
            &initial,
        )?)
    }
}

/// All size-`k` subsets of 0..n, lexicographically.
fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    if k > 0 && k <= n {
        rec(n, k, 0, &mut cur, &mut out);
    }
    out
}

/// All vectors of `parts` naturals summing to `total`, lexicographically.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(rest: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=rest {
            cur.push(c);
            go(rest - c, left - 1, cur, out);
            cur.pop();
        }
    }
    if parts > 0 {
        go(total, parts, &mut cur, &mut out);
    }
    out
}

/// Verdict of one table cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableVerdict {
    /// Emergence supported and every fair terminal class stabilizes on this
    /// one signal.
    Signal { signal: String },
    /// No emergence, or classes stabilize on different signals.
    Bottom { ambiguous: bool },
    /// The configuration graph exceeded the node budget at this entry.
    Truncated,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredicateTable {
    pub signals: Vec<String>,
    /// (initial distribution, verdict), ordered by size then lexicographic.
    pub rows: Vec<(Vec<u64>, TableVerdict)>,
}

impl PredicateTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for s in &self.signals {
            out.push_str(&format!(",y_{s}"));
        }
        out.push_str(",verdict\n");
        for (y, v) in &self.rows {
            out.push_str(&y.iter().sum::<u64>().to_string());
            for c in y {
                out.push_str(&format!(",{c}"));
            }
            let verdict = match v {
                TableVerdict::Signal { signal } => signal.clone(),
                TableVerdict::Bottom { .. } => "bottom".to_string(),
                TableVerdict::Truncated => "truncated".to_string(),
            };
            out.push_str(&format!(",{verdict}\n"));
        }
        out
    }
}

/// For every population size n ≤ `n_max` and every initial signal
/// distribution y with |y| = n, runs the exact emergence decision and
/// records the stable signal (or ⊥). Truncated entries are marked and the
/// table is still returned.
pub fn computed_predicate_table(
    fam: &SystemFamily,
    n_max: usize,
    budgets: EmergenceBudgets,
) -> Result<PredicateTable, FamilyError> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for y in compositions(n as u32, fam.signals.len()) {
            let y: Vec<u64> = y.iter().map(|&c| c as u64).collect();
            let sys = fam.instantiate(&y)?;
            let verdict = match check_emergence(&sys, FairnessMode::Entry, budgets) {
                Ok(v) if v.supports => {
                    let mut signals: Vec<usize> =
                        v.classes.iter().filter_map(|c| c.stable_signal).collect();
                    signals.sort_unstable();
                    signals.dedup();
                    match signals.as_slice() {
                        [gamma] => TableVerdict::Signal {
                            signal: sys.signals[*gamma].clone(),
                        },
                        _ => TableVerdict::Bottom { ambiguous: true },
                    }
                }
                Ok(_) => TableVerdict::Bottom { ambiguous: false },
                Err(EmergenceError::Graph(_)) => TableVerdict::Truncated,
                Err(e) => return Err(FamilyError::Emergence(e)),
            };
            rows.push((y, verdict));
        }
    }
    Ok(PredicateTable {
        signals: fam.signals.clone(),
        rows,
    })
}

/// Per-point comparison of the table against a Presburger spec per signal.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SpecReport {
    /// (point, explanation) for every decided disagreement.
    pub mismatches: Vec<(Vec<u64>, String)>,
    /// Points where a quantified spec formula evaluated to unknown.
    pub inconclusive: Vec<(Vec<u64>, String)>,
}

impl SpecReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.inconclusive.is_empty()
    }
}

/// Each spec formula must hold exactly at the table points mapped to its
/// signal. Truncated cells are reported as inconclusive.
pub fn check_semilinear_spec(
    table: &PredicateTable,
    spec: &BTreeMap<String, Pres>,
    quantifier_bound: u64,
) -> Result<SpecReport, PresburgerError> {
    let mut report = SpecReport::default();
    for (y, verdict) in &table.rows {
        if matches!(verdict, TableVerdict::Truncated) {
            report
                .inconclusive
                .push((y.clone(), "table entry truncated".to_string()));
            continue;
        }
        for (gamma, phi) in spec {
            let expected = matches!(verdict, TableVerdict::Signal { signal } if signal == gamma);
            match eval_presburger(phi, y, quantifier_bound)? {
                Tri::Unknown => report
                    .inconclusive
                    .push((y.clone(), format!("spec for `{gamma}` is unknown here"))),
                t => {
                    let holds = t == Tri::True;
                    if holds != expected {
                        report.mismatches.push((
                            y.clone(),
                            format!(
                                "spec for `{gamma}` is {holds} but table verdict is {verdict:?}"
                            ),
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The majority family: one full-population neighbourhood; a strict
/// g-majority converts everyone to G, a strict b-majority to B, and an even
/// split leaves every state unchanged (the population stays evenly matched
/// forever).
pub fn fam_maj() -> SystemFamily {
    fam_maj_with_order(["g", "b"], ["G", "B"])
}

/// The same family with signal/state labels supplied explicitly, used to
/// test relabeling equivariance.
pub fn fam_maj_with_order(signals: [&str; 2], states: [&str; 2]) -> SystemFamily {
    let p = |s: &str| parse_presburger(s).expect("guard predicate parses");
    let (g, b) = (signals[0].to_string(), signals[1].to_string());
    let (gq, bq) = (states[0].to_string(), states[1].to_string());
    SystemFamily {
        states: vec![gq.clone(), bq.clone()],
        signals: vec![g.clone(), b.clone()],
        signal_of: [(gq.clone(), g.clone()), (bq.clone(), b.clone())].into(),
        initial_state_of: [(g.clone(), gq.clone()), (b.clone(), bq.clone())].into(),
        rules: vec![
            RuleTemplate {
                size: SizeSpec::Full,
                when: p("x1 > x2"),
                rule: vec![
                    (g.clone(), gq.clone(), gq.clone()),
                    (b.clone(), bq.clone(), gq.clone()),
                ],
            },
            RuleTemplate {
                size: SizeSpec::Full,
                when: p("x2 > x1"),
                rule: vec![
                    (g.clone(), gq.clone(), bq.clone()),
                    (b.clone(), bq.clone(), bq.clone()),
                ],
            },
            RuleTemplate {
                size: SizeSpec::Full,
                when: p("x1 = x2"),
                rule: vec![(g, gq.clone(), gq), (b, bq.clone(), bq)],
            },
        ],
    }
}

/// On-disk family description; guards are Presburger formula strings.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub states: Vec<String>,
    pub signals: Vec<String>,
    pub signal_of: BTreeMap<String, String>,
    pub initial_state_of: BTreeMap<String, String>,
    pub rules: Vec<RuleFileEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFileEntry {
    pub size: SizeSpec,
    pub when: String,
    /// [signal, state, next state] triples.
    pub rule: Vec<(String, String, String)>,
}

impl FamilyFile {
    pub fn into_family(self) -> Result<SystemFamily, PresburgerError> {
        let rules = self
            .rules
            .into_iter()
            .map(|r| {
                Ok(RuleTemplate {
                    size: r.size,
                    when: parse_presburger(&r.when)?,
                    rule: r.rule,
                })
            })
            .collect::<Result<_, PresburgerError>>()?;
        Ok(SystemFamily {
            states: self.states,
            signals: self.signals,
            signal_of: self.signal_of,
            initial_state_of: self.initial_state_of,
            rules,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n_max: usize) -> PredicateTable {
        computed_predicate_table(&fam_maj(), n_max, EmergenceBudgets::default()).unwrap()
    }

    #[test]
    fn instances_validate_for_all_sizes() {
        let fam = fam_maj();
        for n in 1..=6u32 {
            for y in compositions(n, 2) {
                let y: Vec<u64> = y.iter().map(|&c| c as u64).collect();
                let sys = fam.instantiate(&y).unwrap();
                let report = sys.validate();
                assert!(report.is_valid(), "n={n} y={y:?}: {:?}", report.violations);
            }
        }
    }

    #[test]
    fn n3_two_one_computes_g() {
        let t = table(3);
        let row = t.rows.iter().find(|(y, _)| y == &[2, 1]).unwrap();
        assert_eq!(
            row.1,
            TableVerdict::Signal {
                signal: "g".into()
            }
        );
    }

    #[test]
    fn n4_even_split_is_bottom() {
        let t = table(4);
        let row = t.rows.iter().find(|(y, _)| y == &[2, 2]).unwrap();
        assert_eq!(row.1, TableVerdict::Bottom { ambiguous: false });
    }

    #[test]
    fn full_table_matches_majority_predicate() {
        let t = table(6);
        for (y, v) in &t.rows {
            let expected = match y[0].cmp(&y[1]) {
                std::cmp::Ordering::Greater => TableVerdict::Signal { signal: "g".into() },
                std::cmp::Ordering::Less => TableVerdict::Signal { signal: "b".into() },
                std::cmp::Ordering::Equal => TableVerdict::Bottom { ambiguous: false },
            };
            assert_eq!(v, &expected, "y = {y:?}");
        }
    }

    #[test]
    fn spec_comparison_clean_and_swapped() {
        let t = table(6);
        let spec: BTreeMap<String, Pres> = [
            ("g".to_string(), parse_presburger("x1 > x2").unwrap()),
            ("b".to_string(), parse_presburger("x2 > x1").unwrap()),
        ]
        .into();
        let report = check_semilinear_spec(&t, &spec, 64).unwrap();
        assert!(report.is_clean(), "{report:?}");

        let swapped: BTreeMap<String, Pres> = [
            ("g".to_string(), parse_presburger("x2 > x1").unwrap()),
            ("b".to_string(), parse_presburger("x1 > x2").unwrap()),
        ]
        .into();
        let report = check_semilinear_spec(&t, &swapped, 64).unwrap();
        // Every decided non-tie point mismatches twice (once per signal).
        let non_tie = t
            .rows
            .iter()
            .filter(|(y, _)| y[0] != y[1])
            .count();
        assert_eq!(report.mismatches.len(), 2 * non_tie);
    }

    #[test]
    fn relabeling_transposes_table() {
        let normal = table(5);
        let swapped_fam = fam_maj_with_order(["b", "g"], ["B", "G"]);
        let swapped =
            computed_predicate_table(&swapped_fam, 5, EmergenceBudgets::default()).unwrap();
        for (y, v) in &normal.rows {
            let transposed: Vec<u64> = vec![y[1], y[0]];
            let other = swapped
                .rows
                .iter()
                .find(|(z, _)| z == &transposed)
                .map(|(_, w)| w)
                .unwrap();
            assert_eq!(v, other, "y = {y:?}");
        }
    }

    #[test]
    fn family_file_round_trip() {
        let fam = fam_maj();
        let file = FamilyFile {
            states: fam.states.clone(),
            signals: fam.signals.clone(),
            signal_of: fam.signal_of.clone(),
            initial_state_of: fam.initial_state_of.clone(),
            rules: vec![
                RuleFileEntry {
                    size: SizeSpec::Full,
                    when: "x1 > x2".into(),
                    rule: fam.rules[0].rule.clone(),
                },
                RuleFileEntry {
                    size: SizeSpec::Full,
                    when: "x2 > x1".into(),
                    rule: fam.rules[1].rule.clone(),
                },
                RuleFileEntry {
                    size: SizeSpec::Full,
                    when: "x1 = x2".into(),
                    rule: fam.rules[2].rule.clone(),
                },
            ],
        };
        let json = serde_json::to_string(&file).unwrap();
        let back: FamilyFile = serde_json::from_str(&json).unwrap();
        let fam2 = back.into_family().unwrap();
        let t1 = computed_predicate_table(&fam, 4, EmergenceBudgets::default()).unwrap();
        let t2 = computed_predicate_table(&fam2, 4, EmergenceBudgets::default()).unwrap();
        assert_eq!(t1.rows, t2.rows);
    }

    #[test]
    fn pairwise_fixed_size_instantiates_all_pairs() {
        // A one-rule pairwise template generates all C(n,2) neighbourhoods.
        let mut fam = fam_maj();
        fam.rules = vec![RuleTemplate {
            size: SizeSpec::Fixed(2),
            when: parse_presburger("x1 >= 0").unwrap(),
            rule: vec![("g".into(), "G".into(), "G".into())],
        }];
        let sys = fam.instantiate(&[2, 2]).unwrap();
        assert_eq!(sys.neighbourhoods.len(), 6);
        assert!(sys.validate().flags.pairwise);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(matches!(
            fam_maj().instantiate(&[1, 2, 3]),
            Err(FamilyError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            fam_maj().instantiate(&[0, 0]),
            Err(FamilyError::EmptyPopulation)
        ));
    }
}
