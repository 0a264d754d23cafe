//! Literal (three-valued) evaluation of formulas at history positions.
//!
//! Finite-maximal and lasso histories evaluate exactly; prefix histories
//! return `Unknown` whenever the verdict depends on the unseen future.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{AgentTerm, CountOp, Formula};
use crate::graph::{History, HistoryKind};
use crate::system::MemorySystem;
use crate::tri::Tri;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("position {pos} out of range (history length {len})")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown neighbourhood `{0}`")]
    UnknownNeighbourhood(String),
    #[error("unknown proposition `{0}` (strict mode)")]
    UnknownProposition(String),
}

/// The model (M, val, η): a system, a propositional valuation per state,
/// and an assignment of variables to agents.
#[derive(Debug, Clone)]
pub struct LogicModel<'a> {
    pub sys: &'a MemorySystem,
    /// Propositions per state, indexed like `sys.states`.
    pub val: Vec<BTreeSet<String>>,
    /// η: variable → agent index.
    pub eta: BTreeMap<String, usize>,
    /// In strict mode, a name that is neither a signal nor a known
    /// proposition is an error instead of evaluating to false.
    pub strict: bool,
}

impl<'a> LogicModel<'a> {
    pub fn new(sys: &'a MemorySystem) -> LogicModel<'a> {
        LogicModel {
            sys,
            val: vec![BTreeSet::new(); sys.states.len()],
            eta: BTreeMap::new(),
            strict: false,
        }
    }

    /// Sets the valuation from a state-name-keyed map.
    pub fn with_named_val(mut self, val: &BTreeMap<String, Vec<String>>) -> LogicModel<'a> {
        for (state, props) in val {
            if let Some(i) = self.sys.states.iter().position(|s| s == state) {
                self.val[i] = props.iter().cloned().collect();
            }
        }
        self
    }

    fn resolve(&self, t: &AgentTerm) -> Result<usize, EvalError> {
        match t {
            AgentTerm::Agent(i) => Ok(*i),
            AgentTerm::Name(n) => {
                if let Some(&j) = self.eta.get(n) {
                    return Ok(j);
                }
                if let Some(j) = self.sys.agent_names.iter().position(|a| a == n) {
                    return Ok(j);
                }
                Err(EvalError::UnboundVariable(n.clone()))
            }
        }
    }
}

/// ρ, k ⊨ φ under the model.
pub fn eval_at(
    h: &History,
    k: usize,
    phi: &Formula,
    model: &LogicModel,
) -> Result<Tri, EvalError> {
    if h.kind != HistoryKind::Lasso && k >= h.configs.len() {
        return Err(EvalError::PositionOutOfRange {
            pos: k,
            len: h.configs.len(),
        });
    }
    eval(h, k, phi, model)
}

fn eval(h: &History, k: usize, phi: &Formula, model: &LogicModel) -> Result<Tri, EvalError> {
    match phi {
        Formula::True => Ok(Tri::True),
        Formula::Eq(a, b) => Ok((model.resolve(a)? == model.resolve(b)?).into()),
        Formula::In(a, nbhd) => {
            let agent = model.resolve(a)?;
            let i = model
                .sys
                .neighbourhoods
                .iter()
                .position(|n| &n.name == nbhd)
                .ok_or_else(|| EvalError::UnknownNeighbourhood(nbhd.clone()))?;
            Ok(model.sys.neighbourhoods[i].members.contains(&agent).into())
        }
        Formula::At(name, a) => {
            let agent = model.resolve(a)?;
            let state = h
                .config_at(k)
                .ok_or(EvalError::PositionOutOfRange {
                    pos: k,
                    len: h.configs.len(),
                })?
                .state_of(agent);
            if let Some(gamma) = model.sys.signals.iter().position(|s| s == name) {
                return Ok((model.sys.signal_of[state] == gamma).into());
            }
            if model.strict && !model.val.iter().any(|ps| ps.contains(name)) {
                return Err(EvalError::UnknownProposition(name.clone()));
            }
            Ok(model.val[state].contains(name).into())
        }
        Formula::Not(f) => Ok(!eval(h, k, f, model)?),
        Formula::Or(a, b) => {
            let va = eval(h, k, a, model)?;
            if va == Tri::True {
                return Ok(Tri::True);
            }
            Ok(va.or(eval(h, k, b, model)?))
        }
        Formula::Prev(f) => {
            if k == 0 {
                Ok(Tri::False)
            } else {
                eval(h, k - 1, f, model)
            }
        }
        Formula::Next(f) => match h.kind {
            HistoryKind::Lasso => eval(h, k + 1, f, model),
            HistoryKind::FiniteMaximal => {
                if k + 1 < h.configs.len() {
                    eval(h, k + 1, f, model)
                } else {
                    Ok(Tri::False) // no successor instant
                }
            }
            HistoryKind::Prefix => {
                if k + 1 < h.configs.len() {
                    eval(h, k + 1, f, model)
                } else {
                    Ok(Tri::Unknown) // successor existence depends on the future
                }
            }
        },
        Formula::Once(f) => {
            let mut out = Tri::False;
            for l in (0..=k).rev() {
                match eval(h, l, f, model)? {
                    Tri::True => return Ok(Tri::True),
                    v => out = out.or(v),
                }
            }
            Ok(out)
        }
        Formula::Eventually(f) => {
            let last = match h.kind {
                HistoryKind::FiniteMaximal | HistoryKind::Prefix => h.configs.len() - 1,
                HistoryKind::Lasso => lasso_window_end(h, k, f),
            };
            let mut out = Tri::False;
            for l in k..=last {
                match eval(h, l, f, model)? {
                    Tri::True => return Ok(Tri::True),
                    v => out = out.or(v),
                }
            }
            match h.kind {
                HistoryKind::FiniteMaximal | HistoryKind::Lasso => Ok(out),
                HistoryKind::Prefix => Ok(out.or(Tri::Unknown)),
            }
        }
        Formula::Count(x, f, op, kk) => {
            let mut model2 = model.clone();
            let mut trues = 0i64;
            let mut unknowns = 0i64;
            for j in 0..model.sys.agent_count() {
                model2.eta.insert(x.clone(), j);
                match eval(h, k, f, &model2)? {
                    Tri::True => trues += 1,
                    Tri::Unknown => unknowns += 1,
                    Tri::False => {}
                }
            }
            Ok(threshold_verdict(*op, *kk as i64, trues, unknowns))
        }
        Formula::Threshold(op, kk, fs) => {
            let mut trues = 0i64;
            let mut unknowns = 0i64;
            for f in fs {
                match eval(h, k, f, model)? {
                    Tri::True => trues += 1,
                    Tri::Unknown => unknowns += 1,
                    Tri::False => {}
                }
            }
            Ok(threshold_verdict(*op, *kk as i64, trues, unknowns))
        }
    }
}

/// With `trues` definite hits and `unknowns` undecided ones, the real count
/// is somewhere in [trues, trues+unknowns]; the comparison is decided only
/// if it comes out the same across the whole interval.
fn threshold_verdict(op: CountOp, k: i64, trues: i64, unknowns: i64) -> Tri {
    let mut any_true = false;
    let mut any_false = false;
    for c in trues..=(trues + unknowns) {
        if op.holds(c, k) {
            any_true = true;
        } else {
            any_false = true;
        }
    }
    match (any_true, any_false) {
        (true, false) => Tri::True,
        (false, true) => Tri::False,
        _ => Tri::Unknown,
    }
}

/// On a lasso, the value of `f` as a function of position is eventually
/// periodic with the cycle length; `onset(f)` bounds where the periodic
/// tail starts, so checking positions up to onset + cycle is exhaustive
/// for an eventuality starting at `k`.
fn lasso_window_end(h: &History, k: usize, f: &Formula) -> usize {
    let stem = h.lasso_start.unwrap_or(0);
    let cycle = h.configs.len() - stem;
    let onset = onset(f, stem, cycle);
    onset.max(k) + cycle
}

fn onset(f: &Formula, stem: usize, cycle: usize) -> usize {
    match f {
        Formula::True | Formula::Eq(..) | Formula::In(..) | Formula::At(..) => stem,
        Formula::Not(a) => onset(a, stem, cycle),
        Formula::Or(a, b) => onset(a, stem, cycle).max(onset(b, stem, cycle)),
        Formula::Prev(a) => onset(a, stem, cycle) + 1,
        Formula::Next(a) | Formula::Eventually(a) => onset(a, stem, cycle),
        // ⟐ is monotone: it stabilizes one full cycle after its body does.
        Formula::Once(a) => onset(a, stem, cycle) + cycle,
        Formula::Count(_, a, _, _) => onset(a, stem, cycle),
        Formula::Threshold(_, _, fs) => fs
            .iter()
            .map(|x| onset(x, stem, cycle))
            .max()
            .unwrap_or(stem),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::parse::{parse_formula, NameContext};
    use crate::system::Configuration;

    fn maj1_lasso() -> History {
        // (G,G,B) -> (G,G,G) -> (G,G,G)^ω
        History::lasso(
            vec![Configuration(vec![0, 0, 1]), Configuration(vec![0, 0, 0])],
            vec![0, 0],
            1,
        )
    }

    fn even2_lasso() -> History {
        History::lasso(vec![Configuration(vec![0, 1])], vec![0], 0)
    }

    fn check(sys: &MemorySystem, h: &History, k: usize, text: &str) -> Tri {
        let ctx = NameContext::of(sys);
        let phi = parse_formula(text, Some(&ctx)).unwrap();
        let model = LogicModel::new(sys);
        eval_at(h, k, &phi, &model).unwrap()
    }

    #[test]
    fn counting_on_initial_configuration() {
        let sys = fixtures::maj1();
        let h = maj1_lasso();
        assert_eq!(check(&sys, &h, 0, "#x. g@x = 2"), Tri::True);
        assert_eq!(check(&sys, &h, 0, "#x. b@x = 1"), Tri::True);
        assert_eq!(check(&sys, &h, 1, "#x. g@x = 3"), Tri::True);
    }

    #[test]
    fn collective_memory_formula() {
        let sys = fixtures::maj1();
        let h = maj1_lasso();
        assert_eq!(check(&sys, &h, 0, "<> [] forall x. g@x"), Tri::True);
        assert_eq!(check(&sys, &h, 0, "stable(g)"), Tri::False);
        assert_eq!(check(&sys, &h, 1, "stable(g)"), Tri::True);
    }

    #[test]
    fn even2_never_stabilizes() {
        let sys = fixtures::even2();
        let h = even2_lasso();
        assert_eq!(check(&sys, &h, 0, "emergence"), Tri::False);
        assert_eq!(check(&sys, &h, 0, "<> [] forall x. g@x"), Tri::False);
        assert_eq!(check(&sys, &h, 0, "[] (g@1 & b@2)"), Tri::True);
    }

    #[test]
    fn prev_false_at_zero() {
        let sys = fixtures::maj1();
        let h = maj1_lasso();
        for phi in ["Y g@1", "Y true", "Y (~g@1)", "Y stable(g)"] {
            assert_eq!(check(&sys, &h, 0, phi), Tri::False, "{phi}");
        }
    }

    #[test]
    fn next_false_at_final_position() {
        let sys = fixtures::maj1();
        let h = History::finite_maximal(
            vec![Configuration(vec![0, 0, 1]), Configuration(vec![0, 0, 0])],
            vec![0],
        );
        for phi in ["X g@1", "X true", "X (~g@1)"] {
            assert_eq!(check(&sys, &h, 1, phi), Tri::False, "{phi}");
        }
        // But at an earlier position, X true holds.
        assert_eq!(check(&sys, &h, 0, "X true"), Tri::True);
    }

    #[test]
    fn prefix_three_valued() {
        let sys = fixtures::even2();
        let h = History::prefix(
            vec![Configuration(vec![0, 1]), Configuration(vec![0, 1])],
            vec![0],
        );
        assert_eq!(check(&sys, &h, 0, "<> b@1"), Tri::Unknown);
        assert_eq!(check(&sys, &h, 0, "<> b@2"), Tri::True); // already true now
        assert_eq!(check(&sys, &h, 1, "X g@1"), Tri::Unknown);
        assert_eq!(check(&sys, &h, 0, "g@1"), Tri::True); // present is known
        assert_eq!(check(&sys, &h, 0, "[] g@1"), Tri::Unknown);
        assert_eq!(check(&sys, &h, 1, "P- g@1"), Tri::True); // past is known
    }

    #[test]
    fn duality_laws() {
        let sys = fixtures::maj1();
        let h = maj1_lasso();
        let ctx = NameContext::of(&sys);
        let model = LogicModel::new(&sys);
        for body in ["g@1", "b@3", "#x. g@x >= 2"] {
            let phi = parse_formula(body, Some(&ctx)).unwrap();
            for k in 0..4 {
                let box_phi = eval_at(&h, k, &phi.clone().always(), &model).unwrap();
                let not_dia_not = eval_at(
                    &h,
                    k,
                    &Formula::Eventually(Box::new(phi.clone().not())).not(),
                    &model,
                )
                .unwrap();
                assert_eq!(box_phi, not_dia_not);
                let hist_phi = eval_at(&h, k, &phi.clone().historically(), &model).unwrap();
                let not_once_not =
                    eval_at(&h, k, &Formula::Once(Box::new(phi.clone().not())).not(), &model)
                        .unwrap();
                assert_eq!(hist_phi, not_once_not);
            }
        }
    }

    #[test]
    fn counting_monotonicity() {
        let sys = fixtures::maj1();
        let h = maj1_lasso();
        for k in 0..3 {
            for threshold in 1..=3u32 {
                let hi = check(&sys, &h, k, &format!("#x. g@x >= {threshold}"));
                let lo = check(&sys, &h, k, &format!("#x. g@x >= {}", threshold - 1));
                if hi == Tri::True {
                    assert_eq!(lo, Tri::True);
                }
            }
        }
    }

    #[test]
    fn elimination_preserves_verdicts() {
        let sys = fixtures::maj1();
        let ctx = NameContext::of(&sys);
        let model = LogicModel::new(&sys);
        let h = maj1_lasso();
        for text in [
            "#x. g@x = 2",
            "forall x. g@x",
            "exists x. b@x",
            "<> [] forall x. g@x",
            "#x. (x in I & Y g@x) > 1",
        ] {
            let phi = parse_formula(text, Some(&ctx)).unwrap();
            let elim = super::super::eliminate_counting(&phi, sys.agent_count());
            for k in 0..4 {
                assert_eq!(
                    eval_at(&h, k, &phi, &model).unwrap(),
                    eval_at(&h, k, &elim, &model).unwrap(),
                    "{text} at {k}"
                );
            }
        }
    }

    #[test]
    fn eta_binds_free_variables() {
        let sys = fixtures::maj1();
        let ctx = NameContext::of(&sys);
        let phi = parse_formula("g@z", Some(&ctx)).unwrap();
        let h = maj1_lasso();
        let mut model = LogicModel::new(&sys);
        assert!(matches!(
            eval_at(&h, 0, &phi, &model),
            Err(EvalError::UnboundVariable(_))
        ));
        model.eta.insert("z".into(), 2);
        assert_eq!(eval_at(&h, 0, &phi, &model).unwrap(), Tri::False); // agent 3 is B
    }

    #[test]
    fn unknown_proposition_modes() {
        let sys = fixtures::maj1();
        let ctx = NameContext::of(&sys);
        let phi = parse_formula("p@1", Some(&ctx)).unwrap();
        let h = maj1_lasso();
        let mut model = LogicModel::new(&sys);
        assert_eq!(eval_at(&h, 0, &phi, &model).unwrap(), Tri::False);
        model.strict = true;
        assert!(matches!(
            eval_at(&h, 0, &phi, &model),
            Err(EvalError::UnknownProposition(_))
        ));
        // With a valuation, props evaluate normally.
        model.strict = false;
        let val = BTreeMap::from([("G".to_string(), vec!["p".to_string()])]);
        let model = LogicModel::new(&sys).with_named_val(&val);
        assert_eq!(eval_at(&h, 0, &phi, &model).unwrap(), Tri::True);
    }

    #[test]
    fn position_out_of_range() {
        let sys = fixtures::maj1();
        let h = History::finite_maximal(vec![Configuration(vec![0, 0, 1])], vec![]);
        let ctx = NameContext::of(&sys);
        let phi = parse_formula("g@1", Some(&ctx)).unwrap();
        let model = LogicModel::new(&sys);
        assert!(matches!(
            eval_at(&h, 1, &phi, &model),
            Err(EvalError::PositionOutOfRange { .. })
        ));
    }
}
