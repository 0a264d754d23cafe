//! Linear-time temporal logic with past operators and counting quantifiers:
//! abstract syntax, substitution, and elimination of counting quantifiers
//! over the finite agent set into threshold (m-of-n) combinators.

pub mod check;
pub mod eval;
pub mod parse;

use std::fmt;

/// A term denotes an agent: either a resolved index or a name that is a
/// variable (or an agent name resolved at bind time when parsed without a
/// name context).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentTerm {
    Agent(usize),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CountOp {
    pub fn holds(self, count: i64, k: i64) -> bool {
        match self {
            CountOp::Eq => count == k,
            CountOp::Ne => count != k,
            CountOp::Lt => count < k,
            CountOp::Le => count <= k,
            CountOp::Gt => count > k,
            CountOp::Ge => count >= k,
        }
    }

    pub fn negate(self) -> CountOp {
        match self {
            CountOp::Eq => CountOp::Ne,
            CountOp::Ne => CountOp::Eq,
            CountOp::Lt => CountOp::Ge,
            CountOp::Le => CountOp::Gt,
            CountOp::Gt => CountOp::Le,
            CountOp::Ge => CountOp::Lt,
        }
    }
}

/// Core AST. `&`, `->`, `[]`, the past dual, `exists`/`forall`, signal@I,
/// `stable` and `emergence` are derived forms expanded by the parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    /// τ1 = τ2
    Eq(AgentTerm, AgentTerm),
    /// τ ∈ I (neighbourhood by name, resolved at evaluation time)
    In(AgentTerm, String),
    /// name@τ — name is a signal if it belongs to Γ, a proposition otherwise
    At(String, AgentTerm),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// ⊖ (previous)
    Prev(Box<Formula>),
    /// ○ (next)
    Next(Box<Formula>),
    /// past eventually
    Once(Box<Formula>),
    /// future eventually
    Eventually(Box<Formula>),
    /// #x. φ op k
    Count(String, Box<Formula>, CountOp, u32),
    /// m-of-n combinator produced by counting elimination
    Threshold(CountOp, u32, Vec<Formula>),
}

impl Formula {
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: Formula) -> Formula {
        self.not().or(other.not()).not()
    }

    pub fn implies(self, other: Formula) -> Formula {
        self.not().or(other)
    }

    pub fn always(self) -> Formula {
        Formula::Eventually(Box::new(self.not())).not()
    }

    pub fn historically(self) -> Formula {
        Formula::Once(Box::new(self.not())).not()
    }

    /// Free variables: names not bound by a counting quantifier. Agent
    /// names resolved by the parser are `AgentTerm::Agent` and never count.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let term = |t: &AgentTerm, bound: &Vec<String>, out: &mut Vec<String>| {
            if let AgentTerm::Name(x) = t {
                if !bound.contains(x) {
                    out.push(x.clone());
                }
            }
        };
        match self {
            Formula::True => {}
            Formula::Eq(a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
            Formula::In(a, _) => term(a, bound, out),
            Formula::At(_, a) => term(a, bound, out),
            Formula::Not(f)
            | Formula::Prev(f)
            | Formula::Next(f)
            | Formula::Once(f)
            | Formula::Eventually(f) => f.collect_free(bound, out),
            Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Count(x, f, _, _) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
            Formula::Threshold(_, _, fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
        }
    }

    /// Substitutes agent `j` for free occurrences of variable `x`.
    pub fn subst(&self, x: &str, j: usize) -> Formula {
        let term = |t: &AgentTerm| match t {
            AgentTerm::Name(n) if n == x => AgentTerm::Agent(j),
            other => other.clone(),
        };
        match self {
            Formula::True => Formula::True,
            Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
            Formula::In(a, i) => Formula::In(term(a), i.clone()),
            Formula::At(p, a) => Formula::At(p.clone(), term(a)),
            Formula::Not(f) => Formula::Not(Box::new(f.subst(x, j))),
            Formula::Or(a, b) => Formula::Or(Box::new(a.subst(x, j)), Box::new(b.subst(x, j))),
            Formula::Prev(f) => Formula::Prev(Box::new(f.subst(x, j))),
            Formula::Next(f) => Formula::Next(Box::new(f.subst(x, j))),
            Formula::Once(f) => Formula::Once(Box::new(f.subst(x, j))),
            Formula::Eventually(f) => Formula::Eventually(Box::new(f.subst(x, j))),
            Formula::Count(y, f, op, k) if y != x => {
                Formula::Count(y.clone(), Box::new(f.subst(x, j)), *op, *k)
            }
            Formula::Count(..) => self.clone(), // shadowed
            Formula::Threshold(op, k, fs) => {
                Formula::Threshold(*op, *k, fs.iter().map(|f| f.subst(x, j)).collect())
            }
        }
    }

    /// Binds remaining free variables to agents (the assignment η).
    pub fn bind(&self, eta: &std::collections::BTreeMap<String, usize>) -> Formula {
        let mut out = self.clone();
        for (x, &j) in eta {
            out = out.subst(x, j);
        }
        out
    }
}

/// Replaces every counting quantifier by an explicit threshold combinator
/// over the `n` agent instantiations, then normalizes negations so that
/// e.g. ∀x.φ (parsed as ¬#x.¬φ > 0) becomes threshold(≥ n) over positive
/// instances.
pub fn eliminate_counting(phi: &Formula, n: usize) -> Formula {
    normalize(&eliminate(phi, n))
}

fn eliminate(phi: &Formula, n: usize) -> Formula {
    match phi {
        Formula::Count(x, f, op, k) => {
            let instances = (0..n).map(|j| eliminate(&f.subst(x, j), n)).collect();
            Formula::Threshold(*op, *k, instances)
        }
        Formula::Not(f) => Formula::Not(Box::new(eliminate(f, n))),
        Formula::Or(a, b) => Formula::Or(Box::new(eliminate(a, n)), Box::new(eliminate(b, n))),
        Formula::Prev(f) => Formula::Prev(Box::new(eliminate(f, n))),
        Formula::Next(f) => Formula::Next(Box::new(eliminate(f, n))),
        Formula::Once(f) => Formula::Once(Box::new(eliminate(f, n))),
        Formula::Eventually(f) => Formula::Eventually(Box::new(eliminate(f, n))),
        Formula::Threshold(op, k, fs) => {
            Formula::Threshold(*op, *k, fs.iter().map(|f| eliminate(f, n)).collect())
        }
        leaf => leaf.clone(),
    }
}

fn normalize(phi: &Formula) -> Formula {
    match phi {
        Formula::Not(inner) => match normalize(inner) {
            // ¬ threshold(op, k) = threshold(¬op, k)
            Formula::Threshold(op, k, fs) => normalize_threshold(op.negate(), k, fs),
            Formula::Not(f) => *f,
            other => Formula::Not(Box::new(other)),
        },
        Formula::Or(a, b) => Formula::Or(Box::new(normalize(a)), Box::new(normalize(b))),
        Formula::Prev(f) => Formula::Prev(Box::new(normalize(f))),
        Formula::Next(f) => Formula::Next(Box::new(normalize(f))),
        Formula::Once(f) => Formula::Once(Box::new(normalize(f))),
        Formula::Eventually(f) => Formula::Eventually(Box::new(normalize(f))),
        Formula::Threshold(op, k, fs) => {
            normalize_threshold(*op, *k, fs.iter().map(normalize).collect())
        }
        Formula::Count(x, f, op, k) => {
            Formula::Count(x.clone(), Box::new(normalize(f)), *op, *k)
        }
        leaf => leaf.clone(),
    }
}

/// If every child is negated, restate the threshold over the positive
/// children: counting negations c' relates to counting positives c by
/// c' = n - c.
fn normalize_threshold(op: CountOp, k: u32, fs: Vec<Formula>) -> Formula {
    let all_negated = !fs.is_empty() && fs.iter().all(|f| matches!(f, Formula::Not(_)));
    if !all_negated {
        return Formula::Threshold(op, k, fs);
    }
    let positives: Vec<Formula> = fs
        .into_iter()
        .map(|f| match f {
            Formula::Not(inner) => *inner,
            _ => unreachable!(),
        })
        .collect();
    let n = positives.len() as i64;
    let m = n - k as i64; // count-of-positives bound
    // (n - c) op k  ⇔  c op' m
    let (op2, m) = match op {
        CountOp::Eq => (CountOp::Eq, m),
        CountOp::Ne => (CountOp::Ne, m),
        CountOp::Lt => (CountOp::Gt, m),
        CountOp::Le => (CountOp::Ge, m),
        CountOp::Gt => (CountOp::Lt, m),
        CountOp::Ge => (CountOp::Le, m),
    };
    if m < 0 {
        // Count can never be negative; fold to a constant.
        return match op2 {
            CountOp::Eq | CountOp::Lt | CountOp::Le => Formula::True.not(),
            CountOp::Ne | CountOp::Gt | CountOp::Ge => Formula::True,
        };
    }
    Formula::Threshold(op2, m as u32, positives)
}

impl fmt::Display for AgentTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentTerm::Agent(i) => write!(f, "{}", i + 1),
            AgentTerm::Name(n) => write!(f, "{n}"),
        }
    }
}

impl fmt::Display for CountOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CountOp::Eq => "=",
            CountOp::Ne => "!=",
            CountOp::Lt => "<",
            CountOp::Le => "<=",
            CountOp::Gt => ">",
            CountOp::Ge => ">=",
        };
        write!(f, "{s}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::In(a, i) => write!(f, "{a} in {i}"),
            Formula::At(p, a) => write!(f, "{p}@{a}"),
            Formula::Not(x) => write!(f, "~({x})"),
            Formula::Or(a, b) => write!(f, "({a}) | ({b})"),
            Formula::Prev(x) => write!(f, "Y ({x})"),
            Formula::Next(x) => write!(f, "X ({x})"),
            Formula::Once(x) => write!(f, "P- ({x})"),
            Formula::Eventually(x) => write!(f, "<> ({x})"),
            Formula::Count(x, b, op, k) => write!(f, "#{x}. ({b}) {op} {k}"),
            Formula::Threshold(op, k, fs) => {
                write!(f, "count[")?;
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "] {op} {k}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gx(j: usize) -> Formula {
        Formula::At("g".into(), AgentTerm::Agent(j))
    }

    #[test]
    fn exists_elimination() {
        // count(x, g@x, >=, 1) over two agents.
        let phi = Formula::Count(
            "x".into(),
            Box::new(Formula::At("g".into(), AgentTerm::Name("x".into()))),
            CountOp::Ge,
            1,
        );
        assert_eq!(
            eliminate_counting(&phi, 2),
            Formula::Threshold(CountOp::Ge, 1, vec![gx(0), gx(1)])
        );
    }

    #[test]
    fn forall_normalizes_to_positive_threshold() {
        // ∀x.g@x parsed as ¬(#x. ¬g@x > 0); eliminated over 3 agents.
        let phi = Formula::Count(
            "x".into(),
            Box::new(Formula::At("g".into(), AgentTerm::Name("x".into())).not()),
            CountOp::Gt,
            0,
        )
        .not();
        assert_eq!(
            eliminate_counting(&phi, 3),
            Formula::Threshold(CountOp::Ge, 3, vec![gx(0), gx(1), gx(2)])
        );
    }

    #[test]
    fn shadowed_binder_not_substituted() {
        let inner = Formula::Count(
            "x".into(),
            Box::new(Formula::At("g".into(), AgentTerm::Name("x".into()))),
            CountOp::Gt,
            0,
        );
        assert_eq!(inner.subst("x", 1), inner);
    }

    #[test]
    fn free_vars_and_bind() {
        let phi = Formula::Eq(AgentTerm::Name("x".into()), AgentTerm::Name("y".into()));
        assert_eq!(phi.free_vars(), vec!["x".to_string(), "y".to_string()]);
        let eta = std::collections::BTreeMap::from([("x".to_string(), 0), ("y".to_string(), 2)]);
        assert_eq!(
            phi.bind(&eta),
            Formula::Eq(AgentTerm::Agent(0), AgentTerm::Agent(2))
        );
        assert!(phi.bind(&eta).free_vars().is_empty());
    }

    #[test]
    fn elimination_leaves_no_variables() {
        let phi = Formula::Count(
            "x".into(),
            Box::new(Formula::Count(
                "y".into(),
                Box::new(Formula::Eq(
                    AgentTerm::Name("x".into()),
                    AgentTerm::Name("y".into()),
                )),
                CountOp::Ge,
                1,
            )),
            CountOp::Ge,
            2,
        );
        let out = eliminate_counting(&phi, 3);
        assert!(out.free_vars().is_empty());
        fn no_count(f: &Formula) -> bool {
            match f {
                Formula::Count(..) => false,
                Formula::Not(a)
                | Formula::Prev(a)
                | Formula::Next(a)
                | Formula::Once(a)
                | Formula::Eventually(a) => no_count(a),
                Formula::Or(a, b) => no_count(a) && no_count(b),
                Formula::Threshold(_, _, fs) => fs.iter().all(no_count),
                _ => true,
            }
        }
        assert!(no_count(&out));
    }
}
