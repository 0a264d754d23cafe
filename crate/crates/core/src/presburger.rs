//! Presburger arithmetic over the naturals: terms built from constants,
//! variables, addition and literal scalar multiples; atoms compare terms
//! with >, <, >=, <= (equality is sugar); quantifiers are evaluated by
//! bounded witness search and report `Unknown` where the bound is not
//! conclusive for the quantifier's polarity.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::tri::Tri;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Const(u64),
    Var(String),
    Add(Box<Term>, Box<Term>),
    /// n * t with a literal natural n.
    Scale(u64, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    fn holds(self, a: u64, b: u64) -> bool {
        match self {
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Gt => a > b,
            Rel::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pres {
    Atom(Term, Rel, Term),
    Not(Box<Pres>),
    And(Box<Pres>, Box<Pres>),
    Or(Box<Pres>, Box<Pres>),
    Exists(String, Box<Pres>),
    Forall(String, Box<Pres>),
}

impl Pres {
    /// Equality as the conjunction of >= and <=.
    pub fn eq(lhs: Term, rhs: Term) -> Pres {
        Pres::And(
            Box::new(Pres::Atom(lhs.clone(), Rel::Ge, rhs.clone())),
            Box::new(Pres::Atom(lhs, Rel::Le, rhs)),
        )
    }

    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Evaluates under `env`; quantified variables range over [0, bound].
    pub fn eval(&self, env: &BTreeMap<String, u64>, bound: u64) -> Result<Tri, PresburgerError> {
        match self {
            Pres::Atom(l, r, rhs) => {
                Ok(r.holds(eval_term(l, env)?, eval_term(rhs, env)?).into())
            }
            Pres::Not(p) => Ok(!p.eval(env, bound)?),
            Pres::And(a, b) => Ok(a.eval(env, bound)?.and(b.eval(env, bound)?)),
            Pres::Or(a, b) => Ok(a.eval(env, bound)?.or(b.eval(env, bound)?)),
            Pres::Exists(x, p) => {
                let mut env = env.clone();
                let mut out = Tri::Unknown; // no witness below the bound is inconclusive
                for v in 0..=bound {
                    env.insert(x.clone(), v);
                    if p.eval(&env, bound)? == Tri::True {
                        out = Tri::True;
                        break;
                    }
                }
                Ok(out)
            }
            Pres::Forall(x, p) => {
                let mut env = env.clone();
                let mut out = Tri::Unknown; // passing every value below the bound is inconclusive
                for v in 0..=bound {
                    env.insert(x.clone(), v);
                    if p.eval(&env, bound)? == Tri::False {
                        out = Tri::False;
                        break;
                    }
                }
                Ok(out)
            }
        }
    }
}

fn collect_free(p: &Pres, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match p {
        Pres::Atom(l, _, r) => {
            term_vars(l, bound, out);
            term_vars(r, bound, out);
        }
        Pres::Not(a) => collect_free(a, bound, out),
        Pres::And(a, b) | Pres::Or(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Pres::Exists(x, a) | Pres::Forall(x, a) => {
            bound.push(x.clone());
            collect_free(a, bound, out);
            bound.pop();
        }
    }
}

fn term_vars(t: &Term, bound: &[String], out: &mut Vec<String>) {
    match t {
        Term::Const(_) => {}
        Term::Var(x) => {
            if !bound.contains(x) {
                out.push(x.clone());
            }
        }
        Term::Add(a, b) => {
            term_vars(a, bound, out);
            term_vars(b, bound, out);
        }
        Term::Scale(_, a) => term_vars(a, bound, out),
    }
}

fn eval_term(t: &Term, env: &BTreeMap<String, u64>) -> Result<u64, PresburgerError> {
    match t {
        Term::Const(c) => Ok(*c),
        Term::Var(x) => env
            .get(x)
            .copied()
            .ok_or_else(|| PresburgerError::UnboundVariable(x.clone())),
        Term::Add(a, b) => Ok(eval_term(a, env)?.saturating_add(eval_term(b, env)?)),
        Term::Scale(n, a) => Ok(n.saturating_mul(eval_term(a, env)?)),
    }
}

#[derive(Debug, Error)]
pub enum PresburgerError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("formula uses {var}, but the point has dimension {dim} (expected x1..x{dim})")]
    DimensionMismatch { var: String, dim: usize },
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
}

/// Evaluates a formula whose free variables are x1..xd at a point of
/// dimension d.
pub fn eval_presburger(
    phi: &Pres,
    point: &[u64],
    quantifier_bound: u64,
) -> Result<Tri, PresburgerError> {
    let mut env = BTreeMap::new();
    for (i, &v) in point.iter().enumerate() {
        env.insert(format!("x{}", i + 1), v);
    }
    for var in phi.free_vars() {
        if !env.contains_key(&var) {
            return Err(PresburgerError::DimensionMismatch {
                var,
                dim: point.len(),
            });
        }
    }
    phi.eval(&env, quantifier_bound)
}

// ---------------------------------------------------------------------------
// Concrete syntax
//
// formula := ("E"|"A"|"exists"|"forall") ident "." formula | implication
// implication := disjunction ("->" formula)?
// disjunction := conjunction ("|" conjunction)*
// conjunction := negation ("&" negation)*
// negation := "!" negation | "(" formula ")" | term rel term
// rel := "<=" | ">=" | "<" | ">" | "=" | "!="
// term := factor ("+" factor)*
// factor := nat ("*" factor)? | ident | "(" term ")"

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(u64),
    Ident(String),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, PresburgerError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let col = i + 1;
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let n: u64 = text[start..i].parse().map_err(|_| PresburgerError::Syntax {
                col,
                msg: "integer literal too large".into(),
            })?;
            toks.push((col, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            toks.push((col, Tok::Ident(text[start..i].to_string())));
        } else {
            let two = text.get(i..i + 2).unwrap_or("");
            let sym = match two {
                "<=" | ">=" | "->" | "!=" => Some(match two {
                    "<=" => "<=",
                    ">=" => ">=",
                    "->" => "->",
                    _ => "!=",
                }),
                _ => None,
            };
            if let Some(s) = sym {
                toks.push((col, Tok::Sym(s)));
                i += 2;
            } else {
                let s = match c {
                    '+' => "+",
                    '*' => "*",
                    '(' => "(",
                    ')' => ")",
                    '<' => "<",
                    '>' => ">",
                    '=' => "=",
                    '!' => "!",
                    '&' => "&",
                    '|' => "|",
                    '.' => ".",
                    _ => {
                        return Err(PresburgerError::Syntax {
                            col,
                            msg: format!("unexpected character `{c}`"),
                        })
                    }
                };
                toks.push((col, Tok::Sym(s)));
                i += 1;
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|&(c, _)| c)
            .unwrap_or(self.end_col)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if let Some(Tok::Sym(t)) = self.peek() {
            if *t == s {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn err(&self, msg: impl Into<String>) -> PresburgerError {
        PresburgerError::Syntax {
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn formula(&mut self) -> Result<Pres, PresburgerError> {
        if let Some(Tok::Ident(kw)) = self.peek() {
            if matches!(kw.as_str(), "E" | "A" | "exists" | "forall") {
                // Quantifier only when followed by `ident .`
                if let (Some((_, Tok::Ident(var))), Some((_, Tok::Sym(".")))) =
                    (self.toks.get(self.pos + 1), self.toks.get(self.pos + 2))
                {
                    let exists = matches!(kw.as_str(), "E" | "exists");
                    let var = var.clone();
                    self.pos += 3;
                    let body = Box::new(self.formula()?);
                    return Ok(if exists {
                        Pres::Exists(var, body)
                    } else {
                        Pres::Forall(var, body)
                    });
                }
            }
        }
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            let rhs = self.formula()?;
            return Ok(Pres::Or(Box::new(Pres::Not(Box::new(lhs))), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Pres, PresburgerError> {
        let mut lhs = self.conjunction()?;
        while self.eat_sym("|") {
            let rhs = self.conjunction()?;
            lhs = Pres::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Pres, PresburgerError> {
        let mut lhs = self.negation()?;
        while self.eat_sym("&") {
            let rhs = self.negation()?;
            lhs = Pres::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Pres, PresburgerError> {
        if self.eat_sym("!") {
            return Ok(Pres::Not(Box::new(self.negation()?)));
        }
        // "(" may open a subformula or a parenthesized term; try the atom
        // reading first and fall back to the formula reading.
        let checkpoint = self.pos;
        match self.atom() {
            Ok(a) => Ok(a),
            Err(atom_err) => {
                self.pos = checkpoint;
                if self.eat_sym("(") {
                    let inner = self.formula()?;
                    if !self.eat_sym(")") {
                        return Err(self.err("expected `)`"));
                    }
                    Ok(inner)
                } else {
                    Err(atom_err)
                }
            }
        }
    }

    fn atom(&mut self) -> Result<Pres, PresburgerError> {
        let lhs = self.term()?;
        let rel = match self.peek() {
            Some(Tok::Sym("<=")) => Some(Rel::Le),
            Some(Tok::Sym(">=")) => Some(Rel::Ge),
            Some(Tok::Sym("<")) => Some(Rel::Lt),
            Some(Tok::Sym(">")) => Some(Rel::Gt),
            _ => None,
        };
        if let Some(rel) = rel {
            self.pos += 1;
            let rhs = self.term()?;
            return Ok(Pres::Atom(lhs, rel, rhs));
        }
        if self.eat_sym("=") {
            let rhs = self.term()?;
            return Ok(Pres::eq(lhs, rhs));
        }
        if self.eat_sym("!=") {
            let rhs = self.term()?;
            return Ok(Pres::Not(Box::new(Pres::eq(lhs, rhs))));
        }
        Err(self.err("expected comparison operator"))
    }

    fn term(&mut self) -> Result<Term, PresburgerError> {
        let mut lhs = self.factor()?;
        while self.eat_sym("+") {
            let rhs = self.factor()?;
            lhs = Term::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Term, PresburgerError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                if self.eat_sym("*") {
                    let inner = self.factor()?;
                    Ok(Term::Scale(n, Box::new(inner)))
                } else {
                    Ok(Term::Const(n))
                }
            }
            Some(Tok::Ident(x)) => {
                self.pos += 1;
                Ok(Term::Var(x))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let inner = self.term()?;
                if !self.eat_sym(")") {
                    return Err(self.err("expected `)` in term"));
                }
                Ok(inner)
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

pub fn parse_presburger(text: &str) -> Result<Pres, PresburgerError> {
    let toks = lex(text)?;
    let end_col = text.chars().count() + 1;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col,
    };
    let phi = p.formula()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(phi)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(x) => write!(f, "{x}"),
            Term::Add(a, b) => write!(f, "{a} + {b}"),
            Term::Scale(n, a) => write!(f, "{n}*({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_str(text: &str, point: &[u64], bound: u64) -> Tri {
        eval_presburger(&parse_presburger(text).unwrap(), point, bound).unwrap()
    }

    #[test]
    fn atoms_exact() {
        assert_eq!(eval_str("x1 > x2", &[3, 1], 8), Tri::True);
        assert_eq!(eval_str("x1 > x2", &[1, 3], 8), Tri::False);
        assert_eq!(eval_str("x1 + x1 <= x2", &[2, 4], 8), Tri::True);
        assert_eq!(eval_str("2*x1 <= x2", &[2, 4], 8), Tri::True);
        assert_eq!(eval_str("x1 = x2", &[4, 4], 8), Tri::True);
        assert_eq!(eval_str("x1 != x2", &[4, 4], 8), Tri::False);
    }

    #[test]
    fn bounded_quantifiers_one_sided() {
        // Evenness: witness found => true; no witness => unknown, not false.
        assert_eq!(eval_str("E y. x1 = y + y", &[4], 10), Tri::True);
        assert_eq!(eval_str("E y. x1 = y + y", &[3], 10), Tri::Unknown);
        assert_eq!(eval_str("A y. y >= 0", &[], 10), Tri::Unknown);
        assert_eq!(eval_str("A y. y < 5", &[], 10), Tri::False);
    }

    #[test]
    fn connectives_and_sugar() {
        assert_eq!(eval_str("x1 > x2 | x2 > x1", &[2, 2], 8), Tri::False);
        assert_eq!(eval_str("!(x1 > x2) & !(x2 > x1)", &[2, 2], 8), Tri::True);
        assert_eq!(eval_str("x1 > 0 -> x1 >= 1", &[7, 0], 8), Tri::True);
        assert_eq!(eval_str("(x1 + 1) > x1", &[5], 8), Tri::True);
        // Parenthesized subformula vs parenthesized term.
        assert_eq!(eval_str("(x1 > 0 & x1 < 9) | x1 = 0", &[0], 8), Tri::True);
    }

    #[test]
    fn dimension_and_syntax_errors() {
        let phi = parse_presburger("x3 > 0").unwrap();
        assert!(matches!(
            eval_presburger(&phi, &[1, 2], 8),
            Err(PresburgerError::DimensionMismatch { .. })
        ));
        let err = parse_presburger("x1 >").unwrap_err();
        assert!(matches!(err, PresburgerError::Syntax { .. }));
        let err = parse_presburger("x1 > x2 x3").unwrap_err();
        assert!(matches!(err, PresburgerError::Syntax { col: 9, .. }));
    }

    #[test]
    fn free_vars_and_scoping() {
        let phi = parse_presburger("E y. x1 = y + z").unwrap();
        assert_eq!(phi.free_vars(), vec!["x1".to_string(), "z".to_string()]);
    }

    #[test]
    fn unsatisfiable_atom() {
        assert_eq!(eval_str("x1 > x1", &[7], 8), Tri::False);
    }
}
