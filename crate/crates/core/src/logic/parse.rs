//! Concrete syntax for the temporal logic.
//!
//! ```text
//! formula     := ("exists"|"forall") ident "."? formula | implication
//! implication := disjunction ("->" formula)?
//! disjunction := conjunction ("|" conjunction)*
//! conjunction := unary ("&" unary)*
//! unary       := "~" unary | "X" unary | "Y" unary | "<>" unary | "[]" unary
//!              | "P-" unary | "H-" unary
//!              | "#" ident "."? unary cmp nat
//!              | "stable" "(" ident ")" | "emergence" | "true" | "false"
//!              | "(" formula ")" | atom
//! atom        := ident "@" term | term "=" term | term "!=" term
//!              | term "in" ident
//! term        := ident | nat
//! cmp         := "=" | "!=" | "<" | "<=" | ">" | ">="
//! ```
//!
//! Derived forms (`&`, `->`, `[]`, `H-`, `exists`, `forall`, signal@I,
//! `stable`, `emergence`) expand during parsing. When a [`NameContext`] is
//! supplied, identifiers naming agents resolve to agent indices, `name@I`
//! with a neighbourhood name expands to ∀x(x∈I → name@x), and `emergence`
//! expands to the disjunction of `stable(γ)` over Γ; without a context,
//! unresolved identifiers stay variables and `emergence` is an error.

use thiserror::Error;

use super::{AgentTerm, CountOp, Formula};
use crate::system::MemorySystem;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("`emergence` requires a system context (the signal alphabet)")]
    EmergenceNeedsContext,
}

/// Names against which the parser resolves agent constants and expands the
/// context-dependent derived forms.
#[derive(Debug, Clone, Default)]
pub struct NameContext {
    pub agents: Vec<String>,
    pub signals: Vec<String>,
    pub neighbourhoods: Vec<String>,
}

impl NameContext {
    pub fn of(sys: &MemorySystem) -> NameContext {
        NameContext {
            agents: sys.agent_names.clone(),
            signals: sys.signals.clone(),
            neighbourhoods: sys.neighbourhoods.iter().map(|n| n.name.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(u32),
    Ident(String),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
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
            let n: u32 = text[start..i].parse().map_err(|_| ParseError::Syntax {
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
            let word = &text[start..i];
            // Past operators are spelled "P-"/"H-" with the dash attached.
            if (word == "P" || word == "H") && bytes.get(i) == Some(&b'-') {
                i += 1;
                toks.push((col, Tok::Sym(if word == "P" { "P-" } else { "H-" })));
            } else {
                toks.push((col, Tok::Ident(word.to_string())));
            }
        } else {
            let two = text.get(i..i + 2).unwrap_or("");
            let two_sym = match two {
                "<=" => Some("<="),
                ">=" => Some(">="),
                "->" => Some("->"),
                "!=" => Some("!="),
                "<>" => Some("<>"),
                "[]" => Some("[]"),
                _ => None,
            };
            if let Some(s) = two_sym {
                toks.push((col, Tok::Sym(s)));
                i += 2;
            } else {
                let s = match c {
                    '(' => "(",
                    ')' => ")",
                    '=' => "=",
                    '<' => "<",
                    '>' => ">",
                    '~' => "~",
                    '!' => "~", // accept "!" as negation too
                    '&' => "&",
                    '|' => "|",
                    '@' => "@",
                    '#' => "#",
                    '.' => ".",
                    _ => {
                        return Err(ParseError::Syntax {
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

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
    ctx: Option<&'a NameContext>,
    gensym: usize,
}

impl<'a> Parser<'a> {
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

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn fresh_var(&mut self) -> String {
        let v = format!("_v{}", self.gensym);
        self.gensym += 1;
        v
    }

    fn resolve_term(&self, name: &str) -> AgentTerm {
        if let Some(ctx) = self.ctx {
            if let Some(i) = ctx.agents.iter().position(|a| a == name) {
                return AgentTerm::Agent(i);
            }
        }
        AgentTerm::Name(name.to_string())
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if let Some(Tok::Ident(kw)) = self.peek() {
            if kw == "exists" || kw == "forall" {
                let exists = kw == "exists";
                self.pos += 1;
                let Some(Tok::Ident(var)) = self.peek().cloned() else {
                    return Err(self.err("expected variable after quantifier"));
                };
                self.pos += 1;
                self.eat_sym(".");
                let body = self.formula()?;
                return Ok(quantify(exists, var, body));
            }
        }
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            let rhs = self.formula()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat_sym("|") {
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat_sym("&") {
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat_sym("~") {
            return Ok(self.unary()?.not());
        }
        if self.eat_sym("<>") {
            return Ok(Formula::Eventually(Box::new(self.unary()?)));
        }
        if self.eat_sym("[]") {
            return Ok(self.unary()?.always());
        }
        if self.eat_sym("P-") {
            return Ok(Formula::Once(Box::new(self.unary()?)));
        }
        if self.eat_sym("H-") {
            return Ok(self.unary()?.historically());
        }
        if self.eat_sym("#") {
            let Some(Tok::Ident(var)) = self.peek().cloned() else {
                return Err(self.err("expected variable after `#`"));
            };
            self.pos += 1;
            self.eat_sym(".");
            let body = self.unary()?;
            let op = self.count_op()?;
            let Some(Tok::Int(k)) = self.peek().cloned() else {
                return Err(self.err("expected integer threshold after counting comparison"));
            };
            self.pos += 1;
            return Ok(Formula::Count(var, Box::new(body), op, k));
        }
        if let Some(Tok::Ident(kw)) = self.peek().cloned() {
            match kw.as_str() {
                // A quantifier may appear directly under a unary operator;
                // its scope extends as far right as possible.
                "exists" | "forall" => return self.formula(),
                "X" | "Y" => {
                    self.pos += 1;
                    let body = Box::new(self.unary()?);
                    return Ok(if kw == "X" {
                        Formula::Next(body)
                    } else {
                        Formula::Prev(body)
                    });
                }
                "true" => {
                    self.pos += 1;
                    return Ok(Formula::True);
                }
                "false" => {
                    self.pos += 1;
                    return Ok(Formula::True.not());
                }
                "stable" => {
                    self.pos += 1;
                    if !self.eat_sym("(") {
                        return Err(self.err("expected `(` after stable"));
                    }
                    let Some(Tok::Ident(gamma)) = self.peek().cloned() else {
                        return Err(self.err("expected signal name in stable(..)"));
                    };
                    self.pos += 1;
                    if !self.eat_sym(")") {
                        return Err(self.err("expected `)` after stable(signal"));
                    }
                    return Ok(self.stable(&gamma));
                }
                "emergence" => {
                    self.pos += 1;
                    let Some(ctx) = self.ctx else {
                        return Err(ParseError::EmergenceNeedsContext);
                    };
                    let mut out: Option<Formula> = None;
                    for gamma in ctx.signals.clone() {
                        let s = self.stable(&gamma);
                        out = Some(match out {
                            None => s,
                            Some(acc) => acc.or(s),
                        });
                    }
                    return out.ok_or_else(|| self.err("empty signal alphabet"));
                }
                _ => {}
            }
        }
        // "(" may open a subformula or be part of nothing else here (terms
        // are single tokens), so parenthesized input is always a formula.
        if self.eat_sym("(") {
            let inner = self.formula()?;
            if !self.eat_sym(")") {
                return Err(self.err("expected `)`"));
            }
            return Ok(inner);
        }
        self.atom()
    }

    /// □∀x.γ@x
    fn stable(&mut self, gamma: &str) -> Formula {
        let x = self.fresh_var();
        let body = Formula::At(gamma.to_string(), AgentTerm::Name(x.clone()));
        quantify(false, x, body).always()
    }

    fn count_op(&mut self) -> Result<CountOp, ParseError> {
        let op = match self.peek() {
            Some(Tok::Sym("=")) => CountOp::Eq,
            Some(Tok::Sym("!=")) => CountOp::Ne,
            Some(Tok::Sym("<")) => CountOp::Lt,
            Some(Tok::Sym("<=")) => CountOp::Le,
            Some(Tok::Sym(">")) => CountOp::Gt,
            Some(Tok::Sym(">=")) => CountOp::Ge,
            _ => return Err(self.err("expected comparison operator")),
        };
        self.pos += 1;
        Ok(op)
    }

    fn term(&mut self) -> Result<AgentTerm, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(self.resolve_term(&name))
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(self.resolve_term(&n.to_string()))
            }
            _ => Err(self.err("expected an agent name or variable")),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        // name@τ — the name may be a signal, a proposition, or (with a
        // context) a neighbourhood triggering the γ@I derived form.
        if let (Some((_, Tok::Ident(name))), Some((_, Tok::Sym("@")))) =
            (self.toks.get(self.pos), self.toks.get(self.pos + 1))
        {
            let name = name.clone();
            self.pos += 2;
            let target = match self.peek() {
                Some(Tok::Ident(t)) => Some(t.clone()),
                Some(Tok::Int(n)) => Some(n.to_string()),
                _ => None,
            };
            let is_nbhd = matches!((&target, self.ctx), (Some(t), Some(c)) if c.neighbourhoods.contains(t));
            if is_nbhd {
                // γ@I: all agents of the neighbourhood signal γ.
                let nbhd = target.expect("checked above");
                self.pos += 1;
                let x = self.fresh_var();
                let member = Formula::In(AgentTerm::Name(x.clone()), nbhd);
                let signals = Formula::At(name, AgentTerm::Name(x.clone()));
                return Ok(quantify(false, x, member.implies(signals)));
            }
            let tau = self.term()?;
            return Ok(Formula::At(name, tau));
        }
        let lhs = self.term()?;
        if self.eat_sym("=") {
            let rhs = self.term()?;
            return Ok(Formula::Eq(lhs, rhs));
        }
        if self.eat_sym("!=") {
            let rhs = self.term()?;
            return Ok(Formula::Eq(lhs, rhs).not());
        }
        if let Some(Tok::Ident(kw)) = self.peek() {
            if kw == "in" {
                self.pos += 1;
                let nbhd = match self.peek().cloned() {
                    Some(Tok::Ident(n)) => n,
                    _ => return Err(self.err("expected neighbourhood name after `in`")),
                };
                self.pos += 1;
                return Ok(Formula::In(lhs, nbhd));
            }
        }
        Err(self.err("expected `=`, `!=`, `in`, or `@` to complete the atom"))
    }
}

/// ∃x.φ := #x.φ > 0; ∀x.φ := ¬#x.¬φ > 0.
fn quantify(exists: bool, var: String, body: Formula) -> Formula {
    if exists {
        Formula::Count(var, Box::new(body), CountOp::Gt, 0)
    } else {
        Formula::Count(var, Box::new(body.not()), CountOp::Gt, 0).not()
    }
}

pub fn parse_formula(text: &str, ctx: Option<&NameContext>) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let end_col = text.chars().count() + 1;
    let mut p = Parser {
        toks,
        pos: 0,
        end_col,
        ctx,
        gensym: 0,
    };
    let phi = p.formula()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(phi)
}

/// Parses a formula file: one formula per line; blank lines and lines whose
/// first non-space character is `#` not followed by an identifier (which
/// would be a counting quantifier) are comments.
pub fn parse_formula_file(
    text: &str,
    ctx: Option<&NameContext>,
) -> Result<Vec<(usize, Formula)>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let is_comment = !rest
                .chars()
                .next()
                .map(|c| c.is_ascii_alphabetic() || c == '_')
                .unwrap_or(false);
            if is_comment {
                continue;
            }
        }
        out.push((lineno + 1, parse_formula(trimmed, ctx)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ctx() -> NameContext {
        NameContext::of(&fixtures::maj1())
    }

    #[test]
    fn parses_counting_conjunction() {
        let phi = parse_formula("#x. g@x = 2 & #x. b@x = 1", Some(&ctx())).unwrap();
        // Shape: And of two counts (And is expanded through ¬∨).
        assert!(phi.free_vars().is_empty());
        assert!(format!("{phi}").contains("#x"));
    }

    #[test]
    fn parses_quantifier_without_dot() {
        let phi = parse_formula("exists x (x in I -> [] (x in I))", Some(&ctx())).unwrap();
        assert!(matches!(phi, Formula::Count(..)));
        assert!(phi.free_vars().is_empty());
    }

    #[test]
    fn parses_temporal_nesting() {
        let phi = parse_formula("<> [] forall x. g@x", Some(&ctx())).unwrap();
        assert!(matches!(phi, Formula::Eventually(_)));
    }

    #[test]
    fn stable_and_emergence_expand() {
        let s = parse_formula("stable(g)", Some(&ctx())).unwrap();
        assert!(s.free_vars().is_empty());
        let e = parse_formula("emergence", Some(&ctx())).unwrap();
        assert!(matches!(e, Formula::Or(..)));
        assert!(matches!(
            parse_formula("emergence", None),
            Err(ParseError::EmergenceNeedsContext)
        ));
    }

    #[test]
    fn agent_constants_resolve_with_context() {
        let phi = parse_formula("g@2", Some(&ctx())).unwrap();
        assert_eq!(phi, Formula::At("g".into(), AgentTerm::Agent(1)));
        let phi = parse_formula("g@2", None).unwrap();
        assert_eq!(phi, Formula::At("g".into(), AgentTerm::Name("2".into())));
    }

    #[test]
    fn signal_at_neighbourhood_expands() {
        let phi = parse_formula("g@I", Some(&ctx())).unwrap();
        assert!(phi.free_vars().is_empty());
        assert!(matches!(phi, Formula::Not(_))); // ∀ shape
    }

    #[test]
    fn past_operators() {
        let phi = parse_formula("[] ((Y a@1 -> b@1) & (Y b@1 -> a@1))", None).unwrap();
        assert!(format!("{phi}").contains("Y"));
        let phi = parse_formula("P- g@1", Some(&ctx())).unwrap();
        assert!(matches!(phi, Formula::Once(_)));
        let phi = parse_formula("H- g@1", Some(&ctx())).unwrap();
        assert!(matches!(phi, Formula::Not(_)));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse_formula("g@", Some(&ctx())).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { col: 3, .. }));
        let err = parse_formula("#x g@x", Some(&ctx())).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn formula_file_comments() {
        let text = "# a comment\n\ng@1\n#x. g@x >= 1\n## another\n";
        let fs = parse_formula_file(text, Some(&ctx())).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[0].0, 3);
        assert_eq!(fs[1].0, 4);
    }
}
