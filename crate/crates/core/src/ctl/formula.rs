use std::fmt;

use crate::error::{ParseError, ParseErrorKind};
use crate::frontend::parser::{ident_text, tokenize, Cursor, Tok};
use crate::kripke::count_prop_name;

/// CTL over the adequate base {EX, EU, EG}. Derived operators are rewritten
/// into this base by the constructors below.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CtlFormula {
    True,
    False,
    Atom(String),
    Not(Box<CtlFormula>),
    And(Box<CtlFormula>, Box<CtlFormula>),
    Or(Box<CtlFormula>, Box<CtlFormula>),
    Ex(Box<CtlFormula>),
    Eu(Box<CtlFormula>, Box<CtlFormula>),
    Eg(Box<CtlFormula>),
}

use CtlFormula::*;

impl CtlFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        Atom(name.into())
    }

    /// Negation with double negations cancelled.
    pub fn not(f: CtlFormula) -> Self {
        match f {
            Not(inner) => *inner,
            other => Not(Box::new(other)),
        }
    }

    pub fn and(a: CtlFormula, b: CtlFormula) -> Self {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: CtlFormula, b: CtlFormula) -> Self {
        Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: CtlFormula, b: CtlFormula) -> Self {
        Self::or(Self::not(a), b)
    }

    pub fn ex(f: CtlFormula) -> Self {
        Ex(Box::new(f))
    }

    pub fn eu(a: CtlFormula, b: CtlFormula) -> Self {
        Eu(Box::new(a), Box::new(b))
    }

    pub fn eg(f: CtlFormula) -> Self {
        Eg(Box::new(f))
    }

    /// `E[true U f]`
    pub fn ef(f: CtlFormula) -> Self {
        Self::eu(True, f)
    }

    /// `!EF !f`
    pub fn ag(f: CtlFormula) -> Self {
        Self::not(Self::ef(Self::not(f)))
    }

    /// `!EX !f`
    pub fn ax(f: CtlFormula) -> Self {
        Self::not(Self::ex(Self::not(f)))
    }

    /// `!EG !f`
    pub fn af(f: CtlFormula) -> Self {
        Self::not(Self::eg(Self::not(f)))
    }

    /// `!(E[!b U (!a & !b)] | EG !b)`
    pub fn au(a: CtlFormula, b: CtlFormula) -> Self {
        let not_a = Self::not(a);
        let not_b = Self::not(b);
        Self::not(Self::or(
            Self::eu(not_b.clone(), Self::and(not_a, not_b.clone())),
            Self::eg(not_b),
        ))
    }

    /// Invariant: an alias of AG.
    pub fn inv(f: CtlFormula) -> Self {
        Self::ag(f)
    }

    /// Atom names, deduplicated, in first-occurrence order.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            True | False => {}
            Atom(a) => {
                if !out.contains(&a.as_str()) {
                    out.push(a);
                }
            }
            Not(f) | Ex(f) | Eg(f) => f.collect_atoms(out),
            And(a, b) | Or(a, b) | Eu(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

impl fmt::Display for CtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            True => f.write_str("true"),
            False => f.write_str("false"),
            Atom(a) => f.write_str(a),
            Not(x) => write!(f, "!{x}"),
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
            Ex(x) => write!(f, "EX {x}"),
            Eu(a, b) => write!(f, "E[{a} U {b}]"),
            Eg(x) => write!(f, "EG {x}"),
        }
    }
}

const PREFIX_OPS: &[&str] = &["EX", "AX", "EF", "AF", "EG", "AG", "INV"];

/// Parses the surface syntax and normalizes it into the core operators.
///
/// Precedence from tightest: `!` and the temporal prefixes, then `&`, `|`,
/// and `->` (right-associative). Atoms are proposition names;
/// `count(pc=X) >= k` is sugar for the atom `count_X_ge_k`.
pub fn parse_ctl(text: &str) -> Result<CtlFormula, ParseError> {
    let mut cur = Cursor::new(tokenize(text, false)?);
    let f = implication(&mut cur)?;
    if *cur.peek() != Tok::Eof {
        return Err(match cur.peek() {
            Tok::Sym(")") | Tok::Sym("]") => cur.error(ParseErrorKind::Syntax("unbalanced parentheses".into())),
            _ => cur.syntax("operator or end of formula"),
        });
    }
    Ok(f)
}

fn implication(cur: &mut Cursor) -> Result<CtlFormula, ParseError> {
    let left = disjunction(cur)?;
    if cur.eat_sym("->") {
        let right = implication(cur)?;
        return Ok(CtlFormula::implies(left, right));
    }
    Ok(left)
}

fn disjunction(cur: &mut Cursor) -> Result<CtlFormula, ParseError> {
    let mut left = conjunction(cur)?;
    while cur.eat_sym("|") {
        left = CtlFormula::or(left, conjunction(cur)?);
    }
    Ok(left)
}

fn conjunction(cur: &mut Cursor) -> Result<CtlFormula, ParseError> {
    let mut left = unary(cur)?;
    while cur.eat_sym("&") {
        left = CtlFormula::and(left, unary(cur)?);
    }
    Ok(left)
}

fn unary(cur: &mut Cursor) -> Result<CtlFormula, ParseError> {
    if cur.eat_sym("!") {
        return Ok(CtlFormula::not(unary(cur)?));
    }
    if cur.eat_sym("(") {
        let f = implication(cur)?;
        if !cur.eat_sym(")") {
            return Err(cur.error(ParseErrorKind::Syntax("unbalanced parentheses: expected `)`".into())));
        }
        return Ok(f);
    }
    let token = match cur.peek() {
        Tok::Ident(_) => cur.advance(),
        Tok::Eof => return Err(cur.syntax("formula")),
        _ => return Err(cur.syntax("formula")),
    };
    let word = ident_text(&token).to_string();
    if PREFIX_OPS.contains(&word.as_str()) {
        let arg = unary(cur)?;
        return Ok(match word.as_str() {
            "EX" => CtlFormula::ex(arg),
            "AX" => CtlFormula::ax(arg),
            "EF" => CtlFormula::ef(arg),
            "AF" => CtlFormula::af(arg),
            "EG" => CtlFormula::eg(arg),
            "AG" => CtlFormula::ag(arg),
            _ => CtlFormula::inv(arg),
        });
    }
    match word.as_str() {
        "true" => Ok(True),
        "false" => Ok(False),
        "E" | "A" => {
            cur.expect_sym("[")?;
            let left = implication(cur)?;
            cur.expect_keyword("U")?;
            let right = implication(cur)?;
            if !cur.eat_sym("]") {
                return Err(cur.error(ParseErrorKind::Syntax("unbalanced brackets: expected `]`".into())));
            }
            Ok(if word == "E" {
                CtlFormula::eu(left, right)
            } else {
                CtlFormula::au(left, right)
            })
        }
        "U" => Err(cur.error_at(&token, ParseErrorKind::Syntax("`U` outside E[ _ U _ ] or A[ _ U _ ]".into()))),
        "count" if matches!(cur.peek(), Tok::Sym("(")) => {
            cur.expect_sym("(")?;
            cur.expect_keyword("pc")?;
            cur.expect_sym("=")?;
            let pc = cur.expect_ident()?;
            cur.expect_sym(")")?;
            cur.expect_sym(">=")?;
            let (k, k_tok) = cur.expect_int()?;
            if !(1..=u32::MAX as i64).contains(&k) {
                return Err(cur.error_at(&k_tok, ParseErrorKind::Syntax("count threshold must be at least 1".into())));
            }
            Ok(Atom(count_prop_name(ident_text(&pc), k as u32)))
        }
        _ => Ok(Atom(word)),
    }
}
