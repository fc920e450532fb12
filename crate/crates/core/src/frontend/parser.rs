//! Recursive-descent parser for the guarded-command input language.

use std::collections::HashSet;

use super::{
    Guard, GuardedCommand, LabelDef, LabelExpr, LocalRecord, ProcRef, Program, Rhs, Update, Value, VarDecl,
    VarRef, VarType,
};
use crate::error::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

// Longest first so that `:=` wins over `:`.
const SYMBOLS: &[&str] = &[
    ":=", "==", "!=", "->", ">=", ";", "{", "}", "(", ")", "[", "]", ",", "=", ":", "/", "*", "!", "&", "|", "#",
];

/// Shared with the CTL parser. `#` starts a line comment when `comments` is set.
pub(crate) fn tokenize(text: &str, comments: bool) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if comments && c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = column;
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            column += i - start;
            tokens.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                column: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            column += i - start;
            let digits: String = chars[start..i].iter().collect();
            let value = digits.parse::<i64>().map_err(|_| {
                ParseError::new(line, start_col, ParseErrorKind::Syntax(format!("integer `{digits}` too large")))
            })?;
            tokens.push(Token {
                tok: Tok::Int(value),
                line,
                column: start_col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(*s)) {
            Some(sym) => {
                i += sym.len();
                column += sym.len();
                tokens.push(Token {
                    tok: Tok::Sym(sym),
                    line,
                    column: start_col,
                });
            }
            None => {
                return Err(ParseError::new(
                    line,
                    column,
                    ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
                ))
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(tokens)
}

pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(tokens: Vec<Token>) -> Self {
        Self { tokens, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.column)
    }

    pub fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.here();
        ParseError::new(line, column, kind)
    }

    pub fn error_at(&self, token: &Token, kind: ParseErrorKind) -> ParseError {
        ParseError::new(token.line, token.column, kind)
    }

    pub fn syntax(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        self.error(ParseErrorKind::Syntax(format!("expected {expected}, found {found}")))
    }

    pub fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.syntax(&format!("`{sym}`")))
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.syntax(&format!("`{kw}`")))
        }
    }

    pub fn expect_ident(&mut self) -> Result<Token, ParseError> {
        if matches!(self.peek(), Tok::Ident(_)) {
            Ok(self.advance())
        } else {
            Err(self.syntax("identifier"))
        }
    }

    pub fn expect_int(&mut self) -> Result<(i64, Token), ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => Ok((v, self.advance())),
            _ => Err(self.syntax("integer")),
        }
    }
}

pub(crate) fn ident_text(token: &Token) -> &str {
    match &token.tok {
        Tok::Ident(s) => s,
        _ => "",
    }
}

const RESERVED: &[&str] = &[
    "processes",
    "shared",
    "local",
    "pc",
    "init",
    "label",
    "self",
    "none",
    "true",
    "false",
    "bool",
    "pid",
    "all_others",
    "exists_other",
    "count",
];

/// Parses a program in the input language. Errors carry the line and column
/// of the offending token.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut parser = ProgramParser {
        cur: Cursor::new(tokenize(text, true)?),
        program: Program {
            n: 0,
            shared: Vec::new(),
            pcs: Vec::new(),
            locals: Vec::new(),
            commands: Vec::new(),
            labels: Vec::new(),
            init_shared: Vec::new(),
            init_local: LocalRecord::at(0),
        },
        names: HashSet::new(),
    };
    parser.program()?;
    Ok(parser.program)
}

struct ProgramParser {
    cur: Cursor,
    program: Program,
    names: HashSet<String>,
}

impl ProgramParser {
    fn declare(&mut self, token: &Token) -> Result<String, ParseError> {
        let name = ident_text(token).to_string();
        if RESERVED.contains(&name.as_str()) {
            return Err(self
                .cur
                .error_at(token, ParseErrorKind::Syntax(format!("`{name}` is a reserved word"))));
        }
        if !self.names.insert(name.clone()) {
            return Err(self.cur.error_at(token, ParseErrorKind::DuplicateName(name)));
        }
        Ok(name)
    }

    fn program(&mut self) -> Result<(), ParseError> {
        self.cur.expect_keyword("processes")?;
        let (n, tok) = self.cur.expect_int()?;
        if n < 1 {
            return Err(self.cur.error_at(&tok, ParseErrorKind::InvalidProcessCount(n)));
        }
        if n > u32::MAX as i64 / 2 {
            return Err(self.cur.error_at(&tok, ParseErrorKind::InvalidProcessCount(n)));
        }
        self.program.n = n as usize;
        self.cur.expect_sym(";")?;

        loop {
            if self.cur.eat_keyword("shared") {
                let name_tok = self.cur.expect_ident()?;
                let name = self.declare(&name_tok)?;
                self.cur.expect_sym(":")?;
                let ty = if self.cur.eat_keyword("bool") {
                    VarType::Bool
                } else if self.cur.eat_keyword("pid") {
                    VarType::Pid
                } else {
                    return Err(self.cur.syntax("`bool` or `pid`"));
                };
                self.cur.expect_sym(";")?;
                self.program.shared.push(VarDecl { name, ty });
            } else if self.cur.eat_keyword("local") {
                let name_tok = self.cur.expect_ident()?;
                let name = self.declare(&name_tok)?;
                self.cur.expect_sym(":")?;
                if self.cur.eat_keyword("pid") {
                    return Err(self.cur.error_at(
                        &name_tok,
                        ParseErrorKind::TypeMismatch(format!("local `{name}` must be bool")),
                    ));
                }
                self.cur.expect_keyword("bool")?;
                self.cur.expect_sym(";")?;
                if self.program.locals.len() == 64 {
                    return Err(self
                        .cur
                        .error_at(&name_tok, ParseErrorKind::Syntax("at most 64 local variables".into())));
                }
                self.program.locals.push(name);
            } else {
                break;
            }
        }

        self.cur.expect_keyword("pc")?;
        self.cur.expect_sym("{")?;
        loop {
            let tok = self.cur.expect_ident()?;
            let name = self.declare(&tok)?;
            self.program.pcs.push(name);
            if !self.cur.eat_sym(",") {
                break;
            }
        }
        self.cur.expect_sym("}")?;
        self.cur.expect_sym(";")?;

        self.init()?;

        while matches!(self.cur.peek(), Tok::Ident(_)) && !self.cur.is_keyword("label") {
            self.command()?;
        }
        while self.cur.eat_keyword("label") {
            self.label()?;
        }
        if *self.cur.peek() != Tok::Eof {
            return Err(self.cur.syntax("command, label or end of input"));
        }
        Ok(())
    }

    fn pc_value(&self, token: &Token) -> Result<u16, ParseError> {
        let name = ident_text(token);
        self.program
            .pc_index(name)
            .ok_or_else(|| self.cur.error_at(token, ParseErrorKind::UndeclaredPc(name.to_string())))
    }

    fn var(&self, token: &Token) -> Result<(VarRef, VarType), ParseError> {
        let name = ident_text(token);
        if let Some(i) = self.program.shared.iter().position(|d| d.name == name) {
            return Ok((VarRef::Shared(i), self.program.shared[i].ty));
        }
        if let Some(i) = self.program.locals.iter().position(|l| l == name) {
            return Ok((VarRef::Local(i), VarType::Bool));
        }
        Err(self
            .cur
            .error_at(token, ParseErrorKind::UnknownIdentifier(name.to_string())))
    }

    fn init(&mut self) -> Result<(), ParseError> {
        let init_tok = self.cur.advance();
        if ident_text(&init_tok) != "init" {
            return Err(self.cur.error_at(&init_tok, ParseErrorKind::Syntax("expected `init`".into())));
        }
        let mut shared: Vec<Option<Value>> = vec![None; self.program.shared.len()];
        let mut local = LocalRecord::at(0);
        let mut pc_set = false;
        let mut seen = HashSet::new();
        loop {
            let name_tok = if self.cur.is_keyword("pc") {
                self.cur.advance()
            } else {
                self.cur.expect_ident()?
            };
            let name = ident_text(&name_tok).to_string();
            if !seen.insert(name.clone()) {
                return Err(self.cur.error_at(&name_tok, ParseErrorKind::DuplicateName(name)));
            }
            self.cur.expect_sym("=")?;
            if name == "pc" {
                let value_tok = self.cur.expect_ident()?;
                local.pc = self.pc_value(&value_tok)?;
                pc_set = true;
            } else {
                let (var, ty) = self.var(&name_tok)?;
                let value_tok = self.cur.advance();
                let value = match (&value_tok.tok, ty) {
                    (Tok::Int(b @ (0 | 1)), VarType::Bool) => Value::Bool(*b == 1),
                    (Tok::Ident(s), VarType::Pid) if s == "none" => Value::Pid(ProcRef::None),
                    (Tok::Ident(s), VarType::Pid) if s == "self" => {
                        return Err(self.cur.error_at(
                            &value_tok,
                            ParseErrorKind::TypeMismatch("initial state must be symmetric; use none".into()),
                        ))
                    }
                    _ => {
                        return Err(self.cur.error_at(
                            &value_tok,
                            ParseErrorKind::TypeMismatch(format!("bad initial value for `{name}`")),
                        ))
                    }
                };
                match var {
                    VarRef::Shared(i) => shared[i] = Some(value),
                    VarRef::Local(i) => local.set(i, value == Value::Bool(true)),
                }
            }
            if !self.cur.eat_sym(",") {
                break;
            }
        }
        self.cur.expect_sym(";")?;
        if !pc_set {
            return Err(self
                .cur
                .error_at(&init_tok, ParseErrorKind::Syntax("init must set `pc`".into())));
        }
        self.program.init_local = local;
        self.program.init_shared = shared
            .into_iter()
            .zip(&self.program.shared)
            .map(|(v, d)| {
                v.unwrap_or(match d.ty {
                    VarType::Bool => Value::Bool(false),
                    VarType::Pid => Value::Pid(ProcRef::None),
                })
            })
            .collect();
        Ok(())
    }

    fn command(&mut self) -> Result<(), ParseError> {
        let from_tok = self.cur.expect_ident()?;
        let from_pc = self.pc_value(&from_tok)?;
        self.cur.expect_sym("->")?;
        let to_tok = self.cur.expect_ident()?;
        let to_pc = self.pc_value(&to_tok)?;
        self.cur.expect_sym(":")?;
        let guard = self.guard_or()?;
        self.cur.expect_sym("/")?;
        let mut updates: Vec<Update> = Vec::new();
        if !self.cur.eat_sym(";") {
            loop {
                let target_tok = self.cur.expect_ident()?;
                if ident_text(&target_tok) == "pc" {
                    return Err(self.cur.error_at(
                        &target_tok,
                        ParseErrorKind::Syntax("pc is set by the command target, not by assignment".into()),
                    ));
                }
                let (target, ty) = self.var(&target_tok)?;
                if updates.iter().any(|u| u.target == target) {
                    return Err(self.cur.error_at(
                        &target_tok,
                        ParseErrorKind::DuplicateName(format!("{} assigned twice", ident_text(&target_tok))),
                    ));
                }
                self.cur.expect_sym(":=")?;
                let rhs_tok = self.cur.advance();
                let mismatch = |what: &str| {
                    self.cur.error_at(
                        &rhs_tok,
                        ParseErrorKind::TypeMismatch(format!(
                            "cannot assign {what} to {} variable `{}`",
                            if ty == VarType::Bool { "bool" } else { "pid" },
                            ident_text(&target_tok)
                        )),
                    )
                };
                let rhs = match (&rhs_tok.tok, ty) {
                    (Tok::Int(b @ (0 | 1)), VarType::Bool) => Rhs::Const(*b == 1),
                    (Tok::Int(_), _) => return Err(mismatch("an integer")),
                    (Tok::Sym("*"), VarType::Bool) => Rhs::Nondet,
                    (Tok::Sym("*"), VarType::Pid) => return Err(mismatch("`*`")),
                    (Tok::Ident(s), VarType::Pid) if s == "self" => Rhs::SelfId,
                    (Tok::Ident(s), VarType::Pid) if s == "none" => Rhs::NoProc,
                    (Tok::Ident(s), VarType::Bool) if s == "self" || s == "none" => {
                        return Err(mismatch(&format!("`{s}`")))
                    }
                    (Tok::Ident(_), _) => {
                        let (src, src_ty) = self.var(&rhs_tok)?;
                        if src_ty != ty {
                            return Err(mismatch("a differently typed variable"));
                        }
                        Rhs::Copy(src)
                    }
                    _ => return Err(self.cur.error_at(&rhs_tok, ParseErrorKind::Syntax("expected value".into()))),
                };
                updates.push(Update { target, rhs });
                if !self.cur.eat_sym(",") {
                    break;
                }
            }
            self.cur.expect_sym(";")?;
        }
        self.program.commands.push(GuardedCommand {
            from_pc,
            to_pc,
            guard,
            updates,
        });
        Ok(())
    }

    fn guard_or(&mut self) -> Result<Guard, ParseError> {
        let mut left = self.guard_and()?;
        while self.cur.eat_sym("|") {
            left = Guard::Or(Box::new(left), Box::new(self.guard_and()?));
        }
        Ok(left)
    }

    fn guard_and(&mut self) -> Result<Guard, ParseError> {
        let mut left = self.guard_unary()?;
        while self.cur.eat_sym("&") {
            left = Guard::And(Box::new(left), Box::new(self.guard_unary()?));
        }
        Ok(left)
    }

    fn guard_unary(&mut self) -> Result<Guard, ParseError> {
        if self.cur.eat_sym("!") {
            return Ok(Guard::Not(Box::new(self.guard_unary()?)));
        }
        if self.cur.eat_sym("(") {
            let g = self.guard_or()?;
            self.cur.expect_sym(")")?;
            return Ok(g);
        }
        if self.cur.eat_keyword("true") {
            return Ok(Guard::True);
        }
        if self.cur.eat_keyword("false") {
            return Ok(Guard::False);
        }
        if self.cur.eat_keyword("all_others") {
            let pc = self.quantified_pc("!=")?;
            return Ok(Guard::NoOtherAt(pc));
        }
        if self.cur.eat_keyword("exists_other") {
            let pc = self.quantified_pc("==")?;
            return Ok(Guard::SomeOtherAt(pc));
        }
        let tok = self.cur.expect_ident()?;
        if ident_text(&tok) == "pc" {
            return Err(self.cur.error_at(
                &tok,
                ParseErrorKind::Syntax("pc tests belong in the command source, not the guard".into()),
            ));
        }
        let (var, ty) = self.var(&tok)?;
        let negate = if self.cur.eat_sym("==") {
            false
        } else if self.cur.eat_sym("!=") {
            true
        } else {
            if ty != VarType::Bool {
                return Err(self.cur.error_at(
                    &tok,
                    ParseErrorKind::TypeMismatch(format!("pid variable `{}` used as a bool", ident_text(&tok))),
                ));
            }
            return Ok(Guard::BoolIs { var, value: true });
        };
        let value_tok = self.cur.advance();
        let atom = match (&value_tok.tok, ty, var) {
            (Tok::Int(b @ (0 | 1)), VarType::Bool, _) => Guard::BoolIs { var, value: *b == 1 },
            (Tok::Ident(s), VarType::Pid, VarRef::Shared(v)) if s == "self" => Guard::PidIsSelf(v),
            (Tok::Ident(s), VarType::Pid, VarRef::Shared(v)) if s == "none" => Guard::PidIsNone(v),
            (Tok::Int(_), VarType::Pid, _) => {
                return Err(self.cur.error_at(
                    &value_tok,
                    ParseErrorKind::TypeMismatch("pid variables compare only with self or none".into()),
                ))
            }
            (Tok::Ident(s), VarType::Bool, _) if s == "self" || s == "none" => {
                return Err(self.cur.error_at(
                    &value_tok,
                    ParseErrorKind::TypeMismatch(format!("bool variable compared with `{s}`")),
                ))
            }
            _ => return Err(self.cur.error_at(&value_tok, ParseErrorKind::Syntax("expected 0, 1, self or none".into()))),
        };
        Ok(if negate { Guard::Not(Box::new(atom)) } else { atom })
    }

    fn quantified_pc(&mut self, op: &str) -> Result<u16, ParseError> {
        self.cur.expect_sym("(")?;
        self.cur.expect_keyword("pc")?;
        self.cur.expect_sym(op)?;
        let tok = self.cur.expect_ident()?;
        let pc = self.pc_value(&tok)?;
        self.cur.expect_sym(")")?;
        Ok(pc)
    }

    fn label(&mut self) -> Result<(), ParseError> {
        let name_tok = self.cur.expect_ident()?;
        let name = self.declare(&name_tok)?;
        if self.program.atomic_props().iter().any(|p| p.name == name) {
            return Err(self.cur.error_at(&name_tok, ParseErrorKind::DuplicateName(name)));
        }
        self.cur.expect_sym(":=")?;
        let expr = self.label_or()?;
        self.cur.expect_sym(";")?;
        self.program.labels.push(LabelDef { name, expr });
        Ok(())
    }

    fn label_or(&mut self) -> Result<LabelExpr, ParseError> {
        let mut left = self.label_and()?;
        while self.cur.eat_sym("|") {
            left = LabelExpr::Or(Box::new(left), Box::new(self.label_and()?));
        }
        Ok(left)
    }

    fn label_and(&mut self) -> Result<LabelExpr, ParseError> {
        let mut left = self.label_unary()?;
        while self.cur.eat_sym("&") {
            left = LabelExpr::And(Box::new(left), Box::new(self.label_unary()?));
        }
        Ok(left)
    }

    fn label_unary(&mut self) -> Result<LabelExpr, ParseError> {
        if self.cur.eat_sym("!") {
            return Ok(LabelExpr::Not(Box::new(self.label_unary()?)));
        }
        if self.cur.eat_sym("(") {
            let e = self.label_or()?;
            self.cur.expect_sym(")")?;
            return Ok(e);
        }
        if self.cur.eat_keyword("true") {
            return Ok(LabelExpr::True);
        }
        if self.cur.eat_keyword("false") {
            return Ok(LabelExpr::False);
        }
        if self.cur.eat_keyword("count") {
            self.cur.expect_sym("(")?;
            self.cur.expect_keyword("pc")?;
            self.cur.expect_sym("=")?;
            let tok = self.cur.expect_ident()?;
            let pc = self.pc_value(&tok)?;
            self.cur.expect_sym(")")?;
            self.cur.expect_sym(">=")?;
            let (k, k_tok) = self.cur.expect_int()?;
            if !(0..=u32::MAX as i64).contains(&k) {
                return Err(self
                    .cur
                    .error_at(&k_tok, ParseErrorKind::Syntax("count threshold out of range".into())));
            }
            return Ok(LabelExpr::CountAtLeast { pc, k: k as u32 });
        }
        let tok = self.cur.expect_ident()?;
        let (var, ty) = self.var(&tok)?;
        let VarRef::Shared(v) = var else {
            return Err(self.cur.error_at(
                &tok,
                ParseErrorKind::TypeMismatch(format!(
                    "local `{}` cannot appear in a label; labels see only shared variables and counts",
                    ident_text(&tok)
                )),
            ));
        };
        let negate = if self.cur.eat_sym("==") {
            false
        } else if self.cur.eat_sym("!=") {
            true
        } else {
            if ty != VarType::Bool {
                return Err(self.cur.error_at(
                    &tok,
                    ParseErrorKind::TypeMismatch(format!("pid variable `{}` used as a bool", ident_text(&tok))),
                ));
            }
            return Ok(LabelExpr::SharedBool { var: v, value: true });
        };
        let value_tok = self.cur.advance();
        let atom = match (&value_tok.tok, ty) {
            (Tok::Int(b @ (0 | 1)), VarType::Bool) => LabelExpr::SharedBool { var: v, value: *b == 1 },
            (Tok::Ident(s), VarType::Pid) if s == "none" => LabelExpr::SharedPidNone(v),
            _ => {
                return Err(self.cur.error_at(
                    &value_tok,
                    ParseErrorKind::TypeMismatch("label atoms compare bools with 0/1 and pids with none".into()),
                ))
            }
        };
        Ok(if negate { LabelExpr::Not(Box::new(atom)) } else { atom })
    }
}
