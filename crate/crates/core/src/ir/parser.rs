//! Lexer and recursive-descent parser for `.tir` programs.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use super::{Guard, Operand, Pretty, Rel, Rhs};
use crate::zone::VarId;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    UnexpectedToken { expected: String, found: String },
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("variable `{0}` declared twice")]
    DuplicateDeclaration(String),
    #[error("`{0}` is a reserved name")]
    ReservedName(String),
    #[error("integer literal {0} does not fit in 32 bits")]
    IntegerOverflow(String),
}

/// Source-level statement tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SrcStmt {
    Assign(VarId, Rhs),
    Havoc(VarId),
    Assert(Guard),
    If {
        cond: Guard,
        then_body: Vec<SrcStmt>,
        else_body: Option<Vec<SrcStmt>>,
    },
    While {
        cond: Guard,
        body: Vec<SrcStmt>,
    },
}

/// A parsed program; `VarId(i + 1)` names `vars[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub vars: Arc<[String]>,
    pub body: Vec<SrcStmt>,
}

impl Program {
    /// Canonical source text; parsing it yields an equal program.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for v in self.vars.iter() {
            let _ = writeln!(out, "int {v};");
        }
        write_block(&mut out, &self.vars, &self.body, 0);
        out
    }
}

fn write_block(out: &mut String, names: &[String], body: &[SrcStmt], depth: usize) {
    let pad = "    ".repeat(depth);
    for stmt in body {
        match stmt {
            SrcStmt::Assign(v, rhs) => {
                let _ = writeln!(
                    out,
                    "{pad}{} := {};",
                    names[v.0 - 1],
                    Pretty { names, item: rhs }
                );
            }
            SrcStmt::Havoc(v) => {
                let _ = writeln!(out, "{pad}havoc {};", names[v.0 - 1]);
            }
            SrcStmt::Assert(g) => {
                let _ = writeln!(out, "{pad}assert {};", Pretty { names, item: g });
            }
            SrcStmt::If {
                cond,
                then_body,
                else_body,
            } => {
                let _ = writeln!(out, "{pad}if ({}) {{", Pretty { names, item: cond });
                write_block(out, names, then_body, depth + 1);
                if let Some(else_body) = else_body {
                    let _ = writeln!(out, "{pad}}} else {{");
                    write_block(out, names, else_body, depth + 1);
                }
                let _ = writeln!(out, "{pad}}}");
            }
            SrcStmt::While { cond, body } => {
                let _ = writeln!(out, "{pad}while ({}) {{", Pretty { names, item: cond });
                write_block(out, names, body, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 15] = [
    ":=", "<=", ">=", "==", "!=", "<", ">", ";", "(", ")", "{", "}", "+", "-", ",",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Int(chars[start..i].iter().collect())
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    i += s.len();
                    Tok::Sym(s)
                }
                None => {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::UnexpectedChar(c),
                    })
                }
            }
        };
        out.push(Token { tok, line, col });
        col += i - start;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const KEYWORDS: [&str; 6] = ["int", "if", "else", "while", "assert", "havoc"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
    index: HashMap<String, VarId>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            col: t.col,
            kind,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error(ParseErrorKind::UnexpectedToken {
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn expect_keyword(&mut self, k: &str) -> Result<(), ParseError> {
        if self.is_keyword(k) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{k}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn variable(&mut self) -> Result<VarId, ParseError> {
        let start = self.pos;
        let name = self.ident()?;
        match self.index.get(&name) {
            Some(&v) => Ok(v),
            None => {
                self.pos = start;
                Err(self.error(ParseErrorKind::UndeclaredVariable(name)))
            }
        }
    }

    /// `-`? digits, range-checked against `i32`.
    fn int(&mut self) -> Result<i64, ParseError> {
        let start = self.pos;
        let negative = self.is_sym("-");
        if negative {
            self.pos += 1;
        }
        let Tok::Int(digits) = self.peek().clone() else {
            return Err(self.unexpected("integer"));
        };
        let text = if negative {
            format!("-{digits}")
        } else {
            digits
        };
        match text.parse::<i32>() {
            Ok(n) => {
                self.pos += 1;
                Ok(n as i64)
            }
            Err(_) => {
                self.pos = start;
                Err(self.error(ParseErrorKind::IntegerOverflow(text)))
            }
        }
    }

    fn starts_int(&self) -> bool {
        matches!(self.peek(), Tok::Int(_)) || self.is_sym("-")
    }

    /// Optional `(+|-) int` suffix after a variable.
    fn offset(&mut self) -> Result<i64, ParseError> {
        if self.is_sym("+") {
            self.pos += 1;
            self.int()
        } else if self.is_sym("-") {
            self.pos += 1;
            Ok(-self.int()?)
        } else {
            Ok(0)
        }
    }

    fn decl(&mut self) -> Result<(), ParseError> {
        self.expect_keyword("int")?;
        let start = self.pos;
        let name = self.ident()?;
        if name == "Z0" {
            self.pos = start;
            return Err(self.error(ParseErrorKind::ReservedName(name)));
        }
        if self.index.contains_key(&name) {
            self.pos = start;
            return Err(self.error(ParseErrorKind::DuplicateDeclaration(name)));
        }
        self.vars.push(name.clone());
        self.index.insert(name, VarId(self.vars.len()));
        self.expect_sym(";")
    }

    fn cond(&mut self) -> Result<Guard, ParseError> {
        let lhs = self.variable()?;
        let rel = match self.peek() {
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym("<") => Rel::Lt,
            Tok::Sym(">=") => Rel::Ge,
            Tok::Sym(">") => Rel::Gt,
            Tok::Sym("==") => Rel::Eq,
            Tok::Sym("!=") => Rel::Ne,
            _ => return Err(self.unexpected("comparison operator")),
        };
        self.pos += 1;
        let rhs = if self.starts_int() {
            Operand::Const(self.int()?)
        } else {
            let u = self.variable()?;
            Operand::Var(u, self.offset()?)
        };
        Ok(Guard::new(lhs, rel, rhs))
    }

    fn block(&mut self) -> Result<Vec<SrcStmt>, ParseError> {
        self.expect_sym("{")?;
        let mut body = Vec::new();
        while !self.is_sym("}") {
            body.push(self.stmt()?);
        }
        self.pos += 1;
        Ok(body)
    }

    fn paren_cond(&mut self) -> Result<Guard, ParseError> {
        self.expect_sym("(")?;
        let g = self.cond()?;
        self.expect_sym(")")?;
        Ok(g)
    }

    fn stmt(&mut self) -> Result<SrcStmt, ParseError> {
        if self.is_keyword("if") {
            self.pos += 1;
            let cond = self.paren_cond()?;
            let then_body = self.block()?;
            let else_body = if self.is_keyword("else") {
                self.pos += 1;
                Some(self.block()?)
            } else {
                None
            };
            return Ok(SrcStmt::If {
                cond,
                then_body,
                else_body,
            });
        }
        if self.is_keyword("while") {
            self.pos += 1;
            let cond = self.paren_cond()?;
            let body = self.block()?;
            return Ok(SrcStmt::While { cond, body });
        }
        let stmt = if self.is_keyword("assert") {
            self.pos += 1;
            SrcStmt::Assert(self.cond()?)
        } else if self.is_keyword("havoc") {
            self.pos += 1;
            SrcStmt::Havoc(self.variable()?)
        } else if self.is_keyword("int") {
            return Err(self.unexpected("statement"));
        } else {
            let v = self.variable()?;
            self.expect_sym(":=")?;
            let rhs = if self.starts_int() {
                Rhs::Const(self.int()?)
            } else {
                let u = self.variable()?;
                Rhs::VarPlus(u, self.offset()?)
            };
            SrcStmt::Assign(v, rhs)
        };
        self.expect_sym(";")?;
        Ok(stmt)
    }
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        vars: Vec::new(),
        index: HashMap::new(),
    };
    while p.is_keyword("int") {
        p.decl()?;
    }
    let mut body = Vec::new();
    while *p.peek() != Tok::Eof {
        body.push(p.stmt()?);
    }
    Ok(Program {
        vars: p.vars.into(),
        body,
    })
}
