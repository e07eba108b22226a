//! A small three-address integer language and its control-flow graph.

pub mod cfg;
pub mod parser;

use std::fmt;

use crate::zone::{LinearForm, VarId};

pub use cfg::{build_cfg, BlockId, Cfg, Edge, EdgeKind};
pub use parser::{parse_program, ParseError, ParseErrorKind, Program, SrcStmt};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl Rel {
    pub fn negate(self) -> Rel {
        match self {
            Rel::Le => Rel::Gt,
            Rel::Lt => Rel::Ge,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "==",
            Rel::Ne => "!=",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Rel::Le => a <= b,
            Rel::Lt => a < b,
            Rel::Ge => a >= b,
            Rel::Gt => a > b,
            Rel::Eq => a == b,
            Rel::Ne => a != b,
        }
    }
}

/// Right operand of a comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Const(i64),
    /// `u + c`
    Var(VarId, i64),
}

/// `lhs rel rhs`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Guard {
    pub lhs: VarId,
    pub rel: Rel,
    pub rhs: Operand,
}

/// `s - t <= c`, with `VarId::ZERO` standing for the constant 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DiffConstraint {
    pub s: VarId,
    pub t: VarId,
    pub c: i64,
}

/// A guard rewritten into difference constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardForm {
    /// Not expressible as a conjunction of differences (`!=`).
    Unrefinable,
    /// Trivially false, e.g. `x < x`.
    Infeasible,
    /// Conjunction; empty when trivially true.
    Conjunction(Vec<DiffConstraint>),
}

impl Guard {
    pub fn new(lhs: VarId, rel: Rel, rhs: Operand) -> Self {
        Guard { lhs, rel, rhs }
    }

    pub fn negate(&self) -> Guard {
        Guard {
            rel: self.rel.negate(),
            ..*self
        }
    }

    /// Integer semantics: `x < e` becomes `x <= e - 1`.
    pub fn constraints(&self) -> GuardForm {
        let v = self.lhs;
        let (t, c) = match self.rhs {
            Operand::Const(c) => (VarId::ZERO, c),
            Operand::Var(u, c) => (u, c),
        };
        let raw = match self.rel {
            Rel::Le => vec![(v, t, c)],
            Rel::Lt => vec![(v, t, c - 1)],
            Rel::Ge => vec![(t, v, -c)],
            Rel::Gt => vec![(t, v, -c - 1)],
            Rel::Eq => vec![(v, t, c), (t, v, -c)],
            Rel::Ne => return GuardForm::Unrefinable,
        };
        let mut out = Vec::new();
        for (s, t, c) in raw {
            if s == t {
                if c < 0 {
                    return GuardForm::Infeasible;
                }
            } else {
                out.push(DiffConstraint { s, t, c });
            }
        }
        GuardForm::Conjunction(out)
    }

    /// Concrete evaluation; `values[i]` is the value of `VarId(i + 1)`.
    pub fn eval(&self, values: &[i64]) -> bool {
        let rhs = match self.rhs {
            Operand::Const(c) => c,
            Operand::Var(u, c) => values[u.0 - 1] + c,
        };
        self.rel.holds(values[self.lhs.0 - 1], rhs)
    }
}

/// Right-hand side of an assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rhs {
    Const(i64),
    /// `u + c`
    VarPlus(VarId, i64),
    Havoc,
}

impl Rhs {
    pub fn to_linear_form(self) -> LinearForm {
        match self {
            Rhs::Const(c) => LinearForm::Const(c),
            Rhs::VarPlus(u, c) => LinearForm::VarPlus(u, c),
            Rhs::Havoc => LinearForm::Unsupported,
        }
    }
}

/// A CFG statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Assign(VarId, Rhs),
    Assume(Guard),
    /// Recorded as a program point, never refines the state.
    Assert(Guard),
    Nop,
}

/// Renders IR pieces with source-level variable names.
pub struct Pretty<'a, T> {
    pub names: &'a [String],
    pub item: &'a T,
}

fn var_name(names: &[String], v: VarId) -> &str {
    if v.is_zero() {
        "Z0"
    } else {
        &names[v.0 - 1]
    }
}

fn write_offset(f: &mut fmt::Formatter<'_>, base: &str, c: i64) -> fmt::Result {
    match c {
        0 => write!(f, "{base}"),
        c if c > 0 => write!(f, "{base} + {c}"),
        c => write!(f, "{base} - {}", c.unsigned_abs()),
    }
}

impl fmt::Display for Pretty<'_, Guard> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.item;
        write!(f, "{} {} ", var_name(self.names, g.lhs), g.rel.symbol())?;
        match g.rhs {
            Operand::Const(c) => write!(f, "{c}"),
            Operand::Var(u, c) => write_offset(f, var_name(self.names, u), c),
        }
    }
}

impl fmt::Display for Pretty<'_, Rhs> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self.item {
            Rhs::Const(c) => write!(f, "{c}"),
            Rhs::VarPlus(u, c) => write_offset(f, var_name(self.names, u), c),
            Rhs::Havoc => write!(f, "havoc"),
        }
    }
}

impl fmt::Display for Pretty<'_, Stmt> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names;
        match self.item {
            Stmt::Assign(v, Rhs::Havoc) => write!(f, "havoc {}", var_name(names, *v)),
            Stmt::Assign(v, rhs) => {
                write!(
                    f,
                    "{} := {}",
                    var_name(names, *v),
                    Pretty { names, item: rhs }
                )
            }
            Stmt::Assume(g) => write!(f, "assume {}", Pretty { names, item: g }),
            Stmt::Assert(g) => write!(f, "assert {}", Pretty { names, item: g }),
            Stmt::Nop => write!(f, "nop"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: VarId = VarId(1);
    const Y: VarId = VarId(2);

    #[test]
    fn strict_guards_use_integer_semantics() {
        let g = Guard::new(X, Rel::Lt, Operand::Var(Y, 2));
        assert_eq!(
            g.constraints(),
            GuardForm::Conjunction(vec![DiffConstraint { s: X, t: Y, c: 1 }])
        );
        let g = Guard::new(X, Rel::Gt, Operand::Const(3));
        assert_eq!(
            g.constraints(),
            GuardForm::Conjunction(vec![DiffConstraint {
                s: VarId::ZERO,
                t: X,
                c: -4
            }])
        );
    }

    #[test]
    fn negation_round_trips() {
        for rel in [Rel::Le, Rel::Lt, Rel::Ge, Rel::Gt, Rel::Eq, Rel::Ne] {
            assert_eq!(rel.negate().negate(), rel);
            for (a, b) in [(0, 1), (1, 1), (2, 1)] {
                assert_ne!(rel.holds(a, b), rel.negate().holds(a, b));
            }
        }
    }

    #[test]
    fn self_comparisons() {
        assert_eq!(
            Guard::new(X, Rel::Lt, Operand::Var(X, 0)).constraints(),
            GuardForm::Infeasible
        );
        assert_eq!(
            Guard::new(X, Rel::Le, Operand::Var(X, 1)).constraints(),
            GuardForm::Conjunction(vec![])
        );
        assert_eq!(
            Guard::new(X, Rel::Ne, Operand::Const(1)).constraints(),
            GuardForm::Unrefinable
        );
    }
}
