//! SMT-LIB2 scripts for abstract states (QF_LIA).

use std::fmt::Write as _;
use std::path::Path;

use crate::domains::interval::{IntervalState, Itv};
use crate::domains::predicate::PredicateState;
use crate::minimizer::Subgraph;
use crate::zone::{VarId, ZoneState};

fn lit(c: i64) -> String {
    if c < 0 {
        format!("(- {})", c.unsigned_abs())
    } else {
        c.to_string()
    }
}

/// `s - t <= b` with `Z0` read as 0.
fn diff_atom(s: &str, t: &str, b: i64) -> String {
    match (s, t) {
        ("Z0", t) => format!("(>= {t} {})", lit(-b)),
        (s, "Z0") => format!("(<= {s} {})", lit(b)),
        (s, t) => format!("(<= (- {s} {t}) {})", lit(b)),
    }
}

fn range_atom(v: &str, itv: &Itv) -> String {
    match (itv.lo, itv.hi) {
        (Some(l), Some(h)) if l == h => format!("(= {v} {})", lit(l)),
        (Some(l), Some(h)) => format!("(and (>= {v} {}) (<= {v} {}))", lit(l), lit(h)),
        (Some(l), None) => format!("(>= {v} {})", lit(l)),
        (None, Some(h)) => format!("(<= {v} {})", lit(h)),
        (None, None) => "true".to_string(),
    }
}

fn script<'a>(decls: impl Iterator<Item = &'a str>, asserts: &[String]) -> String {
    let mut out = String::from("(set-logic QF_LIA)\n");
    for d in decls {
        let _ = writeln!(out, "(declare-const {d} Int)");
    }
    for a in asserts {
        let _ = writeln!(out, "(assert {a})");
    }
    out.push_str("(check-sat)\n");
    out
}

/// Renders a state as a standalone SMT-LIB2 script.
pub trait ToSmtLib {
    fn to_smtlib(&self) -> String;
}

impl ToSmtLib for Subgraph {
    /// One assertion per kept inequality in `(row, col)` order.
    fn to_smtlib(&self) -> String {
        let asserts: Vec<String> = self
            .edges
            .iter()
            .map(|(&(s, t), &b)| diff_atom(self.name(s), self.name(t), b))
            .collect();
        script(self.vars.iter().map(|&v| self.name(v)), &asserts)
    }
}

impl ToSmtLib for ZoneState {
    fn to_smtlib(&self) -> String {
        let vars = self.vars().map(|v| self.name(v));
        if self.is_bottom() {
            return script(vars, &["false".to_string()]);
        }
        let asserts: Vec<String> = self
            .finite_edges()
            .map(|(s, t, b)| diff_atom(self.name(s), self.name(t), b))
            .collect();
        script(vars, &asserts)
    }
}

impl ToSmtLib for IntervalState {
    fn to_smtlib(&self) -> String {
        let vars = self.names().iter().map(String::as_str);
        if self.is_bottom() {
            return script(vars, &["false".to_string()]);
        }
        let asserts: Vec<String> = self
            .vars()
            .filter_map(|v| {
                let itv = self.get(v)?;
                (itv != Itv::TOP).then(|| range_atom(&self.names()[v.0 - 1], &itv))
            })
            .collect();
        script(vars, &asserts)
    }
}

impl ToSmtLib for PredicateState {
    /// Each restricted variable becomes a disjunction of its ranges.
    fn to_smtlib(&self) -> String {
        let names = self.names();
        let vars = names.iter().map(String::as_str);
        if self.is_bottom() {
            return script(vars, &["false".to_string()]);
        }
        let mut asserts = Vec::new();
        for (i, name) in names.iter().enumerate() {
            let ranges = self.get(VarId(i + 1)).unwrap().ranges();
            if ranges == [Itv::TOP] {
                continue;
            }
            let atoms: Vec<String> = ranges.iter().map(|r| range_atom(name, r)).collect();
            asserts.push(match atoms.len() {
                1 => atoms[0].clone(),
                _ => format!("(or {})", atoms.join(" ")),
            });
        }
        script(vars, &asserts)
    }
}

pub fn emit_smtlib(state: &impl ToSmtLib, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, state.to_smtlib())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::predicate::ElementSet;
    use crate::minimizer::{full_state, remove_spurious};
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn names() -> Arc<[String]> {
        ["x", "w", "y"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_upper_bound() {
        let z = ZoneState::from_edges(names(), &[(3, 0, 0)]);
        let s = Subgraph::induced(&z, BTreeSet::from([VarId(3)]));
        assert_eq!(
            s.to_smtlib(),
            "(set-logic QF_LIA)\n(declare-const y Int)\n(assert (<= y 0))\n(check-sat)\n"
        );
    }

    #[test]
    fn reduced_closed_example_in_matrix_order() {
        let z =
            ZoneState::from_edges(names(), &[(1, 0, 0), (0, 1, 0), (2, 1, 2), (3, 1, 0)]).close();
        let text = full_state(&remove_spurious(&z)).to_smtlib();
        let asserts: Vec<&str> = text.lines().filter(|l| l.starts_with("(assert")).collect();
        assert_eq!(
            asserts,
            [
                "(assert (>= x 0))",
                "(assert (<= x 0))",
                "(assert (<= w 2))",
                "(assert (<= y 0))"
            ]
        );
    }

    #[test]
    fn bottom_asserts_false() {
        for text in [
            ZoneState::bottom(names()).to_smtlib(),
            IntervalState::bottom(names()).to_smtlib(),
            PredicateState::bottom(names()).to_smtlib(),
        ] {
            assert!(text.contains("(assert false)"));
        }
    }

    #[test]
    fn predicates_become_disjunctions() {
        let p = PredicateState::from_sets(
            names(),
            vec![
                ElementSet::from_indices(&[0, 3]),
                ElementSet::ALL,
                ElementSet::ALL,
            ],
        );
        assert!(p.to_smtlib().contains("(assert (or (<= x (- 5)) (= x 0)))"));
        let z = ZoneState::from_edges(names(), &[(1, 2, -3)]);
        assert!(z.to_smtlib().contains("(assert (<= (- x w) (- 3)))"));
    }
}
