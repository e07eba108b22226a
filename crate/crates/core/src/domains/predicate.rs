//! A fixed disjoint predicate domain.
//!
//! Each variable maps to a subset of seven integer ranges that partition
//! the integers. The half-open ranges are stored as their closed integer
//! equivalents, e.g. `(-5, -2]` is `[-4, -2]`.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::domains::interval::Itv;
use crate::domains::DomainError;
use crate::ir::{DiffConstraint, GuardForm, Rhs, Stmt};
use crate::zone::VarId;

/// The predicate elements `E1..E7`, in ascending order.
pub const ELEMENTS: [Itv; 7] = [
    Itv {
        lo: None,
        hi: Some(-5),
    },
    Itv {
        lo: Some(-4),
        hi: Some(-2),
    },
    Itv {
        lo: Some(-1),
        hi: Some(-1),
    },
    Itv {
        lo: Some(0),
        hi: Some(0),
    },
    Itv {
        lo: Some(1),
        hi: Some(1),
    },
    Itv {
        lo: Some(2),
        hi: Some(4),
    },
    Itv {
        lo: Some(5),
        hi: None,
    },
];

/// A subset of [`ELEMENTS`] as a bit mask; bit `i` is element `E(i+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ElementSet(u8);

impl ElementSet {
    pub const ALL: ElementSet = ElementSet(0x7f);
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn of_value(c: i64) -> ElementSet {
        let idx = ELEMENTS
            .iter()
            .position(|e| e.contains(c))
            .expect("elements partition the integers");
        ElementSet(1 << idx)
    }

    /// Every element overlapping `itv`.
    pub fn overlapping(itv: &Itv) -> ElementSet {
        let mut bits = 0;
        for (i, e) in ELEMENTS.iter().enumerate() {
            if !e.intersect(itv).is_empty() {
                bits |= 1 << i;
            }
        }
        ElementSet(bits)
    }

    pub fn from_indices(indices: &[usize]) -> ElementSet {
        ElementSet(indices.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..ELEMENTS.len()).filter(move |i| self.0 & (1 << i) != 0)
    }

    pub fn elements(self) -> impl Iterator<Item = Itv> {
        self.indices().map(|i| ELEMENTS[i])
    }

    fn filter(self, keep: impl Fn(&Itv) -> bool) -> ElementSet {
        ElementSet(
            self.indices()
                .filter(|&i| keep(&ELEMENTS[i]))
                .fold(0, |acc, i| acc | (1 << i)),
        )
    }

    /// Convex hull of the selected elements.
    pub fn hull(self) -> Option<Itv> {
        self.elements().reduce(|a, b| a.hull(&b))
    }

    pub fn contains(self, x: i64) -> bool {
        self.elements().any(|e| e.contains(x))
    }

    /// Maximal disjoint ranges covered by the selection, adjacent elements
    /// merged.
    pub fn ranges(self) -> Vec<Itv> {
        let mut out: Vec<Itv> = Vec::new();
        for e in self.elements() {
            match out.last_mut() {
                Some(last) if last.hi.zip(e.lo).is_some_and(|(h, l)| h + 1 == l) => {
                    last.hi = e.hi;
                }
                _ => out.push(e),
            }
        }
        out
    }
}

/// Per-variable element sets, or Bottom.
#[derive(Clone, PartialEq, Eq)]
pub struct PredicateState {
    names: Arc<[String]>,
    sets: Option<Vec<ElementSet>>,
}

impl PredicateState {
    pub fn top(names: Arc<[String]>) -> Self {
        let sets = Some(vec![ElementSet::ALL; names.len()]);
        PredicateState { names, sets }
    }

    pub fn bottom(names: Arc<[String]>) -> Self {
        PredicateState { names, sets: None }
    }

    /// An empty set for any variable makes the whole state Bottom.
    pub fn from_sets(names: Arc<[String]>, sets: Vec<ElementSet>) -> Self {
        assert_eq!(names.len(), sets.len());
        if sets.iter().any(|s| s.is_empty()) {
            return Self::bottom(names);
        }
        PredicateState {
            names,
            sets: Some(sets),
        }
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn is_bottom(&self) -> bool {
        self.sets.is_none()
    }

    pub fn get(&self, v: VarId) -> Option<ElementSet> {
        self.sets.as_ref().map(|sets| sets[v.0 - 1])
    }

    fn eval(&self, sets: &[ElementSet], rhs: &Rhs) -> ElementSet {
        match *rhs {
            Rhs::Const(c) => ElementSet::of_value(c),
            Rhs::VarPlus(u, c) => sets[u.0 - 1].elements().fold(ElementSet::EMPTY, |acc, e| {
                acc.union(ElementSet::overlapping(&e.shift(c)))
            }),
            Rhs::Havoc => ElementSet::ALL,
        }
    }

    /// Drops elements that cannot satisfy `s - t <= c` given the other
    /// side's hull.
    fn refine(sets: &mut [ElementSet], k: &DiffConstraint) {
        let hull = |sets: &[ElementSet], v: VarId| {
            if v.is_zero() {
                Some(Itv::point(0))
            } else {
                sets[v.0 - 1].hull()
            }
        };
        if !k.s.is_zero() {
            if let Some(t) = hull(sets, k.t) {
                let limit = t.hi.map(|h| h + k.c);
                let cur = &mut sets[k.s.0 - 1];
                *cur = cur.filter(|e| match (e.lo, limit) {
                    (Some(lo), Some(lim)) => lo <= lim,
                    _ => true,
                });
            }
        }
        if !k.t.is_zero() {
            if let Some(s) = hull(sets, k.s) {
                let limit = s.lo.map(|l| l - k.c);
                let cur = &mut sets[k.t.0 - 1];
                *cur = cur.filter(|e| match (e.hi, limit) {
                    (Some(hi), Some(lim)) => hi >= lim,
                    _ => true,
                });
            }
        }
    }

    pub fn transfer(&self, stmt: &Stmt) -> PredicateState {
        let Some(sets) = &self.sets else {
            return self.clone();
        };
        match stmt {
            Stmt::Assign(v, rhs) => {
                let mut next = sets.clone();
                next[v.0 - 1] = self.eval(sets, rhs);
                Self::from_sets(self.names.clone(), next)
            }
            Stmt::Assume(guard) => match guard.constraints() {
                GuardForm::Unrefinable => self.clone(),
                GuardForm::Infeasible => Self::bottom(self.names.clone()),
                GuardForm::Conjunction(ks) => {
                    let mut next = sets.clone();
                    for k in &ks {
                        Self::refine(&mut next, k);
                        if next.iter().any(|s| s.is_empty()) {
                            return Self::bottom(self.names.clone());
                        }
                    }
                    Self::from_sets(self.names.clone(), next)
                }
            },
            Stmt::Assert(_) | Stmt::Nop => self.clone(),
        }
    }

    /// Per-variable union. The lattice is finite, so no widening is needed.
    pub fn join(&self, other: &PredicateState) -> Result<PredicateState, DomainError> {
        if self.names.len() != other.names.len() {
            return Err(DomainError::UniverseMismatch {
                left: self.names.len(),
                right: other.names.len(),
            });
        }
        Ok(match (&self.sets, &other.sets) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => Self::from_sets(
                self.names.clone(),
                a.iter().zip(b).map(|(x, y)| x.union(*y)).collect(),
            ),
        })
    }

    pub fn leq(&self, other: &PredicateState) -> bool {
        match (&self.sets, &other.sets) {
            (None, _) => true,
            (_, None) => false,
            (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.is_subset(*y)),
        }
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        match &self.sets {
            None => false,
            Some(sets) => sets.iter().zip(point).all(|(s, &x)| s.contains(x)),
        }
    }

    /// Concretization over `vars` (in the given order) clipped to
    /// `[-bound, bound]`.
    pub fn gamma(&self, vars: &[VarId], bound: i64) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        let Some(sets) = &self.sets else {
            return out;
        };
        let axes: Vec<Vec<i64>> = vars
            .iter()
            .map(|v| {
                (-bound..=bound)
                    .filter(|&x| sets[v.0 - 1].contains(x))
                    .collect()
            })
            .collect();
        let mut point = Vec::with_capacity(vars.len());
        cartesian(&axes, &mut point, &mut out);
        out
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        match &self.sets {
            None => out.push_str("bottom\n"),
            Some(sets) => {
                for (name, set) in self.names.iter().zip(sets) {
                    let elems: Vec<String> = set.indices().map(|i| format!("E{}", i + 1)).collect();
                    let _ = writeln!(out, "{name} in {{{}}}", elems.join(","));
                }
            }
        }
        out
    }
}

fn cartesian(axes: &[Vec<i64>], point: &mut Vec<i64>, out: &mut BTreeSet<Vec<i64>>) {
    if point.len() == axes.len() {
        out.insert(point.clone());
        return;
    }
    for &x in &axes[point.len()] {
        point.push(x);
        cartesian(axes, point, out);
        point.pop();
    }
}

impl fmt::Debug for PredicateState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
