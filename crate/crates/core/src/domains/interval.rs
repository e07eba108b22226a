//! Per-variable integer intervals.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::domains::DomainError;
use crate::ir::{DiffConstraint, GuardForm, Rhs, Stmt};
use crate::zone::VarId;

/// An integer interval; `None` bounds are infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Itv {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Itv {
    pub const TOP: Itv = Itv { lo: None, hi: None };

    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        Itv { lo, hi }
    }

    pub fn point(c: i64) -> Self {
        Itv::new(Some(c), Some(c))
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(l), Some(h)) if l > h)
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo.map_or(true, |l| l <= x) && self.hi.map_or(true, |h| x <= h)
    }

    pub fn shift(&self, c: i64) -> Itv {
        Itv::new(self.lo.map(|l| l + c), self.hi.map(|h| h + c))
    }

    pub fn hull(&self, other: &Itv) -> Itv {
        Itv::new(
            self.lo.zip(other.lo).map(|(a, b)| a.min(b)),
            self.hi.zip(other.hi).map(|(a, b)| a.max(b)),
        )
    }

    pub fn intersect(&self, other: &Itv) -> Itv {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Itv::new(lo, hi)
    }

    pub fn leq(&self, other: &Itv) -> bool {
        let lo_ok = match (self.lo, other.lo) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a >= b,
        };
        let hi_ok = match (self.hi, other.hi) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        };
        lo_ok && hi_ok
    }

    /// Bounds that moved outward jump to infinity.
    pub fn widen(&self, next: &Itv) -> Itv {
        let lo = match (self.lo, next.lo) {
            (Some(a), Some(b)) if b >= a => Some(a),
            _ => None,
        };
        let hi = match (self.hi, next.hi) {
            (Some(a), Some(b)) if b <= a => Some(a),
            _ => None,
        };
        Itv::new(lo, hi)
    }
}

impl fmt::Display for Itv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Some(l) => write!(f, "[{l}, ")?,
            None => write!(f, "[-inf, ")?,
        }
        match self.hi {
            Some(h) => write!(f, "{h}]"),
            None => write!(f, "+inf]"),
        }
    }
}

/// One interval per program variable, or Bottom.
#[derive(Clone, PartialEq, Eq)]
pub struct IntervalState {
    names: Arc<[String]>,
    itvs: Option<Vec<Itv>>,
}

impl IntervalState {
    pub fn top(names: Arc<[String]>) -> Self {
        let itvs = Some(vec![Itv::TOP; names.len()]);
        IntervalState { names, itvs }
    }

    pub fn bottom(names: Arc<[String]>) -> Self {
        IntervalState { names, itvs: None }
    }

    /// Any empty interval collapses the state to Bottom.
    pub fn from_itvs(names: Arc<[String]>, itvs: Vec<Itv>) -> Self {
        assert_eq!(names.len(), itvs.len());
        if itvs.iter().any(Itv::is_empty) {
            return Self::bottom(names);
        }
        IntervalState {
            names,
            itvs: Some(itvs),
        }
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn is_bottom(&self) -> bool {
        self.itvs.is_none()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (1..=self.names.len()).map(VarId)
    }

    /// `None` when the state is Bottom.
    pub fn get(&self, v: VarId) -> Option<Itv> {
        self.itvs.as_ref().map(|itvs| itvs[v.0 - 1])
    }

    fn eval(&self, rhs: &Rhs) -> Itv {
        match *rhs {
            Rhs::Const(c) => Itv::point(c),
            Rhs::VarPlus(u, c) => self.get(u).map_or(Itv::TOP, |i| i.shift(c)),
            Rhs::Havoc => Itv::TOP,
        }
    }

    /// Refines with `s - t <= c` in one pass.
    fn refine(itvs: &mut [Itv], k: &DiffConstraint) {
        let value = |itvs: &[Itv], v: VarId| {
            if v.is_zero() {
                Itv::point(0)
            } else {
                itvs[v.0 - 1]
            }
        };
        let t_itv = value(itvs, k.t);
        if !k.s.is_zero() {
            let bound = t_itv.hi.map(|h| h + k.c);
            let cur = &mut itvs[k.s.0 - 1];
            *cur = cur.intersect(&Itv::new(None, bound));
        }
        let s_itv = value(itvs, k.s);
        if !k.t.is_zero() {
            let bound = s_itv.lo.map(|l| l - k.c);
            let cur = &mut itvs[k.t.0 - 1];
            *cur = cur.intersect(&Itv::new(bound, None));
        }
    }

    pub fn transfer(&self, stmt: &Stmt) -> IntervalState {
        let Some(itvs) = &self.itvs else {
            return self.clone();
        };
        match stmt {
            Stmt::Assign(v, rhs) => {
                let mut next = itvs.clone();
                next[v.0 - 1] = self.eval(rhs);
                Self::from_itvs(self.names.clone(), next)
            }
            Stmt::Assume(guard) => match guard.constraints() {
                GuardForm::Unrefinable => self.clone(),
                GuardForm::Infeasible => Self::bottom(self.names.clone()),
                GuardForm::Conjunction(ks) => {
                    let mut next = itvs.clone();
                    for k in &ks {
                        Self::refine(&mut next, k);
                        if next.iter().any(Itv::is_empty) {
                            return Self::bottom(self.names.clone());
                        }
                    }
                    Self::from_itvs(self.names.clone(), next)
                }
            },
            Stmt::Assert(_) | Stmt::Nop => self.clone(),
        }
    }

    fn combine(
        &self,
        other: &IntervalState,
        f: impl Fn(&Itv, &Itv) -> Itv,
    ) -> Result<IntervalState, DomainError> {
        if self.names.len() != other.names.len() {
            return Err(DomainError::UniverseMismatch {
                left: self.names.len(),
                right: other.names.len(),
            });
        }
        Ok(match (&self.itvs, &other.itvs) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => Self::from_itvs(
                self.names.clone(),
                a.iter().zip(b).map(|(x, y)| f(x, y)).collect(),
            ),
        })
    }

    pub fn join(&self, other: &IntervalState) -> Result<IntervalState, DomainError> {
        self.combine(other, Itv::hull)
    }

    pub fn widen(&self, next: &IntervalState) -> Result<IntervalState, DomainError> {
        self.combine(next, Itv::widen)
    }

    pub fn join_widen(
        &self,
        other: &IntervalState,
        widen: bool,
    ) -> Result<IntervalState, DomainError> {
        if widen {
            self.widen(&self.join(other)?)
        } else {
            self.join(other)
        }
    }

    pub fn leq(&self, other: &IntervalState) -> bool {
        match (&self.itvs, &other.itvs) {
            (None, _) => true,
            (_, None) => false,
            (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.leq(y)),
        }
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        match &self.itvs {
            None => false,
            Some(itvs) => itvs.iter().zip(point).all(|(i, &x)| i.contains(x)),
        }
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        match &self.itvs {
            None => out.push_str("bottom\n"),
            Some(itvs) => {
                for (name, itv) in self.names.iter().zip(itvs) {
                    let _ = writeln!(out, "{name} in {itv}");
                }
            }
        }
        out
    }
}

impl fmt::Debug for IntervalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
