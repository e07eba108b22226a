//! Zone abstract states stored as dense difference-bound matrices.
//!
//! Entry `(s, t)` of the matrix holds `b` for the inequality `s - t <= b`.
//! Index 0 is the zero variable `Z0`, pinned to the value 0, so interval
//! bounds fit the same template: `x <= 2` is `x - Z0 <= 2` and `x >= 1` is
//! `Z0 - x <= -1`.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::bound::Bound;
use crate::domains::interval::{IntervalState, Itv};
use crate::minimizer::DeltaSet;

/// Index of a DBM row/column. `VarId(0)` is always `Z0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub const ZERO: VarId = VarId(0);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ZoneError {
    #[error("edge ({0}, {0}) is a self-loop")]
    InvalidEdge(usize),
    #[error("variable index {0} cannot be used here")]
    InvalidVariable(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("search space of {bits:.1} bits exceeds the {limit}-bit enumeration guard")]
    SearchSpaceTooLarge { bits: f64, limit: u32 },
}

/// Maximum number of bits of brute-force search `enumerate_box` accepts.
pub const ENUMERATION_GUARD_BITS: u32 = 24;

/// Right-hand side of an assignment in the shapes the domain handles exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearForm {
    Const(i64),
    /// `u + c`; when `u` is the assigned variable this is a translation.
    VarPlus(VarId, i64),
    /// Anything else; the target is havocked.
    Unsupported,
}

/// A Zone over a fixed variable universe.
#[derive(Clone)]
pub struct ZoneState {
    names: Arc<[String]>,
    dim: usize,
    bounds: Vec<Bound>,
    closed: bool,
    bottom: bool,
}

impl ZoneState {
    /// The unconstrained state over `names` (program variables, without `Z0`).
    pub fn top(names: Arc<[String]>) -> Self {
        let dim = names.len() + 1;
        let mut bounds = vec![Bound::Top; dim * dim];
        for i in 0..dim {
            bounds[i * dim + i] = Bound::ZERO;
        }
        ZoneState {
            names,
            dim,
            bounds,
            closed: true,
            bottom: false,
        }
    }

    pub fn bottom(names: Arc<[String]>) -> Self {
        let mut z = Self::top(names);
        z.bottom = true;
        z
    }

    /// Convenience constructor used heavily in tests.
    pub fn with_names(names: &[&str]) -> Self {
        Self::top(names.iter().map(|s| s.to_string()).collect())
    }

    /// Builds a state from raw `(s, t, b)` entries without closing it.
    pub fn from_edges(names: Arc<[String]>, edges: &[(usize, usize, i64)]) -> Self {
        let mut z = Self::top(names);
        for &(s, t, b) in edges {
            if s != t {
                let cur = z.get(VarId(s), VarId(t));
                z.put(VarId(s), VarId(t), cur.min(Bound::Finite(b)));
            } else if b < 0 {
                z.bottom = true;
            }
        }
        z.closed = edges.iter().all(|&(s, t, _)| s == t);
        z
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    /// Number of rows, `Z0` included.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self, v: VarId) -> &str {
        if v.is_zero() {
            "Z0"
        } else {
            &self.names[v.0 - 1]
        }
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        if name == "Z0" {
            return Some(VarId::ZERO);
        }
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| VarId(i + 1))
    }

    /// Program variables, `Z0` excluded.
    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (1..self.dim).map(VarId)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn get(&self, s: VarId, t: VarId) -> Bound {
        self.bounds[s.0 * self.dim + t.0]
    }

    fn put(&mut self, s: VarId, t: VarId, b: Bound) {
        self.bounds[s.0 * self.dim + t.0] = b;
    }

    /// Overwrites one entry and marks the state as not closed.
    pub fn with_entry(&self, s: VarId, t: VarId, b: Bound) -> ZoneState {
        let mut z = self.clone();
        z.set_entry(s, t, b);
        z
    }

    pub(crate) fn set_entry(&mut self, s: VarId, t: VarId, b: Bound) {
        self.put(s, t, b);
        self.closed = false;
    }

    /// Finite off-diagonal entries, row-major.
    pub fn finite_edges(&self) -> impl Iterator<Item = (VarId, VarId, i64)> + '_ {
        (0..self.dim).flat_map(move |s| {
            (0..self.dim).filter_map(move |t| {
                if s == t {
                    return None;
                }
                self.get(VarId(s), VarId(t))
                    .finite()
                    .map(|b| (VarId(s), VarId(t), b))
            })
        })
    }

    /// Largest absolute finite off-diagonal constant.
    pub fn max_abs_constant(&self) -> i64 {
        self.finite_edges()
            .map(|(_, _, b)| b.abs())
            .max()
            .unwrap_or(0)
    }

    fn check_dim(&self, other: &ZoneState) -> Result<(), ZoneError> {
        if self.dim != other.dim {
            return Err(ZoneError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    fn check_var(&self, v: VarId) -> Result<(), ZoneError> {
        if v.0 >= self.dim {
            return Err(ZoneError::InvalidVariable(v.0));
        }
        Ok(())
    }

    /// All-pairs shortest-path closure. Returns Bottom on a negative cycle.
    pub fn close(&self) -> ZoneState {
        if self.bottom {
            return Self::bottom(self.names.clone());
        }
        if self.closed {
            return self.clone();
        }
        let n = self.dim;
        let mut m = self.bounds.clone();
        for k in 0..n {
            for i in 0..n {
                let ik = m[i * n + k];
                if !ik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let via = ik + m[k * n + j];
                    if via < m[i * n + j] {
                        m[i * n + j] = via;
                    }
                }
            }
        }
        if (0..n).any(|i| m[i * n + i] < 0) {
            return Self::bottom(self.names.clone());
        }
        ZoneState {
            names: self.names.clone(),
            dim: n,
            bounds: m,
            closed: true,
            bottom: false,
        }
    }

    pub fn is_bottom(&self) -> bool {
        if self.bottom {
            return true;
        }
        !self.closed && self.close().bottom
    }

    /// `s - t <= min(old, b)`. Re-closes the state if it was closed.
    pub fn meet_edge(
        &self,
        s: VarId,
        t: VarId,
        b: Bound,
    ) -> Result<(ZoneState, DeltaSet), ZoneError> {
        self.check_var(s)?;
        self.check_var(t)?;
        if s == t {
            return Err(ZoneError::InvalidEdge(s.0));
        }
        if self.bottom || b >= self.get(s, t) {
            return Ok((self.clone(), DeltaSet::default()));
        }
        let mut delta = DeltaSet::default();
        delta.record_edge(s, t);
        let mut z = self.clone();
        z.put(s, t, b);
        if self.closed {
            z.closed = false;
            z = z.close();
        }
        Ok((z, delta))
    }

    /// Removes every constraint on `v`. The result is closed.
    pub fn forget(&self, v: VarId) -> Result<ZoneState, ZoneError> {
        self.check_var(v)?;
        if v.is_zero() {
            return Err(ZoneError::InvalidVariable(0));
        }
        let mut z = self.close();
        if z.bottom {
            return Ok(z);
        }
        for u in 0..z.dim {
            if u != v.0 {
                z.put(v, VarId(u), Bound::Top);
                z.put(VarId(u), v, Bound::Top);
            }
        }
        Ok(z)
    }

    /// `v := rhs`, returning the written delta. Unsupported forms havoc `v`.
    pub fn assign(&self, v: VarId, rhs: LinearForm) -> Result<(ZoneState, DeltaSet), ZoneError> {
        self.check_var(v)?;
        if v.is_zero() {
            return Err(ZoneError::InvalidVariable(0));
        }
        if self.is_bottom() {
            return Ok((Self::bottom(self.names.clone()), DeltaSet::default()));
        }
        let mut delta = DeltaSet::default();
        delta.dv.insert(v);
        let z = match rhs {
            LinearForm::Const(c) => {
                let mut z = self.forget(v)?;
                z.put(v, VarId::ZERO, Bound::Finite(c));
                z.put(VarId::ZERO, v, Bound::Finite(-c));
                delta.record_edge(v, VarId::ZERO);
                delta.record_edge(VarId::ZERO, v);
                z.closed = false;
                z.close()
            }
            LinearForm::VarPlus(u, c) if u != v => {
                self.check_var(u)?;
                let mut z = self.forget(v)?;
                z.put(v, u, Bound::Finite(c));
                z.put(u, v, Bound::Finite(-c));
                delta.record_edge(v, u);
                delta.record_edge(u, v);
                z.closed = false;
                z.close()
            }
            LinearForm::VarPlus(_, 0) => {
                return Ok((self.clone(), DeltaSet::default()));
            }
            LinearForm::VarPlus(_, c) => {
                // v - t <= b becomes v - t <= b + c; t - v <= b becomes b - c.
                // Entries implied through Z0 stay implied after the shift and
                // are left out of the delta.
                let through_zero = |s: VarId, t: VarId| {
                    !s.is_zero()
                        && !t.is_zero()
                        && self.get(s, t) >= self.get(s, VarId::ZERO) + self.get(VarId::ZERO, t)
                };
                let mut z = self.clone();
                for u in 0..self.dim {
                    let u = VarId(u);
                    if u == v {
                        continue;
                    }
                    let out = self.get(v, u);
                    if out.is_finite() {
                        z.put(v, u, out.offset(c));
                        if !through_zero(v, u) {
                            delta.record_edge(v, u);
                        }
                    }
                    let inc = self.get(u, v);
                    if inc.is_finite() {
                        z.put(u, v, inc.offset(-c));
                        if !through_zero(u, v) {
                            delta.record_edge(u, v);
                        }
                    }
                }
                z
            }
            LinearForm::Unsupported => self.forget(v)?,
        };
        Ok((z, delta))
    }

    /// Least upper bound: pointwise max of the closed matrices.
    pub fn join(&self, other: &ZoneState) -> Result<ZoneState, ZoneError> {
        self.check_dim(other)?;
        let a = self.close();
        let b = other.close();
        if a.bottom {
            return Ok(b);
        }
        if b.bottom {
            return Ok(a);
        }
        let mut z = a.clone();
        for (dst, src) in z.bounds.iter_mut().zip(&b.bounds) {
            *dst = (*dst).max(*src);
        }
        Ok(z)
    }

    /// Standard DBM widening. `self` is the previous state and is not closed
    /// first; the result is left unclosed.
    pub fn widen(&self, next: &ZoneState) -> Result<ZoneState, ZoneError> {
        self.check_dim(next)?;
        let next = next.close();
        if self.bottom {
            return Ok(next);
        }
        if next.bottom {
            return Ok(self.clone());
        }
        let mut z = self.clone();
        let mut changed = false;
        for (dst, src) in z.bounds.iter_mut().zip(&next.bounds) {
            if *src > *dst {
                *dst = Bound::Top;
                changed = true;
            }
        }
        if changed {
            z.closed = false;
        }
        Ok(z)
    }

    /// Semantic equality: compares closed forms entrywise.
    pub fn equivalent(&self, other: &ZoneState) -> Result<bool, ZoneError> {
        self.check_dim(other)?;
        let a = self.close();
        let b = other.close();
        Ok(match (a.bottom, b.bottom) {
            (true, true) => true,
            (false, false) => a.bounds == b.bounds,
            _ => false,
        })
    }

    /// Pointwise `<=` of closed matrices, i.e. `self` entails `other`.
    pub fn leq(&self, other: &ZoneState) -> Result<bool, ZoneError> {
        self.check_dim(other)?;
        let a = self.close();
        if a.bottom {
            return Ok(true);
        }
        let b = other.close();
        if b.bottom {
            return Ok(false);
        }
        Ok(a.bounds.iter().zip(&b.bounds).all(|(x, y)| x <= y))
    }

    /// Per-variable projection of the closed state.
    pub fn to_intervals(&self) -> IntervalState {
        let z = self.close();
        if z.bottom {
            return IntervalState::bottom(self.names.clone());
        }
        let itvs = z
            .vars()
            .map(|v| {
                Itv::new(
                    z.get(VarId::ZERO, v).finite().map(|b| -b),
                    z.get(v, VarId::ZERO).finite(),
                )
            })
            .collect();
        IntervalState::from_itvs(self.names.clone(), itvs)
    }

    /// Whether `point` (values of `v1..vn`, `Z0` implicit) satisfies every
    /// finite entry.
    pub fn contains(&self, point: &[i64]) -> bool {
        if self.bottom {
            return false;
        }
        let value = |v: usize| if v == 0 { 0 } else { point[v - 1] };
        self.finite_edges()
            .all(|(s, t, b)| value(s.0) - value(t.0) <= b)
    }

    /// Every vector of `[-bound, bound]^(dim-1)` satisfying the state.
    pub fn enumerate_box(&self, bound: i64) -> Result<BTreeSet<Vec<i64>>, ZoneError> {
        let vars = self.dim - 1;
        let bits = vars as f64 * ((2 * bound + 1) as f64).log2();
        if bits > ENUMERATION_GUARD_BITS as f64 {
            return Err(ZoneError::SearchSpaceTooLarge {
                bits,
                limit: ENUMERATION_GUARD_BITS,
            });
        }
        let mut out = BTreeSet::new();
        if self.bottom {
            return Ok(out);
        }
        // Constraints grouped by the highest variable index they mention, so
        // partial assignments can be pruned as soon as they are decided.
        let mut by_level: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); self.dim];
        for (s, t, b) in self.finite_edges() {
            by_level[s.0.max(t.0)].push((s.0, t.0, b));
        }
        if by_level[0].iter().any(|&(_, _, b)| b < 0) {
            return Ok(out);
        }
        let mut point = vec![0i64; vars];
        enumerate_level(1, bound, &by_level, &mut point, &mut out);
        Ok(out)
    }

    /// One inequality per line, sorted by `(row, col)`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        if self.bottom {
            out.push_str("bottom\n");
            return out;
        }
        for (s, t, b) in self.finite_edges() {
            let _ = writeln!(out, "{} - {} <= {}", self.name(s), self.name(t), b);
        }
        out
    }
}

fn enumerate_level(
    level: usize,
    bound: i64,
    by_level: &[Vec<(usize, usize, i64)>],
    point: &mut Vec<i64>,
    out: &mut BTreeSet<Vec<i64>>,
) {
    if level == by_level.len() {
        out.insert(point.clone());
        return;
    }
    for x in -bound..=bound {
        point[level - 1] = x;
        let value = |v: usize| if v == 0 { 0 } else { point[v - 1] };
        if by_level[level]
            .iter()
            .all(|&(s, t, b)| value(s) - value(t) <= b)
        {
            enumerate_level(level + 1, bound, by_level, point, out);
        }
    }
}

/// Structural equality of the stored matrices (Bottom equals Bottom).
impl PartialEq for ZoneState {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.bottom == other.bottom
            && (self.bottom || self.bounds == other.bounds)
    }
}

impl Eq for ZoneState {}

impl fmt::Debug for ZoneState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZoneState(closed={}) {{ ", self.closed)?;
        if self.bottom {
            return write!(f, "bottom }}");
        }
        for (s, t, b) in self.finite_edges() {
            write!(f, "{} - {} <= {}; ", self.name(s), self.name(t), b)?;
        }
        write!(f, "}}")
    }
}
