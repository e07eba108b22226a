//! Minimal changed-set extraction for Zone states.
//!
//! Given an updated state and the variables (`dv`) and edges (`de`) written
//! by a transfer, these routines pick the part of the state that may have
//! changed. All of them first drop spurious edges, i.e. direct edges already
//! implied by the path through `Z0`, so that interval facts do not glue
//! otherwise unrelated variables together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::Bound;
use crate::zone::{VarId, ZoneState};

/// Updated variables and updated edges of one transfer, merge or widen step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeltaSet {
    /// Updated variables; never contains `Z0`.
    pub dv: BTreeSet<VarId>,
    /// Updated `(source, target)` entries.
    pub de: BTreeSet<(VarId, VarId)>,
}

impl DeltaSet {
    /// Adds `(s, t)` to `de` and its non-zero endpoints to `dv`.
    pub fn record_edge(&mut self, s: VarId, t: VarId) {
        self.de.insert((s, t));
        for v in [s, t] {
            if !v.is_zero() {
                self.dv.insert(v);
            }
        }
    }

    pub fn extend(&mut self, other: &DeltaSet) {
        self.dv.extend(other.dv.iter().copied());
        self.de.extend(other.de.iter().copied());
    }

    pub fn is_empty(&self) -> bool {
        self.dv.is_empty() && self.de.is_empty()
    }

    /// Entries that differ between two states, with their endpoints as `dv`.
    pub fn between(old: &ZoneState, new: &ZoneState) -> DeltaSet {
        let mut delta = DeltaSet::default();
        if old.dim() != new.dim() {
            return delta;
        }
        for s in 0..new.dim() {
            for t in 0..new.dim() {
                let (s, t) = (VarId(s), VarId(t));
                if s != t && old.get(s, t) != new.get(s, t) {
                    delta.record_edge(s, t);
                }
            }
        }
        delta
    }
}

/// A minimized view of a Zone: selected variables plus the finite
/// inequalities kept from the source state.
#[derive(Clone, PartialEq, Eq)]
pub struct Subgraph {
    names: Arc<[String]>,
    pub vars: BTreeSet<VarId>,
    pub edges: BTreeMap<(VarId, VarId), i64>,
}

impl Subgraph {
    pub fn empty(names: Arc<[String]>) -> Self {
        Subgraph {
            names,
            vars: BTreeSet::new(),
            edges: BTreeMap::new(),
        }
    }

    /// `vars` plus every finite entry of `g` whose endpoints lie in
    /// `vars ∪ {Z0}`.
    pub fn induced(g: &ZoneState, vars: BTreeSet<VarId>) -> Self {
        let inside = |v: VarId| v.is_zero() || vars.contains(&v);
        let edges = g
            .finite_edges()
            .filter(|&(s, t, _)| inside(s) && inside(t))
            .map(|(s, t, b)| ((s, t), b))
            .collect();
        Subgraph {
            names: g.names().clone(),
            vars,
            edges,
        }
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn name(&self, v: VarId) -> &str {
        if v.is_zero() {
            "Z0"
        } else {
            &self.names[v.0 - 1]
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.edges.is_empty()
    }

    pub fn edge_ids(&self) -> BTreeSet<(VarId, VarId)> {
        self.edges.keys().copied().collect()
    }

    /// The kept inequalities as a (not necessarily closed) Zone over the
    /// full universe.
    pub fn to_zone(&self) -> ZoneState {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|(&(s, t), &b)| (s.0, t.0, b))
            .collect();
        ZoneState::from_edges(self.names.clone(), &edges)
    }

    /// Header line with sorted variable names, then one inequality per line.
    pub fn dump(&self) -> String {
        let mut names: Vec<&str> = self.vars.iter().map(|&v| self.name(v)).collect();
        names.sort_unstable();
        let mut out = String::from("vars:");
        for n in names {
            out.push(' ');
            out.push_str(n);
        }
        out.push('\n');
        for (&(s, t), b) in &self.edges {
            let _ = writeln!(out, "{} - {} <= {}", self.name(s), self.name(t), b);
        }
        out
    }
}

impl fmt::Debug for Subgraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Which slice of the state to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MinMethod {
    /// Full state, no minimization.
    Fs,
    /// Connected components.
    Cc,
    /// Node neighbors.
    Nn,
    /// Minimal neighbors.
    Mn,
}

impl MinMethod {
    pub const ALL: [MinMethod; 4] = [MinMethod::Fs, MinMethod::Cc, MinMethod::Nn, MinMethod::Mn];

    pub fn as_str(self) -> &'static str {
        match self {
            MinMethod::Fs => "FS",
            MinMethod::Cc => "CC",
            MinMethod::Nn => "NN",
            MinMethod::Mn => "MN",
        }
    }

    /// The technique this one is measured against in reduction reports.
    pub fn predecessor(self) -> Option<MinMethod> {
        match self {
            MinMethod::Fs => None,
            MinMethod::Cc => Some(MinMethod::Fs),
            MinMethod::Nn => Some(MinMethod::Cc),
            MinMethod::Mn => Some(MinMethod::Nn),
        }
    }
}

impl fmt::Display for MinMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MinMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fs" => Ok(MinMethod::Fs),
            "cc" => Ok(MinMethod::Cc),
            "nn" => Ok(MinMethod::Nn),
            "mn" => Ok(MinMethod::Mn),
            other => Err(format!(
                "unknown method `{other}` (expected fs, cc, nn or mn)"
            )),
        }
    }
}

/// Node-neighbor flavour: reachability for arbitrary states, the local
/// neighborhood for fully closed ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeighborVariant {
    Arbitrary,
    Closed,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MinimizeError {
    #[error("the set of updated variables is empty")]
    EmptyVariableSet,
    #[error("the set of updated variables contains Z0")]
    ZeroInVariableSet,
    #[error("the set of updated edges is empty")]
    EmptyEdgeSet,
    #[error("variable index {0} is outside the state")]
    UnknownVariable(usize),
}

fn check_dv(g: &ZoneState, dv: &BTreeSet<VarId>) -> Result<(), MinimizeError> {
    if dv.is_empty() {
        return Err(MinimizeError::EmptyVariableSet);
    }
    if dv.contains(&VarId::ZERO) {
        return Err(MinimizeError::ZeroInVariableSet);
    }
    if let Some(v) = dv.iter().find(|v| v.0 >= g.dim()) {
        return Err(MinimizeError::UnknownVariable(v.0));
    }
    Ok(())
}

/// Drops every edge `(s, t)` between non-zero variables with
/// `(s, t) >= (s, Z0) + (Z0, t)`. Edges touching `Z0` are kept.
///
/// The test only reads `Z0` entries, which are never written, so the result
/// does not depend on iteration order.
pub fn remove_spurious(z: &ZoneState) -> ZoneState {
    if z.is_bottom() {
        return ZoneState::bottom(z.names().clone());
    }
    let zero = VarId::ZERO;
    let candidates: Vec<VarId> = z
        .vars()
        .filter(|&v| z.get(v, zero).is_finite() || z.get(zero, v).is_finite())
        .collect();
    let mut g = z.clone();
    let mut removed = false;
    for &s in &candidates {
        for &t in &candidates {
            let direct = z.get(s, t);
            if s != t && direct.is_finite() && direct >= z.get(s, zero) + z.get(zero, t) {
                g.set_entry(s, t, Bound::Top);
                removed = true;
            }
        }
    }
    if !removed {
        return z.clone();
    }
    g
}

/// Undirected components of `dv`, with `Z0` marked visited up front so no
/// path runs through it.
pub fn connected_components(
    g: &ZoneState,
    dv: &BTreeSet<VarId>,
) -> Result<Subgraph, MinimizeError> {
    check_dv(g, dv)?;
    if g.is_bottom() {
        return Ok(Subgraph::empty(g.names().clone()));
    }
    let n = g.dim();
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut stack: Vec<usize> = Vec::new();
    for v in dv {
        if !visited[v.0] {
            visited[v.0] = true;
            stack.push(v.0);
        }
    }
    while let Some(u) = stack.pop() {
        for w in 0..n {
            if visited[w] {
                continue;
            }
            if g.get(VarId(u), VarId(w)).is_finite() || g.get(VarId(w), VarId(u)).is_finite() {
                visited[w] = true;
                stack.push(w);
            }
        }
    }
    let vars: BTreeSet<VarId> = (1..n).filter(|&i| visited[i]).map(VarId).collect();
    let edges = g
        .finite_edges()
        .filter(|(s, t, _)| vars.contains(s) || vars.contains(t))
        .map(|(s, t, b)| ((s, t), b))
        .collect();
    Ok(Subgraph {
        names: g.names().clone(),
        vars,
        edges,
    })
}

/// Directed reachability from `start`; `Z0` is a sink and never expanded.
fn reachable(g: &ZoneState, start: VarId, forward: bool) -> BTreeSet<VarId> {
    let n = g.dim();
    let mut seen = vec![false; n];
    seen[start.0] = true;
    let mut stack = vec![start.0];
    while let Some(u) = stack.pop() {
        if u == 0 {
            continue;
        }
        for w in 0..n {
            if seen[w] {
                continue;
            }
            let edge = if forward {
                g.get(VarId(u), VarId(w))
            } else {
                g.get(VarId(w), VarId(u))
            };
            // Z0 has no outgoing edges during traversal, so it is never a
            // predecessor.
            if edge.is_finite() && (forward || w != 0) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (1..n).filter(|&i| seen[i]).map(VarId).collect()
}

/// Node neighbors for arbitrary (possibly unclosed) states: forward and
/// backward reachable variables of each `v ∈ dv`.
pub fn node_neighbors_arbitrary(
    g: &ZoneState,
    dv: &BTreeSet<VarId>,
) -> Result<Subgraph, MinimizeError> {
    check_dv(g, dv)?;
    if g.is_bottom() {
        return Ok(Subgraph::empty(g.names().clone()));
    }
    let mut vars = BTreeSet::new();
    for &v in dv {
        vars.extend(reachable(g, v, true));
        vars.extend(reachable(g, v, false));
    }
    Ok(Subgraph::induced(g, vars))
}

/// Node neighbors for fully closed states: the direct neighborhood of each
/// `v ∈ dv`, linear in the dimension per variable.
pub fn node_neighbors_closed(
    g: &ZoneState,
    dv: &BTreeSet<VarId>,
) -> Result<Subgraph, MinimizeError> {
    check_dv(g, dv)?;
    if g.is_bottom() {
        return Ok(Subgraph::empty(g.names().clone()));
    }
    let mut vars = dv.clone();
    for &v in dv {
        for u in g.vars() {
            if u != v && (g.get(v, u).is_finite() || g.get(u, v).is_finite()) {
                vars.insert(u);
            }
        }
    }
    Ok(Subgraph::induced(g, vars))
}

pub fn node_neighbors(
    g: &ZoneState,
    dv: &BTreeSet<VarId>,
    variant: NeighborVariant,
) -> Result<Subgraph, MinimizeError> {
    match variant {
        NeighborVariant::Arbitrary => node_neighbors_arbitrary(g, dv),
        NeighborVariant::Closed => node_neighbors_closed(g, dv),
    }
}

/// Variables whose constraints an updated-edge set can actually change:
/// the non-zero endpoint of interval edges, the source of relational ones.
pub fn changed_sources(de: &BTreeSet<(VarId, VarId)>) -> BTreeSet<VarId> {
    de.iter()
        .map(|&(s, t)| if s.is_zero() { t } else { s })
        .collect()
}

/// Minimal neighbors: node neighbors of [`changed_sources`].
pub fn min_neighbors(
    g: &ZoneState,
    de: &BTreeSet<(VarId, VarId)>,
    variant: NeighborVariant,
) -> Result<Subgraph, MinimizeError> {
    if de.is_empty() {
        return Err(MinimizeError::EmptyEdgeSet);
    }
    node_neighbors(g, &changed_sources(de), variant)
}

/// The whole state as a subgraph, over every program variable.
pub fn full_state(g: &ZoneState) -> Subgraph {
    if g.is_bottom() {
        return Subgraph::empty(g.names().clone());
    }
    Subgraph::induced(g, g.vars().collect())
}

/// Spurious-edge removal followed by the chosen slicing method. The
/// neighbor variant follows the closed flag of `z`.
pub fn min_changed_set(
    z: &ZoneState,
    delta: &DeltaSet,
    method: MinMethod,
) -> Result<Subgraph, MinimizeError> {
    let variant = if z.is_closed() {
        NeighborVariant::Closed
    } else {
        NeighborVariant::Arbitrary
    };
    min_changed_set_with(z, delta, method, variant)
}

pub fn min_changed_set_with(
    z: &ZoneState,
    delta: &DeltaSet,
    method: MinMethod,
    variant: NeighborVariant,
) -> Result<Subgraph, MinimizeError> {
    if z.is_bottom() {
        return Ok(Subgraph::empty(z.names().clone()));
    }
    let source = match variant {
        NeighborVariant::Closed => z.close(),
        NeighborVariant::Arbitrary => z.clone(),
    };
    let g = remove_spurious(&source);
    match method {
        MinMethod::Fs => Ok(full_state(&g)),
        MinMethod::Cc => connected_components(&g, &delta.dv),
        MinMethod::Nn => node_neighbors(&g, &delta.dv, variant),
        MinMethod::Mn => min_neighbors(&g, &delta.de, variant),
    }
}

/// General redundancy elimination on a closed state: an edge is dropped
/// when the remaining graph still implies it through some other path.
/// Edges between program variables are examined before edges touching `Z0`,
/// so every spurious edge is dropped here as well.
pub fn remove_redundant(z: &ZoneState) -> ZoneState {
    let z = z.close();
    if z.is_bottom() {
        return z;
    }
    let n = z.dim();
    let mut w: Vec<Bound> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                Bound::Top
            } else {
                z.get(VarId(k / n), VarId(k % n))
            }
        })
        .collect();
    let (inner, outer): (Vec<_>, Vec<_>) = z
        .finite_edges()
        .partition(|(s, t, _)| !s.is_zero() && !t.is_zero());
    for (s, t, b) in inner.into_iter().chain(outer) {
        w[s.0 * n + t.0] = Bound::Top;
        if shortest_path(&w, n, s.0, t.0) > Bound::Finite(b) {
            w[s.0 * n + t.0] = Bound::Finite(b);
        }
    }
    let mut out = ZoneState::top(z.names().clone());
    for s in 0..n {
        for t in 0..n {
            if let Bound::Finite(b) = w[s * n + t] {
                out.set_entry(VarId(s), VarId(t), Bound::Finite(b));
            }
        }
    }
    out
}

/// Bellman-Ford distance from `src` to `dst`; the graph has no negative
/// cycles because it is a subgraph of a consistent closed state.
fn shortest_path(w: &[Bound], n: usize, src: usize, dst: usize) -> Bound {
    let mut dist = vec![Bound::Top; n];
    dist[src] = Bound::ZERO;
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            if !dist[u].is_finite() {
                continue;
            }
            for v in 0..n {
                let cand = dist[u] + w[u * n + v];
                if cand < dist[v] {
                    dist[v] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist[dst]
}

#[cfg(test)]
mod tests {
    use super::*;

    const X: VarId = VarId(1);
    const W: VarId = VarId(2);
    const Y: VarId = VarId(3);
    const Z0: VarId = VarId::ZERO;

    fn names() -> Arc<[String]> {
        ["x", "w", "y"].iter().map(|s| s.to_string()).collect()
    }

    fn fig1b() -> ZoneState {
        ZoneState::from_edges(names(), &[(1, 0, 0), (0, 1, 0), (2, 1, 2), (3, 1, 0)])
    }

    fn set(vs: &[VarId]) -> BTreeSet<VarId> {
        vs.iter().copied().collect()
    }

    fn ids(sg: &Subgraph) -> Vec<(VarId, VarId)> {
        sg.edges.keys().copied().collect()
    }

    #[test]
    fn spurious_edges_of_closed_example() {
        let c = fig1b().close();
        let g = remove_spurious(&c);
        let before: BTreeSet<_> = c.finite_edges().map(|(s, t, _)| (s, t)).collect();
        let after: BTreeSet<_> = g.finite_edges().map(|(s, t, _)| (s, t)).collect();
        let removed: Vec<_> = before.difference(&after).copied().collect();
        assert_eq!(removed, vec![(W, X), (Y, X)]);
        assert_eq!(g.finite_edges().count(), 4);
    }

    #[test]
    fn spurious_removal_without_zero_edges_is_identity() {
        let z = ZoneState::from_edges(names(), &[(1, 2, 3), (2, 3, -1)]).close();
        assert_eq!(remove_spurious(&z), z);
    }

    #[test]
    fn all_methods_isolate_y_on_closed_example() {
        let c = fig1b().close();
        let delta = DeltaSet {
            dv: set(&[Y]),
            de: BTreeSet::from([(Y, X)]),
        };
        for method in [MinMethod::Cc, MinMethod::Nn, MinMethod::Mn] {
            let s = min_changed_set(&c, &delta, method).unwrap();
            assert_eq!(s.dump(), "vars: y\ny - Z0 <= 0\n", "{method}");
        }
        let fs = min_changed_set(&c, &delta, MinMethod::Fs).unwrap();
        assert_eq!(fs.edges.len(), 4);
        assert_eq!(fs.vars, set(&[X, W, Y]));
    }

    #[test]
    fn arbitrary_neighbors_on_unclosed_example() {
        let g = remove_spurious(&fig1b());
        let s = node_neighbors_arbitrary(&g, &set(&[Y])).unwrap();
        assert_eq!(s.vars, set(&[X, Y]));
        assert_eq!(ids(&s), vec![(Z0, X), (X, Z0), (Y, X)]);
    }

    #[test]
    fn isolated_variable() {
        let z = ZoneState::from_edges(names(), &[(1, 0, 3)]).close();
        let g = remove_spurious(&z);
        let s = node_neighbors_arbitrary(&g, &set(&[Y])).unwrap();
        assert_eq!(s.vars, set(&[Y]));
        assert!(s.edges.is_empty());
        let cc = connected_components(&g, &set(&[X])).unwrap();
        assert_eq!(cc.vars, set(&[X]));
        assert_eq!(ids(&cc), vec![(X, Z0)]);
    }

    #[test]
    fn neighbors_of_everything_is_everything() {
        let g = remove_spurious(&fig1b().close());
        let s = node_neighbors_closed(&g, &set(&[X, W, Y])).unwrap();
        assert_eq!(s, full_state(&g));
    }

    #[test]
    fn interval_update_keeps_the_variable() {
        assert_eq!(changed_sources(&[(Z0, W)].into_iter().collect()), set(&[W]));
        assert_eq!(changed_sources(&[(W, Z0)].into_iter().collect()), set(&[W]));
        assert_eq!(changed_sources(&[(W, X)].into_iter().collect()), set(&[W]));
    }

    #[test]
    fn contract_violations() {
        let g = remove_spurious(&fig1b().close());
        assert_eq!(
            connected_components(&g, &BTreeSet::new()).unwrap_err(),
            MinimizeError::EmptyVariableSet
        );
        assert_eq!(
            node_neighbors_closed(&g, &set(&[Z0])).unwrap_err(),
            MinimizeError::ZeroInVariableSet
        );
        assert_eq!(
            min_neighbors(&g, &BTreeSet::new(), NeighborVariant::Closed).unwrap_err(),
            MinimizeError::EmptyEdgeSet
        );
    }

    #[test]
    fn bottom_gives_empty_slice() {
        let b = ZoneState::bottom(names());
        let mut delta = DeltaSet::default();
        delta.record_edge(Y, X);
        for m in MinMethod::ALL {
            assert!(min_changed_set(&b, &delta, m).unwrap().is_empty());
        }
        assert!(remove_spurious(&b).is_bottom());
    }

    #[test]
    fn redundant_chain_edge_is_dropped() {
        let names: Arc<[String]> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let z = ZoneState::from_edges(names, &[(1, 2, 1), (2, 3, 1), (1, 3, 2)]).close();
        let r = remove_redundant(&z);
        assert_eq!(r.dump(), "a - b <= 1\nb - c <= 1\n");
    }

    #[test]
    fn redundant_matches_spurious_on_example() {
        let c = fig1b().close();
        assert_eq!(remove_redundant(&c).dump(), remove_spurious(&c).dump());
    }

    #[test]
    fn subgraph_dump_sorts_names() {
        let g = remove_spurious(&fig1b().close());
        let s = full_state(&g);
        assert!(s.dump().starts_with("vars: w x y\n"));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("mn".parse::<MinMethod>().unwrap(), MinMethod::Mn);
        assert_eq!("FS".parse::<MinMethod>().unwrap(), MinMethod::Fs);
        assert!("xx".parse::<MinMethod>().is_err());
    }
}
