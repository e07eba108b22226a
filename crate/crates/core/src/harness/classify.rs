//! Precision comparison of a Zone slice against a non-relational state on
//! the slice's variables, inside the box `[-B, B]`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::Bound;
use crate::domains::interval::{IntervalState, Itv};
use crate::domains::predicate::PredicateState;
use crate::minimizer::Subgraph;
use crate::zone::{VarId, ZoneError, ZoneState};

/// How the Zone slice relates to the other domain on the slice variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    /// Strictly fewer concrete points.
    MorePrecise,
    Equal,
    LessPrecise,
    Incomparable,
}

impl Outcome {
    fn from_inclusions(zone_in_other: bool, other_in_zone: bool) -> Outcome {
        match (zone_in_other, other_in_zone) {
            (true, true) => Outcome::Equal,
            (true, false) => Outcome::MorePrecise,
            (false, true) => Outcome::LessPrecise,
            (false, false) => Outcome::Incomparable,
        }
    }

    /// The outcome with the roles of the two states swapped.
    pub fn flip(self) -> Outcome {
        match self {
            Outcome::MorePrecise => Outcome::LessPrecise,
            Outcome::LessPrecise => Outcome::MorePrecise,
            o => o,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::MorePrecise => "more",
            Outcome::Equal => "equal",
            Outcome::LessPrecise => "less",
            Outcome::Incomparable => "incomparable",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("the slice has no variables")]
    EmptySlice,
    #[error(transparent)]
    Zone(#[from] ZoneError),
}

/// The non-relational state a slice is compared against.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Intervals(&'a IntervalState),
    Predicates(&'a PredicateState),
}

impl Target<'_> {
    /// Disjoint ascending integer ranges of `v` clipped to `[-bound, bound]`;
    /// `None` when the state is Bottom.
    fn axis(&self, v: VarId, bound: i64) -> Option<Vec<(i64, i64)>> {
        let clip = |itv: Itv| {
            let lo = itv.lo.unwrap_or(-bound).max(-bound);
            let hi = itv.hi.unwrap_or(bound).min(bound);
            (lo <= hi).then_some((lo, hi))
        };
        match self {
            Target::Intervals(s) => Some(clip(s.get(v)?).into_iter().collect()),
            Target::Predicates(s) => {
                Some(s.get(v)?.ranges().into_iter().filter_map(clip).collect())
            }
        }
    }

    fn max_abs_constant(&self, vars: &BTreeSet<VarId>) -> i64 {
        let itvs: Vec<Itv> = match self {
            Target::Intervals(s) => vars.iter().filter_map(|&v| s.get(v)).collect(),
            Target::Predicates(s) => vars
                .iter()
                .filter_map(|&v| s.get(v))
                .flat_map(|set| set.ranges())
                .collect(),
        };
        itvs.iter()
            .flat_map(|i| [i.lo, i.hi])
            .flatten()
            .map(i64::abs)
            .max()
            .unwrap_or(0)
    }
}

/// Smallest box for which every constant of both sides lies strictly inside.
pub fn required_box(slice: &Subgraph, other: Target<'_>) -> i64 {
    let zone_max = slice.edges.values().map(|b| b.abs()).max().unwrap_or(0);
    1 + zone_max.max(other.max_abs_constant(&slice.vars))
}

/// The slice as a Zone over its own variables only, in `vars` order.
pub fn project(slice: &Subgraph) -> (ZoneState, Vec<VarId>) {
    let vars: Vec<VarId> = slice.vars.iter().copied().collect();
    let names: Arc<[String]> = vars.iter().map(|&v| slice.name(v).to_string()).collect();
    let local = |v: VarId| {
        if v.is_zero() {
            Some(0)
        } else {
            vars.iter().position(|&u| u == v).map(|i| i + 1)
        }
    };
    let edges: Vec<(usize, usize, i64)> = slice
        .edges
        .iter()
        .filter_map(|(&(s, t), &b)| Some((local(s)?, local(t)?, b)))
        .collect();
    (ZoneState::from_edges(names, &edges), vars)
}

/// Exact decision of the bounded-enumeration comparison without
/// enumerating. `bound` is raised to [`required_box`] when too small.
///
/// Integer DBMs are closed under projection: after adding the box and
/// closing, each variable ranges over a full interval, so the slice fits in
/// the product iff every projection fits in one range of its axis. The
/// product fits in the slice iff every edge holds at the product's extreme
/// corner.
pub fn classify_pair(
    slice: &Subgraph,
    other: Target<'_>,
    bound: i64,
) -> Result<Outcome, ClassifyError> {
    if slice.vars.is_empty() {
        return Err(ClassifyError::EmptySlice);
    }
    let bound = bound.max(required_box(slice, other));
    let (zone, vars) = project(slice);
    let mut boxed = zone;
    for i in 1..=vars.len() {
        boxed = boxed
            .meet_edge(VarId(i), VarId::ZERO, Bound::Finite(bound))?
            .0;
        boxed = boxed
            .meet_edge(VarId::ZERO, VarId(i), Bound::Finite(bound))?
            .0;
    }
    let boxed = boxed.close();
    let axes: Option<Vec<Vec<(i64, i64)>>> = vars.iter().map(|&v| other.axis(v, bound)).collect();
    let axes = axes.filter(|a| a.iter().all(|r| !r.is_empty()));

    let zone_in_other = boxed.is_bottom()
        || axes.as_ref().is_some_and(|axes| {
            (1..=vars.len()).all(|i| {
                let lo = -boxed.get(VarId::ZERO, VarId(i)).finite().unwrap();
                let hi = boxed.get(VarId(i), VarId::ZERO).finite().unwrap();
                axes[i - 1].iter().any(|&(a, b)| a <= lo && hi <= b)
            })
        });
    let other_in_zone = match &axes {
        None => true,
        Some(axes) => {
            let local = |v: VarId| vars.iter().position(|&u| u == v).unwrap();
            slice.edges.iter().all(|(&(s, t), &b)| {
                let max_s = if s.is_zero() {
                    0
                } else {
                    axes[local(s)].last().unwrap().1
                };
                let min_t = if t.is_zero() { 0 } else { axes[local(t)][0].0 };
                max_s - min_t <= b
            })
        }
    };
    Ok(Outcome::from_inclusions(zone_in_other, other_in_zone))
}

/// Reference comparison by enumerating both concretizations in the box.
pub fn classify_pair_enumerated(
    slice: &Subgraph,
    other: Target<'_>,
    bound: i64,
) -> Result<Outcome, ClassifyError> {
    if slice.vars.is_empty() {
        return Err(ClassifyError::EmptySlice);
    }
    let bound = bound.max(required_box(slice, other));
    let (zone, vars) = project(slice);
    let zone_points = zone.enumerate_box(bound)?;
    let other_points: BTreeSet<Vec<i64>> = match other {
        Target::Intervals(s) => interval_gamma(s, &vars, bound),
        Target::Predicates(s) => s.gamma(&vars, bound),
    };
    Ok(Outcome::from_inclusions(
        zone_points.is_subset(&other_points),
        other_points.is_subset(&zone_points),
    ))
}

fn interval_gamma(s: &IntervalState, vars: &[VarId], bound: i64) -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    if s.is_bottom() {
        return out;
    }
    let axes: Vec<Vec<i64>> = vars
        .iter()
        .map(|&v| {
            let itv = s.get(v).unwrap();
            (-bound..=bound).filter(|&x| itv.contains(x)).collect()
        })
        .collect();
    let mut point = Vec::new();
    product(&axes, &mut point, &mut out);
    out
}

fn product(axes: &[Vec<i64>], point: &mut Vec<i64>, out: &mut BTreeSet<Vec<i64>>) {
    if point.len() == axes.len() {
        out.insert(point.clone());
        return;
    }
    for &x in &axes[point.len()] {
        point.push(x);
        product(axes, point, out);
        point.pop();
    }
}
