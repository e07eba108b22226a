//! Worklist fixpoint over a CFG, generic in the abstract domain, with
//! per-step deltas and slices for Zones.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::bound::Bound;
use crate::domains::interval::IntervalState;
use crate::domains::predicate::PredicateState;
use crate::domains::DomainError;
use crate::ir::{BlockId, Cfg, GuardForm, Pretty, Stmt};
use crate::minimizer::{
    min_changed_set_with, remove_spurious, DeltaSet, MinMethod, MinimizeError, NeighborVariant,
    Subgraph,
};
use crate::zone::{ZoneError, ZoneState};

/// Visits per block before the engine gives up.
pub const VISIT_BUDGET: usize = 1000;

/// Visits to a widening point that still use plain join.
pub const WIDEN_DELAY: usize = 2;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Zone(#[from] ZoneError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Minimize(#[from] MinimizeError),
    #[error("block {block} exceeded the budget of {budget} visits")]
    BudgetExceeded { block: BlockId, budget: usize },
}

/// The operations the engine needs from an abstract domain.
pub trait Domain: Clone {
    const NAME: &'static str;
    fn top(names: Arc<[String]>) -> Self;
    fn bottom(names: Arc<[String]>) -> Self;
    fn is_bottom(&self) -> bool;
    fn transfer(&self, stmt: &Stmt) -> Result<Self, EngineError>;
    fn join(&self, other: &Self) -> Result<Self, EngineError>;
    fn widen(&self, next: &Self) -> Result<Self, EngineError>;
    fn leq(&self, other: &Self) -> Result<bool, EngineError>;
    fn dump(&self) -> String;
}

/// Zone transfer returning the syntactic write set of the step.
pub fn transfer_with_delta(z: &ZoneState, stmt: &Stmt) -> Result<(ZoneState, DeltaSet), ZoneError> {
    let z = z.close();
    if z.is_bottom() {
        return Ok((z, DeltaSet::default()));
    }
    match stmt {
        Stmt::Assign(v, rhs) => z.assign(*v, rhs.to_linear_form()),
        Stmt::Assume(guard) => match guard.constraints() {
            GuardForm::Unrefinable => Ok((z, DeltaSet::default())),
            GuardForm::Infeasible => {
                Ok((ZoneState::bottom(z.names().clone()), DeltaSet::default()))
            }
            GuardForm::Conjunction(ks) => {
                let mut state = z;
                let mut delta = DeltaSet::default();
                for k in ks {
                    let (next, d) = state.meet_edge(k.s, k.t, Bound::Finite(k.c))?;
                    state = next;
                    delta.extend(&d);
                    if state.is_bottom() {
                        return Ok((state, DeltaSet::default()));
                    }
                }
                Ok((state, delta))
            }
        },
        Stmt::Assert(_) | Stmt::Nop => Ok((z, DeltaSet::default())),
    }
}

impl Domain for ZoneState {
    const NAME: &'static str = "zones";

    fn top(names: Arc<[String]>) -> Self {
        ZoneState::top(names)
    }

    fn bottom(names: Arc<[String]>) -> Self {
        ZoneState::bottom(names)
    }

    fn is_bottom(&self) -> bool {
        ZoneState::is_bottom(self)
    }

    fn transfer(&self, stmt: &Stmt) -> Result<Self, EngineError> {
        Ok(transfer_with_delta(self, stmt)?.0)
    }

    fn join(&self, other: &Self) -> Result<Self, EngineError> {
        Ok(ZoneState::join(self, other)?)
    }

    fn widen(&self, next: &Self) -> Result<Self, EngineError> {
        Ok(ZoneState::widen(self, next)?)
    }

    fn leq(&self, other: &Self) -> Result<bool, EngineError> {
        Ok(ZoneState::leq(self, other)?)
    }

    fn dump(&self) -> String {
        self.close().dump()
    }
}

impl Domain for IntervalState {
    const NAME: &'static str = "intervals";

    fn top(names: Arc<[String]>) -> Self {
        IntervalState::top(names)
    }

    fn bottom(names: Arc<[String]>) -> Self {
        IntervalState::bottom(names)
    }

    fn is_bottom(&self) -> bool {
        IntervalState::is_bottom(self)
    }

    fn transfer(&self, stmt: &Stmt) -> Result<Self, EngineError> {
        Ok(IntervalState::transfer(self, stmt))
    }

    fn join(&self, other: &Self) -> Result<Self, EngineError> {
        Ok(IntervalState::join(self, other)?)
    }

    fn widen(&self, next: &Self) -> Result<Self, EngineError> {
        Ok(IntervalState::widen(self, next)?)
    }

    fn leq(&self, other: &Self) -> Result<bool, EngineError> {
        Ok(IntervalState::leq(self, other))
    }

    fn dump(&self) -> String {
        IntervalState::dump(self)
    }
}

impl Domain for PredicateState {
    const NAME: &'static str = "predicates";

    fn top(names: Arc<[String]>) -> Self {
        PredicateState::top(names)
    }

    fn bottom(names: Arc<[String]>) -> Self {
        PredicateState::bottom(names)
    }

    fn is_bottom(&self) -> bool {
        PredicateState::is_bottom(self)
    }

    fn transfer(&self, stmt: &Stmt) -> Result<Self, EngineError> {
        Ok(PredicateState::transfer(self, stmt))
    }

    fn join(&self, other: &Self) -> Result<Self, EngineError> {
        Ok(PredicateState::join(self, other)?)
    }

    /// The lattice is finite, so join already terminates.
    fn widen(&self, next: &Self) -> Result<Self, EngineError> {
        Ok(PredicateState::join(self, next)?)
    }

    fn leq(&self, other: &Self) -> Result<bool, EngineError> {
        Ok(PredicateState::leq(self, other))
    }

    fn dump(&self) -> String {
        PredicateState::dump(self)
    }
}

/// Where a recorded step happens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    /// Statement `index` of `block`.
    Stmt { block: BlockId, index: usize },
    /// The assume on CFG edge `edge`.
    Edge { edge: usize },
    /// Block entry with two or more predecessors (join, and widen at loop heads).
    Merge { block: BlockId },
}

/// One transfer, merge, or widen step: `pre` is N1, `post` is N2.
#[derive(Clone, Debug)]
pub struct PointRecord<D> {
    pub kind: PointKind,
    pub label: String,
    pub step: Stmt,
    pub pre: D,
    pub post: D,
}

#[derive(Clone, Debug)]
pub struct Analysis<D> {
    pub cfg: Cfg,
    /// Fixpoint state at each block entry.
    pub block_in: Vec<D>,
    pub points: Vec<PointRecord<D>>,
    pub visits: usize,
    pub trace: Vec<String>,
}

fn out_state<D: Domain>(cfg: &Cfg, input: &D, b: BlockId) -> Result<D, EngineError> {
    let mut s = input.clone();
    for stmt in &cfg.blocks[b] {
        s = s.transfer(stmt)?;
    }
    Ok(s)
}

fn edge_state<D: Domain>(cfg: &Cfg, out: &D, e: usize) -> Result<D, EngineError> {
    match &cfg.edges[e].assume {
        Some(g) => out.transfer(&Stmt::Assume(*g)),
        None => Ok(out.clone()),
    }
}

/// Join of the entry state (for the entry block) and all incoming edge states.
fn incoming<D: Domain>(cfg: &Cfg, outs: &[Option<D>], b: BlockId) -> Result<D, EngineError> {
    let mut acc = if b == cfg.entry {
        D::top(cfg.vars.clone())
    } else {
        D::bottom(cfg.vars.clone())
    };
    for e in cfg.preds(b) {
        if let Some(out) = &outs[cfg.edges[e].from] {
            acc = acc.join(&edge_state(cfg, out, e)?)?;
        }
    }
    Ok(acc)
}

/// Classic worklist iteration in reverse postorder; widening points switch
/// from join to widen after `WIDEN_DELAY` visits.
pub fn run_fixpoint<D: Domain>(cfg: &Cfg) -> Result<Analysis<D>, EngineError> {
    let n = cfg.blocks.len();
    let order = cfg.reverse_postorder();
    let mut rank = vec![usize::MAX; n];
    for (i, &b) in order.iter().enumerate() {
        rank[b] = i;
    }
    let mut inputs: Vec<Option<D>> = vec![None; n];
    let mut outs: Vec<Option<D>> = vec![None; n];
    let mut visits = vec![0usize; n];
    let mut trace = Vec::new();
    let mut worklist: BTreeSet<(usize, BlockId)> = BTreeSet::from([(rank[cfg.entry], cfg.entry)]);
    while let Some((_, b)) = worklist.pop_first() {
        visits[b] += 1;
        if visits[b] > VISIT_BUDGET {
            return Err(EngineError::BudgetExceeded {
                block: b,
                budget: VISIT_BUDGET,
            });
        }
        let fresh = incoming(cfg, &outs, b)?;
        let next = match &inputs[b] {
            None => fresh,
            Some(old) if cfg.widen_points.contains(&b) && visits[b] > WIDEN_DELAY => {
                old.widen(&old.join(&fresh)?)?
            }
            Some(old) => old.join(&fresh)?,
        };
        let changed = match &inputs[b] {
            None => true,
            Some(old) => !next.leq(old)?,
        };
        trace.push(format!(
            "visit block={b} domain={} changed={changed}",
            D::NAME
        ));
        if changed {
            outs[b] = Some(out_state(cfg, &next, b)?);
            inputs[b] = Some(next);
            for e in cfg.succs(b) {
                let t = cfg.edges[e].to;
                worklist.insert((rank[t], t));
            }
        }
    }
    let bottom = D::bottom(cfg.vars.clone());
    let block_in: Vec<D> = inputs
        .into_iter()
        .map(|s| s.unwrap_or_else(|| bottom.clone()))
        .collect();
    let points = annotate(cfg, &order, &block_in)?;
    Ok(Analysis {
        cfg: cfg.clone(),
        block_in,
        points,
        visits: visits.iter().sum(),
        trace,
    })
}

/// Replays the fixpoint once to list every step with its N1 and N2.
fn annotate<D: Domain>(
    cfg: &Cfg,
    order: &[BlockId],
    block_in: &[D],
) -> Result<Vec<PointRecord<D>>, EngineError> {
    let names = &cfg.vars;
    let mut outs: Vec<Option<D>> = vec![None; cfg.blocks.len()];
    for &b in order {
        outs[b] = Some(out_state(cfg, &block_in[b], b)?);
    }
    let mut points = Vec::new();
    for &b in order {
        let preds: Vec<usize> = cfg.preds(b).collect();
        if preds.len() >= 2 {
            let first = preds
                .iter()
                .min_by_key(|&&e| order.iter().position(|&x| x == cfg.edges[e].from))
                .copied()
                .unwrap();
            let from = outs[cfg.edges[first].from].as_ref().unwrap();
            points.push(PointRecord {
                kind: PointKind::Merge { block: b },
                label: format!("b{b}:merge"),
                step: Stmt::Nop,
                pre: edge_state(cfg, from, first)?,
                post: block_in[b].clone(),
            });
        }
        let mut state = block_in[b].clone();
        for (index, stmt) in cfg.blocks[b].iter().enumerate() {
            let next = state.transfer(stmt)?;
            points.push(PointRecord {
                kind: PointKind::Stmt { block: b, index },
                label: format!("b{b}:s{index} {}", Pretty { names, item: stmt }),
                step: *stmt,
                pre: state,
                post: next.clone(),
            });
            state = next;
        }
        for e in cfg.succs(b) {
            if let Some(g) = cfg.edges[e].assume {
                let step = Stmt::Assume(g);
                points.push(PointRecord {
                    kind: PointKind::Edge { edge: e },
                    label: format!(
                        "b{b}->b{} {}",
                        cfg.edges[e].to,
                        Pretty { names, item: &step }
                    ),
                    step,
                    pre: state.clone(),
                    post: state.transfer(&step)?,
                });
            }
        }
    }
    Ok(points)
}

/// Number of blocks whose recorded input is not above the join of its
/// incoming edge states; zero at a fixpoint.
pub fn fixpoint_violations<D: Domain>(analysis: &Analysis<D>) -> Result<usize, EngineError> {
    let cfg = &analysis.cfg;
    let outs: Vec<Option<D>> = (0..cfg.blocks.len())
        .map(|b| out_state(cfg, &analysis.block_in[b], b).map(Some))
        .collect::<Result<_, _>>()?;
    let mut bad = 0;
    for b in 0..cfg.blocks.len() {
        if !incoming(cfg, &outs, b)?.leq(&analysis.block_in[b])? {
            bad += 1;
        }
    }
    Ok(bad)
}

/// The four slices of one step; CC/NN/MN are absent when nothing was updated.
#[derive(Clone, Debug)]
pub struct Slices {
    pub fs: Subgraph,
    pub cc: Option<Subgraph>,
    pub nn: Option<Subgraph>,
    pub mn: Option<Subgraph>,
}

impl Slices {
    pub fn get(&self, method: MinMethod) -> Option<&Subgraph> {
        match method {
            MinMethod::Fs => Some(&self.fs),
            MinMethod::Cc => self.cc.as_ref(),
            MinMethod::Nn => self.nn.as_ref(),
            MinMethod::Mn => self.mn.as_ref(),
        }
    }
}

/// A Zone step with its delta and slices of the closed N2.
#[derive(Clone, Debug)]
pub struct ZoneStep {
    pub delta: DeltaSet,
    pub slices: Slices,
}

pub fn step_delta(point: &PointRecord<ZoneState>) -> Result<DeltaSet, EngineError> {
    Ok(match point.kind {
        PointKind::Merge { .. } => DeltaSet::between(
            &remove_spurious(&point.pre.close()),
            &remove_spurious(&point.post.close()),
        ),
        _ => transfer_with_delta(&point.pre, &point.step)?.1,
    })
}

pub fn slices_for(
    post: &ZoneState,
    delta: &DeltaSet,
    variant: NeighborVariant,
) -> Result<Slices, EngineError> {
    let post = match variant {
        NeighborVariant::Closed => post.close(),
        NeighborVariant::Arbitrary => post.clone(),
    };
    let fs = min_changed_set_with(&post, delta, MinMethod::Fs, variant)?;
    if delta.dv.is_empty() || post.is_bottom() {
        let empty = || Some(Subgraph::empty(post.names().clone()));
        return Ok(match post.is_bottom() {
            true => Slices {
                fs,
                cc: empty(),
                nn: empty(),
                mn: empty(),
            },
            false => Slices {
                fs,
                cc: None,
                nn: None,
                mn: None,
            },
        });
    }
    let cc = min_changed_set_with(&post, delta, MinMethod::Cc, variant)?;
    let nn = min_changed_set_with(&post, delta, MinMethod::Nn, variant)?;
    let mn = if delta.de.is_empty() {
        Subgraph::empty(post.names().clone())
    } else {
        min_changed_set_with(&post, delta, MinMethod::Mn, variant)?
    };
    Ok(Slices {
        fs,
        cc: Some(cc),
        nn: Some(nn),
        mn: Some(mn),
    })
}

/// Deltas and closed-variant slices for every recorded Zone step.
pub fn zone_steps(analysis: &Analysis<ZoneState>) -> Result<Vec<ZoneStep>, EngineError> {
    analysis
        .points
        .iter()
        .map(|p| {
            let delta = step_delta(p)?;
            let slices = slices_for(&p.post, &delta, NeighborVariant::Closed)?;
            Ok(ZoneStep { delta, slices })
        })
        .collect()
}
