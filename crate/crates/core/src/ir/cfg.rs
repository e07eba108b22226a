//! Control-flow graph with assume-labelled branch edges.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::parser::{Program, SrcStmt};
use super::{Guard, Rhs, Stmt};

pub type BlockId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Then,
    Else,
    Fall,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: BlockId,
    pub to: BlockId,
    pub kind: EdgeKind,
    /// Present exactly on `Then`/`Else` edges.
    pub assume: Option<Guard>,
}

#[derive(Clone, Debug)]
pub struct Cfg {
    pub vars: Arc<[String]>,
    pub blocks: Vec<Vec<Stmt>>,
    pub edges: Vec<Edge>,
    /// Block 0.
    pub entry: BlockId,
    /// Targets of back edges.
    pub widen_points: BTreeSet<BlockId>,
}

impl Cfg {
    /// Indices into `edges`.
    pub fn succs(&self, b: BlockId) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].from == b)
    }

    pub fn preds(&self, b: BlockId) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].to == b)
    }

    /// Reverse postorder from the entry.
    pub fn reverse_postorder(&self) -> Vec<BlockId> {
        let mut seen = vec![false; self.blocks.len()];
        let mut post = Vec::new();
        let mut stack = vec![(self.entry, false)];
        while let Some((b, done)) = stack.pop() {
            if done {
                post.push(b);
                continue;
            }
            if seen[b] {
                continue;
            }
            seen[b] = true;
            stack.push((b, true));
            let succs: Vec<_> = self.succs(b).map(|e| self.edges[e].to).collect();
            for s in succs.into_iter().rev() {
                if !seen[s] {
                    stack.push((s, false));
                }
            }
        }
        post.reverse();
        post
    }

    /// `dom[b]` holds every block dominating `b`.
    pub fn dominators(&self) -> Vec<BTreeSet<BlockId>> {
        let n = self.blocks.len();
        let all: BTreeSet<BlockId> = (0..n).collect();
        let mut dom = vec![all; n];
        dom[self.entry] = BTreeSet::from([self.entry]);
        let order = self.reverse_postorder();
        let mut changed = true;
        while changed {
            changed = false;
            for &b in order.iter().filter(|&&b| b != self.entry) {
                let mut next: Option<BTreeSet<BlockId>> = None;
                for e in self.preds(b) {
                    let p = &dom[self.edges[e].from];
                    next = Some(match next {
                        None => p.clone(),
                        Some(acc) => acc.intersection(p).copied().collect(),
                    });
                }
                let mut next = next.unwrap_or_default();
                next.insert(b);
                if next != dom[b] {
                    dom[b] = next;
                    changed = true;
                }
            }
        }
        dom
    }
}

struct Builder {
    blocks: Vec<Vec<Stmt>>,
    edges: Vec<Edge>,
}

impl Builder {
    fn new_block(&mut self) -> BlockId {
        self.blocks.push(Vec::new());
        self.blocks.len() - 1
    }

    fn edge(&mut self, from: BlockId, to: BlockId, kind: EdgeKind, assume: Option<Guard>) {
        self.edges.push(Edge {
            from,
            to,
            kind,
            assume,
        });
    }

    fn branch(&mut self, from: BlockId, cond: Guard, on_true: BlockId, on_false: BlockId) {
        self.edge(from, on_true, EdgeKind::Then, Some(cond));
        self.edge(from, on_false, EdgeKind::Else, Some(cond.negate()));
    }

    /// Emits `body` starting in `cur`; returns the block control falls out of.
    fn emit(&mut self, mut cur: BlockId, body: &[SrcStmt]) -> BlockId {
        for stmt in body {
            match stmt {
                SrcStmt::Assign(v, rhs) => self.blocks[cur].push(Stmt::Assign(*v, *rhs)),
                SrcStmt::Havoc(v) => self.blocks[cur].push(Stmt::Assign(*v, Rhs::Havoc)),
                SrcStmt::Assert(g) => self.blocks[cur].push(Stmt::Assert(*g)),
                SrcStmt::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    let then_entry = self.new_block();
                    let then_exit = self.emit(then_entry, then_body);
                    let join;
                    match else_body {
                        Some(else_body) => {
                            let else_entry = self.new_block();
                            let else_exit = self.emit(else_entry, else_body);
                            join = self.new_block();
                            self.branch(cur, *cond, then_entry, else_entry);
                            self.edge(else_exit, join, EdgeKind::Fall, None);
                        }
                        None => {
                            join = self.new_block();
                            self.branch(cur, *cond, then_entry, join);
                        }
                    }
                    self.edge(then_exit, join, EdgeKind::Fall, None);
                    cur = join;
                }
                SrcStmt::While { cond, body } => {
                    let head = self.new_block();
                    self.edge(cur, head, EdgeKind::Fall, None);
                    let body_entry = self.new_block();
                    let body_exit = self.emit(body_entry, body);
                    self.edge(body_exit, head, EdgeKind::Fall, None);
                    let exit = self.new_block();
                    self.branch(head, *cond, body_entry, exit);
                    cur = exit;
                }
            }
        }
        cur
    }

    /// Drops empty non-entry blocks whose only exit is one unlabelled edge.
    fn contract(&mut self) {
        loop {
            let victim = (1..self.blocks.len()).find(|&b| {
                let outs: Vec<_> = self.edges.iter().filter(|e| e.from == b).collect();
                self.blocks[b].is_empty()
                    && outs.len() == 1
                    && outs[0].kind == EdgeKind::Fall
                    && outs[0].to != b
            });
            let Some(b) = victim else { break };
            let target = self.edges.iter().find(|e| e.from == b).unwrap().to;
            self.edges.retain(|e| e.from != b);
            for e in &mut self.edges {
                if e.to == b {
                    e.to = target;
                }
            }
            self.blocks.remove(b);
            for e in &mut self.edges {
                if e.from > b {
                    e.from -= 1;
                }
                if e.to > b {
                    e.to -= 1;
                }
            }
        }
    }
}

pub fn build_cfg(program: &Program) -> Cfg {
    let mut b = Builder {
        blocks: vec![Vec::new()],
        edges: Vec::new(),
    };
    b.emit(0, &program.body);
    b.contract();
    let mut cfg = Cfg {
        vars: program.vars.clone(),
        blocks: b.blocks,
        edges: b.edges,
        entry: 0,
        widen_points: BTreeSet::new(),
    };
    let dom = cfg.dominators();
    cfg.widen_points = cfg
        .edges
        .iter()
        .filter(|e| dom[e.from].contains(&e.to))
        .map(|e| e.to)
        .collect();
    cfg
}
