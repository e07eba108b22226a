//! Per-point comparisons and the aggregate report table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::classify::{classify_pair, Outcome, Target};
use super::ProgramAnalysis;
use crate::engine::PointKind;
use crate::minimizer::{MinMethod, Subgraph};

/// Box half-width used when none is given.
pub const DEFAULT_BOX: i64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetDomain {
    Intervals,
    Predicates,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub more: usize,
    pub equal: usize,
    pub less: usize,
    pub incomparable: usize,
}

impl OutcomeCounts {
    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::MorePrecise => self.more += 1,
            Outcome::Equal => self.equal += 1,
            Outcome::LessPrecise => self.less += 1,
            Outcome::Incomparable => self.incomparable += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.more + self.equal + self.less + self.incomparable
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: MinMethod,
    pub var_reduction_pct: f64,
    pub edge_reduction_pct: f64,
    pub vs_intervals: Option<OutcomeCounts>,
    pub vs_predicates: Option<OutcomeCounts>,
    pub skipped: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub rows: Vec<ReportRow>,
}

/// One classified (or skipped) comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub program: String,
    pub point: usize,
    pub method: MinMethod,
    pub target: TargetDomain,
    /// `None` when the point was skipped.
    pub outcome: Option<Outcome>,
}

/// The slice of `method` at `point`, or `None` when the point is skipped.
pub fn comparable_slice(p: &ProgramAnalysis, point: usize, method: MinMethod) -> Option<&Subgraph> {
    if p.zones.points[point].post.is_bottom() {
        return None;
    }
    p.steps[point]
        .slices
        .get(method)
        .filter(|s| !s.vars.is_empty())
}

pub fn compare_point(
    p: &ProgramAnalysis,
    point: usize,
    method: MinMethod,
    target: TargetDomain,
    bound: i64,
) -> Option<Outcome> {
    let slice = comparable_slice(p, point, method)?;
    let other = match target {
        TargetDomain::Intervals => Target::Intervals(&p.intervals.points[point].post),
        TargetDomain::Predicates => Target::Predicates(&p.predicates.points[point].post),
    };
    classify_pair(slice, other, bound).ok()
}

/// Statement groups: the two assume edges out of one branch form one group.
fn statement_groups(p: &ProgramAnalysis) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, point) in p.zones.points.iter().enumerate() {
        let key = match point.kind {
            PointKind::Edge { edge } => (1, p.zones.cfg.edges[edge].from),
            _ => (0, i),
        };
        groups.entry(key).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Average per-statement reduction of `method` against its predecessor for
/// one program, as (vars %, edges %); `None` without comparable statements.
pub fn program_reduction(p: &ProgramAnalysis, method: MinMethod) -> (Option<f64>, Option<f64>) {
    let Some(pred) = method.predecessor() else {
        return (None, None);
    };
    let mut var_pcts = Vec::new();
    let mut edge_pcts = Vec::new();
    for group in statement_groups(p) {
        let mut sizes: Option<[usize; 4]> = None;
        for &i in &group {
            let (Some(a), Some(b)) = (comparable_slice(p, i, pred), comparable_slice(p, i, method))
            else {
                continue;
            };
            let s = sizes.get_or_insert([0; 4]);
            s[0] = s[0].max(a.vars.len());
            s[1] = s[1].max(b.vars.len());
            s[2] = s[2].max(a.edges.len());
            s[3] = s[3].max(b.edges.len());
        }
        let Some([pv, mv, pe, me]) = sizes else {
            continue;
        };
        if pv > 0 {
            var_pcts.push(100.0 * (pv as f64 - mv as f64) / pv as f64);
        }
        if pe > 0 {
            edge_pcts.push(100.0 * (pe as f64 - me as f64) / pe as f64);
        }
    }
    (mean(&var_pcts), mean(&edge_pcts))
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Every comparison of the corpus plus the aggregated table.
#[derive(Clone, Debug)]
pub struct CorpusComparison {
    pub report: Report,
    pub comparisons: Vec<Comparison>,
}

pub fn compare_corpus(
    suite: &str,
    programs: &[ProgramAnalysis],
    methods: &[MinMethod],
    targets: &[TargetDomain],
    bound: i64,
) -> CorpusComparison {
    let mut rows = Vec::new();
    let mut comparisons = Vec::new();
    for &method in methods {
        let start = Instant::now();
        let mut counts: BTreeMap<TargetDomain, OutcomeCounts> = targets
            .iter()
            .map(|&t| (t, OutcomeCounts::default()))
            .collect();
        let mut skipped = 0;
        for p in programs {
            for point in 0..p.zones.points.len() {
                if comparable_slice(p, point, method).is_none() {
                    skipped += 1;
                }
                for &target in targets {
                    let outcome = compare_point(p, point, method, target, bound);
                    if let Some(o) = outcome {
                        counts.get_mut(&target).unwrap().add(o);
                    }
                    comparisons.push(Comparison {
                        program: p.name.clone(),
                        point,
                        method,
                        target,
                        outcome,
                    });
                }
            }
        }
        let reductions: Vec<(Option<f64>, Option<f64>)> = programs
            .iter()
            .map(|p| program_reduction(p, method))
            .collect();
        let vars: Vec<f64> = reductions.iter().filter_map(|r| r.0).collect();
        let edges: Vec<f64> = reductions.iter().filter_map(|r| r.1).collect();
        rows.push(ReportRow {
            method,
            var_reduction_pct: mean(&vars).unwrap_or(0.0),
            edge_reduction_pct: mean(&edges).unwrap_or(0.0),
            vs_intervals: counts.get(&TargetDomain::Intervals).copied(),
            vs_predicates: counts.get(&TargetDomain::Predicates).copied(),
            skipped,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    CorpusComparison {
        report: Report {
            suite: suite.to_string(),
            rows,
        },
        comparisons,
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with timings zeroed, for byte-level comparisons.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        for row in &mut r.rows {
            row.seconds = 0.0;
        }
        r
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite: {}", self.suite);
        let _ = writeln!(
            out,
            "{:<6} {:>7} {:>7}  {:<22} {:<22} {:>7} {:>8}",
            "method", "dV%", "dE%", "intervals m/e/l/i", "predicates m/e/l/i", "skipped", "seconds"
        );
        let fmt = |c: &Option<OutcomeCounts>| match c {
            Some(c) => format!("{}/{}/{}/{}", c.more, c.equal, c.less, c.incomparable),
            None => "-".to_string(),
        };
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<6} {:>7.2} {:>7.2}  {:<22} {:<22} {:>7} {:>8.3}",
                row.method.as_str(),
                row.var_reduction_pct,
                row.edge_reduction_pct,
                fmt(&row.vs_intervals),
                fmt(&row.vs_predicates),
                row.skipped,
                row.seconds
            );
        }
        out
    }
}
