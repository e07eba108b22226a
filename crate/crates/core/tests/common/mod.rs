#![allow(dead_code)]

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use zone_slicer::{Bound, VarId, ZoneState};

pub fn names(n: usize) -> Arc<[String]> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// A random DBM over `n` variables with finite entries in `[-max, max]`
/// at the given density; not closed.
pub fn random_zone(rng: &mut ChaCha8Rng, n: usize, density: f64, max: i64) -> ZoneState {
    let mut edges = Vec::new();
    for s in 0..=n {
        for t in 0..=n {
            if s != t && rng.gen_bool(density) {
                edges.push((s, t, rng.gen_range(-max..=max)));
            }
        }
    }
    ZoneState::from_edges(names(n), &edges)
}

/// A random consistent closed zone; tries until closure is not Bottom.
pub fn random_closed(rng: &mut ChaCha8Rng, n: usize, max: i64) -> ZoneState {
    loop {
        let density = rng.gen_range(0.15..0.6);
        let z = random_zone(rng, n, density, max).close();
        if !z.is_bottom() {
            return z;
        }
    }
}

pub fn edge_ids(z: &ZoneState) -> Vec<(VarId, VarId)> {
    z.finite_edges().map(|(s, t, _)| (s, t)).collect()
}

/// Builds a zone keeping the finite entries of `z` accepted by `keep`.
pub fn filter_edges(z: &ZoneState, keep: impl Fn(VarId, VarId) -> bool) -> ZoneState {
    let edges: Vec<_> = z
        .finite_edges()
        .filter(|&(s, t, _)| keep(s, t))
        .map(|(s, t, b)| (s.0, t.0, b))
        .collect();
    ZoneState::from_edges(z.names().clone(), &edges)
}

pub fn bound_abs(b: Bound) -> i64 {
    b.finite().map_or(0, i64::abs)
}

/// Random `.tir` source over `nvars` variables with small constants.
pub fn random_program(rng: &mut ChaCha8Rng, nvars: usize) -> String {
    let mut out = String::new();
    for i in 0..nvars {
        let _ = writeln!(out, "int v{i};");
    }
    let count = rng.gen_range(3..8);
    for _ in 0..count {
        random_stmt(rng, nvars, 2, &mut out, 0);
    }
    out
}

fn var(rng: &mut ChaCha8Rng, nvars: usize) -> String {
    format!("v{}", rng.gen_range(0..nvars))
}

fn offset(rng: &mut ChaCha8Rng) -> String {
    let c: i64 = rng.gen_range(-3..=3);
    match c {
        0 => String::new(),
        c if c > 0 => format!(" + {c}"),
        c => format!(" - {}", -c),
    }
}

fn cond(rng: &mut ChaCha8Rng, nvars: usize) -> String {
    let rel = ["<=", "<", ">=", ">", "==", "!="][rng.gen_range(0..6)];
    let lhs = var(rng, nvars);
    let rhs = match rng.gen_range(0..3) {
        0 => rng.gen_range(-4..=4i64).to_string(),
        1 => var(rng, nvars),
        _ => format!("{}{}", var(rng, nvars), offset(rng)),
    };
    format!("{lhs} {rel} {rhs}")
}

fn random_stmt(rng: &mut ChaCha8Rng, nvars: usize, depth: usize, out: &mut String, indent: usize) {
    let pad = "    ".repeat(indent);
    let pick = if depth == 0 {
        rng.gen_range(0..5)
    } else {
        rng.gen_range(0..8)
    };
    match pick {
        0 | 1 => {
            let _ = writeln!(
                out,
                "{pad}{} := {};",
                var(rng, nvars),
                rng.gen_range(-4..=4)
            );
        }
        2 => {
            let _ = writeln!(
                out,
                "{pad}{} := {}{};",
                var(rng, nvars),
                var(rng, nvars),
                offset(rng)
            );
        }
        3 => {
            let v = var(rng, nvars);
            let _ = writeln!(out, "{pad}{v} := {v}{};", offset(rng));
        }
        4 => {
            if rng.gen_bool(0.5) {
                let _ = writeln!(out, "{pad}havoc {};", var(rng, nvars));
            } else {
                let _ = writeln!(out, "{pad}assert {};", cond(rng, nvars));
            }
        }
        5 | 6 => {
            let _ = writeln!(out, "{pad}if ({}) {{", cond(rng, nvars));
            for _ in 0..rng.gen_range(1..3) {
                random_stmt(rng, nvars, depth - 1, out, indent + 1);
            }
            if rng.gen_bool(0.5) {
                let _ = writeln!(out, "{pad}}} else {{");
                for _ in 0..rng.gen_range(1..3) {
                    random_stmt(rng, nvars, depth - 1, out, indent + 1);
                }
            }
            let _ = writeln!(out, "{pad}}}");
        }
        _ => {
            let v = var(rng, nvars);
            let _ = writeln!(out, "{pad}while ({v} < {}) {{", rng.gen_range(0..6));
            for _ in 0..rng.gen_range(0..2) {
                random_stmt(rng, nvars, depth - 1, out, indent + 1);
            }
            let _ = writeln!(out, "{pad}    {v} := {v} + 1;");
            let _ = writeln!(out, "{pad}}}");
        }
    }
}
