//! Domain comparison, report aggregation, and SMT-LIB export.

pub mod classify;
pub mod report;
pub mod smt;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::domains::interval::IntervalState;
use crate::domains::predicate::PredicateState;
use crate::engine::{run_fixpoint, zone_steps, Analysis, EngineError, ZoneStep};
use crate::ir::{build_cfg, parse_program, Cfg, ParseError};
use crate::zone::ZoneState;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {cause}", path.display())]
    Io {
        path: PathBuf,
        cause: std::io::Error,
    },
    #[error("{}:{cause}", path.display())]
    Parse { path: PathBuf, cause: ParseError },
    #[error("{}: {cause}", path.display())]
    Engine { path: PathBuf, cause: EngineError },
    #[error("no .tir files in {}", .0.display())]
    EmptyCorpus(PathBuf),
}

/// Reads and parses one `.tir` file; the program name is the file stem.
pub fn load_cfg(path: &Path) -> Result<(String, Cfg), HarnessError> {
    let src = std::fs::read_to_string(path).map_err(|cause| HarnessError::Io {
        path: path.to_path_buf(),
        cause,
    })?;
    let program = parse_program(&src).map_err(|cause| HarnessError::Parse {
        path: path.to_path_buf(),
        cause,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok((name, build_cfg(&program)))
}

/// Sorted `.tir` files of a directory.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let io = |cause| HarnessError::Io {
        path: dir.to_path_buf(),
        cause,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "tir") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// All three analyses of one program over a shared CFG.
#[derive(Clone, Debug)]
pub struct ProgramAnalysis {
    pub name: String,
    pub zones: Analysis<ZoneState>,
    pub steps: Vec<ZoneStep>,
    pub intervals: Analysis<IntervalState>,
    pub predicates: Analysis<PredicateState>,
}

pub fn analyze_program(name: &str, cfg: &Cfg) -> Result<ProgramAnalysis, EngineError> {
    let zones = run_fixpoint::<ZoneState>(cfg)?;
    let steps = zone_steps(&zones)?;
    Ok(ProgramAnalysis {
        name: name.to_string(),
        steps,
        intervals: run_fixpoint(cfg)?,
        predicates: run_fixpoint(cfg)?,
        zones,
    })
}

pub fn analyze_path(path: &Path) -> Result<ProgramAnalysis, HarnessError> {
    let (name, cfg) = load_cfg(path)?;
    analyze_program(&name, &cfg).map_err(|cause| HarnessError::Engine {
        path: path.to_path_buf(),
        cause,
    })
}
