use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use zone_slicer::domains::interval::IntervalState;
use zone_slicer::domains::predicate::PredicateState;
use zone_slicer::engine::{run_fixpoint, slices_for, step_delta, Analysis, Domain};
use zone_slicer::harness::report::{compare_corpus, TargetDomain, DEFAULT_BOX};
use zone_slicer::harness::smt::emit_smtlib;
use zone_slicer::harness::{analyze_path, corpus_files, load_cfg, HarnessError};
use zone_slicer::{MinMethod, NeighborVariant, ZoneState};

#[derive(Parser)]
#[command(
    name = "zone-slicer",
    version,
    about = "Zone analysis with minimal changed-set slicing"
)]
struct Cli {
    /// Print one line per worklist step to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Zones,
    Intervals,
    Predicates,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Intervals,
    Predicates,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fixpoint and list the recorded program points.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "zones")]
        domain: DomainArg,
        /// Print the state after every program point.
        #[arg(long)]
        dump: bool,
    },
    /// Print the Zone slice of every program point that has one.
    Slice {
        file: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: MinMethod,
        /// Use reachability-based neighbors.
        #[arg(long, conflicts_with = "closed")]
        arbitrary: bool,
        /// Use the direct neighborhood of the closed state (default).
        #[arg(long)]
        closed: bool,
    },
    /// Compare Zone slices against a non-relational domain over a corpus.
    Compare {
        dir: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        against: Vec<TargetArg>,
        #[arg(long, value_parser = parse_method, value_delimiter = ',', default_value = "fs,cc,nn,mn")]
        methods: Vec<MinMethod>,
        #[arg(long = "box", default_value_t = DEFAULT_BOX, value_parser = clap::value_parser!(i64).range(1..))]
        bound: i64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write SMT-LIB2 scripts of every program point's states.
    ExportSmt {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_method(s: &str) -> Result<MinMethod, String> {
    s.parse()
}

fn print_trace(trace: &[String], enabled: bool) {
    if enabled {
        for line in trace {
            eprintln!("{line}");
        }
    }
}

fn analyze<D: Domain>(file: &Path, dump: bool, trace: bool) -> Result<()> {
    let (name, cfg) = load_cfg(file)?;
    let a: Analysis<D> =
        run_fixpoint(&cfg).with_context(|| format!("analyzing {}", file.display()))?;
    print_trace(&a.trace, trace);
    println!(
        "{name}: {} blocks, {} widening points, {} points, {} visits",
        cfg.blocks.len(),
        cfg.widen_points.len(),
        a.points.len(),
        a.visits
    );
    for p in &a.points {
        println!("# {}", p.label);
        if dump {
            print!("{}", p.post.dump());
        }
    }
    Ok(())
}

fn slice(file: &Path, method: MinMethod, variant: NeighborVariant, trace: bool) -> Result<()> {
    let (_, cfg) = load_cfg(file)?;
    let a: Analysis<ZoneState> = run_fixpoint(&cfg)?;
    print_trace(&a.trace, trace);
    for p in &a.points {
        let delta = step_delta(p)?;
        let slices = slices_for(&p.post, &delta, variant)?;
        if let Some(s) = slices.get(method) {
            println!("# {}", p.label);
            print!("{}", s.dump());
        }
    }
    Ok(())
}

fn compare(
    dir: &Path,
    against: &[TargetArg],
    methods: &[MinMethod],
    bound: i64,
    report: Option<&Path>,
    trace: bool,
) -> Result<()> {
    let files = corpus_files(dir)?;
    if files.is_empty() {
        eprintln!("warning: {}", HarnessError::EmptyCorpus(dir.to_path_buf()));
    }
    let programs = files
        .iter()
        .map(|f| analyze_path(f))
        .collect::<Result<Vec<_>, _>>()?;
    for p in &programs {
        print_trace(&p.zones.trace, trace);
    }
    let targets: Vec<TargetDomain> = against
        .iter()
        .map(|t| match t {
            TargetArg::Intervals => TargetDomain::Intervals,
            TargetArg::Predicates => TargetDomain::Predicates,
        })
        .collect();
    let suite = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    let run = compare_corpus(&suite, &programs, methods, &targets, bound);
    print!("{}", run.report.render_table());
    if let Some(path) = report {
        std::fs::write(path, run.report.to_json() + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn export_smt(file: &Path, out: &Path) -> Result<()> {
    let p = analyze_path(file)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let write = |suffix: String, text: &dyn Fn(&Path) -> std::io::Result<()>| -> Result<()> {
        let path = out.join(format!("{}_{suffix}.smt2", p.name));
        text(&path).with_context(|| format!("writing {}", path.display()))
    };
    for (i, step) in p.steps.iter().enumerate() {
        let zone: &ZoneState = &p.zones.points[i].post;
        write(format!("p{i:03}_zones"), &|path| {
            emit_smtlib(&zone.close(), path)
        })?;
        for method in MinMethod::ALL {
            if let Some(s) = step.slices.get(method) {
                let tag = method.as_str().to_ascii_lowercase();
                write(format!("p{i:03}_{tag}"), &|path| emit_smtlib(s, path))?;
            }
        }
        let itv: &IntervalState = &p.intervals.points[i].post;
        write(format!("p{i:03}_intervals"), &|path| emit_smtlib(itv, path))?;
        let pred: &PredicateState = &p.predicates.points[i].post;
        write(format!("p{i:03}_predicates"), &|path| {
            emit_smtlib(pred, path)
        })?;
    }
    println!(
        "wrote {} program points to {}",
        p.steps.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let trace = cli.trace;
    let result = match cli.command {
        Command::Analyze { file, domain, dump } => match domain {
            DomainArg::Zones => analyze::<ZoneState>(&file, dump, trace),
            DomainArg::Intervals => analyze::<IntervalState>(&file, dump, trace),
            DomainArg::Predicates => analyze::<PredicateState>(&file, dump, trace),
        },
        Command::Slice {
            file,
            method,
            arbitrary,
            ..
        } => {
            let variant = if arbitrary {
                NeighborVariant::Arbitrary
            } else {
                NeighborVariant::Closed
            };
            slice(&file, method, variant, trace)
        }
        Command::Compare {
            dir,
            against,
            methods,
            bound,
            report,
        } => compare(&dir, &against, &methods, bound, report.as_deref(), trace),
        Command::ExportSmt { file, out } => export_smt(&file, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
