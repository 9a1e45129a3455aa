use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use itemsynth::formats::{
    read_constraints, read_database, read_edges, read_privacy, with_header, write_constraints, write_database,
    write_findings, write_report,
};
use itemsynth::formulation::build_relaxed_lp;
use itemsynth::lp::SolverRegistry;
use itemsynth::miner::extract_constraints;
use itemsynth::oracle::{brute_force_optimum, database_from_counts, reduce_3coloring};
use itemsynth::pipeline::Pipeline;
use itemsynth::privacy::{audit, scrub_constraints, scrub_database, AuditConfig};
use itemsynth::rounding::{RoundingParams, RoundingRegistry};
use itemsynth::{deviation_report, Error, ItemSet};

use crate::cli::{Cli, Command, SolveArgs};

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: io::Error },
    Core(Error),
}

impl CliError {
    /// 2 for solver failures, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Solver(_) | Error::NotOptimal(_)) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Provenance lines for every emitted file and stdout payload.
struct Header(Vec<String>);

impl Header {
    fn new(args: &[String], seed: u64) -> Self {
        Header(vec![
            format!("itemsynth {}", env!("CARGO_PKG_VERSION")),
            format!("args: {}", args.join(" ")),
            format!("seed: {seed}"),
        ])
    }

    fn wrap(&self, body: &str) -> String {
        with_header(&self.0, body)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Fails unless the file's directory exists, so no work is wasted.
fn check_writable(path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if dir.is_dir() && !path.is_dir() {
        Ok(())
    } else {
        Err(CliError::Io {
            path: path.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "output location is not a writable file path"),
        })
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_ids(text: &str, t: usize) -> Result<ItemSet> {
    let ids = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("`{s}` is not an item id")))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ItemSet::from_items(t, ids)?)
}

fn pipeline<'a>(
    args: &SolveArgs,
    seed: u64,
    solvers: &'a SolverRegistry,
    methods: &'a RoundingRegistry,
) -> Result<Pipeline<'a>> {
    let mut p = Pipeline::new(solvers.get(&args.solver)?, methods.get(&args.method)?);
    p.solver_config.max_iterations = args.max_iterations;
    p.solver_config.validate()?;
    p.params = RoundingParams {
        seed,
        refine_rounds: args.refine_rounds,
        order: args.order.into(),
        objective: args.objective.into(),
    };
    p.purify = args.purify.into();
    Ok(p)
}

pub fn run(cli: &Cli, args: &[String]) -> Result<()> {
    let seed = cli.seed;
    let header = Header::new(args, seed);
    match &cli.command {
        Command::Mine { db, minsup, maxlen, out } => {
            let text = read(db)?;
            check_writable(out)?;
            let db = read_database(&text, None)?;
            let cs = extract_constraints(&db, *minsup, *maxlen)?;
            write(out, &header.wrap(&write_constraints(&cs)))
        }
        Command::Synth {
            constraints,
            out,
            report,
            dump_lp,
            solve,
        } => {
            let text = read(constraints)?;
            for p in [Some(out), report.as_ref(), dump_lp.as_ref()].into_iter().flatten() {
                check_writable(p)?;
            }
            let cs = read_constraints(&text)?;
            let solvers = SolverRegistry::default();
            let methods = RoundingRegistry::default();
            let p = pipeline(solve, seed, &solvers, &methods)?;
            if let Some(path) = dump_lp {
                write(path, &header.wrap(&build_relaxed_lp(&cs).dump()))?;
            }
            let s = p.synthesize(&cs)?;
            write(out, &header.wrap(&write_database(&s.database)))?;
            if let Some(path) = report {
                write(path, &header.wrap(&write_report(&s.report)))?;
            }
            println!(
                "n={} sum_abs_dev={} max_abs_dev={} lp_obj={}",
                s.report.n_actual, s.report.sum_abs_deviation, s.report.max_abs_deviation, s.lp.objective
            );
            Ok(())
        }
        Command::Verify { db, constraints } => {
            let db_text = read(db)?;
            let cs = read_constraints(&read(constraints)?)?;
            let db = read_database(&db_text, Some(cs.universe().size()))?;
            let r = deviation_report(&db, &cs, None)?;
            print!("{}", header.wrap(&write_report(&r)));
            Ok(())
        }
        Command::Oracle { constraints, model, out } => {
            let text = read(constraints)?;
            if let Some(p) = out {
                check_writable(p)?;
            }
            let cs = read_constraints(&text)?;
            let r = brute_force_optimum(&cs, (*model).into())?;
            let counts: Vec<String> = r.witness.iter().map(u64::to_string).collect();
            print!(
                "{}",
                header.wrap(&format!("optimum={}\ncounts={}\n", r.optimum, counts.join(" ")))
            );
            if let Some(p) = out {
                let db = database_from_counts(cs.universe(), &r.witness)?;
                write(p, &header.wrap(&write_database(&db)))?;
            }
            Ok(())
        }
        Command::Gen3col { edges, k0, out } => {
            let text = read(edges)?;
            check_writable(out)?;
            let g = read_edges(&text)?;
            let cs = reduce_3coloring(&g, *k0)?;
            write(out, &header.wrap(&write_constraints(&cs)))
        }
        Command::Audit {
            constraints,
            privacy,
            threshold,
            solve,
        } => {
            let cs = read_constraints(&read(constraints)?)?;
            let rules = read_privacy(&read(privacy)?, cs.universe().size())?;
            let solvers = SolverRegistry::default();
            let methods = RoundingRegistry::default();
            let config = AuditConfig {
                threshold: *threshold,
                pipeline: pipeline(solve, seed, &solvers, &methods)?,
            };
            let findings = audit(&cs, &rules, &config)?;
            print!("{}", header.wrap(&write_findings(&findings)));
            Ok(())
        }
        Command::ScrubDb { db, privacy, out } => {
            let db_text = read(db)?;
            let prv_text = read(privacy)?;
            check_writable(out)?;
            let db = read_database(&db_text, None)?;
            let rules = read_privacy(&prv_text, db.universe().size())?;
            let (scrubbed, drawn) = scrub_database(&db, &rules, seed)?;
            write(out, &header.wrap(&write_database(&scrubbed)))?;
            let mut log = String::from("itemset,support\n");
            for (r, s) in rules.iter().zip(&drawn) {
                log.push_str(&format!("{},{s}\n", r.itemset));
            }
            print!("{}", header.wrap(&log));
            Ok(())
        }
        Command::ScrubCst {
            constraints,
            sensitive,
            out,
        } => {
            let text = read(constraints)?;
            check_writable(out)?;
            let cs = read_constraints(&text)?;
            let sensitive = parse_ids(sensitive, cs.universe().size())?;
            let scrubbed = scrub_constraints(&cs, &sensitive, seed)?;
            write(out, &header.wrap(&write_constraints(&scrubbed)))
        }
    }
}
