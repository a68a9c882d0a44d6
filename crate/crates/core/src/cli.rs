//! Command-line entry points.
//!
//! Exit codes: 0 on success, 1 on configuration or runtime errors, 2 when
//! `verify` finds a property violation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::distribution::BidDistribution;
use crate::interim::{interim_utility, win_probs};
use crate::model::{validate_assumptions, BidPair, TypePoint};
use crate::properties::{hd_full_enumeration, lemma_sweep, SweepChecks};
use crate::scenario::{Instance, Scenario};
use crate::sim::run_simulation;
use crate::solver::format_real;
use crate::strategy::{parse_level, MonotoneStrategy};

/// Environment variable setting the number of worker threads.
pub const WORKERS_ENV: &str = "SFPA_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "sfpa", version, about = "Simultaneous first-price auctions with complementary goods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate monotone best replies and report the profile reached.
    Solve {
        scenario: PathBuf,
        /// Directory for CSV outputs; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the order properties and render the H-D case table.
    Verify {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo play under solved or supplied strategies.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
        /// Strategy CSV for bidder 1 (requires --s2).
        #[arg(long, requires = "s2")]
        s1: Option<PathBuf>,
        #[arg(long, requires = "s1")]
        s2: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every monotone equilibrium of a tiny instance.
    Enumerate {
        scenario: PathBuf,
        /// Maximum number of monotone strategies per bidder.
        #[arg(long, default_value_t = 20_000)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Win probabilities and interim utility of one bid at one type.
    Probe {
        scenario: PathBuf,
        #[arg(long)]
        b1: String,
        #[arg(long)]
        b2: String,
        #[arg(long)]
        x1: f64,
        #[arg(long)]
        x2: f64,
        /// Opponent strategy CSV; defaults to a constant opponent bid.
        #[arg(long)]
        opponent: Option<PathBuf>,
        #[arg(long, default_value = "0")]
        opp_b1: String,
        #[arg(long, default_value = "0")]
        opp_b2: String,
    },
}

/// Where CSV outputs go: files in a directory, or stdout with a header line
/// per section.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn new(dir: Option<PathBuf>) -> Result<Self, String> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| format!("cannot create {}: {e}", d.display()))?;
        }
        Ok(Self { dir })
    }

    fn emit<F>(&self, name: &str, write: F) -> Result<(), String>
    where
        F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf).map_err(|e| e.to_string())?;
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, buf).map_err(|e| format!("cannot write {}: {e}", path.display()))
            }
            None => {
                let mut out = io::stdout().lock();
                match writeln!(out, "# {name}").and_then(|_| out.write_all(&buf)) {
                    // reader went away, e.g. piped into `head`
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                    r => r.map_err(|e| e.to_string()),
                }
            }
        }
    }
}

enum Failure {
    Config(String),
    Violation(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Config(s)
    }
}

fn load(path: &Path) -> Result<(Scenario, Instance<f64>), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let scenario = Scenario::from_toml_str(&text).map_err(|e| e.to_string())?;
    let instance = scenario.build::<f64>().map_err(|e| e.to_string())?;
    Ok((scenario, instance))
}

fn read_strategy(path: &Path, inst: &Instance<f64>) -> Result<MonotoneStrategy, String> {
    let file = fs::File::open(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    MonotoneStrategy::read_csv(file, inst.grid().m(), *inst.bids()).map_err(|e| format!("{}: {e}", path.display()))
}

fn configure_workers() -> Result<(), String> {
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        let n: usize = value
            .parse()
            .map_err(|_| format!("{WORKERS_ENV} must be a positive integer, got `{value}`"))?;
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn solve(scenario: &Scenario, inst: &Instance<f64>) -> Result<crate::solver::SolveResult<f64>, String> {
    let start = inst.initial_strategy(scenario.solver.init);
    inst.game
        .iterate_best_response(start.clone(), start, scenario.solver.max_iter)
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_workers()?;
    match cli.command {
        Command::Solve { scenario, out } => {
            let (scn, inst) = load(&scenario)?;
            let sink = Sink::new(out)?;
            let result = solve(&scn, &inst)?;
            sink.emit("summary.csv", |w| result.write_summary_csv(w))?;
            sink.emit("strategies.csv", |w| result.write_strategies_csv(&inst.game, w))?;
            sink.emit("strategy1.csv", |w| result.profile.0.write_csv(w).map_err(io::Error::other))?;
            sink.emit("strategy2.csv", |w| result.profile.1.write_csv(w).map_err(io::Error::other))?;
            Ok(())
        }
        Command::Verify { scenario, out } => {
            let (scn, inst) = load(&scenario)?;
            let sink = Sink::new(out)?;
            let assumptions = validate_assumptions(inst.spec(), 101).map_err(|e| e.to_string())?;
            let table = hd_full_enumeration(inst.bids());
            let sweep = lemma_sweep(inst.spec(), inst.grid(), inst.bids(), scn.sweep.strategies, scn.seed, SweepChecks::ALL);
            sink.emit("table1.csv", |w| table.write_csv(w))?;
            sink.emit("table1.txt", |w| w.write_all(table.render_text().as_bytes()))?;
            sink.emit("properties.csv", |w| sweep.write_counts_csv(w))?;
            sink.emit("witnesses.csv", |w| sweep.write_witnesses_csv(w))?;
            sink.emit("assumptions.csv", |w| {
                writeln!(w, "assumption,x1,x2,value")?;
                for v in &assumptions.violations {
                    writeln!(w, "{},{},{},{}", v.assumption, format_real(v.lower.x1), format_real(v.lower.x2), format_real(v.lower_value))?;
                }
                Ok(())
            })?;
            let mut problems = Vec::new();
            if !table.negatives.is_empty() {
                problems.push(format!("{} negative H-D values", table.negatives.len()));
            }
            if !table.matches_case_values() || !table.undefined_cells_absent() {
                problems.push("H-D case table does not match the closed-form cases".to_string());
            }
            for (name, t) in [("WSC", sweep.wsc), ("WQS", sweep.wqs), ("IneqW", sweep.ineq_w)] {
                if !t.passed() {
                    problems.push(format!("{name}: {} violations over {} strategies", t.violations, t.failing_strategies));
                }
            }
            if problems.is_empty() {
                Ok(())
            } else {
                Err(Failure::Violation(problems.join("; ")))
            }
        }
        Command::Simulate { scenario, draws, s1, s2, out } => {
            let (scn, inst) = load(&scenario)?;
            if draws == 0 {
                return Err(Failure::Config("--draws must be at least 1".into()));
            }
            let sink = Sink::new(out)?;
            let (p1, p2) = match (s1, s2) {
                (Some(a), Some(b)) => (read_strategy(&a, &inst)?, read_strategy(&b, &inst)?),
                _ => solve(&scn, &inst)?.profile,
            };
            let stats = run_simulation(&inst.game, &p1, &p2, draws, scn.seed).map_err(|e| e.to_string())?;
            sink.emit("outcomes.csv", |w| stats.write_outcomes_csv(w))?;
            sink.emit("stats.csv", |w| stats.write_summary_csv(w))?;
            Ok(())
        }
        Command::Enumerate { scenario, cap, out } => {
            let (_, inst) = load(&scenario)?;
            let sink = Sink::new(out)?;
            let list = inst.game.exhaustive_equilibria(cap).map_err(|e| e.to_string())?;
            sink.emit("equilibria.csv", |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["profile", "bidder", "x1_index", "x2_index", "b1", "b2"])?;
                let n = inst.bids().n();
                for (p, (a, b)) in list.profiles.iter().enumerate() {
                    for (bidder, s) in [(1, a), (2, b)] {
                        for (k, bid) in s.assignment().iter().enumerate() {
                            let (i, j) = inst.grid().coords(k);
                            c.write_record([
                                p.to_string(),
                                bidder.to_string(),
                                i.to_string(),
                                j.to_string(),
                                format!("{}/{n}", bid.b1),
                                format!("{}/{n}", bid.b2),
                            ])?;
                        }
                    }
                }
                c.flush()
            })?;
            sink.emit("enumeration.csv", |w| {
                writeln!(w, "equilibria,strategies_searched,truncated")?;
                writeln!(w, "{},{},{}", list.profiles.len(), list.searched, list.truncated)
            })?;
            Ok(())
        }
        Command::Probe {
            scenario,
            b1,
            b2,
            x1,
            x2,
            opponent,
            opp_b1,
            opp_b2,
        } => {
            let (_, inst) = load(&scenario)?;
            let bids = *inst.bids();
            let level = |s: &str, name: &str| parse_level(s, &bids).map_err(|e| format!("--{name}: {e}"));
            let b = BidPair::new(level(&b1, "b1")?, level(&b2, "b2")?);
            let x = TypePoint::new(x1, x2).map_err(|e| e.to_string())?;
            let mu = match opponent {
                Some(path) => inst.game.induced(&read_strategy(&path, &inst)?).map_err(|e| e.to_string())?,
                None => {
                    let opp = BidPair::new(level(&opp_b1, "opp-b1")?, level(&opp_b2, "opp-b2")?);
                    BidDistribution::point_mass(bids, opp).map_err(|e| e.to_string())?
                }
            };
            let p = win_probs(&mu, b).map_err(|e| e.to_string())?;
            let v = interim_utility(b, &x, &mu, inst.spec());
            let mut out = io::stdout().lock();
            let line = [
                bids.value::<f64>(b.b1),
                bids.value::<f64>(b.b2),
                p.q1,
                p.q2,
                *p.q3(),
                p.p1,
                p.p2,
                p.p3,
                v,
            ]
            .map(format_real)
            .join(",");
            writeln!(out, "b1,b2,q1,q2,q3,p1,p2,p3,V\n{line}").map_err(|e| e.to_string())?;
            Ok(())
        }
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            2
        }
    }
}
