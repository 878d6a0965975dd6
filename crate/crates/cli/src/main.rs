//! `hyperorient` command-line tool.
//!
//! Exit status: 0 on success (and orientable, for `orient`), 2 when `orient`
//! finds the input non-orientable, 1 on any error.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperorient::experiment::{
    core_profile, edges_for_mean_degree, simulate_point, simulate_threshold, table1,
};
use hyperorient::random::{default_rejection_budget, sample_uniform_multi, sample_uniform_simple};
use hyperorient::*;

use output::{csv_line, Emitter};

#[derive(Parser)]
#[command(name = "hyperorient", version, about = "Orientability of random hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// CSV for tables; the plain text formats for hypergraphs and orientations.
    Csv,
    Json,
}

#[derive(Args, Clone, Copy)]
struct Triple {
    #[arg(long)]
    h: usize,
    #[arg(long)]
    w: usize,
    #[arg(long)]
    k: usize,
}

impl Triple {
    fn params(self) -> Result<OrientationParams> {
        Ok(OrientationParams::new(self.h, self.w, self.k)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random h-uniform hypergraph.
    Gen {
        #[arg(long)]
        h: usize,
        #[arg(long)]
        n: usize,
        /// Number of edges.
        #[arg(long, conflicts_with = "mu")]
        m: Option<usize>,
        /// Average degree; sets m = round(mu n / h).
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reject samples with repeated vertices or edges.
        #[arg(long)]
        simple: bool,
    },
    /// Peel a hypergraph to its (w,k+1)-core.
    Core {
        input: PathBuf,
        #[command(flatten)]
        t: Triple,
        /// Peel one random light ball at a time with this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the scaled process trace as CSV (needs --seed).
        #[arg(long, requires = "seed")]
        trace: Option<PathBuf>,
    },
    /// Decide (w,k)-orientability by max-flow.
    Orient {
        input: PathBuf,
        #[command(flatten)]
        t: Triple,
    },
    /// Size, density and core statistics of a hypergraph.
    Stats {
        input: PathBuf,
        #[command(flatten)]
        t: Triple,
    },
    /// Integrate the peeling fluid limit at one average degree.
    Ode {
        #[command(flatten)]
        t: Triple,
        #[arg(long)]
        mu: f64,
        /// Scale the default integration tolerances.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        /// Write the trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Predicted orientability threshold.
    Threshold {
        #[command(flatten)]
        t: Triple,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Orientable fraction of random hypergraphs, at one average degree or
    /// bisected on the 50% crossing.
    Simulate {
        #[command(flatten)]
        t: Triple,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, required_unless_present_all = ["lo", "hi"])]
        mu: Option<f64>,
        #[arg(long, requires = "hi")]
        lo: Option<f64>,
        #[arg(long, requires = "lo")]
        hi: Option<f64>,
        #[arg(long, default_value_t = 4)]
        iterations: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write every trial as CSV.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Empirical core size and density against the fluid limit.
    CoreProfile {
        #[command(flatten)]
        t: Triple,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Thresholds for the reference parameter rows.
    Table1 {
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
}

fn read_hypergraph(path: &Path) -> Result<Hypergraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Hypergraph::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    let out = Emitter::new(cli.out.format, cli.out.out.clone());
    match cli.command {
        Command::Gen { h, n, m, mu, seed, simple } => {
            let m = match (m, mu) {
                (Some(m), _) => m,
                (None, Some(mu)) => edges_for_mean_degree(n, h, mu),
                (None, None) => bail!("one of --m or --mu is required"),
            };
            let mut rng = RngSeed::new(seed).rng();
            let hg = if simple {
                let budget = default_rejection_budget((h * m) as u64);
                sample_uniform_simple(n, m, h, &mut rng, budget)?
            } else {
                sample_uniform_multi(n, m, h, &mut rng)?
            };
            out.emit("gen", &hg, || hg.to_text())?;
        }
        Command::Core { input, t, seed, trace } => {
            let p = t.params()?;
            let hg = read_hypergraph(&input)?;
            let mode = match seed {
                Some(s) => PeelMode::Randomized { seed: RngSeed::new(s) },
                None => PeelMode::Deterministic,
            };
            let (pr, tr) = rancore(&hg, &p, mode, trace.is_some())?;
            if let (Some(path), Some(tr)) = (trace, tr) {
                write_file(&path, &tr.to_csv())?;
            }
            out.emit("core", &pr, || pr.core.to_text())?;
        }
        Command::Orient { input, t } => {
            let p = t.params()?;
            let hg = read_hypergraph(&input)?;
            let outcome = orient(&hg, &p)?;
            out.emit("orient", &outcome, || match &outcome {
                OrientOutcome::Orientable(o) => o.to_text(),
                OrientOutcome::Dense(c) => c.to_text(),
                OrientOutcome::DegenerateEdge { edge, distinct, required } => {
                    format!("edge {edge} has {distinct} distinct vertices but needs {required} signs\n")
                }
            })?;
            return Ok(if outcome.is_orientable() { 0 } else { 2 });
        }
        Command::Stats { input, t } => {
            let p = t.params()?;
            let hg = read_hypergraph(&input)?;
            let s = output::Stats::compute(&hg, &p)?;
            out.emit("stats", &s, || s.to_csv())?;
        }
        Command::Ode { t, mu, tol, trajectory } => {
            let p = t.params()?;
            let params = OdeParams::new(p, mu).scale_tolerances(tol);
            let (traj, stats) = integrate(&params)?;
            if let Some(path) = trajectory {
                write_file(&path, &traj.to_csv())?;
            }
            out.emit("ode", &stats, || output::core_stats_csv(&p, mu, &stats))?;
        }
        Command::Threshold { t, tol } => {
            let r = find_threshold(t.params()?, tol)?;
            out.emit("threshold", &r, || {
                let mut s = String::from("h,w,k,mu_tilde,mu_hat,lo,hi,iterations\n");
                s += &csv_line(&[
                    t.h.to_string(),
                    t.w.to_string(),
                    t.k.to_string(),
                    r.mu_tilde.to_string(),
                    r.mu_hat.to_string(),
                    r.lo.to_string(),
                    r.hi.to_string(),
                    r.iterations.to_string(),
                ]);
                s
            })?;
        }
        Command::Simulate { t, n, mu, lo, hi, iterations, trials, seed, records } => {
            let p = t.params()?;
            if n < 1000 {
                bail!("threshold simulation needs n >= 1000");
            }
            let points = match (mu, lo, hi) {
                (_, Some(lo), Some(hi)) => {
                    let r = simulate_threshold(&p, n, trials, seed, lo, hi, iterations)?;
                    eprintln!("crossing estimate {} +- {}", r.estimate, r.half_width);
                    if let Some(path) = &records {
                        write_file(path, &output::trial_csv(&r.points))?;
                    }
                    out.emit("simulate", &r, || output::points_csv(&r.points))?;
                    return Ok(0);
                }
                (Some(mu), _, _) => vec![simulate_point(&p, n, mu, trials, seed, 0)?],
                _ => bail!("give --mu or both --lo and --hi"),
            };
            if let Some(path) = &records {
                write_file(path, &output::trial_csv(&points))?;
            }
            out.emit("simulate", &points[0], || output::points_csv(&points))?;
        }
        Command::CoreProfile { t, mu, n, trials, seed } => {
            let prof = core_profile(&t.params()?, mu, n, trials, seed)?;
            out.emit("core-profile", &prof, || output::profile_csv(&prof))?;
        }
        Command::Table1 { tol } => {
            let rows = table1(tol);
            out.emit("table1", &rows, || output::table1_csv(&rows))?;
            if rows.iter().any(|r| r.error.is_some()) {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
