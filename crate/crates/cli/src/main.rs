use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resolvent_splitting::iteration::{self, RunOptions};
use resolvent_splitting::numerics::{numerical_rank, DEFAULT_RANK_TOL};
use resolvent_splitting::problems::ProblemSpec;
use resolvent_splitting::simulator::{self, SimOptions};
use resolvent_splitting::{BlockVector, GraphSpec, Problem, SchemeSpec, Status, StopRule};

/// Exit codes.
const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_MAX_ITERS: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_AUDIT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "rsplit",
    version,
    about = "Frugal resolvent splitting: validate schemes, iterate, simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scheme against the four admissibility conditions (exit 0 iff valid).
    Validate {
        /// dr | ryu3 | minimal:N | ryu:N | graph:G | file:PATH
        #[arg(long)]
        scheme: SchemeSpec,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Iterate a scheme on a problem (exit 0 converged, 2 max-iters, 3 diverged).
    Run {
        #[arg(long)]
        scheme: SchemeSpec,
        #[command(flatten)]
        common: Common,
        /// Iterate on v = Sz instead of z.
        #[arg(long)]
        reduced: bool,
    },
    /// Run the decentralized message-passing iteration on a regular graph.
    Simulate {
        /// petersen | kN | cN | qK | complete:N | cycle:N | hypercube:K | PATH
        #[arg(long)]
        graph: GraphSpec,
        #[command(flatten)]
        common: Common,
        /// Write the message log as JSON lines.
        #[arg(long)]
        message_log: Option<PathBuf>,
        /// Include payloads in the message log.
        #[arg(long)]
        log_payloads: bool,
        /// Audit the message log (exit 4 on violation).
        #[arg(long)]
        audit: bool,
        /// Compare against the centralized reduced iteration.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 100)]
        check_rounds: usize,
    },
    /// Summarize a graph: size, regularity, connectivity, Laplacian rank, tau.
    GraphInfo {
        /// Edge-list file or named graph.
        graph: GraphSpec,
    },
}

#[derive(Args)]
struct Common {
    /// consensus:a1,a2,.. | intervals:l/u,.. | lasso:LAMBDA:b1;b2 | game:N,D | random-affine:N,D | PATH
    #[arg(long)]
    problem: ProblemSpec,
    #[arg(long)]
    gamma: Option<f64>,
    /// Permit gamma in [1, 2).
    #[arg(long)]
    allow_gamma: bool,
    /// Sets both tolerances.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    tol_fp: Option<f64>,
    #[arg(long)]
    tol_consensus: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Seed for random problem instances.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace CSV destination.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Common {
    fn stop(&self) -> Result<StopRule<f64>> {
        Ok(StopRule::new(
            self.tol_fp.unwrap_or(self.tol),
            self.tol_consensus.unwrap_or(self.tol),
            self.max_iters,
        )?)
    }

    fn problem(&self) -> Result<Problem> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.problem
            .build(&mut rng)
            .with_context(|| format!("building problem {}", self.problem))
    }

    fn check_gamma(&self, gamma: f64) -> Result<()> {
        if !(gamma > 0.0 && gamma < 2.0) {
            bail!("gamma must lie in (0, 2), got {gamma}");
        }
        if gamma >= 1.0 && !self.allow_gamma {
            bail!("gamma = {gamma} is outside (0, 1); pass --allow-gamma to run anyway");
        }
        Ok(())
    }

    fn write(&self, csv: &str) -> Result<()> {
        if let Some(path) = &self.output {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Converged => EXIT_OK,
        Status::MaxIters => EXIT_MAX_ITERS,
        Status::Diverged => EXIT_DIVERGED,
    }
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<_> = p.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn report_solution(problem: &Problem, point: &[f64], consensus: f64) {
    println!("solution: {}", fmt_point(point));
    println!("consensus_residual: {consensus:e}");
    if let Some(r) = problem.sum_residual(point) {
        println!("sum_residual: {r:e}");
    }
    if let Some(reference) = problem.reference_point() {
        println!("reference: {}", fmt_point(reference));
        println!(
            "reference_error: {:e}",
            resolvent_splitting::numerics::distance(point, reference)
        );
    }
}

fn validate(scheme: &SchemeSpec, gamma: Option<f64>) -> Result<u8> {
    let scheme = scheme.build::<f64>(gamma)?;
    let report = scheme.validate();
    println!("{report}");
    if report.is_valid() {
        Ok(EXIT_OK)
    } else {
        println!("failed: {}", report.failures().join(", "));
        Ok(EXIT_FAILURE)
    }
}

fn run(spec: &SchemeSpec, common: &Common, reduced: bool) -> Result<u8> {
    let scheme = spec.build::<f64>(common.gamma)?;
    common.check_gamma(scheme.gamma())?;
    let report = scheme.validate();
    if !report.is_valid() {
        bail!(
            "scheme {spec} is not admissible: fails {}",
            report.failures().join(", ")
        );
    }
    let problem = common.problem()?;
    if problem.len() != scheme.n() {
        bail!(
            "scheme {spec} needs {} operators but the problem has {}",
            scheme.n(),
            problem.len()
        );
    }
    let mut opts = RunOptions::new(common.stop()?);
    opts.reference = problem.reference_point().map(<[f64]>::to_vec);
    opts.allow_nonconforming_gamma = common.allow_gamma;
    let trace = if reduced {
        let v0 = BlockVector::zeros(scheme.n(), problem.dim());
        iteration::iterate_reduced_with(&scheme, &problem.operators, v0, &opts)?
    } else {
        let z0 = BlockVector::zeros(scheme.m(), problem.dim());
        iteration::iterate_with(&scheme, &problem.operators, z0, &opts)?
    };
    common.write(&trace.to_csv())?;
    let last = trace.last().expect("at least one iteration");
    println!("status: {}", trace.status);
    println!("iterations: {}", trace.iterations());
    println!("fp_residual: {:e}", last.fp_residual);
    for note in &trace.notes {
        println!("note: {note}");
    }
    let (point, consensus) = trace.solution();
    report_solution(&problem, &point, consensus);
    Ok(status_code(trace.status))
}

struct SimulateArgs<'a> {
    graph: &'a GraphSpec,
    common: &'a Common,
    message_log: Option<&'a PathBuf>,
    log_payloads: bool,
    audit: bool,
    check: bool,
    check_rounds: usize,
}

fn simulate(a: SimulateArgs<'_>) -> Result<u8> {
    let graph = a.graph.build()?;
    let gamma = a
        .common
        .gamma
        .unwrap_or(resolvent_splitting::scheme::DEFAULT_GAMMA);
    a.common.check_gamma(gamma)?;
    let problem = a.common.problem()?;
    if problem.len() != graph.vertex_count() {
        bail!(
            "graph has {} vertices but the problem has {} operators",
            graph.vertex_count(),
            problem.len()
        );
    }
    let mut opts = SimOptions::new(a.common.stop()?);
    opts.reference = problem.reference_point().map(<[f64]>::to_vec);
    opts.allow_nonconforming_gamma = a.common.allow_gamma;
    opts.log_messages = a.audit || a.message_log.is_some();
    opts.log_payloads = a.log_payloads;
    let v0 = BlockVector::zeros(graph.vertex_count(), problem.dim());
    let trace = simulator::simulate(&graph, &problem.operators, gamma, &v0, &opts)?;
    a.common.write(&trace.to_csv())?;
    if let Some(path) = a.message_log {
        fs::write(path, trace.message_log_jsonl())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!("status: {}", trace.status);
    println!("rounds: {}", trace.rounds());
    if let Some(last) = trace.records.last() {
        println!("fp_residual: {:e}", last.residuals.fp_residual);
        println!("messages_per_round: x={} v={}", last.msgs_x, last.msgs_v);
    }
    for note in &trace.notes {
        println!("note: {note}");
    }
    let (point, consensus) = trace.solution();
    report_solution(&problem, &point, consensus);
    if a.check {
        let dev = simulator::equivalence_check(&graph, &problem.operators, gamma, a.check_rounds)?;
        println!("max_deviation: {dev:e} over {} rounds", a.check_rounds);
    }
    if a.audit {
        let violations = simulator::audit_report(&trace, &graph);
        if violations.is_empty() {
            println!("audit: pass ({} messages)", trace.messages.len());
        } else {
            println!("audit: FAIL");
            for v in &violations {
                println!("  {v}");
            }
            return Ok(EXIT_AUDIT);
        }
    }
    Ok(status_code(trace.status))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn graph_info(spec: &GraphSpec) -> Result<u8> {
    let g = spec.build()?;
    let (n, e) = (g.vertex_count(), g.edge_count());
    println!("n={n}");
    println!("|E|={e}");
    match g.is_regular() {
        Some(d) => {
            println!("regular=true");
            println!("d={d}");
        }
        None => println!("regular=false"),
    }
    println!("connected={}", g.is_connected());
    println!("components={}", g.component_count());
    println!(
        "laplacian_rank={}",
        numerical_rank(&g.laplacian::<f64>(), DEFAULT_RANK_TOL)?
    );
    if e > 0 {
        let k = gcd(n, e);
        let frac = if e / k == 1 {
            format!("{}", n / k)
        } else {
            format!("{}/{}", n / k, e / k)
        };
        println!("tau={frac} ({})", n as f64 / e as f64);
    } else {
        println!("tau=undefined");
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Validate { scheme, gamma } => validate(scheme, *gamma),
        Command::Run {
            scheme,
            common,
            reduced,
        } => run(scheme, common, *reduced),
        Command::Simulate {
            graph,
            common,
            message_log,
            log_payloads,
            audit,
            check,
            check_rounds,
        } => simulate(SimulateArgs {
            graph,
            common,
            message_log: message_log.as_ref(),
            log_payloads: *log_payloads,
            audit: *audit,
            check: *check,
            check_rounds: *check_rounds,
        }),
        Command::GraphInfo { graph } => graph_info(graph),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
