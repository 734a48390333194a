use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use platforming::io::{
    emit_gantt, generate_large_station, generate_virtual_station, perturb_instance, Instance, LargeStationConfig,
    Scenario, SolutionFile, SolveSummary, VirtualStationConfig,
};
use platforming::lr::{self, LrParams, UbPolicy};
use platforming::oracle::{check_feasibility, solve_exact, ExactLimits};
use platforming::{heuristic, Error, InterlockingMode};

#[derive(Parser)]
#[command(name = "platforming", version, about = "Train platforming with two-level Lagrangian relaxation")]
struct Cli {
    /// Print nothing but errors.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print machine-readable JSON to stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Virtual,
    Large,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Lr,
    Heuristic,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Iterative,
    Final,
}

#[derive(Clone, Copy, ValueEnum)]
enum Interlocking {
    Sectional,
    Route,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic instance.
    Generate {
        #[arg(long, value_enum, default_value = "virtual")]
        layout: Layout,
        #[arg(long, default_value_t = 8)]
        trains: usize,
        #[arg(long, env = "PLATFORMING_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<i64>,
        #[arg(long)]
        granularity: Option<i64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Apply delay and outage scenarios to an instance.
    Perturb {
        #[arg(short, long)]
        instance: PathBuf,
        /// JSON file holding one scenario or a list of them.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance.
    Solve {
        #[arg(short, long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "lr")]
        method: Method,
        #[arg(long, value_enum, default_value = "iterative")]
        ub_policy: Policy,
        /// Overrides the station's interlocking mode.
        #[arg(long, value_enum)]
        interlocking: Option<Interlocking>,
        #[arg(long, default_value_t = 1500)]
        max_iters: usize,
        /// Wall-clock limit, e.g. `30s`, `5m`, `500ms`.
        #[arg(long, value_parser = parse_duration)]
        time_limit: Option<Duration>,
        #[arg(long, default_value_t = 1e-4)]
        gap_tol: f64,
        #[arg(long, env = "PLATFORMING_SEED", default_value_t = 0)]
        seed: u64,
        /// Enables balanced track use with this tolerance over the average.
        #[arg(long)]
        balance_tolerance: Option<u32>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Iteration log as CSV.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Search-tree node limit of the exact solver.
        #[arg(long, default_value_t = ExactLimits::default().max_nodes)]
        max_nodes: u64,
        /// Linking sets of every arc as CSV.
        #[arg(long)]
        dump_links: Option<PathBuf>,
    },
    /// Check a solution against the capacity constraints.
    Check {
        #[arg(short, long)]
        instance: PathBuf,
        #[arg(short, long)]
        solution: PathBuf,
    },
    /// Draw a solution as an SVG occupation chart.
    Gantt {
        #[arg(short, long)]
        instance: PathBuf,
        #[arg(short, long)]
        solution: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print a solution file as a table.
    Report {
        #[arg(short, long)]
        solution: PathBuf,
    },
}

fn parse_duration(s: &str) -> Result<Duration, String> {
    let s = s.trim();
    let (num, unit) = match s.find(|c: char| c.is_ascii_alphabetic()) {
        Some(i) => s.split_at(i),
        None => (s, "s"),
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("bad duration `{s}`"))?;
    let secs = match unit {
        "ms" => v / 1000.0,
        "s" => v,
        "m" | "min" => v * 60.0,
        "h" => v * 3600.0,
        _ => return Err(format!("unknown unit in `{s}`")),
    };
    if !(secs >= 0.0 && secs.is_finite()) {
        return Err(format!("bad duration `{s}`"));
    }
    Ok(Duration::from_secs_f64(secs))
}

enum Failure {
    Lib(Error),
    Infeasible,
    NoUpperBound,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let say = |msg: String| {
        if !cli.quiet && !cli.json {
            eprintln!("{msg}");
        }
    };
    match cli.cmd {
        Cmd::Generate { layout, trains, seed, horizon, granularity, out } => {
            let inst = match layout {
                Layout::Virtual => {
                    let d = VirtualStationConfig::default();
                    generate_virtual_station(&VirtualStationConfig {
                        seed,
                        trains,
                        horizon: horizon.unwrap_or(d.horizon),
                        granularity: granularity.unwrap_or(d.granularity),
                        ..d
                    })?
                }
                Layout::Large => {
                    let d = LargeStationConfig::default();
                    generate_large_station(&LargeStationConfig {
                        seed,
                        trains,
                        horizon: horizon.unwrap_or(d.horizon),
                        granularity: granularity.unwrap_or(d.granularity),
                        ..d
                    })?
                }
            };
            write_out(&out, &(inst.to_json()? + "\n"))?;
            say(format!("generated {} trains", inst.trains.len()));
        }
        Cmd::Perturb { instance, scenario, out } => {
            let inst = Instance::load(&instance)?;
            let text = fs::read_to_string(&scenario).map_err(Error::from)?;
            let scenarios: Vec<Scenario> = match serde_json::from_str::<Vec<Scenario>>(&text) {
                Ok(v) => v,
                Err(_) => vec![serde_json::from_str::<Scenario>(&text)
                    .map_err(|e| Error::Scenario(e.to_string()))?],
            };
            let p = perturb_instance(&inst, &scenarios)?;
            write_out(&out, &(p.to_json()? + "\n"))?;
            say(format!("applied {} scenario(s)", scenarios.len()));
        }
        Cmd::Solve {
            instance,
            method,
            ub_policy,
            interlocking,
            max_iters,
            time_limit,
            gap_tol,
            seed,
            balance_tolerance,
            out,
            log,
            max_nodes,
            dump_links,
        } => {
            let mut inst = Instance::load(&instance)?;
            if let Some(mode) = interlocking {
                inst.station.interlocking_mode = match mode {
                    Interlocking::Sectional => InterlockingMode::SectionalRelease,
                    Interlocking::Route => InterlockingMode::RouteRelease,
                };
            }
            if let Some(t) = balance_tolerance {
                let mut b = inst.balance.unwrap_or_default();
                b.tolerance = Some(t);
                inst.balance = Some(b);
            }
            let start = Instant::now();
            let net = inst.network()?;
            if let Some(p) = &dump_links {
                net.write_linking_csv(fs::File::create(p).map_err(Error::from)?)?;
            }
            let cap = inst.balance_cap();
            let (solution, summary) = match method {
                Method::Lr => {
                    let params = LrParams {
                        max_iterations: max_iters,
                        time_limit,
                        gap_tolerance: gap_tol,
                        seed,
                        ub_policy: match ub_policy {
                            Policy::Iterative => UbPolicy::Iterative,
                            Policy::Final => UbPolicy::Final,
                        },
                        balance: inst.balance.unwrap_or_default(),
                        ..Default::default()
                    };
                    let res = lr::run(&net, &inst.weights, params);
                    if let Some(p) = &log {
                        res.bounds.write_csv(fs::File::create(p).map_err(Error::from)?)?;
                    }
                    let Some(sol) = res.solution else { return Err(Failure::NoUpperBound) };
                    let b = res.bounds;
                    let summary = SolveSummary {
                        method: "lr".into(),
                        lower_bound: Some(b.lb_best),
                        upper_bound: b.ub_best,
                        gap: Some(b.gap()),
                        iterations: b.iterations.len(),
                        wall_time_s: start.elapsed().as_secs_f64(),
                        termination: b.termination.map(|t| format!("{t:?}")),
                    };
                    (sol, summary)
                }
                Method::Heuristic => {
                    let raw = net.raw_costs(&inst.weights);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let sol = heuristic::solve_heuristic(&net, &raw, cap, &mut rng);
                    let ub = platforming::objective_value(&net, &sol, &inst.weights);
                    let summary = SolveSummary {
                        method: "heuristic".into(),
                        lower_bound: None,
                        upper_bound: ub,
                        gap: None,
                        iterations: 1,
                        wall_time_s: start.elapsed().as_secs_f64(),
                        termination: None,
                    };
                    (sol, summary)
                }
                Method::Exact => {
                    let ex = solve_exact(&net, &inst.weights, cap, &ExactLimits { max_nodes, ..Default::default() })?;
                    let summary = SolveSummary {
                        method: "exact".into(),
                        lower_bound: Some(ex.optimum),
                        upper_bound: ex.optimum,
                        gap: Some(0.0),
                        iterations: 0,
                        wall_time_s: start.elapsed().as_secs_f64(),
                        termination: Some(format!("{} nodes", ex.nodes)),
                    };
                    (ex.solution, summary)
                }
            };
            let file = SolutionFile::from_solution(&net, &solution, &inst.weights, Some(summary))?;
            let json = file.to_json()? + "\n";
            match &out {
                Some(p) => fs::write(p, &json).map_err(Error::from)?,
                None if cli.json => print!("{json}"),
                None => {}
            }
            if !cli.quiet && !cli.json {
                print!("{}", file.render_text());
            }
        }
        Cmd::Check { instance, solution } => {
            let inst = Instance::load(&instance)?;
            let net = inst.network()?;
            let sol = SolutionFile::load(&solution)?.to_solution(&net)?;
            let report = check_feasibility(&net, &sol, inst.balance_cap())?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
            } else if !cli.quiet {
                for v in &report.violations {
                    println!("{} {} period {}: {} uses by {}", v.kind, v.space, v.micro_period, v.total, v.trains.join(", "));
                }
                for v in &report.balance_violations {
                    println!("siding {}: {} trains, cap {}", v.siding, v.count, v.cap);
                }
                println!("{}", if report.is_feasible() { "feasible" } else { "infeasible" });
            }
            if !report.is_feasible() {
                return Err(Failure::Infeasible);
            }
        }
        Cmd::Gantt { instance, solution, out } => {
            let inst = Instance::load(&instance)?;
            let net = inst.network()?;
            let sol = SolutionFile::load(&solution)?.to_solution(&net)?;
            write_out(&out, &emit_gantt(&net, &sol))?;
        }
        Cmd::Report { solution } => {
            let file = SolutionFile::load(&solution)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&file.totals).map_err(Error::from)?);
            } else {
                print!("{}", file.render_text());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible) => ExitCode::from(2),
        Err(Failure::NoUpperBound) => {
            eprintln!("error: time limit reached without an upper bound");
            ExitCode::from(4)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) | Error::Csv(_) => 1,
                Error::EnumerationCap(_) => 3,
                _ => 2,
            })
        }
    }
}
