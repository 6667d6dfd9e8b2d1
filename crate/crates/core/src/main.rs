use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fleetloc::experiments::blocks::{BlockId, ExperimentBlock};
use fleetloc::experiments::report::{
    render_block_table, render_calibration, render_grid, render_solve, render_summary, render_validation, rows_to_csv,
    solve_csv, Precision,
};
use fleetloc::experiments::{calibrate, calibrate::speed_range, run_validation, solve, solve::locate, ValidateOptions};
use fleetloc::fleet::{min_center_rate, min_trucks};
use fleetloc::geometry::Point;
use fleetloc::scenario::{load_scenario, Scenario};
use fleetloc::star::{build_star, throughput_vs_location};
use fleetloc::weber::{solve_weber, WeberOptions, WeberProblem};

/// Center location and fleet sizing for a production center serving a set
/// of warehouses with a closed fleet of trucks.
#[derive(Parser)]
#[command(name = "fleetloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the center, size the fleet and report performance.
    Solve {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Analyze this fleet size instead of the minimal one.
        #[arg(long)]
        trucks: Option<usize>,
        /// Place the center here instead of at the Weber point.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        center: Option<Point>,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        digits: Digits,
    },
    /// Weber point of the warehouses.
    Weber {
        #[command(flatten)]
        input: ScenarioArgs,
    },
    /// Minimal fleet, and the smallest center rate that makes demand feasible.
    Fleet {
        #[command(flatten)]
        input: ScenarioArgs,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        center: Option<Point>,
        /// Grid step for the center rate search.
        #[arg(long, default_value_t = 0.01)]
        rate_step: f64,
    },
    /// Random twelve-warehouse instances, solved at both Weber points.
    Generate {
        #[arg(long, default_value = "I")]
        block: BlockId,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Center loading rate, overriding the block's.
        #[arg(long)]
        mu1: Option<f64>,
        /// Comma-separated daily demands, overriding the block's set.
        #[arg(long, value_delimiter = ',')]
        demand_set: Option<Vec<u32>>,
        /// Write each instance as a scenario file here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the analytic results against independent oracles.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 5)]
        max_population: usize,
        #[arg(long, default_value_t = 20)]
        replications: usize,
        #[arg(long, default_value_t = 100_000)]
        events: u64,
        #[arg(long, hide = true)]
        corrupt_convolution: bool,
    },
    /// Throughput on a square grid of center locations.
    Grid {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Center the grid on the Weber point (else on the scenario's center).
        #[arg(long)]
        around_weber: bool,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        #[arg(long, default_value_t = 10.0)]
        step: f64,
        /// Fleet size; defaults to the minimal fleet at the grid center.
        #[arg(long)]
        trucks: Option<usize>,
        #[command(flatten)]
        digits: Digits,
    },
    /// Sweep truck speeds against the reference fleet tables.
    Calibrate {
        #[arg(long, default_value_t = 30.0)]
        from: f64,
        #[arg(long, default_value_t = 80.0)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    file: PathBuf,
    /// Override the center loading rate (per hour).
    #[arg(long)]
    mu1: Option<f64>,
    /// Override the truck speed (km/h).
    #[arg(long)]
    speed: Option<f64>,
    /// Locate the center without demand weights.
    #[arg(long)]
    unweighted: bool,
}

#[derive(Args)]
struct Digits {
    #[arg(long, default_value_t = 3)]
    coord_digits: usize,
    #[arg(long, default_value_t = 3)]
    throughput_digits: usize,
    #[arg(long, default_value_t = 6)]
    busy_digits: usize,
}

impl Digits {
    fn precision(&self) -> Precision {
        Precision { coordinates: self.coord_digits, throughput: self.throughput_digits, busy: self.busy_digits }
    }
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let p = Point::new(num(x)?, num(y)?);
    if p.x.is_finite() && p.y.is_finite() {
        Ok(p)
    } else {
        Err("coordinates must be finite".into())
    }
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario, String> {
        let mut s = load_scenario(&self.file).map_err(|e| format!("{}: {e}", self.file.display()))?;
        if let Some(r) = self.mu1 {
            s.center.load_rate = r;
        }
        if let Some(v) = self.speed {
            s.truck_speed = v;
        }
        s.validate().map_err(|e| e.to_string())?;
        Ok(s)
    }
}

enum Outcome {
    Ok,
    /// Infeasible demand or failed checks.
    Negative,
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cmd: Command) -> Result<Outcome, String> {
    match cmd {
        Command::Solve { input, trucks, center, csv, digits } => {
            let s = input.load()?;
            let p = digits.precision();
            let r = solve(&s, center, trucks, !input.unweighted).map_err(|e| e.to_string())?;
            print!("{}", render_solve(&r, &p));
            if let Some(path) = csv {
                write_file(&path, &solve_csv(&r, &p).map_err(|e| e.to_string())?)?;
            }
            Ok(if r.fleet.feasible { Outcome::Ok } else { Outcome::Negative })
        }
        Command::Weber { input } => {
            let s = input.load()?;
            let w = solve_weber(&WeberProblem::from_scenario(&s, !input.unweighted), WeberOptions::default())
                .map_err(|e| e.to_string())?;
            println!("weber point: {:.3}", w.location);
            println!("objective: {:.6}", w.objective);
            println!("iterations: {}", w.iterations);
            if let Some(k) = w.at_anchor {
                println!("at warehouse: {}", s.warehouses[k].id);
            }
            Ok(if w.converged { Outcome::Ok } else { Outcome::Negative })
        }
        Command::Fleet { input, center, rate_step } => {
            let s = input.load()?;
            let (x, _) = locate(&s, center, !input.unweighted).map_err(|e| e.to_string())?;
            let f = min_trucks(&s, x).map_err(|e| e.to_string())?;
            println!("center: {x:.3}");
            println!("demand/day: {}", f.demand);
            println!("ceiling/day: {:.3}", f.ceiling);
            match (f.trucks, f.infeasibility) {
                (Some(n), _) => {
                    println!("trucks: {n}");
                    println!("throughput/day: {:.3}", f.throughput);
                    Ok(Outcome::Ok)
                }
                (None, why) => {
                    println!("trucks: infeasible ({})", why.map(|i| i.to_string()).unwrap_or_default());
                    let (rate, r) = min_center_rate(&s, x, rate_step).map_err(|e| e.to_string())?;
                    match r.trucks {
                        Some(n) => println!("minimal center rate: {rate:.prec$}/h with {n} trucks, throughput/day {:.3}", r.throughput, prec = decimals(rate_step)),
                        None => println!(
                            "no center rate helps ({})",
                            r.infeasibility.map(|i| i.to_string()).unwrap_or_default()
                        ),
                    }
                    Ok(Outcome::Negative)
                }
            }
        }
        Command::Generate { block, count, seed, mu1, demand_set, out_dir, csv } => {
            let mut b = ExperimentBlock::standard(block, count, seed);
            if let Some(r) = mu1 {
                b.center_rate = r;
            }
            if let Some(d) = demand_set {
                b.demand_set = d;
            }
            b.validate()?;
            let result = b.run().map_err(|e| e.to_string())?;
            if let Some(dir) = out_dir {
                fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
                for (i, s) in result.scenarios.iter().enumerate() {
                    let path = dir.join(format!("instance_{i:04}.json"));
                    s.save(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                }
            }
            let p = Precision::table();
            print!("{}", render_block_table(block, &result.rows, &p));
            println!();
            print!("{}", render_summary(&[(block, b.demand_set.clone(), b.center_rate, result.summary.clone())]));
            if let Some(path) = csv {
                write_file(&path, &rows_to_csv(&result.rows, &p).map_err(|e| e.to_string())?)?;
            }
            Ok(Outcome::Ok)
        }
        Command::Validate { seed, instances, max_population, replications, events, corrupt_convolution } => {
            let opts = ValidateOptions {
                seed,
                instances,
                max_population,
                des_replications: replications,
                des_events: events,
                corrupt_convolution,
                ..ValidateOptions::default()
            };
            let r = run_validation(&opts).map_err(|e| e.to_string())?;
            print!("{}", render_validation(&r));
            Ok(if r.passed() { Outcome::Ok } else { Outcome::Negative })
        }
        Command::Grid { input, around_weber, radius, step, trucks, digits } => {
            let s = input.load()?;
            if !(step > 0.0 && radius >= 0.0 && step.is_finite() && radius.is_finite()) {
                return Err("radius must be non-negative and step positive".into());
            }
            let origin = if around_weber {
                locate(&s, None, !input.unweighted).map(|(x, _)| x).map_err(|e| e.to_string())?
            } else {
                s.center.location.ok_or("the scenario has no center location; pass --around-weber")?
            };
            let n = match trucks {
                Some(n) => n,
                None => {
                    let f = min_trucks(&s, origin).map_err(|e| e.to_string())?;
                    f.trucks.unwrap_or(s.max_trucks)
                }
            };
            let k = (radius / step + 1e-9).floor() as i64;
            let grid: Vec<Point> = (-k..=k)
                .flat_map(|i| (-k..=k).map(move |j| origin + Point::new(i as f64 * step, j as f64 * step)))
                .collect();
            let th = throughput_vs_location(&s, n, &grid).map_err(|e| e.to_string())?;
            let rows: Vec<(Point, f64, f64)> =
                th.into_iter().map(|(x, t)| (x, build_star(&s, x).h(), t * s.hours_per_day)).collect();
            println!("trucks: {n}");
            print!("{}", render_grid(&rows, &digits.precision()));
            Ok(Outcome::Ok)
        }
        Command::Calibrate { from, to, step } => {
            if !(step > 0.0 && from > 0.0 && from <= to) {
                return Err("need 0 < from <= to and a positive step".into());
            }
            let r = calibrate(&speed_range(from, to, step)).map_err(|e| e.to_string())?;
            print!("{}", render_calibration(&r));
            Ok(Outcome::Ok)
        }
    }
}

/// Decimal places needed to print multiples of `step`.
fn decimals(step: f64) -> usize {
    (0..10).find(|&d| ((step * 10f64.powi(d as i32)).round() - step * 10f64.powi(d as i32)).abs() < 1e-9).unwrap_or(10)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("FLEETLOC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
