//! The `kc` command line: argument definitions and command drivers.
//!
//! Exit codes: 0 success, 1 condition or runtime failure, 2 manifold
//! exists but is not shown stable (or the command needs (A1)/(A2)),
//! 64 usage or configuration error.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use serde_json::json;

use crate::analysis::{
    bracket_mu0, convergence_metrics, jacobian_check, manifold_target, AnalysisError,
    BracketProtocol, BracketReport,
};
use crate::conditions::{check_a1, check_a2, check_all, CheckOptions, FrequencyMatch};
use crate::dynamics::{integrate, CoordinateMap, PlasticNetwork, SimError, StepSettings};
use crate::io::config::{load_config, Config};
use crate::io::csv::{write_metrics, write_trajectory};
use crate::io::report::render_text;
use crate::io::svg::{couplings_chart, errors_chart};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNSTABLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable capping the number of concurrent sweep runs.
pub const THREADS_ENV: &str = "KC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "kc", version, about = "Cluster conditions and simulation for adaptive Kuramoto networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate conditions (A1)-(A4) for the configured partition.
    Check {
        config: PathBuf,
        /// Compare frequencies with relative tolerance 1e-12 instead of exactly.
        #[arg(long)]
        relaxed_a1: bool,
        /// Require sign(Gamma(0)) * max Re < -MARGIN in (A4).
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Integrate the network and write trajectory, metrics and report files.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write errors.svg and couplings.svg.
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        sample_every: Option<usize>,
    },
    /// Analytic intra-cluster Jacobian, its spectra and a finite-difference check.
    Jacobian { config: PathBuf },
    /// Classify convergence over a grid of inter-cluster plasticity values.
    Sweep {
        config: PathBuf,
        /// Ascending, comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        mu_grid: Vec<f64>,
        /// Write the CSV table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed of the perturbed starting states.
        #[arg(long, default_value_t = BracketProtocol::default().seed)]
        seed: u64,
    },
}

fn load(path: &Path) -> Result<Config, i32> {
    load_config(path).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_USAGE
    })
}

fn io_fail(context: &str, e: io::Error) -> i32 {
    eprintln!("error: {context}: {e}");
    EXIT_FAIL
}

pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Check {
            config,
            relaxed_a1,
            margin,
            json,
            report,
        } => cmd_check(config, *relaxed_a1, *margin, *json, report.as_deref()),
        Command::Simulate {
            config,
            out,
            svg,
            dt,
            t_end,
            sample_every,
        } => cmd_simulate(config, out, *svg, *dt, *t_end, *sample_every),
        Command::Jacobian { config } => cmd_jacobian(config),
        Command::Sweep {
            config,
            mu_grid,
            out,
            seed,
        } => cmd_sweep(config, mu_grid, out.as_deref(), *seed),
    };
    outcome.unwrap_or_else(|code| code)
}

fn cmd_check(path: &Path, relaxed: bool, margin: f64, as_json: bool, report_path: Option<&Path>) -> Result<i32, i32> {
    let cfg = load(path)?;
    if !(margin >= 0.0 && margin.is_finite()) {
        eprintln!("error: --margin must be a finite value >= 0");
        return Err(EXIT_USAGE);
    }
    let options = CheckOptions {
        frequency_match: if relaxed { FrequencyMatch::RELAXED } else { FrequencyMatch::Exact },
        hurwitz_margin: margin,
    };
    let report = check_all(&cfg.spec, &cfg.partition, &options).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FAIL
    })?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if as_json {
        println!("{json}");
    } else {
        print!("{}", render_text(&report, &cfg.partition));
    }
    if let Some(p) = report_path {
        fs::write(p, format!("{json}\n")).map_err(|e| io_fail(&p.display().to_string(), e))?;
    }
    Ok(report.exit_code())
}

fn cmd_simulate(
    path: &Path,
    out: &Path,
    svg: bool,
    dt: Option<f64>,
    t_end: Option<f64>,
    sample_every: Option<usize>,
) -> Result<i32, i32> {
    let cfg = load(path)?;
    let Some(initial) = cfg.initial.clone() else {
        eprintln!("error: {}: no \"initial\" block to simulate from", path.display());
        return Err(EXIT_USAGE);
    };
    let settings = StepSettings::new(
        dt.unwrap_or(cfg.sim.dt),
        t_end.unwrap_or(cfg.sim.t_end),
        sample_every.unwrap_or(cfg.sim.sample_every),
    );
    if let Err(e) = settings.validate() {
        eprintln!("error: {e}");
        return Err(EXIT_USAGE);
    }
    let spec = &cfg.spec;
    let p = &cfg.partition;
    let conditions = check_all(spec, p, &CheckOptions::default()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FAIL
    })?;
    let target = manifold_target(spec, &conditions.structure.cardinalities);
    let network = PlasticNetwork::new(spec, Some(p)).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_USAGE
    })?;
    let map = CoordinateMap::new(spec, p).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_USAGE
    })?;
    info!("integrating {} steps", settings.step_count());
    let (traj, status) = match integrate(&network, Some(&map), &initial, &settings, |_, _| {}) {
        Ok(traj) => (traj, json!({"completed": true})),
        Err(SimError::NonFinite { t_last_good, partial }) => {
            eprintln!("warning: state became non-finite after t = {t_last_good}");
            (*partial, json!({"completed": false, "non_finite_after": t_last_good}))
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Err(EXIT_USAGE);
        }
    };
    let metrics = convergence_metrics(&traj, &map, &target);

    fs::create_dir_all(out).map_err(|e| io_fail(&out.display().to_string(), e))?;
    let create = |name: &str| {
        let p = out.join(name);
        File::create(&p)
            .map(BufWriter::new)
            .map_err(|e| io_fail(&p.display().to_string(), e))
    };
    write_trajectory(create("trajectory.csv")?, &spec.graph, &map, &traj)
        .map_err(|e| io_fail("trajectory.csv", e))?;
    write_metrics(create("metrics.csv")?, &metrics).map_err(|e| io_fail("metrics.csv", e))?;
    let report = json!({
        "status": status,
        "settings": {
            "dt": settings.dt,
            "t_end": settings.t_end,
            "sample_every": settings.sample_every,
        },
        "samples": traj.len(),
        "target": target,
        "final_metrics": metrics.last(),
        "conditions": conditions,
    });
    let mut w = create("report.json")?;
    writeln!(w, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))
        .and_then(|_| w.flush())
        .map_err(|e| io_fail("report.json", e))?;
    if svg {
        let intra: Vec<bool> = (0..spec.graph.edge_count())
            .map(|e| {
                let (i, j) = spec.graph.edges()[e];
                p.same_cluster(i, j)
            })
            .collect();
        fs::write(out.join("errors.svg"), errors_chart(&traj)).map_err(|e| io_fail("errors.svg", e))?;
        fs::write(out.join("couplings.svg"), couplings_chart(&traj, &spec.graph, |e| intra[e]))
            .map_err(|e| io_fail("couplings.svg", e))?;
    }
    if let Some(last) = metrics.last() {
        println!(
            "t = {}  max|e| = {:.3e}  intra residual = {:.3e}  inter norm = {:.3e} (bound {:.3e})",
            last.t, last.max_abs_error, last.intra_residual, last.inter_norm, target.inter_bound
        );
    }
    println!("wrote {}", out.display());
    Ok(if status["completed"] == json!(true) { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_jacobian(path: &Path) -> Result<i32, i32> {
    let cfg = load(path)?;
    let a1 = check_a1(&cfg.spec, &cfg.partition, FrequencyMatch::Exact);
    let a2 = check_a2(&cfg.spec.graph, &cfg.partition);
    if !(a1.pass && a2.pass) {
        eprintln!(
            "error: the manifold point is undefined because {} fails; run `kc check` for details",
            match (a1.pass, a2.pass) {
                (false, false) => "(A1) and (A2)",
                (false, true) => "(A1)",
                _ => "(A2)",
            }
        );
        return Err(EXIT_UNSTABLE);
    }
    let phi: Vec<f64> = match &cfg.initial {
        Some(init) => cfg.partition.representatives().iter().map(|&r| init.theta[r]).collect(),
        None => vec![0.0; cfg.partition.cluster_count()],
    };
    let check = jacobian_check(&cfg.spec, &cfg.partition, &phi).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FAIL
    })?;
    let blocks: Vec<_> = check
        .jacobian
        .blocks
        .iter()
        .zip(&check.spectra)
        .enumerate()
        .map(|(s, (b, spectrum))| {
            json!({
                "cluster": s + 1,
                "matrix": b.to_rows(),
                "eigenvalues": spectrum.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "max_real_part": spectrum.max_real_part,
            })
        })
        .collect();
    let out = json!({
        "scale": check.jacobian.scale,
        "blocks": blocks,
        "fd_step": check.fd_step,
        "fd_max_deviation": check.fd_max_deviation,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    if check.fd_max_deviation > 1e-6 {
        eprintln!("error: finite differences deviate by {:.3e}", check.fd_max_deviation);
        return Ok(EXIT_FAIL);
    }
    Ok(EXIT_OK)
}

/// Thread count from [`THREADS_ENV`], `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{THREADS_ENV}: {e}")),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}

fn verdict_label(existence: bool, stability: bool) -> &'static str {
    if !existence {
        "existence-fail"
    } else if !stability {
        "stability-fail"
    } else {
        "stable"
    }
}

pub fn write_sweep_csv<W: Write>(mut w: W, report: &BracketReport) -> io::Result<()> {
    writeln!(
        w,
        "mu,a1,a2,a3,a4,conditions,l7,l8,horizon,final_max_abs_error,classification"
    )?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.11e}")).unwrap_or_else(|| "NA".into());
    for r in &report.rows {
        let class = serde_json::to_value(r.classification).expect("serializes");
        writeln!(
            w,
            "{},{},{},{},{},{},{:.11e},{},{:.11e},{},{}",
            r.mu,
            r.a1,
            r.a2,
            r.a3,
            r.a4,
            verdict_label(r.existence, r.stability),
            r.l7,
            opt(r.l8),
            r.horizon,
            opt(r.final_max_abs_error),
            class.as_str().unwrap_or_default()
        )?;
    }
    w.flush()
}

fn cmd_sweep(path: &Path, grid: &[f64], out: Option<&Path>, seed: u64) -> Result<i32, i32> {
    let cfg = load(path)?;
    let threads = threads_from_env().map_err(|e| {
        eprintln!("error: {e}");
        EXIT_USAGE
    })?;
    let protocol = BracketProtocol {
        seed,
        dt: cfg.sim.dt,
        fallback_horizon: cfg.sim.t_end,
        ..BracketProtocol::default()
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| {
        eprintln!("error: thread pool: {e}");
        EXIT_FAIL
    })?;
    let report = pool
        .install(|| bracket_mu0(&cfg.spec, &cfg.partition, grid, &protocol))
        .map_err(|e| {
            eprintln!("error: {e}");
            match e {
                AnalysisError::Grid(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            }
        })?;
    match out {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_fail(&p.display().to_string(), e))?;
            write_sweep_csv(BufWriter::new(f), &report).map_err(|e| io_fail(&p.display().to_string(), e))?;
        }
        None => write_sweep_csv(io::stdout().lock(), &report).map_err(|e| io_fail("stdout", e))?,
    }
    match report.largest_convergent {
        Some(mu) => eprintln!("largest convergent mu on the grid: {mu} (empirical, not a certified threshold)"),
        None => eprintln!("no grid value converged under the fixed protocol"),
    }
    Ok(EXIT_OK)
}
