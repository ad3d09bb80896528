//! Command-line front end. Exit codes: 0 success, 2 invalid input, 3 I/O or
//! numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::state_scan;
use crate::hamiltonian::{build_model, MODE_NAMES};
use crate::io::{self, BordersFile, RunManifest};
use crate::params::{derive_quantities, validate_regime, Config};
use crate::stability::{axis, classify_point, crosscheck_spectrum, pt_coefficients, sweep_grid, Spacing, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "maglev",
    version,
    about = "Stability and quantum state of a levitated nanomagnet"
)]
struct Cli {
    /// Worker threads for sweeps and scans.
    #[arg(long, env = "MAGLEV_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print derived quantities and regime checks.
    Derive {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Classify a single (B0, R) point.
    Stability(StabilityArgs),
    /// Classify a (B0, R) grid.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        args: SweepArgs,
    },
    /// Purity, entanglement and squeezing along B0 at fixed R.
    State {
        config: PathBuf,
        #[command(flatten)]
        args: StateArgs,
    },
    /// Re-run a sweep or state scan from its manifest.
    Replay {
        manifest: PathBuf,
        /// Write to this CSV instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct StabilityArgs {
    config: PathBuf,
    #[arg(long = "B0")]
    b0: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    json: bool,
    /// Write C, MT and KT as JSON matrices.
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long = "B0-min")]
    pub b0_min: f64,
    #[arg(long = "B0-max")]
    pub b0_max: f64,
    #[arg(long = "R-min")]
    pub r_min: f64,
    #[arg(long = "R-max")]
    pub r_max: f64,
    /// `NxM`: N bias points by M radius points.
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Linear instead of logarithmic spacing on both axes.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StateArgs {
    #[arg(long = "R")]
    pub r: f64,
    /// `min:max:n`.
    #[arg(long = "B0-scan")]
    pub b0_scan: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub linear: bool,
}

fn spacing(linear: bool) -> Spacing {
    if linear {
        Spacing::Linear
    } else {
        Spacing::Log
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidGrid(format!("--grid expects NxM, got {s:?}"));
    let (n, m) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        n.trim().parse().map_err(|_| bad())?,
        m.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_scan(s: &str) -> Result<(f64, f64, usize)> {
    let bad = || Error::InvalidGrid(format!("--B0-scan expects min:max:n, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
        n.trim().parse().map_err(|_| bad())?,
    ))
}

fn tolerances(tol: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("real_root".to_string(), tol),
        ("marginal_band".to_string(), crate::stability::MARGIN_FACTOR * tol),
        ("eigen_cluster".to_string(), crate::gaussian::CLUSTER_TOL),
        ("bisection_width".to_string(), crate::stability::BISECTION_WIDTH),
    ])
}

fn manifest(command: &str, args: serde_json::Value, cfg: &Config, tol: f64, outputs: Vec<PathBuf>) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        args,
        params_echo: *cfg,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        tolerances: tolerances(tol),
        outputs,
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn run_sweep(cfg: &Config, args: &SweepArgs) -> Result<()> {
    let (n_b0, n_r) = parse_grid(&args.grid)?;
    if n_b0 < 2 || n_r < 2 {
        return Err(Error::InvalidGrid("grid needs at least 2x2 points".into()));
    }
    let sp = spacing(args.linear);
    let b0_axis = axis(args.b0_min, args.b0_max, n_b0, sp)?;
    let r_axis = axis(args.r_min, args.r_max, n_r, sp)?;
    let diagram = sweep_grid(&cfg.constants, &cfg.params, &b0_axis, &r_axis, args.tol)?;

    let borders_path = io::sidecar(&args.out, "borders.json");
    let manifest_path = io::sidecar(&args.out, "manifest.json");
    let m = manifest(
        "sweep",
        serde_json::to_value(args).expect("serializable"),
        cfg,
        args.tol,
        vec![args.out.clone(), borders_path.clone()],
    );
    io::write_all_atomic(&[
        (args.out.clone(), io::sweep_csv(&diagram).into_bytes()),
        (borders_path, to_json(&BordersFile::from_diagram(&diagram))),
        (manifest_path, to_json(&m)),
    ])?;

    let comps = diagram.stable_components();
    let failed = diagram.cells.iter().filter(|c| c.note.is_some()).count();
    eprintln!(
        "{} cells, {} stable components, {} cell errors -> {}",
        diagram.cells.len(),
        comps.len(),
        failed,
        args.out.display()
    );
    Ok(())
}

fn run_state(cfg: &Config, args: &StateArgs) -> Result<()> {
    let (lo, hi, n) = parse_scan(&args.b0_scan)?;
    let b0s = axis(lo, hi, n, spacing(args.linear))?;
    if !(args.r.is_finite() && args.r > 0.0) {
        return Err(Error::NonPositiveInput {
            name: "R",
            requirement: "finite and positive",
            value: args.r,
        });
    }
    if !(args.tol > 0.0 && args.tol < 1e-4) {
        return Err(Error::InvalidTolerance(args.tol));
    }
    let rows = state_scan(&cfg.constants, &cfg.params, args.r, &b0s, args.tol);

    let manifest_path = io::sidecar(&args.out, "manifest.json");
    let m = manifest(
        "state",
        serde_json::to_value(args).expect("serializable"),
        cfg,
        args.tol,
        vec![args.out.clone()],
    );
    io::write_all_atomic(&[
        (args.out.clone(), io::state_csv(&rows).into_bytes()),
        (manifest_path, to_json(&m)),
    ])?;

    let filled = rows.iter().filter(|r| r.metrics.is_some()).count();
    if filled == 0 {
        eprintln!("warning: no stable points in the scan; all rows are gaps");
    }
    for r in rows.iter().filter(|r| r.note.is_some()) {
        eprintln!("warning: B0 = {:e}: {}", r.b0, r.note.as_deref().unwrap_or(""));
    }
    eprintln!(
        "{filled}/{} stable rows -> {} (b_Z mode decoupled: purity 1, squeezing 1)",
        rows.len(),
        args.out.display()
    );
    Ok(())
}

fn run_derive(path: &Path, json: bool) -> Result<()> {
    let cfg = Config::load(path)?;
    let d = derive_quantities(&cfg.constants, &cfg.params)?;
    let report = validate_regime(&cfg.constants, &cfg.params, &d);
    if json {
        let v = serde_json::json!({ "params": cfg.params, "constants": cfg.constants, "derived": d, "regime": report });
        println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
        return Ok(());
    }
    let rows: [(&str, f64, &str); 20] = [
        ("V", d.volume, "m^3"),
        ("M", d.mass, "kg"),
        ("I", d.inertia, "kg m^2"),
        ("mu", d.moment, "J/T"),
        ("S", d.spin, ""),
        ("J", d.total_j, ""),
        ("eta", d.eta, ""),
        ("omega_L", d.omega_l, "rad/s"),
        ("omega_D", d.omega_d, "rad/s"),
        ("omega_I", d.omega_i, "rad/s"),
        ("omega_Z^2", d.omega_z_sq, "rad^2/s^2"),
        ("omega_T", d.omega_t, "rad/s"),
        ("omega_+", d.omega_plus, "rad/s"),
        ("omega_-", d.omega_minus, "rad/s"),
        ("omega_k", d.omega_k, "rad/s"),
        ("omega_mu", d.omega_mu, "rad/s"),
        ("omega_S", d.omega_s, "rad/s"),
        ("g", d.g_coupling, "rad/s"),
        ("r0", d.r0, "m"),
        ("z0", d.z0.unwrap_or(f64::NAN), "m"),
    ];
    for (name, value, unit) in rows {
        println!("{name:<10} {value:>14.6e} {unit}");
    }
    println!();
    println!(
        "gravity ratio        {:.3e} ({})",
        report.gravity_ratio,
        ok(report.gravity_ok)
    );
    println!(
        "slow rotation ratio  {:.3e} ({})",
        report.slow_rotation_ratio,
        ok(report.slow_rotation_ok)
    );
    println!("macrospin (S >= 1e2) {}", ok(report.macrospin_ok));
    println!("omega_T real         {}", ok(report.omega_t_real));
    println!("z confining (B''>0)  {}", ok(report.trap_z_confining));
    Ok(())
}

fn ok(flag: bool) -> &'static str {
    if flag {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn matrix_rows(m: impl Iterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    m.collect()
}

fn run_stability(a: &StabilityArgs) -> Result<()> {
    let cfg = Config::load(&a.config)?;
    let p = cfg
        .params
        .with_point(a.r.unwrap_or(cfg.params.radius), a.b0.unwrap_or(cfg.params.b0));
    p.validate()?;
    let d = derive_quantities(&cfg.constants, &p)?;
    let model = build_model(&d)?;
    let verdict = classify_point(&d, &model, a.tol)?;
    let residual = crosscheck_spectrum(&model, &pt_coefficients(&d));

    if let Some(path) = &a.dump_matrices {
        let c = matrix_rows(model.c.row_iter().map(|r| r.iter().copied().collect()));
        let mt = matrix_rows(model.mt.row_iter().map(|r| r.iter().copied().collect()));
        let kt = matrix_rows(model.kt.row_iter().map(|r| r.iter().copied().collect()));
        let v = serde_json::json!({ "basis_psi": ["b_R^dag", "k^dag", "b_L", "m", "s"], "modes": MODE_NAMES, "C": c, "MT": mt, "KT": kt });
        io::write_all_atomic(&[(path.clone(), to_json(&v))])?;
    }

    let label = if verdict.z_stable {
        verdict.classification.to_string()
    } else {
        format!("{} (z-axis)", verdict.classification)
    };
    if a.json {
        let v = serde_json::json!({
            "B0": p.b0, "R": p.radius, "classification": label, "verdict": verdict, "crosscheck_residual": residual,
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
        return Ok(());
    }
    println!("B0 = {:e} T, R = {:e} m", p.b0, p.radius);
    println!("classification: {label}");
    println!("z_stable: {}  t_stable: {}", verdict.z_stable, verdict.t_stable);
    println!("roots nu (rad/s):");
    for z in verdict.roots_nu {
        println!("  {:>+16.9e} {:>+16.9e}i", z.re, z.im);
    }
    println!("max_offaxis: {:e}", verdict.max_offaxis);
    println!("crosscheck residual: {residual:e}");
    Ok(())
}

fn run_replay(path: &Path, out: Option<&PathBuf>) -> Result<()> {
    let m = RunManifest::load(path)?;
    let cfg = m.params_echo;
    cfg.params.validate()?;
    let bad = |e: serde_json::Error| Error::Config(format!("manifest args: {e}"));
    match m.command.as_str() {
        "sweep" => {
            let mut args: SweepArgs = serde_json::from_value(m.args).map_err(bad)?;
            if let Some(o) = out {
                args.out = o.clone();
            }
            run_sweep(&cfg, &args)
        }
        "state" => {
            let mut args: StateArgs = serde_json::from_value(m.args).map_err(bad)?;
            if let Some(o) = out {
                args.out = o.clone();
            }
            run_state(&cfg, &args)
        }
        other => Err(Error::Config(format!("cannot replay command {other:?}"))),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Derive { config, json } => run_derive(&config, json),
        Command::Stability(a) => run_stability(&a),
        Command::Sweep { config, args } => run_sweep(&Config::load(&config)?, &args),
        Command::State { config, args } => run_state(&Config::load(&config)?, &args),
        Command::Replay { manifest, out } => run_replay(&manifest, out.as_ref()),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::InvalidGrid("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli)),
            Err(e) => Err(Error::Io(std::io::Error::other(e))),
        },
        None => dispatch(cli),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_FAILURE
            }
        }
    }
}
