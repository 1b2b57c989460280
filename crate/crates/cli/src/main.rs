//! Command-line front end: runs the scan engines and the identity verifier,
//! emits CSV plus a reproducibility manifest.

mod angles;
mod manifest;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use entpower::{
    canonicalize, cartan_kernel, concurrence, eof, gamma_from_purity, local_invariants, mems,
    mems_purity, theorem_check, uniform_grid, Axis, CartanVector, ComplexMatrix4, EpCurve,
    InverseScanConfig, MemsRank, ReachMap, ReachRow, ScanConfig, SourceFamily,
};

use angles::{format_pi, parse_angle, parse_angle2, parse_angle3};
use manifest::{read_config, Manifest};

#[derive(Parser)]
#[command(
    name = "entpower",
    version,
    about = "Entangling power of two-qubit gates on mixed states"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify the analytic source-to-MEMS identities on a parameter grid
    TheoremCheck(TheoremArgs),
    /// Entangling power vs purity over random separable source states
    EpScan(EpScanArgs),
    /// Reachability of separable states from the MEMS under inverse gates
    InverseScan(InverseScanArgs),
    /// Canonical coordinates, local invariants and kernel of a gate
    GateInfo(GateInfoArgs),
    /// Parameters and entanglement measures of a MEMS
    MemsInfo(MemsInfoArgs),
}

#[derive(Args)]
struct TheoremArgs {
    /// Gamma grid step over [0, 1]
    #[arg(long, default_value_t = 0.01)]
    gamma_step: f64,
    /// Chi grid step over [0, 2pi) (angle syntax: 0.025pi, pi/40, radians)
    #[arg(long, default_value = "pi/40", allow_hyphen_values = true)]
    chi_step: String,
    /// Largest acceptable elementwise deviation
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct EpScanArgs {
    /// Kernel coordinates ax,ay,az (angle syntax: 0.125pi,0.125pi,0)
    #[arg(long, allow_hyphen_values = true)]
    gate: Option<String>,
    /// Source family: cc | product
    #[arg(long)]
    source: Option<String>,
    /// First purity grid point (default 1/3)
    #[arg(long)]
    mu_start: Option<f64>,
    /// Last purity grid point (default 1)
    #[arg(long)]
    mu_stop: Option<f64>,
    /// Purity grid step (default 0.01)
    #[arg(long)]
    mu_step: Option<f64>,
    /// Random samples per purity bin
    #[arg(long)]
    samples: Option<usize>,
    /// Basis-angle lattice step for classical-classical sources
    #[arg(long, allow_hyphen_values = true)]
    basis_step: Option<String>,
    /// 64-bit seed; fixes every random draw of the scan
    #[arg(long)]
    seed: Option<u64>,
    /// Add the analytic source states to each bin's candidates: on | off
    #[arg(long)]
    oracle_seeding: Option<String>,
    /// Output CSV path (a .manifest file is written alongside)
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: ENTPOWER_THREADS or all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct InverseScanArgs {
    /// Fixed alpha_z of every kernel on the grid
    #[arg(long, allow_hyphen_values = true)]
    alpha_z: Option<String>,
    /// Grid step for alpha_x, alpha_y over [0, pi/4]
    #[arg(long)]
    grid_step: Option<String>,
    /// Rotation axes for qubits A,B (example: z,z or x,y)
    #[arg(long)]
    rot_axes: Option<String>,
    /// Rotation-angle grid step over [0, 2pi)
    #[arg(long)]
    rot_step: Option<String>,
    /// Width of the gamma bins whose centers are scanned (default 0.02)
    #[arg(long)]
    gamma_step: Option<f64>,
    /// Separability threshold on the smallest partial-transpose eigenvalue
    #[arg(long)]
    tol_sep: Option<f64>,
    /// Corner phase of the target MEMS
    #[arg(long, allow_hyphen_values = true)]
    mems_phi: Option<String>,
    /// Evaluate a single cell ax,ay instead of the whole square
    #[arg(long, allow_hyphen_values = true)]
    only_cell: Option<String>,
    /// Output CSV path (a .manifest file is written alongside)
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: ENTPOWER_THREADS or all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// key=value config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GateInfoArgs {
    /// Kernel coordinates ax,ay,az
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
}

#[derive(Args)]
struct MemsInfoArgs {
    /// Entanglement parameter gamma in [0, 1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Purity (requires --rank)
    #[arg(long)]
    mu: Option<f64>,
    /// MEMS branch: 2 | 3
    #[arg(long)]
    rank: Option<u8>,
}

enum Failure {
    /// Bad flags or config: exit 2.
    Usage(String),
    /// A tolerance or assertion did not hold: exit 1.
    Tolerance(String),
    /// I/O or engine error: exit 1.
    Runtime(String),
}

impl From<entpower::Error> for Failure {
    fn from(e: entpower::Error) -> Self {
        match e {
            entpower::Error::ConfigInvalid(_)
            | entpower::Error::GammaOutOfRange { .. }
            | entpower::Error::PurityOutOfRange { .. }
            | entpower::Error::UnreachablePurity { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::TheoremCheck(args) => cmd_theorem_check(args),
        Cmd::EpScan(args) => cmd_ep_scan(args),
        Cmd::InverseScan(args) => cmd_inverse_scan(args),
        Cmd::GateInfo(args) => cmd_gate_info(args),
        Cmd::MemsInfo(args) => cmd_mems_info(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Tolerance(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(msg.to_string())
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let threads = match threads {
        Some(n) => Some(n),
        None => match std::env::var("ENTPOWER_THREADS") {
            Ok(v) => Some(
                v.parse::<usize>()
                    .map_err(|_| usage(format!("ENTPOWER_THREADS='{v}' is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    match threads {
        None => Ok(f()),
        Some(n) => {
            if n == 0 {
                return Err(usage("thread count must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Runtime(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Write the CSV and its manifest; on any error remove whatever was written.
fn write_outputs(out: &Path, csv: &str, manifest: &Manifest) -> Result<(), Failure> {
    let manifest_path = Manifest::path_for(out);
    let cleanup = || {
        let _ = std::fs::remove_file(out);
        let _ = std::fs::remove_file(&manifest_path);
    };
    if let Err(e) = std::fs::write(out, csv) {
        cleanup();
        return Err(Failure::Runtime(format!(
            "cannot write {}: {e}",
            out.display()
        )));
    }
    if let Err(e) = std::fs::write(&manifest_path, manifest.render()) {
        cleanup();
        return Err(Failure::Runtime(format!(
            "cannot write {}: {e}",
            manifest_path.display()
        )));
    }
    Ok(())
}

fn format_vector(v: &CartanVector) -> String {
    format!(
        "({}, {}, {})",
        format_pi(v.alpha_x),
        format_pi(v.alpha_y),
        format_pi(v.alpha_z)
    )
}

fn print_matrix(m: &ComplexMatrix4) {
    for row in 0..4 {
        let mut line = String::from(" ");
        for col in 0..4 {
            let z = m.get(row, col);
            line.push_str(&format!(" {:+.6}{:+.6}i", z.re, z.im));
        }
        println!("{line}");
    }
}

// ---------------------------------------------------------------------------
// theorem-check
// ---------------------------------------------------------------------------

fn cmd_theorem_check(args: TheoremArgs) -> Result<(), Failure> {
    if args.gamma_step.is_nan() || args.gamma_step <= 0.0 || args.gamma_step > 1.0 {
        return Err(usage("gamma-step must be in (0, 1]"));
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(usage("tol must be positive"));
    }
    let chi_step = parse_angle(&args.chi_step).map_err(usage)?;
    if chi_step.is_nan() || chi_step <= 0.0 || chi_step > 2.0 * PI {
        return Err(usage("chi-step must be in (0, 2pi]"));
    }
    let chi_grid = uniform_grid(0.0, 2.0 * PI - 1e-9, chi_step);
    let gamma_grid = uniform_grid(0.0, 1.0, args.gamma_step);
    let report = theorem_check(&chi_grid, &gamma_grid).map_err(Failure::from)?;
    println!(
        "rank-2 product source    -> MEMS: max deviation {:.3e}",
        report.dev_rank2
    );
    println!(
        "rank-3 diagonal source   -> MEMS: max deviation {:.3e}",
        report.dev_rank3
    );
    println!(
        "correlated source        -> MEMS: max deviation {:.3e}",
        report.dev_correlated
    );
    let max = report.max_deviation();
    println!("max deviation {:.3e} (tol {:.1e})", max, args.tol);
    if max < args.tol {
        println!("PASS");
        Ok(())
    } else {
        Err(Failure::Tolerance(format!(
            "FAIL: max deviation {max:.3e} >= tol {:.1e}",
            args.tol
        )))
    }
}

// ---------------------------------------------------------------------------
// ep-scan
// ---------------------------------------------------------------------------

const EP_KEYS: &[&str] = &[
    "gate",
    "source",
    "mu-start",
    "mu-stop",
    "mu-step",
    "samples",
    "basis-step",
    "seed",
    "oracle-seeding",
    "threads",
];

fn cmd_ep_scan(args: EpScanArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => read_config(path, EP_KEYS).map_err(usage)?,
        None => Default::default(),
    };
    let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());

    let gate_str = pick(args.gate, "gate").ok_or_else(|| usage("--gate is required"))?;
    let [ax, ay, az] = parse_angle3(&gate_str).map_err(usage)?;
    let source_str = pick(args.source, "source").unwrap_or_else(|| "cc".into());
    let source: SourceFamily = source_str.parse().map_err(Failure::from)?;

    fn from_config<T: std::str::FromStr>(
        file: &std::collections::BTreeMap<String, String>,
        key: &str,
    ) -> Result<Option<T>, Failure> {
        match file.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|_| usage(format!("config {key}='{s}' cannot be parsed"))),
        }
    }

    let mut cfg = ScanConfig::new(CartanVector::new(ax, ay, az), source);
    if let Some(v) = args.mu_start.or(from_config(&file, "mu-start")?) {
        cfg.mu_start = v;
    }
    if let Some(v) = args.mu_stop.or(from_config(&file, "mu-stop")?) {
        cfg.mu_stop = v;
    }
    if let Some(v) = args.mu_step.or(from_config(&file, "mu-step")?) {
        cfg.mu_step = v;
    }
    if let Some(v) = args.samples.or(from_config(&file, "samples")?) {
        cfg.samples_per_bin = v;
    }
    if let Some(s) = pick(args.basis_step, "basis-step") {
        cfg.basis_step = parse_angle(&s).map_err(usage)?;
    }
    if let Some(v) = args.seed.or(from_config(&file, "seed")?) {
        cfg.seed = v;
    }
    if let Some(s) = pick(args.oracle_seeding, "oracle-seeding") {
        cfg.oracle_seeding = parse_on_off(&s)?;
    }
    let threads = args.threads.or(from_config(&file, "threads")?);

    let started = Instant::now();
    let curve: EpCurve = in_pool(threads, || entpower::ep_scan(&cfg))?.map_err(Failure::from)?;

    let mut man = Manifest::new("ep-scan");
    man.push("gate", format!("{:.17e},{:.17e},{:.17e}", ax, ay, az));
    man.push("source", &source_str);
    man.push_f64("mu-start", cfg.mu_start);
    man.push_f64("mu-stop", cfg.mu_stop);
    man.push_f64("mu-step", cfg.mu_step);
    man.push("samples", cfg.samples_per_bin);
    man.push_f64("basis-step", cfg.basis_step);
    man.push("seed", cfg.seed);
    man.push(
        "oracle-seeding",
        if cfg.oracle_seeding { "on" } else { "off" },
    );
    if let Some(n) = threads {
        man.push("threads", n);
    }
    man.push("out", args.out.display());
    man.push("duration-ms", started.elapsed().as_millis());

    write_outputs(&args.out, &curve.to_csv(), &man)?;
    println!(
        "wrote {} ({} bins) and {}",
        args.out.display(),
        curve.rows.len(),
        Manifest::path_for(&args.out).display()
    );
    Ok(())
}

fn parse_on_off(s: &str) -> Result<bool, Failure> {
    match s.trim() {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(usage(format!("expected on|off, got '{other}'"))),
    }
}

// ---------------------------------------------------------------------------
// inverse-scan
// ---------------------------------------------------------------------------

const INV_KEYS: &[&str] = &[
    "alpha-z",
    "grid-step",
    "rot-axes",
    "rot-step",
    "gamma-step",
    "tol-sep",
    "mems-phi",
    "only-cell",
    "threads",
];

fn cmd_inverse_scan(args: InverseScanArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => read_config(path, INV_KEYS).map_err(usage)?,
        None => Default::default(),
    };
    let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());

    let alpha_z_str =
        pick(args.alpha_z, "alpha-z").ok_or_else(|| usage("--alpha-z is required"))?;
    let alpha_z = parse_angle(&alpha_z_str).map_err(usage)?;
    let axes_str = pick(args.rot_axes, "rot-axes").unwrap_or_else(|| "z,z".into());
    let axes = parse_axes(&axes_str)?;

    let mut cfg = InverseScanConfig::new(alpha_z, axes);
    if let Some(s) = pick(args.grid_step, "grid-step") {
        cfg.alpha_grid_step = parse_angle(&s).map_err(usage)?;
    }
    if let Some(s) = pick(args.rot_step, "rot-step") {
        cfg.rot_step = parse_angle(&s).map_err(usage)?;
    }
    let gamma_from_file = match file.get("gamma-step") {
        None => None,
        Some(s) => Some(
            s.parse::<f64>()
                .map_err(|_| usage(format!("config gamma-step='{s}' is not a number")))?,
        ),
    };
    if let Some(v) = args.gamma_step.or(gamma_from_file) {
        cfg.gamma_step = v;
    }
    let tol_from_file = match file.get("tol-sep") {
        None => None,
        Some(s) => Some(
            s.parse::<f64>()
                .map_err(|_| usage(format!("config tol-sep='{s}' is not a number")))?,
        ),
    };
    if let Some(v) = args.tol_sep.or(tol_from_file) {
        cfg.tol_sep = v;
    }
    if let Some(s) = pick(args.mems_phi, "mems-phi") {
        cfg.mems_phi = parse_angle(&s).map_err(usage)?;
    }
    let only_cell = match pick(args.only_cell, "only-cell") {
        Some(s) => Some(parse_angle2(&s).map_err(usage)?),
        None => None,
    };
    let threads_from_file = match file.get("threads") {
        None => None,
        Some(s) => Some(
            s.parse::<usize>()
                .map_err(|_| usage(format!("config threads='{s}' is not a count")))?,
        ),
    };
    let threads = args.threads.or(threads_from_file);

    let started = Instant::now();
    let map: ReachMap = match only_cell {
        Some([ax, ay]) => {
            let gate = CartanVector::new(ax, ay, cfg.alpha_z);
            let fractions = in_pool(threads, || entpower::inverse_reach_fraction(&gate, &cfg))?
                .map_err(Failure::from)?;
            ReachMap {
                rows: vec![ReachRow {
                    alpha_x: ax,
                    alpha_y: ay,
                    fractions,
                }],
            }
        }
        None => in_pool(threads, || entpower::weyl_sweep(&cfg))?.map_err(Failure::from)?,
    };

    let mut man = Manifest::new("inverse-scan");
    man.push_f64("alpha-z", cfg.alpha_z);
    man.push_f64("grid-step", cfg.alpha_grid_step);
    man.push("rot-axes", &axes_str);
    man.push_f64("rot-step", cfg.rot_step);
    man.push_f64("gamma-step", cfg.gamma_step);
    man.push_f64("tol-sep", cfg.tol_sep);
    man.push_f64("mems-phi", cfg.mems_phi);
    if let Some([ax, ay]) = only_cell {
        man.push("only-cell", format!("{ax:.17e},{ay:.17e}"));
    }
    if let Some(n) = threads {
        man.push("threads", n);
    }
    man.push("out", args.out.display());
    man.push("duration-ms", started.elapsed().as_millis());

    write_outputs(&args.out, &map.to_csv(), &man)?;
    println!(
        "wrote {} ({} cells) and {}",
        args.out.display(),
        map.rows.len(),
        Manifest::path_for(&args.out).display()
    );
    Ok(())
}

fn parse_axes(s: &str) -> Result<(Axis, Axis), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(usage(format!("expected two axes like z,z, got '{s}'")));
    }
    let a: Axis = parts[0].parse().map_err(Failure::from)?;
    let b: Axis = parts[1].parse().map_err(Failure::from)?;
    Ok((a, b))
}

// ---------------------------------------------------------------------------
// gate-info / mems-info
// ---------------------------------------------------------------------------

fn cmd_gate_info(args: GateInfoArgs) -> Result<(), Failure> {
    let [ax, ay, az] = parse_angle3(&args.alpha).map_err(usage)?;
    let v = CartanVector::new(ax, ay, az);
    let canonical = canonicalize(&v);
    let kernel = cartan_kernel(&v);
    let inv = local_invariants(&kernel).map_err(Failure::from)?;
    println!("alpha:     {}", format_vector(&v));
    println!("canonical: {}", format_vector(&canonical));
    println!(
        "canonical (rad): ({:.12}, {:.12}, {:.12})",
        canonical.alpha_x, canonical.alpha_y, canonical.alpha_z
    );
    println!("G1 = {:+.12}{:+.12}i", inv.g1.re, inv.g1.im);
    println!("G2 = {:+.12}", inv.g2);
    println!("kernel:");
    print_matrix(&kernel);
    Ok(())
}

fn cmd_mems_info(args: MemsInfoArgs) -> Result<(), Failure> {
    let gamma = match (args.gamma, args.mu, args.rank) {
        (Some(g), None, None) => g,
        (None, Some(mu), Some(rank)) => {
            let rank = match rank {
                2 => MemsRank::Two,
                3 => MemsRank::Three,
                other => return Err(usage(format!("rank must be 2 or 3, got {other}"))),
            };
            gamma_from_purity(mu, rank).map_err(Failure::from)?
        }
        (None, Some(_), None) => return Err(usage("--mu requires --rank 2|3")),
        _ => return Err(usage("pass either --gamma or (--mu and --rank)")),
    };
    let rho = mems(gamma, 0.0).map_err(Failure::from)?;
    let mu = mems_purity(gamma).map_err(Failure::from)?;
    let rank = if gamma >= 2.0 / 3.0 { 2 } else { 3 };
    println!("gamma = {gamma}");
    println!("purity = {mu} (rank {rank})");
    println!("concurrence = {}", concurrence(&rho));
    println!("eof = {}", eof(&rho));
    println!("matrix (phi = 0):");
    print_matrix(rho.matrix());
    Ok(())
}
