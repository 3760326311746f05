//! Command-line front end: flag parsing, experiment orchestration, CSV and
//! manifest emission for the `noma-sim` binary.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error. CSV columns are fixed,
//! floats carry six significant digits, lines end with `\n`, and reruns with
//! the same flags and seed produce byte-identical files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{ArgAction, Args, Parser, Subcommand};
use serde_json::json;

use crate::capacity::{capacity_sweep, CapacityGrid, CapacityRow};
use crate::constellation::{Constellation, ConstellationKind};
use crate::framing::{FramingConfig, FramingMode};
use crate::hadamard::SpreadingConfig;
use crate::harness::{run_point_at, BerRecord, SimConfig, UserClass};
use crate::receiver::{overload_margin, ReceiverConfig};

#[derive(Parser, Debug)]
#[command(
    name = "noma-sim",
    version,
    about = "Simulator for spread users superposed on a multicarrier downlink"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo bit-error-rate sweep over Eb/N0
    Ber(BerArgs),
    /// Closed-form two-user rate comparison (superposed vs orthogonal)
    Capacity(CapacityArgs),
    /// Worst-case interference eye diagnostic
    Margin(MarginArgs),
}

#[derive(Args, Debug)]
pub struct BerArgs {
    /// Carrier count (power of two)
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Spread user count
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Class-A constellation: qpsk | qam16
    #[arg(long, default_value = "qam16")]
    pub mod_a: String,
    /// Class-B constellation: qpsk | qam16
    #[arg(long, default_value = "qpsk")]
    pub mod_b: String,
    /// Cancellation passes
    #[arg(long, default_value_t = 2)]
    pub iters: usize,
    /// Eb/N0 grid in dB: a single value or start:stop:step (inclusive)
    #[arg(long, allow_hyphen_values = true)]
    pub ebn0: String,
    /// Class whose bit energy defines the sweep axis: a | b
    #[arg(long, default_value = "a")]
    pub ref_class: String,
    /// Master seed for the reproducible RNG streams
    #[arg(long, env = "NOMA_SIM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Target error count per (class, iteration) series at each point
    #[arg(long, default_value_t = 200)]
    pub min_errors: u64,
    /// Bit budget per class at each point
    #[arg(long, default_value_t = 100_000_000)]
    pub max_bits: u64,
    /// Cyclic prefix length (defaults to n/8 in ofdma mode)
    #[arg(long)]
    pub cp_len: Option<usize>,
    /// Waveform mode: ofdma | tdma
    #[arg(long, default_value = "ofdma")]
    pub mode: String,
    /// First spreading row (row 0 is the all-ones sequence)
    #[arg(long, default_value_t = 1)]
    pub row_offset: usize,
    /// Worker threads (0 = automatic)
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output base path; writes <out>.csv and <out>.manifest.json
    #[arg(long)]
    pub out: PathBuf,
    /// Fill the theory column (pass `--theory false` to leave it empty)
    #[arg(
        long,
        num_args = 0..=1,
        default_value_t = true,
        default_missing_value = "true",
        action = ArgAction::Set
    )]
    pub theory: bool,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    /// User-1 power share grid: value or start:stop:step
    #[arg(long, default_value = "0:1:0.1", allow_hyphen_values = true)]
    pub alpha: String,
    /// Total P/N0 grid (linear)
    #[arg(long, default_value = "15", allow_hyphen_values = true)]
    pub p_over_n0: String,
    /// User-2 attenuation grid in dB
    #[arg(long, allow_hyphen_values = true)]
    pub atten_db: Option<String>,
    /// Attenuation as a linear power division factor (alternative to --atten-db)
    #[arg(long, conflicts_with = "atten_db")]
    pub power_factor: Option<f64>,
    /// Output base path; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MarginArgs {
    /// Carrier count (power of two)
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Spread user count
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Class-A constellation: qpsk | qam16
    #[arg(long, default_value = "qam16")]
    pub mod_a: String,
    /// Class-B constellation: qpsk | qam16
    #[arg(long, default_value = "qpsk")]
    pub mod_b: String,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Ber(args) => cmd_ber(&args),
        Command::Capacity(args) => cmd_capacity(&args),
        Command::Margin(args) => cmd_margin(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Formats with six significant digits, choosing fixed or scientific
/// notation the way printf's %g does and trimming trailing zeros.
pub fn fmt_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    let sci = format!("{v:.5e}");
    let (mant, exp) = sci.split_once('e').expect("float format");
    let exp: i32 = exp.parse().expect("float exponent");
    if (-4..=5).contains(&exp) {
        let prec = (5 - exp).max(0) as usize;
        let fixed = format!("{v:.prec$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').into()
        } else {
            fixed
        }
    } else {
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{exp}")
    }
}

/// Expands `value` or `start:stop:step` into a grid, stop-inclusive within
/// half a step.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let scalar = |txt: &str| -> Result<f64, String> {
        txt.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{txt}' is not a number"))
    };
    match parts.as_slice() {
        [one] => {
            let v = scalar(one)?;
            if v.is_nan() {
                return Err("NaN is not a valid grid value".into());
            }
            Ok(vec![v])
        }
        [start, stop, step] => {
            let (start, stop, step) = (scalar(start)?, scalar(stop)?, scalar(step)?);
            if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
                return Err("grid endpoints and step must be finite".into());
            }
            if step <= 0.0 {
                return Err(format!("step must be > 0, got {step}"));
            }
            if stop < start {
                return Err(format!("stop {stop} is below start {start}"));
            }
            let mut out = Vec::new();
            loop {
                let v = start + out.len() as f64 * step;
                if v > stop + step / 2.0 {
                    break;
                }
                out.push(v);
                if out.len() > 10_000 {
                    return Err("grid exceeds 10000 points".into());
                }
            }
            Ok(out)
        }
        _ => Err(format!("'{s}' is not a value or start:stop:step")),
    }
}

fn path_with(base: &Path, suffix: &str) -> PathBuf {
    let mut os = base.as_os_str().to_os_string();
    os.push(suffix);
    PathBuf::from(os)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or_default()
        .as_secs()
}

fn usage<E: fmt::Display>(flag: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Usage(format!("{flag}: {e}"))
}

fn ber_csv(records: &[BerRecord], theory: bool) -> String {
    let mut out = String::from("ebn0_db_a,ebn0_db_b,class,iteration,bits,errors,ber,theory\n");
    for rec in records {
        let axis_a = fmt_g6(rec.ebn0_db_a);
        let axis_b = rec.ebn0_db_b.map(fmt_g6).unwrap_or_default();
        let mut push_rows = |class: &str, bits: u64, errors: &[u64], th: f64| {
            for (it, &e) in errors.iter().enumerate() {
                let ber = if bits == 0 { 0.0 } else { e as f64 / bits as f64 };
                let th_txt = if theory { fmt_g6(th) } else { String::new() };
                out.push_str(&format!(
                    "{axis_a},{axis_b},{class},{it},{bits},{e},{ber},{th}\n",
                    it = it + 1,
                    ber = fmt_g6(ber),
                    th = th_txt,
                ));
            }
        };
        push_rows("a", rec.class_a.bits, &rec.class_a.errors, rec.theory_a);
        if let Some(b) = &rec.class_b {
            push_rows("b", b.bits, &b.errors, rec.theory_b.unwrap_or(0.0));
        }
    }
    out
}

fn capacity_csv(rows: &[CapacityRow]) -> String {
    let mut out = String::from(
        "alpha,p_over_n0,atten2_db,r1_noma,r2_noma,r_noma,r1_owma,r2_owma,r_owma,gain_pct\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_g6(r.split.alpha),
            fmt_g6(r.split.p_over_n0),
            fmt_g6(r.split.atten2_db),
            fmt_g6(r.noma.r1),
            fmt_g6(r.noma.r2),
            fmt_g6(r.noma.total),
            fmt_g6(r.owma.r1),
            fmt_g6(r.owma.r2),
            fmt_g6(r.owma.total),
            fmt_g6(r.gain_pct),
        ));
    }
    out
}

fn cmd_ber(args: &BerArgs) -> Result<(), CliError> {
    let sweep = parse_sweep(&args.ebn0).map_err(usage("--ebn0"))?;
    let kind_a: ConstellationKind = args.mod_a.parse().map_err(usage("--mod-a"))?;
    let kind_b: ConstellationKind = args.mod_b.parse().map_err(usage("--mod-b"))?;
    let ref_class: UserClass = args.ref_class.parse().map_err(usage("--ref-class"))?;
    let mode: FramingMode = args.mode.parse().map_err(usage("--mode"))?;
    let spreading = SpreadingConfig::new(args.n, args.m, args.row_offset)
        .map_err(usage("--n/--m/--row-offset"))?;
    let receiver = ReceiverConfig::new(
        args.iters,
        Constellation::new(kind_a),
        Constellation::new(kind_b),
        spreading,
    )
    .map_err(usage("--iters"))?;
    let framing =
        FramingConfig::new(args.n, args.m, args.cp_len, mode).map_err(usage("--cp-len/--mode"))?;
    let mut cfg = SimConfig::new(framing, receiver, sweep, ref_class, args.seed)
        .map_err(usage("--ebn0/--ref-class"))?;
    cfg.min_errors = args.min_errors;
    cfg.max_bits = args.max_bits;
    cfg.validate().map_err(usage("--min-errors/--max-bits"))?;

    let started = unix_now();
    let run_all = || -> Result<(Vec<BerRecord>, Vec<f64>), CliError> {
        let mut records = Vec::with_capacity(cfg.sweep.len());
        let mut runtimes = Vec::with_capacity(cfg.sweep.len());
        for (i, &db) in cfg.sweep.iter().enumerate() {
            let t0 = Instant::now();
            let rec =
                run_point_at(&cfg, db, i).map_err(|e| CliError::Usage(format!("ber: {e}")))?;
            runtimes.push(t0.elapsed().as_secs_f64());
            records.push(rec);
        }
        Ok((records, runtimes))
    };
    let (records, runtimes) = if args.workers == 0 {
        run_all()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build()
            .map_err(|e| CliError::Usage(format!("--workers: {e}")))?;
        pool.install(run_all)?
    };
    let finished = unix_now();

    let csv_path = path_with(&args.out, ".csv");
    write_file(&csv_path, &ber_csv(&records, args.theory))?;
    let manifest = json!({
        "tool": "noma-sim",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "ber",
        "params": {
            "n": args.n,
            "m": args.m,
            "mod_a": kind_a.to_string(),
            "mod_b": kind_b.to_string(),
            "iters": args.iters,
            "ebn0": args.ebn0,
            "ebn0_db_resolved": cfg.sweep,
            "ref_class": ref_class.to_string(),
            "seed": args.seed,
            "min_errors": args.min_errors,
            "max_bits": args.max_bits,
            "cp_len": cfg.framing.cp_len,
            "mode": mode.to_string(),
            "row_offset": args.row_offset,
            "workers": args.workers,
            "theory": args.theory,
            "out": args.out.display().to_string(),
        },
        "master_seed": args.seed,
        "started_unix_s": started,
        "finished_unix_s": finished,
        "point_runtimes_s": runtimes,
        "capped": records.iter().map(|r| r.capped).collect::<Vec<bool>>(),
    });
    let manifest_path = path_with(&args.out, ".manifest.json");
    write_file(
        &manifest_path,
        &format!("{}\n", serde_json::to_string_pretty(&manifest).expect("manifest json")),
    )?;
    eprintln!(
        "wrote {} and {} ({} points)",
        csv_path.display(),
        manifest_path.display(),
        records.len()
    );
    Ok(())
}

fn cmd_capacity(args: &CapacityArgs) -> Result<(), CliError> {
    let alphas = parse_sweep(&args.alpha).map_err(usage("--alpha"))?;
    let p_over_n0s = parse_sweep(&args.p_over_n0).map_err(usage("--p-over-n0"))?;
    let atten2_dbs = match args.power_factor {
        Some(f) => {
            if !f.is_finite() || f < 1.0 {
                return Err(CliError::Usage(format!(
                    "--power-factor: must be finite and >= 1, got {f}"
                )));
            }
            vec![10.0 * f.log10()]
        }
        None => parse_sweep(args.atten_db.as_deref().unwrap_or("6.0206"))
            .map_err(usage("--atten-db"))?,
    };
    let grid = CapacityGrid {
        alphas,
        p_over_n0s,
        atten2_dbs,
    };
    let rows =
        capacity_sweep(&grid).map_err(usage("--alpha/--p-over-n0/--atten-db"))?;
    let csv = capacity_csv(&rows);
    match &args.out {
        None => {
            print!("{csv}");
        }
        Some(out) => {
            let started = unix_now();
            write_file(&path_with(out, ".csv"), &csv)?;
            let manifest = json!({
                "tool": "noma-sim",
                "version": env!("CARGO_PKG_VERSION"),
                "command": "capacity",
                "params": {
                    "alpha": args.alpha,
                    "p_over_n0": args.p_over_n0,
                    "atten_db": args.atten_db,
                    "power_factor": args.power_factor,
                    "atten2_db_resolved": grid.atten2_dbs,
                    "out": out.display().to_string(),
                },
                "master_seed": serde_json::Value::Null,
                "started_unix_s": started,
                "finished_unix_s": unix_now(),
                "point_runtimes_s": Vec::<f64>::new(),
                "capped": serde_json::Value::Null,
            });
            write_file(
                &path_with(out, ".manifest.json"),
                &format!("{}\n", serde_json::to_string_pretty(&manifest).expect("manifest json")),
            )?;
        }
    }
    Ok(())
}

fn cmd_margin(args: &MarginArgs) -> Result<(), CliError> {
    let kind_a: ConstellationKind = args.mod_a.parse().map_err(usage("--mod-a"))?;
    let kind_b: ConstellationKind = args.mod_b.parse().map_err(usage("--mod-b"))?;
    // The diagnostic is row-agnostic; any valid row assignment serves.
    let offset = if args.m == args.n { 0 } else { 1 };
    let spreading =
        SpreadingConfig::new(args.n, args.m, offset).map_err(usage("--n/--m"))?;
    let cfg = ReceiverConfig::new(
        1,
        Constellation::new(kind_a),
        Constellation::new(kind_b),
        spreading,
    )
    .map_err(usage("--n/--m"))?;
    print!("{}", overload_margin(&cfg));
    Ok(())
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
