mod commands;
mod records;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    cmd_bounds_table, cmd_estimate, cmd_exact, cmd_verify, AttackName, CheckName, CliError,
    ExactParams, VerifyParams,
};
use records::{
    bounds_rows_to_csv, bounds_rows_to_json, exact_records_to_csv, exact_records_to_json,
    verify_records_to_json, OutputFormat,
};

/// Numerical laboratory for Haar-measure encryption: Monte Carlo attack
/// estimates, exact values and bounds, figure-data sweeps, and
/// Weingarten-moment certification.
#[derive(Parser)]
#[command(name = "untelegraph", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate of a Haar-averaged attack value
    Estimate {
        /// Attack to evaluate per sampled key
        #[arg(long, value_enum)]
        attack: AttackName,
        /// Ciphertext rank r (dimension is d = r·n)
        #[arg(long)]
        r: usize,
        /// Message count
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Copies for the majority attack
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// First message of the distinguishing pair
        #[arg(long, default_value_t = 0)]
        m0: usize,
        /// Second message of the distinguishing pair
        #[arg(long, default_value_t = 1)]
        m1: usize,
        /// Number of independent Haar keys
        #[arg(long)]
        samples: usize,
        /// Master seed; sample i uses stream (seed, i)
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per reduction chunk (fixed reduction order)
        #[arg(long, default_value_t = untelegraph_core::estimator::DEFAULT_CHUNK_SIZE)]
        chunk_size: usize,
        /// Confidence-interval width in standard errors
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Write to a file instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form values and bounds
    Exact {
        /// One of: bit, distinguish, majority, majority-brackets,
        /// multimessage, bit-brackets, telegraphing-lower, bit-upper,
        /// tcopy-upper, collusion-upper, equivalence-gap, general-lower,
        /// tcopy-brackets, beta
        #[arg(long)]
        formula: String,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        /// Collusion round count
        #[arg(long = "Q")]
        q: Option<usize>,
        /// Per-round success probability
        #[arg(long)]
        p: Option<f64>,
        /// Per-round advantage over 1/2
        #[arg(long)]
        delta: Option<f64>,
        /// Ciphertext dimension
        #[arg(long)]
        d: Option<usize>,
        /// Restricted message count (equivalence-gap, general-lower)
        #[arg(long = "N")]
        n_receivers: Option<usize>,
        /// Receiver count (equivalence-gap)
        #[arg(long)]
        s: Option<usize>,
        /// Ciphertext operator-norm bound η
        #[arg(long)]
        eta: Option<f64>,
        /// Total message count (general-lower)
        #[arg(long = "M")]
        m_count: Option<usize>,
        /// Incomplete-beta first parameter
        #[arg(long)]
        a: Option<f64>,
        /// Incomplete-beta second parameter
        #[arg(long)]
        b: Option<f64>,
        /// Series truncation tolerance (multimessage)
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also report the smallest s pushing the gap to this target
        #[arg(long)]
        gap_target: Option<f64>,
        /// Evaluate the gap with a natural instead of binary logarithm
        #[arg(long, default_value_t = false)]
        natural_log: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep of bit-attack bounds over even ciphertext dimensions
    BoundsTable {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long)]
        d_max: usize,
        #[arg(long, default_value_t = 2)]
        step: usize,
        /// Add Monte Carlo cross-check columns with this many samples per row
        #[arg(long)]
        mc_samples: Option<usize>,
        /// Base seed; the row at dimension d uses seed + d
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = untelegraph_core::estimator::DEFAULT_CHUNK_SIZE)]
        chunk_size: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weingarten-moment certification checks (JSON report, exit 1 on failure)
    Verify {
        /// Check to run
        #[arg(long, value_enum)]
        check: CheckName,
        /// Ciphertext dimension for moment checks
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// Moment order
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Scheme rank for deviation checks
        #[arg(long, default_value_t = 16)]
        r: usize,
        /// Scheme message count for deviation checks
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Random inputs per check
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated copy counts per message for mixed-moment
        #[arg(long, default_value = "1,1")]
        k_parts: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    match std::env::var("UNTELEGRAPH_THREADS") {
        Ok(raw) => {
            let threads: usize = raw.parse().map_err(|_| {
                CliError::usage(format!("UNTELEGRAPH_THREADS='{raw}' is not a thread count"))
            })?;
            if threads == 0 {
                return Err(CliError::usage("UNTELEGRAPH_THREADS must be ≥ 1"));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::usage(format!("failed to build thread pool: {e}")))
        }
        Err(_) => Ok(()),
    }
}

fn emit(content: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::usage(format!("cannot write to stdout: {e}"))),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Estimate {
            attack,
            r,
            n,
            t,
            m0,
            m1,
            samples,
            seed,
            chunk_size,
            z,
            format,
            out,
        } => {
            let rec = cmd_estimate(attack, r, n, t, m0, m1, samples, seed, chunk_size, z)?;
            let content = match format {
                OutputFormat::Csv => rec.to_csv(),
                OutputFormat::Json => rec.to_json(),
            };
            emit(&content, out.as_ref())?;
            Ok(0)
        }
        Command::Exact {
            formula,
            r,
            n,
            t,
            q,
            p,
            delta,
            d,
            n_receivers,
            s,
            eta,
            m_count,
            a,
            b,
            tol,
            gap_target,
            natural_log,
            format,
            out,
        } => {
            let params = ExactParams {
                r,
                n,
                t,
                q,
                p,
                delta,
                d,
                n_receivers,
                s,
                eta,
                m_count,
                a,
                b,
                tol,
                gap_target,
                natural_log,
            };
            let recs = cmd_exact(&formula, &params)?;
            let content = match format {
                OutputFormat::Csv => exact_records_to_csv(&recs),
                OutputFormat::Json => exact_records_to_json(&recs),
            };
            emit(&content, out.as_ref())?;
            Ok(0)
        }
        Command::BoundsTable {
            d_min,
            d_max,
            step,
            mc_samples,
            seed,
            chunk_size,
            format,
            out,
        } => {
            let rows = cmd_bounds_table(d_min, d_max, step, mc_samples, seed, chunk_size)?;
            let content = match format {
                OutputFormat::Csv => bounds_rows_to_csv(&rows, mc_samples.is_some()),
                OutputFormat::Json => bounds_rows_to_json(&rows),
            };
            emit(&content, out.as_ref())?;
            Ok(0)
        }
        Command::Verify {
            check,
            d,
            k,
            r,
            n,
            trials,
            seed,
            k_parts,
            out,
        } => {
            let parts: Vec<usize> = k_parts
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse()
                        .map_err(|_| CliError::usage(format!("bad --k-parts entry '{tok}'")))
                })
                .collect::<Result<_, _>>()?;
            let params = VerifyParams { d, k, r, n, trials, seed, k_parts: parts };
            let (records, all_pass) = cmd_verify(check, &params)?;
            emit(&verify_records_to_json(&records), out.as_ref())?;
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 2 on usage errors, 0 for --help/--version
            e.exit();
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {}", e.message);
        return ExitCode::from(e.code);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
