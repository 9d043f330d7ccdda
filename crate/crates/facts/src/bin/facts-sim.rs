use std::fs::File;
use std::io;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use facts::sim::accuracy::write_csv;
use facts::sim::{
    emit_plots, mc_tipping_oracle, run_accuracy, run_tail_check, run_throughput, ExperimentConfig,
    TailConfig, ThroughputConfig,
};
use facts_core::params::DEFAULT_LAMBDA;
use facts_core::tipping_point;

/// FACTS experiment harness.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Complaints needed to trigger an audit versus background complaints.
    Accuracy {
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        /// One or more thresholds, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "100")]
        t: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: u32,
        /// Background levels, comma separated (default 0, n/4, n/2, 3n/4, n-2t).
        #[arg(long, value_delimiter = ',')]
        background: Option<Vec<u64>>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV output (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical false-positive / false-negative rates at the tail-bound counts.
    Tail {
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 100)]
        t: u64,
        #[arg(long, default_value_t = 10)]
        lambda: u32,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        background: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Sustained complaints per second against a local server.
    Throughput {
        #[arg(long, default_value_t = 0)]
        latency_ms: u64,
        #[arg(long, default_value_t = 8)]
        clients: usize,
        #[arg(long, default_value_t = 3.0)]
        seconds: f64,
        /// Link rate under injected latency.
        #[arg(long, default_value_t = 8.0)]
        bandwidth_mbps: f64,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 100)]
        t: u64,
    },
    /// Monte Carlo estimate of the filled item slots after t increments.
    Oracle {
        #[arg(long)]
        s: u64,
        #[arg(long)]
        u: u64,
        #[arg(long)]
        v: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = 100_000)]
        runs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// gnuplot data and script from an accuracy CSV.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().cmd {
        Cmd::Accuracy {
            n,
            t,
            lambda,
            background,
            trials,
            seed,
            out,
        } => {
            let mut rows = Vec::new();
            for t in t {
                let cfg = ExperimentConfig {
                    n,
                    t,
                    lambda,
                    background_levels: background.clone().unwrap_or_else(|| ExperimentConfig::default_levels(n, t)),
                    trials,
                    seed,
                };
                rows.extend(run_accuracy(&cfg)?);
            }
            match out {
                Some(p) => write_csv(&rows, File::create(&p).with_context(|| format!("creating {}", p.display()))?)?,
                None => write_csv(&rows, io::stdout().lock())?,
            }
        }
        Cmd::Tail {
            n,
            t,
            lambda,
            trials,
            background,
            seed,
        } => {
            let r = run_tail_check(&TailConfig {
                n,
                t,
                lambda,
                trials,
                background,
                seed,
            })?;
            if r.fp_vacuous {
                eprintln!("warning: t - 2.1 sqrt(lambda t) <= 0, the false-positive bound is vacuous");
            } else {
                println!(
                    "false positives: {}/{} at {} complaints (rate {:.4})",
                    r.fp_failures,
                    r.trials,
                    r.fp_count,
                    r.fp_rate()
                );
            }
            println!(
                "false negatives: {}/{} at {} complaints (rate {:.4})",
                r.fn_failures,
                r.trials,
                r.fn_count,
                r.fn_rate()
            );
        }
        Cmd::Throughput {
            latency_ms,
            clients,
            seconds,
            bandwidth_mbps,
            n,
            t,
        } => {
            let latency = Duration::from_millis(latency_ms);
            let r = run_throughput(&ThroughputConfig {
                n,
                t,
                clients,
                latency,
                bandwidth_bps: Some((bandwidth_mbps * 1e6) as u64),
                duration: Duration::from_secs_f64(seconds),
                ..ThroughputConfig::default()
            })?;
            println!("accepted complaints/sec: {:.1} ({} in {:?})", r.per_sec, r.accepted, r.window);
            if let Some(m) = r.model_per_sec {
                println!("two-round lock model:    {m:.1}");
            }
            println!("snapshot payload:        {} bytes", r.snapshot_payload_bytes);
            println!("mean lock hold:          {:?}", r.mean_lock_hold);
            println!("mean begin -> snapshot:  {:?} (includes queueing)", r.mean_begin_to_snapshot);
            println!("mean index round trip:   {:?}", r.mean_index_round_trip);
            println!(
                "mean originate:          {:?} ({:?} beyond injected latency)",
                r.mean_originate,
                r.originate_overhead(latency)
            );
        }
        Cmd::Oracle {
            s,
            u,
            v,
            m,
            t,
            runs,
            seed,
        } => {
            let r = mc_tipping_oracle(s, u, v, m, t, runs, seed)?;
            println!("simulated filled slots: {:.4} ± {:.4} ({} runs)", r.mean, r.std_err, r.runs);
            println!("rounded:                {}", r.mean.round());
            println!("tipping point:          {}", tipping_point(s, u, v, m, t)?);
        }
        Cmd::Plot { input, out } => {
            for f in emit_plots(&input, &out)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}
