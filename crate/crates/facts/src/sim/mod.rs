//! Experiment harness: accuracy and tail-bound simulations, the Monte Carlo
//! tipping-point oracle, live throughput measurement and plot output.

pub mod accuracy;
pub mod oracle;
pub mod plot;
pub mod process;
pub mod stats;
pub mod tail;
pub mod throughput;

pub use accuracy::{run_accuracy, AccuracyRow, ExperimentConfig};
pub use oracle::{mc_tipping_oracle, OracleResult};
pub use plot::emit_plots;
pub use tail::{run_tail_check, TailConfig, TailReport};
pub use throughput::{run_throughput, ThroughputConfig, ThroughputReport};
