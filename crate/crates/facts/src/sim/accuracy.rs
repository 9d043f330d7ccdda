//! Complaints needed to trigger an audit, as a function of background load.

use std::io::Write;

use facts_core::{choose_params, TippingCurve};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::process::{TargetProcess, TauCache};
use super::stats::mean_std;
use crate::error::FactsError;

pub const CSV_HEADER: [&str; 5] = ["t", "background", "mean", "std", "rel_std_pct"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: u64,
    pub t: u64,
    pub lambda: u32,
    pub background_levels: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Background levels `{0, n/4, n/2, 3n/4, n - 2t}`.
    pub fn default_levels(n: u64, t: u64) -> Vec<u64> {
        vec![0, n / 4, n / 2, 3 * n / 4, n.saturating_sub(2 * t)]
    }

    pub fn new(n: u64, t: u64, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            n,
            t,
            lambda: facts_core::params::DEFAULT_LAMBDA,
            background_levels: Self::default_levels(n, t),
            trials,
            seed,
        }
    }

    fn validate(&self) -> Result<(), FactsError> {
        if self.trials == 0 {
            return Err(FactsError::Invalid("trials must be at least 1".into()));
        }
        if let Some(b) = self.background_levels.iter().find(|&&b| b > self.n) {
            return Err(FactsError::Invalid(format!("background level {b} exceeds n = {}", self.n)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub t: u64,
    pub background: u64,
    pub mean: f64,
    pub std: f64,
    pub rel_std_pct: f64,
}

/// For each background level, the mean and spread of the number of target
/// complaints until TestCount fires, over `trials` independent tables.
pub fn run_accuracy(cfg: &ExperimentConfig) -> Result<Vec<AccuracyRow>, FactsError> {
    cfg.validate()?;
    let params = choose_params(cfg.n, cfg.t)?.with_lambda(cfg.lambda)?;
    let curve = TippingCurve::new(params.s, params.u, params.v, params.t)?;
    let process = TargetProcess::new(params)?;
    // Far past any plausible audit point; hitting it is reported as an error.
    let cap = 20 * cfg.t + 1000;
    let mut rows = Vec::with_capacity(cfg.background_levels.len());
    for (level, &background) in cfg.background_levels.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(cfg.t << 16 | level as u64);
        let mut taus = TauCache::new(&curve, background);
        let seeded = process.background_sampler(background)?;
        let mut counts = Vec::with_capacity(cfg.trials);
        for _ in 0..cfg.trials {
            let start = process.seed_background(&seeded, background, &mut rng);
            let k = process
                .complaints_to_audit(start, &mut taus, cap, &mut rng)?
                .ok_or_else(|| FactsError::Invalid(format!("no audit within {cap} complaints")))?;
            counts.push(k as f64);
        }
        let (mean, std) = mean_std(&counts);
        rows.push(AccuracyRow {
            t: cfg.t,
            background,
            mean,
            std,
            rel_std_pct: std / mean * 100.0,
        });
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[AccuracyRow], out: W) -> Result<(), FactsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.background.to_string(),
            format!("{:.4}", r.mean),
            format!("{:.4}", r.std),
            format!("{:.4}", r.rel_std_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses rows written by [`write_csv`], insisting on the documented header.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<AccuracyRow>, FactsError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(FactsError::Invalid(format!(
            "expected header {}, found {}",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(FactsError::from)).collect()
}
