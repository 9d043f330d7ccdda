//! Empirical false-positive and false-negative rates of TestCount at the
//! complaint counts where the tail bounds apply.

use facts_core::{choose_params, tail_thresholds, TippingCurve};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::process::{TargetProcess, TauCache};
use crate::error::FactsError;

#[derive(Debug, Clone, PartialEq)]
pub struct TailConfig {
    pub n: u64,
    pub t: u64,
    pub lambda: u32,
    pub trials: usize,
    /// Complaints on other items before the target is complained about.
    pub background: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailReport {
    /// Complaints issued in the false-positive arm.
    pub fp_count: u64,
    /// Complaints issued in the false-negative arm.
    pub fn_count: u64,
    pub fp_failures: usize,
    pub fn_failures: usize,
    pub trials: usize,
    /// The false-positive count was not positive, so that arm is skipped.
    pub fp_vacuous: bool,
}

impl TailReport {
    pub fn fp_rate(&self) -> f64 {
        self.fp_failures as f64 / self.trials as f64
    }

    pub fn fn_rate(&self) -> f64 {
        self.fn_failures as f64 / self.trials as f64
    }
}

/// FP arm: `floor(t - 2.1 sqrt(lambda t))` complaints must leave TestCount
/// false. FN arm: `ceil(1.1t + 0.4 lambda + 0.7 sqrt(lambda t))` complaints
/// must make it true.
pub fn run_tail_check(cfg: &TailConfig) -> Result<TailReport, FactsError> {
    if cfg.trials == 0 {
        return Err(FactsError::Invalid("trials must be at least 1".into()));
    }
    let params = choose_params(cfg.n, cfg.t)?.with_lambda(cfg.lambda)?;
    let bounds = tail_thresholds(cfg.t, cfg.lambda)?;
    let curve = TippingCurve::new(params.s, params.u, params.v, params.t)?;
    let process = TargetProcess::new(params)?;
    let mut taus = TauCache::new(&curve, cfg.background);
    let seeded = process.background_sampler(cfg.background)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let fp_count = bounds.fp_complaints();
    let fn_count = bounds.fn_complaints();
    let mut arm = |count: u64, rng: &mut ChaCha8Rng| -> Result<bool, FactsError> {
        let mut st = process.seed_background(&seeded, cfg.background, rng);
        for _ in 0..count {
            process.target_step(&mut st, rng);
        }
        Ok(st.f >= taus.tau(st.m)?)
    };
    let mut fp_failures = 0;
    let mut fn_failures = 0;
    for _ in 0..cfg.trials {
        if !bounds.fp_is_vacuous() && arm(fp_count, &mut rng)? {
            fp_failures += 1;
        }
        if !arm(fn_count, &mut rng)? {
            fn_failures += 1;
        }
    }
    Ok(TailReport {
        fp_count,
        fn_count,
        fp_failures,
        fn_failures,
        trials: cfg.trials,
        fp_vacuous: bounds.fp_is_vacuous(),
    })
}
