//! Complaint counts at which TestCount errors become `2^-lambda`-rare.

use crate::bounds::*;
use crate::error::ParamError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailThresholds {
    /// At or below this many true complaints a positive is `2^-lambda`-rare.
    pub fp_safe_count: f64,
    /// At or above this many true complaints a negative is `2^-lambda`-rare.
    pub fn_safe_count: f64,
    /// Upper bound on the tipping point, `1.0520553 t`.
    pub tau_upper: f64,
}

impl TailThresholds {
    /// The false-positive guarantee says nothing when its count is not positive.
    pub fn fp_is_vacuous(&self) -> bool {
        self.fp_safe_count <= 0.0
    }

    /// Largest whole complaint count covered by the false-positive bound.
    pub fn fp_complaints(&self) -> u64 {
        libm::floor(self.fp_safe_count.max(0.0)) as u64
    }

    /// Smallest whole complaint count covered by the false-negative bound.
    pub fn fn_complaints(&self) -> u64 {
        libm::ceil(self.fn_safe_count) as u64
    }
}

pub fn tail_thresholds(t: u64, lambda_stat: u32) -> Result<TailThresholds, ParamError> {
    if t == 0 {
        return Err(ParamError::Threshold { t, n: 0 });
    }
    if lambda_stat == 0 {
        return Err(ParamError::Lambda);
    }
    let t = t as f64;
    let lambda = f64::from(lambda_stat);
    let root = libm::sqrt(lambda * t);
    Ok(TailThresholds {
        fp_safe_count: t - FP_SQRT_COEFF * root,
        fn_safe_count: FN_T_COEFF * t + FN_LAMBDA_COEFF * lambda + FN_SQRT_COEFF * root,
        tau_upper: TAU_UPPER_FACTOR * t,
    })
}
