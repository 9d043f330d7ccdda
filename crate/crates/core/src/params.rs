//! CCBF sizing.

use alloc::vec::Vec;

use crate::bounds::*;
use crate::error::ParamError;

/// Statistical parameter used when none is supplied.
pub const DEFAULT_LAMBDA: u32 = 40;

/// Table size `s`, set sizes `u` and `v`, plus the planning inputs they were
/// chosen for: the per-epoch complaint cap `n`, the audit threshold `t` and
/// the statistical security exponent `lambda_stat`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CcbfParams {
    pub s: u64,
    pub u: u64,
    pub v: u64,
    pub n: u64,
    pub t: u64,
    pub lambda_stat: u32,
}

/// One named lemma precondition, evaluated as `lhs <= rhs` (with slack).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precondition {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl Precondition {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + PRECONDITION_SLACK)
    }
}

impl CcbfParams {
    /// Validates the structural invariants only: `0 < u <= s`, `0 < v <= s`,
    /// `1 <= t <= n`. Hand-picked parameters are allowed to miss the
    /// accuracy preconditions; see [`CcbfParams::preconditions`].
    pub fn new(s: u64, u: u64, v: u64, n: u64, t: u64, lambda_stat: u32) -> Result<Self, ParamError> {
        if u == 0 || u > s {
            return Err(ParamError::UserSetSize { u, s });
        }
        if v == 0 || v > s {
            return Err(ParamError::ItemSetSize { v, s });
        }
        if t == 0 || t > n {
            return Err(ParamError::Threshold { t, n });
        }
        if lambda_stat == 0 {
            return Err(ParamError::Lambda);
        }
        Ok(CcbfParams {
            s,
            u,
            v,
            n,
            t,
            lambda_stat,
        })
    }

    pub fn with_lambda(mut self, lambda_stat: u32) -> Result<Self, ParamError> {
        if lambda_stat == 0 {
            return Err(ParamError::Lambda);
        }
        self.lambda_stat = lambda_stat;
        Ok(self)
    }

    /// Table size in bytes when packed.
    pub fn table_bytes(&self) -> u64 {
        self.s.div_ceil(8)
    }

    /// Every precondition of the fill-probability lemmas and the tail
    /// theorems, instantiated for these parameters with
    /// `tau <= 1.0520553 t` and the epoch load `m <= n`.
    pub fn preconditions(&self) -> Vec<Precondition> {
        let s = self.s as f64;
        let u = self.u as f64;
        let v = self.v as f64;
        let n = self.n as f64;
        let t = self.t as f64;
        let tau = TAU_UPPER_FACTOR * t;
        alloc::vec![
            Precondition {
                name: "v >= 7.042652 tau",
                lhs: LOWER_V_PER_TAU * tau,
                rhs: v,
            },
            Precondition {
                name: "u >= 0.5184846 s / tau",
                lhs: LOWER_U_SCALE * s / tau,
                rhs: u,
            },
            Precondition {
                name: "v >= 371",
                lhs: UPPER_V_MIN,
                rhs: v,
            },
            Precondition {
                name: "v <= 0.00386 s",
                lhs: v,
                rhs: UPPER_V_MAX_FRAC * s,
            },
            Precondition {
                name: "u <= 3.65151 s / v",
                lhs: u,
                rhs: UPPER_U_SCALE * s / v,
            },
            Precondition {
                name: "s >= 96 n",
                lhs: BITS_PER_COMPLAINT as f64 * n,
                rhs: s,
            },
            Precondition {
                name: "v <= 7.409 t",
                lhs: v,
                rhs: V_PER_T * t,
            },
            Precondition {
                name: "v <= 8 t",
                lhs: v,
                rhs: FP_V_MAX_PER_T * t,
            },
        ]
    }

    /// Fails with the first violated precondition.
    pub fn check_preconditions(&self) -> Result<(), ParamError> {
        match self.preconditions().into_iter().find(|p| !p.holds()) {
            Some(p) => Err(ParamError::Precondition {
                name: p.name,
                lhs: p.lhs,
                rhs: p.rhs,
            }),
            None => Ok(()),
        }
    }
}

/// Sizes a CCBF for at most `n` complaints per epoch and audit threshold `t`:
/// `s = 96 n`, `v = round(7.409 t)`, `u = round(47.31 n / t)`.
///
/// Requires `50 <= t <= n / 20`, and re-checks every accuracy precondition on
/// the rounded result.
pub fn choose_params(n: u64, t: u64) -> Result<CcbfParams, ParamError> {
    if t < T_MIN {
        return Err(ParamError::ThresholdTooSmall { t, min: T_MIN });
    }
    let max = n / N_PER_T_MIN;
    if t > max {
        return Err(ParamError::ThresholdTooLarge { t, max });
    }
    let s = BITS_PER_COMPLAINT * n;
    let v = libm::round(V_PER_T * t as f64) as u64;
    let u = libm::round(U_SCALE * n as f64 / t as f64) as u64;
    let params = CcbfParams::new(s, u, v, n, t, DEFAULT_LAMBDA)?;
    params.check_preconditions()?;
    Ok(params)
}
