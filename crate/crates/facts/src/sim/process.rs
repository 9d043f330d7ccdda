//! Counts-only simulation of one target item under fresh-user complaints.
//!
//! Tracking the whole table is unnecessary when every complainer is a fresh
//! user with a uniformly random user set and every background complaint is
//! on a fresh random item:
//!
//! * A background complaint writes a uniformly random zero bit, by symmetry
//!   over the zero positions. It lands in the target's item set with
//!   probability `(v - f) / (s - m)`.
//! * A target complaint's user set meets the item set in
//!   `K ~ Hypergeometric(s, v, u)` slots at uniformly random item positions.
//!   It fills a new item slot unless all `K` of them are already set, which
//!   happens with probability `C(f, K) / C(v, K)`. Otherwise it sets a zero
//!   bit elsewhere.
//!
//! Only `m` (bits set in the table) and `f` (bits set in the item set)
//! matter to TestCount, so a trial costs O(complaints). A complainer whose
//! whole user set is already full would abort; at any table load below
//! `s - u` that has probability below `(m/s)^u`, and the model ignores it.

use facts_core::{intersection_prob, CcbfParams, TippingCurve};
use rand::Rng;

use crate::error::FactsError;

/// Inverse-CDF sampler for `|A ∩ B|`, where `A` and `B` are uniform random
/// subsets of `0..s` of sizes `a` and `b`. The negligible far tail (mass
/// below 1e-17 per value past the mean) is dropped.
#[derive(Debug, Clone)]
pub struct OverlapSampler {
    first: u64,
    cdf: Vec<f64>,
}

impl OverlapSampler {
    pub fn new(s: u64, a: u64, b: u64) -> Result<Self, FactsError> {
        let (hi, lo) = (a.max(b), a.min(b));
        if hi > s {
            return Err(FactsError::Invalid(format!("subset size {hi} exceeds {s}")));
        }
        let first = (a + b).saturating_sub(s);
        let mean = a as f64 * b as f64 / s.max(1) as f64;
        let mut cdf = Vec::new();
        let mut total = 0.0;
        for k in first..=lo {
            let p = intersection_prob(s, hi, lo, k)?;
            total += p;
            cdf.push(total);
            if k as f64 > mean && p < 1e-17 {
                break;
            }
        }
        for c in &mut cdf {
            *c /= total;
        }
        Ok(OverlapSampler { first, cdf })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let x: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= x).min(self.cdf.len() - 1);
        self.first + i as u64
    }
}

/// Tipping points for table loads `base, base + 1, ..`, filled on demand.
pub struct TauCache<'a> {
    curve: &'a TippingCurve,
    base: u64,
    taus: Vec<u64>,
}

impl<'a> TauCache<'a> {
    pub fn new(curve: &'a TippingCurve, base: u64) -> Self {
        TauCache {
            curve,
            base,
            taus: Vec::new(),
        }
    }

    pub fn tau(&mut self, m: u64) -> Result<u64, FactsError> {
        let off = m
            .checked_sub(self.base)
            .ok_or_else(|| FactsError::Invalid(format!("load {m} below cache base {}", self.base)))?
            as usize;
        while self.taus.len() <= off {
            let load = self.base + self.taus.len() as u64;
            self.taus.push(self.curve.tau(load)?);
        }
        Ok(self.taus[off])
    }
}

/// State of the target item: table load `m` and filled item slots `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetState {
    pub m: u64,
    pub f: u64,
}

pub struct TargetProcess {
    params: CcbfParams,
    overlap: OverlapSampler,
}

impl TargetProcess {
    pub fn new(params: CcbfParams) -> Result<Self, FactsError> {
        let overlap = OverlapSampler::new(params.s, params.v, params.u)?;
        Ok(TargetProcess { params, overlap })
    }

    pub fn params(&self) -> &CcbfParams {
        &self.params
    }

    /// Sampler for the item bits already set by `background` complaints on
    /// other items: they occupy a uniformly random `background`-subset.
    pub fn background_sampler(&self, background: u64) -> Result<OverlapSampler, FactsError> {
        OverlapSampler::new(self.params.s, self.params.v, background)
    }

    /// State after `background` complaints on other items.
    pub fn seed_background<R: Rng + ?Sized>(&self, background: &OverlapSampler, m: u64, rng: &mut R) -> TargetState {
        TargetState { m, f: background.sample(rng) }
    }

    /// One background complaint on a fresh item.
    pub fn background_step<R: Rng + ?Sized>(&self, st: &mut TargetState, rng: &mut R) {
        let p = &self.params;
        if st.m >= p.s {
            return;
        }
        if rng.gen_range(0..p.s - st.m) < p.v - st.f {
            st.f += 1;
        }
        st.m += 1;
    }

    /// One complaint on the target by a fresh user.
    pub fn target_step<R: Rng + ?Sized>(&self, st: &mut TargetState, rng: &mut R) {
        let v = self.params.v;
        let k = self.overlap.sample(rng);
        if k > 0 && st.f < v {
            // P(all k overlapping item slots are already filled).
            let all_full = if k > st.f {
                0.0
            } else {
                (0..k).map(|i| (st.f - i) as f64 / (v - i) as f64).product::<f64>()
            };
            if rng.gen::<f64>() >= all_full {
                st.f += 1;
            }
        }
        st.m += 1;
    }

    /// Complaints on the target until TestCount first fires, starting from
    /// `st`. Gives up (returns `None`) after `cap` complaints.
    pub fn complaints_to_audit<R: Rng + ?Sized>(
        &self,
        mut st: TargetState,
        taus: &mut TauCache<'_>,
        cap: u64,
        rng: &mut R,
    ) -> Result<Option<u64>, FactsError> {
        for k in 0..=cap {
            if st.f >= taus.tau(st.m)? {
                return Ok(Some(k));
            }
            self.target_step(&mut st, rng);
        }
        Ok(None)
    }
}
