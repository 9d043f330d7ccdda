//! Exact tipping-point computation.
//!
//! Notation follows the table: `s` bits, user sets of size `u`, item sets of
//! size `v`, `m` bits already set by other complaints, and threshold `t`.
//!
//! * `p_w`: probability that a fresh user can fill one of `w` empty item
//!   slots: `1 - (s-u)_w / (s)_w`.
//! * `R_{w,k}`: expected empty item slots after `k` increments on the item
//!   starting from `w` empty: `R_{w,k} = p_w R_{w-1,k-1} + (1-p_w) R_{w,k-1}`,
//!   with `R_{0,k} = 0` and `R_{w,0} = w`.
//! * `q_w`: probability that `m` background bits leave exactly `w` of the
//!   item's `v` slots empty (a hypergeometric law).
//! * `tau = round(v - Σ_w q_w R_{w,t})`.
//!
//! Falling-factorial ratios are evaluated as products of per-term ratios in
//! `f64`, multiplied in an order that keeps partial products near 1.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::ParamError;

/// Product of `num[i] / den[i]`, multiplying ratios above and below 1
/// alternately so the running value neither overflows nor underflows early.
fn balanced_product(num: impl Iterator<Item = f64>, den: impl Iterator<Item = f64>) -> f64 {
    let mut big = Vec::new();
    let mut small = Vec::new();
    for (a, b) in num.zip(den) {
        let r = a / b;
        if r == 0.0 {
            return 0.0;
        }
        if r >= 1.0 {
            big.push(r);
        } else {
            small.push(r);
        }
    }
    let mut acc = 1.0f64;
    loop {
        let next = if acc >= 1.0 {
            small.pop().or_else(|| big.pop())
        } else {
            big.pop().or_else(|| small.pop())
        };
        match next {
            Some(r) => acc *= r,
            None => return acc,
        }
    }
}

/// `P(|A ∩ B| = k)` for uniform random `A`, `B` of sizes `a`, `b` in `0..s`,
/// without any argument-order requirement.
fn hypergeometric(s: u64, a: u64, b: u64, k: u64) -> f64 {
    if k > a || k > b || b - k > s - a {
        return 0.0;
    }
    // (a)_k (b)_k (s-a)_{b-k} / ((s)_b k!), with b + k factors on each side.
    let num = (0..k)
        .map(|i| (a - i) as f64)
        .chain((0..k).map(|i| (b - i) as f64))
        .chain((0..b - k).map(|i| (s - a - i) as f64));
    let den = (0..b)
        .map(|i| (s - i) as f64)
        .chain((0..k).map(|i| (i + 1) as f64));
    balanced_product(num, den)
}

/// Probability that a size-`b` and a size-`a` subset of an `s`-set meet in
/// exactly `k` elements. Requires `k <= b <= a <= s`.
pub fn intersection_prob(s: u64, a: u64, b: u64, k: u64) -> Result<f64, ParamError> {
    if !(k <= b && b <= a && a <= s) {
        return Err(ParamError::ArgumentOrder("0 <= k <= b <= a <= s"));
    }
    Ok(hypergeometric(s, a, b, k))
}

/// `p_w = 1 - (s-u)_w / (s)_w`.
pub fn fill_probability(s: u64, u: u64, w: u64) -> Result<f64, ParamError> {
    if u > s {
        return Err(ParamError::UserSetSize { u, s });
    }
    if w > s {
        return Err(ParamError::ArgumentOrder("w <= s"));
    }
    if w > s - u {
        return Ok(1.0);
    }
    let miss = balanced_product(
        (0..w).map(|i| (s - u - i) as f64),
        (0..w).map(|i| (s - i) as f64),
    );
    Ok(1.0 - miss)
}

/// `p_0 ..= p_v` in O(v), each miss ratio extended by one factor.
pub fn fill_probabilities(s: u64, u: u64, v: u64) -> Vec<f64> {
    let mut p = Vec::with_capacity(v as usize + 1);
    let mut miss = 1.0f64;
    p.push(0.0);
    for w in 1..=v {
        let i = w - 1;
        miss = if s - u > i {
            miss * ((s - u - i) as f64 / (s - i) as f64)
        } else {
            0.0
        };
        p.push(1.0 - miss);
    }
    p
}

/// `q_0 ..= q_v`: the law of the number of empty item slots after `m`
/// uniformly placed background bits.
///
/// The value at the mode comes from the direct product; neighbours follow by
/// the O(1) hypergeometric ratio, so the whole vector costs O(v).
pub fn unfilled_distribution(s: u64, m: u64, v: u64) -> Vec<f64> {
    let mut q = vec![0.0; v as usize + 1];
    // j = number of filled slots = v - w.
    let lo = (v + m).saturating_sub(s);
    let hi = m.min(v);
    let mode = (((m as f64 + 1.0) * (v as f64 + 1.0)) / (s as f64 + 2.0)) as u64;
    let mode = mode.clamp(lo, hi);
    let at_mode = hypergeometric(s, m, v, mode);
    q[(v - mode) as usize] = at_mode;

    let mut f = at_mode;
    for j in mode..hi {
        // f(j+1) / f(j) = (m-j)(v-j) / ((j+1)(s-m-v+j+1))
        f *= ((m - j) as f64 * (v - j) as f64) / ((j + 1) as f64 * (s + j + 1 - m - v) as f64);
        q[(v - j - 1) as usize] = f;
    }
    let mut f = at_mode;
    for j in (lo + 1..=mode).rev() {
        // f(j-1) / f(j) = j (s-m-v+j) / ((m-j+1)(v-j+1))
        f *= (j as f64 * (s + j - m - v) as f64) / ((m - j + 1) as f64 * (v - j + 1) as f64);
        q[(v - j + 1) as usize] = f;
    }
    q
}

fn check_sizes(s: u64, u: u64, v: u64) -> Result<(), ParamError> {
    if u > s {
        return Err(ParamError::UserSetSize { u, s });
    }
    if v > s {
        return Err(ParamError::ItemSetSize { v, s });
    }
    Ok(())
}

/// `R_{w,t}` for `0 <= w <= v`, by the fill recurrence in O(t v) time and
/// O(v) space.
pub fn r_table(s: u64, u: u64, v: u64, t: u64) -> Result<Vec<f64>, ParamError> {
    check_sizes(s, u, v)?;
    let p = fill_probabilities(s, u, v);
    Ok(r_row_from(&p, t))
}

fn r_row_from(p: &[f64], t: u64) -> Vec<f64> {
    let mut r: Vec<f64> = (0..p.len()).map(|w| w as f64).collect();
    for _ in 0..t {
        // Descending w reads R_{w-1,k-1} before it is overwritten.
        for w in (1..r.len()).rev() {
            r[w] = p[w] * r[w - 1] + (1.0 - p[w]) * r[w];
        }
    }
    r
}

/// The `m`-independent part of the tipping point for fixed `(s, u, v, t)`.
/// Evaluating at a given table load then costs O(v).
#[derive(Debug, Clone)]
pub struct TippingCurve {
    s: u64,
    v: u64,
    r_row: Vec<f64>,
}

impl TippingCurve {
    pub fn new(s: u64, u: u64, v: u64, t: u64) -> Result<Self, ParamError> {
        Ok(TippingCurve {
            s,
            v,
            r_row: r_table(s, u, v, t)?,
        })
    }

    /// Expected filled item slots after `t` increments on the item, with `m`
    /// other bits set: `v - Σ q_w R_{w,t}`.
    pub fn expected_filled(&self, m: u64) -> Result<f64, ParamError> {
        if m > self.s {
            return Err(ParamError::TableLoad { m, s: self.s });
        }
        let q = unfilled_distribution(self.s, m, self.v);
        let empty: f64 = q.iter().zip(&self.r_row).map(|(q, r)| q * r).sum();
        Ok((self.v as f64 - empty).max(0.0))
    }

    /// The tipping point, rounded half away from zero.
    pub fn tau(&self, m: u64) -> Result<u64, ParamError> {
        Ok(libm::round(self.expected_filled(m)?) as u64)
    }
}

/// Every intermediate vector of one tipping-point evaluation.
#[derive(Debug, Clone)]
pub struct TippingTables {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r_row: Vec<f64>,
    pub s: u64,
    pub u: u64,
    pub v: u64,
    pub m: u64,
    pub t: u64,
}

impl TippingTables {
    pub fn compute(s: u64, u: u64, v: u64, m: u64, t: u64) -> Result<Self, ParamError> {
        check_sizes(s, u, v)?;
        if m > s {
            return Err(ParamError::TableLoad { m, s });
        }
        let p = fill_probabilities(s, u, v);
        let r_row = r_row_from(&p, t);
        let q = unfilled_distribution(s, m, v);
        Ok(TippingTables {
            p,
            q,
            r_row,
            s,
            u,
            v,
            m,
            t,
        })
    }

    pub fn expected_filled(&self) -> f64 {
        let empty: f64 = self.q.iter().zip(&self.r_row).map(|(q, r)| q * r).sum();
        (self.v as f64 - empty).max(0.0)
    }

    pub fn tau(&self) -> u64 {
        libm::round(self.expected_filled()) as u64
    }
}

/// `tau = round(v - Σ_w q_w R_{w,t})`.
pub fn tipping_point(s: u64, u: u64, v: u64, m: u64, t: u64) -> Result<u64, ParamError> {
    Ok(TippingTables::compute(s, u, v, m, t)?.tau())
}
