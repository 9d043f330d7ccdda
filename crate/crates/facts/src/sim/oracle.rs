//! Direct Monte Carlo of the tipping point on a real bit table, used as an
//! oracle for the closed-form recurrence. It shares nothing with that math
//! beyond the CCBF table and increment.

use facts_core::{increment, BitTable, IndexSet, SetKind};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::FactsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    /// Mean filled item slots.
    pub mean: f64,
    /// Standard error of the mean.
    pub std_err: f64,
    pub runs: usize,
}

fn random_set<R: Rng + ?Sized>(kind: SetKind, s: u64, k: u64, rng: &mut R) -> IndexSet {
    let idx = sample(rng, s as usize, k as usize).into_iter().map(|i| i as u64).collect();
    IndexSet::from_indices(kind, b"", s, idx).expect("sampled indices are distinct and in range")
}

/// Fills `m` random background bits, then applies `t` increments on one
/// random item by fresh random users; reports the mean number of set item
/// bits over `runs` tables.
pub fn mc_tipping_oracle(s: u64, u: u64, v: u64, m: u64, t: u64, runs: usize, seed: u64) -> Result<OracleResult, FactsError> {
    if u == 0 || u > s || v == 0 || v > s || m > s || runs == 0 {
        return Err(FactsError::Invalid(format!(
            "oracle needs 0 < u, v <= s, m <= s and runs > 0 (s={s} u={u} v={v} m={m} runs={runs})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = BitTable::new(s);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..runs {
        table.clear();
        for i in sample(&mut rng, s as usize, m as usize) {
            table.set(i as u64);
        }
        let item = random_set(SetKind::Item, s, v, &mut rng);
        for _ in 0..t {
            let user = random_set(SetKind::User, s, u, &mut rng);
            increment(&mut table, &user, &item, &mut rng)?;
        }
        let filled = table.count_ones_in(&item) as f64;
        sum += filled;
        sum_sq += filled * filled;
    }
    let n = runs as f64;
    let mean = sum / n;
    let var = if runs > 1 { (sum_sq - n * mean * mean) / (n - 1.0) } else { 0.0 };
    Ok(OracleResult {
        mean,
        std_err: (var.max(0.0) / n).sqrt(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_user_sets_count_exactly() {
        let r = mc_tipping_oracle(200, 200, 30, 0, 12, 50, 1).unwrap();
        assert_eq!(r.mean, 12.0);
        assert_eq!(r.std_err, 0.0);
    }

    #[test]
    fn no_increments_leaves_background_share() {
        let r = mc_tipping_oracle(1000, 10, 50, 300, 0, 20_000, 2).unwrap();
        let want = 50.0 * 300.0 / 1000.0;
        assert!((r.mean - want).abs() < 4.0 * r.std_err, "{} vs {want}", r.mean);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(mc_tipping_oracle(10, 11, 1, 0, 1, 1, 0).is_err());
        assert!(mc_tipping_oracle(10, 1, 1, 11, 1, 1, 0).is_err());
        assert!(mc_tipping_oracle(10, 1, 1, 0, 1, 0, 0).is_err());
    }
}
