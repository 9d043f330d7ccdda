//! Brute-force and Monte Carlo oracles for the tipping-point math. None of
//! these share code with the closed forms beyond the CCBF primitives.

use facts_core::bounds::{LOWER_FILL_PROB, TAU_UPPER_FACTOR, UPPER_FILL_PROB};
use facts_core::tipping::{fill_probabilities, unfilled_distribution};
use facts_core::{
    choose_params, increment, intersection_prob, r_table, BitTable, IndexSet, SetKind,
    TippingCurve, TippingTables,
};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counts subset pairs `(A, B)` of `0..s` with `|A| = a`, `|B| = b` and
/// `|A ∩ B| = k`, by walking every pair of bitmasks.
fn enumerate_pairs(s: u32) -> Vec<Vec<Vec<u64>>> {
    let n = s as usize;
    let mut by_size: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for mask in 0u32..(1 << s) {
        by_size[mask.count_ones() as usize].push(mask);
    }
    // counts[a][b][k]
    let mut counts = vec![vec![vec![0u64; n + 1]; n + 1]; n + 1];
    for a in 0..=n {
        for b in 0..=a {
            for &ma in &by_size[a] {
                for &mb in &by_size[b] {
                    counts[a][b][(ma & mb).count_ones() as usize] += 1;
                }
            }
        }
    }
    counts
}

#[test]
fn intersection_prob_matches_exhaustive_enumeration() {
    for s in 0u32..=12 {
        let counts = enumerate_pairs(s);
        let n = s as usize;
        for a in 0..=n {
            for b in 0..=a {
                let total: u64 = counts[a][b].iter().sum();
                for k in 0..=b {
                    let exact = counts[a][b][k] as f64 / total as f64;
                    let got = intersection_prob(s as u64, a as u64, b as u64, k as u64).unwrap();
                    assert!(
                        (got - exact).abs() <= 1e-12,
                        "s={s} a={a} b={b} k={k}: {got} vs {exact}"
                    );
                }
            }
        }
    }
}

#[test]
fn disjoint_five_subsets_of_ten() {
    let counts = enumerate_pairs(10);
    let total: u64 = counts[5][5].iter().sum();
    let exact = counts[5][5][0] as f64 / total as f64;
    assert!((exact - 120.0 / 30240.0).abs() < 1e-15);
    assert!((intersection_prob(10, 5, 5, 0).unwrap() - exact).abs() < 1e-15);
}

fn random_set(kind: SetKind, s: u64, k: u64, rng: &mut ChaCha8Rng) -> IndexSet {
    let idx = sample(rng, s as usize, k as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    IndexSet::from_indices(kind, b"", s, idx).unwrap()
}

/// Mean and standard error of the empty item slots left after `t` fresh-user
/// increments, with `m` uniformly placed background bits.
fn simulate_fill(s: u64, u: u64, v: u64, m: u64, t: u64, runs: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..runs {
        let mut table = BitTable::new(s);
        for i in sample(&mut rng, s as usize, m as usize) {
            table.set(i as u64);
        }
        let item = random_set(SetKind::Item, s, v, &mut rng);
        for _ in 0..t {
            let user = random_set(SetKind::User, s, u, &mut rng);
            increment(&mut table, &user, &item, &mut rng).unwrap();
        }
        let empty = (v - table.count_ones_in(&item)) as f64;
        sum += empty;
        sum_sq += empty * empty;
    }
    let n = runs as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn r_row_matches_fill_simulation() {
    let r = r_table(100, 20, 10, 5).unwrap();
    let (mean, se) = simulate_fill(100, 20, 10, 0, 5, 1_000_000, 11);
    assert!(
        (mean - r[10]).abs() <= 3.0 * se,
        "R_10,5 = {} vs simulated {mean} ± {se}",
        r[10]
    );
}

#[test]
fn expected_filled_matches_simulation_with_background() {
    for (i, &(s, u, v, m, t)) in [
        (2000u64, 100u64, 40u64, 200u64, 10u64),
        (1000, 50, 30, 400, 12),
        (3000, 400, 25, 0, 20),
    ]
    .iter()
    .enumerate()
    {
        let want = TippingTables::compute(s, u, v, m, t).unwrap().expected_filled();
        let (empty, se) = simulate_fill(s, u, v, m, t, 40_000, 100 + i as u64);
        let filled = v as f64 - empty;
        assert!(
            (filled - want).abs() <= 4.0 * se,
            "({s},{u},{v},{m},{t}): exact {want}, simulated {filled} ± {se}"
        );
    }
}

#[test]
fn q_is_a_distribution_over_a_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let s = rng.gen_range(1..200_000u64);
        let v = rng.gen_range(0..=s.min(3000));
        let m = rng.gen_range(0..=s);
        let q = unfilled_distribution(s, m, v);
        let total: f64 = q.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "s={s} m={m} v={v}: {total}");
        assert!(q.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
    }
}

#[test]
fn recipe_meets_fill_probability_lemmas() {
    for (n, t) in [(1_000_000u64, 100u64), (1_000_000, 1000), (100_000, 100), (100_000, 1000)] {
        let p = choose_params(n, t).unwrap();
        let probs = fill_probabilities(p.s, p.u, p.v);
        // At most tau_upper slots filled leaves at least v - tau_upper empty.
        let w_min = p.v - (TAU_UPPER_FACTOR * t as f64).ceil() as u64;
        assert!(
            probs[w_min as usize] >= LOWER_FILL_PROB,
            "n={n} t={t}: p_{w_min} = {}",
            probs[w_min as usize]
        );
        assert!(
            probs[p.v as usize] <= UPPER_FILL_PROB,
            "n={n} t={t}: p_v = {}",
            probs[p.v as usize]
        );
        let curve = TippingCurve::new(p.s, p.u, p.v, p.t).unwrap();
        for m in [0, n / 2, n] {
            let filled = curve.expected_filled(m).unwrap();
            assert!(filled <= TAU_UPPER_FACTOR * t as f64, "n={n} t={t} m={m}: {filled}");
        }
    }
}
