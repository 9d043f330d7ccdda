//! The counts-only process against a full bit-table simulation.

use facts::sim::process::{TargetProcess, TauCache};
use facts::sim::stats::mean_std;
use facts_core::{choose_params, increment, test_count, BitTable, IndexSet, SetKind, TippingCurve};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_set(kind: SetKind, s: u64, k: u64, rng: &mut ChaCha8Rng) -> IndexSet {
    let idx = sample(rng, s as usize, k as usize).into_iter().map(|i| i as u64).collect();
    IndexSet::from_indices(kind, b"", s, idx).unwrap()
}

fn full_table_trial(background: u64, curve: &TippingCurve, rng: &mut ChaCha8Rng) -> u64 {
    let p = choose_params(1000, 50).unwrap();
    let mut table = BitTable::new(p.s);
    for _ in 0..background {
        let user = random_set(SetKind::User, p.s, p.u, rng);
        let item = random_set(SetKind::Item, p.s, p.v, rng);
        increment(&mut table, &user, &item, rng).unwrap();
    }
    let target = random_set(SetKind::Item, p.s, p.v, rng);
    let mut k = 0;
    while !test_count(&table, &target, curve.tau(table.ones()).unwrap()) {
        let user = random_set(SetKind::User, p.s, p.u, rng);
        increment(&mut table, &user, &target, rng).unwrap();
        k += 1;
    }
    k
}

#[test]
fn counts_only_matches_full_tables() {
    let p = choose_params(1000, 50).unwrap();
    let curve = TippingCurve::new(p.s, p.u, p.v, p.t).unwrap();
    let process = TargetProcess::new(p).unwrap();
    let trials = 400;
    for (i, background) in [0u64, 600].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(40 + i as u64);
        let full: Vec<f64> = (0..trials).map(|_| full_table_trial(background, &curve, &mut rng) as f64).collect();

        let mut taus = TauCache::new(&curve, background);
        let seeded = process.background_sampler(background).unwrap();
        let fast: Vec<f64> = (0..4 * trials)
            .map(|_| {
                let st = process.seed_background(&seeded, background, &mut rng);
                process.complaints_to_audit(st, &mut taus, 10_000, &mut rng).unwrap().unwrap() as f64
            })
            .collect();

        let (mf, sf) = mean_std(&full);
        let (mc, sc) = mean_std(&fast);
        let se = (sf * sf / full.len() as f64 + sc * sc / fast.len() as f64).sqrt();
        assert!((mf - mc).abs() <= 4.0 * se, "background {background}: full {mf} ± {sf}, counts-only {mc} ± {sc}");
        assert!((sf / sc - 1.0).abs() < 0.25, "background {background}: spread {sf} vs {sc}");
    }
}
