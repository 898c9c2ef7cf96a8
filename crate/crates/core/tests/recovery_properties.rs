use std::f64::consts::PI;

use l1rec_core::catalog;
use l1rec_core::cheb::{build_grid, ChebSeries};
use l1rec_core::recovery::{recover_l0_oracle, recover_l1_func, CORRUPTION_TOL};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gap(a: &ChebSeries, b: &ChebSeries) -> f64 {
    let (a, b) = (a.to_second_kind(), b.to_second_kind());
    let len = a.len().max(b.len());
    a.resized(len).sub(&b.resized(len)).coeff_max()
}

#[test]
fn l0_oracle_returns_generator() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let n = rng.gen_range(0..=4usize);
        let m = rng.gen_range(0..=n);
        let big_n = rng.gen_range(n + 6..=60usize);
        let k = rng.gen_range(0..=((big_n - n) / 2).min(3));
        let p = ChebSeries::first_kind((0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let g = build_grid(big_n);
        let mut samples = g.sample(|x| p.eval(x));
        for i in sample(&mut rng, big_n + 1, k) {
            samples[i] += rng.gen_range(1.0..100.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
        let (q, support) = recover_l0_oracle(&samples, n, k).unwrap();
        assert!(support.len() <= k);
        assert!(gap(&q, &p) <= 1e-9, "n={n} m={m} N={big_n} k={k}: {}", gap(&q, &p));
    }
}

#[test]
fn detected_support_matches_corruption_measure() {
    for name in ["corrupted_t5", "legendre8_corrupted"] {
        let f = catalog::lookup(name).unwrap();
        let c = f.corruption().unwrap();
        let n = if name == "corrupted_t5" { 5 } else { 8 };
        let big_n = 4999;
        let rep = recover_l1_func(&f, n, big_n, CORRUPTION_TOL).unwrap();
        assert!(rep.generator_error.unwrap() <= 1e-10, "{name}");
        // each interval endpoint can add or drop at most one grid cell
        let cell = PI / (big_n as f64 + 2.0);
        let slack = 2.0 * c.intervals().len() as f64 * cell;
        assert!(
            (rep.support_measure - c.measure()).abs() <= slack,
            "{name}: detected {} vs {}",
            rep.support_measure,
            c.measure()
        );
    }
}
