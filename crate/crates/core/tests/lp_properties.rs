use l1rec_core::cheb::build_grid;
use l1rec_core::lp::{self, dual_certificate, WeightedL1Fit, DEFAULT_GAP_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth data plus a few large outliers on `build_grid(N)`.
fn random_problem(rng: &mut ChaCha8Rng) -> WeightedL1Fit {
    let n = rng.gen_range(0..=8usize);
    let big_n = rng.gen_range(n + 2..=200usize);
    let a = rng.gen_range(1.0..8.0);
    let g = build_grid(big_n);
    let values = g
        .sample(|x| (a * x).sin() + 0.3 * x * x)
        .into_iter()
        .map(|v| if rng.gen_bool(0.05) { v + rng.gen_range(-5.0..5.0) } else { v })
        .collect();
    WeightedL1Fit::on_grid(&g, values, n).unwrap()
}

#[test]
fn optimal_under_coefficient_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let prob = random_problem(&mut rng);
        let sol = lp::solve(&prob, DEFAULT_GAP_TOL).unwrap();
        let c = sol.coeffs.coeffs().to_vec();
        let base = prob.objective(&c);
        let slack = 1e-12 * prob.objective_scale();
        for j in 0..c.len() {
            for d in [1e-6, -1e-6] {
                let mut q = c.clone();
                q[j] += d;
                let v = prob.objective(&q);
                assert!(v >= base - slack, "coefficient {j}: {v} < {base}");
            }
        }
    }
}

#[test]
fn scale_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let prob = random_problem(&mut rng);
        let sol = lp::solve(&prob, DEFAULT_GAP_TOL).unwrap();
        let alpha = rng.gen_range(0.1..10.0);

        let scaled_values = WeightedL1Fit::new(
            prob.points().to_vec(),
            prob.weights().to_vec(),
            prob.values().iter().map(|v| alpha * v).collect(),
            prob.degree(),
        )
        .unwrap();
        let sv = lp::solve(&scaled_values, DEFAULT_GAP_TOL).unwrap();
        assert!((sv.objective - alpha * sol.objective).abs() <= 1e-9 * alpha * sol.objective.max(1e-300));
        let diff = sv.coeffs.sub(&sol.coeffs.scale(alpha)).coeff_max();
        assert!(diff <= 1e-8 * alpha * sol.coeffs.coeff_max().max(1.0), "values scaled: {diff}");
        let (ra, rb) = (sv.residuals(), sol.residuals());
        for (a, b) in ra.iter().zip(&rb) {
            assert!((a - alpha * b).abs() <= 1e-8 * alpha * prob.value_scale());
        }

        let scaled_weights = WeightedL1Fit::new(
            prob.points().to_vec(),
            prob.weights().iter().map(|w| alpha * w).collect(),
            prob.values().to_vec(),
            prob.degree(),
        )
        .unwrap();
        let sw = lp::solve(&scaled_weights, DEFAULT_GAP_TOL).unwrap();
        assert!((sw.objective - alpha * sol.objective).abs() <= 1e-9 * alpha * sol.objective.max(1e-300));
        let diff = sw.coeffs.sub(&sol.coeffs).coeff_max();
        assert!(diff <= 1e-8 * sol.coeffs.coeff_max().max(1.0), "weights scaled: {diff}");
    }
}

#[test]
fn dual_certificate_and_interpolation_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let prob = random_problem(&mut rng);
        let sol = lp::solve(&prob, DEFAULT_GAP_TOL).unwrap();
        let cert = dual_certificate(&sol, &prob).unwrap();
        assert!(cert <= 1e-8 * prob.objective_scale().max(1.0), "certificate {cert}");
        let ztol = 1e-11 * prob.value_scale();
        let zeros = sol.residuals().iter().filter(|r| r.abs() <= ztol).count();
        assert!(zeros > prob.degree(), "{zeros} zero residuals for degree {}", prob.degree());
    }
}
