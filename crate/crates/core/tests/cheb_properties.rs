use std::f64::consts::PI;

use l1rec_core::cheb::{interpolate_on_grid, l1_norm, roots_in_interval, Basis, ChebSeries, Piecewise};
use proptest::prelude::*;

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn interpolation_reproduces_polynomials(c in coeffs(41), extra in 0usize..5) {
        let p = ChebSeries::first_kind(c);
        let n = p.degree() + extra;
        let q = interpolate_on_grid(|x| p.eval(x), n);
        let want = p.to_second_kind().resized(n + 1);
        let got = q.to_second_kind().resized(n + 1);
        let scale = want.coeff_max().max(f64::MIN_POSITIVE);
        prop_assert!(got.sub(&want).coeff_max() <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn derivative_matches_trig_form(c in coeffs(51), x in -0.9f64..0.9) {
        // T_k'(cos t) = k sin(kt) / sin t
        let t = x.acos();
        let exact: f64 = c.iter().enumerate().map(|(k, ck)| ck * k as f64 * (k as f64 * t).sin() / t.sin()).sum();
        let scale: f64 = c.iter().enumerate().map(|(k, ck)| ck.abs() * (k * k) as f64).sum();
        let d = ChebSeries::first_kind(c).derivative().eval(x);
        prop_assert!((exact - d).abs() <= 1e-13 * scale.max(1.0), "trig {exact} series {d}");
    }

    #[test]
    fn basis_round_trip(c in coeffs(101)) {
        let p = ChebSeries::first_kind(c);
        let back = p.to_second_kind().to_first_kind();
        prop_assert_eq!(back.basis(), Basis::FirstKind);
        let len = p.len().max(back.len());
        prop_assert!(back.resized(len).sub(&p.resized(len)).coeff_max() <= 1e-13 * p.coeff_max());
    }
}

#[test]
fn chebyshev_t_roots() {
    for n in 1..=200usize {
        let t = ChebSeries::unit(Basis::FirstKind, n);
        let mut r = roots_in_interval(&t, -1.0, 1.0).unwrap();
        r.sort_by(f64::total_cmp);
        assert_eq!(r.len(), n, "T_{n}");
        for (i, x) in r.iter().enumerate() {
            let k = n - i;
            let exact = ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos();
            assert!((x - exact).abs() <= 1e-12, "T_{n} root {k}: {x} vs {exact}");
        }
    }
}

/// Midpoint rule with one Richardson step.
fn midpoint(f: &dyn Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let rule = |m: usize| {
        let h = (b - a) / m as f64;
        (0..m).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    };
    (4.0 * rule(2 * m) - rule(m)) / 3.0
}

#[test]
fn l1_norm_of_second_kind_polynomials() {
    for n in 0..=50usize {
        let u = ChebSeries::unit(Basis::SecondKind, n + 1).scale(0.5);
        let got = l1_norm(&Piecewise::from_series(&u)).unwrap();

        // exact: integrate the antiderivative with alternating signs between roots
        let anti = u.antiderivative();
        let mut knots = vec![-1.0];
        knots.extend((1..=n + 1).rev().map(|k| (k as f64 * PI / (n + 2) as f64).cos()));
        knots.push(1.0);
        let exact: f64 = knots.windows(2).map(|w| (anti.eval(w[1]) - anti.eval(w[0])).abs()).sum();
        assert!((got - exact).abs() <= 1e-12 * exact, "n={n}: {got} vs {exact}");

        let g = |x: f64| u.eval(x).abs();
        let quad: f64 = knots.windows(2).map(|w| midpoint(&g, w[0], w[1], 400)).sum();
        assert!((got - quad).abs() <= 1e-9 * exact, "n={n}: {got} vs quadrature {quad}");
    }
}
