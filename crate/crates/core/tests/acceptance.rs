//! Acceptance criteria. Every test prints one `criterion N: PASS|FAIL` line
//! and then asserts the same condition.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use l1rec_core::catalog;
use l1rec_core::cheb::{build_grid, l1_norm, linf_norm, ChebSeries, FuncRep, Piecewise};
use l1rec_core::localization::{abs_case_measured, concentration_ratio, loglog_slope, omega_measure};
use l1rec_core::newton::{
    best_l1, best_l1_default, lp_on_grid, lp_refined, newton_state, BestL1Options, BestL1Result, Path,
};
use l1rec_core::recovery::{recover_l0_oracle, recover_l1, rip_bound, rip_bruteforce, CORRUPTION_TOL};

fn report(id: u32, title: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id} ({title}): {verdict}; {detail}");
}

fn within(t: Instant, budget: Duration) -> (bool, Duration) {
    let e = t.elapsed();
    (e <= budget, e)
}

fn random_series(rng: &mut ChaCha8Rng, degree: usize) -> ChebSeries {
    ChebSeries::first_kind((0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn sup_norm(p: &ChebSeries) -> f64 {
    linf_norm(&Piecewise::from_series(p)).unwrap().0
}

fn coeff_gap(a: &ChebSeries, b: &ChebSeries) -> f64 {
    let (a, b) = (a.to_second_kind(), b.to_second_kind());
    let len = a.len().max(b.len());
    a.resized(len).sub(&b.resized(len)).coeff_max()
}

/// Random disjoint intervals of total length `s` inside `[lo, hi]`.
fn random_support(rng: &mut ChaCha8Rng, s: f64, pieces: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(|a, b| a.total_cmp(b));
    let lens: Vec<f64> = cuts.windows(2).map(|w| (w[1] - w[0]) * s).collect();
    let slack = (hi - lo) - s;
    let mut gaps: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(0.05..1.0)).collect();
    let gsum: f64 = gaps.iter().sum();
    gaps.iter_mut().for_each(|g| *g *= slack / gsum);
    let mut x = lo + gaps[0];
    let mut out = Vec::with_capacity(pieces);
    for (i, l) in lens.iter().enumerate() {
        out.push((x, (x + l).min(hi)));
        x += l + gaps[i + 1];
    }
    out
}

#[test]
fn criterion_01_corrupted_t5() {
    let t = Instant::now();
    let f = catalog::lookup("corrupted_t5").unwrap();
    let g = build_grid(4999);
    let samples = g.sample(|x| f.eval(x));
    let rep = recover_l1(&samples, 5, CORRUPTION_TOL, f.corruption()).unwrap();
    let err = rep.generator_error.unwrap();
    let (fast, el) = within(t, Duration::from_secs(60));
    let pass = err <= 1e-10 && fast;
    report(
        1,
        "corrupted T5 recovery",
        pass,
        format!("sup error {err:.3e} (limit 1e-10), k = {}, runtime {el:.2?} (limit 60 s)", rep.k),
    );
    assert!(pass);
}

#[test]
fn criterion_02_l1_equals_l0() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(0..=4usize);
        let m = rng.gen_range(0..=n);
        let k = rng.gen_range(0..=2usize);
        let lo = (n + 1).max((6 * (n + 1) * k).saturating_sub(1));
        let big_n = rng.gen_range(lo..=60);
        assert!(rip_bound(big_n, n, k).sufficient);
        let p = random_series(&mut rng, m);
        let g = build_grid(big_n);
        let mut samples = g.sample(|x| p.eval(x));
        let mut idx: Vec<usize> = (0..=big_n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..idx.len());
            idx.swap(i, j);
            let v: f64 = rng.gen_range(1.0..10.0);
            samples[idx[i]] += if rng.gen_bool(0.5) { v } else { -v };
        }
        let l1 = recover_l1(&samples, n, CORRUPTION_TOL, None).unwrap();
        let (l0, _) = recover_l0_oracle(&samples, n, 2).unwrap();
        let e = coeff_gap(&l1.recovered, &l0)
            .max(coeff_gap(&l1.recovered, &p))
            .max(coeff_gap(&l0, &p));
        worst = worst.max(e);
        if e <= 1e-9 {
            ok += 1;
        }
    }
    let (fast, el) = within(t, Duration::from_secs(300));
    let pass = ok == 100 && fast;
    report(
        2,
        "l1 recovery equals l0 oracle equals generator",
        pass,
        format!("{ok}/100 instances, worst coefficient error {worst:.3e} (limit 1e-9), runtime {el:.2?} (limit 5 min)"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_small_support_recovery() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = 0;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(0..=10usize);
        let p = random_series(&mut rng, n);
        let pmax = sup_norm(&p);
        let s = 0.9 / ((n + 1) * (n + 1)) as f64;
        let pieces = rng.gen_range(1..=3usize);
        let support = random_support(&mut rng, s, pieces, -1.0, 1.0);
        let amp = rng.gen_range(-1e3..1e3) * pmax;
        let (freq, phase) = (rng.gen_range(0.0..50.0), rng.gen_range(0.0..6.3));
        let omega = move |x: f64| amp * (1.0 + 0.5 * (freq * x + phase).sin());
        let f = FuncRep::corrupted(p.clone(), support, omega).unwrap();
        let g = build_grid(4999);
        let samples = g.sample(|x| f.eval(x));
        let rep = recover_l1(&samples, n, CORRUPTION_TOL, f.corruption()).unwrap();
        let e = rep.generator_error.unwrap();
        worst = worst.max(e);
        if e <= 1e-9 {
            ok += 1;
        }
    }
    let (fast, el) = within(t, Duration::from_secs(300));
    let pass = ok == 50 && fast;
    report(
        3,
        "recovery below the global measure threshold",
        pass,
        format!("{ok}/50 exact, worst sup error {worst:.3e} (limit 1e-9), runtime {el:.2?} (limit 5 min)"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_rip_bound() {
    let t = Instant::now();
    let mut violations = 0;
    let mut cases = 0;
    for big_n in 1..=12usize {
        for n in 0..=3usize.min(big_n - 1) {
            for k in 0..=3usize {
                let exact = rip_bruteforce(big_n, n, k).unwrap();
                let bound = rip_bound(big_n, n, k).delta;
                cases += 1;
                if exact > bound + 1e-10 {
                    violations += 1;
                }
            }
        }
    }
    let (fast, el) = within(t, Duration::from_secs(60));
    let pass = violations == 0 && fast;
    report(
        4,
        "restricted isometry bound",
        pass,
        format!("{violations} violations in {cases} cases, runtime {el:.2?} (limit 1 min)"),
    );
    assert!(pass);
}

fn expsin_reference() -> (FuncRep, BestL1Result) {
    let f = catalog::lookup("expsin10").unwrap();
    let r = best_l1_default(&f, 10).unwrap();
    (f, r)
}

#[test]
fn criterion_05_lp_refinement_rates() {
    let t = Instant::now();
    let (f, best) = expsin_reference();
    let converged = best.path == Path::NewtonConverged;
    let sizes = [100usize, 316, 1000, 3162, 10000];
    let mut plain = Vec::new();
    let mut refined = Vec::new();
    for &big_n in &sizes {
        let sol = lp_on_grid(&f, 10, big_n).unwrap();
        plain.push(l1_norm(&Piecewise::from_series(&sol.coeffs.sub(&best.polynomial))).unwrap());
        let st = newton_state(&f, sol.coeffs, 0).unwrap();
        let r = lp_refined(&f, 10, &st.roots, big_n).unwrap();
        refined.push(l1_norm(&Piecewise::from_series(&r.coeffs.sub(&best.polynomial))).unwrap());
    }
    let x: Vec<f64> = sizes.iter().map(|&v| v as f64).collect();
    let s1 = loglog_slope(&x, &plain);
    let s2 = loglog_slope(&x, &refined);
    let (fast, el) = within(t, Duration::from_secs(600));
    let pass = converged && (-1.3..=-0.7).contains(&s1) && (-2.4..=-1.6).contains(&s2) && fast;
    report(
        5,
        "LP discretization rates",
        pass,
        format!(
            "reference path {:?}, unrefined slope {s1:.3} in [-1.3, -0.7], refined slope {s2:.3} in [-2.4, -1.6], runtime {el:.2?} (limit 10 min)",
            best.path
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_sqrt_bounds() {
    let t = Instant::now();
    let f = catalog::lookup("sqrt1mx2").unwrap();
    let mut bound_fail = Vec::new();
    let mut path_fail = Vec::new();
    for n in (2..=64).step_by(2) {
        let r = best_l1_default(&f, n).unwrap();
        let upper = 64.0 / (std::f64::consts::PI * ((n + 1) as f64).powi(3));
        if r.l1_error > upper {
            bound_fail.push(n);
        }
        if r.path != Path::InterpolantShortcut {
            path_fail.push(n);
        }
    }
    let ns = [10usize, 20, 40, 80, 160];
    let om: Vec<f64> = ns.iter().map(|&n| omega_measure(&f, n).unwrap().omega_measure).collect();
    let x: Vec<f64> = ns.iter().map(|&v| v as f64).collect();
    let slope = loglog_slope(&x, &om);
    let (fast, el) = within(t, Duration::from_secs(600));
    let pass = bound_fail.is_empty() && path_fail.is_empty() && (-2.3..=-1.7).contains(&slope) && fast;
    report(
        6,
        "sqrt(1-x^2) error bound and localization",
        pass,
        format!(
            "bound violations at {bound_fail:?}, non-shortcut degrees {path_fail:?}, omega slope {slope:.3} in [-2.3, -1.7], runtime {el:.2?} (limit 10 min)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_abs_asymptotics() {
    let t = Instant::now();
    let mut ratios = Vec::new();
    for n in [20usize, 40, 80, 160] {
        ratios.push((n, abs_case_measured(n).unwrap().ratio.unwrap()));
    }
    let ratio_ok = ratios.iter().all(|(_, r)| (0.9..=1.1).contains(r));
    let f = catalog::lookup("absx").unwrap();
    let ns = [10usize, 20, 40, 80, 160];
    let om: Vec<f64> = ns.iter().map(|&n| omega_measure(&f, n).unwrap().omega_measure).collect();
    let x: Vec<f64> = ns.iter().map(|&v| v as f64).collect();
    let slope = loglog_slope(&x, &om);
    let (fast, el) = within(t, Duration::from_secs(600));
    let pass = ratio_ok && (-1.2..=-0.8).contains(&slope) && fast;
    report(
        7,
        "|x| error asymptotics and localization",
        pass,
        format!(
            "ratios {:?} in [0.9, 1.1], omega {:?}, omega slope {slope:.3} in [-1.2, -0.8], runtime {el:.2?} (limit 10 min)",
            ratios.iter().map(|(n, r)| format!("n={n}: {r:.4}")).collect::<Vec<_>>(),
            om.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_near_best_certificate() {
    let mut runs: Vec<BestL1Result> = vec![expsin_reference().1];
    let forced = BestL1Options {
        shortcut: false,
        ..Default::default()
    };
    for name in ["sqrt1mx2", "absx"] {
        let f = catalog::lookup(name).unwrap();
        for n in [10usize, 20, 40] {
            runs.push(best_l1(&f, n, &forced).unwrap());
        }
    }
    let mut checked = 0;
    let mut violations = 0;
    let mut converged = 0;
    for r in &runs {
        if r.path != Path::NewtonConverged {
            continue;
        }
        converged += 1;
        for e in &r.trace {
            if let Some(fac) = e.near_best_factor {
                checked += 1;
                if e.objective > fac * r.l1_error + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    let pass = violations == 0 && converged == runs.len() && checked > 0;
    report(
        8,
        "near-best certificate on Newton iterates",
        pass,
        format!("{converged}/{} runs converged, {checked} iterates checked, {violations} violations", runs.len()),
    );
    assert!(pass);
}

#[test]
fn criterion_09_concentration() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut lemma_viol = 0;
    for _ in 0..100 {
        let n = rng.gen_range(0..=20usize);
        let p = random_series(&mut rng, n);
        let s = rng.gen_range(1e-4..0.5);
        let pieces = rng.gen_range(1..=4usize);
        let support = random_support(&mut rng, s, pieces, -1.0, 1.0);
        let c = concentration_ratio(&p, &support).unwrap();
        if c.ratio > c.lemma_bound + 1e-10 {
            lemma_viol += 1;
        }
    }
    let mut appendix_viol = 0;
    let mut appendix_checked = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=20usize);
        let p = random_series(&mut rng, n);
        let zeta = rng.gen_range(0.05..=1.0 - 1.0 / n as f64);
        let s = rng.gen_range(1e-4..(2.0 * zeta).min(0.05));
        let pieces = rng.gen_range(1..=3usize);
        let support = random_support(&mut rng, s, pieces, -zeta, zeta);
        let c = concentration_ratio(&p, &support).unwrap();
        if let Some(b) = c.appendix_bound {
            appendix_checked += 1;
            if c.ratio > b + 1e-10 {
                appendix_viol += 1;
            }
        }
    }
    let (fast, el) = within(t, Duration::from_secs(120));
    let pass = lemma_viol == 0 && appendix_viol == 0 && appendix_checked == 100 && fast;
    report(
        9,
        "polynomial concentration bounds",
        pass,
        format!(
            "global bound: {lemma_viol} violations in 100; centred bound: {appendix_viol} violations in {appendix_checked}; runtime {el:.2?} (limit 2 min)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_legendre_regimes() {
    let t = Instant::now();
    let f = catalog::lookup("legendre8_corrupted").unwrap();
    let g = build_grid(1999);
    let samples = g.sample(|x| f.eval(x));
    let n_max = 40;
    let exact: Vec<bool> = (0..=n_max)
        .map(|n| {
            let r = recover_l1(&samples, n, CORRUPTION_TOL, f.corruption()).unwrap();
            r.generator_error.unwrap() <= 1e-9
        })
        .collect();
    let below = exact[..8].iter().all(|e| !e);
    let n_hi = (8..=n_max).take_while(|&n| exact[n]).last();
    let lost = n_hi.map_or(false, |h| h < n_max && exact[h + 1..].iter().all(|e| !e));
    let pattern: String = exact.iter().map(|&e| if e { 'E' } else { '.' }).collect();
    let (fast, el) = within(t, Duration::from_secs(600));
    let pass = below && n_hi.is_some() && lost && fast;
    report(
        10,
        "corrupted Legendre P8 regimes",
        pass,
        format!("exact range [8, {n_hi:?}], pattern n=0..{n_max}: {pattern}, runtime {el:.2?} (limit 10 min)"),
    );
    assert!(pass);
}

#[test]
#[ignore = "slow"]
fn criterion_11_sqrt_degree_1000() {
    let t = Instant::now();
    let f = catalog::lookup("sqrt1mx2").unwrap();
    let r = omega_measure(&f, 1000).unwrap();
    let (fast, el) = within(t, Duration::from_secs(1800));
    let pass = r.omega_measure < 1e-5 && fast;
    report(
        11,
        "sqrt(1-x^2) localization at degree 1000",
        pass,
        format!("omega {:.3e} (limit 1e-5), runtime {el:.2?} (limit 30 min)", r.omega_measure),
    );
    assert!(pass);
}
