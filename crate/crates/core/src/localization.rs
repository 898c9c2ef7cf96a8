//! Error localization: the set where the best L1 error exceeds half the
//! minimax error, the √(1−x²) and |x| case studies, a Remez solver and
//! concentration ratios.

use std::f64::consts::PI;

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::cheb::norms::{l1_norm, linf_norm, sign_structure};
use crate::cheb::proxy::{adaptive_proxy, FuncRep, Piecewise};
use crate::cheb::roots::{dedup_sorted, local_roots};
use crate::cheb::series::{chebyshev_t_values, ChebSeries};
use crate::error::{L1Error, Result};
use crate::newton::{best_l1_default, trial_interpolant, BestL1Result};

/// Varga–Carpenter constant for `|x|`.
pub const BETA: f64 = 0.28017;
const REMEZ_MAX_ITER: usize = 60;

#[derive(Clone, Debug)]
pub struct MinimaxResult {
    /// First-kind coefficients.
    pub polynomial: ChebSeries,
    pub error: f64,
    /// Alternation points and signed error values.
    pub reference: Vec<(f64, f64)>,
    pub iterations: usize,
}

/// Best uniform approximation by the Remez exchange.
///
/// If the exchange stalls, as it does for even `f` with even `n`, the
/// degree `n+1` problem is solved instead and accepted when its top
/// coefficient vanishes.
pub fn minimax(f: &FuncRep, n: usize, tol: f64) -> Result<MinimaxResult> {
    match remez(f, n, tol) {
        Err(L1Error::ExchangeStalled(msg)) => {
            let r = remez(f, n + 1, tol).map_err(|_| L1Error::ExchangeStalled(msg.clone()))?;
            let c = r.polynomial.coeffs();
            let top = c.get(n + 1).copied().unwrap_or(0.0);
            if top.abs() > 1e-12 * r.polynomial.coeff_abs_sum().max(f.proxy().scale()) {
                return Err(L1Error::ExchangeStalled(msg));
            }
            let p = r.polynomial.resized(n + 1);
            let error = linf_norm(&f.residual(&p))?.0;
            Ok(MinimaxResult {
                polynomial: p,
                error,
                ..r
            })
        }
        other => other,
    }
}

fn remez(f: &FuncRep, n: usize, tol: f64) -> Result<MinimaxResult> {
    let mut refs: Vec<f64> = (0..n + 2)
        .map(|k| -(k as f64 * PI / (n + 1) as f64).cos())
        .collect();
    let mut best: Option<MinimaxResult> = None;
    for it in 1..=REMEZ_MAX_ITER {
        let (p, level) = solve_reference(f, &refs, n)?;
        let e = f.residual(&p);
        let (emax, _) = linf_norm(&e)?;
        let noise = 64.0 * f64::EPSILON * e.scale();
        let cand = MinimaxResult {
            polynomial: p,
            error: emax,
            reference: refs.iter().map(|&x| (x, e.eval(x))).collect(),
            iterations: it,
        };
        if emax <= noise {
            return Ok(MinimaxResult { error: emax, ..cand });
        }
        let done = (emax - level.abs()) <= tol * emax;
        if best.as_ref().map_or(true, |b| emax < b.error) {
            best = Some(cand);
        }
        if done {
            return Ok(best.expect("set above"));
        }
        match exchange(&e, n + 2) {
            Some(r) => refs = r,
            None => break,
        }
        debug!("remez it={it} emax={emax:e} level={level:e}");
    }
    let b = best.expect("at least one iteration");
    Err(L1Error::ExchangeStalled(format!(
        "degree {n}: error {:.3e} not levelled after {} iterations",
        b.error, b.iterations
    )))
}

// p(x_i) + (−1)^i E = f(x_i)
fn solve_reference(f: &FuncRep, refs: &[f64], n: usize) -> Result<(ChebSeries, f64)> {
    let m = n + 2;
    let a = DMatrix::from_fn(m, m, |i, j| {
        if j <= n {
            chebyshev_t_values(refs[i], n)[j]
        } else if i % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    });
    let b = DVector::from_fn(m, |i, _| f.proxy_eval(refs[i]));
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| L1Error::ExchangeStalled("singular reference system".into()))?;
    Ok((
        ChebSeries::first_kind(sol.as_slice()[..=n].to_vec()),
        sol[n + 1],
    ))
}

/// One extremum of `e` per sign segment, trimmed to `m` alternating points
/// around the global maximum.
fn exchange(e: &Piecewise, m: usize) -> Option<Vec<f64>> {
    let mut cand = vec![-1.0, 1.0];
    for pc in e.pieces() {
        cand.push(pc.a);
        cand.push(pc.b);
        if pc.degree() >= 2 {
            let d = pc.series.derivative().to_first_kind();
            if let Ok(rs) = local_roots(d.coeffs(), 0.0) {
                cand.extend(rs.into_iter().map(|t| pc.to_global(t)));
            }
        }
    }
    // no averaging: singular endpoints must stay exact
    cand.sort_by(|a, b| a.total_cmp(b));
    cand.dedup();
    let ss = sign_structure(e).ok()?;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut ci = 0;
    for seg in ss.segments.iter().filter(|s| s.sign != 0) {
        let mut best = segment_max(e, seg.a, seg.b);
        while ci < cand.len() && cand[ci] < seg.a {
            ci += 1;
        }
        let mut cj = ci;
        while cj < cand.len() && cand[cj] <= seg.b {
            let v = e.eval(cand[cj]);
            if v.abs() > best.1.abs() && v.signum() == seg.sign as f64 {
                best = (cand[cj], v);
            }
            cj += 1;
        }
        if best.1 == 0.0 {
            continue;
        }
        match pts.last_mut() {
            Some(last) if last.1.signum() == best.1.signum() => {
                if best.1.abs() > last.1.abs() {
                    *last = best;
                }
            }
            _ => pts.push(best),
        }
    }
    if pts.len() < m {
        return None;
    }
    while pts.len() > m {
        let gmax = pts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.abs().total_cmp(&b.1 .1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (first, last) = (pts[0].1.abs(), pts[pts.len() - 1].1.abs());
        if gmax == 0 || (gmax != pts.len() - 1 && last < first) {
            pts.pop();
        } else {
            pts.remove(0);
        }
    }
    Some(pts.into_iter().map(|p| p.0).collect())
}

// Sampled maximum of |e| on [a, b], refined by golden-section search.
fn segment_max(e: &Piecewise, a: f64, b: f64) -> (f64, f64) {
    const K: usize = 16;
    let xs: Vec<f64> = (0..=K).map(|i| a + (b - a) * i as f64 / K as f64).collect();
    let (i, _) = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, e.eval(x).abs()))
        .fold((0, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
    let (mut lo, mut hi) = (xs[i.saturating_sub(1)], xs[(i + 1).min(K)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (e.eval(x1).abs(), e.eval(x2).abs());
    for _ in 0..80 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = e.eval(x2).abs();
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = e.eval(x1).abs();
        }
    }
    [xs[i], x1, x2]
        .into_iter()
        .map(|x| (x, e.eval(x)))
        .fold((a, 0.0), |acc, c| if c.1.abs() > acc.1.abs() { c } else { acc })
}

#[derive(Clone, Debug)]
pub struct LocalizationReport {
    pub n: usize,
    pub linf_error: f64,
    pub l1_error: f64,
    pub omega_measure: f64,
    /// `2 ‖f − p^{L1}‖₁ / ‖f − p^{L∞}‖_∞`.
    pub omega_bound: f64,
    pub omega_intervals: Vec<(f64, f64)>,
    pub best: BestL1Result,
}

/// Measure of `{x : |f − p_n^{L1}| ≥ ‖f − p_n^{L∞}‖_∞ / 2}`.
pub fn omega_measure(f: &FuncRep, n: usize) -> Result<LocalizationReport> {
    let best = best_l1_default(f, n)?;
    let mm = minimax(f, n, 1e-6)?;
    let e = f.residual(&best.polynomial);
    let level = 0.5 * mm.error;
    let omega_intervals = level_set(&e, level)?;
    let omega_measure = omega_intervals.iter().map(|(a, b)| b - a).sum();
    Ok(LocalizationReport {
        n,
        linf_error: mm.error,
        l1_error: best.l1_error,
        omega_measure,
        omega_bound: if mm.error > 0.0 {
            2.0 * best.l1_error / mm.error
        } else {
            f64::INFINITY
        },
        omega_intervals,
        best,
    })
}

/// Maximal intervals where `|e| ≥ level`.
pub fn level_set(e: &Piecewise, level: f64) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for pc in e.pieces() {
        if pc.b <= pc.a {
            continue;
        }
        let mut cuts = vec![-1.0, 1.0];
        for shift in [level, -level] {
            let mut c = pc.series.coeffs().to_vec();
            if c.is_empty() {
                c.push(0.0);
            }
            c[0] -= shift;
            cuts.extend(local_roots(&c, 0.0)?);
        }
        let cuts = dedup_sorted(cuts);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if pc.series.eval(mid).abs() >= level {
                let (a, b) = (pc.to_global(w[0]), pc.to_global(w[1]));
                match out.last_mut() {
                    Some(last) if (a - last.1).abs() <= 1e-15 => last.1 = b,
                    _ => out.push((a, b)),
                }
            }
        }
    }
    Ok(out)
}

/// Closed-form quantities for `√(1 − x²)`.
#[derive(Clone, Debug)]
pub struct SqrtCaseReport {
    pub n: usize,
    /// `64 / (π (n+1)³)`.
    pub l1_upper: f64,
    /// `2 / (π (n+1))`.
    pub proj_endpoint: f64,
    pub sigma_n: f64,
    /// `64 (1 + σₙ) / (n+1)²`.
    pub omega_upper: f64,
    /// Second-kind coefficients `b_0..b_n`.
    pub b: Vec<f64>,
    /// The interpolant shortcut certifies the best approximation.
    pub shortcut: bool,
}

pub fn sqrt_case(n: usize) -> Result<SqrtCaseReport> {
    if n < 2 || n % 2 == 1 {
        return Err(L1Error::DomainError(format!("need even n ≥ 2, got {n}")));
    }
    let nf = n as f64 + 1.0;
    let sigma_n = lebesgue_sigma(n)?;
    let f = FuncRep::from_fn(sqrt_one_minus_sq)?;
    Ok(SqrtCaseReport {
        n,
        l1_upper: 64.0 / (PI * nf.powi(3)),
        proj_endpoint: 2.0 / (PI * nf),
        sigma_n,
        omega_upper: 64.0 * (1.0 + sigma_n) / (nf * nf),
        b: sqrt_coefficients(n),
        shortcut: trial_interpolant(&f, n)?.is_some(),
    })
}

/// `√(1 − x²)` without cancellation near the endpoints.
pub fn sqrt_one_minus_sq(x: f64) -> f64 {
    ((1.0 - x) * (1.0 + x)).max(0.0).sqrt()
}

/// `b_j = −8 / ((j−1)(j+1)(j+3)π)` for even `j`, zero for odd `j`.
pub fn sqrt_coefficients(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            if j % 2 == 1 {
                0.0
            } else {
                let j = j as f64;
                -8.0 / ((j - 1.0) * (j + 1.0) * (j + 3.0) * PI)
            }
        })
        .collect()
}

/// `σₙ = (1/π) ∫₀^π |sin((n+½)θ)| / sin(θ/2) dθ`, integrated lobe by lobe.
pub fn lebesgue_sigma(n: usize) -> Result<f64> {
    let w = n as f64 + 0.5;
    // sin(wt) has one sign per lobe, so integrate it signed and take |.|
    let g = move |t: f64| {
        if t == 0.0 {
            2.0 * w
        } else {
            (w * t).sin() / (0.5 * t).sin()
        }
    };
    let lobes = w.floor() as usize;
    let mut total = 0.0;
    for k in 0..=lobes {
        let a = k as f64 * PI / w;
        let b = ((k + 1) as f64 * PI / w).min(PI);
        if b <= a {
            break;
        }
        let s = adaptive_proxy(&|t: f64| g(a + (b - a) * (t + 1.0) / 2.0), 1e-15)?;
        total += (0.5 * (b - a) * s.integral()).abs();
    }
    Ok(total / PI)
}

/// Asymptotic quantities for `|x|`, with measured values when available.
#[derive(Clone, Debug)]
pub struct AbsCaseReport {
    pub n: usize,
    /// `π² / (4n²)`.
    pub l1_asymptotic: f64,
    /// `β / (2n)`.
    pub linf_asymptotic: f64,
    /// `π² / (β n)`.
    pub omega_asymptotic: f64,
    pub measured_l1: Option<f64>,
    pub ratio: Option<f64>,
}

pub fn abs_case(n: usize) -> Result<AbsCaseReport> {
    if n == 0 {
        return Err(L1Error::DomainError("need n ≥ 1".into()));
    }
    let nf = n as f64;
    Ok(AbsCaseReport {
        n,
        l1_asymptotic: PI * PI / (4.0 * nf * nf),
        linf_asymptotic: BETA / (2.0 * nf),
        omega_asymptotic: PI * PI / (BETA * nf),
        measured_l1: None,
        ratio: None,
    })
}

/// [`abs_case`] together with the measured best L1 error.
pub fn abs_case_measured(n: usize) -> Result<AbsCaseReport> {
    let mut r = abs_case(n)?;
    let f = FuncRep::with_options(
        f64::abs,
        &crate::cheb::proxy::ProxyOptions {
            breakpoints: vec![0.0],
            ..Default::default()
        },
    )?;
    let b = best_l1_default(&f, n)?;
    r.measured_l1 = Some(b.l1_error);
    r.ratio = Some(b.l1_error / r.l1_asymptotic);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Concentration {
    /// `∫_Ω |p| / ∫ |p|`.
    pub ratio: f64,
    /// `s (n+1)² / 2`.
    pub lemma_bound: f64,
    /// `s n^{3/2} / (1 − ζ²)^{1/4}` when `1 − ζ ≥ 1/n`.
    pub appendix_bound: Option<f64>,
}

/// Fraction of `∫|p|` carried by the interval union `Ω`.
pub fn concentration_ratio(p: &ChebSeries, intervals: &[(f64, f64)]) -> Result<Concentration> {
    let mut iv = intervals.to_vec();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(a, b) in &iv {
        if !(-1.0 <= a && a <= b && b <= 1.0) {
            return Err(L1Error::InvalidInput(format!("interval [{a}, {b}] outside [-1, 1]")));
        }
    }
    if iv.windows(2).any(|w| w[1].0 < w[0].1) {
        return Err(L1Error::InvalidInput("intervals overlap".into()));
    }
    let n = p.degree();
    let s: f64 = iv.iter().map(|(a, b)| b - a).sum();
    let zeta = iv.iter().fold(0.0f64, |m, &(a, b)| m.max(a.abs()).max(b.abs()));
    let whole = Piecewise::from_series(p);
    let total = l1_norm(&whole)?;
    let part = abs_integral(p, &iv)?;
    let nf = n as f64;
    let appendix_bound = if n >= 1 && 1.0 - zeta >= 1.0 / nf {
        Some(s * nf.powf(1.5) / (1.0 - zeta * zeta).powf(0.25))
    } else {
        None
    };
    Ok(Concentration {
        ratio: if total > 0.0 { part / total } else { 0.0 },
        lemma_bound: s * (nf + 1.0) * (nf + 1.0) / 2.0,
        appendix_bound,
    })
}

// ∫_Ω |p|, splitting each interval at the roots of p.
fn abs_integral(p: &ChebSeries, intervals: &[(f64, f64)]) -> Result<f64> {
    let anti = p.antiderivative();
    let mut total = 0.0;
    for &(a, b) in intervals {
        if b <= a {
            continue;
        }
        let mut cuts = vec![a];
        cuts.extend(crate::cheb::roots::roots_in_interval(p, a, b)?);
        cuts.push(b);
        for w in cuts.windows(2) {
            total += (anti.eval(w[1]) - anti.eval(w[0])).abs();
        }
    }
    Ok(total)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
