//! Best L1 polynomial approximation: interpolant shortcut, LP initialisation
//! with a refined mesh, and Newton's method on the sign-integral optimality
//! system.

use log::{debug, info};
use nalgebra::{DMatrix, DVector};

use crate::cheb::grid::{build_grid, interpolate_on_grid};
use crate::cheb::norms::{l1_norm, noise_level, sign_structure, Segment, SignStructure};
use crate::cheb::proxy::FuncRep;
use crate::cheb::series::{chebyshev_t_values, chebyshev_u_values, Basis, ChebSeries};
use crate::error::{L1Error, Result};
use crate::lp::{self, LpSolution, WeightedL1Fit};
use crate::recovery::{rip_bound, CORRUPTION_TOL};

/// Default stopping tolerance relative to `‖f‖₁`.
pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_ITER: usize = 50;
const MAX_HALVINGS: usize = 30;
const SMALL_DERIVATIVE: f64 = 1e-13;
const SINGULAR_COND: f64 = 1e14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Path {
    InterpolantShortcut,
    CorruptedPolynomial,
    NewtonConverged,
    NewtonStalled,
}

impl Path {
    pub fn as_str(&self) -> &'static str {
        match self {
            Path::InterpolantShortcut => "InterpolantShortcut",
            Path::CorruptedPolynomial => "CorruptedPolynomial",
            Path::NewtonConverged => "NewtonConverged",
            Path::NewtonStalled => "NewtonStalled",
        }
    }
}

/// How a Newton step was taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepFlags {
    /// Number of step halvings.
    pub halvings: usize,
    /// Negative identity used in place of the Jacobian.
    pub identity_fallback: bool,
    /// Diagonal shift added to a near-singular Jacobian.
    pub regularized: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
    pub optimality: f64,
    /// Near-best factor of this iterate, when defined.
    pub near_best_factor: Option<f64>,
    pub flags: StepFlags,
}

#[derive(Clone, Debug)]
pub struct NewtonState {
    pub k: usize,
    /// Second-kind coefficients.
    pub coeffs: ChebSeries,
    /// Sign-changing roots of `f − p`.
    pub roots: Vec<f64>,
    pub segments: Vec<Segment>,
    pub mu: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    /// `max |μ_j|`.
    pub optimality: f64,
    /// `‖f − p‖₁`.
    pub objective: f64,
    /// Typical error of `μ` caused by rounding in the computed roots.
    pub mu_noise: f64,
    pub flags: StepFlags,
}

#[derive(Clone, Debug)]
pub struct BestL1Result {
    pub polynomial: ChebSeries,
    pub path: Path,
    pub trace: Vec<TraceEntry>,
    pub near_best_factor: Option<f64>,
    pub l1_error: f64,
    pub mu: Vec<f64>,
    /// Tolerance actually used, relative to `‖f‖₁`.
    pub effective_tol: f64,
    pub lp_grid_size: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct BestL1Options {
    pub tol: f64,
    pub max_iter: usize,
    /// Try the interpolant shortcut first.
    pub shortcut: bool,
    /// Stop after the LP when `f` looks like a corrupted polynomial.
    pub corruption_check: bool,
    /// Accept convergence once `max |μ|` reaches its rounding level.
    pub noise_floor: bool,
}

impl Default for BestL1Options {
    fn default() -> Self {
        BestL1Options {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            shortcut: true,
            corruption_check: true,
            noise_floor: true,
        }
    }
}

/// `μ_j = ∫ sign(f − p) U_j`, summed over sign segments.
pub fn mu_from_segments(segments: &[Segment], n: usize) -> Vec<f64> {
    let mut mu = vec![0.0; n + 1];
    for s in segments {
        if s.sign == 0 {
            continue;
        }
        let tb = chebyshev_t_values(s.b, n + 1);
        let ta = chebyshev_t_values(s.a, n + 1);
        for (j, m) in mu.iter_mut().enumerate() {
            *m += s.sign as f64 * (tb[j + 1] - ta[j + 1]) / (j as f64 + 1.0);
        }
    }
    mu
}

/// `μ` for the residual `f − c`.
pub fn compute_mu(c: &ChebSeries, f: &FuncRep) -> Result<Vec<f64>> {
    let ss = sign_structure(&f.residual(c))?;
    Ok(mu_from_segments(&ss.segments, c.degree()))
}

/// `1 / (1 − (2/π)(n+2)² max|μ|)` when the denominator is positive.
pub fn near_best_factor(mu: &[f64], n: usize) -> Option<f64> {
    let m = mu.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let t = 2.0 / std::f64::consts::PI * ((n + 2) * (n + 2)) as f64 * m;
    if t < 1.0 {
        Some(1.0 / (1.0 - t))
    } else {
        None
    }
}

/// The interpolant on `build_grid(n)` when `f − p` has exactly `n+1`
/// sign changes. Otherwise the interpolant on `build_grid(n+1)` is tried:
/// if its top coefficient vanishes and its error changes sign exactly `n+2`
/// times, it is the best approximation of degree `n+1` and hence of `n`.
pub fn trial_interpolant(f: &FuncRep, n: usize) -> Result<Option<ChebSeries>> {
    let p = interpolate_on_grid(|x| f.eval(x), n);
    let ss = sign_structure(&f.residual(&p))?;
    if ss.sign_change_count() == n + 1 {
        return Ok(Some(p));
    }
    let q = interpolate_on_grid(|x| f.eval(x), n + 1);
    let scale = q.coeff_abs_sum().max(f.proxy().scale());
    let top = q.coeffs().get(n + 1).copied().unwrap_or(0.0);
    if top.abs() > 1e-14 * scale {
        return Ok(None);
    }
    let p = q.resized(n + 1);
    let ss = sign_structure(&f.residual(&p))?;
    if ss.sign_change_count() == n + 2 {
        debug!("degree-{} interpolant has vanishing top coefficient", n + 1);
        Ok(Some(p))
    } else {
        Ok(None)
    }
}

/// Grid size with `N + 1 = max(1000 + 50n, 5000)`.
pub fn lp_grid_size(n: usize) -> usize {
    (1000 + 50 * n).max(5000) - 1
}

/// Weighted ℓ1 fit on `build_grid(N)`.
pub fn lp_on_grid(f: &FuncRep, n: usize, big_n: usize) -> Result<LpSolution> {
    let g = build_grid(big_n);
    let prob = WeightedL1Fit::on_grid(&g, g.sample(|x| f.eval(x)), n)?;
    lp::solve(&prob, lp::DEFAULT_GAP_TOL)
}

/// LP initial guess on the default grid.
pub fn lp_initialize(f: &FuncRep, n: usize) -> Result<ChebSeries> {
    Ok(lp_on_grid(f, n, lp_grid_size(n))?.coeffs)
}

/// Weighted ℓ1 fit on the mesh refined around `roots`.
pub fn lp_refined(f: &FuncRep, n: usize, roots: &[f64], big_n: usize) -> Result<LpSolution> {
    let (pts, wts) = refine_mesh(roots, big_n);
    let vals = pts.iter().map(|&x| f.eval(x)).collect();
    let prob = WeightedL1Fit::new(pts, wts, vals, n)?;
    lp::solve(&prob, lp::DEFAULT_GAP_TOL)
}

/// About `N/2` midpoint-rule points on `∪[r − 4/N, r + 4/N]` and `N/2` on
/// the rest of [-1, 1]. Weights are cell widths and sum to 2.
pub fn refine_mesh(roots: &[f64], big_n: usize) -> (Vec<f64>, Vec<f64>) {
    let big_n = big_n.max(2);
    let delta = 4.0 / big_n as f64;
    let mut near: Vec<(f64, f64)> = Vec::new();
    for &r in roots {
        let (a, b) = ((r - delta).max(-1.0), (r + delta).min(1.0));
        if b <= a {
            continue;
        }
        match near.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => near.push((a, b)),
        }
    }
    if near.is_empty() {
        return midpoint_cells(&[(-1.0, 1.0)], big_n);
    }
    let mut far = Vec::new();
    let mut left = -1.0;
    for &(a, b) in &near {
        if a > left {
            far.push((left, a));
        }
        left = b;
    }
    if left < 1.0 {
        far.push((left, 1.0));
    }
    let half = big_n / 2;
    let (mut pts, mut wts) = midpoint_cells(&near, half);
    if !far.is_empty() {
        let (p2, w2) = midpoint_cells(&far, big_n - half);
        pts.extend(p2);
        wts.extend(w2);
    }
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&i, &j| pts[i].total_cmp(&pts[j]));
    (idx.iter().map(|&i| pts[i]).collect(), idx.iter().map(|&i| wts[i]).collect())
}

// Budget split proportionally to length, at least one cell per interval.
fn midpoint_cells(intervals: &[(f64, f64)], budget: usize) -> (Vec<f64>, Vec<f64>) {
    let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for &(a, b) in intervals {
        let m = (((b - a) / total) * budget as f64).round().max(1.0) as usize;
        let h = (b - a) / m as f64;
        for i in 0..m {
            pts.push(a + (i as f64 + 0.5) * h);
            wts.push(h);
        }
    }
    (pts, wts)
}

fn residual_derivative(f: &FuncRep, dc: &ChebSeries, x: f64) -> f64 {
    f.derivative_at(x) - dc.eval(x)
}

/// Evaluate roots, signs, `μ` and the Jacobian at `coeffs`.
pub fn newton_state(f: &FuncRep, coeffs: ChebSeries, k: usize) -> Result<NewtonState> {
    let coeffs = coeffs.to_second_kind();
    let n = coeffs.degree();
    let e = f.residual(&coeffs);
    let ss = sign_structure(&e)?;
    state_from_structure(f, coeffs, n, k, &ss, noise_level(&e))
}

fn state_from_structure(
    f: &FuncRep,
    coeffs: ChebSeries,
    n: usize,
    k: usize,
    ss: &SignStructure,
    noise: f64,
) -> Result<NewtonState> {
    let mu = mu_from_segments(&ss.segments, n);
    let optimality = mu.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let dc = coeffs.derivative();
    let scale = f.proxy().scale().max(coeffs.coeff_abs_sum());
    // residual values are accurate to a few ulps of the scale
    let value_err = noise / 16.0;
    let mut jac = DMatrix::zeros(n + 1, n + 1);
    let mut mu_noise = 0.0f64;
    let mut flags = StepFlags::default();
    for &r in &ss.sign_changes {
        let d = residual_derivative(f, &dc, r);
        if !(d.abs() >= SMALL_DERIVATIVE * scale) {
            flags.identity_fallback = true;
            continue;
        }
        let u = chebyshev_u_values(r, n);
        let w = 2.0 / d.abs();
        for i in 0..=n {
            for j in 0..=n {
                jac[(i, j)] -= w * u[i] * u[j];
            }
        }
        mu_noise += (value_err / d).powi(2);
    }
    if flags.identity_fallback {
        jac = -DMatrix::identity(n + 1, n + 1);
    }
    // root errors add incoherently across roots; the factor covers |U_j| growth
    let mu_noise = 4.0 * mu_noise.sqrt();
    Ok(NewtonState {
        k,
        coeffs,
        roots: ss.sign_changes.clone(),
        segments: ss.segments.clone(),
        mu,
        jacobian: jac,
        optimality,
        objective: ss.l1,
        mu_noise,
        flags,
    })
}

/// Newton direction `Δ` solving `J Δ = μ`, with the Jacobian shifted by
/// `−δI` when near singular.
fn newton_direction(state: &NewtonState) -> (DVector<f64>, bool) {
    let n1 = state.mu.len();
    let neg = -state.jacobian.clone();
    let ev = neg.clone().symmetric_eigenvalues();
    let (lo, hi) = ev
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e.abs())));
    let mut m = neg;
    let mut regularized = false;
    if !(lo > 0.0) || hi / lo > SINGULAR_COND {
        let delta = 1e-10 * hi.max(f64::MIN_POSITIVE);
        m += DMatrix::identity(n1, n1) * delta;
        regularized = true;
    }
    let mu = DVector::from_column_slice(&state.mu);
    // J = −m, so Δ = −m⁻¹ μ
    let sol = match m.clone().cholesky() {
        Some(ch) => ch.solve(&mu),
        None => m.lu().solve(&mu).unwrap_or_else(|| mu.clone()),
    };
    (-sol, regularized)
}

/// One safeguarded Newton step `c ← c − tΔ`, halving `t` until the objective
/// does not grow by more than `1e-14 ‖f‖₁`.
pub fn newton_step(state: &NewtonState, f: &FuncRep, f_l1: f64) -> Result<NewtonState> {
    let n = state.coeffs.degree();
    let (dir, regularized) = newton_direction(state);
    let mut t = 1.0;
    for h in 0..=MAX_HALVINGS {
        let step: Vec<f64> = state
            .coeffs
            .coeffs()
            .iter()
            .zip(dir.iter())
            .map(|(c, d)| c - t * d)
            .collect();
        let cand = ChebSeries::second_kind(step);
        let e = f.residual(&cand);
        let ss = sign_structure(&e)?;
        if ss.l1 <= state.objective + 1e-14 * f_l1 {
            let mut next = state_from_structure(f, cand, n, state.k + 1, &ss, noise_level(&e))?;
            let fallback = next.flags.identity_fallback;
            next.flags = StepFlags {
                halvings: h,
                identity_fallback: state.flags.identity_fallback,
                regularized,
            };
            // keep the Jacobian choice for the next step
            if fallback {
                next.flags.identity_fallback = true;
            }
            return Ok(next);
        }
        t *= 0.5;
    }
    Err(L1Error::StepFailure(format!(
        "no decrease after {MAX_HALVINGS} halvings at iteration {}",
        state.k
    )))
}

/// Best L1 approximation of degree `n`.
pub fn best_l1(f: &FuncRep, n: usize, opts: &BestL1Options) -> Result<BestL1Result> {
    let f_l1 = l1_norm(f.proxy())?.max(f64::MIN_POSITIVE);
    let mut tol = opts.tol;
    if f.tol() > 1e-14 {
        tol = tol.max(10.0 * f.tol());
    }

    if opts.shortcut {
        if let Some(p) = trial_interpolant(f, n)? {
            let p = p.to_second_kind().resized(n + 1);
            let st = newton_state(f, p, 0)?;
            info!("degree {n}: interpolant shortcut");
            return Ok(finish(st, Path::InterpolantShortcut, Vec::new(), tol, None, n));
        }
    }

    let big_n = lp_grid_size(n);
    let sol = lp_on_grid(f, n, big_n)?;
    if opts.corruption_check && looks_corrupted(&sol, big_n, n) {
        let st = newton_state(f, sol.coeffs.resized(n + 1), 0)?;
        info!("degree {n}: corrupted polynomial recovered by LP");
        return Ok(finish(st, Path::CorruptedPolynomial, Vec::new(), tol, Some(big_n), n));
    }

    let st0 = newton_state(f, sol.coeffs.resized(n + 1), 0)?;
    let refined = lp_refined(f, n, &st0.roots, big_n)?;
    let mut st = newton_state(f, refined.coeffs.resized(n + 1), 0)?;
    if st0.objective < st.objective {
        st = st0;
    }

    let mut trace = Vec::new();
    let mut best = st.clone();
    loop {
        trace.push(TraceEntry {
            iteration: st.k,
            objective: st.objective,
            optimality: st.optimality,
            near_best_factor: near_best_factor(&st.mu, n),
            flags: st.flags,
        });
        if st.objective < best.objective || (st.objective == best.objective && st.optimality < best.optimality) {
            best = st.clone();
        }
        let eff = effective_tol(tol, &st, f_l1, opts.noise_floor);
        if st.optimality < eff * f_l1 || st.optimality == 0.0 {
            let mut r = finish(st, Path::NewtonConverged, trace, eff, Some(big_n), n);
            r.effective_tol = eff;
            return Ok(r);
        }
        if st.k >= opts.max_iter || stagnated(&trace) {
            break;
        }
        match newton_step(&st, f, f_l1) {
            Ok(next) => st = next,
            Err(L1Error::StepFailure(msg)) => {
                debug!("{msg}");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let eff = effective_tol(tol, &best, f_l1, opts.noise_floor);
    Ok(finish(best, Path::NewtonStalled, trace, eff, Some(big_n), n))
}

fn effective_tol(tol: f64, st: &NewtonState, f_l1: f64, noise_floor: bool) -> f64 {
    if noise_floor {
        tol.max(st.mu_noise / f_l1)
    } else {
        tol
    }
}

// No halving of the optimality over the last three steps.
fn stagnated(trace: &[TraceEntry]) -> bool {
    let k = trace.len();
    k >= 4 && trace[k - 1].optimality > 0.5 * trace[k - 4].optimality
}

fn looks_corrupted(sol: &LpSolution, big_n: usize, n: usize) -> bool {
    let r = sol.residuals();
    let scale = sol.coeffs.coeff_abs_sum().max(r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    if scale == 0.0 {
        return true;
    }
    let k = r.iter().filter(|v| v.abs() > CORRUPTION_TOL * scale).count();
    rip_bound(big_n, n, k).sufficient
}

fn finish(
    st: NewtonState,
    path: Path,
    trace: Vec<TraceEntry>,
    tol: f64,
    lp_grid_size: Option<usize>,
    n: usize,
) -> BestL1Result {
    BestL1Result {
        near_best_factor: near_best_factor(&st.mu, n),
        l1_error: st.objective,
        mu: st.mu,
        polynomial: st.coeffs,
        path,
        trace,
        effective_tol: tol,
        lp_grid_size,
    }
}

/// Convenience wrapper with default options.
pub fn best_l1_default(f: &FuncRep, n: usize) -> Result<BestL1Result> {
    best_l1(f, n, &BestL1Options::default())
}

/// The first-kind form of a result polynomial.
pub fn first_kind(p: &ChebSeries) -> ChebSeries {
    p.to_basis(Basis::FirstKind)
}
