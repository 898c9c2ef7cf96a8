//! Weighted ℓ1 polynomial fitting as a linear program.
//!
//! `min Σ w_i |f(y_i) − Σ_j c_j U_j(y_i)|` is solved through its bounded dual
//! with a Mehrotra predictor-corrector interior-point method. Each iteration
//! works with the `(n+1)×(n+1)` normal matrix only, so the cost per iteration
//! is `O(N n²)`. The interior iterate is then purified to a vertex and
//! finished with exact descent pivots.

use nalgebra::{DMatrix, DVector};

use crate::cheb::grid::ChebGrid;
use crate::cheb::series::{chebyshev_u_values, ChebSeries};
use crate::error::{L1Error, Result};

/// Default relative duality-gap tolerance.
pub const DEFAULT_GAP_TOL: f64 = 1e-10;

/// A weighted ℓ1 fitting problem in the second-kind basis.
#[derive(Clone, Debug)]
pub struct WeightedL1Fit {
    points: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
    degree: usize,
}

impl WeightedL1Fit {
    pub fn new(points: Vec<f64>, weights: Vec<f64>, values: Vec<f64>, degree: usize) -> Result<Self> {
        let m = points.len();
        if m == 0 || weights.len() != m || values.len() != m {
            return Err(L1Error::InvalidInput(format!(
                "inconsistent lengths: {} points, {} weights, {} values",
                m,
                weights.len(),
                values.len()
            )));
        }
        if degree >= m {
            return Err(L1Error::InvalidInput(format!(
                "degree {degree} needs more than {m} samples"
            )));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(L1Error::InvalidInput(
                "sample points must be strictly increasing".into(),
            ));
        }
        if points.iter().any(|x| !(-1.0..=1.0).contains(x)) {
            return Err(L1Error::InvalidInput("sample points must lie in [-1, 1]".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(L1Error::InvalidInput("weights must be positive".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(L1Error::InvalidInput("values must be finite".into()));
        }
        Ok(WeightedL1Fit {
            points,
            weights,
            values,
            degree,
        })
    }

    /// The problem on a Chebyshev grid with its quadrature weights.
    pub fn on_grid(grid: &ChebGrid, values: Vec<f64>, degree: usize) -> Result<Self> {
        Self::new(grid.points().to_vec(), grid.weights().to_vec(), values, degree)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `max |f(y_i)|`, at least the smallest positive normal.
    pub fn value_scale(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE)
    }

    /// `Σ w_i |f(y_i)|`, the objective at `c = 0`.
    pub fn objective_scale(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.abs())
            .sum()
    }

    /// `Φ[i][j] = U_j(y_i)`.
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        let p = self.degree + 1;
        let mut phi = DMatrix::zeros(self.points.len(), p);
        for (i, &y) in self.points.iter().enumerate() {
            for (j, u) in chebyshev_u_values(y, self.degree).into_iter().enumerate() {
                phi[(i, j)] = u;
            }
        }
        phi
    }

    pub fn residuals(&self, coeffs: &[f64]) -> Vec<f64> {
        let p = ChebSeries::second_kind(coeffs.to_vec());
        self.points
            .iter()
            .zip(&self.values)
            .map(|(&y, &f)| f - p.eval(y))
            .collect()
    }

    pub fn objective(&self, coeffs: &[f64]) -> f64 {
        self.residuals(coeffs)
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * r.abs())
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    IterationLimit,
    Infeasible,
}

/// Solution of a [`WeightedL1Fit`].
#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Second-kind coefficients `c_0..c_n`.
    pub coeffs: ChebSeries,
    /// Positive parts of the residuals.
    pub u: Vec<f64>,
    /// Negative parts of the residuals.
    pub v: Vec<f64>,
    pub objective: f64,
    /// Primal objective minus the best dual bound found.
    pub gap: f64,
    pub status: LpStatus,
    pub iterations: usize,
    /// Dual sign vector `σ ∈ [-1, 1]^{N+1}` with `Σ w_i σ_i U_j(y_i) ≈ 0`.
    pub dual: Vec<f64>,
}

impl LpSolution {
    pub fn residuals(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(u, v)| u - v).collect()
    }
}

#[derive(Clone, Debug)]
pub struct LpOptions {
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Run vertex purification and descent pivots after the interior phase.
    pub purify: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            gap_tol: DEFAULT_GAP_TOL,
            max_iter: 100,
            purify: true,
        }
    }
}

/// Solve with the given relative gap tolerance and default options otherwise.
pub fn solve(problem: &WeightedL1Fit, gap_tol: f64) -> Result<LpSolution> {
    solve_with(
        problem,
        &LpOptions {
            gap_tol,
            ..LpOptions::default()
        },
    )
}

pub fn solve_with(problem: &WeightedL1Fit, opts: &LpOptions) -> Result<LpSolution> {
    if !(opts.gap_tol > 0.0) {
        return Err(L1Error::InvalidInput("gap_tol must be positive".into()));
    }
    let phi = problem.basis_matrix();
    let w = DVector::from_column_slice(problem.weights());
    let f = DVector::from_column_slice(problem.values());
    let aw = DMatrix::from_fn(phi.nrows(), phi.ncols(), |i, j| w[i] * phi[(i, j)]);
    let bw = f.component_mul(&w);
    let scale = bw.iter().map(|v| v.abs()).sum::<f64>();

    let ipm = interior_point(&aw, &bw, opts);
    let mut coeffs = ipm.coeffs.clone();
    let mut dual = ipm.sigma.clone();
    let mut dual_bound = bw.dot(&dual);

    if opts.purify && scale > 0.0 {
        let (c, vertex_dual) = purify(problem, &phi, &coeffs);
        if let Some(c) = c {
            coeffs = c;
        }
        if let Some(sig) = vertex_dual {
            let bound = bw.dot(&sig);
            if bound > dual_bound {
                dual_bound = bound;
                dual = sig;
            }
        }
    }

    let r = problem.residuals(coeffs.as_slice());
    let u: Vec<f64> = r.iter().map(|v| v.max(0.0)).collect();
    let v: Vec<f64> = r.iter().map(|x| (-x).max(0.0)).collect();
    let objective: f64 = problem
        .weights()
        .iter()
        .zip(&u)
        .zip(&v)
        .map(|((w, u), v)| w * (u + v))
        .sum();
    let gap = (objective - dual_bound).max(0.0);
    let converged = ipm.converged || gap <= opts.gap_tol * scale.max(f64::MIN_POSITIVE);
    let sol = LpSolution {
        coeffs: ChebSeries::second_kind(coeffs.as_slice().to_vec()),
        u,
        v,
        objective,
        gap,
        status: if converged {
            LpStatus::Optimal
        } else {
            LpStatus::IterationLimit
        },
        iterations: ipm.iterations,
        dual: dual.as_slice().to_vec(),
    };
    log::debug!(
        "lp: m={} p={} iterations={} objective={:.6e} gap={:.3e}",
        problem.len(),
        problem.degree() + 1,
        sol.iterations,
        sol.objective,
        sol.gap
    );
    if sol.status == LpStatus::IterationLimit {
        return Err(L1Error::IterationLimit {
            iterations: sol.iterations,
            best: Box::new(sol),
        });
    }
    Ok(sol)
}

struct IpmResult {
    coeffs: DVector<f64>,
    sigma: DVector<f64>,
    iterations: usize,
    converged: bool,
}

/// Interior-point phase on `max bᵀσ s.t. Aᵀσ = 0, −1 ≤ σ ≤ 1`, written with
/// `x = (σ + 1)/2 ∈ [0, 1]`.
fn interior_point(aw: &DMatrix<f64>, bw: &DVector<f64>, opts: &LpOptions) -> IpmResult {
    let m = aw.nrows();
    let scale: f64 = bw.iter().map(|v| v.abs()).sum();
    let c0 = weighted_lstsq(aw, bw);
    if scale == 0.0 {
        return IpmResult {
            coeffs: DVector::zeros(aw.ncols()),
            sigma: DVector::zeros(m),
            iterations: 0,
            converged: true,
        };
    }
    // dual variable y = −c; dual slack z − t = −(bw − Aw c)
    let mut y = -&c0;
    let r0 = bw - aw * &c0;
    let mean_abs = r0.iter().map(|v| v.abs()).sum::<f64>() / m as f64;
    let delta = (0.1 * mean_abs).max(1e-3 * scale / m as f64);
    let mut x = DVector::from_element(m, 0.5);
    let mut s = DVector::from_element(m, 0.5);
    let mut z = r0.map(|r| (-r).max(0.0) + delta);
    let mut t = r0.map(|r| r.max(0.0) + delta);

    let mut best_y = y.clone();
    let mut best_gap = f64::INFINITY;
    let mut best_x = x.clone();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it;
        let gap = x.dot(&z) + s.dot(&t);
        if gap < best_gap {
            best_gap = gap;
            best_y.copy_from(&y);
            best_x.copy_from(&x);
        }
        if gap <= opts.gap_tol * scale {
            converged = true;
            break;
        }
        let mu = gap / (2 * m) as f64;
        let q = DVector::from_fn(m, |i, _| 1.0 / (z[i] / x[i] + t[i] / s[i]));
        let chol = match normal_factor(aw, &q) {
            Some(c) => c,
            None => break,
        };

        // predictor
        let rho = &t - &z;
        let (dx, _) = newton_dir(aw, &q, &rho, &chol);
        let dz = DVector::from_fn(m, |i, _| -z[i] - z[i] / x[i] * dx[i]);
        let dt = DVector::from_fn(m, |i, _| -t[i] + t[i] / s[i] * dx[i]);
        let ds = -&dx;
        let ap = step_to_boundary(&x, &dx).min(step_to_boundary(&s, &ds));
        let ad = step_to_boundary(&z, &dz).min(step_to_boundary(&t, &dt));
        let mut mu_aff = 0.0;
        for i in 0..m {
            mu_aff += (x[i] + ap * dx[i]) * (z[i] + ad * dz[i])
                + (s[i] + ap * ds[i]) * (t[i] + ad * dt[i]);
        }
        mu_aff /= (2 * m) as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let target = sigma * mu;

        // corrector
        let rho = DVector::from_fn(m, |i, _| {
            (target - x[i] * z[i] - dx[i] * dz[i]) / x[i]
                - (target - s[i] * t[i] - ds[i] * dt[i]) / s[i]
        });
        let (dx2, dy2) = newton_dir(aw, &q, &rho, &chol);
        let dz2 = DVector::from_fn(m, |i, _| {
            (target - x[i] * z[i] - dx[i] * dz[i]) / x[i] - z[i] / x[i] * dx2[i]
        });
        let dt2 = DVector::from_fn(m, |i, _| {
            (target - s[i] * t[i] - ds[i] * dt[i]) / s[i] + t[i] / s[i] * dx2[i]
        });
        let ds2 = -&dx2;
        let ap = (0.9995 * step_to_boundary(&x, &dx2).min(step_to_boundary(&s, &ds2))).min(1.0);
        let ad = (0.9995 * step_to_boundary(&z, &dz2).min(step_to_boundary(&t, &dt2))).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || (ap == 0.0 && ad == 0.0) {
            break;
        }
        x.axpy(ap, &dx2, 1.0);
        s = DVector::from_fn(m, |i, _| 1.0 - x[i]);
        // keep s strictly positive and consistent with x
        for i in 0..m {
            if s[i] <= 0.0 || x[i] <= 0.0 {
                let xi = x[i].clamp(1e-300, 1.0 - 1e-16);
                x[i] = xi;
                s[i] = 1.0 - xi;
            }
        }
        y.axpy(ad, &dy2, 1.0);
        z.axpy(ad, &dz2, 1.0);
        t.axpy(ad, &dt2, 1.0);
        iterations = it + 1;
    }
    let final_gap = x.dot(&z) + s.dot(&t);
    if final_gap < best_gap {
        best_y.copy_from(&y);
        best_x.copy_from(&x);
        converged |= final_gap <= opts.gap_tol * scale;
    }
    IpmResult {
        coeffs: -best_y,
        sigma: best_x.map(|v| 2.0 * v - 1.0),
        iterations,
        converged,
    }
}

fn step_to_boundary(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    let mut a = f64::INFINITY;
    for (vi, di) in v.iter().zip(dv.iter()) {
        if *di < 0.0 {
            a = a.min(-vi / di);
        }
    }
    a
}

fn normal_factor(aw: &DMatrix<f64>, q: &DVector<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let mut b = aw.clone();
    for (i, mut row) in b.row_iter_mut().enumerate() {
        row *= q[i].sqrt();
    }
    let mut mtx = b.tr_mul(&b);
    let tr = mtx.trace() / mtx.nrows() as f64;
    for k in 0..6 {
        if let Some(c) = mtx.clone().cholesky() {
            return Some(c);
        }
        let reg = tr * 1e-14 * 100f64.powi(k);
        for i in 0..mtx.nrows() {
            mtx[(i, i)] += reg;
        }
    }
    None
}

fn newton_dir(
    aw: &DMatrix<f64>,
    q: &DVector<f64>,
    rho: &DVector<f64>,
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
) -> (DVector<f64>, DVector<f64>) {
    let qrho = q.component_mul(rho);
    let rhs = -aw.tr_mul(&qrho);
    let dy = chol.solve(&rhs);
    let dx = q.component_mul(&(aw * &dy + rho));
    (dx, dy)
}

/// Least squares `min ‖b − A c‖₂` via QR, with an SVD fallback.
pub(crate) fn weighted_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let p = a.ncols();
    if a.nrows() >= p {
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_min = (0..p).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        let diag_max = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        if diag_min > 1e-13 * diag_max {
            let qtb = qr.q().tr_mul(b);
            if let Some(c) = r.solve_upper_triangular(&qtb) {
                return c;
            }
        }
    }
    a.clone()
        .svd(true, true)
        .solve(b, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(p))
}

/// Candidate refinement: least squares on near-zero residual sets, then a
/// vertex built from the smallest residuals followed by descent pivots.
fn purify(
    problem: &WeightedL1Fit,
    phi: &DMatrix<f64>,
    c_ipm: &DVector<f64>,
) -> (Option<DVector<f64>>, Option<DVector<f64>>) {
    let m = problem.len();
    let p = problem.degree() + 1;
    let fscale = problem.value_scale();
    let w = problem.weights();
    let f = problem.values();
    let objective = |c: &DVector<f64>| -> f64 {
        let fit = phi * c;
        (0..m).map(|i| w[i] * (f[i] - fit[i]).abs()).sum()
    };

    let mut best = c_ipm.clone();
    let mut best_obj = objective(&best);
    let r_ipm: Vec<f64> = {
        let fit = phi * c_ipm;
        (0..m).map(|i| f[i] - fit[i]).collect()
    };

    for tau in [1e-6, 1e-8, 1e-10, 1e-12] {
        let zset: Vec<usize> = (0..m).filter(|&i| r_ipm[i].abs() <= tau * fscale).collect();
        if zset.len() < p {
            continue;
        }
        let a = DMatrix::from_fn(zset.len(), p, |k, j| w[zset[k]] * phi[(zset[k], j)]);
        let b = DVector::from_fn(zset.len(), |k, _| w[zset[k]] * f[zset[k]]);
        let c = weighted_lstsq(&a, &b);
        let obj = objective(&c);
        if obj <= best_obj {
            best = c;
            best_obj = obj;
        }
    }

    let mut vertex_dual = None;
    let r_best: Vec<f64> = {
        let fit = phi * &best;
        (0..m).map(|i| f[i] - fit[i]).collect()
    };
    if let Some(basis) = select_basis(phi, &r_best, w) {
        if let Some((c, dual)) = vertex_descent(problem, phi, basis, 20 * p + 50) {
            let obj = objective(&c);
            if obj <= best_obj * (1.0 + 1e-15) {
                best = c;
                best_obj = obj;
            }
            vertex_dual = dual;
        }
    }
    let _ = best_obj;
    (Some(best), vertex_dual)
}

/// `p` rows with the smallest scaled residuals whose basis rows are
/// independent, chosen greedily.
fn select_basis(phi: &DMatrix<f64>, r: &[f64], w: &[f64]) -> Option<Vec<usize>> {
    let m = phi.nrows();
    let p = phi.ncols();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| (w[a] * r[a].abs()).total_cmp(&(w[b] * r[b].abs())));
    let mut basis = Vec::with_capacity(p);
    let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(p);
    for &i in &order {
        let row = phi.row(i).transpose();
        let norm = row.norm();
        let mut v = row.clone_owned();
        for _ in 0..2 {
            for q in &ortho {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        let vn = v.norm();
        if vn > 1e-8 * norm {
            ortho.push(v / vn);
            basis.push(i);
            if basis.len() == p {
                return Some(basis);
            }
        }
    }
    None
}

/// Exact descent over vertices of the ℓ1 fit. At a vertex `Z` the fit
/// interpolates `f` on `Z`; it is optimal iff the multipliers of `Z` lie in
/// `[-w_k, w_k]`. Otherwise one interpolation condition is released and the
/// objective is minimised along that edge.
fn vertex_descent(
    problem: &WeightedL1Fit,
    phi: &DMatrix<f64>,
    mut basis: Vec<usize>,
    max_pivots: usize,
) -> Option<(DVector<f64>, Option<DVector<f64>>)> {
    let m = problem.len();
    let p = phi.ncols();
    let w = problem.weights();
    let f = problem.values();
    let ztol = 1e-13 * problem.value_scale();

    let mut best: Option<(f64, DVector<f64>)> = None;
    for _ in 0..=max_pivots {
        let phi_z = DMatrix::from_fn(p, p, |k, j| phi[(basis[k], j)]);
        let lu = phi_z.clone().lu();
        let f_z = DVector::from_fn(p, |k, _| f[basis[k]]);
        let c = lu.solve(&f_z)?;
        let fit = phi * &c;
        let r: Vec<f64> = (0..m).map(|i| f[i] - fit[i]).collect();
        let obj: f64 = (0..m).map(|i| w[i] * r[i].abs()).sum();
        match &best {
            Some((b, _)) if obj > *b * (1.0 + 1e-14) + 1e-300 => break,
            _ => best = Some((obj, c.clone())),
        }

        let in_basis = {
            let mut v = vec![false; m];
            for &k in &basis {
                v[k] = true;
            }
            v
        };
        let sign = |i: usize| -> f64 {
            if r[i] > ztol {
                1.0
            } else if r[i] < -ztol {
                -1.0
            } else {
                0.0
            }
        };
        // g = Σ_{i∉Z} w_i σ_i Φ_iᵀ
        let mut g = DVector::zeros(p);
        for i in 0..m {
            if !in_basis[i] {
                let s = sign(i);
                if s != 0.0 {
                    g.axpy(w[i] * s, &phi.row(i).transpose(), 1.0);
                }
            }
        }
        let lut = phi_z.transpose().lu();
        let v = lut.solve(&g)?;
        // multipliers of the basis rows are σ_k = −v_k / w_k
        let (mut kk, mut excess) = (usize::MAX, 0.0);
        for k in 0..p {
            let e = v[k].abs() - w[basis[k]];
            if e > excess * (1.0 + 1e-12) && e > 1e-12 * w[basis[k]] {
                kk = k;
                excess = e;
            }
        }
        if kk == usize::MAX {
            let mut sig = DVector::from_fn(m, |i, _| sign(i));
            for (k, &i) in basis.iter().enumerate() {
                sig[i] = (-v[k] / w[i]).clamp(-1.0, 1.0);
            }
            return Some((c, Some(sig)));
        }
        // edge direction: Φ_Z d = s e_k
        let s = v[kk].signum();
        let mut ek = DVector::zeros(p);
        ek[kk] = s;
        let d = lu.solve(&ek)?;
        let a = phi * &d;
        let mut slope = w[basis[kk]] - v[kk].abs();
        let mut bps: Vec<(f64, usize)> = (0..m)
            .filter(|&i| !in_basis[i] && a[i].abs() > 1e-300)
            .map(|i| (r[i] / a[i], i))
            .filter(|(tb, _)| *tb >= 0.0)
            .collect();
        bps.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut enter = None;
        for (_, i) in bps {
            slope += 2.0 * w[i] * a[i].abs();
            if slope >= 0.0 {
                enter = Some(i);
                break;
            }
        }
        match enter {
            Some(i) => basis[kk] = i,
            None => break,
        }
    }
    best.map(|(_, c)| (c, None))
}

/// `max_j |Σ_i w_i σ_i U_j(y_i)|` for the residual sign vector, with `σ`
/// on the zero set chosen in `[-1, 1]` to make it small.
pub fn dual_certificate(solution: &LpSolution, problem: &WeightedL1Fit) -> Result<f64> {
    if solution.status != LpStatus::Optimal {
        return Err(L1Error::CertificateUnavailable);
    }
    let m = problem.len();
    let p = problem.degree() + 1;
    let phi = problem.basis_matrix();
    let w = problem.weights();
    let r = solution.residuals();
    let ztol = 1e-11 * problem.value_scale();
    let free: Vec<usize> = (0..m).filter(|&i| r[i].abs() <= ztol).collect();
    let mut sigma: Vec<f64> = (0..m)
        .map(|i| {
            if r[i] > ztol {
                1.0
            } else if r[i] < -ztol {
                -1.0
            } else {
                solution.dual.get(i).copied().unwrap_or(0.0).clamp(-1.0, 1.0)
            }
        })
        .collect();
    let residual_vec = |sigma: &[f64]| -> DVector<f64> {
        let mut g = DVector::zeros(p);
        for i in 0..m {
            if sigma[i] != 0.0 {
                g.axpy(w[i] * sigma[i], &phi.row(i).transpose(), 1.0);
            }
        }
        g
    };
    let mut g = residual_vec(&sigma);
    let mut best = g.amax();
    if free.is_empty() || best == 0.0 {
        return Ok(best);
    }
    let mut active: Vec<usize> = free.clone();
    for _ in 0..30 {
        if active.is_empty() {
            break;
        }
        // min-norm correction over the unclamped free entries
        let mf = DMatrix::from_fn(p, active.len(), |j, k| w[active[k]] * phi[(active[k], j)]);
        let gram = &mf * mf.transpose();
        let lam = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => match gram.svd(true, true).solve(&g, 1e-14) {
                Ok(v) => v,
                Err(_) => break,
            },
        };
        let delta = -(mf.transpose() * lam);
        let mut clamped = Vec::new();
        for (k, &i) in active.iter().enumerate() {
            let v = sigma[i] + delta[k];
            sigma[i] = v.clamp(-1.0, 1.0);
            if v.abs() >= 1.0 {
                clamped.push(i);
            }
        }
        g = residual_vec(&sigma);
        best = best.min(g.amax());
        if clamped.is_empty() || best <= 1e-15 * w.iter().sum::<f64>() {
            break;
        }
        active.retain(|i| !clamped.contains(i));
    }
    Ok(best)
}
