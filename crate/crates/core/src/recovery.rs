//! Exact recovery of corrupted polynomials by ℓ1 minimisation, the null-space
//! basis with its restricted isometry constants, recovery thresholds and a
//! brute-force ℓ0 oracle.

use nalgebra::{DMatrix, DVector};

use crate::cheb::grid::{build_grid, ChebGrid};
use crate::cheb::norms::linf_norm;
use crate::cheb::proxy::{Corruption, FuncRep, Piecewise};
use crate::cheb::series::{chebyshev_u_values, ChebSeries};
use crate::error::{L1Error, Result};
use crate::lp::{self, weighted_lstsq, WeightedL1Fit};

/// Enumeration guard for brute-force searches.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;
/// Samples with residual above this fraction of `max |f|` count as corrupted.
pub const CORRUPTION_TOL: f64 = 1e-11;

/// Orthonormal basis `V` of the left null space of the scaled Vandermonde
/// block, `V[i][ℓ] = √(2/(N+2)) √(1 − x_i²) U_{n+1+ℓ}(x_i)`.
#[derive(Clone, Debug)]
pub struct NullBasis {
    pub big_n: usize,
    pub n: usize,
    pub v: DMatrix<f64>,
}

pub fn null_space_basis(big_n: usize, n: usize) -> Result<NullBasis> {
    if big_n <= n {
        return Err(L1Error::InvalidInput(format!("need N > n, got N={big_n}, n={n}")));
    }
    let g = build_grid(big_n);
    let scale = (2.0 / (big_n as f64 + 2.0)).sqrt();
    let cols = big_n - n;
    let mut v = DMatrix::zeros(big_n + 1, cols);
    for (i, &x) in g.points().iter().enumerate() {
        let u = chebyshev_u_values(x, big_n);
        let wt = scale * g.sin_theta()[i];
        for l in 0..cols {
            v[(i, l)] = wt * u[n + 1 + l];
        }
    }
    Ok(NullBasis { big_n, n, v })
}

/// `D Φ` with the same row scaling as [`NullBasis`].
pub fn scaled_vandermonde(big_n: usize, n: usize) -> DMatrix<f64> {
    let g = build_grid(big_n);
    let scale = (2.0 / (big_n as f64 + 2.0)).sqrt();
    DMatrix::from_fn(big_n + 1, n + 1, |i, j| {
        scale * g.sin_theta()[i] * chebyshev_u_values(g.points()[i], n)[j]
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RipBound {
    pub delta: f64,
    pub sufficient: bool,
}

/// `δ_k ≤ 2(n+1)k/(N+2)`; recovery is guaranteed when `N+1 > 6(n+1)k − 1`.
pub fn rip_bound(big_n: usize, n: usize, k: usize) -> RipBound {
    let delta = 2.0 * (n as f64 + 1.0) * k as f64 / (big_n as f64 + 2.0);
    let sufficient = (big_n as i128 + 1) > 6 * (n as i128 + 1) * k as i128 - 1;
    RipBound { delta, sufficient }
}

/// `C(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    first: bool,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            first: true,
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.first {
            self.first = false;
            return Some(self.idx.clone());
        }
        let k = self.idx.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
        self.done = true;
        None
    }
}

/// Exact `δ_k` of `Vᵀ` by enumerating all supports of size `k`.
pub fn rip_bruteforce(big_n: usize, n: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    let count = binomial(big_n + 1, k);
    if count > ENUMERATION_LIMIT {
        return Err(L1Error::TooLarge(count));
    }
    let nb = null_space_basis(big_n, n)?;
    let gram_full = &nb.v * nb.v.transpose();
    let mut worst = 0.0f64;
    for s in Combinations::new(big_n + 1, k) {
        let g = DMatrix::from_fn(k, k, |a, b| gram_full[(s[a], s[b])]);
        let ev = g.symmetric_eigenvalues();
        let (lo, hi) = ev
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| (l.min(e), h.max(e)));
        worst = worst.max(hi - 1.0).max(1.0 - lo);
    }
    Ok(worst)
}

/// Which recovery guarantees apply, with the quantities they compare.
#[derive(Clone, Debug, Default)]
pub struct Certificate {
    /// ℓ0 uniqueness: `k ≤ (N − n)/2`.
    pub l0_unique: bool,
    /// ℓ1 = ℓ0 recovery: `N + 1 > 6(n+1)k − 1`.
    pub l1_sufficient: bool,
    pub rip_delta: f64,
    /// Corruption measure, when known.
    pub measure: Option<f64>,
    /// Global threshold `1/(n+1)²` and whether `s` is below it.
    pub global_threshold: f64,
    pub below_global: Option<bool>,
    /// Centred threshold `(1−ζ²)^{1/4} n^{−3/2}/2`, when defined.
    pub centered_threshold: Option<f64>,
    pub below_centered: Option<bool>,
    /// The stricter `min(1, 1/(4n²))` variant.
    pub strict_threshold: f64,
    pub below_strict: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct RecoveryReport {
    pub recovered: ChebSeries,
    pub corrupted_indices: Vec<usize>,
    pub k: usize,
    /// Largest residual outside the declared corruption set, or outside the
    /// detected set when no metadata is known.
    pub residual_max_off_support: f64,
    pub certificate: Certificate,
    pub exact: bool,
    pub big_n: usize,
    pub n: usize,
    pub lp_objective: f64,
    /// Measure of the grid cells holding flagged samples.
    pub support_measure: f64,
    /// `‖recovered − f₀‖_∞` when `f₀` is a known polynomial.
    pub generator_error: Option<f64>,
}

/// Recover from samples on `build_grid(N)`, `N = samples.len() − 1`.
pub fn recover_l1(
    samples: &[f64],
    n: usize,
    tol: f64,
    corruption: Option<&Corruption>,
) -> Result<RecoveryReport> {
    if samples.is_empty() {
        return Err(L1Error::InvalidInput("no samples".into()));
    }
    let big_n = samples.len() - 1;
    if big_n < n {
        return Err(L1Error::InvalidInput(format!("need N ≥ n, got N={big_n}, n={n}")));
    }
    let grid = build_grid(big_n);
    let prob = WeightedL1Fit::on_grid(&grid, samples.to_vec(), n)?;
    let sol = lp::solve(&prob, lp::DEFAULT_GAP_TOL)?;
    let recovered = sol.coeffs.clone();
    let r = sol.residuals();
    let thresh = tol * prob.value_scale();
    let corrupted_indices: Vec<usize> = (0..r.len()).filter(|&i| r[i].abs() > thresh).collect();
    let k = corrupted_indices.len();

    let residual_max_off_support = match corruption {
        Some(c) => grid
            .points()
            .iter()
            .zip(&r)
            .filter(|(x, _)| !c.contains(**x))
            .fold(0.0f64, |m, (_, v)| m.max(v.abs())),
        None => (0..r.len())
            .filter(|i| corrupted_indices.binary_search(i).is_err())
            .fold(0.0f64, |m, i| m.max(r[i].abs())),
    };

    let rip = rip_bound(big_n, n, k);
    let certificate = certificate(big_n, n, k, rip, corruption);
    let exact = residual_max_off_support <= thresh && rip.sufficient;
    let generator_error = match corruption.and_then(|c| c.clean()) {
        Some(p0) => {
            let diff = recovered.sub(p0);
            Some(linf_norm(&Piecewise::from_series(&diff))?.0)
        }
        None => None,
    };
    Ok(RecoveryReport {
        recovered,
        k,
        residual_max_off_support,
        certificate,
        exact,
        big_n,
        n,
        lp_objective: sol.objective,
        support_measure: cell_measure(&grid, &corrupted_indices),
        generator_error,
        corrupted_indices,
    })
}

/// Sample `f` on `build_grid(N)` and recover.
pub fn recover_l1_func(f: &FuncRep, n: usize, big_n: usize, tol: f64) -> Result<RecoveryReport> {
    let grid = build_grid(big_n);
    let samples = grid.sample(|x| f.eval(x));
    recover_l1(&samples, n, tol, f.corruption())
}

fn certificate(
    big_n: usize,
    n: usize,
    k: usize,
    rip: RipBound,
    corruption: Option<&Corruption>,
) -> Certificate {
    let global = 1.0 / ((n as f64 + 1.0) * (n as f64 + 1.0));
    let strict = if n == 0 {
        1.0
    } else {
        (1.0f64).min(1.0 / (4.0 * (n * n) as f64))
    };
    let measure = corruption.map(|c| c.measure());
    let centered = corruption.and_then(|c| {
        exact_recovery_threshold(n, ThresholdVariant::Centered(c.zeta())).ok()
    });
    Certificate {
        l0_unique: 2 * k <= big_n - n,
        l1_sufficient: rip.sufficient,
        rip_delta: rip.delta,
        measure,
        global_threshold: global,
        below_global: measure.map(|s| s < global),
        centered_threshold: centered,
        below_centered: match (measure, centered) {
            (Some(s), Some(t)) => Some(s <= t),
            _ => None,
        },
        strict_threshold: strict,
        below_strict: measure.map(|s| s < strict),
    }
}

fn cell_measure(grid: &ChebGrid, idx: &[usize]) -> f64 {
    let h = std::f64::consts::PI / (2.0 * (grid.size() as f64 + 2.0));
    idx.iter()
        .map(|&i| 2.0 * grid.sin_theta()[i] * h.sin())
        .sum()
}

/// Smallest set of discarded samples leaving a degree-`n` fit that matches
/// every remaining sample to `1e-11 · max |f|`. Discard sets are tried by
/// increasing size in lexicographic order.
pub fn recover_l0_oracle(samples: &[f64], n: usize, k_max: usize) -> Result<(ChebSeries, Vec<usize>)> {
    if samples.is_empty() {
        return Err(L1Error::InvalidInput("no samples".into()));
    }
    let big_n = samples.len() - 1;
    if big_n < n {
        return Err(L1Error::InvalidInput(format!("need N ≥ n, got N={big_n}, n={n}")));
    }
    let mut total: u128 = 0;
    for k in 0..=k_max.min(big_n + 1) {
        total = total.saturating_add(binomial(big_n + 1, k));
    }
    if total > ENUMERATION_LIMIT {
        return Err(L1Error::TooLarge(total));
    }
    let grid = build_grid(big_n);
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-11 * scale.max(f64::MIN_POSITIVE);
    // rows scaled by sin θ keep the basis well conditioned
    let rows: Vec<Vec<f64>> = grid
        .points()
        .iter()
        .zip(grid.sin_theta())
        .map(|(&x, &s)| chebyshev_u_values(x, n).into_iter().map(|u| u * s).collect())
        .collect();
    for k in 0..=k_max.min(big_n - n) {
        for discard in Combinations::new(big_n + 1, k) {
            let keep: Vec<usize> = (0..=big_n).filter(|i| discard.binary_search(i).is_err()).collect();
            let a = DMatrix::from_fn(keep.len(), n + 1, |r, j| rows[keep[r]][j]);
            let b = DVector::from_fn(keep.len(), |r, _| samples[keep[r]] * grid.sin_theta()[keep[r]]);
            let c = weighted_lstsq(&a, &b);
            let p = ChebSeries::second_kind(c.as_slice().to_vec());
            let ok = keep
                .iter()
                .all(|&i| (samples[i] - p.eval(grid.points()[i])).abs() <= tol);
            if ok {
                return Ok((p, discard));
            }
        }
    }
    Err(L1Error::NotFound(format!(
        "no degree-{n} fit with at most {k_max} discarded samples"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdVariant {
    Global,
    /// Corruption inside `[-ζ, ζ]`.
    Centered(f64),
}

/// Largest corruption measure with a recovery guarantee.
pub fn exact_recovery_threshold(n: usize, variant: ThresholdVariant) -> Result<f64> {
    match variant {
        ThresholdVariant::Global => Ok(1.0 / ((n as f64 + 1.0) * (n as f64 + 1.0))),
        ThresholdVariant::Centered(zeta) => {
            if n == 0 {
                return Err(L1Error::DomainError("centred threshold needs n ≥ 1".into()));
            }
            if !(0.0..=1.0).contains(&zeta) || 1.0 - zeta < 1.0 / n as f64 {
                return Err(L1Error::DomainError(format!(
                    "centred threshold needs 1 − ζ ≥ 1/n, got ζ={zeta}, n={n}"
                )));
            }
            let nf = n as f64;
            Ok((1.0 - zeta * zeta).powf(0.25) * nf.powf(-1.5) / 2.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearRecovery {
    /// `4 / (2 − s(n+1)²)`.
    pub factor: f64,
    /// `1 + factor`.
    pub near_best: f64,
}

pub fn near_recovery_factor(s: f64, n: usize) -> Result<NearRecovery> {
    let t = s * (n as f64 + 1.0) * (n as f64 + 1.0);
    if !(s >= 0.0) || t >= 1.0 {
        return Err(L1Error::DomainError(format!(
            "need s(n+1)² < 1, got {t}"
        )));
    }
    let factor = 4.0 / (2.0 - t);
    Ok(NearRecovery {
        factor,
        near_best: 1.0 + factor,
    })
}

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub n: usize,
    pub k: usize,
    pub exact: bool,
    pub generator_error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// First degree with an exact report; `None` when none was found.
    pub degree: Option<usize>,
    pub trace: Vec<SweepEntry>,
    pub report: Option<RecoveryReport>,
}

/// Recover with `n = 0, 1, …, n_max` and stop at the first exact report.
pub fn degree_sweep(f: &FuncRep, n_max: usize, big_n: usize) -> Result<SweepResult> {
    let samples = build_grid(big_n).sample(|x| f.eval(x));
    degree_sweep_samples(&samples, n_max, CORRUPTION_TOL, f.corruption())
}

/// [`degree_sweep`] on samples taken at `build_grid(samples.len() − 1)`.
pub fn degree_sweep_samples(
    samples: &[f64],
    n_max: usize,
    tol: f64,
    corruption: Option<&Corruption>,
) -> Result<SweepResult> {
    let big_n = samples.len().saturating_sub(1);
    let mut trace = Vec::new();
    for n in 0..=n_max.min(big_n) {
        let rep = recover_l1(samples, n, tol, corruption)?;
        trace.push(SweepEntry {
            n,
            k: rep.k,
            exact: rep.exact,
            generator_error: rep.generator_error,
        });
        if rep.exact {
            return Ok(SweepResult {
                degree: Some(n),
                trace,
                report: Some(rep),
            });
        }
    }
    Ok(SweepResult {
        degree: None,
        trace,
        report: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::series::Basis;

    #[test]
    fn null_basis_examples() {
        let nb = null_space_basis(1, 0).unwrap();
        assert_eq!(nb.v.shape(), (2, 1));
        assert!((nb.v.column(0).norm() - 1.0).abs() < 1e-14);

        let nb = null_space_basis(5, 2).unwrap();
        let g = nb.v.transpose() * &nb.v;
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-13);

        let nb = null_space_basis(10, 3).unwrap();
        let prod = nb.v.transpose() * scaled_vandermonde(10, 3);
        assert!(prod.amax() < 1e-13);
    }

    #[test]
    fn rip_bound_examples() {
        let r = rip_bound(10, 1, 1);
        assert!((r.delta - 1.0 / 3.0).abs() < 1e-15);
        assert!(!r.sufficient);
        let r = rip_bound(11, 1, 1);
        assert!((r.delta - 4.0 / 13.0).abs() < 1e-15);
        assert!(r.sufficient);
        let r = rip_bound(7, 3, 0);
        assert_eq!(r.delta, 0.0);
        assert!(r.sufficient);
    }

    #[test]
    fn rip_bruteforce_examples() {
        assert_eq!(rip_bruteforce(9, 1, 0).unwrap(), 0.0);
        let nb = null_space_basis(9, 1).unwrap();
        let colsweep = (0..10)
            .map(|i| (1.0 - nb.v.row(i).norm_squared()).abs())
            .fold(0.0, f64::max);
        let d1 = rip_bruteforce(9, 1, 1).unwrap();
        assert!((d1 - colsweep).abs() < 1e-13);
        assert!(d1 <= 4.0 / 11.0 + 1e-10);
        assert!(rip_bruteforce(9, 1, 2).unwrap() <= 8.0 / 11.0 + 1e-10);
        assert!(matches!(rip_bruteforce(200, 1, 5), Err(L1Error::TooLarge(_))));
    }

    #[test]
    fn thresholds() {
        let g = exact_recovery_threshold(7, ThresholdVariant::Global).unwrap();
        assert!((g - 0.015625).abs() < 1e-15);
        assert_eq!(exact_recovery_threshold(0, ThresholdVariant::Global).unwrap(), 1.0);
        let c = exact_recovery_threshold(100, ThresholdVariant::Centered(0.0)).unwrap();
        assert!((c - 5e-4).abs() < 1e-15);
        assert!(matches!(
            exact_recovery_threshold(10, ThresholdVariant::Centered(0.95)),
            Err(L1Error::DomainError(_))
        ));
    }

    #[test]
    fn near_recovery() {
        let r = near_recovery_factor(0.0, 4).unwrap();
        assert_eq!((r.factor, r.near_best), (2.0, 3.0));
        let n = 6;
        let s = 1.0 / (2.0 * 49.0);
        assert!((near_recovery_factor(s, n).unwrap().factor - 8.0 / 3.0).abs() < 1e-14);
        assert!((near_recovery_factor(0.01, 5).unwrap().factor - 4.0 / 1.64).abs() < 1e-14);
        assert!(near_recovery_factor(1.0 / 36.0, 5).is_err());
    }

    #[test]
    fn l0_oracle_examples() {
        let g = build_grid(6);
        let mut s = g.sample(|x| x);
        s[2] = 7.0;
        let (p, d) = recover_l0_oracle(&s, 1, 2).unwrap();
        assert_eq!(d, vec![2]);
        assert!((p.coeffs()[1] - 0.5).abs() < 1e-12 && p.coeffs()[0].abs() < 1e-12);

        let clean = g.sample(|x| 1.0 - x);
        let (_, d) = recover_l0_oracle(&clean, 1, 2).unwrap();
        assert!(d.is_empty());

        let mut two = clean.clone();
        two[1] = 3.0;
        two[5] = -2.0;
        let (p, d) = recover_l0_oracle(&two, 1, 2).unwrap();
        assert_eq!(d, vec![1, 5]);
        assert!((p.eval(0.3) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn recover_small_examples() {
        let p = ChebSeries::first_kind(vec![0.5, -1.0, 0.25, 2.0]);
        let g = build_grid(40);
        let clean = g.sample(|x| p.eval(x));
        let rep = recover_l1(&clean, 3, CORRUPTION_TOL, None).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.k, 0);

        let mut bad = clean.clone();
        bad[17] += 5.0;
        let rep = recover_l1(&bad, 3, CORRUPTION_TOL, None).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.corrupted_indices, vec![17]);
        let diff = rep.recovered.sub(&p);
        assert!(diff.coeff_max() < 1e-12);
    }

    #[test]
    fn sweeps() {
        let p = ChebSeries::unit(Basis::FirstKind, 3);
        let f = FuncRep::corrupted(p, vec![(0.2, 0.21)], |_| 4.0).unwrap();
        let r = degree_sweep(&f, 6, 300).unwrap();
        assert_eq!(r.degree, Some(3));

        let c = FuncRep::from_series(ChebSeries::first_kind(vec![2.0]));
        assert_eq!(degree_sweep(&c, 3, 100).unwrap().degree, Some(0));

        let a = FuncRep::from_fn(f64::abs).unwrap();
        assert_eq!(degree_sweep(&a, 6, 200).unwrap().degree, None);
    }
}
