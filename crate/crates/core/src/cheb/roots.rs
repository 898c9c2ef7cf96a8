//! Real roots of Chebyshev series via colleague-matrix eigenvalues.

use nalgebra::DMatrix;

use super::series::ChebSeries;
use super::transform::{extreme_points, values_to_coeffs};
use crate::error::{L1Error, Result};

/// Degree above which an interval is split before solving the eigenproblem.
pub const SUBDIVISION_DEGREE: usize = 50;
/// Maximum number of leaf subintervals.
pub const SUBDIVISION_LIMIT: usize = 1 << 12;
/// Roots closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-12;

// Slightly off-centre split, so symmetric problems do not put roots on a cut.
const SPLIT: f64 = -0.004849834917525;

/// Roots in [-1, 1] of a first-kind series given in the local variable.
///
/// Trailing coefficients at or below `noise` are ignored.
pub fn local_roots(coeffs: &[f64], noise: f64) -> Result<Vec<f64>> {
    let abs_sum: f64 = coeffs.iter().map(|c| c.abs()).sum();
    if abs_sum == 0.0 || !abs_sum.is_finite() {
        return Ok(Vec::new());
    }
    let thresh = noise.max(f64::EPSILON * abs_sum);
    let top = ChebSeries::first_kind(chop(coeffs, thresh));
    if top.len() <= 1 {
        return Ok(Vec::new());
    }
    let split_thresh = thresh.max(f64::EPSILON * top.len() as f64 * abs_sum);

    let mut roots = Vec::new();
    let mut stack = vec![(-1.0f64, 1.0f64, top.coeffs().to_vec())];
    let mut leaves = 0usize;
    while let Some((lo, hi, c)) = stack.pop() {
        let d = c.len().saturating_sub(1);
        if d == 0 {
            leaves += 1;
            continue;
        }
        if d <= SUBDIVISION_DEGREE {
            leaves += 1;
            if leaves > SUBDIVISION_LIMIT {
                return Err(L1Error::SubdivisionLimit {
                    limit: SUBDIVISION_LIMIT,
                });
            }
            for t in colleague_roots(&c)? {
                roots.push(lo + (hi - lo) * (t + 1.0) / 2.0);
            }
            continue;
        }
        if stack.len() + leaves > SUBDIVISION_LIMIT {
            return Err(L1Error::SubdivisionLimit {
                limit: SUBDIVISION_LIMIT,
            });
        }
        let parent = ChebSeries::first_kind(c);
        for (a, b) in [(-1.0, SPLIT), (SPLIT, 1.0)] {
            let vals: Vec<f64> = extreme_points(d)
                .iter()
                .map(|&t| parent.eval(a + (b - a) * (t + 1.0) / 2.0))
                .collect();
            let child = chop(&values_to_coeffs(&vals), split_thresh);
            let (clo, chi) = (
                lo + (hi - lo) * (a + 1.0) / 2.0,
                lo + (hi - lo) * (b + 1.0) / 2.0,
            );
            stack.push((clo, chi, child));
        }
    }

    let polished: Vec<f64> = roots
        .into_iter()
        .map(|r| polish(&top, r))
        .filter(|&r| top.eval(r).abs() <= 1e-11 * top.coeff_max().max(noise))
        .collect();
    Ok(dedup_sorted(polished))
}

/// Real roots of a series restricted to `[a, b]`, ascending.
pub fn roots_in_interval(series: &ChebSeries, a: f64, b: f64) -> Result<Vec<f64>> {
    if !(a <= b) || a < -1.0 || b > 1.0 {
        return Err(L1Error::InvalidInput(format!(
            "interval [{a}, {b}] is not inside [-1, 1]"
        )));
    }
    if a == b {
        return Ok(if series.eval(a) == 0.0 { vec![a] } else { Vec::new() });
    }
    let d = series.degree().max(1);
    let vals: Vec<f64> = extreme_points(d)
        .iter()
        .map(|&t| series.eval(a + (b - a) * (t + 1.0) / 2.0))
        .collect();
    let local = values_to_coeffs(&vals);
    let roots = local_roots(&local, 0.0)?
        .into_iter()
        .map(|t| (a + (b - a) * (t + 1.0) / 2.0).clamp(a, b))
        .collect();
    Ok(dedup_sorted(roots))
}

/// Drop trailing coefficients with magnitude at most `thresh`.
pub fn chop(c: &[f64], thresh: f64) -> Vec<f64> {
    let keep = c.iter().rposition(|v| v.abs() > thresh).map_or(0, |i| i + 1);
    c[..keep].to_vec()
}

/// Sort and merge roots closer than [`DEDUP_TOL`] to their mean.
pub fn dedup_sorted(mut roots: Vec<f64>) -> Vec<f64> {
    roots.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    let mut cluster: Vec<f64> = Vec::new();
    for r in roots {
        if let Some(&last) = cluster.last() {
            if r - last > DEDUP_TOL {
                out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
                cluster.clear();
            }
        }
        cluster.push(r);
    }
    if !cluster.is_empty() {
        out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    }
    out
}

fn colleague_roots(c: &[f64]) -> Result<Vec<f64>> {
    let d = c.len() - 1;
    let ad = c[d];
    if d == 1 {
        let r = -c[0] / ad;
        return Ok(if (-1.0 - 1e-9..=1.0 + 1e-9).contains(&r) {
            vec![r.clamp(-1.0, 1.0)]
        } else {
            Vec::new()
        });
    }
    let mut m = DMatrix::<f64>::zeros(d, d);
    m[(0, 1)] = 1.0;
    for j in 1..d - 1 {
        m[(j, j - 1)] = 0.5;
        m[(j, j + 1)] = 0.5;
    }
    m[(d - 1, d - 2)] = 0.5;
    for k in 0..d {
        m[(d - 1, k)] -= c[k] / (2.0 * ad);
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(L1Error::NoConvergence("non-finite colleague matrix".into()));
    }
    balance(&mut m);
    let eig = m.complex_eigenvalues();
    Ok(eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 && z.re.abs() <= 1.0 + 1e-9)
        .map(|z| z.re.clamp(-1.0, 1.0))
        .collect())
}

// Parlett-Reinsch diagonal balancing with radix 2; similarity preserves eigenvalues.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut c2, mut r2) = (c, r);
            while c2 < r2 / 2.0 {
                c2 *= 2.0;
                r2 /= 2.0;
                f *= 2.0;
            }
            while c2 >= r2 * 2.0 {
                c2 /= 2.0;
                r2 *= 2.0;
                f /= 2.0;
            }
            if (c2 + r2) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn polish(p: &ChebSeries, r0: f64) -> f64 {
    let dp = p.derivative();
    let mut best = r0;
    let mut best_val = p.eval(r0).abs();
    let mut r = r0;
    for _ in 0..4 {
        let (v, d) = (p.eval(r), dp.eval(r));
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = (r - v / d).clamp(-1.0, 1.0);
        if (next - r0).abs() > 1e-6 {
            break;
        }
        r = next;
        let val = p.eval(r).abs();
        if val < best_val {
            best = r;
            best_val = val;
        }
        if val == 0.0 {
            break;
        }
    }
    best
}
