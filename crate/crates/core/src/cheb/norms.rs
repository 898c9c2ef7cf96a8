//! Sign structure and norms of piecewise residuals.

use super::grid::build_grid;
use super::proxy::{Piece, Piecewise};
use super::roots::{dedup_sorted, local_roots};
use super::series::ChebSeries;
use super::transform::{extreme_points, values_to_coeffs};
use crate::error::Result;

/// Constant-sign stretch of a residual. `sign` is 0 where the residual is
/// at noise level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub sign: i8,
}

/// Roots, sign segments and exact segment integrals of a residual.
#[derive(Clone, Debug)]
pub struct SignStructure {
    /// Maximal segments of equal sign.
    pub segments: Vec<Segment>,
    /// Every distinct root found, including touching ones.
    pub roots: Vec<f64>,
    /// Roots across which the sign flips.
    pub sign_changes: Vec<f64>,
    /// Sum of `|∫ e|` over elementary segments, i.e. `‖e‖₁`.
    pub l1: f64,
}

impl SignStructure {
    pub fn sign_change_count(&self) -> usize {
        self.sign_changes.len()
    }
}

/// Noise level below which residual values are treated as zero.
pub fn noise_level(e: &Piecewise) -> f64 {
    64.0 * f64::EPSILON * e.scale()
}

fn piece_roots(pc: &Piece, noise: f64) -> Result<Vec<f64>> {
    let coeffs = pc.series.coeffs();
    if pc.b <= pc.a || coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    let ts = local_roots(coeffs, noise / 64.0)?;
    Ok(ts.into_iter().map(|t| pc.to_global(t)).collect())
}

/// Compute roots and signs of `e` over [-1, 1].
pub fn sign_structure(e: &Piecewise) -> Result<SignStructure> {
    let noise = noise_level(e);
    let mut raw: Vec<Segment> = Vec::new();
    let mut roots = Vec::new();
    let mut l1 = 0.0;
    for pc in e.pieces() {
        let rs = piece_roots(pc, noise)?;
        let anti = pc.series.antiderivative();
        let mut pts = Vec::with_capacity(rs.len() + 2);
        pts.push(pc.a);
        pts.extend(rs.iter().copied().filter(|&r| r > pc.a && r < pc.b));
        pts.push(pc.b);
        roots.extend(rs);
        for w in pts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let v = pc.eval(mid);
            let sign = if v.abs() <= noise {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            };
            l1 += pc.integrate_with(&anti, w[0], w[1]).abs();
            raw.push(Segment {
                a: w[0],
                b: w[1],
                sign,
            });
        }
    }

    // absorb tiny noise-level stretches into a neighbour
    for i in 0..raw.len() {
        if raw[i].sign == 0 && raw[i].b - raw[i].a < 1e-9 {
            let left = if i > 0 { raw[i - 1].sign } else { 0 };
            let right = raw.get(i + 1).map_or(0, |s| s.sign);
            raw[i].sign = if left != 0 { left } else { right };
        }
    }
    let mut segments: Vec<Segment> = Vec::with_capacity(raw.len());
    for s in raw {
        match segments.last_mut() {
            Some(last) if last.sign == s.sign => last.b = s.b,
            _ => segments.push(s),
        }
    }
    let sign_changes = segments
        .windows(2)
        .filter(|w| w[0].sign * w[1].sign == -1)
        .map(|w| w[0].b)
        .collect();

    Ok(SignStructure {
        segments,
        roots: dedup_sorted(roots),
        sign_changes,
        l1,
    })
}

/// `‖e‖₁`, integrating each constant-sign stretch exactly.
pub fn l1_norm(e: &Piecewise) -> Result<f64> {
    Ok(sign_structure(e)?.l1)
}

/// `‖e‖_∞` and a point where it is attained.
pub fn linf_norm(e: &Piecewise) -> Result<(f64, f64)> {
    let mut best = (0.0f64, -1.0f64);
    for pc in e.pieces() {
        let mut cand = vec![-1.0, 1.0];
        if pc.degree() >= 2 && pc.b > pc.a {
            let d = pc.series.derivative().to_first_kind();
            cand.extend(local_roots(d.coeffs(), 0.0)?);
        }
        for t in cand {
            let v = pc.series.eval(t).abs();
            if v > best.0 {
                best = (v, pc.to_global(t));
            }
        }
    }
    Ok(best)
}

/// `‖e‖₂` via exact integration of `e²` on every piece.
pub fn l2_norm(e: &Piecewise) -> f64 {
    let mut total = 0.0;
    for pc in e.pieces() {
        let d = 2 * pc.degree() + 1;
        let vals: Vec<f64> = extreme_points(d)
            .iter()
            .map(|&t| pc.series.eval(t).powi(2))
            .collect();
        let sq = ChebSeries::first_kind(values_to_coeffs(&vals));
        total += 0.5 * (pc.b - pc.a) * sq.integral();
    }
    total.max(0.0).sqrt()
}

/// `Σ w_j |f(x_j)|` on `build_grid(n)`.
pub fn l1_discrete<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let g = build_grid(n);
    g.points()
        .iter()
        .zip(g.weights())
        .map(|(&x, w)| w * f(x).abs())
        .sum()
}

/// Number of points of `build_grid(n)` with `|f(x_j)| > tol`.
pub fn l0_discrete<F: Fn(f64) -> f64>(f: F, n: usize, tol: f64) -> usize {
    build_grid(n)
        .points()
        .iter()
        .filter(|&&x| f(x).abs() > tol)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::proxy::FuncRep;
    use crate::cheb::series::Basis;

    #[test]
    fn l1_examples() {
        let x = Piecewise::from_series(&ChebSeries::first_kind(vec![0.0, 1.0]));
        assert!((l1_norm(&x).unwrap() - 1.0).abs() < 1e-15);

        let f = FuncRep::from_fn(f64::abs).unwrap();
        let p = ChebSeries::first_kind(vec![0.0, 0.0, 0.0]).add(&ChebSeries::first_kind(vec![
            2f64.sqrt() / 2.0,
            0.0,
            2f64.sqrt() / 2.0,
        ]));
        let e = f.residual(&p);
        let expect = 2.0 / 3.0 * (2f64.sqrt() - 1.0);
        assert!((l1_norm(&e).unwrap() - expect).abs() < 1e-14);
        let s = sign_structure(&e).unwrap();
        assert_eq!(s.sign_changes.len(), 2);
        assert_eq!(s.roots.len(), 3);
    }

    #[test]
    fn linf_examples() {
        let t3 = Piecewise::from_series(&ChebSeries::unit(Basis::FirstKind, 3));
        let (v, _) = linf_norm(&t3).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let u = Piecewise::from_series(&ChebSeries::unit(Basis::SecondKind, 4));
        assert!((linf_norm(&u).unwrap().0 - 5.0).abs() < 1e-13);
    }

    #[test]
    fn l2_of_x() {
        let x = Piecewise::from_series(&ChebSeries::first_kind(vec![0.0, 1.0]));
        assert!((l2_norm(&x) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn discrete_norms() {
        let n = 10;
        let s = l1_discrete(|_| 1.0, n);
        let exact: f64 = build_grid(n).weights().iter().sum();
        assert!((s - exact).abs() < 1e-15);
        assert_eq!(l0_discrete(|x| x, 4, 1e-12), 4);
    }
}
