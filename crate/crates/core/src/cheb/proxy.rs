//! Piecewise Chebyshev representations and the evaluable target function.

use std::fmt;
use std::sync::Arc;

use super::roots::chop;
use super::series::{Basis, ChebSeries};
use super::transform::{extreme_points, values_to_coeffs};
use crate::error::{L1Error, Result};

/// Default proxy tolerance, relative to the function's magnitude.
pub const DEFAULT_TOL: f64 = 1e-14;
/// Degree cap for single-series proxies.
pub const MAX_DEGREE: usize = 1 << 16;

/// A first-kind series in the local variable `t ∈ [-1, 1]` of `[a, b]`.
#[derive(Clone, Debug)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub series: ChebSeries,
}

impl Piece {
    pub fn new(a: f64, b: f64, series: ChebSeries) -> Self {
        Piece {
            a,
            b,
            series: series.to_first_kind(),
        }
    }

    pub fn to_local(&self, x: f64) -> f64 {
        if self.b == self.a {
            return 0.0;
        }
        ((2.0 * x - self.a - self.b) / (self.b - self.a)).clamp(-1.0, 1.0)
    }

    pub fn to_global(&self, t: f64) -> f64 {
        let x = self.a + (self.b - self.a) * (t + 1.0) / 2.0;
        x.clamp(self.a, self.b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.series.eval(self.to_local(x))
    }

    pub fn degree(&self) -> usize {
        self.series.degree()
    }

    /// Derivative with respect to the global variable.
    pub fn derivative(&self) -> Piece {
        let w = self.b - self.a;
        let d = if w > 0.0 {
            self.series.derivative().scale(2.0 / w).to_first_kind()
        } else {
            ChebSeries::zero(Basis::FirstKind)
        };
        Piece {
            a: self.a,
            b: self.b,
            series: d,
        }
    }

    /// `∫_lo^hi` of the piece, for `a ≤ lo ≤ hi ≤ b`.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let anti = self.series.antiderivative();
        self.integrate_with(&anti, lo, hi)
    }

    /// As [`Piece::integrate`] with a precomputed local antiderivative.
    pub fn integrate_with(&self, anti: &ChebSeries, lo: f64, hi: f64) -> f64 {
        let half = (self.b - self.a) / 2.0;
        half * (anti.eval(self.to_local(hi)) - anti.eval(self.to_local(lo)))
    }

    /// Samples `g` at the `d + 1` extreme points mapped into `[a, b]` and
    /// returns the local coefficients. With `nudge`, end samples are taken
    /// one ulp inside, so one-sided limits are used at jumps.
    fn fit<F: Fn(f64) -> f64 + ?Sized>(
        a: f64,
        b: f64,
        d: usize,
        nudge: (bool, bool),
        g: &F,
    ) -> (Vec<f64>, f64) {
        let vals: Vec<f64> = extreme_points(d)
            .iter()
            .map(|&t| g(nudged(a, b, t, nudge)))
            .collect();
        let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (values_to_coeffs(&vals), vmax)
    }
}

fn nudged(a: f64, b: f64, t: f64, nudge: (bool, bool)) -> f64 {
    if t >= 1.0 {
        if nudge.1 {
            b.next_down().max(a)
        } else {
            b
        }
    } else if t <= -1.0 {
        if nudge.0 {
            a.next_up().min(b)
        } else {
            a
        }
    } else {
        (a + (b - a) * (t + 1.0) / 2.0).clamp(a, b)
    }
}

/// A function on [-1, 1] given by contiguous pieces.
///
/// `scale` is the magnitude used for noise thresholds.
#[derive(Clone)]
pub struct Piecewise {
    pieces: Vec<Piece>,
    scale: f64,
}

impl fmt::Debug for Piecewise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Piecewise")
            .field("pieces", &self.pieces.len())
            .field("max_degree", &self.max_degree())
            .field("scale", &self.scale)
            .finish()
    }
}

impl Piecewise {
    pub fn new(pieces: Vec<Piece>, scale: f64) -> Self {
        debug_assert!(!pieces.is_empty());
        Piecewise { pieces, scale }
    }

    /// A global polynomial as a single piece.
    pub fn from_series(p: &ChebSeries) -> Self {
        let t = p.to_first_kind();
        let scale = t.coeff_abs_sum();
        Piecewise::new(vec![Piece::new(-1.0, 1.0, t)], scale)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Interior breakpoints between pieces.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[1..].iter().map(|p| p.a).collect()
    }

    pub fn piece_index(&self, x: f64) -> usize {
        let i = self.pieces.partition_point(|p| p.b < x);
        i.min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    pub fn derivative(&self) -> Piecewise {
        let pieces: Vec<Piece> = self.pieces.iter().map(|p| p.derivative()).collect();
        let scale = pieces
            .iter()
            .map(|p| p.series.coeff_abs_sum())
            .fold(0.0, f64::max);
        Piecewise::new(pieces, scale)
    }

    pub fn derivative_at(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].derivative().eval(x)
    }

    /// `self − p`, represented exactly on every piece.
    pub fn sub_poly(&self, p: &ChebSeries) -> Piecewise {
        let scale = self.scale.max(p.coeff_abs_sum());
        let chop_tol = f64::EPSILON * scale * 0.5;
        let pieces = self
            .pieces
            .iter()
            .map(|pc| {
                let d = pc.degree().max(p.degree()).max(1);
                let coeffs = if pc.a == -1.0 && pc.b == 1.0 {
                    pc.series.sub(&p.to_first_kind()).into_coeffs()
                } else {
                    let vals: Vec<f64> = extreme_points(d)
                        .iter()
                        .map(|&t| pc.series.eval(t) - p.eval(pc.to_global(t)))
                        .collect();
                    values_to_coeffs(&vals)
                };
                Piece {
                    a: pc.a,
                    b: pc.b,
                    series: ChebSeries::first_kind(chop(&coeffs, chop_tol)),
                }
            })
            .collect();
        Piecewise::new(pieces, scale)
    }

    /// `self + c` for a constant `c`.
    pub fn add_constant(&self, c: f64) -> Piecewise {
        let pieces = self
            .pieces
            .iter()
            .map(|pc| {
                let mut co = pc.series.coeffs().to_vec();
                if co.is_empty() {
                    co.push(0.0);
                }
                co[0] += c;
                Piece {
                    a: pc.a,
                    b: pc.b,
                    series: ChebSeries::first_kind(co),
                }
            })
            .collect();
        Piecewise::new(pieces, self.scale.max(c.abs()))
    }

    /// `∫_a^b` across pieces.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let (lo, hi, sgn) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut total = 0.0;
        for pc in &self.pieces {
            let l = lo.max(pc.a);
            let h = hi.min(pc.b);
            if h > l {
                total += pc.integrate(l, h);
            }
        }
        sgn * total
    }
}

/// Known structure of an `s`-corrupted function `f = f₀ + ω`.
#[derive(Clone, Debug)]
pub struct Corruption {
    intervals: Vec<(f64, f64)>,
    clean: Option<ChebSeries>,
}

impl Corruption {
    /// Validates that intervals are closed, disjoint and inside [-1, 1].
    pub fn new(mut intervals: Vec<(f64, f64)>, clean: Option<ChebSeries>) -> Result<Self> {
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && -1.0 <= a && a <= b && b <= 1.0) {
                return Err(L1Error::InvalidInput(format!(
                    "corruption interval [{a}, {b}] is not inside [-1, 1]"
                )));
            }
        }
        if intervals.windows(2).any(|w| w[1].0 <= w[0].1) {
            return Err(L1Error::InvalidInput(
                "corruption intervals must be disjoint".into(),
            ));
        }
        Ok(Corruption { intervals, clean })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// The uncorrupted part `f₀`, when it is a known polynomial.
    pub fn clean(&self) -> Option<&ChebSeries> {
        self.clean.as_ref()
    }

    /// Total measure `s`.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// `ζ = max{|x| : x ∈ Ω_s}`.
    pub fn zeta(&self) -> f64 {
        self.intervals
            .iter()
            .fold(0.0f64, |m, &(a, b)| m.max(a.abs()).max(b.abs()))
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }
}

/// Options for [`build_proxy`].
#[derive(Clone, Debug)]
pub struct ProxyOptions {
    pub tol: f64,
    /// Bisect pieces that do not resolve by `piece_degree`.
    pub split: bool,
    pub piece_degree: usize,
    pub max_degree: usize,
    pub max_pieces: usize,
    pub breakpoints: Vec<f64>,
}

impl Default for ProxyOptions {
    fn default() -> Self {
        ProxyOptions {
            tol: DEFAULT_TOL,
            split: true,
            piece_degree: 128,
            max_degree: MAX_DEGREE,
            max_pieces: 4096,
            breakpoints: Vec::new(),
        }
    }
}

/// Single-series adaptive proxy: degree doubles until the tail decays.
pub fn adaptive_proxy<F: Fn(f64) -> f64 + ?Sized>(f: &F, tol: f64) -> Result<ChebSeries> {
    let opts = ProxyOptions {
        tol,
        split: false,
        ..ProxyOptions::default()
    };
    let pw = build_proxy(f, &opts)?;
    Ok(pw.pieces()[0].series.clone())
}

/// Piecewise adaptive proxy with optional breakpoint hints and bisection.
pub fn build_proxy<F: Fn(f64) -> f64 + ?Sized>(f: &F, opts: &ProxyOptions) -> Result<Piecewise> {
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(L1Error::InvalidInput(format!(
            "proxy tolerance {} is not in (0, 1)",
            opts.tol
        )));
    }
    let mut cuts: Vec<f64> = opts
        .breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > -1.0 && *x < 1.0)
        .collect();
    cuts.push(-1.0);
    cuts.push(1.0);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();

    let hinted = |x: f64| x > -1.0 && x < 1.0 && cuts.binary_search_by(|c| c.total_cmp(&x)).is_ok();
    let mut vscale = 0.0f64;
    for w in cuts.windows(2) {
        let (_, vmax) = Piece::fit(w[0], w[1], 64, (hinted(w[0]), hinted(w[1])), f);
        vscale = vscale.max(vmax);
    }
    if !vscale.is_finite() {
        return Err(L1Error::DomainError(
            "function is not finite on [-1, 1]".into(),
        ));
    }

    let cap = if opts.split {
        opts.piece_degree.min(opts.max_degree)
    } else {
        opts.max_degree
    };
    let mut pieces = Vec::new();
    let mut stack: Vec<(f64, f64)> = cuts.windows(2).rev().map(|w| (w[0], w[1])).collect();
    while let Some((a, b)) = stack.pop() {
        let tiny = b - a <= 8.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        let nudge = (hinted(a), hinted(b));
        match fit_piece(f, a, b, nudge, opts.tol, &mut vscale, cap, tiny)? {
            Some(series) => pieces.push(Piece { a, b, series }),
            None if opts.split => {
                if pieces.len() + stack.len() + 2 > opts.max_pieces {
                    return Err(L1Error::NoConvergence(format!(
                        "proxy needs more than {} pieces",
                        opts.max_pieces
                    )));
                }
                let m = 0.5 * (a + b);
                stack.push((m, b));
                stack.push((a, m));
            }
            None => {
                return Err(L1Error::NoConvergence(format!(
                    "no tail decay up to degree {cap}"
                )))
            }
        }
    }
    Ok(Piecewise::new(pieces, vscale))
}

fn fit_piece<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    nudge: (bool, bool),
    tol: f64,
    vscale: &mut f64,
    cap: usize,
    accept_any: bool,
) -> Result<Option<ChebSeries>> {
    let mut d = 16usize.min(cap.max(1));
    let mut tails = [f64::INFINITY; 2];
    loop {
        let (c, vmax) = Piece::fit(a, b, d, nudge, f);
        if c.iter().any(|v| !v.is_finite()) {
            return Err(L1Error::DomainError(format!(
                "function is not finite on [{a}, {b}]"
            )));
        }
        *vscale = vscale.max(vmax);
        let ref_scale = vscale.max(c.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let tail_ok = c.iter().rev().take(3).all(|v| v.abs() <= tol * ref_scale);
        if (tail_ok && samples_ok(f, a, b, &c, tol, ref_scale)) || accept_any {
            let thresh = (0.1 * tol * ref_scale).max(4.0 * f64::EPSILON * ref_scale);
            return Ok(Some(ChebSeries::first_kind(chop(&c, thresh))));
        }
        // a flat tail far below the signal is evaluation noise, not structure
        let tail = c[c.len() - c.len() / 4..]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if d >= 64 && tail <= 1e-8 * ref_scale && tail > 0.7 * tails[1] && tails[1] > 0.7 * tails[0] {
            return Ok(Some(ChebSeries::first_kind(chop(&c, 2.0 * tail))));
        }
        tails = [tails[1], tail];
        if d >= cap {
            return Ok(None);
        }
        d = (2 * d).min(cap);
    }
}

fn samples_ok<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    c: &[f64],
    tol: f64,
    scale: f64,
) -> bool {
    let s = ChebSeries::first_kind(c.to_vec());
    let lim = 1e3 * tol.max(1e-15) * scale;
    // off-grid probes at irrational-looking positions
    [-0.8713, -0.4517, -0.0733, 0.2917, 0.6271, 0.9431]
        .iter()
        .all(|&t| {
            let x = (a + (b - a) * (t + 1.0) / 2.0).clamp(a, b);
            (f(x) - s.eval(t)).abs() <= lim
        })
}

/// An evaluable target function with its adaptive proxy.
#[derive(Clone)]
pub struct FuncRep {
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    proxy: Piecewise,
    tol: f64,
    corruption: Option<Corruption>,
}

impl fmt::Debug for FuncRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FuncRep")
            .field("proxy", &self.proxy)
            .field("tol", &self.tol)
            .field("corruption", &self.corruption)
            .finish()
    }
}

impl FuncRep {
    /// Adaptive piecewise proxy with default options.
    pub fn from_fn<F>(f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_options(f, &ProxyOptions::default())
    }

    pub fn with_options<F>(f: F, opts: &ProxyOptions) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let proxy = build_proxy(&f, opts)?;
        Ok(FuncRep {
            evaluator: Arc::new(f),
            proxy,
            tol: opts.tol,
            corruption: None,
        })
    }

    /// An exact representation of a polynomial.
    pub fn from_series(p: ChebSeries) -> Self {
        let proxy = Piecewise::from_series(&p);
        let q = p.clone();
        FuncRep {
            evaluator: Arc::new(move |x| q.eval(x)),
            proxy,
            tol: f64::EPSILON,
            corruption: None,
        }
    }

    /// `f = clean + ω`, where `omega` is applied on the closed `intervals` only.
    pub fn corrupted<W>(clean: ChebSeries, intervals: Vec<(f64, f64)>, omega: W) -> Result<Self>
    where
        W: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let corruption = Corruption::new(intervals, Some(clean.clone()))?;
        let c2 = corruption.clone();
        let f = move |x: f64| {
            let base = clean.eval(x);
            if c2.contains(x) {
                base + omega(x)
            } else {
                base
            }
        };
        let opts = ProxyOptions {
            breakpoints: corruption
                .intervals()
                .iter()
                .flat_map(|&(a, b)| [a, b])
                .collect(),
            ..ProxyOptions::default()
        };
        let mut rep = Self::with_options(f, &opts)?;
        rep.corruption = Some(corruption);
        Ok(rep)
    }

    /// Attach corruption metadata to an existing representation.
    pub fn with_corruption(mut self, corruption: Corruption) -> Self {
        self.corruption = Some(corruption);
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }

    pub fn evaluator(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        Arc::clone(&self.evaluator)
    }

    pub fn proxy(&self) -> &Piecewise {
        &self.proxy
    }

    pub fn proxy_eval(&self, x: f64) -> f64 {
        self.proxy.eval(x)
    }

    pub fn derivative_at(&self, x: f64) -> f64 {
        self.proxy.derivative_at(x)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn corruption(&self) -> Option<&Corruption> {
        self.corruption.as_ref()
    }

    /// Largest proxy coefficient over all pieces.
    pub fn coeff_max(&self) -> f64 {
        self.proxy
            .pieces()
            .iter()
            .map(|p| p.series.coeff_max())
            .fold(0.0, f64::max)
    }

    /// The residual `f − p` as a piecewise series.
    pub fn residual(&self, p: &ChebSeries) -> Piecewise {
        self.proxy.sub_poly(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_resolves_quickly() {
        let s = adaptive_proxy(&f64::exp, 1e-14).unwrap();
        assert!((12..=20).contains(&s.degree()), "degree {}", s.degree());
        for k in 0..1000 {
            let x = -1.0 + 2.0 * k as f64 / 999.0;
            assert!((s.eval(x) - x.exp()).abs() <= 1e-13);
        }
    }

    #[test]
    fn polynomial_is_exact() {
        let p = ChebSeries::first_kind(vec![0.3, -1.0, 0.5, 0.0, 0.25, 2.0]);
        let q = p.clone();
        let s = adaptive_proxy(&move |x| q.eval(x), 1e-14).unwrap();
        assert!(s.degree() <= 6);
        for x in [-0.9, -0.1, 0.4, 1.0] {
            assert!((s.eval(x) - p.eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn sign_without_hints_fails() {
        let r = adaptive_proxy(&|x: f64| if x >= 0.0 { 1.0 } else { -1.0 }, 1e-14);
        assert!(matches!(r, Err(L1Error::NoConvergence(_))));
    }

    #[test]
    fn splitting_handles_abs_and_sqrt() {
        let f = FuncRep::from_fn(f64::abs).unwrap();
        assert_eq!(f.proxy().pieces().len(), 2);
        assert!(f.proxy().max_degree() <= 1);

        let g = FuncRep::from_fn(|x: f64| ((1.0 - x) * (1.0 + x)).max(0.0).sqrt()).unwrap();
        assert!(g.proxy().pieces().len() < 400);
        for k in 0..2001 {
            let x = -1.0 + 2.0 * k as f64 / 2000.0;
            // within a few ulps of ±1 the samples themselves are rounded in x
            let lim = if 1.0 - x.abs() < 1e-12 { 1e-8 } else { 1e-14 * (1.0 + g.coeff_max()) * 10.0 };
            assert!((g.proxy_eval(x) - g.eval(x)).abs() <= lim, "x={x}");
        }
    }

    #[test]
    fn corrupted_pieces_follow_hints() {
        let t5 = ChebSeries::unit(Basis::FirstKind, 5);
        let f = FuncRep::corrupted(t5, vec![(-0.7, -0.67), (0.9, 0.903)], |x| 2.0 + (40.0 * x).sin())
            .unwrap();
        let bps = f.proxy().breakpoints();
        for b in [-0.7, -0.67, 0.9, 0.903] {
            assert!(bps.contains(&b));
        }
        assert!((f.corruption().unwrap().measure() - 0.033).abs() < 1e-15);
        assert!((f.corruption().unwrap().zeta() - 0.903).abs() < 1e-15);
        assert!((f.proxy_eval(0.0) - f.eval(0.0)).abs() < 1e-14);
        assert!((f.proxy_eval(0.901) - f.eval(0.901)).abs() < 1e-13);
    }

    #[test]
    fn overlapping_corruption_rejected() {
        assert!(Corruption::new(vec![(0.0, 0.5), (0.4, 0.6)], None).is_err());
        assert!(Corruption::new(vec![(0.0, 1.5)], None).is_err());
    }

    #[test]
    fn residual_is_exact() {
        let f = FuncRep::from_fn(f64::exp).unwrap();
        let p = ChebSeries::second_kind(vec![0.1, 0.2, -0.3]);
        let e = f.residual(&p);
        for x in [-0.95, 0.0, 0.33, 0.999] {
            assert!((e.eval(x) - (x.exp() - p.eval(x))).abs() < 1e-14);
        }
    }
}
