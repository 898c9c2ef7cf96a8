//! Chebyshev series of the first and second kind on [-1, 1].

use std::fmt;

/// Which family of Chebyshev polynomials the coefficients refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// T_j(cos θ) = cos(jθ)
    FirstKind,
    /// U_j(cos θ) = sin((j+1)θ) / sin θ
    SecondKind,
}

/// A polynomial `Σ c_j P_j(x)` with `P_j = T_j` or `P_j = U_j`.
///
/// An empty coefficient list is the zero polynomial. Trailing zeros are
/// allowed and carry no meaning.
#[derive(Clone, PartialEq)]
pub struct ChebSeries {
    basis: Basis,
    coeffs: Vec<f64>,
}

impl fmt::Debug for ChebSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChebSeries({:?}, {:?})", self.basis, self.coeffs)
    }
}

impl ChebSeries {
    pub fn new(basis: Basis, coeffs: Vec<f64>) -> Self {
        ChebSeries { basis, coeffs }
    }

    pub fn first_kind(coeffs: Vec<f64>) -> Self {
        Self::new(Basis::FirstKind, coeffs)
    }

    pub fn second_kind(coeffs: Vec<f64>) -> Self {
        Self::new(Basis::SecondKind, coeffs)
    }

    pub fn zero(basis: Basis) -> Self {
        Self::new(basis, Vec::new())
    }

    /// The single basis polynomial `P_j`.
    pub fn unit(basis: Basis, j: usize) -> Self {
        let mut c = vec![0.0; j + 1];
        c[j] = 1.0;
        Self::new(basis, c)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Nominal degree, `len - 1` (0 for the empty series).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff_max(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn coeff_abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        match self.basis {
            Basis::FirstKind => clenshaw_t(&self.coeffs, x),
            Basis::SecondKind => clenshaw_u(&self.coeffs, x),
        }
    }

    /// Value and first derivative at `x`.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let d = self.derivative();
        (self.eval(x), d.eval(x))
    }

    pub fn to_basis(&self, basis: Basis) -> ChebSeries {
        match (self.basis, basis) {
            (a, b) if a == b => self.clone(),
            (Basis::FirstKind, Basis::SecondKind) => {
                ChebSeries::second_kind(first_to_second(&self.coeffs))
            }
            _ => ChebSeries::first_kind(second_to_first(&self.coeffs)),
        }
    }

    pub fn to_first_kind(&self) -> ChebSeries {
        self.to_basis(Basis::FirstKind)
    }

    pub fn to_second_kind(&self) -> ChebSeries {
        self.to_basis(Basis::SecondKind)
    }

    /// Exact derivative, returned in the second-kind basis (`T_j' = j U_{j-1}`).
    pub fn derivative(&self) -> ChebSeries {
        let t = self.to_first_kind();
        let c = t.coeffs();
        if c.len() <= 1 {
            return ChebSeries::second_kind(Vec::new());
        }
        let out = (1..c.len()).map(|j| j as f64 * c[j]).collect();
        ChebSeries::second_kind(out)
    }

    /// An antiderivative in the first-kind basis (`∫U_j = T_{j+1}/(j+1)`).
    pub fn antiderivative(&self) -> ChebSeries {
        let u = self.to_second_kind();
        let mut out = vec![0.0; u.len() + 1];
        for (j, cj) in u.coeffs().iter().enumerate() {
            out[j + 1] = cj / (j as f64 + 1.0);
        }
        ChebSeries::first_kind(out)
    }

    /// `∫_a^b p(x) dx`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// `∫_{-1}^{1} p(x) dx`.
    pub fn integral(&self) -> f64 {
        let t = self.to_first_kind();
        t.coeffs()
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, c)| c * 2.0 / (1.0 - (k * k) as f64))
            .sum()
    }

    pub fn scale(&self, alpha: f64) -> ChebSeries {
        ChebSeries::new(self.basis, self.coeffs.iter().map(|c| alpha * c).collect())
    }

    /// `self + other`, in the basis of `self`.
    pub fn add(&self, other: &ChebSeries) -> ChebSeries {
        let o = other.to_basis(self.basis);
        let n = self.len().max(o.len());
        let mut out = vec![0.0; n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in o.coeffs.iter().enumerate() {
            out[i] += c;
        }
        ChebSeries::new(self.basis, out)
    }

    pub fn sub(&self, other: &ChebSeries) -> ChebSeries {
        self.add(&other.scale(-1.0))
    }

    /// Drop trailing coefficients with magnitude `<= tol`.
    pub fn trim(&self, tol: f64) -> ChebSeries {
        let keep = self
            .coeffs
            .iter()
            .rposition(|c| c.abs() > tol)
            .map_or(0, |i| i + 1);
        ChebSeries::new(self.basis, self.coeffs[..keep].to_vec())
    }

    /// Pad or truncate to exactly `len` coefficients.
    pub fn resized(&self, len: usize) -> ChebSeries {
        let mut c = self.coeffs.clone();
        c.resize(len, 0.0);
        ChebSeries::new(self.basis, c)
    }
}

fn clenshaw_t(c: &[f64], x: f64) -> f64 {
    match c.len() {
        0 => 0.0,
        1 => c[0],
        _ => {
            let (mut b1, mut b2) = (0.0, 0.0);
            for &ck in c[1..].iter().rev() {
                let b0 = ck + 2.0 * x * b1 - b2;
                b2 = b1;
                b1 = b0;
            }
            c[0] + x * b1 - b2
        }
    }
}

fn clenshaw_u(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

// T_0 = U_0, T_1 = U_1/2, T_j = (U_j - U_{j-2})/2.
fn first_to_second(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let at = |k: usize| if k < n { a[k] } else { 0.0 };
    (0..n)
        .map(|k| {
            if k == 0 {
                at(0) - at(2) / 2.0
            } else {
                (at(k) - at(k + 2)) / 2.0
            }
        })
        .collect()
}

// U_j = 2(T_j + T_{j-2} + ...) with the T_0 term, if any, counted once.
fn second_to_first(b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut out = vec![0.0; n];
    // suffix sums over indices of equal parity
    let mut acc = [0.0, 0.0];
    for k in (0..n).rev() {
        acc[k % 2] += b[k];
        out[k] = if k == 0 { acc[0] } else { 2.0 * acc[k % 2] };
    }
    out
}

/// `T_k(x)` for `k = 0..=kmax` by the three-term recurrence.
pub fn chebyshev_t_values(x: f64, kmax: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(kmax + 1);
    t.push(1.0);
    if kmax >= 1 {
        t.push(x);
    }
    for k in 2..=kmax {
        let v = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(v);
    }
    t
}

/// `U_k(x)` for `k = 0..=kmax` by the three-term recurrence.
pub fn chebyshev_u_values(x: f64, kmax: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(kmax + 1);
    u.push(1.0);
    if kmax >= 1 {
        u.push(2.0 * x);
    }
    for k in 2..=kmax {
        let v = 2.0 * x * u[k - 1] - u[k - 2];
        u.push(v);
    }
    u
}

/// `∫_a^b U_j(x) dx = (T_{j+1}(b) - T_{j+1}(a)) / (j + 1)`.
pub fn integral_secondkind_segment(j: usize, a: f64, b: f64) -> f64 {
    let tb = chebyshev_t_values(b, j + 1);
    let ta = chebyshev_t_values(a, j + 1);
    (tb[j + 1] - ta[j + 1]) / (j as f64 + 1.0)
}

/// All of `∫_a^b U_j` for `j = 0..=n` at once.
pub fn integrals_secondkind_segment(n: usize, a: f64, b: f64) -> Vec<f64> {
    let tb = chebyshev_t_values(b, n + 1);
    let ta = chebyshev_t_values(a, n + 1);
    (0..=n)
        .map(|j| (tb[j + 1] - ta[j + 1]) / (j as f64 + 1.0))
        .collect()
}

/// Legendre `P_n` in the first-kind basis, by the three-term recurrence.
pub fn legendre(n: usize) -> ChebSeries {
    let mut prev = vec![1.0];
    if n == 0 {
        return ChebSeries::first_kind(prev);
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..n {
        let xc = times_x(&cur);
        let kf = k as f64;
        let next: Vec<f64> = (0..xc.len())
            .map(|j| {
                let a = (2.0 * kf + 1.0) * xc[j];
                let b = kf * prev.get(j).copied().unwrap_or(0.0);
                (a - b) / (kf + 1.0)
            })
            .collect();
        prev = cur;
        cur = next;
    }
    ChebSeries::first_kind(cur)
}

// x T_j = (T_{j+1} + T_{|j-1|}) / 2
fn times_x(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len() + 1];
    for (j, &v) in c.iter().enumerate() {
        out[j + 1] += 0.5 * v;
        if j == 0 {
            out[1] += 0.5 * v;
        } else {
            out[j - 1] += 0.5 * v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-14;

    #[test]
    fn eval_examples() {
        let t5 = ChebSeries::unit(Basis::FirstKind, 5);
        assert!((t5.eval(1.0) - 1.0).abs() < EPS);
        let u1 = ChebSeries::second_kind(vec![0.0, 1.0]);
        assert!((u1.eval(0.3) - 0.6).abs() < EPS);
        let u2 = ChebSeries::second_kind(vec![0.0, 0.0, 1.0]);
        assert!(u2.eval(0.5).abs() < EPS);
    }

    #[test]
    fn eval_matches_trig_definition() {
        for j in 0..30 {
            for &x in &[-0.93, -0.4, 0.0, 0.17, 0.77] {
                let th: f64 = f64::acos(x);
                let t = ChebSeries::unit(Basis::FirstKind, j).eval(x);
                let u = ChebSeries::unit(Basis::SecondKind, j).eval(x);
                assert!((t - (j as f64 * th).cos()).abs() < 1e-13);
                assert!((u - ((j as f64 + 1.0) * th).sin() / th.sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_examples() {
        let t2 = ChebSeries::unit(Basis::FirstKind, 2);
        let d = t2.derivative();
        assert_eq!(d.basis(), Basis::SecondKind);
        assert!((d.coeffs()[1] - 2.0).abs() < EPS);
        assert!(d.coeffs()[0].abs() < EPS);

        let c = ChebSeries::first_kind(vec![3.5]);
        assert!(c.derivative().coeff_max() == 0.0);

        let t5 = ChebSeries::unit(Basis::FirstKind, 5).derivative();
        let expect = ChebSeries::unit(Basis::SecondKind, 4).scale(5.0);
        for x in [-0.9, -0.3, 0.2, 0.8] {
            assert!((t5.eval(x) - expect.eval(x)).abs() < 1e-12);
            let h = 1e-6;
            let t = ChebSeries::unit(Basis::FirstKind, 5);
            let fd = (t.eval(x + h) - t.eval(x - h)) / (2.0 * h);
            assert!((fd - t5.eval(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn segment_integrals() {
        assert!((integral_secondkind_segment(0, -1.0, 1.0) - 2.0).abs() < EPS);
        assert!(integral_secondkind_segment(1, -1.0, 1.0).abs() < EPS);
        assert!((integral_secondkind_segment(2, 0.0, 1.0) - 1.0 / 3.0).abs() < EPS);
        let all = integrals_secondkind_segment(5, -0.3, 0.8);
        for (j, v) in all.iter().enumerate() {
            assert!((v - integral_secondkind_segment(j, -0.3, 0.8)).abs() < EPS);
        }
    }

    #[test]
    fn basis_conversion_small_cases() {
        // U_2 = 2 T_2 + T_0
        let u2 = ChebSeries::unit(Basis::SecondKind, 2).to_first_kind();
        assert_eq!(u2.coeffs(), &[1.0, 0.0, 2.0]);
        // U_3 = 2 T_3 + 2 T_1
        let u3 = ChebSeries::unit(Basis::SecondKind, 3).to_first_kind();
        assert_eq!(u3.coeffs(), &[0.0, 2.0, 0.0, 2.0]);
        let back = u3.to_second_kind();
        assert!((back.coeffs()[3] - 1.0).abs() < EPS);
        assert!(back.coeffs()[1].abs() < EPS);
    }

    #[test]
    fn integral_over_interval() {
        // ∫ x^2 = 2/3, x^2 = (T_0 + T_2)/2
        let p = ChebSeries::first_kind(vec![0.5, 0.0, 0.5]);
        assert!((p.integral() - 2.0 / 3.0).abs() < EPS);
        assert!((p.integrate(-1.0, 1.0) - 2.0 / 3.0).abs() < EPS);
        assert!((p.integrate(0.0, 0.5) - 0.125 / 3.0).abs() < EPS);
    }

    #[test]
    fn trim_drops_trailing() {
        let p = ChebSeries::first_kind(vec![1.0, 0.0, 1e-20, 0.0]);
        assert_eq!(p.trim(1e-16).len(), 1);
        assert_eq!(ChebSeries::first_kind(vec![0.0]).trim(0.0).len(), 0);
    }

    #[test]
    fn legendre_values() {
        let p2 = legendre(2);
        assert!((p2.eval(0.5) + 0.125).abs() < EPS);
        let p8 = legendre(8);
        assert_eq!(p8.degree(), 8);
        assert!((p8.eval(1.0) - 1.0).abs() < EPS);
        assert!((p8.eval(0.0) - 35.0 / 128.0).abs() < EPS);
        assert!((p8.integral()).abs() < EPS);
    }
}
