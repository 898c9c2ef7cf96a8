//! Roots of U_{N+1} with their quadrature weights, and interpolation on them.

use std::f64::consts::PI;

use super::series::ChebSeries;

/// The `N + 1` roots of `U_{N+1}` in increasing order, with weights
/// `w_j = π √(1 − x_j²) / (N + 2)`.
#[derive(Clone, Debug)]
pub struct ChebGrid {
    size: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    sin_theta: Vec<f64>,
}

impl ChebGrid {
    /// `N`; the grid holds `N + 1` points.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `√(1 − x_j²)`, computed from the angle rather than from `x_j`.
    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_theta
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.points.iter().map(|&x| f(x)).collect()
    }

    /// Index `j` with `x_j == x`, if `x` lies on the grid (to 1e-14).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let i = self.points.partition_point(|&p| p < x - 1e-14);
        (i < self.points.len() && (self.points[i] - x).abs() <= 1e-14).then_some(i)
    }
}

/// The second-kind Chebyshev grid `x_j = cos((N + 1 − j)π / (N + 2))`.
pub fn build_grid(n: usize) -> ChebGrid {
    let m = n as f64 + 2.0;
    let mut points = Vec::with_capacity(n + 1);
    let mut sin_theta = Vec::with_capacity(n + 1);
    for j in 0..=n {
        // cos((N+1-j)π/(N+2)) = sin(π(2j - N)/(2(N+2))), antisymmetric in j
        let phi = PI * (2.0 * j as f64 - n as f64) / (2.0 * m);
        points.push(phi.sin());
        sin_theta.push(phi.cos());
    }
    let weights = sin_theta.iter().map(|s| PI * s / m).collect();
    ChebGrid {
        size: n,
        points,
        weights,
        sin_theta,
    }
}

/// Coefficients in the second-kind basis of the degree-`n` interpolant of
/// `values` given at the points of `build_grid(n)`.
pub fn interpolate_values(values: &[f64]) -> ChebSeries {
    assert!(!values.is_empty(), "at least one value is required");
    let n = values.len() - 1;
    let m = n as f64 + 2.0;
    let grid = build_grid(n);
    let mut c = vec![0.0; n + 1];
    // U_j(x_i) = sin((j+1)θ_i)/sin θ_i and the matrix sin((j+1)θ_i)·√(2/m) is orthogonal
    for (i, &fi) in values.iter().enumerate() {
        let theta = (n + 1 - i) as f64 * PI / m;
        let s = grid.sin_theta[i] * fi * 2.0 / m;
        for (j, cj) in c.iter_mut().enumerate() {
            *cj += s * ((j + 1) as f64 * theta).sin();
        }
    }
    ChebSeries::second_kind(c)
}

/// The polynomial interpolant of `f` on `build_grid(n)`, second-kind basis.
pub fn interpolate_on_grid<F: Fn(f64) -> f64>(f: F, n: usize) -> ChebSeries {
    let grid = build_grid(n);
    interpolate_values(&grid.sample(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::series::Basis;

    #[test]
    fn small_grids() {
        let g = build_grid(0);
        assert_eq!(g.points(), &[0.0]);
        assert!((g.weights()[0] - PI / 2.0).abs() < 1e-15);

        let g = build_grid(1);
        assert!((g.points()[0] + 0.5).abs() < 1e-15);
        assert!((g.points()[1] - 0.5).abs() < 1e-15);
        let w = PI * 3f64.sqrt() / 6.0;
        assert!((g.weights()[0] - w).abs() < 1e-15);
        assert!((g.weights()[1] - w).abs() < 1e-15);

        let g = build_grid(3);
        assert!((g.points()[0] - (4.0 * PI / 5.0).cos()).abs() < 1e-15);
        assert!((g.points()[0] + 0.809017).abs() < 1e-6);
    }

    #[test]
    fn symmetry_and_order() {
        for n in [0usize, 1, 2, 7, 40, 201] {
            let g = build_grid(n);
            for j in 0..=n {
                assert_eq!(g.points()[j], -g.points()[n - j]);
                assert_eq!(g.weights()[j], g.weights()[n - j]);
                assert!(g.weights()[j] > 0.0);
                let exact = ((n + 1 - j) as f64 * PI / (n as f64 + 2.0)).cos();
                assert!((g.points()[j] - exact).abs() < 1e-15);
            }
            assert!(g.points().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn interpolation_examples() {
        let u3 = ChebSeries::unit(Basis::SecondKind, 3);
        let c = interpolate_on_grid(|x| u3.eval(x), 3);
        let expect = [0.0, 0.0, 0.0, 1.0];
        for (a, b) in c.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let c = interpolate_on_grid(|_| 1.0, 2);
        for (a, b) in c.coeffs().iter().zip([1.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let c = interpolate_on_grid(f64::abs, 2);
        let r = 2f64.sqrt() / 4.0;
        for (a, b) in c.coeffs().iter().zip([r, 0.0, r]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn index_lookup() {
        let g = build_grid(6);
        assert_eq!(g.index_of(g.points()[4]), Some(4));
        assert_eq!(g.index_of(0.123), None);
    }
}
