//! Values at Chebyshev extreme points to first-kind coefficients.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// `cos(kπ/d)` for `k = 0..=d`, from 1 down to −1.
pub fn extreme_points(d: usize) -> Vec<f64> {
    if d == 0 {
        return vec![1.0];
    }
    (0..=d)
        .map(|k| (PI * (d as f64 - 2.0 * k as f64) / (2.0 * d as f64)).sin())
        .collect()
}

/// First-kind coefficients `a_0..a_d` of the polynomial taking `values[k]`
/// at `cos(kπ/d)`.
pub fn values_to_coeffs(values: &[f64]) -> Vec<f64> {
    let d = values.len().saturating_sub(1);
    if d == 0 {
        return values.to_vec();
    }
    if d <= 32 {
        return direct_dct1(values);
    }
    let len = 2 * d;
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(len);
    buf.extend(values.iter().map(|&v| Complex::new(v, 0.0)));
    buf.extend(values[1..d].iter().rev().map(|&v| Complex::new(v, 0.0)));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let mut a: Vec<f64> = buf[..=d].iter().map(|z| z.re / d as f64).collect();
    a[0] *= 0.5;
    a[d] *= 0.5;
    a
}

fn direct_dct1(values: &[f64]) -> Vec<f64> {
    let d = values.len() - 1;
    let df = d as f64;
    (0..=d)
        .map(|j| {
            let mut s = 0.5 * (values[0] + if j % 2 == 0 { values[d] } else { -values[d] });
            for (k, v) in values.iter().enumerate().take(d).skip(1) {
                s += v * (PI * ((j * k) % (2 * d)) as f64 / df).cos();
            }
            let a = 2.0 * s / df;
            if j == 0 || j == d {
                0.5 * a
            } else {
                a
            }
        })
        .collect()
}
