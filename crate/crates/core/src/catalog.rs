//! Named test functions, including the corrupted polynomials used by the
//! recovery experiments.

use crate::cheb::proxy::{FuncRep, ProxyOptions};
use crate::cheb::series::{legendre, Basis, ChebSeries};
use crate::error::{L1Error, Result};
use crate::localization::sqrt_one_minus_sq;

pub const NAMES: [&str; 6] = [
    "corrupted_t5",
    "legendre8_corrupted",
    "sqrt1mx2",
    "absx",
    "abs_quarter",
    "expsin10",
];

/// Support of the corruption of `T_5`.
pub const T5_SUPPORT: [(f64, f64); 2] = [(-0.7, -0.67), (0.9, 0.903)];

pub fn t5_omega(x: f64) -> f64 {
    2.0 + (100.0 * x).cos()
}

/// Total corruption measure of `legendre8_corrupted`.
pub const LEGENDRE8_MEASURE: f64 = 0.349;

/// Seven equal intervals centred at `-0.6, -0.4, …, 0.6`.
pub fn legendre8_support() -> Vec<(f64, f64)> {
    let w = LEGENDRE8_MEASURE / 7.0;
    (-3..=3)
        .map(|i| {
            let c = 0.2 * i as f64;
            (c - 0.5 * w, c + 0.5 * w)
        })
        .collect()
}

pub fn legendre8_omega(x: f64) -> f64 {
    2.0 + (7.0 * x).sin()
}

pub fn lookup(name: &str) -> Result<FuncRep> {
    match name {
        "corrupted_t5" => FuncRep::corrupted(
            ChebSeries::unit(Basis::FirstKind, 5),
            T5_SUPPORT.to_vec(),
            t5_omega,
        ),
        "legendre8_corrupted" => FuncRep::corrupted(legendre(8), legendre8_support(), legendre8_omega),
        "sqrt1mx2" => FuncRep::from_fn(sqrt_one_minus_sq),
        "absx" => FuncRep::with_options(f64::abs, &breaks(0.0)),
        "abs_quarter" => FuncRep::with_options(|x: f64| (x - 0.25).abs(), &breaks(0.25)),
        "expsin10" => FuncRep::from_fn(|x: f64| x.exp() * (10.0 * x).sin()),
        _ => Err(L1Error::NotFound(format!("no catalog entry named {name:?}"))),
    }
}

fn breaks(x: f64) -> ProxyOptions {
    ProxyOptions {
        breakpoints: vec![x],
        ..ProxyOptions::default()
    }
}
