use std::path::{Path, PathBuf};

use l1rec_core::catalog;
use l1rec_core::cheb::{build_grid, l1_norm, linf_norm, FuncRep, Piecewise};
use l1rec_core::localization::{abs_case, loglog_slope, omega_measure, sqrt_case, LocalizationReport};
use l1rec_core::newton::{best_l1, first_kind, lp_on_grid, lp_refined, newton_state, BestL1Options, Path as SolvePath};
use l1rec_core::recovery::{
    degree_sweep_samples, recover_l1, rip_bound, rip_bruteforce, RecoveryReport,
};
use log::info;
use rayon::prelude::*;
use serde_json::json;

use crate::error::CliError;
use crate::input::{grid_values, Resolved};
use crate::report::{fin, write_atomic, InputEcho, RunReport, TracePoint};

/// Uniform samples in the error-data CSV.
pub const ERRDATA_POINTS: usize = 2001;
/// Default number of recovery samples, `N + 1`.
pub const DEFAULT_SAMPLES: usize = 5000;

/// What a command produced: the report plus whether it counts as a
/// numerical failure.
pub struct Outcome {
    pub report: RunReport,
    pub failed: bool,
}

impl Outcome {
    fn ok(report: RunReport) -> Self {
        Outcome { report, failed: false }
    }
}

pub fn echo(r: &Resolved, spec_text: &str) -> InputEcho {
    InputEcho {
        spec: spec_text.to_string(),
        kind: r.spec.kind().to_string(),
        sha256: r.hash.clone(),
    }
}

pub struct ApproxArgs<'a> {
    pub degree: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub errdata: Option<&'a Path>,
}

pub fn approx(r: &Resolved, mut report: RunReport, args: &ApproxArgs) -> Result<Outcome, CliError> {
    let opts = BestL1Options {
        tol: args.tol,
        max_iter: args.max_iter,
        ..BestL1Options::default()
    };
    let res = best_l1(&r.rep, args.degree, &opts)?;
    r.check_domain()?;
    info!("approx n={} path={} l1={:e}", args.degree, res.path.as_str(), res.l1_error);
    let e = r.rep.residual(&res.polynomial);
    let (linf, _) = linf_norm(&e)?;

    report.degree = Some(args.degree);
    report.path = Some(res.path.as_str().to_string());
    report.l1_error = fin(res.l1_error);
    report.linf_error = fin(linf);
    report.near_best_factor = res.near_best_factor.and_then(fin);
    report.optimality = fin(res.mu.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    report.trace = res
        .trace
        .iter()
        .map(|t| TracePoint {
            iter: t.iteration,
            objective: fin(t.objective),
            optimality: fin(t.optimality),
        })
        .collect();
    report.set("basis", "chebyshev_t");
    report.set("coefficients", first_kind(&res.polynomial).coeffs());
    report.set("effective_tol", res.effective_tol);
    report.set("lp_grid_size", res.lp_grid_size);

    if let Some(path) = args.errdata {
        write_atomic(path, errdata_csv(&r.rep, &|x| res.polynomial.eval(x)).as_bytes())?;
        report.set("errdata", path.display().to_string());
    }
    let failed = res.path == SolvePath::NewtonStalled;
    if failed {
        report.status = "failed".into();
        report.error = Some(format!("Newton iteration stalled after {} steps", res.trace.len()));
    }
    Ok(Outcome { report, failed })
}

/// `x,residual` on a uniform grid of [-1, 1].
pub fn errdata_csv(f: &FuncRep, p: &dyn Fn(f64) -> f64) -> String {
    let mut out = String::from("x,residual\n");
    let m = (ERRDATA_POINTS - 1) as f64;
    for i in 0..ERRDATA_POINTS {
        let x = (-1.0 + 2.0 * i as f64 / m).clamp(-1.0, 1.0);
        out.push_str(&format!("{x},{}\n", f.eval(x) - p(x)));
    }
    out
}

pub struct RecoverArgs {
    pub degree: usize,
    pub samples: usize,
    pub sweep: Option<usize>,
    pub tol: f64,
}

pub fn recover(r: &Resolved, mut report: RunReport, args: &RecoverArgs) -> Result<Outcome, CliError> {
    let values = match &r.samples {
        Some(s) => grid_values(s)?,
        None => {
            if args.samples < 2 {
                return Err(CliError::Validation("--samples must be at least 2".into()));
            }
            build_grid(args.samples - 1).sample(|x| r.rep.eval(x))
        }
    };
    r.check_domain()?;
    let corruption = r.rep.corruption();
    report.set("samples", values.len());

    let rep = match args.sweep {
        Some(n_max) => {
            let sw = degree_sweep_samples(&values, n_max, args.tol, corruption)?;
            report.set(
                "sweep",
                sw.trace
                    .iter()
                    .map(|e| json!({"n": e.n, "k": e.k, "exact": e.exact}))
                    .collect::<Vec<_>>(),
            );
            match sw.report {
                Some(rep) => rep,
                None => {
                    report.degree = None;
                    report.exact = Some(false);
                    report.status = "failed".into();
                    report.error = Some(format!("no exact recovery for any degree up to {n_max}"));
                    return Ok(Outcome { report, failed: true });
                }
            }
        }
        None => recover_l1(&values, args.degree, args.tol, corruption)?,
    };
    info!("recover n={} k={} exact={}", rep.n, rep.k, rep.exact);
    fill_recovery(&mut report, &rep);
    Ok(Outcome::ok(report))
}

fn fill_recovery(report: &mut RunReport, rep: &RecoveryReport) {
    let c = &rep.certificate;
    report.degree = Some(rep.n);
    report.exact = Some(rep.exact);
    report.k = Some(rep.k);
    report.l1_error = fin(rep.lp_objective);
    report.set("basis", "chebyshev_t");
    report.set("coefficients", first_kind(&rep.recovered).coeffs());
    report.set("residual_max_off_support", fin(rep.residual_max_off_support));
    report.set("generator_error", rep.generator_error.and_then(fin));
    report.set("support_measure", fin(rep.support_measure));
    report.set("corrupted_indices", &rep.corrupted_indices);
    report.set(
        "certificate",
        json!({
            "l0_unique": c.l0_unique,
            "l1_sufficient": c.l1_sufficient,
            "rip_delta": fin(c.rip_delta),
            "measure": c.measure.and_then(fin),
            "global_threshold": fin(c.global_threshold),
            "below_global": c.below_global,
            "centered_threshold": c.centered_threshold.and_then(fin),
            "below_centered": c.below_centered,
            "strict_threshold": fin(c.strict_threshold),
            "below_strict": c.below_strict,
        }),
    );
}

fn localization_row(l: &LocalizationReport) -> serde_json::Value {
    json!({
        "n": l.n,
        "path": l.best.path.as_str(),
        "l1_error": fin(l.l1_error),
        "linf_error": fin(l.linf_error),
        "omega_measure": fin(l.omega_measure),
        "omega_bound": fin(l.omega_bound),
        "omega_intervals": l.omega_intervals.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
    })
}

/// Slope of `log y` against `log n`, when at least two points are positive.
fn slope(ns: &[usize], ys: &[f64]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0 && y.is_finite())
        .map(|(&n, &y)| (n as f64, y))
        .unzip();
    (x.len() >= 2).then(|| loglog_slope(&x, &y)).and_then(fin)
}

pub fn localize(r: &Resolved, mut report: RunReport, degrees: &[usize]) -> Result<Outcome, CliError> {
    if degrees.is_empty() {
        return Err(CliError::Validation("--degrees is empty".into()));
    }
    let rows: Vec<LocalizationReport> = degrees
        .iter()
        .map(|&n| {
            info!("localize n={n}");
            omega_measure(&r.rep, n)
        })
        .collect::<Result<_, _>>()?;
    r.check_domain()?;
    let last = rows.last().expect("non-empty");
    report.degree = Some(last.n);
    report.path = Some(last.best.path.as_str().to_string());
    report.l1_error = fin(last.l1_error);
    report.linf_error = fin(last.linf_error);
    report.near_best_factor = last.best.near_best_factor.and_then(fin);
    report.omega_measure = fin(last.omega_measure);
    let om: Vec<f64> = rows.iter().map(|l| l.omega_measure).collect();
    report.set("omega_slope", slope(degrees, &om));
    report.set("rows", rows.iter().map(localization_row).collect::<Vec<_>>());
    let stalled: Vec<usize> = rows
        .iter()
        .filter(|l| l.best.path == SolvePath::NewtonStalled)
        .map(|l| l.n)
        .collect();
    let failed = !stalled.is_empty();
    if failed {
        report.status = "failed".into();
        report.error = Some(format!("Newton iteration stalled for degrees {stalled:?}"));
    }
    Ok(Outcome { report, failed })
}

pub fn rip(mut report: RunReport, big_n: usize, n: usize, k: usize, brute: bool) -> Result<Outcome, CliError> {
    if big_n < n {
        return Err(CliError::Validation(format!("need N >= n, got N={big_n}, n={n}")));
    }
    let b = rip_bound(big_n, n, k);
    report.degree = Some(n);
    report.k = Some(k);
    report.set("N", big_n);
    report.set("delta", fin(b.delta));
    report.set("sufficient", b.sufficient);
    if brute {
        let d = rip_bruteforce(big_n, n, k)?;
        report.set("delta_bruteforce", fin(d));
        report.set("bound_holds", d <= b.delta + 1e-12);
    }
    Ok(Outcome::ok(report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchCase {
    Sqrt,
    Abs,
    Lpconv,
}

impl BenchCase {
    pub fn name(self) -> &'static str {
        match self {
            BenchCase::Sqrt => "sqrt",
            BenchCase::Abs => "abs",
            BenchCase::Lpconv => "lpconv",
        }
    }
}

pub const SQRT_OMEGA_DEGREES: [usize; 5] = [10, 20, 40, 80, 160];
pub const ABS_DEGREES: [usize; 5] = [10, 20, 40, 80, 160];
pub const LPCONV_SIZES: [usize; 5] = [100, 316, 1000, 3162, 10000];
pub const LPCONV_DEGREE: usize = 10;

/// Returns the report and a CSV table of the rows.
pub fn bench(
    case: BenchCase,
    mut report: RunReport,
    degrees: Option<&[usize]>,
) -> Result<(Outcome, String), CliError> {
    let mut failed = false;
    let csv = match case {
        BenchCase::Sqrt => {
            let f = catalog::lookup("sqrt1mx2")?;
            let bound_degrees: Vec<usize> = match degrees {
                Some(d) => d.to_vec(),
                None => (2..=64).step_by(2).collect(),
            };
            let omega_degrees: Vec<usize> = degrees.map_or(SQRT_OMEGA_DEGREES.to_vec(), <[usize]>::to_vec);
            let bounds: Vec<_> = bound_degrees
                .par_iter()
                .map(|&n| -> Result<_, CliError> {
                    let case = sqrt_case(n)?;
                    let best = best_l1(&f, n, &BestL1Options::default())?;
                    Ok((case, best))
                })
                .collect::<Result<_, _>>()?;
            let omegas: Vec<LocalizationReport> = omega_degrees
                .par_iter()
                .map(|&n| omega_measure(&f, n))
                .collect::<Result<_, _>>()?;
            let mut csv = String::from("n,l1_error,l1_upper,path\n");
            let mut rows = Vec::new();
            for (c, b) in &bounds {
                failed |= b.path == SolvePath::NewtonStalled;
                csv.push_str(&format!("{},{},{},{}\n", c.n, b.l1_error, c.l1_upper, b.path.as_str()));
                rows.push(json!({
                    "n": c.n,
                    "l1_error": fin(b.l1_error),
                    "l1_upper": fin(c.l1_upper),
                    "within_bound": b.l1_error <= c.l1_upper,
                    "path": b.path.as_str(),
                    "sigma_n": fin(c.sigma_n),
                    "omega_upper": fin(c.omega_upper),
                }));
            }
            let om: Vec<f64> = omegas.iter().map(|l| l.omega_measure).collect();
            report.set("rows", rows);
            report.set("omega_rows", omegas.iter().map(localization_row).collect::<Vec<_>>());
            report.set("omega_slope", slope(&omega_degrees, &om));
            csv
        }
        BenchCase::Abs => {
            let f = catalog::lookup("absx")?;
            let ns: Vec<usize> = degrees.map_or(ABS_DEGREES.to_vec(), <[usize]>::to_vec);
            let reps: Vec<LocalizationReport> = ns
                .par_iter()
                .map(|&n| omega_measure(&f, n))
                .collect::<Result<_, _>>()?;
            let mut csv = String::from("n,l1_error,l1_asymptotic,linf_error,linf_asymptotic,omega_measure\n");
            let mut rows = Vec::new();
            for l in &reps {
                failed |= l.best.path == SolvePath::NewtonStalled;
                let a = abs_case(l.n)?;
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    l.n, l.l1_error, a.l1_asymptotic, l.linf_error, a.linf_asymptotic, l.omega_measure
                ));
                rows.push(json!({
                    "n": l.n,
                    "path": l.best.path.as_str(),
                    "l1_error": fin(l.l1_error),
                    "l1_asymptotic": fin(a.l1_asymptotic),
                    "ratio": fin(l.l1_error / a.l1_asymptotic),
                    "linf_error": fin(l.linf_error),
                    "linf_asymptotic": fin(a.linf_asymptotic),
                    "omega_measure": fin(l.omega_measure),
                    "omega_asymptotic": fin(a.omega_asymptotic),
                }));
            }
            let om: Vec<f64> = reps.iter().map(|l| l.omega_measure).collect();
            report.set("rows", rows);
            report.set("omega_slope", slope(&ns, &om));
            csv
        }
        BenchCase::Lpconv => {
            let f = catalog::lookup("expsin10")?;
            let n = LPCONV_DEGREE;
            let reference = best_l1(&f, n, &BestL1Options::default())?;
            failed |= reference.path != SolvePath::NewtonConverged;
            let errs: Vec<(f64, f64)> = LPCONV_SIZES
                .par_iter()
                .map(|&big_n| -> Result<_, CliError> {
                    let sol = lp_on_grid(&f, n, big_n)?;
                    let plain = l1_norm(&Piecewise::from_series(&sol.coeffs.sub(&reference.polynomial)))?;
                    let st = newton_state(&f, sol.coeffs, 0)?;
                    let refined = lp_refined(&f, n, &st.roots, big_n)?;
                    let r = l1_norm(&Piecewise::from_series(&refined.coeffs.sub(&reference.polynomial)))?;
                    Ok((plain, r))
                })
                .collect::<Result<_, _>>()?;
            let mut csv = String::from("N,unrefined,refined\n");
            let mut rows = Vec::new();
            for (&big_n, &(p, q)) in LPCONV_SIZES.iter().zip(&errs) {
                csv.push_str(&format!("{big_n},{p},{q}\n"));
                rows.push(json!({"N": big_n, "unrefined": fin(p), "refined": fin(q)}));
            }
            let plain: Vec<f64> = errs.iter().map(|e| e.0).collect();
            let refined: Vec<f64> = errs.iter().map(|e| e.1).collect();
            report.degree = Some(n);
            report.path = Some(reference.path.as_str().to_string());
            report.l1_error = fin(reference.l1_error);
            report.set("rows", rows);
            report.set("unrefined_slope", slope(&LPCONV_SIZES, &plain));
            report.set("refined_slope", slope(&LPCONV_SIZES, &refined));
            csv
        }
    };
    report.set("case", case.name());
    if failed {
        report.status = "failed".into();
        report.error = Some("a best L1 run did not converge".into());
    }
    Ok((Outcome { report, failed }, csv))
}

pub fn bench_paths(dir: &Path, case: BenchCase) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("bench_{}.json", case.name())),
        dir.join(format!("bench_{}.csv", case.name())),
    )
}
