//! Resolving `--fn` arguments into evaluable functions.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use l1rec_core::catalog;
use l1rec_core::cheb::{ChebSeries, FuncRep, ProxyOptions};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::expr::{self, EvalError, Expr};

/// Number of uniform points probed for domain errors before building a proxy.
const PROBE_POINTS: usize = 4001;

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Expression(String),
    Catalog(String),
    /// Two-column CSV `x,f`.
    SamplesFile(PathBuf),
    /// First-kind Chebyshev coefficients of `f₀`, corrupted on `intervals`
    /// by the expression `omega`.
    CorruptedPoly {
        coeffs: PathBuf,
        intervals: Vec<(f64, f64)>,
        omega: String,
    },
}

impl FunctionSpec {
    /// Interpret a `--fn` value. `samples:PATH` names a sample file,
    /// `poly:PATH` a coefficient file (with `--corrupt`/`--omega`), a catalog
    /// name selects that entry, and anything else is an expression.
    pub fn from_arg(arg: &str, corrupt: Option<&str>, omega: Option<&str>) -> Result<Self, CliError> {
        let arg = arg.trim();
        if let Some(path) = arg.strip_prefix("samples:") {
            return Ok(FunctionSpec::SamplesFile(PathBuf::from(path)));
        }
        if let Some(path) = arg.strip_prefix("poly:") {
            let intervals = match corrupt {
                Some(text) => parse_intervals(text)?,
                None => Vec::new(),
            };
            if !intervals.is_empty() && omega.is_none() {
                return Err(CliError::Validation("--corrupt needs --omega".into()));
            }
            return Ok(FunctionSpec::CorruptedPoly {
                coeffs: PathBuf::from(path),
                intervals,
                omega: omega.unwrap_or("0").to_string(),
            });
        }
        if corrupt.is_some() || omega.is_some() {
            return Err(CliError::Validation("--corrupt and --omega apply to poly: inputs only".into()));
        }
        if catalog::NAMES.contains(&arg) {
            return Ok(FunctionSpec::Catalog(arg.to_string()));
        }
        Ok(FunctionSpec::Expression(arg.to_string()))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FunctionSpec::Expression(_) => "expression",
            FunctionSpec::Catalog(_) => "catalog",
            FunctionSpec::SamplesFile(_) => "samples",
            FunctionSpec::CorruptedPoly { .. } => "corrupted_poly",
        }
    }
}

/// `a..b,c..d` into closed intervals.
pub fn parse_intervals(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = part
            .split_once("..")
            .ok_or_else(|| CliError::Validation(format!("interval {part:?} is not of the form a..b")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad interval endpoint {s:?}")))
        };
        out.push((parse(a)?, parse(b)?));
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    for &(a, b) in &out {
        if !(-1.0..=1.0).contains(&a) || !(-1.0..=1.0).contains(&b) || a > b {
            return Err(CliError::Validation(format!("interval [{a}, {b}] not inside [-1, 1]")));
        }
    }
    if out.windows(2).any(|w| w[1].0 <= w[0].1) {
        return Err(CliError::Validation("corruption intervals overlap".into()));
    }
    Ok(out)
}

/// A resolved input, ready for the numerical routines.
pub struct Resolved {
    pub spec: FunctionSpec,
    pub rep: FuncRep,
    /// Raw samples when the input was a sample file.
    pub samples: Option<Vec<(f64, f64)>>,
    /// SHA-256 of the input text or file contents.
    pub hash: String,
    domain: Option<DomainGuard>,
}

impl Resolved {
    /// Fails if an expression hit a domain error during any evaluation so far.
    pub fn check_domain(&self) -> Result<(), CliError> {
        match &self.domain {
            Some(g) => g.check(),
            None => Ok(()),
        }
    }
}

/// Records the first domain error hit by an evaluator that must return `f64`.
#[derive(Clone, Default)]
struct DomainGuard {
    hit: Arc<AtomicBool>,
    first: Arc<Mutex<Option<EvalError>>>,
}

impl DomainGuard {
    fn wrap(&self, e: Expr) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
        let guard = self.clone();
        move |x| match e.eval(x) {
            Ok(v) => v,
            Err(err) => {
                if !guard.hit.swap(true, Ordering::Relaxed) {
                    *guard.first.lock().unwrap() = Some(err);
                }
                f64::NAN
            }
        }
    }

    fn check(&self) -> Result<(), CliError> {
        if !self.hit.load(Ordering::Relaxed) {
            return Ok(());
        }
        let err = self.first.lock().unwrap().clone();
        Err(CliError::Domain(err.map_or_else(|| "domain error".into(), |e| e.to_string())))
    }
}

fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

/// Parse an expression and make sure it evaluates on all of [-1, 1].
fn checked_expression(text: &str) -> Result<Expr, CliError> {
    let e = expr::parse(text)?;
    for i in 0..PROBE_POINTS {
        let x = -1.0 + 2.0 * i as f64 / (PROBE_POINTS - 1) as f64;
        let v = e.eval(x).map_err(|err| CliError::Domain(err.to_string()))?;
        if !v.is_finite() {
            return Err(CliError::Domain(format!("{text:?} is not finite at x = {x}")));
        }
    }
    Ok(e)
}

pub fn resolve(spec: FunctionSpec) -> Result<Resolved, CliError> {
    match &spec {
        FunctionSpec::Catalog(name) => {
            let rep = catalog::lookup(name)?;
            Ok(Resolved {
                hash: sha256_hex(&[b"catalog", name.as_bytes()]),
                spec,
                rep,
                samples: None,
                domain: None,
            })
        }
        FunctionSpec::Expression(text) => {
            let e = checked_expression(text)?;
            let opts = ProxyOptions {
                breakpoints: e.breakpoints(),
                ..ProxyOptions::default()
            };
            let guard = DomainGuard::default();
            let rep = FuncRep::with_options(guard.wrap(e), &opts);
            guard.check()?;
            Ok(Resolved {
                hash: sha256_hex(&[b"expression", text.as_bytes()]),
                rep: rep?,
                spec,
                samples: None,
                domain: Some(guard),
            })
        }
        FunctionSpec::SamplesFile(path) => {
            let bytes = read(path)?;
            let samples = parse_samples(&String::from_utf8_lossy(&bytes))?;
            let rep = piecewise_linear(&samples)?;
            Ok(Resolved {
                hash: sha256_hex(&[b"samples", &bytes]),
                spec,
                rep,
                samples: Some(samples),
                domain: None,
            })
        }
        FunctionSpec::CorruptedPoly {
            coeffs,
            intervals,
            omega,
        } => {
            let bytes = read(coeffs)?;
            let c = parse_coefficients(&String::from_utf8_lossy(&bytes))?;
            let clean = ChebSeries::first_kind(c);
            let interval_text = format!("{intervals:?}");
            let hash = sha256_hex(&[b"corrupted_poly", &bytes, interval_text.as_bytes(), omega.as_bytes()]);
            let guard = DomainGuard::default();
            let rep = if intervals.is_empty() {
                FuncRep::from_series(clean)
            } else {
                let w = checked_expression(omega)?;
                FuncRep::corrupted(clean, intervals.clone(), guard.wrap(w))?
            };
            guard.check()?;
            Ok(Resolved {
                hash,
                spec,
                rep,
                samples: None,
                domain: Some(guard),
            })
        }
    }
}

/// Whitespace- or comma-separated numbers; `#` starts a comment.
pub fn parse_coefficients(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            out.push(
                tok.parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("bad coefficient {tok:?}")))?,
            );
        }
    }
    if out.is_empty() {
        return Err(CliError::Validation("coefficient file is empty".into()));
    }
    Ok(out)
}

/// Two-column CSV `x,f` with an optional header and strictly increasing `x`.
pub fn parse_samples(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(CliError::Validation(format!(
                "line {}: expected two columns x,f",
                lineno + 1
            )));
        }
        let (x, f) = match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(x), Ok(f)) => (x, f),
            _ if out.is_empty() && lineno == 0 => continue,
            _ => {
                return Err(CliError::Validation(format!("line {}: not numeric", lineno + 1)));
            }
        };
        if !(-1.0..=1.0).contains(&x) || !f.is_finite() {
            return Err(CliError::Validation(format!("line {}: x outside [-1, 1]", lineno + 1)));
        }
        if out.last().is_some_and(|&(p, _)| x <= p) {
            return Err(CliError::Validation(format!(
                "line {}: x must be strictly increasing",
                lineno + 1
            )));
        }
        out.push((x, f));
    }
    if out.len() < 2 {
        return Err(CliError::Validation("need at least two samples".into()));
    }
    Ok(out)
}

/// Piecewise-linear interpolant of the samples, held constant beyond the ends.
fn piecewise_linear(samples: &[(f64, f64)]) -> Result<FuncRep, CliError> {
    let pts: Arc<Vec<(f64, f64)>> = Arc::new(samples.to_vec());
    let p = Arc::clone(&pts);
    let f = move |x: f64| {
        let i = p.partition_point(|&(xi, _)| xi <= x);
        if i == 0 {
            return p[0].1;
        }
        if i == p.len() {
            return p[p.len() - 1].1;
        }
        let (x0, y0) = p[i - 1];
        let (x1, y1) = p[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    };
    let breakpoints: Vec<f64> = pts.iter().map(|s| s.0).filter(|&x| x > -1.0 && x < 1.0).collect();
    let opts = ProxyOptions {
        max_pieces: (2 * breakpoints.len() + 16).max(ProxyOptions::default().max_pieces),
        breakpoints,
        ..ProxyOptions::default()
    };
    Ok(FuncRep::with_options(f, &opts)?)
}

/// Samples lying on the recovery grid with parameter `N = len − 1`.
pub fn grid_values(samples: &[(f64, f64)]) -> Result<Vec<f64>, CliError> {
    let grid = l1rec_core::cheb::build_grid(samples.len() - 1);
    for (i, (&(x, _), &g)) in samples.iter().zip(grid.points()).enumerate() {
        if (x - g).abs() > 1e-12 {
            return Err(CliError::Validation(format!(
                "sample {i} at x = {x} is not on the Chebyshev grid with N = {} (expected {g})",
                samples.len() - 1
            )));
        }
    }
    Ok(samples.iter().map(|s| s.1).collect())
}
