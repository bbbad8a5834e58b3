//! Conditional-sum-of-squares estimation of ARIMA(p, d, q).
//!
//! After differencing `d` times the series `w` is modelled as
//! `w_t = c + sum_i phi_i w_{t-i} + e_t + sum_j theta_j e_{t-j}` with the
//! innovations before the first usable observation set to zero.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ArimaError;
use crate::series::difference;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaSpec {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self, ArimaError> {
        let s = ArimaSpec { p, d, q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ArimaError> {
        if self.p + self.q == 0 && self.d == 0 {
            return Err(ArimaError::InvalidSpec(
                "need p + q >= 1 or d >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Shortest series `fit` accepts.
    pub fn min_len(&self) -> usize {
        self.p + self.q + self.d + 2
    }
}

impl fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

/// Parses `p,d,q`, optionally parenthesised.
impl FromStr for ArimaSpec {
    type Err = ArimaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let bad = || ArimaError::InvalidSpec(format!("expected p,d,q, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
        ArimaSpec::new(n(0)?, n(1)?, n(2)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitWarning {
    /// AR polynomial has a root on or inside the unit circle.
    NonStationary,
    /// MA polynomial has a root on or inside the unit circle.
    NonInvertible,
    /// Iteration limit reached; the best iterate is returned.
    NonConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub spec: ArimaSpec,
    pub c: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Mean of the squared residuals.
    pub sigma2: f64,
    /// Innovations for differenced observations `p..`.
    pub residuals: Vec<f64>,
    pub css: f64,
    /// Whether `c` was estimated (only when `d == 0`).
    pub intercept: bool,
    pub iterations: usize,
    pub warnings: Vec<FitWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative gradient tolerance.
    pub tol: f64,
    /// Estimate an intercept; defaults to `d == 0`.
    pub intercept: Option<bool>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 500,
            tol: 1e-8,
            intercept: None,
        }
    }
}

/// Parameter vector layout: `[c?, phi.., theta..]`.
#[derive(Debug, Clone, Copy)]
struct Layout {
    intercept: bool,
    p: usize,
    q: usize,
}

impl Layout {
    fn len(&self) -> usize {
        usize::from(self.intercept) + self.p + self.q
    }

    fn split<'a>(&self, b: &'a [f64]) -> (f64, &'a [f64], &'a [f64]) {
        let o = usize::from(self.intercept);
        let c = if self.intercept { b[0] } else { 0.0 };
        (c, &b[o..o + self.p], &b[o + self.p..])
    }
}

/// Innovations `e_t` for `t = p..w.len()`, pre-sample innovations zero.
pub(crate) fn innovations(w: &[f64], c: f64, phi: &[f64], theta: &[f64]) -> Vec<f64> {
    let p = phi.len();
    let mut e = vec![0.0; w.len()];
    for t in p..w.len() {
        let mut v = w[t] - c;
        for (i, f) in phi.iter().enumerate() {
            v -= f * w[t - 1 - i];
        }
        for (j, th) in theta.iter().enumerate() {
            if t > j {
                v -= th * e[t - 1 - j];
            }
        }
        e[t] = v;
    }
    e.split_off(p)
}

/// Residuals and their Jacobian with respect to the parameter vector.
fn residuals_and_jacobian(w: &[f64], lay: Layout, b: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let (c, phi, theta) = lay.split(b);
    let p = lay.p;
    let n = w.len();
    let k = lay.len();
    let mut e = vec![0.0; n];
    // de[t][m]
    let mut de = vec![vec![0.0; k]; n];
    for t in p..n {
        let mut v = w[t] - c;
        for (i, f) in phi.iter().enumerate() {
            v -= f * w[t - 1 - i];
        }
        for (j, th) in theta.iter().enumerate() {
            if t > j {
                v -= th * e[t - 1 - j];
            }
        }
        e[t] = v;
        let mut g = vec![0.0; k];
        let o = usize::from(lay.intercept);
        if lay.intercept {
            g[0] = -1.0;
        }
        for i in 0..p {
            g[o + i] = -w[t - 1 - i];
        }
        for j in 0..lay.q {
            if t > j {
                g[o + p + j] = -e[t - 1 - j];
            }
        }
        for (j, th) in theta.iter().enumerate() {
            if t > j {
                for m in 0..k {
                    g[m] -= th * de[t - 1 - j][m];
                }
            }
        }
        de[t] = g;
    }
    let rows = n - p;
    let jac = DMatrix::from_fn(rows, k, |r, m| de[p + r][m]);
    (e.split_off(p), jac)
}

fn css_of(w: &[f64], lay: Layout, b: &[f64]) -> f64 {
    let (c, phi, theta) = lay.split(b);
    innovations(w, c, phi, theta).iter().map(|e| e * e).sum()
}

struct Solution {
    b: Vec<f64>,
    css: f64,
    iterations: usize,
    converged: bool,
}

/// Levenberg-Marquardt on the CSS objective from one starting point.
fn minimize(w: &[f64], lay: Layout, start: Vec<f64>, opts: &FitOptions) -> Solution {
    let k = lay.len();
    let mut b = start;
    let mut css = css_of(w, lay, &b);
    if !css.is_finite() {
        return Solution {
            b,
            css: f64::INFINITY,
            iterations: 0,
            converged: false,
        };
    }
    let mut lambda = 1e-3;
    for it in 0..opts.max_iter {
        let (e, jac) = residuals_and_jacobian(w, lay, &b);
        let ev = DVector::from_vec(e);
        let grad = jac.transpose() * &ev;
        if grad.amax() <= opts.tol * (1.0 + css) {
            return Solution {
                b,
                css,
                iterations: it,
                converged: true,
            };
        }
        let jtj = jac.transpose() * &jac;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for m in 0..k {
                a[(m, m)] += lambda * (jtj[(m, m)].max(1e-12));
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let cand: Vec<f64> = b.iter().zip(step.iter()).map(|(x, s)| x + s).collect();
            let cand_css = css_of(w, lay, &cand);
            if cand_css.is_finite() && cand_css < css {
                let rel = (css - cand_css) / css.max(f64::MIN_POSITIVE);
                b = cand;
                css = cand_css;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-15 {
                    return Solution {
                        b,
                        css,
                        iterations: it + 1,
                        converged: true,
                    };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no descent direction left at machine precision
            return Solution {
                b,
                css,
                iterations: it + 1,
                converged: grad.amax() <= 1e-4 * (1.0 + css),
            };
        }
    }
    Solution {
        b,
        css,
        iterations: opts.max_iter,
        converged: false,
    }
}

/// Whether all roots of `1 - a_1 z - ... - a_k z^k` lie outside the unit
/// circle, via the step-down recursion on reflection coefficients.
pub(crate) fn roots_outside_unit_circle(a: &[f64]) -> bool {
    let mut a = a.to_vec();
    while let Some(&kappa) = a.last() {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(kappa.abs() < 1.0) {
            return false;
        }
        let m = a.len() - 1;
        let prev: Vec<f64> = (0..m)
            .map(|i| (a[i] + kappa * a[m - 1 - i]) / (1.0 - kappa * kappa))
            .collect();
        a = prev;
    }
    true
}

pub fn fit(values: &[f64], spec: ArimaSpec) -> Result<ArimaModel, ArimaError> {
    fit_with(values, spec, &FitOptions::default())
}

pub fn fit_with(
    values: &[f64],
    spec: ArimaSpec,
    opts: &FitOptions,
) -> Result<ArimaModel, ArimaError> {
    spec.validate()?;
    if values.len() < spec.min_len() {
        return Err(ArimaError::TooShort {
            needed: spec.min_len(),
            len: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ArimaError::InvalidArgument("non-finite value".into()));
    }
    let w = difference(values, spec.d)?.values;
    let lay = Layout {
        intercept: opts.intercept.unwrap_or(spec.d == 0),
        p: spec.p,
        q: spec.q,
    };
    if w.len() < spec.p + lay.len() + 1 {
        return Err(ArimaError::TooShort {
            needed: spec.d + spec.p + lay.len() + 1,
            len: values.len(),
        });
    }

    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let (best, iterations, converged) = if lay.len() == 0 {
        (Vec::new(), 0, true)
    } else {
        let mut best: Option<Solution> = None;
        let mut total_iter = 0;
        for start in starts(lay, mean) {
            let sol = minimize(&w, lay, start, opts);
            total_iter += sol.iterations;
            if best.as_ref().is_none_or(|b| sol.css < b.css) {
                best = Some(sol);
            }
        }
        let best = best.unwrap();
        if !best.css.is_finite() {
            return Err(ArimaError::InvalidArgument(
                "sum of squares diverged from every start".into(),
            ));
        }
        (best.b, total_iter, best.converged)
    };

    let (c, phi, theta) = lay.split(&best);
    let residuals = innovations(&w, c, phi, theta);
    let css: f64 = residuals.iter().map(|e| e * e).sum();
    let mut warnings = Vec::new();
    if !converged {
        warnings.push(FitWarning::NonConvergence);
    }
    if !roots_outside_unit_circle(phi) {
        warnings.push(FitWarning::NonStationary);
    }
    let neg_theta: Vec<f64> = theta.iter().map(|t| -t).collect();
    if !roots_outside_unit_circle(&neg_theta) {
        warnings.push(FitWarning::NonInvertible);
    }
    Ok(ArimaModel {
        spec,
        c,
        phi: phi.to_vec(),
        theta: theta.to_vec(),
        sigma2: css / residuals.len() as f64,
        css,
        residuals,
        intercept: lay.intercept,
        iterations,
        warnings,
    })
}

/// Zeros, then the AR and MA blocks perturbed by +-0.3. The intercept starts
/// at the sample mean.
fn starts(lay: Layout, mean: f64) -> Vec<Vec<f64>> {
    let base = |phi: f64, theta: f64| {
        let mut b = Vec::with_capacity(lay.len());
        if lay.intercept {
            b.push(mean * (1.0 - phi * lay.p as f64).max(0.1));
        }
        b.extend(std::iter::repeat_n(phi / lay.p.max(1) as f64, lay.p));
        b.extend(std::iter::repeat_n(theta / lay.q.max(1) as f64, lay.q));
        b
    };
    let mut out = vec![base(0.0, 0.0)];
    if lay.p > 0 {
        out.push(base(0.3, 0.0));
        out.push(base(-0.3, 0.0));
    }
    if lay.q > 0 {
        out.push(base(0.0, 0.3));
        out.push(base(0.0, -0.3));
    }
    out
}
