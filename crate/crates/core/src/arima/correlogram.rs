use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::ArimaError;

/// Sample autocorrelation with the biased (1/n) autocovariance, which keeps
/// the sequence positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub max_lag: usize,
    /// `values[k]` is the lag-k autocorrelation; `values[0] == 1`.
    pub values: Vec<f64>,
    pub n: usize,
    /// `1.96 / sqrt(n)`.
    pub conf_bound: f64,
}

/// Partial autocorrelation from the Durbin-Levinson recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacfResult {
    pub max_lag: usize,
    /// `values[k]` is the lag-k partial autocorrelation for `k >= 1`;
    /// `values[0]` is 1 by convention.
    pub values: Vec<f64>,
    pub conf_bound: f64,
}

/// `min(50, n / 4)`, at least 1.
pub fn default_max_lag(n: usize) -> usize {
    (n / 4).clamp(1, 50)
}

fn conf_bound(n: usize) -> f64 {
    1.96 / (n as f64).sqrt()
}

pub fn acf(values: &[f64], max_lag: usize) -> Result<AcfResult, ArimaError> {
    let n = values.len();
    if max_lag == 0 {
        return Err(ArimaError::InvalidArgument("max_lag must be at least 1".into()));
    }
    if n <= max_lag {
        return Err(ArimaError::TooShort {
            needed: max_lag + 1,
            len: n,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ArimaError::InvalidArgument("non-finite value".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    if c0 <= 1e-24 * (mean * mean).max(f64::MIN_POSITIVE) {
        return Err(ArimaError::ZeroVariance);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for k in 1..=max_lag {
        let ck = dev[k..].iter().zip(&dev).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        out.push((ck / c0).clamp(-1.0, 1.0));
    }
    Ok(AcfResult {
        max_lag,
        values: out,
        n,
        conf_bound: conf_bound(n),
    })
}

pub fn pacf(values: &[f64], max_lag: usize) -> Result<PacfResult, ArimaError> {
    pacf_from_acf(&acf(values, max_lag)?)
}

pub fn pacf_from_acf(acf: &AcfResult) -> Result<PacfResult, ArimaError> {
    let rho = &acf.values;
    let m = acf.max_lag;
    let mut out = vec![1.0; m + 1];
    // phi[j] holds the order-(k-1) coefficients, 1-based
    let mut phi = vec![0.0; m + 1];
    let mut prev = vec![0.0; m + 1];
    for k in 1..=m {
        let num = rho[k] - (1..k).map(|j| phi[j] * rho[k - j]).sum::<f64>();
        let den = 1.0 - (1..k).map(|j| phi[j] * rho[j]).sum::<f64>();
        if den < 1e-12 {
            return Err(ArimaError::NumericalBreakdown { lag: k });
        }
        let kk = num / den;
        prev[..k].copy_from_slice(&phi[..k]);
        for j in 1..k {
            phi[j] = prev[j] - kk * prev[k - j];
        }
        phi[k] = kk;
        out[k] = kk.clamp(-1.0, 1.0);
    }
    Ok(PacfResult {
        max_lag: m,
        values: out,
        conf_bound: acf.conf_bound,
    })
}

/// `lag,value,conf_bound` rows for lags `first..=values.len()-1`.
pub fn write_correlogram<W: Write>(
    mut w: W,
    values: &[f64],
    first: usize,
    conf_bound: f64,
) -> io::Result<()> {
    writeln!(w, "lag,value,conf_bound")?;
    for (k, v) in values.iter().enumerate().skip(first) {
        writeln!(w, "{k},{v},{conf_bound}")?;
    }
    Ok(())
}
