use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::fit::{innovations, ArimaModel};
use super::ArimaError;
use crate::series::difference;
use crate::time::format_timestamp;

pub const FORECAST_HEADER: &str = "bucket_start_iso8601,actual_or_empty,forecast";

fn check_history(model: &ArimaModel, history: &[f64]) -> Result<(), ArimaError> {
    let needed = (model.spec.p + model.spec.d).max(1);
    if history.len() < needed {
        return Err(ArimaError::TooShort {
            needed,
            len: history.len(),
        });
    }
    if history.iter().any(|v| !v.is_finite()) {
        return Err(ArimaError::InvalidArgument("non-finite value".into()));
    }
    Ok(())
}

/// Forecasts of the differenced series `horizon` steps past the end of `w`,
/// with future innovations at their expectation of zero.
fn forecast_differenced(model: &ArimaModel, w: &[f64], horizon: usize) -> Vec<f64> {
    let p = model.phi.len();
    let mut e = vec![0.0; p.min(w.len())];
    if w.len() >= p {
        e.extend(innovations(w, model.c, &model.phi, &model.theta));
    }
    let mut ext = w.to_vec();
    let n = w.len();
    for h in 0..horizon {
        let t = n + h;
        let mut v = model.c;
        for (i, f) in model.phi.iter().enumerate() {
            v += f * ext[t - 1 - i];
        }
        for (j, th) in model.theta.iter().enumerate() {
            // only innovations inside the observed span are known
            if let Some(k) = (t - 1).checked_sub(j) {
                if k < n {
                    v += th * e[k];
                }
            }
        }
        ext.push(v);
    }
    ext.split_off(n)
}

/// Multi-step forecast from the end of `history`, in original units.
pub fn forecast(
    model: &ArimaModel,
    history: &[f64],
    horizon: usize,
) -> Result<Vec<f64>, ArimaError> {
    if horizon == 0 {
        return Err(ArimaError::InvalidArgument("horizon must be at least 1".into()));
    }
    check_history(model, history)?;
    let w = difference(history, model.spec.d)?.values;
    let wf = forecast_differenced(model, &w, horizon);
    Ok(integrate_forecast(history, model.spec.d, &wf))
}

/// Turns forecasts of the `d`-times differenced series into levels, chaining
/// from the last value of each differencing level of `history`.
pub fn integrate_forecast(history: &[f64], d: usize, diff_forecast: &[f64]) -> Vec<f64> {
    // tails[j]: last value of the j-times differenced history
    let mut tails = Vec::with_capacity(d);
    let mut cur = history.to_vec();
    for _ in 0..d {
        tails.push(*cur.last().expect("history longer than d"));
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    diff_forecast
        .iter()
        .map(|&v| {
            let mut acc = v;
            for j in (0..d).rev() {
                acc += tails[j];
                tails[j] = acc;
            }
            acc
        })
        .collect()
}

/// Rolling one-step-ahead predictions of `values[t]` for `t >= start`, each
/// using only `values[..t]` and the model's fixed parameters.
pub fn one_step_predictions(
    model: &ArimaModel,
    values: &[f64],
    start: usize,
) -> Result<Vec<f64>, ArimaError> {
    let d = model.spec.d;
    let first = model.spec.p + d;
    if start < first.max(1) {
        return Err(ArimaError::InvalidArgument(format!(
            "predictions start at index {} at the earliest",
            first.max(1)
        )));
    }
    check_history(model, &values[..start.min(values.len())])?;
    let w = difference(values, d)?.values;
    let e = innovations(&w, model.c, &model.phi, &model.theta);
    let p = model.phi.len();
    // w[s] lines up with values[s + d]; predicted w = w - e, and the part of
    // values[t] not in w depends only on the past
    Ok((start..values.len())
        .map(|t| {
            let s = t - d;
            let w_hat = w[s] - e[s - p];
            w_hat + (values[t] - w[s])
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mse: f64,
    pub mae: f64,
    /// One-step predictions aligned with the test span.
    pub predictions: Vec<f64>,
}

/// Rolling one-step evaluation over `test`, continuing from `train`.
pub fn evaluate(model: &ArimaModel, train: &[f64], test: &[f64]) -> Result<Evaluation, ArimaError> {
    if test.is_empty() {
        return Err(ArimaError::InvalidArgument("empty test span".into()));
    }
    let all: Vec<f64> = train.iter().chain(test).copied().collect();
    let predictions = one_step_predictions(model, &all, train.len())?;
    let n = test.len() as f64;
    let (mut se, mut ae) = (0.0, 0.0);
    for (p, a) in predictions.iter().zip(test) {
        se += (p - a) * (p - a);
        ae += (p - a).abs();
    }
    Ok(Evaluation {
        mse: se / n,
        mae: ae / n,
        predictions,
    })
}

/// Rows of `(bucket_start, actual, forecast)`.
pub fn write_forecast<W: Write>(
    mut w: W,
    rows: impl IntoIterator<Item = (i64, Option<f64>, f64)>,
) -> io::Result<()> {
    writeln!(w, "{FORECAST_HEADER}")?;
    for (ts, actual, f) in rows {
        let a = actual.map(|v| v.to_string()).unwrap_or_default();
        writeln!(w, "{},{a},{f}", format_timestamp(ts))?;
    }
    Ok(())
}
