use super::correlogram::{AcfResult, PacfResult};
use super::fit::ArimaSpec;

/// Largest order the cut-off rule will suggest.
pub const MAX_ORDER_LAG: usize = 10;
const RUN_INSIDE: usize = 3;

/// First lag `k <= MAX_ORDER_LAG` whose correlation is outside the bound
/// while the next three lags are inside it. `values[0]` is ignored.
pub fn cutoff_lag(values: &[f64], bound: f64) -> Option<usize> {
    cutoff_with(values, |_| bound)
}

/// `bound(k)` is the band for lags beyond a cut-off at `k`; lag `k` itself is
/// tested against `bound(k - 1)`.
fn cutoff_with(values: &[f64], bound: impl Fn(usize) -> f64) -> Option<usize> {
    let max_lag = values.len().checked_sub(1)?;
    (1..=MAX_ORDER_LAG)
        .take_while(|k| k + RUN_INSIDE <= max_lag)
        .find(|&k| {
            let b = bound(k);
            values[k].abs() > bound(k - 1)
                && values[k + 1..=k + RUN_INSIDE].iter().all(|v| v.abs() <= b)
        })
}

/// Bartlett band for sample autocorrelations beyond lag `k` of an MA(k)
/// process: `1.96 * sqrt((1 + 2 * sum_{i<=k} r_i^2) / n)`.
fn bartlett_bound(acf: &AcfResult, k: usize) -> f64 {
    let s: f64 = acf.values[1..=k].iter().map(|r| r * r).sum();
    acf.conf_bound * (1.0 + 2.0 * s).sqrt()
}

/// Reads the order off the correlograms of the `d`-differenced series: a
/// hard cut-off in the PACF suggests AR(p), one in the ACF suggests MA(q).
/// If both cut off the earlier one wins; if neither does, `(1, d, 1)`.
///
/// The PACF is judged against the plain `1.96/sqrt(n)` band; the ACF beyond a
/// candidate lag against the wider Bartlett band that applies under an MA
/// model of that order.
pub fn suggest_order(acf: &AcfResult, pacf: &PacfResult, d: usize) -> ArimaSpec {
    let p = cutoff_lag(&pacf.values, pacf.conf_bound);
    let q = cutoff_with(&acf.values, |k| bartlett_bound(acf, k));
    let (p, q) = match (p, q) {
        (Some(p), Some(q)) if p <= q => (p, 0),
        (Some(_), Some(q)) => (0, q),
        (Some(p), None) => (p, 0),
        (None, Some(q)) => (0, q),
        (None, None) => (1, 1),
    };
    ArimaSpec { p, d, q }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acf_of(values: Vec<f64>) -> AcfResult {
        AcfResult {
            max_lag: values.len() - 1,
            n: 400,
            values,
            conf_bound: 0.098,
        }
    }

    fn pacf_of(values: Vec<f64>) -> PacfResult {
        PacfResult {
            max_lag: values.len() - 1,
            values,
            conf_bound: 0.098,
        }
    }

    #[test]
    fn cutoff_rule() {
        let v = [1.0, 0.5, 0.3, 0.01, -0.02, 0.05, 0.0];
        assert_eq!(cutoff_lag(&v, 0.1), Some(2));
        // not enough lags after the candidate to confirm the cut-off
        assert_eq!(cutoff_lag(&v[..5], 0.1), None);
        assert_eq!(cutoff_lag(&[1.0, 0.0, 0.0, 0.0, 0.0], 0.1), None);
    }

    #[test]
    fn all_inside_falls_back() {
        let flat = vec![1.0, 0.01, -0.02, 0.03, 0.0, 0.01, 0.02];
        let s = suggest_order(&acf_of(flat.clone()), &pacf_of(flat), 1);
        assert_eq!(s, ArimaSpec { p: 1, d: 1, q: 1 });
    }

    #[test]
    fn ar_and_ma_shapes() {
        let trailing = vec![1.0, 0.8, 0.64, 0.5, 0.4, 0.33, 0.26, 0.2, 0.16];
        let cut2 = vec![1.0, 0.8, -0.3, 0.0, 0.01, 0.02, 0.0, 0.0, 0.0];
        let s = suggest_order(&acf_of(trailing.clone()), &pacf_of(cut2.clone()), 0);
        assert_eq!(s, ArimaSpec { p: 2, d: 0, q: 0 });
        let s = suggest_order(&acf_of(cut2), &pacf_of(trailing), 0);
        assert_eq!(s, ArimaSpec { p: 0, d: 0, q: 2 });
    }
}
