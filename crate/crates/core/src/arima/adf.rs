//! Augmented Dickey-Fuller unit-root test (constant, no trend) with p-values
//! read from a Monte Carlo quantile table of the Dickey-Fuller t-statistic.

use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linalg::ols;
use super::ArimaError;
use crate::seed::mix;

pub const ADF_ALPHA: f64 = 0.05;
const TABLE_VERSION: u32 = 1;
const MIN_REPLICATIONS: usize = 10_000;
const SHIPPED_TABLE: &str = include_str!("../../data/adf_table_v1.txt");

pub const DEFAULT_SAMPLE_SIZES: &[usize] = &[
    20, 25, 30, 40, 50, 75, 100, 150, 200, 250, 300, 400, 500, 750, 1000, 1500, 2000, 3000, 5000,
];

pub const DEFAULT_PROBABILITIES: &[f64] = &[
    0.001, 0.0025, 0.005, 0.01, 0.02, 0.025, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.125,
    0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90,
    0.95, 0.975, 0.99, 0.995, 0.999,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdfRegression {
    ConstantOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stationarity {
    Stationary,
    NonStationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    /// t-ratio of the lagged level coefficient.
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    /// Observations in the test regression.
    pub nobs: usize,
    pub regression: AdfRegression,
    /// `Stationary` iff `p_value <= 0.05`.
    pub conclusion: Stationarity,
}

/// `floor(12 * (n / 100)^(1/4))`.
pub fn schwert_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// t-statistic of `gamma` in
/// `dy_t = alpha + gamma * y_{t-1} + sum_i beta_i * dy_{t-i} + e_t`,
/// with the number of regression observations.
pub fn adf_statistic(values: &[f64], lags: usize) -> Result<(f64, usize), ArimaError> {
    let n = values.len();
    let k = 2 + lags;
    if n < lags + k + 3 {
        return Err(ArimaError::TooShort {
            needed: lags + k + 3,
            len: n,
        });
    }
    let dy: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    // dy[t-1] = y_t - y_{t-1}; rows for t = lags+1 ..= n-1
    let rows = n - 1 - lags;
    let mut x = DMatrix::zeros(rows, k);
    let mut y = DVector::zeros(rows);
    for (r, t) in (lags + 1..n).enumerate() {
        y[r] = dy[t - 1];
        x[(r, 0)] = 1.0;
        x[(r, 1)] = values[t - 1];
        for i in 1..=lags {
            x[(r, 1 + i)] = dy[t - 1 - i];
        }
    }
    let fit = ols(&x, &y).ok_or(ArimaError::SingularRegression)?;
    // also catches a NaN standard error
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(fit.std_err[1] > 0.0) {
        return Err(ArimaError::SingularRegression);
    }
    Ok((fit.coef[1] / fit.std_err[1], rows))
}

/// Dickey-Fuller t-statistic without augmentation lags, by closed-form
/// simple regression of `dy_t` on `(1, y_{t-1})`.
pub fn df_statistic(y: &[f64]) -> f64 {
    let m = y.len() - 1;
    let xs = &y[..m];
    let mx = xs.iter().sum::<f64>() / m as f64;
    let mz = (y[m] - y[0]) / m as f64;
    let (mut sxx, mut sxz, mut szz) = (0.0, 0.0, 0.0);
    for t in 0..m {
        let dx = xs[t] - mx;
        let dz = (y[t + 1] - y[t]) - mz;
        sxx += dx * dx;
        sxz += dx * dz;
        szz += dz * dz;
    }
    let beta = sxz / sxx;
    let rss = (szz - beta * sxz).max(0.0);
    let s2 = rss / (m - 2) as f64;
    beta / (s2 / sxx).sqrt()
}

/// Monte Carlo quantiles of the Dickey-Fuller t-statistic under a Gaussian
/// random walk, one row per sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfTable {
    pub version: u32,
    pub seed: u64,
    pub replications: usize,
    pub probabilities: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    /// `quantiles[i][j]`: quantile `probabilities[j]` at `sample_sizes[i]`.
    pub quantiles: Vec<Vec<f64>>,
}

fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn simulate_size(n: usize, replications: usize, seed: u64, probs: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ n as u64));
    let mut y = vec![0.0; n];
    let mut stats = Vec::with_capacity(replications);
    for _ in 0..replications {
        let mut acc = 0.0;
        for v in y.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            acc += e;
            *v = acc;
        }
        stats.push(df_statistic(&y));
    }
    stats.sort_by(f64::total_cmp);
    probs.iter().map(|&p| empirical_quantile(&stats, p)).collect()
}

/// Simulates the quantile table on all available cores. Each sample size
/// draws from its own stream derived from `seed`, so the result does not
/// depend on the thread count.
pub fn build_adf_table(
    sample_sizes: &[usize],
    replications: usize,
    seed: u64,
) -> Result<AdfTable, ArimaError> {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    build_adf_table_with_jobs(sample_sizes, replications, seed, jobs)
}

/// [`build_adf_table`] on at most `jobs` threads.
pub fn build_adf_table_with_jobs(
    sample_sizes: &[usize],
    replications: usize,
    seed: u64,
    jobs: usize,
) -> Result<AdfTable, ArimaError> {
    if replications < MIN_REPLICATIONS {
        return Err(ArimaError::InvalidArgument(format!(
            "at least {MIN_REPLICATIONS} replications required, got {replications}"
        )));
    }
    let mut sizes = sample_sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() || sizes[0] < 5 {
        return Err(ArimaError::InvalidArgument(
            "sample sizes must be non-empty and at least 5".into(),
        ));
    }
    let probs = DEFAULT_PROBABILITIES.to_vec();
    let jobs = jobs.clamp(1, sizes.len());
    let mut quantiles = vec![Vec::new(); sizes.len()];
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let (sizes, probs) = (&sizes, &probs);
                s.spawn(move || {
                    (j..sizes.len())
                        .step_by(jobs)
                        .map(|i| (i, simulate_size(sizes[i], replications, seed, probs)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, row) in h.join().expect("simulation thread panicked") {
                quantiles[i] = row;
            }
        }
    });
    Ok(AdfTable {
        version: TABLE_VERSION,
        seed,
        replications,
        probabilities: probs,
        sample_sizes: sizes,
        quantiles,
    })
}

impl AdfTable {
    /// The table bundled with the crate.
    pub fn shipped() -> &'static AdfTable {
        static TABLE: OnceLock<AdfTable> = OnceLock::new();
        TABLE.get_or_init(|| AdfTable::parse(SHIPPED_TABLE).expect("bundled ADF table is valid"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# adf-quantile-table version={}", self.version);
        let _ = writeln!(s, "# statistic=dickey-fuller-t regression=constant");
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# replications={}", self.replications);
        s.push('n');
        for p in &self.probabilities {
            let _ = write!(s, " {p}");
        }
        s.push('\n');
        for (n, row) in self.sample_sizes.iter().zip(&self.quantiles) {
            let _ = write!(s, "{n}");
            for q in row {
                let _ = write!(s, " {q:.6}");
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<AdfTable, ArimaError> {
        let bad = |m: &str| ArimaError::Table(m.to_string());
        let mut meta = std::collections::HashMap::new();
        let mut probabilities = None;
        let mut sample_sizes = Vec::new();
        let mut quantiles = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                for kv in rest.split_whitespace() {
                    if let Some((k, v)) = kv.split_once('=') {
                        meta.insert(k.to_string(), v.to_string());
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            let nums = parts
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("non-numeric cell"))?;
            if head == "n" {
                probabilities = Some(nums);
            } else {
                sample_sizes.push(head.parse::<usize>().map_err(|_| bad("bad sample size"))?);
                quantiles.push(nums);
            }
        }
        let probabilities = probabilities.ok_or_else(|| bad("missing probability header"))?;
        let get = |k: &str| meta.get(k).ok_or_else(|| bad(&format!("missing {k}")));
        let version: u32 = get("version")?.parse().map_err(|_| bad("bad version"))?;
        if version != TABLE_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let table = AdfTable {
            version,
            seed: get("seed")?.parse().map_err(|_| bad("bad seed"))?,
            replications: get("replications")?
                .parse()
                .map_err(|_| bad("bad replications"))?,
            probabilities,
            sample_sizes,
            quantiles,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), ArimaError> {
        let bad = |m: &str| Err(ArimaError::Table(m.to_string()));
        if self.sample_sizes.is_empty() || self.probabilities.len() < 2 {
            return bad("empty table");
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample sizes must increase");
        }
        if self.probabilities.windows(2).any(|w| w[0] >= w[1]) {
            return bad("probabilities must increase");
        }
        for row in &self.quantiles {
            if row.len() != self.probabilities.len() {
                return bad("row length mismatch");
            }
            if row.windows(2).any(|w| w[0] > w[1]) {
                return bad("quantiles must be non-decreasing");
            }
        }
        Ok(())
    }

    fn bracket(&self, n: usize) -> (usize, usize, f64) {
        let sizes = &self.sample_sizes;
        if n <= sizes[0] {
            return (0, 0, 0.0);
        }
        if n >= *sizes.last().unwrap() {
            let last = sizes.len() - 1;
            return (last, last, 0.0);
        }
        let hi = sizes.partition_point(|&s| s < n);
        let lo = hi - 1;
        let w = (n - sizes[lo]) as f64 / (sizes[hi] - sizes[lo]) as f64;
        (lo, hi, w)
    }

    /// Quantile at probability `p` for sample size `n`, interpolated linearly
    /// in both directions.
    pub fn quantile(&self, n: usize, p: f64) -> f64 {
        let row_q = |row: &[f64]| {
            let probs = &self.probabilities;
            let j = probs.partition_point(|&x| x < p).clamp(1, probs.len() - 1);
            let t = ((p - probs[j - 1]) / (probs[j] - probs[j - 1])).clamp(0.0, 1.0);
            row[j - 1] + t * (row[j] - row[j - 1])
        };
        let (lo, hi, w) = self.bracket(n);
        (1.0 - w) * row_q(&self.quantiles[lo]) + w * row_q(&self.quantiles[hi])
    }

    /// Left-tail probability of `stat`, clamped to the table's probability
    /// range.
    pub fn p_value(&self, stat: f64, n: usize) -> f64 {
        let row_p = |row: &[f64]| {
            let probs = &self.probabilities;
            if stat <= row[0] {
                return probs[0];
            }
            if stat >= row[row.len() - 1] {
                return probs[probs.len() - 1];
            }
            let j = row.partition_point(|&q| q < stat).max(1);
            let span = row[j] - row[j - 1];
            let t = if span > 0.0 { (stat - row[j - 1]) / span } else { 0.0 };
            probs[j - 1] + t * (probs[j] - probs[j - 1])
        };
        let (lo, hi, w) = self.bracket(n);
        ((1.0 - w) * row_p(&self.quantiles[lo]) + w * row_p(&self.quantiles[hi])).clamp(0.0, 1.0)
    }
}

/// ADF test against the bundled table; `lags` defaults to the Schwert rule.
pub fn adf_test(values: &[f64], lags: Option<usize>) -> Result<AdfResult, ArimaError> {
    adf_test_with_table(values, lags, AdfTable::shipped())
}

pub fn adf_test_with_table(
    values: &[f64],
    lags: Option<usize>,
    table: &AdfTable,
) -> Result<AdfResult, ArimaError> {
    if values.len() < 20 {
        return Err(ArimaError::TooShort {
            needed: 20,
            len: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ArimaError::InvalidArgument("non-finite value".into()));
    }
    // keep at least 10 residual degrees of freedom
    let cap = (values.len() - 15) / 2;
    let lags = lags.unwrap_or_else(|| schwert_lags(values.len()).min(cap));
    let (statistic, nobs) = adf_statistic(values, lags)?;
    // a lag-free DF regression on nobs+1 points has nobs observations
    let p_value = table.p_value(statistic, nobs + 1);
    Ok(AdfResult {
        statistic,
        p_value,
        lags_used: lags,
        nobs,
        regression: AdfRegression::ConstantOnly,
        conclusion: if p_value <= ADF_ALPHA {
            Stationarity::Stationary
        } else {
            Stationarity::NonStationary
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schwert_rule() {
        assert_eq!(schwert_lags(100), 12);
        assert_eq!(schwert_lags(500), 17);
        assert_eq!(schwert_lags(144), 13);
    }

    #[test]
    fn closed_form_matches_qr_regression() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut acc = 0.0;
        let y: Vec<f64> = (0..300)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                acc += e;
                acc
            })
            .collect();
        let (t, nobs) = adf_statistic(&y, 0).unwrap();
        assert_eq!(nobs, 299);
        assert!((t - df_statistic(&y)).abs() < 1e-9);
    }

    #[test]
    fn shipped_table_is_well_formed() {
        let t = AdfTable::shipped();
        assert!(t.replications >= MIN_REPLICATIONS);
        assert_eq!(t.probabilities, DEFAULT_PROBABILITIES);
        let round = AdfTable::parse(&t.to_text()).unwrap();
        assert_eq!(round.sample_sizes, t.sample_sizes);
        for (a, b) in round.quantiles.iter().flatten().zip(t.quantiles.iter().flatten()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn p_value_inverts_quantile() {
        let t = AdfTable::shipped();
        for n in [30, 137, 500, 4000] {
            for p in [0.01, 0.05, 0.1, 0.5] {
                let q = t.quantile(n, p);
                assert!((t.p_value(q, n) - p).abs() < 0.01, "n={n} p={p}");
            }
        }
        assert_eq!(t.p_value(-100.0, 500), t.probabilities[0]);
        assert_eq!(t.p_value(100.0, 500), *t.probabilities.last().unwrap());
    }

    #[test]
    fn table_validation() {
        assert!(AdfTable::parse("n 0.1 0.2\n10 1 0\n").is_err());
        let text = "# adf-quantile-table version=1\n# seed=1\n# replications=10000\nn 0.1 0.2\n10 -2 -1\n";
        let t = AdfTable::parse(text).unwrap();
        assert_eq!(t.sample_sizes, vec![10]);
        assert!(AdfTable::parse(&text.replace("-1\n", "-3\n")).is_err());
        assert!(AdfTable::parse(&text.replace("version=1", "version=9")).is_err());
    }

    #[test]
    fn thread_count_does_not_change_table() {
        let a = build_adf_table_with_jobs(&[20, 30, 40], 10_000, 5, 1).unwrap();
        let b = build_adf_table_with_jobs(&[40, 20, 30], 10_000, 5, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_replications() {
        assert!(matches!(
            build_adf_table(&[50], 100, 1),
            Err(ArimaError::InvalidArgument(_))
        ));
    }

    #[test]
    fn short_and_singular_inputs() {
        assert!(matches!(adf_test(&[1.0; 10], None), Err(ArimaError::TooShort { .. })));
        assert!(matches!(
            adf_test(&[3.0; 40], Some(1)),
            Err(ArimaError::SingularRegression)
        ));
    }
}
