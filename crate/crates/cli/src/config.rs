//! `key=value` run configuration. Command-line flags take precedence over
//! anything set here.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use cdrsight_core::{ActiveWindow, Format, Metric};

/// Bad flags or configuration; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub format: Option<Format>,
    pub bucket_width_s: Option<i64>,
    pub metric: Option<Metric>,
    pub k: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub window: Option<usize>,
    pub hidden: Option<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub patience: Option<usize>,
    pub train_fraction: Option<f64>,
    pub p: Option<usize>,
    pub d: Option<usize>,
    pub q: Option<usize>,
    pub zero_window: Option<ActiveWindow>,
    pub max_lag: Option<usize>,
    pub lags: Option<usize>,
    pub horizon: Option<usize>,
    pub jobs: Option<usize>,
    pub user_id: Option<String>,
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T, UsageError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| UsageError(format!("config line {line}: {key}: {e}")))
}

fn positive<T: FromStr + PartialOrd + Default>(key: &str, raw: &str, line: usize) -> Result<T, UsageError>
where
    T::Err: fmt::Display,
{
    let v: T = value(key, raw, line)?;
    if v <= T::default() {
        return Err(UsageError(format!("config line {line}: {key} must be positive")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Ok(Self::parse(&text)?)
    }

    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut c = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {n}: expected key=value")))?;
            let (key, v) = (key.trim(), v.trim());
            if !seen.insert(key.to_string()) {
                return Err(UsageError(format!("config line {n}: duplicate key {key}")));
            }
            match key {
                "format" => c.format = Some(value(key, v, n)?),
                "bucket_width_s" => c.bucket_width_s = Some(positive(key, v, n)?),
                "metric" => c.metric = Some(value(key, v, n)?),
                "k" => c.k = Some(positive(key, v, n)?),
                "restarts" => c.restarts = Some(positive(key, v, n)?),
                "seed" => c.seed = Some(value(key, v, n)?),
                "window" => c.window = Some(positive(key, v, n)?),
                "hidden" => c.hidden = Some(positive(key, v, n)?),
                "epochs" => c.epochs = Some(positive(key, v, n)?),
                "learning_rate" => c.learning_rate = Some(positive(key, v, n)?),
                "patience" => c.patience = Some(positive(key, v, n)?),
                "train_fraction" => {
                    let f: f64 = value(key, v, n)?;
                    if !(f > 0.0 && f < 1.0) {
                        return Err(UsageError(format!(
                            "config line {n}: train_fraction must be in (0, 1)"
                        )));
                    }
                    c.train_fraction = Some(f);
                }
                "p" => c.p = Some(value(key, v, n)?),
                "d" => c.d = Some(value(key, v, n)?),
                "q" => c.q = Some(value(key, v, n)?),
                "zero_window" => c.zero_window = Some(value(key, v, n)?),
                "max_lag" => c.max_lag = Some(positive(key, v, n)?),
                "lags" => c.lags = Some(value(key, v, n)?),
                "horizon" => c.horizon = Some(positive(key, v, n)?),
                "jobs" => c.jobs = Some(positive(key, v, n)?),
                "user_id" => c.user_id = Some(v.to_string()),
                other => {
                    return Err(UsageError(format!("config line {n}: unknown key {other:?}")))
                }
            }
        }
        Ok(c)
    }
}
