//! Regularly bucketed activity series, differencing and chronological splits.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::ingest::{AggregatedActivity, CdrEvent};
use crate::time::{format_timestamp, parse_timestamp};

/// Telecom Italia's native aggregation.
pub const DEFAULT_BUCKET_WIDTH_S: i64 = 600;
/// Bucket width used for event-level datasets (weekly plots).
pub const EVENT_BUCKET_WIDTH_S: i64 = 3600;

pub const SERIES_HEADER: &str = "bucket_start_iso8601,value";

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SeriesError {
    #[error("no input records")]
    EmptyInput,
    #[error("series too short: need more than {needed} values, have {len}")]
    TooShort { needed: usize, len: usize },
    #[error("missing differencing initials: expected {expected}, found {found}")]
    MissingInitials { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("metric {0:?} does not apply to this record type")]
    MetricMismatch(Metric),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    EventCount,
    TotalDurationSeconds,
    ActivitySum,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "eventcount" | "count" => Ok(Metric::EventCount),
            "totaldurationseconds" | "duration" => Ok(Metric::TotalDurationSeconds),
            "activitysum" | "activity" => Ok(Metric::ActivitySum),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

/// Time-indexed, non-negative activity values at a fixed bucket width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivitySeries {
    /// UTC epoch seconds of bucket 0.
    pub start: i64,
    pub bucket_width_s: i64,
    pub values: Vec<f64>,
    pub metric: Metric,
    pub label: String,
}

impl ActivitySeries {
    pub fn new(
        start: i64,
        bucket_width_s: i64,
        values: Vec<f64>,
        metric: Metric,
        label: impl Into<String>,
    ) -> Result<Self, SeriesError> {
        if bucket_width_s <= 0 {
            return Err(SeriesError::InvalidArgument(format!(
                "bucket width must be positive, got {bucket_width_s}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(SeriesError::InvalidArgument(format!(
                "activity values must be finite and non-negative, got {v}"
            )));
        }
        Ok(Self {
            start,
            bucket_width_s,
            values,
            metric,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bucket_start(&self, i: usize) -> i64 {
        self.start + i as i64 * self.bucket_width_s
    }

    /// Index of the bucket covering `ts`, if inside the series.
    pub fn bucket_of(&self, ts: i64) -> Option<usize> {
        let off = ts - self.start;
        if off < 0 {
            return None;
        }
        let i = (off / self.bucket_width_s) as usize;
        (i < self.values.len()).then_some(i)
    }

    /// Same metadata, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            ..self.clone()
        }
    }
}

/// Which Telecom Italia activity columns feed [`Metric::ActivitySum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActivityFields {
    pub sms_in: bool,
    pub sms_out: bool,
    pub call_in: bool,
    pub call_out: bool,
}

impl Default for ActivityFields {
    fn default() -> Self {
        Self {
            sms_in: true,
            sms_out: true,
            call_in: true,
            call_out: true,
        }
    }
}

impl ActivityFields {
    pub fn sum(&self, r: &AggregatedActivity) -> f64 {
        let mut s = 0.0;
        if self.sms_in {
            s += r.sms_in;
        }
        if self.sms_out {
            s += r.sms_out;
        }
        if self.call_in {
            s += r.call_in;
        }
        if self.call_out {
            s += r.call_out;
        }
        s
    }
}

/// Maps the opaque Telecom Italia timestamp column to epoch seconds as
/// `epoch_s + raw * step_ms / 1000`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeAxis {
    pub epoch_s: i64,
    pub step_ms: i64,
}

impl Default for TimeAxis {
    fn default() -> Self {
        Self {
            epoch_s: 0,
            step_ms: 1,
        }
    }
}

impl TimeAxis {
    pub fn to_epoch_seconds(&self, raw: i64) -> i64 {
        self.epoch_s + (raw * self.step_ms).div_euclid(1000)
    }
}

fn accumulate(
    points: &[(i64, f64)],
    width_s: i64,
    window: Option<(i64, usize)>,
) -> Result<(i64, Vec<f64>), SeriesError> {
    if width_s <= 0 {
        return Err(SeriesError::InvalidArgument(format!(
            "bucket width must be positive, got {width_s}"
        )));
    }
    let (start, n) = match window {
        Some(w) => w,
        None => {
            if points.is_empty() {
                return Err(SeriesError::EmptyInput);
            }
            let lo = points.iter().map(|p| p.0).min().unwrap();
            let hi = points.iter().map(|p| p.0).max().unwrap();
            let start = lo.div_euclid(width_s) * width_s;
            (start, ((hi - start) / width_s) as usize + 1)
        }
    };
    if n == 0 {
        return Err(SeriesError::EmptyInput);
    }
    let mut values = vec![0.0; n];
    for &(ts, amount) in points {
        let off = ts - start;
        if off < 0 {
            continue;
        }
        if let Some(slot) = values.get_mut((off / width_s) as usize) {
            *slot += amount;
        }
    }
    Ok((start, values))
}

fn event_points(events: &[CdrEvent], metric: Metric) -> Result<Vec<(i64, f64)>, SeriesError> {
    match metric {
        Metric::EventCount => Ok(events.iter().map(|e| (e.timestamp, 1.0)).collect()),
        Metric::TotalDurationSeconds => Ok(events
            .iter()
            .map(|e| (e.timestamp, e.duration_s as f64))
            .collect()),
        Metric::ActivitySum => Err(SeriesError::MetricMismatch(metric)),
    }
}

/// Buckets events into `[start + i*w, start + (i+1)*w)`. The first bucket is
/// aligned to a multiple of `width_s` since the epoch; empty buckets are kept
/// as 0.
pub fn bucketize(
    events: &[CdrEvent],
    width_s: i64,
    metric: Metric,
) -> Result<ActivitySeries, SeriesError> {
    let (start, values) = accumulate(&event_points(events, metric)?, width_s, None)?;
    ActivitySeries::new(start, width_s, values, metric, "")
}

/// Buckets events into exactly `n_buckets` buckets from `start`; events
/// outside the window are ignored.
pub fn bucketize_window(
    events: &[CdrEvent],
    width_s: i64,
    metric: Metric,
    start: i64,
    n_buckets: usize,
) -> Result<ActivitySeries, SeriesError> {
    let (start, values) = accumulate(
        &event_points(events, metric)?,
        width_s,
        Some((start, n_buckets)),
    )?;
    ActivitySeries::new(start, width_s, values, metric, "")
}

/// Sums the selected activity columns of Telecom Italia rows per bucket.
pub fn bucketize_aggregated(
    rows: &[AggregatedActivity],
    width_s: i64,
    axis: TimeAxis,
    fields: ActivityFields,
) -> Result<ActivitySeries, SeriesError> {
    let points: Vec<(i64, f64)> = rows
        .iter()
        .map(|r| (axis.to_epoch_seconds(r.timestamp), fields.sum(r)))
        .collect();
    let (start, values) = accumulate(&points, width_s, None)?;
    ActivitySeries::new(start, width_s, values, Metric::ActivitySum, "")
}

/// Result of applying the first difference `d` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferencedSeries {
    pub order_d: usize,
    /// `initials[j]` is the first value of the series after `j` differences.
    pub initials: Vec<f64>,
    pub values: Vec<f64>,
}

fn first_difference(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn difference(values: &[f64], d: usize) -> Result<DifferencedSeries, SeriesError> {
    if values.len() <= d {
        return Err(SeriesError::TooShort {
            needed: d,
            len: values.len(),
        });
    }
    let mut initials = Vec::with_capacity(d);
    let mut cur = values.to_vec();
    for _ in 0..d {
        initials.push(cur[0]);
        cur = first_difference(&cur);
    }
    Ok(DifferencedSeries {
        order_d: d,
        initials,
        values: cur,
    })
}

/// Inverts [`difference`] by cumulative summation from the stored initials.
pub fn undifference(diff: &DifferencedSeries) -> Result<Vec<f64>, SeriesError> {
    if diff.initials.len() != diff.order_d {
        return Err(SeriesError::MissingInitials {
            expected: diff.order_d,
            found: diff.initials.len(),
        });
    }
    let mut cur = diff.values.clone();
    for &init in diff.initials.iter().rev() {
        let mut next = Vec::with_capacity(cur.len() + 1);
        let mut acc = init;
        next.push(acc);
        for v in &cur {
            acc += v;
            next.push(acc);
        }
        cur = next;
    }
    Ok(cur)
}

/// Training length for a chronological split: `floor(n * fraction)`, clamped
/// so both sides hold at least one value.
pub fn split_point(n: usize, train_fraction: f64) -> Result<usize, SeriesError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SeriesError::InvalidArgument(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    if n < 2 {
        return Err(SeriesError::TooShort { needed: 1, len: n });
    }
    let k = (n as f64 * train_fraction).floor() as usize;
    Ok(k.clamp(1, n - 1))
}

/// Chronological prefix/suffix split.
pub fn split(
    series: &ActivitySeries,
    train_fraction: f64,
) -> Result<(ActivitySeries, ActivitySeries), SeriesError> {
    let k = split_point(series.len(), train_fraction)?;
    let train = series.with_values(series.values[..k].to_vec());
    let mut test = series.with_values(series.values[k..].to_vec());
    test.start = series.bucket_start(k);
    Ok((train, test))
}

pub fn write_series<W: Write>(mut w: W, series: &ActivitySeries) -> io::Result<()> {
    writeln!(w, "{SERIES_HEADER}")?;
    for (i, v) in series.values.iter().enumerate() {
        writeln!(w, "{},{}", format_timestamp(series.bucket_start(i)), v)?;
    }
    Ok(())
}

/// Reads the two-column series CSV. The bucket width is inferred from the
/// spacing of the first two rows (falling back to `fallback_width_s` for a
/// single row) and every row must sit on that grid.
pub fn read_series<R: BufRead>(
    reader: R,
    fallback_width_s: i64,
    metric: Metric,
    label: &str,
) -> Result<ActivitySeries, SeriesError> {
    let mut rows: Vec<(i64, f64)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SeriesError::Parse {
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| SeriesError::Parse {
            line: lineno + 1,
            msg,
        };
        let mut parts = line.split(',');
        let (Some(t), Some(v)) = (parts.next(), parts.next()) else {
            return Err(parse_err(format!("expected 2 columns in {line:?}")));
        };
        let Some(ts) = parse_timestamp(t) else {
            if rows.is_empty() && lineno == 0 {
                continue; // header
            }
            return Err(parse_err(format!("bad timestamp {t:?}")));
        };
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad value {v:?}")))?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(parse_err(format!("value {value} is not a non-negative number")));
        }
        rows.push((ts, value));
    }
    if rows.is_empty() {
        return Err(SeriesError::EmptyInput);
    }
    let width = if rows.len() >= 2 {
        rows[1].0 - rows[0].0
    } else {
        fallback_width_s
    };
    if width <= 0 {
        return Err(SeriesError::Parse {
            line: 2,
            msg: "series timestamps must be strictly increasing".into(),
        });
    }
    for (i, (ts, _)) in rows.iter().enumerate() {
        if *ts != rows[0].0 + i as i64 * width {
            return Err(SeriesError::Parse {
                line: i + 2,
                msg: format!("irregular bucket spacing at {}", format_timestamp(*ts)),
            });
        }
    }
    ActivitySeries::new(
        rows[0].0,
        width,
        rows.into_iter().map(|r| r.1).collect(),
        metric,
        label,
    )
}
