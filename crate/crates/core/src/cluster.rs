//! Lloyd's k-means and the cluster-based anomaly rule.
//!
//! Anomalous buckets are those in the cluster that is both highest (largest
//! centroid) and strictly smallest by membership. Buckets with zero activity
//! inside the configured active hours are flagged separately, as a suspected
//! outage.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::seed::mix;
use crate::series::ActivitySeries;
use crate::time::{format_timestamp, parse_timestamp, seconds_of_day, SECONDS_PER_DAY};

pub const REPORT_HEADER: &str = "bucket_index,bucket_start_iso8601,value,reason";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    /// Relative inertia improvement below which iteration stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 3,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Inertia after each assignment step.
    pub trace: Vec<f64>,
    /// True when assignments reached a fixed point.
    pub converged: bool,
}

impl ClusterModel {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, ties to the lowest index.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Sum of squared distances of each point to `centroids[assignments[i]]`.
pub fn inertia(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

fn means(points: &[Vec<f64>], assignments: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            for x in s.iter_mut() {
                *x /= c as f64;
            }
        }
    }
    sums
}

fn distinct_points(points: &[Vec<f64>]) -> Vec<usize> {
    let mut seen = HashSet::new();
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| seen.insert(p.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
        .map(|(i, _)| i)
        .collect()
}

fn validate(points: &[Vec<f64>], k: usize) -> Result<(usize, Vec<usize>), ClusterError> {
    if k == 0 {
        return Err(ClusterError::InvalidArgument("k must be at least 1".into()));
    }
    let Some(first) = points.first() else {
        return Err(ClusterError::DegenerateInput("no points".into()));
    };
    let dim = first.len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(ClusterError::InvalidArgument(
            "points must share a positive dimension".into(),
        ));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(ClusterError::InvalidArgument("non-finite coordinate".into()));
    }
    let distinct = distinct_points(points);
    if k > distinct.len() {
        return Err(ClusterError::DegenerateInput(format!(
            "k={k} exceeds the {} distinct points",
            distinct.len()
        )));
    }
    Ok((dim, distinct))
}

/// Lloyd's algorithm from k distinct points drawn uniformly without
/// replacement. An empty cluster takes over the point farthest from its
/// current centroid.
pub fn kmeans(points: &[Vec<f64>], config: &KMeansConfig) -> Result<ClusterModel, ClusterError> {
    let k = config.k;
    let (dim, distinct) = validate(points, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids: Vec<Vec<f64>> = sample(&mut rng, distinct.len(), k)
        .into_iter()
        .map(|i| points[distinct[i]].clone())
        .collect();

    let n = points.len();
    let mut assignments = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iter {
        iterations += 1;
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (j, d) = nearest(p, &centroids);
            changed |= assignments[i] != j;
            assignments[i] = j;
            dists[i] = d;
        }
        repair_empty(&mut centroids, &mut assignments, &mut dists, points);
        let current = dists.iter().sum::<f64>();
        let previous = trace.last().copied();
        trace.push(current);
        if !changed {
            converged = true;
            break;
        }

        let updated = means(points, &assignments, k, dim);
        let still = updated == centroids;
        centroids = updated;
        if still || current == 0.0 {
            converged = true;
            break;
        }
        if let Some(prev) = previous {
            if prev - current <= config.tol * prev {
                break;
            }
        }
    }

    if !converged {
        centroids = means(points, &assignments, k, dim);
    }
    let inertia = inertia(points, &centroids, &assignments);
    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        inertia,
        iterations,
        seed: config.seed,
        trace,
        converged,
    })
}

fn repair_empty(
    centroids: &mut [Vec<f64>],
    assignments: &mut [usize],
    dists: &mut [f64],
    points: &[Vec<f64>],
) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        // farthest point among clusters that can spare one
        let donor = (0..points.len())
            .filter(|&i| counts[assignments[i]] > 1)
            .fold(None::<usize>, |best, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        let Some(i) = donor else { return };
        centroids[empty] = points[i].clone();
        assignments[i] = empty;
        dists[i] = 0.0;
    }
}

/// Seed of restart `i`; restart 0 uses the base seed itself.
pub fn restart_seed(base: u64, i: usize) -> u64 {
    if i == 0 {
        base
    } else {
        mix(base ^ (i as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
    }
}

/// Minimum-inertia model over `restarts` seeded runs (first wins on ties).
pub fn best_of_restarts(
    points: &[Vec<f64>],
    config: &KMeansConfig,
    restarts: usize,
) -> Result<ClusterModel, ClusterError> {
    if restarts == 0 {
        return Err(ClusterError::InvalidArgument(
            "restarts must be at least 1".into(),
        ));
    }
    let mut best: Option<ClusterModel> = None;
    for i in 0..restarts {
        let cfg = KMeansConfig {
            seed: restart_seed(config.seed, i),
            ..*config
        };
        let m = kmeans(points, &cfg)?;
        if best.as_ref().is_none_or(|b| m.inertia < b.inertia) {
            best = Some(m);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnomalyReason {
    HighActivityCluster,
    ZeroActivity,
}

impl fmt::Display for AnomalyReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnomalyReason::HighActivityCluster => "HighActivityCluster",
            AnomalyReason::ZeroActivity => "ZeroActivity",
        })
    }
}

impl FromStr for AnomalyReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "HighActivityCluster" => Ok(AnomalyReason::HighActivityCluster),
            "ZeroActivity" => Ok(AnomalyReason::ZeroActivity),
            other => Err(format!("unknown anomaly reason {other:?}")),
        }
    }
}

/// Time-of-day range `[start, end)` in UTC seconds, wrapping past midnight
/// when `end <= start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveWindow {
    pub start_s: i64,
    pub end_s: i64,
}

impl ActiveWindow {
    pub fn from_hours(start_h: i64, end_h: i64) -> Self {
        Self {
            start_s: start_h * 3600,
            end_s: end_h * 3600,
        }
    }

    pub fn contains(&self, ts: i64) -> bool {
        let t = seconds_of_day(ts);
        if self.start_s < self.end_s {
            (self.start_s..self.end_s).contains(&t)
        } else {
            t >= self.start_s || t < self.end_s
        }
    }
}

impl FromStr for ActiveWindow {
    type Err = String;

    /// Parses `HH:MM-HH:MM`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parse_hm = |x: &str| -> Result<i64, String> {
            let (h, m) = x
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("expected HH:MM, got {x:?}"))?;
            let h: i64 = h.parse().map_err(|_| format!("bad hour in {x:?}"))?;
            let m: i64 = m.parse().map_err(|_| format!("bad minute in {x:?}"))?;
            if !(0..=24).contains(&h) || !(0..60).contains(&m) || (h == 24 && m != 0) {
                return Err(format!("time out of range: {x:?}"));
            }
            Ok((h * 3600 + m * 60) % SECONDS_PER_DAY)
        };
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| format!("expected HH:MM-HH:MM, got {s:?}"))?;
        Ok(Self {
            start_s: parse_hm(a)?,
            end_s: parse_hm(b)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anomaly {
    pub index: usize,
    pub reason: AnomalyReason,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnomalyReport {
    /// Sorted by (index, reason).
    pub anomalous_buckets: Vec<Anomaly>,
    pub anomalous_cluster_index: Option<usize>,
}

impl AnomalyReport {
    pub fn from_anomalies(mut anomalies: Vec<Anomaly>) -> Self {
        anomalies.sort_by_key(|a| (a.index, a.reason));
        anomalies.dedup();
        Self {
            anomalous_buckets: anomalies,
            anomalous_cluster_index: None,
        }
    }

    pub fn indices(&self, reason: AnomalyReason) -> Vec<usize> {
        self.anomalous_buckets
            .iter()
            .filter(|a| a.reason == reason)
            .map(|a| a.index)
            .collect()
    }

    /// Distinct anomalous indices regardless of reason.
    pub fn all_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.anomalous_buckets.iter().map(|a| a.index).collect();
        v.dedup();
        v
    }

    pub fn is_empty(&self) -> bool {
        self.anomalous_buckets.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub zero_window: Option<ActiveWindow>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            k: 3,
            restarts: 10,
            seed: 0,
            max_iter: 300,
            tol: 1e-6,
            zero_window: None,
        }
    }
}

/// Clusters the series values and labels anomalous buckets.
///
/// When the series has fewer distinct values than `k`, `k` is lowered to the
/// distinct count (a constant series therefore yields no cluster labels).
pub fn detect_anomalies(
    series: &ActivitySeries,
    config: &DetectConfig,
) -> Result<AnomalyReport, ClusterError> {
    detect_with_model(series, config).map(|(r, _)| r)
}

/// [`detect_anomalies`] that also returns the fitted cluster model.
pub fn detect_with_model(
    series: &ActivitySeries,
    config: &DetectConfig,
) -> Result<(AnomalyReport, ClusterModel), ClusterError> {
    if config.k == 0 {
        return Err(ClusterError::InvalidArgument("k must be at least 1".into()));
    }
    if series.len() < config.k {
        return Err(ClusterError::DegenerateInput(format!(
            "series of length {} is shorter than k={}",
            series.len(),
            config.k
        )));
    }
    let points: Vec<Vec<f64>> = series.values.iter().map(|&v| vec![v]).collect();
    let k = config.k.min(distinct_points(&points).len());
    let km = KMeansConfig {
        k,
        max_iter: config.max_iter,
        tol: config.tol,
        seed: config.seed,
    };
    let model = best_of_restarts(&points, &km, config.restarts)?;

    let mut anomalies = Vec::new();
    let mut anomalous_cluster = None;
    if k > 1 {
        let sizes = model.cluster_sizes();
        let top = (0..k)
            .max_by(|&a, &b| model.centroids[a][0].total_cmp(&model.centroids[b][0]))
            .unwrap();
        let strictly_smallest = (0..k).all(|j| j == top || sizes[top] < sizes[j]);
        if strictly_smallest {
            anomalous_cluster = Some(top);
            anomalies.extend(
                model
                    .assignments
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a == top)
                    .map(|(i, _)| Anomaly {
                        index: i,
                        reason: AnomalyReason::HighActivityCluster,
                    }),
            );
        }
    }
    if let Some(window) = config.zero_window {
        anomalies.extend(
            series
                .values
                .iter()
                .enumerate()
                .filter(|(i, &v)| v == 0.0 && window.contains(series.bucket_start(*i)))
                .map(|(i, _)| Anomaly {
                    index: i,
                    reason: AnomalyReason::ZeroActivity,
                }),
        );
    }
    let mut report = AnomalyReport::from_anomalies(anomalies);
    report.anomalous_cluster_index = anomalous_cluster;
    Ok((report, model))
}

pub fn write_report<W: Write>(
    mut w: W,
    series: &ActivitySeries,
    report: &AnomalyReport,
) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for a in &report.anomalous_buckets {
        writeln!(
            w,
            "{},{},{},{}",
            a.index,
            format_timestamp(series.bucket_start(a.index)),
            series.values[a.index],
            a.reason
        )?;
    }
    Ok(())
}

/// Reads a report CSV, checking every index against `series`.
pub fn read_report<R: BufRead>(
    reader: R,
    series: &ActivitySeries,
) -> Result<AnomalyReport, ClusterError> {
    let mut anomalies = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let err = |msg: String| ClusterError::Parse {
            line: lineno + 1,
            msg,
        };
        let line = line.map_err(|e| err(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("bucket_index")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 columns in {line:?}")));
        }
        let index: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad index {:?}", fields[0])))?;
        if index >= series.len() {
            return Err(err(format!(
                "index {index} outside series of length {}",
                series.len()
            )));
        }
        if let Some(ts) = parse_timestamp(fields[1]) {
            if ts != series.bucket_start(index) {
                return Err(err(format!("bucket {index} does not start at {}", fields[1])));
            }
        }
        let reason = fields[3].parse().map_err(err)?;
        anomalies.push(Anomaly { index, reason });
    }
    Ok(AnomalyReport::from_anomalies(anomalies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Metric;
    use proptest::prelude::*;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    fn series(v: &[f64]) -> ActivitySeries {
        ActivitySeries::new(0, 3600, v.to_vec(), Metric::EventCount, "t").unwrap()
    }

    #[test]
    fn identical_points() {
        let m = kmeans(
            &pts(&[0.0, 0.0, 0.0]),
            &KMeansConfig {
                k: 1,
                ..KMeansConfig::default()
            },
        )
        .unwrap();
        assert_eq!(m.centroids, vec![vec![0.0]]);
        assert_eq!(m.inertia, 0.0);
        assert_eq!(m.iterations, 1);
        assert!(m.converged);
    }

    #[test]
    fn two_pairs() {
        // brute force over the 7 two-partitions of {0,1,10,11}: {0,1}|{10,11} gives 1.0
        let cfg = KMeansConfig {
            k: 2,
            ..KMeansConfig::default()
        };
        let m = best_of_restarts(&pts(&[0.0, 1.0, 10.0, 11.0]), &cfg, 10).unwrap();
        let mut c: Vec<f64> = m.centroids.iter().map(|c| c[0]).collect();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![0.5, 10.5]);
        assert!((m.inertia - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let cfg = KMeansConfig {
            k: 3,
            ..KMeansConfig::default()
        };
        assert!(matches!(
            kmeans(&pts(&[1.0, 1.0, 2.0]), &cfg),
            Err(ClusterError::DegenerateInput(_))
        ));
        assert!(matches!(kmeans(&[], &cfg), Err(ClusterError::DegenerateInput(_))));
        assert!(kmeans(&pts(&[1.0]), &KMeansConfig { k: 0, ..cfg }).is_err());
        assert!(best_of_restarts(&pts(&[1.0, 2.0, 3.0]), &cfg, 0).is_err());
    }

    #[test]
    fn single_restart_is_plain_kmeans() {
        let p = pts(&[1.0, 2.0, 3.0, 7.0, 8.0, 20.0, 21.0]);
        let cfg = KMeansConfig {
            k: 3,
            seed: 99,
            ..KMeansConfig::default()
        };
        assert_eq!(best_of_restarts(&p, &cfg, 1).unwrap(), kmeans(&p, &cfg).unwrap());
    }

    #[test]
    fn empty_cluster_repair_moves_farthest_point() {
        let mut centroids = vec![vec![0.0], vec![100.0]];
        let points = pts(&[0.0, 1.0, 5.0]);
        let mut assignments = vec![0, 0, 0];
        let mut dists = vec![0.0, 1.0, 25.0];
        repair_empty(&mut centroids, &mut assignments, &mut dists, &points);
        assert_eq!(assignments, vec![0, 0, 1]);
        assert_eq!(centroids[1], vec![5.0]);
    }

    #[test]
    fn spike_is_flagged() {
        let cfg = DetectConfig {
            k: 2,
            ..DetectConfig::default()
        };
        let r = detect_anomalies(&series(&[10.0, 12.0, 11.0, 500.0, 9.0]), &cfg).unwrap();
        assert_eq!(r.indices(AnomalyReason::HighActivityCluster), vec![3]);
        assert!(r.anomalous_cluster_index.is_some());
    }

    #[test]
    fn constant_series_has_no_anomalies() {
        let cfg = DetectConfig {
            k: 1,
            ..DetectConfig::default()
        };
        assert!(detect_anomalies(&series(&[5.0; 4]), &cfg).unwrap().is_empty());
        // k above the distinct count collapses to one cluster
        assert!(detect_anomalies(&series(&[5.0; 4]), &DetectConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn too_short_for_k() {
        assert!(matches!(
            detect_anomalies(&series(&[1.0, 2.0]), &DetectConfig::default()),
            Err(ClusterError::DegenerateInput(_))
        ));
    }

    #[test]
    fn ambiguous_top_cluster_is_not_flagged() {
        // top cluster {100,100,101} is larger than {1}: criteria disagree
        let cfg = DetectConfig {
            k: 2,
            ..DetectConfig::default()
        };
        let r = detect_anomalies(&series(&[1.0, 100.0, 100.0, 101.0]), &cfg).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.anomalous_cluster_index, None);
    }

    #[test]
    fn zero_activity_in_window() {
        // Sep 24 2010, hourly buckets; bucket 17 is 17:00-18:00
        let start = parse_timestamp("2010-09-24T00:00:00Z").unwrap();
        let mut values = vec![50.0; 24];
        values[17] = 0.0;
        values[3] = 0.0; // night, outside the window
        let s = ActivitySeries::new(start, 3600, values, Metric::EventCount, "").unwrap();
        let cfg = DetectConfig {
            zero_window: Some("08:00-22:00".parse().unwrap()),
            ..DetectConfig::default()
        };
        let r = detect_anomalies(&s, &cfg).unwrap();
        assert_eq!(r.indices(AnomalyReason::ZeroActivity), vec![17]);
    }

    #[test]
    fn window_parsing_and_wrap() {
        let w: ActiveWindow = "22:00-06:00".parse().unwrap();
        assert!(w.contains(23 * 3600));
        assert!(w.contains(5 * 3600));
        assert!(!w.contains(12 * 3600));
        assert!("8-22".parse::<ActiveWindow>().is_err());
        assert!("25:00-26:00".parse::<ActiveWindow>().is_err());
        assert_eq!("08:00-24:00".parse::<ActiveWindow>().unwrap().end_s, 0);
    }

    #[test]
    fn report_csv_round_trip() {
        let s = series(&[10.0, 12.0, 11.0, 500.0, 0.0]);
        let report = AnomalyReport::from_anomalies(vec![
            Anomaly {
                index: 4,
                reason: AnomalyReason::ZeroActivity,
            },
            Anomaly {
                index: 3,
                reason: AnomalyReason::HighActivityCluster,
            },
        ]);
        let mut buf = Vec::new();
        write_report(&mut buf, &s, &report).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "bucket_index,bucket_start_iso8601,value,reason\n\
             3,1970-01-01T03:00:00Z,500,HighActivityCluster\n\
             4,1970-01-01T04:00:00Z,0,ZeroActivity\n"
        );
        assert_eq!(read_report(buf.as_slice(), &s).unwrap(), report);
        let bad = "9,1970-01-01T09:00:00Z,1,ZeroActivity\n";
        assert!(read_report(bad.as_bytes(), &s).is_err());
    }

    fn arb_points() -> impl Strategy<Value = (Vec<Vec<f64>>, usize, u64)> {
        (proptest::collection::vec(-50i32..50, 3..25), 1usize..4, any::<u64>()).prop_map(
            |(v, k, seed)| (v.iter().map(|&x| vec![x as f64 / 4.0]).collect(), k, seed),
        )
    }

    proptest! {
        #[test]
        fn inertia_trace_non_increasing((p, k, seed) in arb_points()) {
            prop_assume!(distinct_points(&p).len() >= k);
            let m = kmeans(&p, &KMeansConfig { k, seed, ..KMeansConfig::default() }).unwrap();
            for w in m.trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
            }
            prop_assert!(m.inertia <= m.trace.last().unwrap() + 1e-9);
        }

        #[test]
        fn converged_model_is_a_fixed_point((p, k, seed) in arb_points()) {
            prop_assume!(distinct_points(&p).len() >= k);
            let m = kmeans(&p, &KMeansConfig { k, seed, ..KMeansConfig::default() }).unwrap();
            prop_assert!(m.converged);
            // each point sits at its nearest centroid
            for (pt, &a) in p.iter().zip(&m.assignments) {
                prop_assert_eq!(nearest(pt, &m.centroids).0, a);
            }
            // centroids are the means of their members
            let dim = p[0].len();
            let mu = means(&p, &m.assignments, k, dim);
            for (c, u) in m.centroids.iter().zip(&mu) {
                prop_assert!((c[0] - u[0]).abs() <= 1e-9 * (1.0 + u[0].abs()));
            }
            let recomputed = inertia(&p, &m.centroids, &m.assignments);
            prop_assert!((recomputed - m.inertia).abs() <= 1e-9 * m.inertia.max(1e-300));
        }

        #[test]
        fn single_moves_do_not_lower_inertia((p, k, seed) in arb_points()) {
            // centroids held fixed: the assignment step is optimal at convergence
            prop_assume!(distinct_points(&p).len() >= k);
            let m = kmeans(&p, &KMeansConfig { k, seed, ..KMeansConfig::default() }).unwrap();
            for i in 0..p.len() {
                for j in 0..k {
                    let mut a = m.assignments.clone();
                    a[i] = j;
                    prop_assert!(inertia(&p, &m.centroids, &a) >= m.inertia - 1e-9 * m.inertia.max(1.0));
                }
            }
        }

        #[test]
        fn more_restarts_never_worse((p, k, seed) in arb_points()) {
            prop_assume!(distinct_points(&p).len() >= k);
            let cfg = KMeansConfig { k, seed, ..KMeansConfig::default() };
            let one = best_of_restarts(&p, &cfg, 1).unwrap();
            let ten = best_of_restarts(&p, &cfg, 10).unwrap();
            prop_assert!(ten.inertia <= one.inertia);
        }
    }
}
