//! Anomaly-free series: every flagged bucket is replaced by the mean of the
//! buckets that were not flagged.

use std::io::{self, Write};

use crate::cluster::AnomalyReport;
use crate::series::ActivitySeries;
use crate::time::format_timestamp;

pub const SIDECAR_HEADER: &str = "bucket_index,bucket_start_iso8601,original_value,replacement_value";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScrubError {
    #[error("every bucket is anomalous; nothing to average")]
    AllAnomalous,
    #[error("anomaly index {index} outside series of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("got {series} series but {reports} reports")]
    CountMismatch { series: usize, reports: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScrubbedSeries {
    /// Cleaned values with the source series metadata.
    pub series: ActivitySeries,
    /// Sorted, distinct.
    pub replaced_indices: Vec<usize>,
    pub replacement_value: f64,
}

impl ScrubbedSeries {
    pub fn values(&self) -> &[f64] {
        &self.series.values
    }
}

fn flagged(series: &ActivitySeries, report: &AnomalyReport) -> Result<Vec<bool>, ScrubError> {
    let mut mask = vec![false; series.len()];
    for a in &report.anomalous_buckets {
        *mask.get_mut(a.index).ok_or(ScrubError::IndexOutOfRange {
            index: a.index,
            len: series.len(),
        })? = true;
    }
    Ok(mask)
}

fn apply(series: &ActivitySeries, mask: &[bool], replacement: f64) -> ScrubbedSeries {
    let values = series
        .values
        .iter()
        .zip(mask)
        .map(|(&v, &m)| if m { replacement } else { v })
        .collect();
    ScrubbedSeries {
        series: series.with_values(values),
        replaced_indices: mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
            .collect(),
        replacement_value: replacement,
    }
}

/// Replaces both spike and zero-activity buckets with the mean of the
/// series' own non-anomalous buckets.
pub fn make_anomaly_free(
    series: &ActivitySeries,
    report: &AnomalyReport,
) -> Result<ScrubbedSeries, ScrubError> {
    let mask = flagged(series, report)?;
    let (sum, n) = series
        .values
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| !m)
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    if n == 0 {
        return Err(ScrubError::AllAnomalous);
    }
    Ok(apply(series, &mask, sum / n as f64))
}

/// Cross-series variant: one replacement value, the mean over the
/// non-anomalous buckets of every input series.
pub fn make_anomaly_free_pooled(
    inputs: &[ActivitySeries],
    reports: &[AnomalyReport],
) -> Result<Vec<ScrubbedSeries>, ScrubError> {
    if inputs.len() != reports.len() {
        return Err(ScrubError::CountMismatch {
            series: inputs.len(),
            reports: reports.len(),
        });
    }
    let masks = inputs
        .iter()
        .zip(reports)
        .map(|(s, r)| flagged(s, r))
        .collect::<Result<Vec<_>, _>>()?;
    let (sum, n) = inputs
        .iter()
        .zip(&masks)
        .flat_map(|(s, m)| s.values.iter().zip(m))
        .filter(|(_, &m)| !m)
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    if n == 0 {
        return Err(ScrubError::AllAnomalous);
    }
    let mean = sum / n as f64;
    Ok(inputs
        .iter()
        .zip(&masks)
        .map(|(s, m)| apply(s, m, mean))
        .collect())
}

/// Sidecar listing each replaced bucket with its original value.
pub fn write_sidecar<W: Write>(
    mut w: W,
    source: &ActivitySeries,
    scrubbed: &ScrubbedSeries,
) -> io::Result<()> {
    writeln!(w, "{SIDECAR_HEADER}")?;
    for &i in &scrubbed.replaced_indices {
        writeln!(
            w,
            "{},{},{},{}",
            i,
            format_timestamp(source.bucket_start(i)),
            source.values[i],
            scrubbed.replacement_value
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{Anomaly, AnomalyReason};
    use crate::series::Metric;
    use proptest::prelude::*;

    fn series(v: &[f64]) -> ActivitySeries {
        ActivitySeries::new(0, 600, v.to_vec(), Metric::EventCount, "").unwrap()
    }

    fn report(idx: &[(usize, AnomalyReason)]) -> AnomalyReport {
        AnomalyReport::from_anomalies(
            idx.iter()
                .map(|&(index, reason)| Anomaly { index, reason })
                .collect(),
        )
    }

    #[test]
    fn spike_replaced_by_mean() {
        let s = make_anomaly_free(
            &series(&[10.0, 12.0, 500.0, 11.0]),
            &report(&[(2, AnomalyReason::HighActivityCluster)]),
        )
        .unwrap();
        assert_eq!(s.replacement_value, 11.0);
        assert_eq!(s.values(), &[10.0, 12.0, 11.0, 11.0]);
        assert_eq!(s.replaced_indices, vec![2]);
    }

    #[test]
    fn empty_report_is_identity() {
        let src = series(&[3.0, 1.0, 4.0]);
        let s = make_anomaly_free(&src, &AnomalyReport::default()).unwrap();
        assert_eq!(s.series, src);
        assert!(s.replaced_indices.is_empty());
    }

    #[test]
    fn zero_activity_rises_to_mean() {
        let s = make_anomaly_free(
            &series(&[0.0, 8.0, 8.0, 8.0]),
            &report(&[(0, AnomalyReason::ZeroActivity)]),
        )
        .unwrap();
        assert_eq!(s.values(), &[8.0; 4]);
    }

    #[test]
    fn index_flagged_for_both_reasons_is_replaced_once() {
        let s = make_anomaly_free(
            &series(&[0.0, 2.0, 4.0]),
            &report(&[
                (0, AnomalyReason::ZeroActivity),
                (0, AnomalyReason::HighActivityCluster),
            ]),
        )
        .unwrap();
        assert_eq!(s.replaced_indices, vec![0]);
        assert_eq!(s.values(), &[3.0, 2.0, 4.0]);
    }

    #[test]
    fn errors() {
        assert_eq!(
            make_anomaly_free(
                &series(&[1.0]),
                &report(&[(0, AnomalyReason::HighActivityCluster)])
            )
            .unwrap_err(),
            ScrubError::AllAnomalous
        );
        assert!(matches!(
            make_anomaly_free(&series(&[1.0]), &report(&[(3, AnomalyReason::ZeroActivity)])),
            Err(ScrubError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn pooled_mean_spans_all_series() {
        let a = series(&[2.0, 100.0]);
        let b = series(&[4.0, 6.0]);
        let out = make_anomaly_free_pooled(
            &[a, b],
            &[
                report(&[(1, AnomalyReason::HighActivityCluster)]),
                AnomalyReport::default(),
            ],
        )
        .unwrap();
        assert_eq!(out[0].values(), &[2.0, 4.0]);
        assert_eq!(out[1].values(), &[4.0, 6.0]);
        assert!(make_anomaly_free_pooled(&[series(&[1.0])], &[]).is_err());
    }

    #[test]
    fn sidecar_format() {
        let src = series(&[10.0, 12.0, 500.0, 11.0]);
        let s = make_anomaly_free(&src, &report(&[(2, AnomalyReason::HighActivityCluster)])).unwrap();
        let mut buf = Vec::new();
        write_sidecar(&mut buf, &src, &s).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bucket_index,bucket_start_iso8601,original_value,replacement_value\n\
             2,1970-01-01T00:20:00Z,500,11\n"
        );
    }

    proptest! {
        #[test]
        fn scrub_contract(values in proptest::collection::vec(0.0f64..1000.0, 2..60),
                          picks in proptest::collection::vec(any::<proptest::sample::Index>(), 0..10)) {
            let src = series(&values);
            let mut flagged: Vec<usize> = picks.iter().map(|p| p.index(values.len())).collect();
            flagged.sort();
            flagged.dedup();
            prop_assume!(flagged.len() < values.len());
            let rep = report(&flagged.iter().map(|&i| (i, AnomalyReason::HighActivityCluster)).collect::<Vec<_>>());
            let s = make_anomaly_free(&src, &rep).unwrap();
            prop_assert_eq!(s.values().len(), values.len());
            let clean: Vec<f64> = values.iter().enumerate().filter(|(i, _)| !flagged.contains(i)).map(|(_, v)| *v).collect();
            let lo = clean.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = clean.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (i, (&a, &b)) in s.values().iter().zip(&values).enumerate() {
                if flagged.contains(&i) {
                    prop_assert_eq!(a.to_bits(), s.replacement_value.to_bits());
                } else {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
                prop_assert!(a >= lo - 1e-9 && a <= hi + 1e-9);
            }
            // scrubbing again with nothing flagged changes nothing
            let again = make_anomaly_free(&s.series, &AnomalyReport::default()).unwrap();
            prop_assert_eq!(again.series, s.series);
        }
    }
}
