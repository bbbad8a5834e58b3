//! Seeded synthetic CDR corpora with a known daily rhythm and injected
//! anomalies, plus the ground-truth labels for the injected buckets.

use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::cluster::{ActiveWindow, AnomalyReason};
use crate::ingest::{preprocess, CdrEvent, Direction, IngestReport, Kind};
use crate::time::{format_timestamp, parse_timestamp, SECONDS_PER_DAY};

pub const TRUTH_HEADER: &str = "bucket_start_iso8601,reason";
/// Bucket width the truth labels refer to.
pub const SYNTH_BUCKET_WIDTH_S: i64 = 3600;
/// 2010-09-16T00:00:00Z
pub const DEFAULT_START: i64 = 1_284_595_200;

/// Mean events per hour of day before the per-day factor.
const HOURLY_RATE: [f64; 24] = [
    8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 8.0, 40.0, 140.0, 260.0, 260.0, 260.0, 260.0, 260.0, 260.0,
    260.0, 260.0, 260.0, 130.0, 130.0, 130.0, 130.0, 60.0, 25.0,
];

/// (day, hour, minute) at which a burst of extra events starts.
const SPIKES: [(i64, i64, i64); 4] = [(1, 17, 32), (3, 17, 40), (6, 12, 48), (8, 21, 37)];
/// (day, hour) with no events at all.
const OUTAGE: (i64, i64) = (8, 17);
const SPIKE_SPAN_S: i64 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Daily rhythm with four activity bursts and one silent hour.
    Week,
    /// Daily rhythm only.
    Clean,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "week" => Ok(Profile::Week),
            "clean" => Ok(Profile::Clean),
            other => Err(format!("unknown profile {other:?} (week, clean)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub profile: Profile,
    pub seed: u64,
    pub start: i64,
    pub days: usize,
    pub users: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Week,
            seed: 0,
            start: DEFAULT_START,
            days: 9,
            users: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TruthLabel {
    pub bucket_start: i64,
    pub reason: AnomalyReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    /// Sorted and de-duplicated.
    pub events: Vec<CdrEvent>,
    pub truth: Vec<TruthLabel>,
    pub report: IngestReport,
}

/// Window in which a silent hour counts as an outage.
pub fn default_active_window() -> ActiveWindow {
    ActiveWindow::from_hours(8, 22)
}

fn random_event(rng: &mut ChaCha8Rng, ts: i64, users: usize) -> CdrEvent {
    let user = format!("u{:03}", rng.gen_range(0..users));
    let other = format!("+39{:08}", rng.gen_range(0..100_000_000u64));
    let kind = if rng.gen_bool(0.6) { Kind::Voice } else { Kind::Sms };
    let direction = match (kind, rng.gen_range(0..10)) {
        (Kind::Voice, 0..=1) => Direction::Missed,
        (_, 0..=5) => Direction::Outgoing,
        _ => Direction::Incoming,
    };
    let duration = 1 + Exp::new(1.0 / 90.0).unwrap().sample(rng) as u64;
    CdrEvent::new(user, Some(other), ts, kind, direction, duration)
        .expect("generated ids are valid")
}

pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let users = config.users.max(1);
    let mut events = Vec::new();
    let mut truth = Vec::new();
    let hour_start = |day: i64, hour: i64| config.start + day * SECONDS_PER_DAY + hour * 3600;
    let injected = config.profile == Profile::Week;

    for day in 0..config.days as i64 {
        let factor = rng.gen_range(0.9..1.1);
        for hour in 0..24 {
            // draw even for the silent hour so the stream stays aligned
            let n = Poisson::new(HOURLY_RATE[hour as usize] * factor)
                .unwrap()
                .sample(&mut rng) as usize;
            let mut offsets: Vec<i64> = (0..n).map(|_| rng.gen_range(0..3600)).collect();
            if injected && (day, hour) == OUTAGE {
                truth.push(TruthLabel {
                    bucket_start: hour_start(day, hour),
                    reason: AnomalyReason::ZeroActivity,
                });
                continue;
            }
            offsets.sort_unstable();
            for off in offsets {
                events.push(random_event(&mut rng, hour_start(day, hour) + off, users));
            }
        }
    }

    if injected {
        for &(day, hour, minute) in &SPIKES {
            if day >= config.days as i64 {
                continue;
            }
            let t0 = hour_start(day, hour) + minute * 60;
            let extra = rng.gen_range(500..=800);
            for _ in 0..extra {
                let ts = t0 + rng.gen_range(0..SPIKE_SPAN_S);
                events.push(random_event(&mut rng, ts, users));
            }
            truth.push(TruthLabel {
                bucket_start: hour_start(day, hour),
                reason: AnomalyReason::HighActivityCluster,
            });
        }
        truth.retain(|t| t.bucket_start < hour_start(config.days as i64, 0));
    }
    truth.sort();
    events.shuffle(&mut rng);
    let (events, report) = preprocess(events.into_iter().map(Ok));
    SynthCorpus {
        events,
        truth,
        report,
    }
}

pub fn write_truth<W: Write>(mut w: W, truth: &[TruthLabel]) -> io::Result<()> {
    writeln!(w, "{TRUTH_HEADER}")?;
    for t in truth {
        writeln!(w, "{},{}", format_timestamp(t.bucket_start), t.reason)?;
    }
    Ok(())
}

pub fn read_truth<R: BufRead>(r: R) -> Result<Vec<TruthLabel>, String> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line == TRUTH_HEADER) {
            continue;
        }
        let (ts, reason) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected 2 fields", i + 1))?;
        out.push(TruthLabel {
            bucket_start: parse_timestamp(ts)
                .ok_or_else(|| format!("line {}: bad timestamp {ts:?}", i + 1))?,
            reason: reason.parse().map_err(|e| format!("line {}: {e}", i + 1))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{bucketize, Metric};

    #[test]
    fn deterministic_and_labelled() {
        let a = generate(&SynthConfig::default());
        let b = generate(&SynthConfig::default());
        assert_eq!(a, b);
        assert_eq!(a.truth.len(), 5);
        let s = bucketize(&a.events, SYNTH_BUCKET_WIDTH_S, Metric::EventCount).unwrap();
        assert_eq!(s.start, DEFAULT_START);
        assert_eq!(s.len(), 9 * 24);
        for t in &a.truth {
            let v = s.values[s.bucket_of(t.bucket_start).unwrap()];
            match t.reason {
                AnomalyReason::ZeroActivity => assert_eq!(v, 0.0),
                AnomalyReason::HighActivityCluster => assert!(v > 600.0, "{v}"),
            }
        }
        assert!(a.events.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn clean_profile_has_no_truth() {
        let c = generate(&SynthConfig {
            profile: Profile::Clean,
            ..SynthConfig::default()
        });
        assert!(c.truth.is_empty());
    }

    #[test]
    fn truth_round_trip() {
        let t = generate(&SynthConfig::default()).truth;
        let mut buf = Vec::new();
        write_truth(&mut buf, &t).unwrap();
        assert_eq!(read_truth(&buf[..]).unwrap(), t);
    }
}
