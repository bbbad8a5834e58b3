//! Parsers for the three supported CDR schemas plus the canonical event CSV,
//! and the cleaning pass that drops malformed and duplicate rows.
//!
//! | format          | fields                                                     |
//! |-----------------|------------------------------------------------------------|
//! | CRAWDAD         | `YYYYMMDD, hhmmss, type, direction, duration`              |
//! | Nodobo          | `user, other, direction, duration, "Dow Mon D HH:MM:SS N YYYY"` |
//! | Telecom Italia  | `grid, timestamp, sms_in, sms_out, call_in, call_out, ...` |
//! | canonical       | `user,other,direction,kind,duration_s,timestamp_iso8601`   |

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use chrono::{Month, NaiveDate, NaiveTime, Weekday};
use serde::{Deserialize, Serialize};

use crate::time::{format_timestamp, parse_timestamp};

/// User id assigned to CRAWDAD rows, which carry no subscriber column.
pub const DEFAULT_CRAWDAD_USER: &str = "subscriber";

pub const CANONICAL_HEADER: &str = "user,other,direction,kind,duration_s,timestamp_iso8601";
pub const AGGREGATED_HEADER: &str = "grid_id,timestamp,sms_in,sms_out,call_in,call_out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Voice,
    Sms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Incoming,
    Outgoing,
    Missed,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Voice => "Voice",
            Kind::Sms => "Sms",
        }
    }
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Incoming => "Incoming",
            Direction::Outgoing => "Outgoing",
            Direction::Missed => "Missed",
        }
    }
}

impl FromStr for Kind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "voice" | "call" => Ok(Kind::Voice),
            "sms" | "text" => Ok(Kind::Sms),
            _ => Err(()),
        }
    }
}

impl FromStr for Direction {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "incoming" | "in" => Ok(Direction::Incoming),
            "outgoing" | "out" => Ok(Direction::Outgoing),
            "missed" => Ok(Direction::Missed),
            _ => Err(()),
        }
    }
}

/// One normalized event-level record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CdrEvent {
    pub user_id: String,
    pub other_id: Option<String>,
    /// UTC epoch seconds.
    pub timestamp: i64,
    pub kind: Kind,
    pub direction: Direction,
    /// Always 0 for SMS and missed calls.
    pub duration_s: u64,
}

impl CdrEvent {
    /// Builds an event, forcing the duration to 0 for SMS and missed calls.
    pub fn new(
        user_id: impl Into<String>,
        other_id: Option<String>,
        timestamp: i64,
        kind: Kind,
        direction: Direction,
        duration_s: u64,
    ) -> Result<Self, MalformedRow> {
        let user_id = user_id.into();
        check_id(&user_id, true)?;
        if let Some(other) = &other_id {
            check_id(other, false)?;
        }
        let duration_s = if kind == Kind::Sms || direction == Direction::Missed {
            0
        } else {
            duration_s
        };
        Ok(Self {
            user_id,
            other_id,
            timestamp,
            kind,
            direction,
            duration_s,
        })
    }

    /// Serializes to one canonical CSV row (no trailing newline).
    pub fn to_canonical(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.user_id,
            self.other_id.as_deref().unwrap_or(""),
            self.direction.as_str(),
            self.kind.as_str(),
            self.duration_s,
            format_timestamp(self.timestamp)
        )
    }
}

fn check_id(id: &str, required: bool) -> Result<(), MalformedRow> {
    if required && id.is_empty() {
        return Err(MalformedRow::new(MalformedKind::User, "empty user id"));
    }
    if id.contains([',', '"', '\n', '\r']) {
        return Err(MalformedRow::new(
            MalformedKind::User,
            format!("id {id:?} contains a reserved character"),
        ));
    }
    Ok(())
}

/// One Telecom Italia grid-cell row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregatedActivity {
    pub grid_id: u64,
    /// Raw timestamp column; see [`crate::series::TimeAxis`] for conversion.
    pub timestamp: i64,
    pub sms_in: f64,
    pub sms_out: f64,
    pub call_in: f64,
    pub call_out: f64,
}

impl AggregatedActivity {
    pub fn to_canonical(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.grid_id, self.timestamp, self.sms_in, self.sms_out, self.call_in, self.call_out
        )
    }
}

/// Why a row was rejected. The `reason` string is the key used in
/// [`IngestReport::drop_reasons`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MalformedKind {
    FieldCount,
    Date,
    Time,
    Timestamp,
    TimestampToken,
    Type,
    Direction,
    Duration,
    NegativeDuration,
    Number,
    NegativeActivity,
    GridId,
    User,
}

impl MalformedKind {
    pub fn reason(self) -> &'static str {
        match self {
            MalformedKind::FieldCount => "field_count",
            MalformedKind::Date => "bad_date",
            MalformedKind::Time => "bad_time",
            MalformedKind::Timestamp => "bad_timestamp",
            MalformedKind::TimestampToken => "bad_timestamp_token",
            MalformedKind::Type => "unknown_type",
            MalformedKind::Direction => "unknown_direction",
            MalformedKind::Duration => "bad_duration",
            MalformedKind::NegativeDuration => "negative_duration",
            MalformedKind::Number => "bad_number",
            MalformedKind::NegativeActivity => "negative_activity",
            MalformedKind::GridId => "bad_grid_id",
            MalformedKind::User => "bad_user",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed row ({}): {detail}", kind.reason())]
pub struct MalformedRow {
    pub kind: MalformedKind,
    pub detail: String,
}

impl MalformedRow {
    fn new(kind: MalformedKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
        }
    }
}

/// Input schema selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Crawdad,
    Nodobo,
    TelecomItalia,
    Canonical,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "crawdad" => Ok(Format::Crawdad),
            "nodobo" => Ok(Format::Nodobo),
            "telecom_italia" | "telecomitalia" | "ti" => Ok(Format::TelecomItalia),
            "canonical" => Ok(Format::Canonical),
            other => Err(format!("unknown dataset format {other:?}")),
        }
    }
}

fn split_fields(line: &str, delimiter: char) -> Vec<&str> {
    line.split(delimiter).map(str::trim).collect()
}

fn expect_fields(fields: &[&str], n: usize) -> Result<(), MalformedRow> {
    if fields.len() != n {
        return Err(MalformedRow::new(
            MalformedKind::FieldCount,
            format!("expected {n} fields, found {}", fields.len()),
        ));
    }
    Ok(())
}

fn parse_kind(s: &str) -> Result<Kind, MalformedRow> {
    s.parse()
        .map_err(|_| MalformedRow::new(MalformedKind::Type, format!("unknown type {s:?}")))
}

fn parse_direction(s: &str) -> Result<Direction, MalformedRow> {
    s.parse().map_err(|_| {
        MalformedRow::new(MalformedKind::Direction, format!("unknown direction {s:?}"))
    })
}

fn parse_duration(s: &str) -> Result<u64, MalformedRow> {
    match s.parse::<i64>() {
        Ok(d) if d < 0 => Err(MalformedRow::new(
            MalformedKind::NegativeDuration,
            format!("duration {d}"),
        )),
        Ok(d) => Ok(d as u64),
        Err(_) => Err(MalformedRow::new(
            MalformedKind::Duration,
            format!("duration {s:?}"),
        )),
    }
}

/// Parses a comma-separated CRAWDAD row.
pub fn parse_crawdad(line: &str) -> Result<CdrEvent, MalformedRow> {
    parse_crawdad_fields(&split_fields(line, ','), DEFAULT_CRAWDAD_USER)
}

pub fn parse_crawdad_fields(fields: &[&str], user_id: &str) -> Result<CdrEvent, MalformedRow> {
    expect_fields(fields, 5)?;
    let date = NaiveDate::parse_from_str(fields[0], "%Y%m%d")
        .ok()
        .filter(|_| fields[0].len() == 8)
        .ok_or_else(|| MalformedRow::new(MalformedKind::Date, format!("date {:?}", fields[0])))?;
    let time = NaiveTime::parse_from_str(fields[1], "%H%M%S")
        .ok()
        .filter(|_| fields[1].len() == 6)
        .ok_or_else(|| MalformedRow::new(MalformedKind::Time, format!("time {:?}", fields[1])))?;
    let kind = parse_kind(fields[2])?;
    let direction = parse_direction(fields[3])?;
    let duration = parse_duration(fields[4])?;
    let ts = date.and_time(time).and_utc().timestamp();
    CdrEvent::new(user_id, None, ts, kind, direction, duration)
}

/// Parses a comma-separated Nodobo call row.
pub fn parse_nodobo(line: &str) -> Result<CdrEvent, MalformedRow> {
    parse_nodobo_fields(&split_fields(line, ','))
}

pub fn parse_nodobo_fields(fields: &[&str]) -> Result<CdrEvent, MalformedRow> {
    expect_fields(fields, 5)?;
    let direction = parse_direction(fields[2])?;
    let duration = parse_duration(fields[3])?;
    let ts = parse_nodobo_timestamp(fields[4])?;
    let other = (!fields[1].is_empty()).then(|| fields[1].to_string());
    CdrEvent::new(fields[0], other, ts, Kind::Voice, direction, duration)
}

/// Parses `Dow Mon D HH:MM:SS <n> YYYY`. The numeric token before the year is
/// validated and then discarded.
pub fn parse_nodobo_timestamp(s: &str) -> Result<i64, MalformedRow> {
    let bad = || MalformedRow::new(MalformedKind::Timestamp, format!("timestamp {s:?}"));
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 6 {
        return Err(bad());
    }
    parts[0].parse::<Weekday>().map_err(|_| bad())?;
    let month = parts[1].parse::<Month>().map_err(|_| bad())?;
    let day: u32 = parts[2].parse().map_err(|_| bad())?;
    let time = NaiveTime::parse_from_str(parts[3], "%H:%M:%S").map_err(|_| bad())?;
    if parts[4].parse::<u64>().is_err() {
        return Err(MalformedRow::new(
            MalformedKind::TimestampToken,
            format!("token {:?}", parts[4]),
        ));
    }
    let year: i32 = parts[5].parse().map_err(|_| bad())?;
    let date = NaiveDate::from_ymd_opt(year, month.number_from_month(), day).ok_or_else(bad)?;
    Ok(date.and_time(time).and_utc().timestamp())
}

/// Parses a comma-separated Telecom Italia row. Columns past the sixth are
/// ignored; empty activity cells read as 0.
pub fn parse_telecom_italia(line: &str) -> Result<AggregatedActivity, MalformedRow> {
    parse_telecom_italia_fields(&split_fields(line, ','))
}

pub fn parse_telecom_italia_fields(fields: &[&str]) -> Result<AggregatedActivity, MalformedRow> {
    if fields.len() < 6 {
        return Err(MalformedRow::new(
            MalformedKind::FieldCount,
            format!("expected at least 6 fields, found {}", fields.len()),
        ));
    }
    let grid_id: u64 = fields[0]
        .parse()
        .ok()
        .filter(|&g| g >= 1)
        .ok_or_else(|| MalformedRow::new(MalformedKind::GridId, format!("grid {:?}", fields[0])))?;
    let timestamp: i64 = fields[1].parse().map_err(|_| {
        MalformedRow::new(MalformedKind::Timestamp, format!("timestamp {:?}", fields[1]))
    })?;
    let mut activity = [0.0; 4];
    for (slot, raw) in activity.iter_mut().zip(&fields[2..6]) {
        if raw.is_empty() {
            continue;
        }
        let v: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| MalformedRow::new(MalformedKind::Number, format!("value {raw:?}")))?;
        if v < 0.0 {
            return Err(MalformedRow::new(
                MalformedKind::NegativeActivity,
                format!("activity {v}"),
            ));
        }
        *slot = v;
    }
    Ok(AggregatedActivity {
        grid_id,
        timestamp,
        sms_in: activity[0],
        sms_out: activity[1],
        call_in: activity[2],
        call_out: activity[3],
    })
}

/// Parses one canonical event row as written by [`CdrEvent::to_canonical`].
pub fn parse_canonical(line: &str) -> Result<CdrEvent, MalformedRow> {
    parse_canonical_fields(&split_fields(line, ','))
}

pub fn parse_canonical_fields(fields: &[&str]) -> Result<CdrEvent, MalformedRow> {
    expect_fields(fields, 6)?;
    let direction = parse_direction(fields[2])?;
    let kind = parse_kind(fields[3])?;
    let duration = parse_duration(fields[4])?;
    let ts = parse_timestamp(fields[5]).ok_or_else(|| {
        MalformedRow::new(MalformedKind::Timestamp, format!("timestamp {:?}", fields[5]))
    })?;
    let other = (!fields[1].is_empty()).then(|| fields[1].to_string());
    CdrEvent::new(fields[0], other, ts, kind, direction, duration)
}

/// Counts of what [`preprocess`] kept and why it dropped the rest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub rows_dropped: usize,
    pub drop_reasons: BTreeMap<String, usize>,
}

impl IngestReport {
    fn drop(&mut self, reason: &str) {
        self.rows_dropped += 1;
        *self.drop_reasons.entry(reason.to_string()).or_default() += 1;
    }

    /// Combines per-file reports.
    pub fn merge(&mut self, other: &IngestReport) {
        self.rows_read += other.rows_read;
        self.rows_kept += other.rows_kept;
        self.rows_dropped += other.rows_dropped;
        for (k, v) in &other.drop_reasons {
            *self.drop_reasons.entry(k.clone()).or_default() += v;
        }
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rows_read={} rows_kept={} rows_dropped={}",
            self.rows_read, self.rows_kept, self.rows_dropped
        )?;
        for (reason, n) in &self.drop_reasons {
            write!(f, " {reason}={n}")?;
        }
        Ok(())
    }
}

/// A parsed row type that [`preprocess`] can order and deduplicate.
pub trait Record: Clone {
    type Key: Eq + Hash;

    fn sort_key(&self) -> i64;
    /// Identity on the full normalized tuple.
    fn dedup_key(&self) -> Self::Key;
}

impl Record for CdrEvent {
    type Key = CdrEvent;

    fn sort_key(&self) -> i64 {
        self.timestamp
    }

    fn dedup_key(&self) -> CdrEvent {
        self.clone()
    }
}

impl Record for AggregatedActivity {
    type Key = (u64, i64, [u64; 4]);

    fn sort_key(&self) -> i64 {
        self.timestamp
    }

    fn dedup_key(&self) -> Self::Key {
        (
            self.grid_id,
            self.timestamp,
            [
                self.sms_in.to_bits(),
                self.sms_out.to_bits(),
                self.call_in.to_bits(),
                self.call_out.to_bits(),
            ],
        )
    }
}

/// Drops malformed and duplicate rows and sorts the rest by timestamp
/// (stable, so ties keep input order).
pub fn preprocess<T: Record>(
    rows: impl IntoIterator<Item = Result<T, MalformedRow>>,
) -> (Vec<T>, IngestReport) {
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for row in rows {
        report.rows_read += 1;
        match row {
            Ok(rec) => {
                if seen.insert(rec.dedup_key()) {
                    kept.push(rec);
                } else {
                    report.drop("duplicate");
                }
            }
            Err(e) => report.drop(e.kind.reason()),
        }
    }
    kept.sort_by_key(Record::sort_key);
    report.rows_kept = kept.len();
    (kept, report)
}

/// Options for reading a whole input file.
#[derive(Debug, Clone)]
pub struct ReadOptions {
    pub delimiter: char,
    /// Subscriber id for CRAWDAD rows.
    pub user_id: String,
}

impl Default for ReadOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            user_id: DEFAULT_CRAWDAD_USER.to_string(),
        }
    }
}

/// Parsed rows of either event or aggregated shape.
#[derive(Debug, Clone)]
pub enum ParsedRows {
    Events(Vec<Result<CdrEvent, MalformedRow>>),
    Aggregated(Vec<Result<AggregatedActivity, MalformedRow>>),
}

fn looks_like_header(line: &str) -> bool {
    !line.chars().any(|c| c.is_ascii_digit())
}

/// Reads every non-blank line of `reader` with the parser for `format`.
/// A first line that fails to parse and holds no digits is taken as a header
/// and not counted.
pub fn read_rows<R: BufRead>(
    reader: R,
    format: Format,
    opts: &ReadOptions,
) -> io::Result<ParsedRows> {
    let mut events = Vec::new();
    let mut aggregated = Vec::new();
    let mut first = true;
    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line, opts.delimiter);
        let is_first = std::mem::replace(&mut first, false);
        match format {
            Format::TelecomItalia => {
                let row = parse_telecom_italia_fields(&fields);
                if !(is_first && row.is_err() && looks_like_header(line)) {
                    aggregated.push(row);
                }
            }
            _ => {
                let row = match format {
                    Format::Crawdad => parse_crawdad_fields(&fields, &opts.user_id),
                    Format::Nodobo => parse_nodobo_fields(&fields),
                    _ => parse_canonical_fields(&fields),
                };
                if !(is_first && row.is_err() && looks_like_header(line)) {
                    events.push(row);
                }
            }
        }
    }
    Ok(match format {
        Format::TelecomItalia => ParsedRows::Aggregated(aggregated),
        _ => ParsedRows::Events(events),
    })
}

pub fn write_events<W: Write>(mut w: W, events: &[CdrEvent]) -> io::Result<()> {
    writeln!(w, "{CANONICAL_HEADER}")?;
    for e in events {
        writeln!(w, "{}", e.to_canonical())?;
    }
    Ok(())
}

pub fn write_aggregated<W: Write>(mut w: W, rows: &[AggregatedActivity]) -> io::Result<()> {
    writeln!(w, "{AGGREGATED_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_canonical())?;
    }
    Ok(())
}

/// Reads a canonical events CSV, cleaning it with [`preprocess`].
pub fn read_events<R: BufRead>(reader: R) -> io::Result<(Vec<CdrEvent>, IngestReport)> {
    match read_rows(reader, Format::Canonical, &ReadOptions::default())? {
        ParsedRows::Events(rows) => Ok(preprocess(rows)),
        ParsedRows::Aggregated(_) => unreachable!("canonical rows are events"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::parse_timestamp;
    use proptest::prelude::*;

    fn ts(s: &str) -> i64 {
        parse_timestamp(s).unwrap()
    }

    #[test]
    fn crawdad_rows() {
        let e = parse_crawdad("20100916,130748,Voice,Incoming,18").unwrap();
        assert_eq!(e.timestamp, ts("2010-09-16T13:07:48Z"));
        assert_eq!((e.kind, e.direction, e.duration_s), (Kind::Voice, Direction::Incoming, 18));

        let e = parse_crawdad("20100916,133131,Voice,Outgoing,99").unwrap();
        assert_eq!(e.timestamp, ts("2010-09-16T13:31:31Z"));
        assert_eq!((e.direction, e.duration_s), (Direction::Outgoing, 99));

        let err = parse_crawdad("20100916,25xx99,Voice,Incoming,18").unwrap_err();
        assert_eq!(err.kind, MalformedKind::Time);
    }

    #[test]
    fn crawdad_errors() {
        let kind = |l: &str| parse_crawdad(l).unwrap_err().kind;
        assert_eq!(kind("20100916,130748,Voice,Incoming"), MalformedKind::FieldCount);
        assert_eq!(kind("20101316,130748,Voice,Incoming,1"), MalformedKind::Date);
        assert_eq!(kind("20100916,130748,Fax,Incoming,1"), MalformedKind::Type);
        assert_eq!(kind("20100916,130748,Voice,Incoming,-3"), MalformedKind::NegativeDuration);
        assert_eq!(kind("20100916,130748,Voice,Incoming,abc"), MalformedKind::Duration);
    }

    #[test]
    fn sms_duration_is_zeroed() {
        let e = parse_crawdad("20100916,130748,SMS,Outgoing,12").unwrap();
        assert_eq!((e.kind, e.duration_s), (Kind::Sms, 0));
    }

    #[test]
    fn nodobo_rows() {
        let e = parse_nodobo("7641036117,7588304495,Incoming,1224,Thu Sep 9 19:35:37 100 2010")
            .unwrap();
        assert_eq!(e.user_id, "7641036117");
        assert_eq!(e.other_id.as_deref(), Some("7588304495"));
        assert_eq!(e.timestamp, ts("2010-09-09T19:35:37Z"));
        assert_eq!((e.direction, e.duration_s), (Direction::Incoming, 1224));

        let e = parse_nodobo("7981267897,7743039441,Missed,0,Thu Sep 9 19:51:30 100 2010")
            .unwrap();
        assert_eq!((e.direction, e.duration_s), (Direction::Missed, 0));

        let err = parse_nodobo("a,b,Sideways,5,Thu Sep 9 19:51:30 100 2010").unwrap_err();
        assert_eq!(err.kind, MalformedKind::Direction);
    }

    #[test]
    fn nodobo_timestamp_token() {
        let err = parse_nodobo("a,b,Incoming,5,Thu Sep 9 19:51:30 x1 2010").unwrap_err();
        assert_eq!(err.kind, MalformedKind::TimestampToken);
        let err = parse_nodobo("a,b,Incoming,5,Thu Sep 31 19:51:30 100 2010").unwrap_err();
        assert_eq!(err.kind, MalformedKind::Timestamp);
        // the token value itself does not matter
        let a = parse_nodobo("a,b,Incoming,5,Fri Sep 10 20:17:00 100 2010").unwrap();
        let b = parse_nodobo("a,b,Incoming,5,Fri Sep 10 20:17:00 7 2010").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missed_call_duration_is_zeroed() {
        let e = parse_nodobo("a,b,Missed,40,Thu Sep 9 19:51:30 100 2010").unwrap();
        assert_eq!(e.duration_s, 0);
    }

    #[test]
    fn telecom_italia_rows() {
        let r = parse_telecom_italia("1,10,0.2724,0.1127,0.0035,0.0807").unwrap();
        assert_eq!(
            r,
            AggregatedActivity {
                grid_id: 1,
                timestamp: 10,
                sms_in: 0.2724,
                sms_out: 0.1127,
                call_in: 0.0035,
                call_out: 0.0807
            }
        );
        let r = parse_telecom_italia("10,20,0.0101,0.0693,0.0573,0.0446").unwrap();
        assert_eq!((r.grid_id, r.timestamp, r.call_out), (10, 20, 0.0446));

        let err = parse_telecom_italia("1,10,-0.5,0,0,0").unwrap_err();
        assert_eq!(err.kind, MalformedKind::NegativeActivity);
        assert_eq!(
            parse_telecom_italia("1,10,x,0,0,0").unwrap_err().kind,
            MalformedKind::Number
        );
        assert_eq!(
            parse_telecom_italia("0,10,0,0,0,0").unwrap_err().kind,
            MalformedKind::GridId
        );
        assert_eq!(
            parse_telecom_italia("1,10,0,0").unwrap_err().kind,
            MalformedKind::FieldCount
        );
    }

    #[test]
    fn telecom_italia_blank_cells_and_extra_columns() {
        let r = parse_telecom_italia("5,30,,0.5,,0.25,9.9").unwrap();
        assert_eq!((r.sms_in, r.sms_out, r.call_in, r.call_out), (0.0, 0.5, 0.0, 0.25));
    }

    fn crawdad_lines(lines: &[&str]) -> Vec<Result<CdrEvent, MalformedRow>> {
        lines.iter().map(|l| parse_crawdad(l)).collect()
    }

    #[test]
    fn preprocess_counts() {
        let rows = crawdad_lines(&[
            "20100916,130748,Voice,Incoming,18",
            "20100916,133131,Voice,Outgoing,99",
            "20100916,131324,Voice,Incoming,214",
            "20100916,131735,Voice,Incoming,72",
            "20100916,135342,Voice,Incoming,37",
            "20100916,13xx42,Voice,Incoming,37",
        ]);
        let (events, report) = preprocess(rows);
        assert_eq!(events.len(), 5);
        assert_eq!((report.rows_read, report.rows_kept, report.rows_dropped), (6, 5, 1));
        assert_eq!(report.drop_reasons.get("bad_time"), Some(&1));
        assert!(events.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn preprocess_dedups_on_normalized_tuple() {
        let rows = crawdad_lines(&[
            "20100916,130748,Voice,Incoming,18",
            "20100916, 130748 ,voice,Incoming,18",
        ]);
        let (events, report) = preprocess(rows);
        assert_eq!(events.len(), 1);
        assert_eq!(report.drop_reasons.get("duplicate"), Some(&1));
    }

    #[test]
    fn preprocess_empty() {
        let (events, report) = preprocess(Vec::<Result<CdrEvent, MalformedRow>>::new());
        assert!(events.is_empty());
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn read_rows_skips_header_only() {
        let text = "Date,Time,Type,Direction,Duration\n\
                    20100916,130748,Voice,Incoming,18\n\
                    \n\
                    garbage\n";
        let rows = match read_rows(text.as_bytes(), Format::Crawdad, &ReadOptions::default())
            .unwrap()
        {
            ParsedRows::Events(r) => r,
            _ => unreachable!(),
        };
        let (events, report) = preprocess(rows);
        assert_eq!(events.len(), 1);
        assert_eq!(report.rows_read, 2);
        assert_eq!(report.drop_reasons.get("field_count"), Some(&1));
    }

    #[test]
    fn read_rows_custom_delimiter() {
        let text = "7641036117;7588304495;Incoming;1224;Thu Sep 9 19:35:37 100 2010\n";
        let opts = ReadOptions {
            delimiter: ';',
            ..ReadOptions::default()
        };
        match read_rows(text.as_bytes(), Format::Nodobo, &opts).unwrap() {
            ParsedRows::Events(r) => assert!(r[0].is_ok()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn reserved_characters_in_ids_are_rejected() {
        let err = parse_nodobo_fields(&["a\"b", "c", "Incoming", "1", "Thu Sep 9 19:35:37 100 2010"])
            .unwrap_err();
        assert_eq!(err.kind, MalformedKind::User);
    }

    fn arb_event() -> impl Strategy<Value = CdrEvent> {
        (
            "[0-9]{1,10}",
            proptest::option::of("[0-9]{1,10}"),
            0i64..4_102_444_800,
            prop_oneof![Just(Kind::Voice), Just(Kind::Sms)],
            prop_oneof![
                Just(Direction::Incoming),
                Just(Direction::Outgoing),
                Just(Direction::Missed)
            ],
            0u64..100_000,
        )
            .prop_map(|(u, o, t, k, d, dur)| CdrEvent::new(u, o, t, k, d, dur).unwrap())
    }

    proptest! {
        #[test]
        fn canonical_round_trip(e in arb_event()) {
            prop_assert_eq!(parse_canonical(&e.to_canonical()).unwrap(), e);
        }

        #[test]
        fn preprocess_is_idempotent(events in proptest::collection::vec(arb_event(), 0..40)) {
            let mut doubled = events.clone();
            doubled.extend(events.iter().take(5).cloned());
            let (once, r1) = preprocess(doubled.into_iter().map(Ok));
            prop_assert_eq!(r1.rows_kept + r1.rows_dropped, r1.rows_read);
            let (twice, r2) = preprocess(once.clone().into_iter().map(Ok));
            prop_assert_eq!(r2.rows_dropped, 0);
            prop_assert_eq!(twice, once);
        }
    }
}
