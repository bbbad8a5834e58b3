//! UTC timestamp helpers. Every timestamp in the crate is whole seconds since
//! the Unix epoch; no dataset documents a zone, so all are read as UTC.

use chrono::{DateTime, NaiveDateTime};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Formats epoch seconds as `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(ts: i64) -> String {
    match DateTime::from_timestamp(ts, 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => format!("@{ts}"),
    }
}

/// Parses an ISO-8601 instant. Accepts RFC 3339 (`Z` or numeric offset) and
/// the zone-less `YYYY-MM-DDTHH:MM:SS` / `YYYY-MM-DD HH:MM:SS` forms.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp());
        }
    }
    None
}

/// Seconds elapsed since UTC midnight.
pub fn seconds_of_day(ts: i64) -> i64 {
    ts.rem_euclid(SECONDS_PER_DAY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let ts = 1_284_642_468; // 2010-09-16T13:07:48Z
        assert_eq!(format_timestamp(ts), "2010-09-16T13:07:48Z");
        assert_eq!(parse_timestamp("2010-09-16T13:07:48Z"), Some(ts));
        assert_eq!(parse_timestamp("2010-09-16 13:07:48"), Some(ts));
        assert_eq!(parse_timestamp("2010-09-16T15:07:48+02:00"), Some(ts));
        assert_eq!(parse_timestamp("yesterday"), None);
    }

    #[test]
    fn time_of_day() {
        assert_eq!(seconds_of_day(1_284_642_468), 13 * 3600 + 7 * 60 + 48);
        assert_eq!(seconds_of_day(-1), SECONDS_PER_DAY - 1);
    }
}
