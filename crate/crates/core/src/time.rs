// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! UTC interval, hour and month arithmetic on unix seconds.

use std::fmt;

use chrono::{DateTime, Datelike, NaiveDate, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};

/// Length of one reporting interval.
pub const INTERVAL_SECS: i64 = 300;
pub const INTERVAL_MS: u64 = INTERVAL_SECS as u64 * 1000;
pub const HOUR_SECS: i64 = 3600;

/// Start of the half-open interval `[t, t + 300)` containing `ts`.
pub fn interval_start(ts: i64) -> i64 {
    ts.div_euclid(INTERVAL_SECS) * INTERVAL_SECS
}

pub fn interval_start_ms(ms: u64) -> i64 {
    ((ms / INTERVAL_MS) * INTERVAL_MS / 1000) as i64
}

pub fn hour_start(ts: i64) -> i64 {
    ts.div_euclid(HOUR_SECS) * HOUR_SECS
}

/// Serialized as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Month {
    pub year: i32,
    pub month: u32,
}

impl Month {
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range");
        Self { year, month }
    }

    pub fn of(ts: i64) -> Self {
        let dt = datetime(ts);
        Self {
            year: dt.year(),
            month: dt.month(),
        }
    }

    pub fn start(&self) -> i64 {
        NaiveDate::from_ymd_opt(self.year, self.month, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .map(|d| d.and_utc().timestamp())
            .expect("valid month")
    }

    pub fn next(&self) -> Self {
        if self.month == 12 {
            Self::new(self.year + 1, 1)
        } else {
            Self::new(self.year, self.month + 1)
        }
    }

    /// Half-open `[start, end)` in unix seconds.
    pub fn bounds(&self) -> (i64, i64) {
        (self.start(), self.next().start())
    }

    pub fn contains(&self, ts: i64) -> bool {
        let (start, end) = self.bounds();
        (start..end).contains(&ts)
    }
}

impl std::str::FromStr for Month {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad month {s:?}, expected YYYY-MM");
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        let year = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        if y.len() != 4 || !(1..=12).contains(&month) {
            return Err(bad());
        }
        Ok(Self { year, month })
    }
}

impl TryFrom<String> for Month {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Month> for String {
    fn from(m: Month) -> Self {
        m.to_string()
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

fn datetime(ts: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(ts, 0).single().expect("timestamp in chrono range")
}

/// `2016-02-01T00:05:00Z`
pub fn format_iso(ts: i64) -> String {
    datetime(ts).to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Accepts RFC 3339 timestamps or plain unix seconds.
pub fn parse_timestamp(text: &str) -> Option<i64> {
    let text = text.trim();
    if let Ok(secs) = text.parse::<i64>() {
        return Some(secs);
    }
    DateTime::parse_from_rfc3339(text).ok().map(|dt| dt.timestamp())
}
