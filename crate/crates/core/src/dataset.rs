// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! The private per-group dataset: one row per (interval, region, partner,
//! access ISP) with ingress/egress byte totals and provisioned capacity.
//!
//! CSV columns:
//!
//! | column          | meaning                                         |
//! |-----------------|-------------------------------------------------|
//! | `timestamp`     | interval start, RFC 3339 UTC, multiple of 300 s |
//! | `region`        | region of the link group                        |
//! | `partner`       | partner network in clear (private data only)    |
//! | `access_isp`    | access ISP                                      |
//! | `ingress_bytes` | bytes towards the access ISP in the interval    |
//! | `egress_bytes`  | bytes towards the partner in the interval       |
//! | `capacity_bps`  | monitored group capacity at interval start      |
//! | `link_count`    | monitored member links of the group             |

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::Inventory;
use crate::pipeline::{Aggregator, IntervalAggregate, Window};
use crate::time::{format_iso, parse_timestamp, INTERVAL_SECS};

pub const PRIVATE_HEADER: &str =
    "timestamp,region,partner,access_isp,ingress_bytes,egress_bytes,capacity_bps,link_count";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrivateRow {
    pub timestamp: i64,
    pub region: String,
    pub partner: String,
    pub access_isp: String,
    pub ingress_bytes: u64,
    pub egress_bytes: u64,
    pub capacity_bps: u64,
    pub link_count: u32,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: bad timestamp {value:?}")]
    Timestamp { row: usize, value: String },
    #[error("row {row}: timestamp {timestamp} is not aligned to 300 s")]
    Misaligned { row: usize, timestamp: i64 },
    #[error("unexpected header {0:?}")]
    Header(String),
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    timestamp: String,
    region: String,
    partner: String,
    access_isp: String,
    ingress_bytes: u64,
    egress_bytes: u64,
    capacity_bps: u64,
    link_count: u32,
}

/// Turns aggregates into private rows, one per monitored group and
/// interval. With a window every interval of the window gets a row (zero
/// bytes where nothing was seen); without one only intervals with
/// contributions appear. Rows are sorted by timestamp, then region, ISP and
/// partner.
pub fn build_private_rows(agg: &Aggregator, inventory: &Inventory, window: Option<Window>) -> Vec<PrivateRow> {
    let series = agg.series();
    let mut rows = Vec::new();
    for group in inventory.groups() {
        let link_count = group.monitored_links().count() as u32;
        if link_count == 0 {
            continue;
        }
        let seen: &[IntervalAggregate] = series.get(&group.id).map(Vec::as_slice).unwrap_or(&[]);
        let intervals: Vec<i64> = match window {
            Some(w) => w.intervals().collect(),
            None => seen.iter().map(|a| a.interval_start).collect(),
        };
        for ts in intervals {
            let cell = agg
                .get(group.id, ts)
                .copied()
                .unwrap_or_else(|| IntervalAggregate::empty(group.id, ts));
            rows.push(PrivateRow {
                timestamp: ts,
                region: group.region.clone(),
                partner: group.partner.clone(),
                access_isp: group.isp.clone(),
                ingress_bytes: cell.ingress_bytes,
                egress_bytes: cell.egress_bytes,
                capacity_bps: inventory.group_capacity_at(group.id, ts).unwrap_or(0),
                link_count,
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.timestamp, &a.region, &a.access_isp, &a.partner).cmp(&(b.timestamp, &b.region, &b.access_isp, &b.partner))
    });
    rows
}

pub fn write_private_csv(rows: &[PrivateRow], writer: impl Write) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record(PRIVATE_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(CsvRow {
            timestamp: format_iso(r.timestamp),
            region: r.region.clone(),
            partner: r.partner.clone(),
            access_isp: r.access_isp.clone(),
            ingress_bytes: r.ingress_bytes,
            egress_bytes: r.egress_bytes,
            capacity_bps: r.capacity_bps,
            link_count: r.link_count,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_private_csv(reader: impl Read) -> Result<Vec<PrivateRow>, DatasetError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != PRIVATE_HEADER {
        return Err(DatasetError::Header(header));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let rec: CsvRow = rec?;
        let row = i + 1;
        let timestamp = parse_timestamp(&rec.timestamp).ok_or_else(|| DatasetError::Timestamp {
            row,
            value: rec.timestamp.clone(),
        })?;
        if timestamp % INTERVAL_SECS != 0 {
            return Err(DatasetError::Misaligned { row, timestamp });
        }
        rows.push(PrivateRow {
            timestamp,
            region: rec.region,
            partner: rec.partner,
            access_isp: rec.access_isp,
            ingress_bytes: rec.ingress_bytes,
            egress_bytes: rec.egress_bytes,
            capacity_bps: rec.capacity_bps,
            link_count: rec.link_count,
        });
    }
    Ok(rows)
}

/// Distinct access ISPs per region.
pub fn isps_per_region(rows: &[PrivateRow]) -> std::collections::BTreeMap<&str, BTreeSet<&str>> {
    let mut out: std::collections::BTreeMap<&str, BTreeSet<&str>> = Default::default();
    for r in rows {
        out.entry(r.region.as_str()).or_default().insert(r.access_isp.as_str());
    }
    out
}
