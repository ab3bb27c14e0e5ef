// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Public release of the dataset: keyed pseudonyms for partner networks,
//! suppression of every region interval with fewer than the minimum number
//! of contributing ISPs, and the aggregate summary views.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use hmac::{Hmac, Mac};
use serde::Serialize;
use sha2::Sha256;
use thiserror::Error;

use crate::dataset::PrivateRow;
use crate::ipfix::Direction;
use crate::metrics::{self, CdfPoint, GroupSeries, MetricsError, UtilizationDataset, Weighting};
use crate::time::{format_iso, Month, INTERVAL_SECS};

pub const PUBLIC_HEADER: &str =
    "timestamp,region,anonymized_partner,access_isp,total_ingress_bytes,total_egress_bytes,capacity_bps";

/// Environment variable holding the pseudonymization key.
pub const KEY_ENV: &str = "INTERCONNECT_ANON_KEY";

pub const MIN_ISPS_PER_REGION: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("anonymization key is empty")]
    EmptyKey,
    #[error("at least {MIN_ISPS_PER_REGION} ISPs per region are required, got {0}")]
    ThresholdTooLow(usize),
}

#[derive(Clone)]
pub struct AnonymizationKey(Vec<u8>);

impl AnonymizationKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, PolicyError> {
        let bytes = bytes.into();
        if bytes.is_empty() {
            return Err(PolicyError::EmptyKey);
        }
        Ok(Self(bytes))
    }
}

impl fmt::Debug for AnonymizationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AnonymizationKey(..)")
    }
}

/// Keyed pseudonym for a partner network: `partner-` followed by the first
/// 64 bits of HMAC-SHA256(key, name) in hex.
pub fn anonymize_partner(name: &str, key: &AnonymizationKey) -> String {
    let mut mac = Hmac::<Sha256>::new_from_slice(&key.0).expect("hmac accepts any key length");
    mac.update(name.as_bytes());
    let digest = mac.finalize().into_bytes();
    format!("partner-{}", hex::encode(&digest[..8]))
}

#[derive(Debug, Clone)]
pub struct DisclosurePolicy {
    min_isps_per_region: usize,
    key: AnonymizationKey,
}

impl DisclosurePolicy {
    pub fn new(min_isps_per_region: usize, key: AnonymizationKey) -> Result<Self, PolicyError> {
        if min_isps_per_region < MIN_ISPS_PER_REGION {
            return Err(PolicyError::ThresholdTooLow(min_isps_per_region));
        }
        Ok(Self {
            min_isps_per_region,
            key,
        })
    }

    pub fn with_key(key: AnonymizationKey) -> Self {
        Self {
            min_isps_per_region: MIN_ISPS_PER_REGION,
            key,
        }
    }

    pub fn min_isps_per_region(&self) -> usize {
        self.min_isps_per_region
    }

    pub fn interval_secs(&self) -> i64 {
        INTERVAL_SECS
    }

    pub fn key(&self) -> &AnonymizationKey {
        &self.key
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PublicRow {
    pub timestamp: i64,
    pub region: String,
    pub anonymized_partner: String,
    pub access_isp: String,
    pub total_ingress_bytes: u64,
    pub total_egress_bytes: u64,
    pub capacity_bps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuppressedRegion {
    pub region: String,
    /// Most ISPs seen in any single interval of the region.
    pub max_isps: usize,
    pub dropped_rows: usize,
    pub total_rows: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PublicExport {
    pub rows: Vec<PublicRow>,
    pub suppressed: Vec<SuppressedRegion>,
}

/// Applies the disclosure policy to private rows. A row survives only if
/// its (region, interval) has at least the minimum number of distinct ISPs.
/// Rows that share (interval, region, ISP, partner) are merged by summing.
pub fn build_public_rows(rows: &[PrivateRow], policy: &DisclosurePolicy) -> PublicExport {
    let mut contributors: BTreeMap<(&str, i64), BTreeSet<&str>> = BTreeMap::new();
    for r in rows {
        contributors
            .entry((&r.region, r.timestamp))
            .or_default()
            .insert(&r.access_isp);
    }

    let mut pseudonyms: BTreeMap<&str, String> = BTreeMap::new();
    // (interval, region, ISP, partner) -> (ingress, egress, capacity)
    type CellKey<'a> = (i64, &'a str, &'a str, &'a str);
    let mut merged: BTreeMap<CellKey, (u64, u64, u64)> = BTreeMap::new();
    let mut region_stats: BTreeMap<&str, SuppressedRegion> = BTreeMap::new();
    for r in rows {
        let isp_count = contributors[&(r.region.as_str(), r.timestamp)].len();
        let stats = region_stats.entry(&r.region).or_insert_with(|| SuppressedRegion {
            region: r.region.clone(),
            max_isps: 0,
            dropped_rows: 0,
            total_rows: 0,
        });
        stats.max_isps = stats.max_isps.max(isp_count);
        stats.total_rows += 1;
        if isp_count < policy.min_isps_per_region {
            stats.dropped_rows += 1;
            continue;
        }
        pseudonyms
            .entry(&r.partner)
            .or_insert_with(|| anonymize_partner(&r.partner, &policy.key));
        let cell = merged
            .entry((r.timestamp, &r.region, &r.access_isp, &r.partner))
            .or_default();
        cell.0 += r.ingress_bytes;
        cell.1 += r.egress_bytes;
        cell.2 += r.capacity_bps;
    }

    let mut out_rows: Vec<PublicRow> = merged
        .into_iter()
        .map(
            |((timestamp, region, isp, partner), (ingress, egress, capacity))| PublicRow {
                timestamp,
                region: region.to_string(),
                anonymized_partner: pseudonyms[partner].clone(),
                access_isp: isp.to_string(),
                total_ingress_bytes: ingress,
                total_egress_bytes: egress,
                capacity_bps: capacity,
            },
        )
        .collect();
    out_rows.sort();

    let suppressed = region_stats
        .into_values()
        .filter(|s| s.dropped_rows > 0)
        .collect::<Vec<_>>();
    for s in &suppressed {
        log::info!(
            "suppressed {} of {} rows in region {} (at most {} ISPs per interval)",
            s.dropped_rows,
            s.total_rows,
            s.region,
            s.max_isps
        );
    }
    PublicExport {
        rows: out_rows,
        suppressed,
    }
}

pub fn write_public_csv(rows: &[PublicRow], writer: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PUBLIC_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            format_iso(r.timestamp),
            r.region.clone(),
            r.anonymized_partner.clone(),
            r.access_isp.clone(),
            r.total_ingress_bytes.to_string(),
            r.total_egress_bytes.to_string(),
            r.capacity_bps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_suppression_csv(suppressed: &[SuppressedRegion], writer: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["region", "max_isps", "dropped_rows", "total_rows"])?;
    for s in suppressed {
        w.serialize((&s.region, s.max_isps, s.dropped_rows, s.total_rows))?;
    }
    w.flush()?;
    Ok(())
}

/// Pooled statistics over a set of groups: byte totals plus the highest and
/// 95th-percentile utilization of the summed traffic over summed capacity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateView {
    pub name: String,
    pub isps: usize,
    pub groups: usize,
    pub ingress_bytes: u64,
    pub egress_bytes: u64,
    pub peak_utilization: f64,
    pub p95_utilization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublicSummary {
    pub month: String,
    pub min_isps_per_region: usize,
    pub per_isp: Vec<AggregateView>,
    pub per_region: Vec<AggregateView>,
    pub global: Option<AggregateView>,
    pub per_link_cdf: Vec<CdfPoint>,
    pub by_capacity_cdf: Vec<CdfPoint>,
}

fn pooled_view<'a>(
    name: &str,
    groups: impl IntoIterator<Item = &'a GroupSeries>,
    month: Month,
    direction: Direction,
) -> Result<Option<AggregateView>, MetricsError> {
    let mut cells: BTreeMap<i64, (u64, u64)> = BTreeMap::new();
    let mut isps = BTreeSet::new();
    let mut count = 0;
    let (mut ingress, mut egress) = (0u64, 0u64);
    for g in groups {
        count += 1;
        isps.insert(g.key.isp.as_str());
        for p in g.in_month(month) {
            let cell = cells.entry(p.interval_start).or_default();
            cell.0 += p.bytes(direction);
            cell.1 += p.capacity_bps;
            ingress += p.ingress_bytes;
            egress += p.egress_bytes;
        }
    }
    if cells.is_empty() {
        return Ok(None);
    }
    let values = cells
        .values()
        .map(|&(b, c)| metrics::utilization(b, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(AggregateView {
        name: name.to_string(),
        isps: isps.len(),
        groups: count,
        ingress_bytes: ingress,
        egress_bytes: egress,
        peak_utilization: values.iter().copied().fold(f64::MIN, f64::max),
        p95_utilization: metrics::percentile(&values, 95.0)?,
    }))
}

/// The released aggregate views for one month. Per-ISP views cover every
/// group of the ISP; per-region and global views only regions with enough
/// ISPs; the link- and capacity-weighted distributions cover all groups.
pub fn summarize_public(
    dataset: &UtilizationDataset,
    policy: &DisclosurePolicy,
    month: Month,
    direction: Direction,
) -> Result<PublicSummary, MetricsError> {
    if dataset.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let groups = dataset.groups();

    let mut per_isp = Vec::new();
    for isp in dataset.isps() {
        if let Some(view) = pooled_view(isp, groups.iter().filter(|g| g.key.isp == isp), month, direction)? {
            per_isp.push(view);
        }
    }

    let mut per_region = Vec::new();
    let mut qualifying = BTreeSet::new();
    for region in dataset.regions() {
        let members = || groups.iter().filter(move |g| g.key.region == region);
        let isps: BTreeSet<_> = members().map(|g| g.key.isp.as_str()).collect();
        if isps.len() < policy.min_isps_per_region {
            continue;
        }
        if let Some(view) = pooled_view(region, members(), month, direction)? {
            qualifying.insert(region);
            per_region.push(view);
        }
    }
    let global = pooled_view(
        "all",
        groups.iter().filter(|g| qualifying.contains(g.key.region.as_str())),
        month,
        direction,
    )?;

    Ok(PublicSummary {
        month: month.to_string(),
        min_isps_per_region: policy.min_isps_per_region,
        per_isp,
        per_region,
        global,
        per_link_cdf: dataset.weighted_peak_distribution(Weighting::PerLink, month, direction)?,
        by_capacity_cdf: dataset.weighted_peak_distribution(Weighting::ByCapacity, month, direction)?,
    })
}
