// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Sampled-flow estimates against interface counters, link by link.

use std::collections::BTreeMap;

use serde::Serialize;

use super::snmp::SnmpSeries;
use super::SimError;
use crate::inventory::{Inventory, LinkId};
use crate::ipfix::FlowRecord;
use crate::pipeline::SamplingPlan;

/// The smallest fleet the comparison is meaningful for.
pub const MIN_COMPARE_LINKS: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkRatio {
    pub link: LinkId,
    pub ipfix_bytes: u64,
    pub snmp_bytes: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStats {
    pub links: Vec<LinkRatio>,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n - 1).
    pub std: f64,
}

impl RatioStats {
    pub fn from_links(links: Vec<LinkRatio>) -> Option<Self> {
        if links.is_empty() {
            return None;
        }
        let mut r: Vec<f64> = links.iter().map(|l| l.ratio).collect();
        let n = r.len() as f64;
        let mean = r.iter().sum::<f64>() / n;
        let std = if r.len() > 1 {
            (r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        r.sort_by(f64::total_cmp);
        let mid = r.len() / 2;
        let median = if r.len() % 2 == 1 {
            r[mid]
        } else {
            (r[mid - 1] + r[mid]) / 2.0
        };
        Some(Self {
            links,
            mean,
            median,
            std,
        })
    }
}

/// Per-link ratio of sampling-normalized flow bytes to counter bytes over
/// the run. Links whose counters saw nothing are left out. Fails if fewer
/// than `min_links` links remain.
pub fn compare_ipfix_snmp(
    records: &[FlowRecord],
    inventory: &Inventory,
    plan: &SamplingPlan,
    snmp: &SnmpSeries,
    min_links: usize,
) -> Result<RatioStats, SimError> {
    let mut estimated: BTreeMap<LinkId, u64> = BTreeMap::new();
    for rec in records {
        let Some(link) = inventory.resolve_link(rec.exporter, rec.link_interface()) else {
            continue;
        };
        let Some(group) = inventory.group_of_link(link).and_then(|g| inventory.group(g)) else {
            continue;
        };
        let factor = plan.for_isp(&group.isp).factor() as u64;
        *estimated.entry(link).or_default() += rec.octet_delta.saturating_mul(factor);
    }
    let links: Vec<LinkRatio> = snmp
        .links
        .iter()
        .filter_map(|(&link, c)| {
            let snmp_bytes = c.total();
            (snmp_bytes > 0).then(|| {
                let ipfix_bytes = estimated.get(&link).copied().unwrap_or(0);
                LinkRatio {
                    link,
                    ipfix_bytes,
                    snmp_bytes,
                    ratio: ipfix_bytes as f64 / snmp_bytes as f64,
                }
            })
        })
        .collect();
    if links.len() < min_links.max(1) {
        return Err(SimError::InsufficientLinks {
            found: links.len(),
            required: min_links.max(1),
        });
    }
    Ok(RatioStats::from_links(links).expect("non-empty"))
}
