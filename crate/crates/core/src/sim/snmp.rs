// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Cumulative per-link octet counters, as an SNMP poller would read them.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::traffic::PacketStream;
use super::SimError;
use crate::inventory::LinkId;
use crate::ipfix::Direction;
use crate::time::format_iso;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnmpConfig {
    pub poll_secs: u64,
    /// Octets counted per packet on top of its IP length. Interface counters
    /// count link-layer frames, which flow export does not; 18 models
    /// Ethernet header plus FCS.
    pub frame_overhead_bytes: u32,
}

impl Default for SnmpConfig {
    fn default() -> Self {
        Self {
            poll_secs: 300,
            frame_overhead_bytes: 0,
        }
    }
}

impl SnmpConfig {
    pub fn every(poll_secs: u64) -> Self {
        Self {
            poll_secs,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkCounters {
    /// Counter value at each poll instant; index 0 is the run start.
    pub in_octets: Vec<u64>,
    pub out_octets: Vec<u64>,
}

impl LinkCounters {
    pub fn series(&self, direction: Direction) -> &[u64] {
        match direction {
            Direction::Ingress => &self.in_octets,
            Direction::Egress => &self.out_octets,
        }
    }

    /// Octets counted over the whole run, both directions.
    pub fn total(&self) -> u64 {
        let span = |s: &[u64]| s.last().copied().unwrap_or(0) - s.first().copied().unwrap_or(0);
        span(&self.in_octets) + span(&self.out_octets)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnmpSeries {
    pub start: i64,
    pub poll_secs: u64,
    pub links: BTreeMap<LinkId, LinkCounters>,
}

impl SnmpSeries {
    pub fn poll_times(&self) -> impl Iterator<Item = i64> + '_ {
        let n = self.links.values().next().map(|c| c.in_octets.len()).unwrap_or(0);
        (0..n).map(|k| self.start + (k as u64 * self.poll_secs) as i64)
    }

    /// Counter difference between two poll instants.
    pub fn delta(&self, link: LinkId, direction: Direction, from: i64, to: i64) -> Option<u64> {
        let c = self.links.get(&link)?;
        let idx = |t: i64| {
            let off = t - self.start;
            (off >= 0 && (off as u64).is_multiple_of(self.poll_secs)).then_some((off as u64 / self.poll_secs) as usize)
        };
        let s = c.series(direction);
        Some(s.get(idx(to)?)? - s.get(idx(from)?)?)
    }

    /// CSV with columns timestamp,link_id,in_octets,out_octets.
    pub fn write_csv(&self, writer: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["timestamp", "link_id", "in_octets", "out_octets"])?;
        for (link, c) in &self.links {
            for (k, t) in self.poll_times().enumerate() {
                w.write_record([
                    format_iso(t),
                    link.0.to_string(),
                    c.in_octets[k].to_string(),
                    c.out_octets[k].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Polls every simulated link at the run start and every `poll_secs` after.
/// A counter at instant t covers the packets sent before t.
pub fn snmp_emulate(stream: &PacketStream, cfg: &SnmpConfig) -> Result<SnmpSeries, SimError> {
    if cfg.poll_secs == 0 {
        return Err(SimError::PollInterval);
    }
    let poll_ms = cfg.poll_secs * 1000;
    let polls = (stream.duration_secs as u64).div_ceil(cfg.poll_secs) as usize + 1;
    let mut links: BTreeMap<LinkId, LinkCounters> = stream
        .links
        .iter()
        .map(|l| {
            (
                l.link,
                LinkCounters {
                    in_octets: vec![0; polls],
                    out_octets: vec![0; polls],
                },
            )
        })
        .collect();
    let start_ms = stream.start_ms();
    let overhead = cfg.frame_overhead_bytes as u64;
    for f in &stream.flows {
        let c = links.get_mut(&f.link).expect("flow on a simulated link");
        let series = match f.direction {
            Direction::Ingress => &mut c.in_octets,
            Direction::Egress => &mut c.out_octets,
        };
        for p in stream.packets(f) {
            series[((p.ts_ms - start_ms) / poll_ms) as usize + 1] += p.bytes as u64 + overhead;
        }
    }
    for c in links.values_mut() {
        for s in [&mut c.in_octets, &mut c.out_octets] {
            for k in 1..s.len() {
                s[k] += s[k - 1];
            }
        }
    }
    Ok(SnmpSeries {
        start: stream.start,
        poll_secs: cfg.poll_secs,
        links,
    })
}
