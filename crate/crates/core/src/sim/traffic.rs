// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Flow arrivals, LAG member selection, and per-packet ground truth.
//!
//! Flows are stored, packets are not: a packet's timestamp and size are
//! pure functions of its flow and index, so every consumer (truth, SNMP,
//! sampling) regenerates the same packets independently.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{splitmix64, CompiledModel, FlowClass, SizeSampler, TrafficModel};
use super::SimError;
use crate::inventory::{GroupId, Inventory, LinkId};
use crate::ipfix::Direction;
use crate::pipeline::{Aggregator, Contribution, Window};
use crate::time::{INTERVAL_MS, INTERVAL_SECS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowKey {
    pub src_addr: u32,
    pub dst_addr: u32,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: u8,
}

impl FlowKey {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            src_addr: rng.gen(),
            dst_addr: rng.gen(),
            src_port: rng.gen(),
            dst_port: rng.gen(),
            protocol: if rng.gen_bool(0.8) { 6 } else { 17 },
        }
    }

    pub fn hash64(&self) -> u64 {
        let a = ((self.src_addr as u64) << 32) | self.dst_addr as u64;
        let b = ((self.src_port as u64) << 24) | ((self.dst_port as u64) << 8) | self.protocol as u64;
        splitmix64(splitmix64(a) ^ b)
    }
}

/// Member link index for a flow: a hash of the 5-tuple modulo the member
/// count, so every packet of a flow crosses the same link.
///
/// # Panics
///
/// If `links` is empty.
pub fn lag_assign(key: &FlowKey, links: &[LinkId]) -> usize {
    assert!(!links.is_empty(), "lag_assign needs at least one link");
    (key.hash64() % links.len() as u64) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub ts_ms: u64,
    pub bytes: u32,
}

/// One simulated flow. Packets `first..end` of the nominal `packets` fall
/// inside the run; the rest started before or end after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimFlow {
    pub key_hash: u64,
    pub group: GroupId,
    pub link: LinkId,
    pub direction: Direction,
    pub class: FlowClass,
    pub start_ms: u64,
    pub duration_ms: u64,
    pub packets: u64,
    pub first: u64,
    pub end: u64,
    pub seed: u64,
}

impl SimFlow {
    /// Packets are evenly spaced from start to start + duration.
    #[inline]
    pub fn packet_time(&self, index: u64) -> u64 {
        if self.packets <= 1 {
            self.start_ms
        } else {
            self.start_ms + (index as u128 * self.duration_ms as u128 / (self.packets - 1) as u128) as u64
        }
    }

    /// First packet index with a timestamp at or after `t_ms`.
    fn index_at(&self, t_ms: u64) -> u64 {
        if t_ms <= self.start_ms {
            0
        } else if self.duration_ms == 0 {
            self.packets
        } else {
            let num = (t_ms - self.start_ms) as u128 * (self.packets - 1) as u128;
            (num.div_ceil(self.duration_ms as u128) as u64).min(self.packets)
        }
    }

    pub fn emitted_packets(&self) -> u64 {
        self.end - self.first
    }
}

/// A simulated link as the exporters see it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimLink {
    pub group: GroupId,
    pub link: LinkId,
    /// (exporter, interface) if the link is mapped; unmapped links carry
    /// traffic but never appear in flow export.
    pub interface: Option<(u32, u32)>,
}

#[derive(Debug, Clone)]
pub struct PacketStream {
    pub start: i64,
    pub duration_secs: i64,
    pub links: Vec<SimLink>,
    pub flows: Vec<SimFlow>,
    sizes: [SizeSampler; 2],
}

impl PacketStream {
    pub fn window(&self) -> Window {
        Window::new(self.start, self.start + self.duration_secs).expect("validated at generation")
    }

    pub fn start_ms(&self) -> u64 {
        self.start as u64 * 1000
    }

    pub fn end_ms(&self) -> u64 {
        (self.start + self.duration_secs) as u64 * 1000
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    #[inline]
    pub fn packet_size(&self, flow: &SimFlow, index: u64) -> u32 {
        let sampler = match flow.class {
            FlowClass::Body => &self.sizes[0],
            FlowClass::Tail => &self.sizes[1],
        };
        sampler.size(flow.seed, index)
    }

    #[inline]
    pub fn packet(&self, flow: &SimFlow, index: u64) -> Packet {
        Packet {
            ts_ms: flow.packet_time(index),
            bytes: self.packet_size(flow, index),
        }
    }

    /// The in-run packets of `flow`, in time order.
    pub fn packets<'a>(&'a self, flow: &'a SimFlow) -> impl Iterator<Item = Packet> + 'a {
        (flow.first..flow.end).map(move |i| self.packet(flow, i))
    }

    pub fn packet_count(&self) -> u64 {
        self.flows.iter().map(SimFlow::emitted_packets).sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.flows
            .iter()
            .flat_map(|f| self.packets(f))
            .map(|p| p.bytes as u64)
            .sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupTruth {
    /// Bytes per interval, indexed from the run start.
    pub ingress: Vec<u64>,
    pub egress: Vec<u64>,
    pub packets: u64,
    pub flows: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkTotals {
    pub ingress: u64,
    pub egress: u64,
    pub packets: u64,
}

impl LinkTotals {
    pub fn bytes(&self, direction: Direction) -> u64 {
        match direction {
            Direction::Ingress => self.ingress,
            Direction::Egress => self.egress,
        }
    }
}

/// Exact byte counts of every packet the run emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub start: i64,
    pub intervals: usize,
    pub groups: BTreeMap<GroupId, GroupTruth>,
    pub links: BTreeMap<LinkId, LinkTotals>,
}

impl GroundTruth {
    pub fn window(&self) -> Window {
        Window::new(self.start, self.start + self.intervals as i64 * INTERVAL_SECS).expect("aligned")
    }

    pub fn bytes(&self, group: GroupId, interval_start: i64, direction: Direction) -> u64 {
        let Some(g) = self.groups.get(&group) else { return 0 };
        let offset = interval_start - self.start;
        if offset < 0 || offset % INTERVAL_SECS != 0 {
            return 0;
        }
        let series = match direction {
            Direction::Ingress => &g.ingress,
            Direction::Egress => &g.egress,
        };
        series.get((offset / INTERVAL_SECS) as usize).copied().unwrap_or(0)
    }

    pub fn group_total(&self, group: GroupId, direction: Direction) -> u64 {
        self.groups
            .get(&group)
            .map(|g| match direction {
                Direction::Ingress => g.ingress.iter().sum(),
                Direction::Egress => g.egress.iter().sum(),
            })
            .unwrap_or(0)
    }

    pub fn total(&self, direction: Direction) -> u64 {
        self.groups.keys().map(|&g| self.group_total(g, direction)).sum()
    }

    pub fn packets(&self) -> u64 {
        self.groups.values().map(|g| g.packets).sum()
    }

    /// Truth as pipeline aggregates, one cell per non-zero (group, interval,
    /// direction).
    pub fn to_aggregator(&self) -> Aggregator {
        let mut agg = Aggregator::new();
        for (&group, g) in &self.groups {
            for (direction, series) in [(Direction::Ingress, &g.ingress), (Direction::Egress, &g.egress)] {
                for (i, &bytes) in series.iter().enumerate() {
                    if bytes > 0 {
                        agg.add(Contribution {
                            group,
                            direction,
                            interval_start: self.start + i as i64 * INTERVAL_SECS,
                            bytes,
                        });
                    }
                }
            }
        }
        agg
    }
}

fn check_run(start: i64, duration_secs: i64) -> Result<(), SimError> {
    if duration_secs <= 0 || duration_secs % INTERVAL_SECS != 0 || start % INTERVAL_SECS != 0 || start < 0 {
        return Err(SimError::Duration { start, duration_secs });
    }
    Ok(())
}

struct GroupRun {
    flows: Vec<SimFlow>,
    truth: GroupTruth,
    links: Vec<(LinkId, LinkTotals)>,
}

fn group_seed(seed: u64, group: GroupId) -> u64 {
    splitmix64(seed ^ splitmix64(0x5EED_0000_0000_0000 | group.0 as u64))
}

// Draws one group's flows, then replays their packets into the truth.
// With `keep_flows` false the flows are dropped once counted.
fn run_group(
    model: &CompiledModel,
    inventory: &Inventory,
    group: GroupId,
    start: i64,
    duration_secs: i64,
    keep_flows: bool,
) -> GroupRun {
    let m = &model.model;
    let links: Vec<LinkId> = inventory
        .group(group)
        .map(|g| g.monitored_links().map(|l| l.id).collect())
        .unwrap_or_default();
    let intervals = (duration_secs / INTERVAL_SECS) as usize;
    let mut truth = GroupTruth {
        ingress: vec![0; intervals],
        egress: vec![0; intervals],
        ..Default::default()
    };
    let mut link_totals: BTreeMap<LinkId, LinkTotals> = links.iter().map(|&l| (l, LinkTotals::default())).collect();
    let mut flows = Vec::new();
    if links.is_empty() || m.arrival_scale == 0.0 {
        return GroupRun {
            flows,
            truth,
            links: link_totals.into_iter().collect(),
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(group_seed(m.seed, group));
    let run_start_ms = start as u64 * 1000;
    let run_end_ms = (start + duration_secs) as u64 * 1000;
    let warmup = (m.warmup_secs as i64).min(start) / INTERVAL_SECS * INTERVAL_SECS;
    let peak = m.peak_for(group.0);
    let ingress_share = 1.0 / (1.0 + m.egress_ratio);
    let sizes = [model.body_sizes, model.tail_sizes];

    let mut t = start - warmup;
    while t < start + duration_secs {
        let capacity = inventory.group_capacity_at(group, t).unwrap_or(0) as f64;
        let ingress_bytes = peak * m.diurnal.level(t + INTERVAL_SECS / 2) * capacity * INTERVAL_SECS as f64 / 8.0;
        let lambda = ingress_bytes * (1.0 + m.egress_ratio) / model.mean_flow_bytes() * m.arrival_scale;
        let n = if lambda > 0.0 {
            Poisson::new(lambda).expect("positive rate").sample(&mut rng) as u64
        } else {
            0
        };
        for _ in 0..n {
            let start_ms = t as u64 * 1000 + rng.gen_range(0..INTERVAL_MS);
            let shape = model.draw_flow(&mut rng);
            let direction = if rng.gen_bool(ingress_share) {
                Direction::Ingress
            } else {
                Direction::Egress
            };
            let key = FlowKey::random(&mut rng);
            let seed = rng.gen();
            let mut flow = SimFlow {
                key_hash: key.hash64(),
                group,
                link: links[lag_assign(&key, &links)],
                direction,
                class: shape.class,
                start_ms,
                duration_ms: shape.duration_ms,
                packets: shape.packets,
                first: 0,
                end: 0,
                seed,
            };
            flow.first = flow.index_at(run_start_ms);
            flow.end = flow.index_at(run_end_ms);
            if flow.first >= flow.end {
                continue;
            }
            truth.flows += 1;
            let totals = link_totals.get_mut(&flow.link).expect("member link");
            let sampler = &sizes[(flow.class == FlowClass::Tail) as usize];
            let series = match direction {
                Direction::Ingress => &mut truth.ingress,
                Direction::Egress => &mut truth.egress,
            };
            let mut bytes = 0u64;
            for i in flow.first..flow.end {
                let ts = flow.packet_time(i);
                let size = sampler.size(flow.seed, i) as u64;
                series[((ts - run_start_ms) / INTERVAL_MS) as usize] += size;
                bytes += size;
            }
            let emitted = flow.emitted_packets();
            truth.packets += emitted;
            totals.packets += emitted;
            match direction {
                Direction::Ingress => totals.ingress += bytes,
                Direction::Egress => totals.egress += bytes,
            }
            if keep_flows {
                flows.push(flow);
            }
        }
        t += INTERVAL_SECS;
    }
    flows.sort_by_key(|f| f.start_ms);
    GroupRun {
        flows,
        truth,
        links: link_totals.into_iter().collect(),
    }
}

fn sim_links(inventory: &Inventory) -> Vec<SimLink> {
    inventory
        .groups()
        .iter()
        .flat_map(|g| {
            g.monitored_links().map(move |l| SimLink {
                group: g.id,
                link: l.id,
                interface: inventory.interface_of_link(l.id),
            })
        })
        .collect()
}

fn run_all(
    model: &TrafficModel,
    fleet: &Inventory,
    start: i64,
    duration_secs: i64,
    keep_flows: bool,
) -> Result<(Vec<GroupRun>, CompiledModel), SimError> {
    check_run(start, duration_secs)?;
    let compiled = model.compile()?;
    let runs = fleet
        .groups()
        .par_iter()
        .map(|g| run_group(&compiled, fleet, g.id, start, duration_secs, keep_flows))
        .collect();
    Ok((runs, compiled))
}

fn assemble_truth(fleet: &Inventory, runs: &[GroupRun], start: i64, duration_secs: i64) -> GroundTruth {
    let mut truth = GroundTruth {
        start,
        intervals: (duration_secs / INTERVAL_SECS) as usize,
        groups: BTreeMap::new(),
        links: BTreeMap::new(),
    };
    for (g, run) in fleet.groups().iter().zip(runs) {
        truth.groups.insert(g.id, run.truth.clone());
        truth.links.extend(run.links.iter().copied());
    }
    truth
}

/// Simulates `duration_secs` of traffic from `start` (unix seconds, both
/// multiples of 300) over every monitored link of `fleet`. Each group draws
/// from its own sub-seed, so output does not depend on scheduling.
pub fn generate(
    model: &TrafficModel,
    fleet: &Inventory,
    start: i64,
    duration_secs: i64,
) -> Result<(PacketStream, GroundTruth), SimError> {
    let (runs, compiled) = run_all(model, fleet, start, duration_secs, true)?;
    let truth = assemble_truth(fleet, &runs, start, duration_secs);
    let flows = runs.into_iter().flat_map(|r| r.flows).collect();
    let stream = PacketStream {
        start,
        duration_secs,
        links: sim_links(fleet),
        flows,
        sizes: [compiled.body_sizes, compiled.tail_sizes],
    };
    Ok((stream, truth))
}

/// The ground truth `generate` would return, without keeping the flows.
pub fn generate_truth(
    model: &TrafficModel,
    fleet: &Inventory,
    start: i64,
    duration_secs: i64,
) -> Result<GroundTruth, SimError> {
    let (runs, _) = run_all(model, fleet, start, duration_secs, false)?;
    Ok(assemble_truth(fleet, &runs, start, duration_secs))
}
