// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Router-side packet sampling and flow record assembly.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::model::splitmix64;
use super::traffic::{Packet, PacketStream, SimFlow};
use crate::inventory::LinkId;
use crate::ipfix::{Direction, FlowRecord};
use crate::pipeline::{SamplingConfig, SamplingMode};

/// A record is closed once it has been open this long.
pub const ACTIVE_TIMEOUT_MS: u64 = 60_000;

/// Samples every packet of `stream` under `cfg` and returns the flow
/// records the exporters would emit, with sampled (not normalized) counts.
/// Flows on links without an interface mapping produce no records.
///
/// Random mode keeps each packet independently with probability 1/N.
/// Deterministic mode keeps every Nth packet per (link, direction), in
/// arrival order, starting from a seed-dependent phase.
pub fn sample_stream(stream: &PacketStream, cfg: &SamplingConfig, seed: u64) -> Vec<FlowRecord> {
    let interfaces: BTreeMap<LinkId, (u32, u32)> = stream
        .links
        .iter()
        .filter_map(|l| l.interface.map(|i| (l.link, i)))
        .collect();
    let sampled: Vec<Vec<Packet>> = match cfg.mode {
        _ if cfg.factor() == 1 => stream.flows.iter().map(|f| stream.packets(f).collect()).collect(),
        SamplingMode::Random => stream
            .flows
            .iter()
            .map(|f| sample_random(stream, f, cfg.factor(), seed))
            .collect(),
        SamplingMode::Deterministic => sample_deterministic(stream, cfg.factor(), seed),
    };
    let mut records = Vec::new();
    for (flow, packets) in stream.flows.iter().zip(&sampled) {
        if let Some(&(exporter, interface)) = interfaces.get(&flow.link) {
            build_records(flow, packets, exporter, interface, &mut records);
        }
    }
    records
}

fn sample_random(stream: &PacketStream, flow: &SimFlow, factor: u32, seed: u64) -> Vec<Packet> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ flow.seed));
    let gap = Geometric::new(1.0 / factor as f64).expect("valid probability");
    let mut out = Vec::new();
    let mut i = flow.first.saturating_add(gap.sample(&mut rng));
    while i < flow.end {
        out.push(stream.packet(flow, i));
        i = i.saturating_add(1).saturating_add(gap.sample(&mut rng));
    }
    out
}

fn sample_deterministic(stream: &PacketStream, factor: u32, seed: u64) -> Vec<Vec<Packet>> {
    let mut by_interface: BTreeMap<(LinkId, Direction), Vec<usize>> = BTreeMap::new();
    for (idx, f) in stream.flows.iter().enumerate() {
        by_interface.entry((f.link, f.direction)).or_default().push(idx);
    }
    let mut out = vec![Vec::new(); stream.flows.len()];
    let n = factor as u64;
    for ((link, direction), flows) in by_interface {
        let dir_bit = matches!(direction, Direction::Egress) as u64;
        let mut countdown = splitmix64(seed ^ ((link.0 as u64) << 1 | dir_bit)) % n;
        let mut heap: BinaryHeap<Reverse<(u64, usize, u64)>> = flows
            .iter()
            .map(|&idx| {
                let f = &stream.flows[idx];
                Reverse((f.packet_time(f.first), idx, f.first))
            })
            .collect();
        while let Some(Reverse((ts, idx, i))) = heap.pop() {
            let f = &stream.flows[idx];
            if countdown == 0 {
                out[idx].push(Packet {
                    ts_ms: ts,
                    bytes: stream.packet_size(f, i),
                });
                countdown = n - 1;
            } else {
                countdown -= 1;
            }
            if i + 1 < f.end {
                heap.push(Reverse((f.packet_time(i + 1), idx, i + 1)));
            }
        }
    }
    out
}

fn build_records(flow: &SimFlow, packets: &[Packet], exporter: u32, interface: u32, out: &mut Vec<FlowRecord>) {
    let (input_interface, output_interface) = match flow.direction {
        Direction::Ingress => (interface, 0),
        Direction::Egress => (0, interface),
    };
    let mut open: Option<FlowRecord> = None;
    for p in packets {
        if let Some(rec) = open.as_mut() {
            if p.ts_ms - rec.flow_start_ms < ACTIVE_TIMEOUT_MS {
                rec.octet_delta += p.bytes as u64;
                rec.packet_delta += 1;
                rec.flow_end_ms = p.ts_ms;
                continue;
            }
            out.push(*rec);
        }
        open = Some(FlowRecord {
            octet_delta: p.bytes as u64,
            packet_delta: 1,
            flow_start_ms: p.ts_ms,
            flow_end_ms: p.ts_ms,
            input_interface,
            output_interface,
            direction: flow.direction,
            exporter,
        });
    }
    out.extend(open);
}
