// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeMap;

use interconnect::inventory::{GroupId, Inventory, LinkId};
use interconnect::ipfix::Direction;
use interconnect::pipeline::{SamplingConfig, SamplingPlan};
use interconnect::sim::{
    compare_ipfix_snmp, generate, lag_assign, sample_stream, snmp_emulate, Fleet, FlowClass, FlowKey, PacketStream,
    SimFlow, SnmpConfig, TrafficModel,
};

const START: i64 = 1_454_284_800;

fn one_link() -> Inventory {
    Inventory::from_toml(
        r#"
        [[group]]
        id = 1
        isp = "isp-a"
        region = "chicago"
        partner = "video-1"
        links = [{ id = 1, capacity_bps = 1_000_000 }]
        [[interface]]
        exporter = 10
        interface = 1
        link = 1
        "#,
    )
    .unwrap()
}

/// A generated stream whose flows are replaced by `flows`.
fn stream_with(flows: Vec<SimFlow>) -> PacketStream {
    let (mut stream, _) = generate(&TrafficModel::default(), &one_link(), START, 3600).unwrap();
    stream.flows = flows;
    stream
}

fn sim_flow(seed: u64, packets: u64, start_ms: u64, duration_ms: u64) -> SimFlow {
    SimFlow {
        key_hash: seed,
        group: GroupId(1),
        link: LinkId(1),
        direction: Direction::Ingress,
        class: FlowClass::Tail,
        start_ms,
        duration_ms,
        packets,
        first: 0,
        end: packets,
        seed,
    }
}

fn estimated_bytes(stream: &PacketStream, cfg: &SamplingConfig, seed: u64) -> u64 {
    sample_stream(stream, cfg, seed)
        .iter()
        .map(|r| r.octet_delta)
        .sum::<u64>()
        * cfg.factor() as u64
}

#[test]
fn long_flows_are_estimated_without_bias() {
    let cfg = SamplingConfig::random(8000).unwrap();
    // A 10^6-packet flow: 125 expected samples per run.
    let stream = stream_with(vec![sim_flow(1, 1_000_000, START as u64 * 1000, 3_000_000)]);
    let truth = stream.total_bytes() as f64;
    let ratios: Vec<f64> = (0..400)
        .map(|s| estimated_bytes(&stream, &cfg, s) as f64 / truth)
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 1.0).abs() < 0.02, "mean ratio {mean}");
    assert!(ratios.iter().all(|r| (r - 1.0).abs() < 0.5));

    // A 10^4-packet flow is mostly missed, but unbiased over many seeds.
    let stream = stream_with(vec![sim_flow(2, 10_000, START as u64 * 1000, 600_000)]);
    let truth = stream.total_bytes() as f64;
    let total: u64 = (0..20_000).map(|s| estimated_bytes(&stream, &cfg, s)).sum();
    let mean = total as f64 / 20_000.0 / truth;
    assert!((mean - 1.0).abs() < 0.02, "mean ratio {mean}");
}

#[test]
fn single_packet_flows_at_one_in_a_thousand() {
    let flows: Vec<SimFlow> = (0..200_000)
        .map(|i| sim_flow(i, 1, START as u64 * 1000 + (i % 3_600_000), 0))
        .collect();
    let stream = stream_with(flows);
    let records = sample_stream(&stream, &SamplingConfig::random(1000).unwrap(), 4);
    // Binomial(200000, 1/1000): mean 200, sd about 14.
    assert!((150..=250).contains(&records.len()), "{} records", records.len());
    assert!(records.iter().all(|r| r.packet_delta == 1));
}

#[test]
fn sampling_error_grows_with_the_factor() {
    let fleet = Fleet::builtin("sampling-study").unwrap();
    let mut model = fleet.model(&TrafficModel::default());
    model.seed = 11;
    let (stream, _) = generate(&model, &fleet.simulated, START + 12 * 3600, 3600).unwrap();
    let snmp = snmp_emulate(&stream, &SnmpConfig::default()).unwrap();
    let stats = |cfg: SamplingConfig| {
        let records = sample_stream(&stream, &cfg, 99);
        compare_ipfix_snmp(&records, &fleet.simulated, &SamplingPlan::uniform(cfg), &snmp, 250).unwrap()
    };

    let exact = stats(SamplingConfig::unsampled());
    assert!(exact.links.iter().all(|l| l.ratio == 1.0));
    assert_eq!((exact.mean, exact.std), (1.0, 0.0));

    let stds: Vec<f64> = [1000, 2000, 4000, 8000]
        .into_iter()
        .map(|n| stats(SamplingConfig::random(n).unwrap()).std)
        .collect();
    assert!(stds.windows(2).all(|w| w[0] < w[1]), "{stds:?}");
}

#[test]
fn lag_hash_spreads_and_pins_flows() {
    let links: Vec<LinkId> = (0..4).map(LinkId).collect();
    let mut rng = common::rng(5);
    let keys: Vec<FlowKey> = (0..100_000).map(|_| FlowKey::random(&mut rng)).collect();
    let mut counts = [0usize; 4];
    for k in &keys {
        counts[lag_assign(k, &links)] += 1;
    }
    for c in counts {
        let share = c as f64 / keys.len() as f64;
        assert!((0.24..=0.26).contains(&share), "{counts:?}");
    }
    for k in keys.iter().take(1000) {
        assert_eq!(lag_assign(k, &links), lag_assign(&FlowKey { ..*k }, &links));
    }
}

#[test]
fn counters_match_packet_oracle() {
    let fleet = Fleet::builtin("demo").unwrap();
    let model = fleet.model(&TrafficModel::default());
    let (stream, truth) = generate(&model, &fleet.simulated, START, 3600).unwrap();

    let mut oracle: BTreeMap<(LinkId, Direction, i64), (u64, u64)> = BTreeMap::new();
    for f in &stream.flows {
        for p in stream.packets(f) {
            let t = (p.ts_ms / 1000) as i64;
            let cell = oracle
                .entry((f.link, f.direction, t - (t - START).rem_euclid(300)))
                .or_default();
            cell.0 += u64::from(p.bytes);
            cell.1 += 1;
        }
    }
    // Exact ingress and egress byte totals agree with the ground truth.
    assert_eq!(
        oracle.values().map(|c| c.0).sum::<u64>(),
        truth.total(Direction::Ingress) + truth.total(Direction::Egress)
    );

    for overhead in [0, 18] {
        let snmp = snmp_emulate(
            &stream,
            &SnmpConfig {
                poll_secs: 300,
                frame_overhead_bytes: overhead,
            },
        )
        .unwrap();
        for l in &stream.links {
            for dir in [Direction::Ingress, Direction::Egress] {
                for k in 0..12 {
                    let t = START + k * 300;
                    let (bytes, packets) = oracle.get(&(l.link, dir, t)).copied().unwrap_or_default();
                    let expect = bytes + packets * u64::from(overhead);
                    assert_eq!(snmp.delta(l.link, dir, t, t + 300), Some(expect));
                }
            }
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let fleet = Fleet::builtin("demo").unwrap();
    let mut model = fleet.model(&TrafficModel::default());
    model.seed = 21;
    let (a, ta) = generate(&model, &fleet.simulated, START, 1800).unwrap();
    let (b, tb) = generate(&model, &fleet.simulated, START, 1800).unwrap();
    assert_eq!(a.flows, b.flows);
    assert_eq!(ta.total(Direction::Ingress), tb.total(Direction::Ingress));
    model.seed = 22;
    let (c, _) = generate(&model, &fleet.simulated, START, 1800).unwrap();
    assert_ne!(a.flows, c.flows);
}
