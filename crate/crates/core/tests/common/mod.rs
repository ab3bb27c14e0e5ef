// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Generators and reference implementations shared by the integration tests.
//! The references are written from the definitions, independently of the
//! library code they check.

#![allow(dead_code)]

use interconnect::ipfix::{DataSet, FieldSpecifier, FlowTemplate, IpfixMessage, Set};
use interconnect::pipeline::NormalizedFlow;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_template(rng: &mut impl Rng) -> FlowTemplate {
    let fields = (0..rng.gen_range(1..=8))
        .map(|_| FieldSpecifier {
            element_id: rng.gen_range(1..0x8000),
            length: rng.gen_range(1..=16),
            enterprise: rng.gen_bool(0.2).then(|| rng.gen()),
        })
        .collect();
    FlowTemplate::new(rng.gen_range(256..=u16::MAX), fields).expect("generated template is valid")
}

/// A valid message mixing template, data and opaque sets.
pub fn random_message(rng: &mut impl Rng) -> IpfixMessage {
    let sets = (0..rng.gen_range(0..=6))
        .map(|_| match rng.gen_range(0..3) {
            0 => Set::Template((0..rng.gen_range(1..=3)).map(|_| random_template(rng)).collect()),
            1 => Set::Data(DataSet {
                template_id: rng.gen_range(256..=u16::MAX),
                records: (0..rng.gen_range(0..=200)).map(|_| rng.gen()).collect(),
            }),
            _ => {
                let set_id = *[0u16, 1, 3, 4, 100, 255].choose(rng).unwrap();
                Set::Opaque {
                    set_id,
                    body: (0..rng.gen_range(0..=64)).map(|_| rng.gen()).collect(),
                }
            }
        })
        .collect();
    IpfixMessage {
        export_time: rng.gen(),
        sequence: rng.gen(),
        observation_domain: rng.gen(),
        sets,
    }
}

/// Random damage: bit flips, byte overwrites, truncation, insertion, and
/// rewritten length fields.
pub fn mutate(buf: &mut Vec<u8>, rng: &mut impl Rng) {
    for _ in 0..rng.gen_range(1..=4) {
        if buf.is_empty() {
            buf.push(rng.gen());
            continue;
        }
        let i = rng.gen_range(0..buf.len());
        match rng.gen_range(0..6) {
            0 => buf[i] ^= 1 << rng.gen_range(0..8),
            1 => buf[i] = rng.gen(),
            2 => buf.truncate(i),
            3 => buf.insert(i, rng.gen()),
            4 => {
                // Header or set length field.
                let at = if rng.gen_bool(0.5) { 2 } else { i & !1 };
                if at + 1 < buf.len() {
                    let v: u16 = rng.gen();
                    buf[at..at + 2].copy_from_slice(&v.to_be_bytes());
                }
            }
            _ => {
                let extra: Vec<u8> = (0..rng.gen_range(1..32)).map(|_| rng.gen()).collect();
                buf.extend(extra);
            }
        }
    }
}

/// Nearest-rank percentile for `p = k / 10`: the smallest sample `v` such
/// that at least `p` percent of the samples are `<= v`.
pub fn percentile_oracle(values: &[f64], tenths: u32) -> f64 {
    let n = values.len() as u64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .copied()
        .find(|v| {
            let at_most = values.iter().filter(|x| *x <= v).count() as u64;
            at_most * 1000 >= u64::from(tenths) * n
        })
        .unwrap_or(sorted[0])
}

/// Per-interval shares of a flow, computed one millisecond at a time: each
/// millisecond of the flow carries `est_bytes / duration` bytes, and the
/// largest-remainder rule settles the integer split.
pub fn attribution_oracle(flow: &NormalizedFlow) -> Vec<(i64, u64)> {
    let (start, end) = (flow.flow_start_ms, flow.flow_end_ms);
    if end == start {
        return vec![(((start / 1000) as i64).div_euclid(300) * 300, flow.est_bytes)];
    }
    let duration = u128::from(end - start);
    let mut overlaps: Vec<(i64, u128)> = Vec::new();
    let mut t = start;
    while t < end {
        let interval = (t / 300_000) * 300_000;
        let next = (interval + 300_000).min(end);
        overlaps.push(((interval / 1000) as i64, u128::from(next - t)));
        t = next;
    }
    let total = u128::from(flow.est_bytes);
    let mut shares: Vec<(i64, u64, u128)> = overlaps
        .iter()
        .map(|&(iv, ms)| (iv, (total * ms / duration) as u64, total * ms % duration))
        .collect();
    let assigned: u64 = shares.iter().map(|s| s.1).sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| shares[b].2.cmp(&shares[a].2).then(a.cmp(&b)));
    for &i in order.iter().take((flow.est_bytes - assigned) as usize) {
        shares[i].1 += 1;
    }
    shares.into_iter().map(|(iv, b, _)| (iv, b)).collect()
}
