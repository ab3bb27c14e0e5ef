// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Hash-based assignment of flows to the members of a link aggregation
//! group: each flow sticks to one link, and load spreads evenly by count.

use interconnect::inventory::LinkId;
use interconnect::sim::{lag_assign, FlowKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2usize, 4, 8] {
        let links: Vec<LinkId> = (0..n as u32).map(LinkId).collect();
        let mut counts = vec![0u64; n];
        let flows = 100_000;
        for _ in 0..flows {
            let key = FlowKey::random(&mut rng);
            counts[lag_assign(&key, &links)] += 1;
        }
        let shares: Vec<String> = counts
            .iter()
            .map(|c| format!("{:.4}", *c as f64 / flows as f64))
            .collect();
        println!("{n} links: shares {}", shares.join(" "));
    }
    let key = FlowKey::random(&mut rng);
    let links = [LinkId(1), LinkId(2), LinkId(3)];
    assert!((0..10).all(|_| lag_assign(&key, &links) == lag_assign(&key, &links)));
    println!("a flow always hashes to link {}", links[lag_assign(&key, &links)].0);
}
