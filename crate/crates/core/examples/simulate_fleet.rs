// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulates six hours of the demo fleet and compares what the pipeline
//! estimates from sampled IPFIX against the exact ground truth.
//!
//! `cargo run --release --example simulate_fleet -- [seed] [out-dir]`

use std::path::{Path, PathBuf};

use interconnect::ipfix::Direction;
use interconnect::sim::Scenario;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed is an integer"));
    let out: Option<PathBuf> = args.next().map(PathBuf::from);

    let scenario = Scenario::from_toml(&format!(
        r#"
        seed = {seed}
        start = "2016-02-01T12:00:00Z"
        duration_secs = 21600
        sampling = {{ mode = "random", factor = 1000 }}
        [fleet]
        builtin = "demo"
        "#
    ))
    .expect("scenario parses");
    let run = scenario.run(Path::new(".")).expect("scenario runs");
    let s = run.summary();
    println!(
        "{} groups, {} links: {} flows, {} packets, {} records, {} bytes of IPFIX",
        s.groups, s.links, s.flows, s.packets, s.records, s.ipfix_bytes
    );

    let (agg, stats) = run.aggregate().expect("ipfix decodes");
    println!(
        "{} records ingested, {} unmonitored",
        stats.records, stats.unmonitored_records
    );
    println!("group                              true GB   est GB   est/true");
    for g in run.fleet.simulated.groups() {
        let truth = run.truth.group_total(g.id, Direction::Ingress);
        let est: u64 = agg
            .sorted()
            .iter()
            .filter(|a| a.group == g.id)
            .map(|a| a.ingress_bytes)
            .sum();
        let k = run.fleet.scale[&g.id];
        println!(
            "{:<34} {:>8.1} {:>8.1} {:>9.4}",
            format!("{}/{}/{}", g.region, g.isp, g.partner),
            (truth * k) as f64 / 1e9,
            (est * k) as f64 / 1e9,
            est as f64 / truth as f64
        );
    }

    if let Some(dir) = out {
        run.write(&dir).expect("output directory is writable");
        println!("wrote run files to {}", dir.display());
    }
}
