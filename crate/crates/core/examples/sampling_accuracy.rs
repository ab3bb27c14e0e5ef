// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Router-side packet sampling against SNMP-style interface counters, per
//! link, for several sampling factors. The links carry simulated traffic
//! with a heavy-tailed flow size distribution.
//!
//! `cargo run --release --example sampling_accuracy -- [hours]`

use std::path::Path;

use interconnect::sim::Scenario;

fn main() {
    let hours: i64 = std::env::args()
        .nth(1)
        .map_or(6, |h| h.parse().expect("hours is an integer"));
    println!("{hours} h on the sampling-study fleet, SNMP counting 18 bytes of framing per packet");
    println!("mode           N    links   mean    median  std");
    for (mode, n) in [
        ("random", 1),
        ("random", 100),
        ("random", 1000),
        ("random", 8000),
        ("deterministic", 1000),
    ] {
        let scenario = Scenario::from_toml(&format!(
            r#"
            seed = 8000
            start = "2016-02-01T12:00:00Z"
            duration_secs = {}
            sampling = {{ mode = "{mode}", factor = {n} }}
            [fleet]
            builtin = "sampling-study"
            [snmp]
            frame_overhead_bytes = 18
            "#,
            hours * 3600
        ))
        .expect("scenario parses");
        let run = scenario.run(Path::new(".")).expect("scenario runs");
        let st = run.ratio_stats(1).expect("links carry traffic");
        println!(
            "{mode:<13} {n:>5} {:>6}   {:.4}  {:.4}  {:.4}",
            st.links.len(),
            st.mean,
            st.median,
            st.std
        );
    }
}
