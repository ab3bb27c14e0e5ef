// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! One sampled record through the pipeline: normalization by the sampling
//! factor, pro-rating over five-minute intervals, and the private rows.

use interconnect::dataset::{build_private_rows, write_private_csv};
use interconnect::inventory::{GroupId, Inventory};
use interconnect::ipfix::{Direction, FlowRecord};
use interconnect::pipeline::{
    attribute_to_intervals, normalize_flow, FlowPipeline, SamplingConfig, SamplingPlan, Window,
};

const INVENTORY: &str = r#"
    [[group]]
    id = 1
    isp = "isp-a"
    region = "chicago"
    partner = "streamco"
    links = [{ id = 10, capacity_bps = 1_000_000_000 }]

    [[interface]]
    exporter = 1
    interface = 5
    link = 10
"#;

fn main() {
    let inv = Inventory::from_toml(INVENTORY).expect("inventory is valid");
    let sampling = SamplingConfig::random(1000).expect("valid factor");
    let t0 = 1_454_284_800_000u64;
    // 90 s starting 4 minutes into the first interval: 60 s land in the
    // first interval and 30 s in the second.
    let rec = FlowRecord {
        octet_delta: 1_000_003,
        packet_delta: 700,
        flow_start_ms: t0 + 240_000,
        flow_end_ms: t0 + 330_000,
        input_interface: 5,
        output_interface: 0,
        direction: Direction::Ingress,
        exporter: 1,
    };

    let flow = normalize_flow(&rec, &sampling, GroupId(1));
    println!("estimated {} bytes in {} packets", flow.est_bytes, flow.est_packets);
    for (start, bytes) in attribute_to_intervals(&flow) {
        println!("  interval {start}: {bytes} bytes");
    }

    let window = Window::new(1_454_284_800, 1_454_284_800 + 900).expect("aligned");
    let mut pipeline = FlowPipeline::new(&inv, SamplingPlan::uniform(sampling), Some(window));
    pipeline.ingest(&rec);
    let (agg, stats) = pipeline.finish();
    println!("{stats:?}");
    let rows = build_private_rows(&agg, &inv, Some(window));
    write_private_csv(&rows, std::io::stdout()).expect("stdout");
}
