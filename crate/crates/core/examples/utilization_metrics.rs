// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Utilization, nearest-rank percentiles, box statistics, weighted CDFs,
//! hourly peaks and capacity growth on small hand-made inputs.

use interconnect::inventory::GroupId;
use interconnect::ipfix::Direction;
use interconnect::metrics::{capacity_growth, fraction_above, percentile, utilization, weighted_cdf, BoxStats};
use interconnect::pipeline::{hourly_peak_sum, IntervalAggregate};

fn main() {
    // 1 GB over one five-minute interval on a 100 Mb/s link.
    let u = utilization(1_000_000_000, 100_000_000).unwrap();
    println!("1 GB in 300 s on 100 Mb/s: {u:.4}");

    let values: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    println!("p95 of 0.05..1.00 = {}", percentile(&values, 95.0).unwrap());
    let b = BoxStats::from_values(&values).unwrap();
    println!(
        "box: p5 {} p25 {} median {} p75 {} p95 {}",
        b.p5, b.p25, b.median, b.p75, b.p95
    );

    // Three groups with 1, 4 and 12 links: weighting by links moves the
    // distribution towards the big group.
    let cdf = weighted_cdf(&[(0.4, 1.0), (0.7, 4.0), (0.97, 12.0)]).unwrap();
    println!("link-weighted share above 0.95: {:.3}", fraction_above(&cdf, 0.95));

    // Two hours of intervals: one peak per hour, summed.
    let series: Vec<IntervalAggregate> = (0..24)
        .map(|k| IntervalAggregate {
            group: GroupId(1),
            interval_start: 1_454_284_800 + k * 300,
            ingress_bytes: ((k * 37) % 11) as u64 * 1_000_000,
            egress_bytes: 0,
        })
        .collect();
    let peaks = hourly_peak_sum(&series, Direction::Ingress).unwrap();
    println!("hourly peaks {:?}, total {}", peaks.peaks, peaks.total());

    let growth = capacity_growth(&[100.0, 104.0, 107.0, 113.0]).unwrap();
    println!(
        "capacity growth: cumulative {:.1}%, geometric mean {:.2}% per month",
        growth.cumulative_pct, growth.geometric_mean_pct
    );
}
