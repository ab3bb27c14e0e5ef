// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Figure tables, SVG plots and headline numbers for one simulated day of
//! the headline fleet, built from exact ground truth.
//!
//! `cargo run --release --example figure_report -- [out-dir]`

use std::path::PathBuf;

use interconnect::metrics::UtilizationDataset;
use interconnect::report::{build_report, ReportConfig};
use interconnect::sim::{generate_truth, Fleet};
use interconnect::time::parse_timestamp;

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figure-report".into()));
    let fleet = Fleet::builtin("headline").expect("builtin fleet");
    let mut model = fleet.model(&Default::default());
    model.seed = 2016;
    let start = parse_timestamp("2016-02-10T00:00:00Z").unwrap();
    let truth = generate_truth(&model, &fleet.simulated, start, 86_400).expect("simulation runs");
    let ds = UtilizationDataset::from_rows(&fleet.truth_rows(&truth));

    let report = build_report(&ds, &ReportConfig::default()).expect("dataset is not empty");
    let files = report.write(&out).expect("output directory is writable");
    print!("{}", report.headline_json());
    println!("wrote {} files to {}", files.len(), out.display());
}
