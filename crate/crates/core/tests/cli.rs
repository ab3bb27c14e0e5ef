// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the command-line workflow. Most tests call the
//! library entry point in-process; a few spawn the binary to check exit
//! codes and the environment key.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use interconnect::cli::{self, exit};
use interconnect::dataset::{read_private_csv, PrivateRow};
use interconnect::export::KEY_ENV;
use interconnect::ipfix::{split_messages, Direction, FlowExporter, FlowRecord};
use interconnect::sim::{export_ipfix, import_ipfix};

const T0: i64 = 1_455_062_400; // 2016-02-10

fn run(args: &[&str], key: Option<&str>) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("interconnect")
        .chain(args.iter().copied())
        .map(OsString::from);
    let code = cli::run(argv, key.map(OsString::from), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes a scenario and a simulate manifest, runs `simulate`, and returns
/// the run directory.
fn simulate(dir: &Path, seed: u64, hours: i64, factor: u32) -> PathBuf {
    fs::write(
        dir.join("scenario.toml"),
        format!(
            "seed = {seed}\nstart = \"2016-02-10T18:00:00Z\"\nduration_secs = {}\n\
             sampling = {{ mode = \"random\", factor = {factor} }}\n[fleet]\nbuiltin = \"demo\"\n",
            hours * 3600
        ),
    )
    .unwrap();
    fs::write(
        dir.join("simulate.toml"),
        "command = \"simulate\"\nscenario = \"scenario.toml\"\nout = \"sim\"\n",
    )
    .unwrap();
    let (code, _) = run(&["simulate", "--manifest", p(&dir.join("simulate.toml"))], None);
    assert_eq!(code, exit::OK);
    dir.join("sim")
}

fn read_rows(path: &Path) -> Vec<PrivateRow> {
    read_private_csv(fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn decode_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.ipfix");
    fs::write(&empty, b"").unwrap();
    let (code, out) = run(&["decode", p(&empty)], None);
    assert_eq!(code, exit::OK);
    assert_eq!(out.lines().count(), 1, "header only: {out}");
}

#[test]
fn decode_corrupt_header_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    let records: Vec<FlowRecord> = (0..50)
        .map(|i| FlowRecord {
            octet_delta: 1000 + i,
            packet_delta: 1,
            flow_start_ms: T0 as u64 * 1000 + i,
            flow_end_ms: T0 as u64 * 1000 + i,
            input_interface: 1,
            output_interface: 0,
            direction: Direction::Ingress,
            exporter: 1,
        })
        .collect();
    let mut bytes = FlowExporter::with_max_len(1, 256).export_bytes(&records).unwrap();
    let offsets: Vec<usize> = split_messages(&bytes).map(|m| m.unwrap().0).collect();
    let bad = offsets[1];
    bytes[bad + 1] = 5;
    let path = dir.path().join("bad.ipfix");
    fs::write(&path, &bytes).unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_interconnect"))
        .args(["decode", p(&path)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(exit::PARSE));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(&format!("offset {bad}")), "{stderr}");
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["frobnicate"], None).0, exit::USAGE);
    assert_eq!(run(&["decode", "--window", "0,299", "x"], None).0, exit::USAGE);
    assert_eq!(run(&["decode"], None).0, exit::CONFIG);
    assert_eq!(run(&["decode", "/nonexistent/file.ipfix"], None).0, exit::IO);
}

#[test]
fn simulated_file_decodes_to_the_emitted_count() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), 5, 1, 10);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sim.join("summary.json")).unwrap()).unwrap();
    let (code, out) = run(&["decode", p(&sim.join("flows.ipfix"))], None);
    assert_eq!(code, exit::OK);
    let records = summary["records"].as_u64().unwrap();
    assert!(records > 1000);
    assert_eq!(out.lines().count() as u64 - 1, records);
    let (code, _) = run(
        &[
            "decode",
            p(&sim.join("flows.ipfix")),
            "--out",
            p(&dir.path().join("dump")),
        ],
        None,
    );
    assert_eq!(code, exit::OK);
    assert_eq!(
        fs::read_to_string(dir.path().join("dump").join(cli::FLOWS_CSV)).unwrap(),
        out
    );
}

const ONE_GROUP: &str = r#"
[[group]]
id = 1
isp = "isp-a"
region = "chicago"
partner = "content-1"
links = [{ id = 10, capacity_bps = 10_000_000_000 }]

[[interface]]
exporter = 7
interface = 3
link = 10
"#;

#[test]
fn one_flow_gives_one_row_per_overlapped_interval() {
    let dir = tempfile::tempdir().unwrap();
    // 600 s starting 180 s into an interval, 9 * 10^8 sampled bytes at 1:10.
    let rec = FlowRecord {
        octet_delta: 90_000_000,
        packet_delta: 60_000,
        flow_start_ms: (T0 + 180) as u64 * 1000,
        flow_end_ms: (T0 + 780) as u64 * 1000,
        input_interface: 3,
        output_interface: 0,
        direction: Direction::Ingress,
        exporter: 7,
    };
    fs::write(
        dir.path().join("flows.ipfix"),
        FlowExporter::new(1).export_bytes(&[rec]).unwrap(),
    )
    .unwrap();
    fs::write(dir.path().join("inventory.toml"), ONE_GROUP).unwrap();
    fs::write(
        dir.path().join("m.toml"),
        "inputs = [\"flows.ipfix\"]\ninventory = \"inventory.toml\"\nsampling = { mode = \"random\", factor = 10 }\nout = \"agg\"\n",
    )
    .unwrap();
    let (code, _) = run(&["aggregate", "--manifest", p(&dir.path().join("m.toml"))], None);
    assert_eq!(code, exit::OK);
    let rows = read_rows(&dir.path().join("agg").join(cli::PRIVATE_CSV));
    let got: Vec<(i64, u64)> = rows.iter().map(|r| (r.timestamp, r.ingress_bytes)).collect();
    assert_eq!(
        got,
        [(T0, 180_000_000), (T0 + 300, 450_000_000), (T0 + 600, 270_000_000)]
    );
    assert!(rows
        .iter()
        .all(|r| r.capacity_bps == 10_000_000_000 && r.link_count == 1));

    // With a window every interval of it has a row.
    let (code, _) = run(
        &[
            "aggregate",
            "--manifest",
            p(&dir.path().join("m.toml")),
            "--window",
            &format!("{},{}", T0 - 300, T0 + 1200),
        ],
        None,
    );
    assert_eq!(code, exit::OK);
    let rows = read_rows(&dir.path().join("agg").join(cli::PRIVATE_CSV));
    assert_eq!(rows.len(), 5);
    assert_eq!((rows[0].ingress_bytes, rows[4].ingress_bytes), (0, 0));
}

#[test]
fn aggregate_is_independent_of_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), 6, 1, 100);
    // One file per exporter.
    let (records, _) = import_ipfix(&fs::read(sim.join("flows.ipfix")).unwrap()).unwrap();
    let mut by_exporter: BTreeMap<u32, Vec<FlowRecord>> = BTreeMap::new();
    for r in records {
        by_exporter.entry(r.exporter).or_default().push(r);
    }
    assert!(by_exporter.len() >= 3);
    let files: Vec<String> = by_exporter
        .values()
        .enumerate()
        .map(|(i, recs)| {
            let path = sim.join(format!("part{i}.ipfix"));
            fs::write(&path, export_ipfix(recs).unwrap()).unwrap();
            path.to_str().unwrap().to_string()
        })
        .collect();

    let manifest = sim.join(cli::RUN_MANIFEST);
    let aggregate = |inputs: Vec<&str>, out: &str| {
        let out = sim.join(out);
        let mut args = vec!["aggregate", "--manifest", p(&manifest), "--out", p(&out)];
        args.extend(inputs);
        assert_eq!(run(&args, None).0, exit::OK);
        fs::read(out.join(cli::PRIVATE_CSV)).unwrap()
    };
    let forward = aggregate(files.iter().map(String::as_str).collect(), "fwd");
    let reverse = aggregate(files.iter().rev().map(String::as_str).collect(), "rev");
    let whole = aggregate(vec![p(&sim.join("flows.ipfix"))], "whole");
    assert_eq!(forward, reverse);
    assert_eq!(forward, whole);
}

#[test]
fn end_to_end_against_truth() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), 7, 6, 100);
    assert_eq!(
        run(&["aggregate", "--manifest", p(&sim.join(cli::RUN_MANIFEST))], None).0,
        exit::OK
    );
    let est = read_rows(&sim.join("aggregate").join(cli::PRIVATE_CSV));
    let truth = read_rows(&sim.join("truth.csv"));
    assert_eq!(est.len(), truth.len());
    let mut totals: BTreeMap<(String, String, String), (u64, u64)> = BTreeMap::new();
    for (e, t) in est.iter().zip(&truth) {
        assert_eq!(
            (e.timestamp, &e.region, &e.access_isp, &e.partner),
            (t.timestamp, &t.region, &t.access_isp, &t.partner)
        );
        assert_eq!(e.capacity_bps, t.capacity_bps);
        let cell = totals
            .entry((e.region.clone(), e.access_isp.clone(), e.partner.clone()))
            .or_default();
        cell.0 += e.ingress_bytes;
        cell.1 += t.ingress_bytes;
    }
    assert_eq!(totals.len(), 9);
    for (k, (e, t)) in totals {
        let ratio = e as f64 / t as f64;
        assert!((0.95..=1.05).contains(&ratio), "{k:?}: {ratio}");
    }
}

#[test]
fn report_goldens() {
    let golden_root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for seed in [1, 2, 3] {
        let dir = tempfile::tempdir().unwrap();
        let sim = simulate(dir.path(), seed, 2, 100);
        assert_eq!(
            run(&["aggregate", "--manifest", p(&sim.join(cli::RUN_MANIFEST))], None).0,
            exit::OK
        );
        let report = dir.path().join("report");
        let private = sim.join("aggregate").join(cli::PRIVATE_CSV);
        assert_eq!(run(&["report", p(&private), "--out", p(&report)], None).0, exit::OK);

        let golden = golden_root.join(format!("seed-{seed}"));
        let mut names: Vec<String> = fs::read_dir(&report)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".csv") || n.ends_with(".json"))
            .collect();
        names.sort();
        assert!(names.len() >= 9, "{names:?}");
        if update {
            fs::create_dir_all(&golden).unwrap();
        }
        for name in names {
            let got = fs::read_to_string(report.join(&name)).unwrap();
            if update {
                fs::write(golden.join(&name), &got).unwrap();
            } else {
                let want = fs::read_to_string(golden.join(&name)).unwrap_or_else(|e| {
                    panic!("{}: {e} (set UPDATE_GOLDEN=1 to create)", golden.join(&name).display())
                });
                assert!(got == want, "seed {seed}: {name} differs from its golden file");
            }
        }
    }
}

fn write_private(path: &Path, isps: usize) {
    let mut text = String::from(interconnect::dataset::PRIVATE_HEADER);
    text.push('\n');
    for k in 0..4 {
        for i in 0..isps {
            text.push_str(&format!(
                "{},chicago,streamco,isp-{i},{},{},10000000000,1\n",
                interconnect::time::format_iso(T0 + k * 300),
                (i as u64 + 1) * 10_000_000_000,
                (i as u64 + 1) * 1_000_000_000,
            ));
        }
    }
    fs::write(path, text).unwrap();
}

#[test]
fn export_public() {
    let dir = tempfile::tempdir().unwrap();
    let two = dir.path().join("two.csv");
    let three = dir.path().join("three.csv");
    write_private(&two, 2);
    write_private(&three, 3);

    let out = dir.path().join("pub2");
    assert_eq!(
        run(&["export-public", p(&two), "--out", p(&out)], Some("k")).0,
        exit::OK
    );
    assert_eq!(
        fs::read_to_string(out.join(cli::PUBLIC_CSV)).unwrap().lines().count(),
        1
    );
    let log = fs::read_to_string(out.join(cli::SUPPRESSION_CSV)).unwrap();
    assert_eq!(log.lines().nth(1), Some("chicago,2,8,8"), "{log}");

    let export = |out: &str| {
        let out = dir.path().join(out);
        assert_eq!(
            run(&["export-public", p(&three), "--out", p(&out)], Some("k")).0,
            exit::OK
        );
        [cli::PUBLIC_CSV, cli::SUPPRESSION_CSV, cli::PUBLIC_SUMMARY_JSON].map(|f| fs::read(out.join(f)).unwrap())
    };
    let first = export("pub3a");
    let text = String::from_utf8(first[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(!text.contains("streamco"));
    assert!(!String::from_utf8_lossy(&first[2]).contains("streamco"));
    assert_eq!(first, export("pub3b"));

    // A policy below three ISPs is refused.
    fs::write(dir.path().join("lax.toml"), "[policy]\nmin_isps_per_region = 2\n").unwrap();
    let lax = run(
        &[
            "export-public",
            "--manifest",
            p(&dir.path().join("lax.toml")),
            p(&three),
            "--out",
            p(&out),
        ],
        Some("k"),
    );
    assert_eq!(lax.0, exit::POLICY);
}

#[test]
fn export_needs_the_key_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let three = dir.path().join("three.csv");
    write_private(&three, 3);
    let bin = || {
        let mut c = Command::new(env!("CARGO_BIN_EXE_interconnect"));
        c.args(["export-public", p(&three), "--out", p(&dir.path().join("out"))]);
        c
    };
    let missing = bin().env_remove(KEY_ENV).output().unwrap();
    assert_eq!(missing.status.code(), Some(exit::POLICY));
    let ok = bin().env(KEY_ENV, "operator key").output().unwrap();
    assert_eq!(ok.status.code(), Some(exit::OK));
    assert!(dir.path().join("out").join(cli::PUBLIC_CSV).exists());
}

#[test]
fn report_on_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, format!("{}\n", interconnect::dataset::PRIVATE_HEADER)).unwrap();
    assert_eq!(
        run(&["report", p(&empty), "--out", p(&dir.path().join("r"))], None).0,
        exit::NO_DATA
    );
}
