// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line; exits nonzero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use interconnect::export::{build_public_rows, summarize_public, write_public_csv, AnonymizationKey, DisclosurePolicy};
use interconnect::inventory::{GroupId, LinkId};
use interconnect::ipfix::{
    decode_message, decode_prefix, decode_stream, encode_message, Direction, FlowExporter, FlowRecord, TemplateCache,
};
use interconnect::metrics::{percentile, utilization, UtilizationDataset};
use interconnect::pipeline::{attribute_to_intervals, NormalizedFlow};
use interconnect::report::{build_report, ReportConfig};
use interconnect::sim::{generate_truth, lag_assign, Fleet, FlowKey, Scenario, ScenarioRun};
use interconnect::time::Month;
use rand::Rng;
use rayon::prelude::*;

const T0_MS: u64 = 1_454_284_800_000;
const T0: i64 = 1_454_284_800;

/// Outcome of one criterion: pass flag and the measured values.
type Outcome = (bool, String);

fn scenario(seed: u64, start: &str, secs: i64, mode: &str, factor: u32, fleet: &str, overhead: u32) -> Scenario {
    Scenario::from_toml(&format!(
        r#"
        seed = {seed}
        start = "{start}"
        duration_secs = {secs}
        sampling = {{ mode = "{mode}", factor = {factor} }}
        [fleet]
        builtin = "{fleet}"
        [snmp]
        frame_overhead_bytes = {overhead}
        "#
    ))
    .expect("scenario parses")
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let run = scenario(
        8000,
        "2016-02-01T00:00:00Z",
        86_400,
        "random",
        8000,
        "sampling-study",
        18,
    )
    .run(Path::new("."))
    .expect("scenario runs");
    let st = run.ratio_stats(250).expect("250 links carry traffic");
    let elapsed = t.elapsed();
    let ok = (0.95..=1.01).contains(&st.mean)
        && (0.95..=1.01).contains(&st.median)
        && st.std <= 0.15
        && elapsed <= Duration::from_secs(300);
    (
        ok,
        format!(
            "{} links, mean {:.4}, median {:.4}, std {:.4}, runtime {:.1} s",
            st.links.len(),
            st.mean,
            st.median,
            st.std,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = common::rng(2);
    let (mut zero, mut straddling, mut bad) = (0, 0, 0);
    for _ in 0..100_000 {
        let start = T0_MS + rng.gen_range(0..86_400_000);
        let dur = match rng.gen_range(0..4) {
            0 => 0,
            1 => rng.gen_range(1..300_000),
            2 => rng.gen_range(300_000..3_600_000),
            _ => rng.gen_range(0..86_400_000),
        };
        let f = NormalizedFlow {
            est_bytes: rng.gen_range(0..1u64 << 50),
            est_packets: 1,
            flow_start_ms: start,
            flow_end_ms: start + dur,
            group: GroupId(1),
            direction: Direction::Ingress,
        };
        let shares = attribute_to_intervals(&f);
        zero += usize::from(dur == 0);
        straddling += usize::from(shares.len() > 1);
        if shares.iter().map(|s| s.1).sum::<u64>() != f.est_bytes || shares != common::attribution_oracle(&f) {
            bad += 1;
        }
    }
    (
        bad == 0 && zero > 0 && straddling > 0,
        format!("100000 flows ({zero} zero-duration, {straddling} straddling), {bad} mismatches"),
    )
}

fn criterion_3() -> Outcome {
    let f = NormalizedFlow {
        est_bytes: 1_000_000_000,
        est_packets: 1,
        flow_start_ms: T0_MS,
        flow_end_ms: T0_MS + 10_000,
        group: GroupId(1),
        direction: Direction::Ingress,
    };
    let rate = f.average_bitrate();
    // The same bytes in one interval of a 1 Gb/s link.
    let u = utilization(1_000_000_000, 1_000_000_000).unwrap();
    let ok = rate == Some(800_000_000.0) && attribute_to_intervals(&f) == [(T0, 1_000_000_000)] && u == 8.0 / 300.0;
    (ok, format!("average rate {rate:?} b/s, interval utilization {u:.6}"))
}

/// Full-sort nearest rank: the element at rank ceil(p n / 100), 1-based.
fn full_sort_reference(values: &[f64], tenths: u64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as u64;
    let rank = (tenths * n).div_ceil(1000).max(1);
    s[rank as usize - 1]
}

fn criterion_4() -> Outcome {
    let mut rng = common::rng(4);
    let mut checked = 0;
    let mut bad = 0;
    for i in 0..1000 {
        let n = if i < 50 { 1 } else { rng.gen_range(1..300) };
        let ties = rng.gen_bool(0.5);
        let values: Vec<f64> = (0..n)
            .map(|_| {
                if ties {
                    rng.gen_range(0..5) as f64 / 4.0
                } else {
                    rng.gen::<f64>()
                }
            })
            .collect();
        for tenths in [0, 10, 50, 250, 500, 750, 900, 950, 990, 1000, rng.gen_range(0..=1000)] {
            checked += 1;
            if percentile(&values, tenths as f64 / 10.0).unwrap() != full_sort_reference(&values, tenths) {
                bad += 1;
            }
        }
    }
    (
        bad == 0,
        format!("{checked} percentiles over 1000 inputs, {bad} mismatches"),
    )
}

fn criterion_5() -> Outcome {
    let links: Vec<LinkId> = (0..4).map(LinkId).collect();
    let mut rng = common::rng(5);
    let keys: Vec<FlowKey> = (0..100_000).map(|_| FlowKey::random(&mut rng)).collect();
    let mut counts = [0u32; 4];
    let mut unstable = 0;
    for k in &keys {
        let l = lag_assign(k, &links);
        counts[l] += 1;
        unstable += usize::from((0..3).any(|_| lag_assign(k, &links) != l));
    }
    let shares = counts.map(|c| c as f64 / keys.len() as f64);
    let ok = shares.iter().all(|s| (0.225..=0.275).contains(s)) && unstable == 0;
    (ok, format!("shares {shares:.4?}, {unstable} unstable keys"))
}

fn criterion_6() -> Outcome {
    let fleet = Fleet::builtin("headline").unwrap();
    let mut model = fleet.model(&Default::default());
    model.seed = 6;
    let truth = generate_truth(&model, &fleet.simulated, T0 + 19 * 3600, 7200).unwrap();
    let rows = fleet.truth_rows(&truth);
    let policy = DisclosurePolicy::with_key(AnonymizationKey::new(b"acceptance".to_vec()).unwrap());
    let out = build_public_rows(&rows, &policy);

    let mut released: BTreeMap<(&str, i64), BTreeSet<&str>> = BTreeMap::new();
    for r in &out.rows {
        released
            .entry((&r.region, r.timestamp))
            .or_default()
            .insert(&r.access_isp);
    }
    let thin = released.values().filter(|s| s.len() < 3).count();

    let mut csv = Vec::new();
    write_public_csv(&out.rows, &mut csv).unwrap();
    let summary = summarize_public(
        &UtilizationDataset::from_rows(&rows),
        &policy,
        Month::of(T0),
        Direction::Ingress,
    )
    .unwrap();
    let text = String::from_utf8(csv).unwrap() + &serde_json::to_string(&summary).unwrap();
    let names: BTreeSet<&str> = fleet.nominal.groups().iter().map(|g| g.partner.as_str()).collect();
    let leaked = names.iter().filter(|n| text.contains(*n)).count();

    // Lossless: per (region, interval) with three or more ISPs, public sums
    // equal private sums; other cells are absent.
    type Sums<'a> = (BTreeSet<&'a str>, u64, u64, u64);
    let mut private: BTreeMap<(&str, i64), Sums> = BTreeMap::new();
    for r in &rows {
        let c = private.entry((&r.region, r.timestamp)).or_default();
        c.0.insert(&r.access_isp);
        c.1 += r.ingress_bytes;
        c.2 += r.egress_bytes;
        c.3 += r.capacity_bps;
    }
    let mut public: BTreeMap<(&str, i64), (u64, u64, u64)> = BTreeMap::new();
    for r in &out.rows {
        let c = public.entry((&r.region, r.timestamp)).or_default();
        c.0 += r.total_ingress_bytes;
        c.1 += r.total_egress_bytes;
        c.2 += r.capacity_bps;
    }
    let expected: BTreeMap<(&str, i64), (u64, u64, u64)> = private
        .iter()
        .filter(|(_, c)| c.0.len() >= 3)
        .map(|(k, c)| (*k, (c.1, c.2, c.3)))
        .collect();
    let suppressed_cells = private.len() - expected.len();
    let lossless = public == expected;
    (
        thin == 0 && leaked == 0 && lossless && suppressed_cells > 0,
        format!(
            "{} public rows, {thin} cells under 3 ISPs, {leaked} partner names leaked, {suppressed_cells} cells suppressed, lossless {lossless}",
            out.rows.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut mismatched = 0;
    for seed in 0..1000 {
        let msg = common::random_message(&mut common::rng(seed));
        let bytes = encode_message(&msg).unwrap();
        mismatched += usize::from(decode_message(&bytes).as_ref() != Ok(&msg));
    }
    let mut rng = common::rng(7);
    let records: Vec<FlowRecord> = (0..40)
        .map(|i| FlowRecord {
            octet_delta: 64 + i,
            packet_delta: 1,
            flow_start_ms: T0_MS + i,
            flow_end_ms: T0_MS + i,
            input_interface: 2,
            output_interface: 0,
            direction: Direction::Ingress,
            exporter: 1,
        })
        .collect();
    let flows = FlowExporter::new(1).export_bytes(&records).unwrap();
    let mut cache = TemplateCache::new();
    let mut overrun = 0;
    for i in 0..100_000u32 {
        let mut buf = if i % 2 == 0 {
            encode_message(&common::random_message(&mut rng)).unwrap()
        } else {
            flows.clone()
        };
        common::mutate(&mut buf, &mut rng);
        if let Ok((msg, used)) = decode_prefix(&buf) {
            overrun += usize::from(used > buf.len());
            let _ = cache.extract(i % 5, &msg);
        }
        let _ = decode_stream(&buf, &mut cache, 1);
    }
    (
        mismatched == 0 && overrun == 0,
        format!("1000 round trips, {mismatched} mismatches; 100000 fuzzed buffers without a crash, {overrun} overruns"),
    )
}

fn criterion_8() -> Outcome {
    let fleet = Fleet::builtin("headline").unwrap();
    let mut model = fleet.model(&Default::default());
    model.seed = 2016;
    let truth = generate_truth(&model, &fleet.simulated, 1_455_062_400, 86_400).unwrap();
    let ds = UtilizationDataset::from_rows(&fleet.truth_rows(&truth));
    let h = build_report(&ds, &ReportConfig::default()).unwrap().headline;
    let ok = h.peak_median_utilization < 0.5
        && h.groups_exceeding_095_fraction < 0.04
        && (h.capacity_above_095 - 0.10).abs() <= 0.03;
    (
        ok,
        format!(
            "(a) peak median {:.4} at {}, (b) {} of {} groups above 0.95 ({:.2}%), (c) {:.2}% of capacity above 0.95",
            h.peak_median_utilization,
            h.peak_median_at,
            h.groups_exceeding_095,
            h.groups,
            h.groups_exceeding_095_fraction * 100.0,
            h.capacity_above_095 * 100.0
        ),
    )
}

/// Per-group (estimated, true) ingress+egress bytes at simulated volume.
fn group_totals(run: &ScenarioRun) -> Vec<(u64, u64)> {
    let (agg, _) = run.aggregate().expect("records decode");
    run.fleet
        .simulated
        .groups()
        .iter()
        .map(|g| {
            let est = agg
                .series()
                .get(&g.id)
                .map_or(0, |s| s.iter().map(|a| a.ingress_bytes + a.egress_bytes).sum());
            let truth =
                run.truth.group_total(g.id, Direction::Ingress) + run.truth.group_total(g.id, Direction::Egress);
            (est, truth)
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let start = "2016-02-10T16:00:00Z";
    let ratios: Vec<f64> = (0..30u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let run = scenario(900 + seed, start, 6 * 3600, "random", 1000, "demo", 0)
                .run(Path::new("."))
                .unwrap();
            group_totals(&run)
                .into_iter()
                .map(|(e, t)| e as f64 / t as f64)
                .collect::<Vec<_>>()
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;

    // Unsampled, every group total is exact. Per interval the records are
    // pro-rated over their span while the truth bins each packet, so only
    // the totals are compared.
    let exact = scenario(900, start, 6 * 3600, "random", 1, "demo", 0)
        .run(Path::new("."))
        .unwrap();
    let totals = group_totals(&exact);
    let exact_ok = totals.iter().all(|(e, t)| e == t && *t > 0);
    (
        (0.98..=1.02).contains(&mean) && exact_ok,
        format!(
            "mean est/true {mean:.4} over {} group runs; N=1 totals equal truth in {} of {} groups",
            ratios.len(),
            totals.iter().filter(|(e, t)| e == t).count(),
            totals.len()
        ),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, f) in criteria {
        if filter.is_some_and(|only| only != n) {
            continue;
        }
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                (false, format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        failed += usize::from(!ok);
        println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
