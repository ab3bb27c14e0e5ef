// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::{BTreeMap, BTreeSet};

use interconnect::dataset::PrivateRow;
use interconnect::export::{
    anonymize_partner, build_public_rows, summarize_public, write_public_csv, AnonymizationKey, DisclosurePolicy,
};
use interconnect::ipfix::Direction;
use interconnect::metrics::UtilizationDataset;
use interconnect::sim::{generate_truth, Fleet, TrafficModel};
use interconnect::time::Month;
use rand::Rng;

const T0: i64 = 1_455_062_400; // 2016-02-10

fn key(s: &str) -> AnonymizationKey {
    AnonymizationKey::new(s.as_bytes().to_vec()).unwrap()
}

#[test]
fn pseudonyms_are_keyed_and_deterministic() {
    let k = key("secret");
    assert_eq!(
        anonymize_partner("streamco", &k),
        anonymize_partner("streamco", &key("secret"))
    );
    assert_ne!(
        anonymize_partner("streamco", &k),
        anonymize_partner("streamco", &key("other"))
    );
    let labels: BTreeSet<String> = (0..1000)
        .map(|i| anonymize_partner(&format!("partner{i}"), &k))
        .collect();
    assert_eq!(labels.len(), 1000);
    assert!(labels
        .iter()
        .all(|l| !l.contains("partner0") && l.len() == "partner-".len() + 16));
}

/// Random private rows: ten regions, each interval a random subset of ISPs.
fn random_rows(seed: u64) -> Vec<PrivateRow> {
    let mut rng = common::rng(seed);
    let mut rows = Vec::new();
    for k in 0..24 {
        for region in 0..10 {
            let isps = rng.gen_range(1..=6);
            for isp in 0..isps {
                for partner in 0..rng.gen_range(1..=3) {
                    rows.push(PrivateRow {
                        timestamp: T0 + k * 300,
                        region: format!("region{region}"),
                        partner: format!("netflow-partner-{}", (partner + isp) % 5),
                        access_isp: format!("isp{isp}"),
                        ingress_bytes: rng.gen_range(0..1 << 40),
                        egress_bytes: rng.gen_range(0..1 << 36),
                        capacity_bps: 10_000_000_000,
                        link_count: 1,
                    });
                }
            }
        }
    }
    rows
}

#[test]
fn suppression_matches_count_oracle() {
    for seed in 0..5 {
        let rows = random_rows(seed);
        let out = build_public_rows(&rows, &DisclosurePolicy::with_key(key("k")));

        let mut isps: BTreeMap<(&str, i64), BTreeSet<&str>> = BTreeMap::new();
        for r in &rows {
            isps.entry((&r.region, r.timestamp)).or_default().insert(&r.access_isp);
        }
        let kept: Vec<&PrivateRow> = rows
            .iter()
            .filter(|r| isps[&(r.region.as_str(), r.timestamp)].len() >= 3)
            .collect();
        let keys: BTreeSet<_> = kept
            .iter()
            .map(|r| (r.timestamp, &r.region, &r.access_isp, &r.partner))
            .collect();
        assert_eq!(out.rows.len(), keys.len());
        assert_eq!(
            out.rows.iter().map(|r| r.total_ingress_bytes).sum::<u64>(),
            kept.iter().map(|r| r.ingress_bytes).sum::<u64>()
        );
        assert_eq!(
            out.rows.iter().map(|r| r.total_egress_bytes).sum::<u64>(),
            kept.iter().map(|r| r.egress_bytes).sum::<u64>()
        );
        // Every released (region, interval) has at least three ISPs.
        let mut released: BTreeMap<(&str, i64), BTreeSet<&str>> = BTreeMap::new();
        for r in &out.rows {
            released
                .entry((&r.region, r.timestamp))
                .or_default()
                .insert(&r.access_isp);
        }
        assert!(released.values().all(|s| s.len() >= 3));
        let dropped: usize = out.suppressed.iter().map(|s| s.dropped_rows).sum();
        assert_eq!(dropped, rows.len() - kept.len());

        let mut csv = Vec::new();
        write_public_csv(&out.rows, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(!text.contains("netflow-partner"));
    }
}

#[test]
fn demo_fleet_release() {
    let fleet = Fleet::builtin("demo").unwrap();
    let model = fleet.model(&TrafficModel::default());
    let truth = generate_truth(&model, &fleet.simulated, T0, 3600).unwrap();
    let rows = fleet.truth_rows(&truth);
    let policy = DisclosurePolicy::with_key(key("demo"));
    let out = build_public_rows(&rows, &policy);

    // The demo region with two ISPs disappears entirely; the others stay.
    let regions_in: BTreeSet<&str> = rows.iter().map(|r| r.region.as_str()).collect();
    let regions_out: BTreeSet<&str> = out.rows.iter().map(|r| r.region.as_str()).collect();
    assert_eq!(regions_in.len(), 3);
    assert_eq!(regions_out.len(), 2);
    assert_eq!(out.suppressed.len(), 1);
    let s = &out.suppressed[0];
    assert_eq!((s.max_isps, s.dropped_rows, s.total_rows), (2, s.total_rows, 2 * 12));
    for name in fleet.nominal.groups().iter().map(|g| g.partner.as_str()) {
        assert!(out.rows.iter().all(|r| !r.anonymized_partner.contains(name)));
    }
    let released: u64 = out.rows.iter().map(|r| r.total_ingress_bytes).sum();
    let expected: u64 = rows
        .iter()
        .filter(|r| r.region != s.region)
        .map(|r| r.ingress_bytes)
        .sum();
    assert_eq!(released, expected);

    let ds = UtilizationDataset::from_rows(&rows);
    let summary = summarize_public(&ds, &policy, Month::of(T0), Direction::Ingress).unwrap();
    assert_eq!(summary.per_region.len(), 2);
    let global = summary.global.as_ref().unwrap();
    assert_eq!(
        global.ingress_bytes,
        summary.per_region.iter().map(|v| v.ingress_bytes).sum::<u64>()
    );
    assert_eq!(global.ingress_bytes, expected);
    // Per-ISP views cover all groups, suppressed regions included, and
    // exist for an ISP present in a single group.
    assert_eq!(summary.per_isp.len(), 4);
    assert_eq!(
        summary.per_isp.iter().map(|v| v.ingress_bytes).sum::<u64>(),
        rows.iter().map(|r| r.ingress_bytes).sum::<u64>()
    );
    assert!(summary.per_isp.iter().any(|v| v.groups == 1));
    let json = serde_json::to_string(&summary).unwrap();
    for g in fleet.nominal.groups() {
        assert!(!json.contains(&g.partner));
    }
}

#[test]
fn release_is_reproducible() {
    let rows = random_rows(9);
    let policy = DisclosurePolicy::with_key(key("k"));
    let mut shuffled = rows.clone();
    rand::seq::SliceRandom::shuffle(&mut shuffled[..], &mut common::rng(1));
    assert_eq!(build_public_rows(&rows, &policy), build_public_rows(&shuffled, &policy));
}
