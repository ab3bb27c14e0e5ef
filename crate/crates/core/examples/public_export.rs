// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Public release of a private dataset: keyed partner pseudonyms and
//! suppression of regions with too few contributing ISPs.

use interconnect::dataset::PrivateRow;
use interconnect::export::{build_public_rows, write_public_csv, AnonymizationKey, DisclosurePolicy};

fn row(region: &str, isp: &str, partner: &str, bytes: u64) -> PrivateRow {
    PrivateRow {
        timestamp: 1_454_284_800,
        region: region.into(),
        partner: partner.into(),
        access_isp: isp.into(),
        ingress_bytes: bytes,
        egress_bytes: bytes / 8,
        capacity_bps: 10_000_000_000,
        link_count: 1,
    }
}

fn main() {
    let rows = vec![
        row("chicago", "isp-a", "streamco", 90_000_000_000),
        row("chicago", "isp-b", "streamco", 70_000_000_000),
        row("chicago", "isp-c", "cloudnet", 20_000_000_000),
        // Only two ISPs in Dallas: the whole region interval is withheld.
        row("dallas", "isp-a", "streamco", 50_000_000_000),
        row("dallas", "isp-b", "cloudnet", 10_000_000_000),
    ];
    // Demo key; real runs read it from INTERCONNECT_ANON_KEY.
    let key = AnonymizationKey::new(b"example key".to_vec()).expect("non-empty key");
    let policy = DisclosurePolicy::with_key(key);
    let export = build_public_rows(&rows, &policy);

    write_public_csv(&export.rows, std::io::stdout()).expect("stdout");
    for s in &export.suppressed {
        println!(
            "suppressed {}: {} of {} rows, at most {} ISPs",
            s.region, s.dropped_rows, s.total_rows, s.max_isps
        );
    }
    let released: u64 = export.rows.iter().map(|r| r.total_ingress_bytes).sum();
    let kept: u64 = rows
        .iter()
        .filter(|r| r.region == "chicago")
        .map(|r| r.ingress_bytes)
        .sum();
    assert_eq!(released, kept);
    assert!(export.rows.iter().all(|r| !r.anonymized_partner.contains("streamco")));
}
