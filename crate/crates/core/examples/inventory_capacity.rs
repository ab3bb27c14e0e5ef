// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Loads a link inventory, resolves exporter interfaces to link groups, and
//! applies a capacity upgrade from a snapshot file.

use interconnect::inventory::{read_capacity_snapshots, GroupId, Inventory, LinkId, Resolution};

const INVENTORY: &str = r#"
    [[group]]
    id = 1
    isp = "isp-a"
    region = "chicago"
    partner = "streamco"
    links = [
        { id = 10, capacity_bps = 10_000_000_000 },
        { id = 11, capacity_bps = 10_000_000_000 },
        { id = 12, capacity_bps = 10_000_000_000, monitored = false },
    ]

    [[interface]]
    exporter = 167837953
    interface = 5
    link = 10

    [[interface]]
    exporter = 167837953
    interface = 6
    link = 11
"#;

// Link 11 is upgraded to 20G on 2016-02-14.
const SNAPSHOTS: &str = "timestamp,link_id,capacity_bps\n1455408000,11,20000000000\n";

fn main() {
    let inv = Inventory::from_toml(INVENTORY).expect("inventory is valid");
    println!(
        "{} groups, {} links, {:.0}% monitored",
        inv.groups().len(),
        inv.link_count(),
        inv.monitored_fraction() * 100.0
    );
    for iface in [5, 6, 7] {
        match inv.resolve_interface(167_837_953, iface) {
            Resolution::Group(g) => println!("interface {iface} -> {g}"),
            Resolution::Unmonitored => println!("interface {iface} -> unmonitored"),
        }
    }

    let snaps = read_capacity_snapshots(SNAPSHOTS.as_bytes()).expect("snapshot csv");
    let upgraded = inv.apply_capacity_snapshots(&snaps).expect("snapshot applies");
    for (label, ts) in [("2016-02-01", 1_454_284_800), ("2016-02-20", 1_455_926_400)] {
        println!(
            "{label}: group 1 capacity {} Gb/s",
            upgraded.group_capacity_at(GroupId(1), ts).unwrap() / 1_000_000_000
        );
    }
    println!(
        "history of link 11: {:?}",
        upgraded.capacity_history(LinkId(11)).unwrap()
    );
}
