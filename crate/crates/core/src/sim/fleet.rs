// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulated fleets: a nominal inventory, per-group load targets, and the
//! volume compression that makes packet-level simulation tractable.
//!
//! Each group is simulated with its link capacities divided by an integer
//! factor and its bytes multiplied back by the same factor, so utilization
//! is unchanged while packet counts shrink. Factors divide 10^9, which keeps
//! capacities that are whole Gb/s exact.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::traffic::GroundTruth;
use super::{SimError, TrafficModel};
use crate::dataset::{build_private_rows, PrivateRow};
use crate::inventory::{GroupId, InterfaceMapping, Inventory, InventoryDoc, Link, LinkGroup, LinkId};
use crate::pipeline::{Aggregator, Contribution, Window};

const GBPS: u64 = 1_000_000_000;

pub const BUILTIN_FLEETS: [&str; 3] = ["demo", "headline", "sampling-study"];

#[derive(Debug, Clone)]
pub struct Fleet {
    /// Topology and capacities as reported.
    pub nominal: Inventory,
    /// The same topology with each group's capacities divided by its scale.
    pub simulated: Inventory,
    pub scale: BTreeMap<GroupId, u64>,
    /// Peak ingress utilization per group.
    pub peaks: BTreeMap<GroupId, f64>,
}

fn divisors_of_1e9() -> Vec<u64> {
    let mut d: Vec<u64> = (0..=9)
        .flat_map(|i| (0..=9).map(move |j| 2u64.pow(i) * 5u64.pow(j)))
        .collect();
    d.sort_unstable();
    d
}

impl Fleet {
    /// Compresses every group of `nominal` towards `target_bps` of simulated
    /// capacity, using the largest factor dividing 10^9 that does not push
    /// the group below the target.
    pub fn compress(nominal: Inventory, peaks: BTreeMap<GroupId, f64>, target_bps: u64) -> Result<Self, SimError> {
        let divisors = divisors_of_1e9();
        let mut scale = BTreeMap::new();
        for g in nominal.groups() {
            let cap = g.configured_capacity_bps().max(1);
            let want = (cap / target_bps.max(1)).max(1);
            let k = divisors.iter().copied().filter(|&d| d <= want).max().unwrap_or(1);
            scale.insert(g.id, k);
        }
        Self::with_scales(nominal, peaks, scale)
    }

    /// One factor for every group.
    pub fn uniform(nominal: Inventory, peaks: BTreeMap<GroupId, f64>, factor: u64) -> Result<Self, SimError> {
        let scale = nominal.groups().iter().map(|g| (g.id, factor)).collect();
        Self::with_scales(nominal, peaks, scale)
    }

    fn with_scales(
        nominal: Inventory,
        peaks: BTreeMap<GroupId, f64>,
        scale: BTreeMap<GroupId, u64>,
    ) -> Result<Self, SimError> {
        let mut groups = nominal.groups().to_vec();
        for g in &mut groups {
            let k = scale[&g.id];
            for l in &mut g.links {
                if k == 0 || l.capacity_bps % k != 0 {
                    return Err(SimError::Scenario(format!(
                        "link {} capacity {} is not divisible by volume factor {k}",
                        l.id.0, l.capacity_bps
                    )));
                }
                l.capacity_bps /= k;
            }
        }
        let simulated = Inventory::from_doc(InventoryDoc {
            isps: nominal.isps().to_vec(),
            regions: nominal.regions().to_vec(),
            groups,
            interfaces: nominal.interfaces().to_vec(),
        })
        .map_err(|e| SimError::Scenario(e.to_string()))?;
        Ok(Self {
            nominal,
            simulated,
            scale,
            peaks,
        })
    }

    /// `base` with this fleet's peak targets filled in.
    pub fn model(&self, base: &TrafficModel) -> TrafficModel {
        let mut m = base.clone();
        for (g, &p) in &self.peaks {
            m.peak_utilization.entry(g.0).or_insert(p);
        }
        m
    }

    /// Simulated aggregates scaled back to nominal volume.
    pub fn scale_up(&self, agg: &Aggregator) -> Aggregator {
        let mut out = Aggregator::new();
        for a in agg.sorted() {
            let k = self.scale.get(&a.group).copied().unwrap_or(1);
            for (direction, bytes) in [
                (crate::ipfix::Direction::Ingress, a.ingress_bytes),
                (crate::ipfix::Direction::Egress, a.egress_bytes),
            ] {
                if bytes > 0 {
                    out.add(Contribution {
                        group: a.group,
                        direction,
                        interval_start: a.interval_start,
                        bytes: bytes * k,
                    });
                }
            }
        }
        out
    }

    /// Private dataset rows of the ground truth, at nominal volume.
    pub fn truth_rows(&self, truth: &GroundTruth) -> Vec<PrivateRow> {
        self.rows(&truth.to_aggregator(), Some(truth.window()))
    }

    /// Private rows of simulated-volume aggregates, at nominal volume.
    pub fn rows(&self, agg: &Aggregator, window: Option<Window>) -> Vec<PrivateRow> {
        build_private_rows(&self.scale_up(agg), &self.nominal, window)
    }

    pub fn builtin(name: &str) -> Result<Self, SimError> {
        match name {
            "demo" => demo(),
            "headline" => headline(),
            "sampling-study" => sampling_study(),
            other => Err(SimError::UnknownFleet(other.to_string())),
        }
    }
}

const REGIONS: [&str; 10] = [
    "atlanta",
    "chicago",
    "dallas",
    "denver",
    "los-angeles",
    "miami",
    "new-york",
    "san-jose",
    "seattle",
    "washington",
];

const PARTNERS: [&str; 12] = [
    "streamco",
    "cloudnet",
    "cdnexpress",
    "socialhub",
    "searchco",
    "transitone",
    "transittwo",
    "gamenet",
    "peerwest",
    "peereast",
    "videomax",
    "edgecache",
];

struct Builder {
    groups: Vec<LinkGroup>,
    interfaces: Vec<InterfaceMapping>,
    next_link: u32,
    next_ifindex: BTreeMap<u32, u32>,
}

impl Builder {
    fn new() -> Self {
        Self {
            groups: Vec::new(),
            interfaces: Vec::new(),
            next_link: 1,
            next_ifindex: BTreeMap::new(),
        }
    }

    fn group(
        &mut self,
        isp: &str,
        region: &str,
        partner: &str,
        links: u32,
        capacity_bps: u64,
        exporter: u32,
    ) -> GroupId {
        let id = GroupId(self.groups.len() as u32 + 1);
        let mut members = Vec::new();
        for _ in 0..links {
            let link = LinkId(self.next_link);
            self.next_link += 1;
            let ifindex = self.next_ifindex.entry(exporter).or_insert(1);
            self.interfaces.push(InterfaceMapping {
                exporter,
                interface: *ifindex,
                link,
            });
            *ifindex += 1;
            members.push(Link {
                id: link,
                capacity_bps,
                monitored: true,
            });
        }
        self.groups.push(LinkGroup {
            id,
            isp: isp.to_string(),
            region: region.to_string(),
            partner: partner.to_string(),
            links: members,
        });
        id
    }

    fn finish(self, isps: Vec<String>, regions: Vec<String>) -> Inventory {
        Inventory::from_doc(InventoryDoc {
            isps,
            regions,
            groups: self.groups,
            interfaces: self.interfaces,
        })
        .expect("builtin fleet is valid")
    }
}

// Exporter ids encode (isp, region) as the router 10.isp.region.1.
fn exporter_id(isp: usize, region: usize) -> u32 {
    u32::from_be_bytes([10, isp as u8 + 1, region as u8 + 1, 1])
}

fn isp_name(i: usize) -> String {
    format!("isp-{}", i + 1)
}

/// Seven access ISPs across ten regions, tuned to the published headline
/// shape: most groups peak well below half their capacity, a handful of
/// large groups run hot, and 3% of links are outside the measurement
/// system. Denver hosts only two ISPs.
pub fn headline() -> Result<Fleet, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(2016);
    let mut b = Builder::new();
    let mut peaks = BTreeMap::new();
    let isps: Vec<String> = (0..7).map(isp_name).collect();
    for (r, region) in REGIONS.iter().enumerate() {
        let present: Vec<usize> = if *region == "denver" {
            vec![0, 1]
        } else {
            let mut v: Vec<usize> = (0..7).filter(|_| rng.gen_bool(0.75)).collect();
            while v.len() < 3 {
                let extra = rng.gen_range(0..7);
                if !v.contains(&extra) {
                    v.push(extra);
                }
            }
            v.sort_unstable();
            v
        };
        for i in present {
            let n_partners = rng.gen_range(1..=4);
            let partners: Vec<&&str> = PARTNERS.choose_multiple(&mut rng, n_partners).collect();
            for partner in partners {
                let links = rng.gen_range(1..=6);
                let g = b.group(&isps[i], region, partner, links, 10 * GBPS, exporter_id(i, r));
                peaks.insert(g, rng.gen_range(0.10..0.65));
            }
        }
    }
    // Hot groups: few, fast links into the busiest content partner, at
    // capacity during the evening peak. They hold a tenth of the capacity
    // but a small share of the links.
    for (i, r) in [(0usize, 1usize), (2, 6), (4, 4), (5, 7)] {
        let g = b.group(&isps[i], REGIONS[r], "megastream", 3, 40 * GBPS, exporter_id(i, r));
        peaks.insert(g, 0.985);
    }
    mark_unmonitored(&mut b.groups, 0.03, &mut rng);
    let inventory = b.finish(isps, REGIONS.iter().map(|s| s.to_string()).collect());
    Fleet::compress(inventory, peaks, 2_000_000)
}

// Takes links out of measurement, never the last monitored link of a group.
fn mark_unmonitored(groups: &mut [LinkGroup], fraction: f64, rng: &mut impl Rng) {
    let total: usize = groups.iter().map(|g| g.links.len()).sum();
    let target = (total as f64 * fraction).round() as usize;
    let mut candidates: Vec<(usize, usize)> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.links.len() > 1)
        .flat_map(|(gi, g)| (1..g.links.len()).map(move |li| (gi, li)))
        .collect();
    candidates.shuffle(rng);
    for &(gi, li) in candidates.iter().take(target) {
        groups[gi].links[li].monitored = false;
    }
}

/// One large access ISP with 250 monitored 10 Gb/s links: ten regions, five
/// partners each, five-link bundles.
pub fn sampling_study() -> Result<Fleet, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(2015);
    let mut b = Builder::new();
    let mut peaks = BTreeMap::new();
    for (r, region) in REGIONS.iter().enumerate() {
        for partner in &PARTNERS[..5] {
            let g = b.group("isp-1", region, partner, 5, 10 * GBPS, exporter_id(0, r));
            peaks.insert(g, rng.gen_range(0.3..0.7));
        }
    }
    let inventory = b.finish(vec!["isp-1".into()], REGIONS.iter().map(|s| s.to_string()).collect());
    Fleet::uniform(inventory, peaks, 40_000)
}

/// A small fleet for examples and quick runs: four ISPs over three
/// regions, one of which has only two ISPs.
pub fn demo() -> Result<Fleet, SimError> {
    let mut b = Builder::new();
    let mut peaks = BTreeMap::new();
    let isps: Vec<String> = (0..4).map(isp_name).collect();
    let layout: [(usize, usize, &str, u32, f64); 9] = [
        (0, 0, "streamco", 2, 0.45),
        (1, 0, "streamco", 1, 0.6),
        (2, 0, "cloudnet", 2, 0.3),
        (3, 0, "streamco", 1, 0.97),
        (0, 1, "cloudnet", 1, 0.4),
        (1, 1, "streamco", 2, 0.5),
        (2, 1, "transitone", 1, 0.25),
        (0, 2, "streamco", 1, 0.55),
        (1, 2, "cloudnet", 1, 0.35),
    ];
    for (i, r, partner, links, peak) in layout {
        let g = b.group(&isps[i], REGIONS[r], partner, links, 10 * GBPS, exporter_id(i, r));
        peaks.insert(g, peak);
    }
    let inventory = b.finish(isps, REGIONS[..3].iter().map(|s| s.to_string()).collect());
    Fleet::compress(inventory, peaks, 500_000)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_study_has_250_links() {
        let f = sampling_study().unwrap();
        assert_eq!(f.simulated.link_count(), 250);
        assert!(f
            .simulated
            .groups()
            .iter()
            .all(|g| g.configured_capacity_bps() == 5 * 250_000));
    }

    #[test]
    fn headline_fleet_shape() {
        let f = headline().unwrap();
        let inv = &f.nominal;
        assert_eq!(inv.isps().len(), 7);
        assert_eq!(inv.regions().len(), 10);
        assert!(
            (inv.monitored_fraction() - 0.97).abs() < 0.005,
            "{}",
            inv.monitored_fraction()
        );
        let hot = f.peaks.values().filter(|&&p| p > 0.9).count();
        assert!((hot as f64) < 0.04 * inv.groups().len() as f64);
    }

    #[test]
    fn compression_preserves_link_ratios() {
        let f = headline().unwrap();
        for g in f.nominal.groups() {
            let k = f.scale[&g.id];
            let sim = f.simulated.group(g.id).unwrap();
            assert_eq!(sim.configured_capacity_bps() * k, g.configured_capacity_bps());
            assert!(sim.configured_capacity_bps() >= 2_000_000);
        }
    }

    #[test]
    fn unknown_builtin_is_an_error() {
        assert!(matches!(Fleet::builtin("nope"), Err(SimError::UnknownFleet(_))));
        for name in BUILTIN_FLEETS {
            Fleet::builtin(name).unwrap();
        }
    }
}
