// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Interconnect topology and provisioning: which exporter interface belongs
//! to which link, how links group per (ISP, region, partner), and how link
//! capacity changes over time.
//!
//! Inventory file (TOML):
//!
//! ```toml
//! isps = ["isp-a"]              # optional, derived from groups when absent
//! regions = ["chicago"]         # optional
//!
//! [[group]]
//! id = 1
//! isp = "isp-a"
//! region = "chicago"
//! partner = "content-1"
//! links = [
//!   { id = 10, capacity_bps = 10_000_000_000 },
//!   { id = 11, capacity_bps = 10_000_000_000, monitored = false },
//! ]
//!
//! [[interface]]
//! exporter = 1
//! interface = 5
//! link = 10
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ipfix::FlowRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(pub u32);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "link {}", self.0)
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "group {}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum InventoryError {
    #[error("cannot parse inventory: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot read capacity snapshots: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} is declared more than once")]
    DuplicateLinkId(LinkId),
    #[error("interface {interface} on exporter {exporter} maps to more than one link")]
    DuplicateLink { exporter: u32, interface: u32 },
    #[error("{0} is mapped by more than one interface")]
    SharedLink(LinkId),
    #[error("{0} is declared more than once")]
    DuplicateGroupId(GroupId),
    #[error("more than one group for ({isp}, {region}, {partner})")]
    DuplicateGroup {
        isp: String,
        region: String,
        partner: String,
    },
    #[error("interface {interface} on exporter {exporter} references unknown {link}")]
    OrphanInterface {
        exporter: u32,
        interface: u32,
        link: LinkId,
    },
    #[error("{0} has no links")]
    EmptyGroup(GroupId),
    #[error("{0} has zero capacity")]
    ZeroCapacity(LinkId),
    #[error("group {group} names ISP {isp:?} missing from the ISP list")]
    UnknownIsp { group: GroupId, isp: String },
    #[error("group {group} names region {region:?} missing from the region list")]
    UnknownRegion { group: GroupId, region: String },
    #[error("capacity snapshot names unknown {0}")]
    UnknownLink(LinkId),
    #[error("capacity snapshot at {timestamp} precedes the previous one at {previous}")]
    NonMonotonicTime { timestamp: i64, previous: i64 },
}

pub type Result<T> = std::result::Result<T, InventoryError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    /// Capacity provisioned at configuration time, bits per second.
    pub capacity_bps: u64,
    /// Links missing from the measurement system carry no flow data and are
    /// left out of group capacity.
    #[serde(default = "default_true")]
    pub monitored: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkGroup {
    pub id: GroupId,
    pub isp: String,
    pub region: String,
    /// Partner network name in clear; anonymized only on public export.
    pub partner: String,
    pub links: Vec<Link>,
}

impl LinkGroup {
    pub fn monitored_links(&self) -> impl Iterator<Item = &Link> {
        self.links.iter().filter(|l| l.monitored)
    }

    /// Configured capacity of the monitored member links.
    pub fn configured_capacity_bps(&self) -> u64 {
        self.monitored_links().map(|l| l.capacity_bps).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceMapping {
    pub exporter: u32,
    pub interface: u32,
    pub link: LinkId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacitySnapshot {
    pub timestamp: i64,
    pub entries: BTreeMap<LinkId, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolution {
    Group(GroupId),
    Unmonitored,
}

#[derive(Debug, Default, Deserialize, Serialize)]
pub struct InventoryDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub isps: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<String>,
    #[serde(default, rename = "group")]
    pub groups: Vec<LinkGroup>,
    #[serde(default, rename = "interface")]
    pub interfaces: Vec<InterfaceMapping>,
}

/// Validated topology. Immutable: capacity updates return a new inventory.
#[derive(Debug, Clone)]
pub struct Inventory {
    isps: Vec<String>,
    regions: Vec<String>,
    groups: Vec<LinkGroup>,
    group_index: HashMap<GroupId, usize>,
    link_group: HashMap<LinkId, GroupId>,
    interface_map: HashMap<(u32, u32), LinkId>,
    interfaces: Vec<InterfaceMapping>,
    // Piecewise-constant capacity per link, sorted by effective time; the
    // first entry is the configured value, effective from i64::MIN.
    capacity_history: HashMap<LinkId, Vec<(i64, u64)>>,
    last_snapshot: Option<i64>,
}

impl Inventory {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_doc(toml::from_str(text)?)
    }

    pub fn from_doc(doc: InventoryDoc) -> Result<Self> {
        let mut link_group = HashMap::new();
        let mut group_index = HashMap::new();
        let mut triples = BTreeSet::new();
        let mut capacity_history = HashMap::new();

        for (idx, group) in doc.groups.iter().enumerate() {
            if group_index.insert(group.id, idx).is_some() {
                return Err(InventoryError::DuplicateGroupId(group.id));
            }
            if group.links.is_empty() {
                return Err(InventoryError::EmptyGroup(group.id));
            }
            if !doc.isps.is_empty() && !doc.isps.contains(&group.isp) {
                return Err(InventoryError::UnknownIsp {
                    group: group.id,
                    isp: group.isp.clone(),
                });
            }
            if !doc.regions.is_empty() && !doc.regions.contains(&group.region) {
                return Err(InventoryError::UnknownRegion {
                    group: group.id,
                    region: group.region.clone(),
                });
            }
            if !triples.insert((&group.isp, &group.region, &group.partner)) {
                return Err(InventoryError::DuplicateGroup {
                    isp: group.isp.clone(),
                    region: group.region.clone(),
                    partner: group.partner.clone(),
                });
            }
            for link in &group.links {
                if link.capacity_bps == 0 {
                    return Err(InventoryError::ZeroCapacity(link.id));
                }
                if link_group.insert(link.id, group.id).is_some() {
                    return Err(InventoryError::DuplicateLinkId(link.id));
                }
                capacity_history.insert(link.id, vec![(i64::MIN, link.capacity_bps)]);
            }
        }

        let mut interface_map = HashMap::new();
        let mut mapped_links = BTreeSet::new();
        for m in &doc.interfaces {
            if !link_group.contains_key(&m.link) {
                return Err(InventoryError::OrphanInterface {
                    exporter: m.exporter,
                    interface: m.interface,
                    link: m.link,
                });
            }
            if interface_map.insert((m.exporter, m.interface), m.link).is_some() {
                return Err(InventoryError::DuplicateLink {
                    exporter: m.exporter,
                    interface: m.interface,
                });
            }
            if !mapped_links.insert(m.link) {
                return Err(InventoryError::SharedLink(m.link));
            }
        }

        let isps = if doc.isps.is_empty() {
            doc.groups
                .iter()
                .map(|g| g.isp.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        } else {
            doc.isps
        };
        let regions = if doc.regions.is_empty() {
            doc.groups
                .iter()
                .map(|g| g.region.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        } else {
            doc.regions
        };

        Ok(Self {
            isps,
            regions,
            groups: doc.groups,
            group_index,
            link_group,
            interface_map,
            interfaces: doc.interfaces,
            capacity_history,
            last_snapshot: None,
        })
    }

    pub fn from_reader(mut reader: impl Read) -> std::io::Result<Result<Self>> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Ok(Self::from_toml(&text))
    }

    /// Serializes the configured topology (without capacity history).
    pub fn to_toml(&self) -> String {
        let doc = InventoryDoc {
            isps: self.isps.clone(),
            regions: self.regions.clone(),
            groups: self.groups.clone(),
            interfaces: self.interfaces.clone(),
        };
        toml::to_string(&doc).expect("inventory document serializes")
    }

    pub fn isps(&self) -> &[String] {
        &self.isps
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn groups(&self) -> &[LinkGroup] {
        &self.groups
    }

    pub fn interfaces(&self) -> &[InterfaceMapping] {
        &self.interfaces
    }

    pub fn group(&self, id: GroupId) -> Option<&LinkGroup> {
        self.group_index.get(&id).map(|&i| &self.groups[i])
    }

    pub fn group_of_link(&self, link: LinkId) -> Option<GroupId> {
        self.link_group.get(&link).copied()
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        let group = self.group(self.group_of_link(id)?)?;
        group.links.iter().find(|l| l.id == id)
    }

    pub fn interface_of_link(&self, link: LinkId) -> Option<(u32, u32)> {
        self.interfaces
            .iter()
            .find(|m| m.link == link)
            .map(|m| (m.exporter, m.interface))
    }

    pub fn link_count(&self) -> usize {
        self.link_group.len()
    }

    /// Fraction of configured links that are covered by flow measurement.
    pub fn monitored_fraction(&self) -> f64 {
        let total = self.link_count();
        if total == 0 {
            return 0.0;
        }
        let monitored = self.groups.iter().map(|g| g.monitored_links().count()).sum::<usize>();
        monitored as f64 / total as f64
    }

    /// Link behind an exporter interface, independent of traffic direction.
    pub fn resolve_link(&self, exporter: u32, interface: u32) -> Option<LinkId> {
        let link = *self.interface_map.get(&(exporter, interface))?;
        self.link(link).filter(|l| l.monitored).map(|l| l.id)
    }

    pub fn resolve_interface(&self, exporter: u32, interface: u32) -> Resolution {
        match self.resolve_link(exporter, interface) {
            Some(link) => Resolution::Group(self.link_group[&link]),
            None => Resolution::Unmonitored,
        }
    }

    /// Resolves a record through its partner-facing interface.
    pub fn resolve_record(&self, record: &FlowRecord) -> Resolution {
        self.resolve_interface(record.exporter, record.link_interface())
    }

    pub fn capacity_at(&self, link: LinkId, t: i64) -> Option<u64> {
        let history = self.capacity_history.get(&link)?;
        let idx = history.partition_point(|&(at, _)| at <= t);
        Some(history[idx.saturating_sub(1)].1)
    }

    /// Sum of monitored member-link capacities effective at `t`.
    pub fn group_capacity_at(&self, group: GroupId, t: i64) -> Option<u64> {
        let group = self.group(group)?;
        Some(
            group
                .monitored_links()
                .map(|l| self.capacity_at(l.id, t).unwrap_or(l.capacity_bps))
                .sum(),
        )
    }

    pub fn total_capacity_at(&self, t: i64) -> u64 {
        self.groups.iter().filter_map(|g| self.group_capacity_at(g.id, t)).sum()
    }

    pub fn capacity_history(&self, link: LinkId) -> Option<&[(i64, u64)]> {
        self.capacity_history.get(&link).map(Vec::as_slice)
    }

    pub fn apply_capacity_snapshot(&self, snap: &CapacitySnapshot) -> Result<Self> {
        if let Some(previous) = self.last_snapshot {
            if snap.timestamp < previous {
                return Err(InventoryError::NonMonotonicTime {
                    timestamp: snap.timestamp,
                    previous,
                });
            }
        }
        for (&link, &capacity) in &snap.entries {
            if !self.capacity_history.contains_key(&link) {
                return Err(InventoryError::UnknownLink(link));
            }
            if capacity == 0 {
                return Err(InventoryError::ZeroCapacity(link));
            }
        }
        let mut next = self.clone();
        for (&link, &capacity) in &snap.entries {
            let history = next.capacity_history.get_mut(&link).expect("checked above");
            match history.last_mut() {
                Some(last) if last.0 == snap.timestamp => last.1 = capacity,
                _ => history.push((snap.timestamp, capacity)),
            }
        }
        next.last_snapshot = Some(snap.timestamp);
        Ok(next)
    }

    pub fn apply_capacity_snapshots<'a>(&self, snaps: impl IntoIterator<Item = &'a CapacitySnapshot>) -> Result<Self> {
        let mut inv = self.clone();
        for snap in snaps {
            inv = inv.apply_capacity_snapshot(snap)?;
        }
        Ok(inv)
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct SnapshotRow {
    timestamp: i64,
    link_id: u32,
    capacity_bps: u64,
}

/// Reads `timestamp,link_id,capacity_bps` rows, grouping consecutive rows
/// with equal timestamps into one snapshot.
pub fn read_capacity_snapshots(reader: impl Read) -> Result<Vec<CapacitySnapshot>> {
    let mut snaps: Vec<CapacitySnapshot> = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let row: SnapshotRow = row?;
        match snaps.last_mut() {
            Some(last) if last.timestamp == row.timestamp => {
                last.entries.insert(LinkId(row.link_id), row.capacity_bps);
            }
            Some(last) if last.timestamp > row.timestamp => {
                return Err(InventoryError::NonMonotonicTime {
                    timestamp: row.timestamp,
                    previous: last.timestamp,
                });
            }
            _ => snaps.push(CapacitySnapshot {
                timestamp: row.timestamp,
                entries: BTreeMap::from([(LinkId(row.link_id), row.capacity_bps)]),
            }),
        }
    }
    Ok(snaps)
}

pub fn write_capacity_snapshots(snaps: &[CapacitySnapshot], writer: impl std::io::Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for snap in snaps {
        for (link, &capacity_bps) in &snap.entries {
            w.serialize(SnapshotRow {
                timestamp: snap.timestamp,
                link_id: link.0,
                capacity_bps,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
