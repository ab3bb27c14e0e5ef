// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files: one TOML document describing a complete simulated run.
//!
//! ```toml
//! seed = 7
//! start = "2016-02-01T00:00:00Z"
//! duration_secs = 86400
//! sampling = { mode = "random", factor = 1000 }
//!
//! [fleet]
//! builtin = "demo"          # or: inventory = "fleet.toml", volume_factor = 1000
//!
//! [snmp]
//! poll_secs = 300
//!
//! [model]                   # any TrafficModel field
//! egress_ratio = 0.12
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::compare::{compare_ipfix_snmp, RatioStats};
use super::fleet::Fleet;
use super::model::splitmix64;
use super::snmp::{snmp_emulate, SnmpConfig, SnmpSeries};
use super::traffic::{generate, GroundTruth, PacketStream};
use super::{export_ipfix, import_ipfix, sample_stream, SimError, TrafficModel};
use crate::dataset::{build_private_rows, write_private_csv};
use crate::inventory::Inventory;
use crate::ipfix::{Direction, FlowRecord};
use crate::pipeline::{Aggregator, FlowPipeline, IngestStats, SamplingConfig, SamplingPlan};
use crate::time::parse_timestamp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FleetRef {
    Builtin {
        builtin: String,
    },
    Inventory {
        inventory: PathBuf,
        #[serde(default = "one")]
        volume_factor: u64,
    },
}

fn one() -> u64 {
    1
}

fn default_sampling() -> SamplingConfig {
    SamplingConfig::random(1000).expect("valid factor")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Seeds the traffic model and, derived from it, the samplers.
    pub seed: u64,
    /// Unix seconds or RFC 3339, aligned to 300 s.
    pub start: String,
    pub duration_secs: i64,
    pub fleet: FleetRef,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub snmp: SnmpConfig,
    #[serde(default)]
    pub model: TrafficModel,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn start_ts(&self) -> Result<i64, SimError> {
        parse_timestamp(&self.start).ok_or_else(|| SimError::Scenario(format!("bad start {:?}", self.start)))
    }

    /// Resolves the fleet; relative inventory paths are taken from `base`.
    pub fn load_fleet(&self, base: &Path) -> Result<Fleet, SimError> {
        match &self.fleet {
            FleetRef::Builtin { builtin } => Fleet::builtin(builtin),
            FleetRef::Inventory {
                inventory,
                volume_factor,
            } => {
                let path = base.join(inventory);
                let text =
                    fs::read_to_string(&path).map_err(|e| SimError::Scenario(format!("{}: {e}", path.display())))?;
                let inv =
                    Inventory::from_toml(&text).map_err(|e| SimError::Scenario(format!("{}: {e}", path.display())))?;
                Fleet::uniform(inv, BTreeMap::new(), *volume_factor)
            }
        }
    }

    pub fn run(&self, base: &Path) -> Result<ScenarioRun, SimError> {
        let fleet = self.load_fleet(base)?;
        self.run_fleet(fleet)
    }

    pub fn run_fleet(&self, fleet: Fleet) -> Result<ScenarioRun, SimError> {
        let mut model = fleet.model(&self.model);
        model.seed = self.seed;
        let (stream, truth) = generate(&model, &fleet.simulated, self.start_ts()?, self.duration_secs)?;
        let records = sample_stream(&stream, &self.sampling, splitmix64(self.seed ^ 0x5A3F_11E5));
        let ipfix = export_ipfix(&records)?;
        let snmp = snmp_emulate(&stream, &self.snmp)?;
        Ok(ScenarioRun {
            scenario: self.clone(),
            fleet,
            stream,
            truth,
            records,
            ipfix,
            snmp,
        })
    }
}

/// Counts written alongside a run's files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub start: i64,
    pub duration_secs: i64,
    pub groups: usize,
    pub links: usize,
    pub flows: usize,
    pub packets: u64,
    pub true_ingress_bytes: u64,
    pub true_egress_bytes: u64,
    pub records: usize,
    pub ipfix_bytes: usize,
    pub sampling_mode: String,
    pub sampling_factor: u32,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub fleet: Fleet,
    pub stream: PacketStream,
    pub truth: GroundTruth,
    pub records: Vec<FlowRecord>,
    pub ipfix: Vec<u8>,
    pub snmp: SnmpSeries,
}

impl ScenarioRun {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            seed: self.scenario.seed,
            start: self.stream.start,
            duration_secs: self.stream.duration_secs,
            groups: self.fleet.simulated.groups().len(),
            links: self.stream.links.len(),
            flows: self.stream.flows.len(),
            packets: self.stream.packet_count(),
            true_ingress_bytes: self.truth.total(Direction::Ingress),
            true_egress_bytes: self.truth.total(Direction::Egress),
            records: self.records.len(),
            ipfix_bytes: self.ipfix.len(),
            sampling_mode: format!("{:?}", self.scenario.sampling.mode).to_lowercase(),
            sampling_factor: self.scenario.sampling.factor(),
        }
    }

    /// Records as a collector sees them: decoded from the emitted IPFIX.
    pub fn decoded_records(&self) -> Result<Vec<FlowRecord>, SimError> {
        Ok(import_ipfix(&self.ipfix)?.0)
    }

    /// Decoded records through the pipeline, at simulated volume.
    pub fn aggregate(&self) -> Result<(Aggregator, IngestStats), SimError> {
        let records = self.decoded_records()?;
        let mut pipeline = FlowPipeline::new(
            &self.fleet.simulated,
            SamplingPlan::uniform(self.scenario.sampling),
            Some(self.stream.window()),
        );
        pipeline.ingest_all(&records);
        Ok(pipeline.finish())
    }

    /// Per-link IPFIX/SNMP ratios over the run, from decoded records.
    pub fn ratio_stats(&self, min_links: usize) -> Result<RatioStats, SimError> {
        let records = self.decoded_records()?;
        compare_ipfix_snmp(
            &records,
            &self.fleet.simulated,
            &SamplingPlan::uniform(self.scenario.sampling),
            &self.snmp,
            min_links,
        )
    }

    /// Writes `inventory.toml` (simulated capacities), `flows.ipfix`,
    /// `truth.csv` (private rows of the exact bytes), `snmp.csv` and
    /// `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<RunSummary> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("inventory.toml"), self.fleet.simulated.to_toml())?;
        fs::write(dir.join("flows.ipfix"), &self.ipfix)?;
        let rows = build_private_rows(
            &self.truth.to_aggregator(),
            &self.fleet.simulated,
            Some(self.truth.window()),
        );
        let mut truth = Vec::new();
        write_private_csv(&rows, &mut truth).map_err(std::io::Error::other)?;
        fs::write(dir.join("truth.csv"), truth)?;
        let mut snmp = Vec::new();
        self.snmp.write_csv(&mut snmp).map_err(std::io::Error::other)?;
        fs::write(dir.join("snmp.csv"), snmp)?;
        let summary = self.summary();
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        fs::write(dir.join("summary.json"), json + "\n")?;
        Ok(summary)
    }
}
