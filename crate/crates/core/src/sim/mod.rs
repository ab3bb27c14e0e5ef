// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Packet-level traffic simulator with exact ground truth.
//!
//! A run draws flows per link group, hashes each onto one member link,
//! and from there feeds three consumers: the ground-truth byte counts, SNMP
//! style interface counters, and router-side packet sampling. Sampled
//! records go through the real IPFIX encoder and decoder before they reach
//! the pipeline.

pub mod compare;
pub mod fleet;
pub mod model;
pub mod sampling;
pub mod scenario;
pub mod snmp;
pub mod traffic;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ipfix::{decode_stream, CodecError, ExtractEvent, FlowExporter, FlowRecord, StreamError, TemplateCache};

pub use compare::{compare_ipfix_snmp, LinkRatio, RatioStats, MIN_COMPARE_LINKS};
pub use fleet::Fleet;
pub use model::{DiurnalCurve, FlowClass, FlowSizeModel, PacketSizeModel, TrafficModel};
pub use sampling::{sample_stream, ACTIVE_TIMEOUT_MS};
pub use scenario::{FleetRef, Scenario, ScenarioRun};
pub use snmp::{snmp_emulate, LinkCounters, SnmpConfig, SnmpSeries};
pub use traffic::{generate, generate_truth, lag_assign, FlowKey, GroundTruth, Packet, PacketStream, SimFlow};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid traffic model: {0}")]
    Model(&'static str),
    #[error("run start {start} and duration {duration_secs} s must be non-negative multiples of 300 s")]
    Duration { start: i64, duration_secs: i64 },
    #[error("poll interval must be at least 1 s")]
    PollInterval,
    #[error("{found} links with counter data, at least {required} needed")]
    InsufficientLinks { found: usize, required: usize },
    #[error("unknown builtin fleet {0:?}")]
    UnknownFleet(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Encodes records as one IPFIX stream per exporter, observation domain 1,
/// concatenated in exporter order.
pub fn export_ipfix(records: &[FlowRecord]) -> Result<Vec<u8>, CodecError> {
    let mut by_exporter: BTreeMap<u32, Vec<FlowRecord>> = BTreeMap::new();
    for r in records {
        by_exporter.entry(r.exporter).or_default().push(*r);
    }
    let mut out = Vec::new();
    for recs in by_exporter.values() {
        out.extend(FlowExporter::new(1).export_bytes(recs)?);
    }
    Ok(out)
}

/// Decodes a stream written by [`export_ipfix`]. Records carry their
/// exporter, so a single session identity suffices.
pub fn import_ipfix(buf: &[u8]) -> Result<(Vec<FlowRecord>, Vec<ExtractEvent>), SimError> {
    let decoded = decode_stream(buf, &mut TemplateCache::new(), 0)?;
    Ok((decoded.records, decoded.events))
}
