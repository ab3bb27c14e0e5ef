// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Flow records carried over IPFIX and the per-session template cache.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::codec::split_messages;
use super::codec::{CodecError, DataSet, FieldSpecifier, FlowTemplate, IpfixMessage, Set, HEADER_LEN, SET_HEADER_LEN};

/// IANA Information Element ids used by the flow record layout.
pub mod ie {
    pub const OCTET_DELTA_COUNT: u16 = 1;
    pub const PACKET_DELTA_COUNT: u16 = 2;
    pub const INGRESS_INTERFACE: u16 = 10;
    pub const EGRESS_INTERFACE: u16 = 14;
    pub const FLOW_DIRECTION: u16 = 61;
    pub const EXPORTER_IPV4_ADDRESS: u16 = 130;
    pub const FLOW_START_MILLISECONDS: u16 = 152;
    pub const FLOW_END_MILLISECONDS: u16 = 153;
}

/// Template id used by [`FlowExporter`].
pub const FLOW_TEMPLATE_ID: u16 = 256;

/// Traffic direction relative to the access ISP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Partner network towards the access ISP.
    Ingress,
    /// Access ISP towards the partner network.
    Egress,
}

impl Direction {
    fn from_wire(value: u64) -> Option<Self> {
        match value {
            0 => Some(Direction::Ingress),
            1 => Some(Direction::Egress),
            _ => None,
        }
    }

    fn to_wire(self) -> u8 {
        match self {
            Direction::Ingress => 0,
            Direction::Egress => 1,
        }
    }
}

/// One exported flow, with sampled (not yet normalized) counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowRecord {
    pub octet_delta: u64,
    pub packet_delta: u64,
    pub flow_start_ms: u64,
    pub flow_end_ms: u64,
    pub input_interface: u32,
    pub output_interface: u32,
    pub direction: Direction,
    pub exporter: u32,
}

impl FlowRecord {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.flow_end_ms < self.flow_start_ms {
            return Err("flow ends before it starts");
        }
        if self.packet_delta > 0 && self.octet_delta < self.packet_delta {
            return Err("fewer octets than packets");
        }
        Ok(())
    }

    /// The interface facing the partner network for this record's direction.
    pub fn link_interface(&self) -> u32 {
        match self.direction {
            Direction::Ingress => self.input_interface,
            Direction::Egress => self.output_interface,
        }
    }
}

/// The eight-field record layout written by [`FlowExporter`].
pub fn flow_template() -> FlowTemplate {
    FlowTemplate {
        template_id: FLOW_TEMPLATE_ID,
        fields: vec![
            FieldSpecifier::iana(ie::OCTET_DELTA_COUNT, 8),
            FieldSpecifier::iana(ie::PACKET_DELTA_COUNT, 8),
            FieldSpecifier::iana(ie::FLOW_START_MILLISECONDS, 8),
            FieldSpecifier::iana(ie::FLOW_END_MILLISECONDS, 8),
            FieldSpecifier::iana(ie::INGRESS_INTERFACE, 4),
            FieldSpecifier::iana(ie::EGRESS_INTERFACE, 4),
            FieldSpecifier::iana(ie::FLOW_DIRECTION, 1),
            FieldSpecifier::iana(ie::EXPORTER_IPV4_ADDRESS, 4),
        ],
    }
}

/// Appends `record` in the layout of [`flow_template`].
pub fn encode_record(record: &FlowRecord, out: &mut Vec<u8>) {
    out.extend_from_slice(&record.octet_delta.to_be_bytes());
    out.extend_from_slice(&record.packet_delta.to_be_bytes());
    out.extend_from_slice(&record.flow_start_ms.to_be_bytes());
    out.extend_from_slice(&record.flow_end_ms.to_be_bytes());
    out.extend_from_slice(&record.input_interface.to_be_bytes());
    out.extend_from_slice(&record.output_interface.to_be_bytes());
    out.push(record.direction.to_wire());
    out.extend_from_slice(&record.exporter.to_be_bytes());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateKey {
    pub exporter: u32,
    pub observation_domain: u32,
    pub template_id: u16,
}

/// Non-fatal conditions met while extracting flows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractEvent {
    /// A data set arrived before any template with its id; the set was skipped.
    UnknownTemplate { key: TemplateKey, skipped_bytes: usize },
    /// A decoded record broke a [`FlowRecord`] invariant and was dropped.
    InvalidRecord { key: TemplateKey, reason: &'static str },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub records: Vec<FlowRecord>,
    pub events: Vec<ExtractEvent>,
}

impl Extraction {
    pub fn unknown_template_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, ExtractEvent::UnknownTemplate { .. }))
            .count()
    }
}

/// Templates seen so far, keyed by (exporter, observation domain, template id).
/// Later templates replace earlier ones with the same key.
///
/// A cache belongs to one collector session and is not meant to be shared
/// between workers.
#[derive(Debug, Clone, Default)]
pub struct TemplateCache {
    templates: HashMap<TemplateKey, FlowTemplate>,
}

impl TemplateCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, key: &TemplateKey) -> Option<&FlowTemplate> {
        self.templates.get(key)
    }

    pub fn insert(&mut self, exporter: u32, observation_domain: u32, template: FlowTemplate) {
        let key = TemplateKey {
            exporter,
            observation_domain,
            template_id: template.template_id,
        };
        self.templates.insert(key, template);
    }

    /// Walks the sets of `msg` in order: template sets update the cache, data
    /// sets are decoded with whatever template is cached at that point.
    /// `exporter` identifies the session (e.g. the sender address); it is also
    /// used as the record exporter when the template has no exporter field.
    pub fn extract(&mut self, exporter: u32, msg: &IpfixMessage) -> Extraction {
        let mut out = Extraction::default();
        for set in &msg.sets {
            match set {
                Set::Template(templates) => {
                    for template in templates {
                        self.insert(exporter, msg.observation_domain, template.clone());
                    }
                }
                Set::Data(data) => {
                    let key = TemplateKey {
                        exporter,
                        observation_domain: msg.observation_domain,
                        template_id: data.template_id,
                    };
                    match self.templates.get(&key) {
                        Some(template) => decode_records(key, template, data, &mut out),
                        None => out.events.push(ExtractEvent::UnknownTemplate {
                            key,
                            skipped_bytes: data.records.len(),
                        }),
                    }
                }
                Set::Opaque { .. } => {}
            }
        }
        out
    }
}

/// Free-function form of [`TemplateCache::extract`].
pub fn extract_flows(cache: &mut TemplateCache, exporter: u32, msg: &IpfixMessage) -> Extraction {
    cache.extract(exporter, msg)
}

fn read_uint(bytes: &[u8]) -> Option<u64> {
    if bytes.len() > 8 {
        return None;
    }
    Some(bytes.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b)))
}

fn decode_records(key: TemplateKey, template: &FlowTemplate, data: &DataSet, out: &mut Extraction) {
    let record_len = template.record_len();
    if record_len == 0 {
        return;
    }
    // Trailing bytes shorter than a record are set padding.
    for chunk in data.records.chunks_exact(record_len) {
        let mut record = FlowRecord {
            octet_delta: 0,
            packet_delta: 0,
            flow_start_ms: 0,
            flow_end_ms: 0,
            input_interface: 0,
            output_interface: 0,
            direction: Direction::Ingress,
            exporter: key.exporter,
        };
        let mut direction = None;
        let mut pos = 0;
        for field in &template.fields {
            let bytes = &chunk[pos..pos + field.length as usize];
            pos += field.length as usize;
            if field.enterprise.is_some() {
                continue;
            }
            let Some(value) = read_uint(bytes) else { continue };
            match field.element_id {
                ie::OCTET_DELTA_COUNT => record.octet_delta = value,
                ie::PACKET_DELTA_COUNT => record.packet_delta = value,
                ie::FLOW_START_MILLISECONDS => record.flow_start_ms = value,
                ie::FLOW_END_MILLISECONDS => record.flow_end_ms = value,
                ie::INGRESS_INTERFACE => record.input_interface = value as u32,
                ie::EGRESS_INTERFACE => record.output_interface = value as u32,
                ie::FLOW_DIRECTION => direction = Direction::from_wire(value),
                ie::EXPORTER_IPV4_ADDRESS if field.length == 4 => record.exporter = value as u32,
                _ => {}
            }
        }
        record.direction = direction.unwrap_or(if record.input_interface != 0 {
            Direction::Ingress
        } else {
            Direction::Egress
        });
        match record.validate() {
            Ok(()) => out.records.push(record),
            Err(reason) => out.events.push(ExtractEvent::InvalidRecord { key, reason }),
        }
    }
}

/// Packs flow records into IPFIX messages. Every message repeats the
/// template set so that each one can be decoded on its own.
#[derive(Debug, Clone)]
pub struct FlowExporter {
    observation_domain: u32,
    max_message_len: usize,
    sequence: u32,
    template: FlowTemplate,
}

impl FlowExporter {
    /// Fits messages into a 1500-byte MTU after IP and UDP headers.
    pub const DEFAULT_MAX_MESSAGE_LEN: usize = 1472;

    pub fn new(observation_domain: u32) -> Self {
        Self::with_max_len(observation_domain, Self::DEFAULT_MAX_MESSAGE_LEN)
    }

    pub fn with_max_len(observation_domain: u32, max_message_len: usize) -> Self {
        let template = flow_template();
        let overhead = HEADER_LEN + 2 * SET_HEADER_LEN + 4 + 4 * template.fields.len();
        assert!(
            max_message_len >= overhead + template.record_len() && max_message_len <= super::codec::MAX_MESSAGE_LEN,
            "message size limit cannot hold a single record"
        );
        Self {
            observation_domain,
            max_message_len,
            sequence: 0,
            template,
        }
    }

    pub fn records_per_message(&self) -> usize {
        let overhead = HEADER_LEN + 2 * SET_HEADER_LEN + 4 + 4 * self.template.fields.len();
        (self.max_message_len - overhead) / self.template.record_len()
    }

    /// Builds messages for `records`. The sequence number of each message is
    /// the count of data records exported before it.
    pub fn export(&mut self, records: &[FlowRecord]) -> Vec<IpfixMessage> {
        let per_message = self.records_per_message();
        let record_len = self.template.record_len();
        records
            .chunks(per_message)
            .map(|chunk| {
                let mut payload = Vec::with_capacity(chunk.len() * record_len);
                chunk.iter().for_each(|r| encode_record(r, &mut payload));
                let export_time = chunk.iter().map(|r| r.flow_end_ms / 1000).max().unwrap_or(0) as u32;
                let msg = IpfixMessage {
                    export_time,
                    sequence: self.sequence,
                    observation_domain: self.observation_domain,
                    sets: vec![
                        Set::Template(vec![self.template.clone()]),
                        Set::Data(DataSet {
                            template_id: self.template.template_id,
                            records: payload,
                        }),
                    ],
                };
                self.sequence = self.sequence.wrapping_add(chunk.len() as u32);
                msg
            })
            .collect()
    }

    /// Exports `records` and serializes the messages back to back.
    pub fn export_bytes(&mut self, records: &[FlowRecord]) -> Result<Vec<u8>, CodecError> {
        let mut out = Vec::new();
        for msg in self.export(records) {
            super::codec::encode_into(&msg, &mut out)?;
        }
        Ok(out)
    }
}

/// A fatal decode failure with the byte offset of the message it hit.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at offset {offset}: {source}")]
pub struct StreamError {
    pub offset: usize,
    pub source: CodecError,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StreamDecode {
    pub messages: usize,
    pub records: Vec<FlowRecord>,
    pub events: Vec<ExtractEvent>,
}

/// Decodes a buffer of back-to-back messages from one exporter session.
pub fn decode_stream(buf: &[u8], cache: &mut TemplateCache, exporter: u32) -> Result<StreamDecode, StreamError> {
    let mut out = StreamDecode::default();
    for item in split_messages(buf) {
        let (_, msg) = item.map_err(|(offset, source)| StreamError { offset, source })?;
        let ex = cache.extract(exporter, &msg);
        out.messages += 1;
        out.records.extend(ex.records);
        out.events.extend(ex.events);
    }
    Ok(out)
}
