// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! IPFIX subset: message framing, flow record layout, template sessions.

pub mod codec;
pub mod collector;
pub mod flows;

pub use codec::{
    decode_message, decode_prefix, encode_message, split_messages, CodecError, DataSet, FieldSpecifier, FlowTemplate,
    IpfixMessage, Set,
};
pub use flows::{
    decode_stream, extract_flows, flow_template, Direction, ExtractEvent, Extraction, FlowExporter, FlowRecord,
    StreamDecode, StreamError, TemplateCache, TemplateKey,
};
