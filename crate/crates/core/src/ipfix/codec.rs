// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Message and set framing for IPFIX (RFC 7011 section 3).
//!
//! ```text
//!  0                   1                   2                   3
//!  0 1 2 3 4 5 6 7 8 9 0 1 2 3 4 5 6 7 8 9 0 1 2 3 4 5 6 7 8 9 0 1
//! +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
//! |       Version Number          |            Length             |
//! +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
//! |                           Export Time                         |
//! +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
//! |                       Sequence Number                         |
//! +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
//! |                    Observation Domain ID                      |
//! +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
//! ```
//!
//! Every multi-byte integer is big-endian.

use thiserror::Error;

pub const VERSION: u16 = 10;
pub const HEADER_LEN: usize = 16;
pub const SET_HEADER_LEN: usize = 4;
pub const TEMPLATE_HEADER_LEN: usize = 4;
pub const MAX_MESSAGE_LEN: usize = u16::MAX as usize;

/// Set id 2 is reserved for Template Sets.
pub const TEMPLATE_SET_ID: u16 = 2;
/// Set id 3 is reserved for Options Template Sets.
pub const OPTIONS_TEMPLATE_SET_ID: u16 = 3;
/// Data Sets and Template Records use ids 256 and above.
pub const MIN_DATA_SET_ID: u16 = 256;

const ENTERPRISE_BIT: u16 = 0x8000;
const VARIABLE_LENGTH: u16 = u16::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("unsupported IPFIX version {0}, expected 10")]
    BadVersion(u16),
    #[error("message truncated: {declared} bytes declared, {available} available")]
    Truncated { declared: usize, available: usize },
    #[error("message length field {0} is shorter than the 16-byte header")]
    BadLength(u16),
    #[error("malformed set at byte {offset}: {reason}")]
    MalformedSet { offset: usize, reason: &'static str },
    #[error("serialized message would be {0} bytes, above the 65535 limit")]
    OversizeMessage(usize),
    #[error("message violates an encoding invariant: {0}")]
    Invalid(&'static str),
}

pub type Result<T> = std::result::Result<T, CodecError>;

/// One Field Specifier of a Template Record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpecifier {
    /// Information Element identifier without the enterprise bit.
    pub element_id: u16,
    pub length: u16,
    pub enterprise: Option<u32>,
}

impl FieldSpecifier {
    pub const fn iana(element_id: u16, length: u16) -> Self {
        Self {
            element_id,
            length,
            enterprise: None,
        }
    }

    fn encoded_len(&self) -> usize {
        if self.enterprise.is_some() {
            8
        } else {
            4
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowTemplate {
    pub template_id: u16,
    pub fields: Vec<FieldSpecifier>,
}

impl FlowTemplate {
    pub fn new(template_id: u16, fields: Vec<FieldSpecifier>) -> Result<Self> {
        let template = Self { template_id, fields };
        template.validate()?;
        Ok(template)
    }

    /// Byte length of one data record laid out by this template.
    pub fn record_len(&self) -> usize {
        self.fields.iter().map(|f| f.length as usize).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.template_id < MIN_DATA_SET_ID {
            return Err(CodecError::Invalid("template id below 256"));
        }
        if self.fields.is_empty() {
            return Err(CodecError::Invalid("template without fields"));
        }
        for field in &self.fields {
            if field.length == 0 || field.length == VARIABLE_LENGTH {
                return Err(CodecError::Invalid("field length must be fixed and non-zero"));
            }
            if field.element_id & ENTERPRISE_BIT != 0 {
                return Err(CodecError::Invalid("element id carries the enterprise bit"));
            }
        }
        Ok(())
    }

    fn encoded_len(&self) -> usize {
        TEMPLATE_HEADER_LEN + self.fields.iter().map(FieldSpecifier::encoded_len).sum::<usize>()
    }
}

/// Data records of one Data Set, still in wire form. Decoding the records
/// needs the matching template, see [`crate::ipfix::TemplateCache`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSet {
    pub template_id: u16,
    pub records: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Set {
    Template(Vec<FlowTemplate>),
    Data(DataSet),
    /// Options templates and reserved set ids, carried through untouched.
    Opaque {
        set_id: u16,
        body: Vec<u8>,
    },
}

impl Set {
    fn encoded_len(&self) -> usize {
        SET_HEADER_LEN
            + match self {
                Set::Template(templates) => templates.iter().map(FlowTemplate::encoded_len).sum(),
                Set::Data(data) => data.records.len(),
                Set::Opaque { body, .. } => body.len(),
            }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IpfixMessage {
    pub export_time: u32,
    pub sequence: u32,
    pub observation_domain: u32,
    pub sets: Vec<Set>,
}

impl IpfixMessage {
    pub fn version(&self) -> u16 {
        VERSION
    }

    /// Exact serialized length, i.e. the header length field after encoding.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.sets.iter().map(Set::encoded_len).sum::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        for set in &self.sets {
            match set {
                Set::Template(templates) => {
                    if templates.is_empty() {
                        return Err(CodecError::Invalid("empty template set"));
                    }
                    templates.iter().try_for_each(FlowTemplate::validate)?;
                }
                Set::Data(data) => {
                    if data.template_id < MIN_DATA_SET_ID {
                        return Err(CodecError::Invalid("data set id below 256"));
                    }
                }
                Set::Opaque { set_id, .. } => {
                    if *set_id == TEMPLATE_SET_ID || *set_id >= MIN_DATA_SET_ID {
                        return Err(CodecError::Invalid("opaque set id collides with template or data ids"));
                    }
                }
            }
        }
        Ok(())
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let out = self.buf.get(self.pos..end)?;
        self.pos = end;
        Some(out)
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Decodes the message at the start of `raw`. Trailing bytes past the
/// declared length are ignored; use [`split_messages`] for streams.
pub fn decode_message(raw: &[u8]) -> Result<IpfixMessage> {
    decode_prefix(raw).map(|(msg, _)| msg)
}

/// Like [`decode_message`], also returning the consumed byte count, which
/// always equals the header length field.
pub fn decode_prefix(raw: &[u8]) -> Result<(IpfixMessage, usize)> {
    if raw.len() < HEADER_LEN {
        return Err(CodecError::Truncated {
            declared: HEADER_LEN,
            available: raw.len(),
        });
    }
    let version = u16::from_be_bytes([raw[0], raw[1]]);
    if version != VERSION {
        return Err(CodecError::BadVersion(version));
    }
    let length = u16::from_be_bytes([raw[2], raw[3]]);
    let declared = length as usize;
    if declared < HEADER_LEN {
        return Err(CodecError::BadLength(length));
    }
    if declared > raw.len() {
        return Err(CodecError::Truncated {
            declared,
            available: raw.len(),
        });
    }

    let mut reader = Reader::new(&raw[..declared]);
    reader.take(4);
    let export_time = reader.u32().unwrap_or_default();
    let sequence = reader.u32().unwrap_or_default();
    let observation_domain = reader.u32().unwrap_or_default();

    let mut sets = Vec::new();
    while reader.remaining() > 0 {
        let offset = reader.pos;
        let malformed = |reason| CodecError::MalformedSet { offset, reason };
        if reader.remaining() < SET_HEADER_LEN {
            return Err(malformed("trailing bytes shorter than a set header"));
        }
        let set_id = reader.u16().unwrap_or_default();
        let set_len = reader.u16().unwrap_or_default() as usize;
        if set_len < SET_HEADER_LEN {
            return Err(malformed("set length below 4"));
        }
        let body = reader
            .take(set_len - SET_HEADER_LEN)
            .ok_or_else(|| malformed("set overruns message"))?;
        sets.push(match set_id {
            TEMPLATE_SET_ID => Set::Template(decode_templates(body, offset + SET_HEADER_LEN)?),
            id if id >= MIN_DATA_SET_ID => Set::Data(DataSet {
                template_id: id,
                records: body.to_vec(),
            }),
            id => Set::Opaque {
                set_id: id,
                body: body.to_vec(),
            },
        });
    }

    Ok((
        IpfixMessage {
            export_time,
            sequence,
            observation_domain,
            sets,
        },
        declared,
    ))
}

fn decode_templates(body: &[u8], base: usize) -> Result<Vec<FlowTemplate>> {
    // Shortest possible template record: header plus one IANA field.
    const MIN_RECORD: usize = TEMPLATE_HEADER_LEN + 4;

    let mut reader = Reader::new(body);
    let mut templates = Vec::new();
    while reader.remaining() >= MIN_RECORD {
        let offset = base + reader.pos;
        let malformed = |reason| CodecError::MalformedSet { offset, reason };
        let template_id = reader.u16().unwrap_or_default();
        let field_count = reader.u16().unwrap_or_default();
        if template_id < MIN_DATA_SET_ID {
            return Err(malformed("template id below 256"));
        }
        if field_count == 0 {
            return Err(malformed("template withdrawal or empty template"));
        }
        let mut fields = Vec::with_capacity(field_count as usize);
        for _ in 0..field_count {
            let raw_id = reader.u16().ok_or_else(|| malformed("field specifier truncated"))?;
            let length = reader.u16().ok_or_else(|| malformed("field specifier truncated"))?;
            if length == 0 || length == VARIABLE_LENGTH {
                return Err(malformed("zero or variable field length"));
            }
            let enterprise = if raw_id & ENTERPRISE_BIT != 0 {
                Some(reader.u32().ok_or_else(|| malformed("enterprise number truncated"))?)
            } else {
                None
            };
            fields.push(FieldSpecifier {
                element_id: raw_id & !ENTERPRISE_BIT,
                length,
                enterprise,
            });
        }
        templates.push(FlowTemplate { template_id, fields });
    }
    // Anything left over is set padding.
    if templates.is_empty() {
        return Err(CodecError::MalformedSet {
            offset: base,
            reason: "template set without template records",
        });
    }
    Ok(templates)
}

pub fn encode_message(msg: &IpfixMessage) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(msg.encoded_len());
    encode_into(msg, &mut out)?;
    Ok(out)
}

/// Appends the encoded message to `out`.
pub fn encode_into(msg: &IpfixMessage, out: &mut Vec<u8>) -> Result<()> {
    msg.validate()?;
    let length = msg.encoded_len();
    if length > MAX_MESSAGE_LEN {
        return Err(CodecError::OversizeMessage(length));
    }
    out.reserve(length);
    out.extend_from_slice(&VERSION.to_be_bytes());
    out.extend_from_slice(&(length as u16).to_be_bytes());
    out.extend_from_slice(&msg.export_time.to_be_bytes());
    out.extend_from_slice(&msg.sequence.to_be_bytes());
    out.extend_from_slice(&msg.observation_domain.to_be_bytes());
    for set in &msg.sets {
        let set_len = set.encoded_len() as u16;
        match set {
            Set::Template(templates) => {
                out.extend_from_slice(&TEMPLATE_SET_ID.to_be_bytes());
                out.extend_from_slice(&set_len.to_be_bytes());
                for template in templates {
                    out.extend_from_slice(&template.template_id.to_be_bytes());
                    out.extend_from_slice(&(template.fields.len() as u16).to_be_bytes());
                    for field in &template.fields {
                        let raw_id = field.element_id | if field.enterprise.is_some() { ENTERPRISE_BIT } else { 0 };
                        out.extend_from_slice(&raw_id.to_be_bytes());
                        out.extend_from_slice(&field.length.to_be_bytes());
                        if let Some(pen) = field.enterprise {
                            out.extend_from_slice(&pen.to_be_bytes());
                        }
                    }
                }
            }
            Set::Data(data) => {
                out.extend_from_slice(&data.template_id.to_be_bytes());
                out.extend_from_slice(&set_len.to_be_bytes());
                out.extend_from_slice(&data.records);
            }
            Set::Opaque { set_id, body } => {
                out.extend_from_slice(&set_id.to_be_bytes());
                out.extend_from_slice(&set_len.to_be_bytes());
                out.extend_from_slice(body);
            }
        }
    }
    Ok(())
}

/// Iterator over a buffer of back-to-back messages, yielding each message
/// with its byte offset. Stops after the first error.
pub struct MessageIter<'a> {
    buf: &'a [u8],
    offset: usize,
    failed: bool,
}

pub fn split_messages(buf: &[u8]) -> MessageIter<'_> {
    MessageIter {
        buf,
        offset: 0,
        failed: false,
    }
}

impl Iterator for MessageIter<'_> {
    type Item = std::result::Result<(usize, IpfixMessage), (usize, CodecError)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.offset >= self.buf.len() {
            return None;
        }
        let start = self.offset;
        match decode_prefix(&self.buf[start..]) {
            Ok((msg, consumed)) => {
                self.offset += consumed;
                Some(Ok((start, msg)))
            }
            Err(err) => {
                self.failed = true;
                Some(Err((start, err)))
            }
        }
    }
}
