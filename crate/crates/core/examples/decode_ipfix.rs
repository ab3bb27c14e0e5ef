// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Encodes a few flow records as IPFIX, decodes them back, and shows what a
//! collector does with a data set whose template it has not seen yet.

use interconnect::ipfix::{
    decode_message, decode_stream, Direction, ExtractEvent, FlowExporter, FlowRecord, Set, TemplateCache,
};

fn main() {
    let records: Vec<FlowRecord> = (0..5)
        .map(|i| FlowRecord {
            octet_delta: 1500 * (i + 1),
            packet_delta: i + 1,
            flow_start_ms: 1_454_284_800_000 + i * 1000,
            flow_end_ms: 1_454_284_800_000 + i * 1000 + 250,
            input_interface: 5,
            output_interface: 0,
            direction: Direction::Ingress,
            exporter: 0x0A01_0101,
        })
        .collect();

    let mut exporter = FlowExporter::new(1);
    let bytes = exporter.export_bytes(&records).expect("records encode");
    println!("{} records -> {} bytes of IPFIX", records.len(), bytes.len());

    let decoded = decode_stream(&bytes, &mut TemplateCache::new(), 0).expect("stream decodes");
    println!(
        "decoded {} messages, {} records",
        decoded.messages,
        decoded.records.len()
    );
    assert_eq!(decoded.records, records);
    for r in &decoded.records {
        println!(
            "  if {} {:?}: {} packets, {} octets, {} ms",
            r.link_interface(),
            r.direction,
            r.packet_delta,
            r.octet_delta,
            r.flow_end_ms - r.flow_start_ms
        );
    }

    // A second exporter session whose template message was lost: the data
    // set is skipped and reported, not guessed at.
    let mut data_only = FlowExporter::new(1).export(&records).remove(0);
    data_only.sets.retain(|s| matches!(s, Set::Data(_)));
    let mut cache = TemplateCache::new();
    let ex = cache.extract(7, &data_only);
    if let Some(ExtractEvent::UnknownTemplate { key, skipped_bytes }) = ex.events.first() {
        println!(
            "session 7: no template {} yet, skipped {skipped_bytes} bytes",
            key.template_id
        );
    }

    // A corrupted header is fatal, with the offset of the bad message.
    let mut corrupt = bytes.clone();
    corrupt[1] = 9;
    match decode_stream(&corrupt, &mut TemplateCache::new(), 0) {
        Ok(_) => println!("unexpectedly decoded"),
        Err(e) => println!("corrupt stream: {e}"),
    }
    assert!(decode_message(&corrupt).is_err());
}
