// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Sends IPFIX messages over loopback UDP to a collector, which keys its
//! template sessions by the sender's address.

use std::net::UdpSocket;

use interconnect::ipfix::collector::{session_id, DatagramCollector};
use interconnect::ipfix::{encode_message, Direction, FlowExporter, FlowRecord};

fn main() -> std::io::Result<()> {
    let mut collector = DatagramCollector::bind("127.0.0.1:0")?;
    let addr = collector.local_addr()?;
    let sender = UdpSocket::bind("127.0.0.1:0")?;

    let records: Vec<FlowRecord> = (0..200)
        .map(|i| FlowRecord {
            octet_delta: 40 + i * 7,
            packet_delta: 1,
            flow_start_ms: 1_454_284_800_000 + i * 100,
            flow_end_ms: 1_454_284_800_000 + i * 100,
            input_interface: 0,
            output_interface: 3,
            direction: Direction::Egress,
            exporter: 1,
        })
        .collect();
    let messages = FlowExporter::with_max_len(1, 1400).export(&records);
    for msg in &messages {
        sender.send_to(&encode_message(msg).expect("message encodes"), addr)?;
    }

    let mut received = 0;
    for _ in &messages {
        let dgram = collector.recv()?;
        let ex = dgram.result.expect("valid message");
        received += ex.records.len();
        println!(
            "from {} (session {:#010x}): {} records",
            dgram.peer,
            session_id(dgram.peer),
            ex.records.len()
        );
    }
    println!("{received} of {} records received", records.len());
    Ok(())
}
