// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Blocking UDP collector: one IPFIX message per datagram.

use std::io;
use std::net::{IpAddr, SocketAddr, ToSocketAddrs, UdpSocket};

use super::codec::{decode_message, CodecError, MAX_MESSAGE_LEN};
use super::flows::{Extraction, TemplateCache};

#[derive(Debug)]
pub struct Datagram {
    pub peer: SocketAddr,
    pub result: Result<Extraction, CodecError>,
}

pub struct DatagramCollector {
    socket: UdpSocket,
    cache: TemplateCache,
    buf: Vec<u8>,
}

impl DatagramCollector {
    pub fn bind(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Ok(Self {
            socket: UdpSocket::bind(addr)?,
            cache: TemplateCache::new(),
            buf: vec![0; MAX_MESSAGE_LEN],
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    pub fn socket(&self) -> &UdpSocket {
        &self.socket
    }

    /// Waits for the next datagram. The template session is keyed by the
    /// sender's address, so exporters behind distinct addresses never share
    /// templates.
    pub fn recv(&mut self) -> io::Result<Datagram> {
        let (len, peer) = self.socket.recv_from(&mut self.buf)?;
        let result = decode_message(&self.buf[..len]).map(|msg| self.cache.extract(session_id(peer), &msg));
        Ok(Datagram { peer, result })
    }
}

/// Session exporter id for a peer: its IPv4 address as an integer, or the
/// low 32 bits of an IPv6 address.
pub fn session_id(peer: SocketAddr) -> u32 {
    match peer.ip() {
        IpAddr::V4(v4) => u32::from(v4),
        IpAddr::V6(v6) => {
            let o = v6.octets();
            u32::from_be_bytes([o[12], o[13], o[14], o[15]])
        }
    }
}
