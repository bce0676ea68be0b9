// Copyright 2026 The Colaboot Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal lock-step RFC 1350 client on its own socket, independent of the server's
// transfer logic.
#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "colaboot/tftp_packet.hpp"
#include "colaboot/udp_socket.hpp"

namespace colaboot::testing {

struct TftpClient {
  UdpSocket sock = UdpSocket::bind(Ipv4Address(127, 0, 0, 1), 0);
  UdpEndpoint server;
  std::optional<UdpEndpoint> peer;
  std::size_t blocks = 0;      // DATA packets accepted in the last fetch
  std::size_t wraps = 0;       // times the block number went from 65535 to 0

  void send(const UdpEndpoint& to, const netproto::TftpPacket& p) {
    sock.send_to(to, netproto::encode_tftp(p));
  }

  std::optional<std::pair<UdpEndpoint, netproto::TftpPacket>> recv(
      std::chrono::milliseconds t = std::chrono::seconds(2)) {
    auto d = sock.receive(t);
    if (!d) return std::nullopt;
    return std::make_pair(d->from, netproto::decode_tftp(d->bytes));
  }

  // The file, or the error code the server answered with.
  std::variant<std::vector<std::uint8_t>, std::uint16_t> fetch(const std::string& name,
                                                               netproto::TftpOptions opts = {}) {
    send(server, netproto::TftpRrq{name, "octet", opts});
    std::vector<std::uint8_t> out;
    std::size_t blksize = 512;
    std::uint16_t expect = 1;
    blocks = wraps = 0;
    for (;;) {
      auto r = recv();
      if (!r) throw std::runtime_error("tftp fetch of " + name + " timed out");
      auto& [from, pkt] = *r;
      if (!peer) peer = from;
      if (auto* e = std::get_if<netproto::TftpErrorPacket>(&pkt)) return e->code;
      if (auto* o = std::get_if<netproto::TftpOack>(&pkt)) {
        if (auto* v = netproto::find_tftp_option(o->options, "blksize")) blksize = std::stoul(v->value);
        send(*peer, netproto::TftpAck{0});
        continue;
      }
      auto& data = std::get<netproto::TftpData>(pkt);
      if (data.block != expect) continue;
      out.insert(out.end(), data.payload.begin(), data.payload.end());
      send(*peer, netproto::TftpAck{data.block});
      ++blocks;
      if (expect == 0xFFFF) ++wraps;
      ++expect;
      if (data.payload.size() < blksize) return out;
    }
  }
};

}  // namespace colaboot::testing
